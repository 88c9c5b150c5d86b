"""Which norms survive on the idempotent summands of the Burnside ring.

For a P-perfect class L and subgroups K <= H the norm N_K^H descends to
the e_L-summand exactly when every G-conjugate of L inside H already lies
in K.  This module decides that three ways (the subgroup condition, the
marks condition, and the division relation), assembles the admissible
pairs into indexing systems, and builds the localized Green rings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .burnside import (
    BurnsideElement,
    GSet,
    burnside_ring,
    dress_idempotent,
    is_p_local,
    norm,
    restrict,
    restriction_decomposition,
    transfer,
)
from .groups import (
    FiniteGroup,
    PrimeSet,
    Subgroup,
    SubgroupClass,
    as_subgroup,
    class_of,
    double_cosets,
    p_perfect_classes,
    p_residual,
    subgroup_classes,
)


class NotAdmissibleError(ValueError):
    """A localized norm was requested on a pair where it does not exist."""


class IndexingSystemError(AssertionError):
    """An indexing-system closure axiom failed."""


@dataclass(frozen=True)
class NormPair:
    K: Subgroup
    H: Subgroup

    def __post_init__(self):
        if not self.K <= self.H:
            raise ValueError("NormPair needs K <= H")

    @property
    def group(self) -> FiniteGroup:
        return self.H.parent

    def is_reflexive(self) -> bool:
        return self.K == self.H

    def labels(self) -> dict:
        return {"K": class_of(self.K).label, "H": class_of(self.H).label,
                "K_gens": self.K.label, "H_gens": self.H.label}


def _residual_lookup(G: FiniteGroup, P: PrimeSet) -> list[int]:
    """G-class index of O^P(U) for every subgroup U, by lattice index."""
    key = ("res-classes", P.primes, P.all_primes_mode)
    hit = G._cache.get(key)
    if hit is None:
        lat = G.lattice
        _, lookup = lat.classes_within(G.whole)
        hit = [lookup[lat.find(p_residual(U, P))] for U in lat.subgroups]
        G._cache[key] = hit
    return hit


def _idempotent(L: SubgroupClass, P: PrimeSet) -> BurnsideElement:
    G = L.ambient.parent
    key = ("idem", L.ambient.mask, L.index, P.primes, P.all_primes_mode)
    e = G._cache.get(key)
    if e is None:
        e = G._cache[key] = dress_idempotent(L, P)
    return e


def _normed_idempotent(L: SubgroupClass, pair: NormPair, P: PrimeSet) -> BurnsideElement:
    """N_K^H(R^G_K(e_L))."""
    return norm(restrict(_idempotent(L, P), pair.K), pair.H)


# ---------------------------------------------------------------------------
# the three conditions


def condition_star(L: SubgroupClass, pair: NormPair) -> bool:
    """Every G-conjugate of L contained in H is contained in K."""
    hm, km = pair.H.mask, pair.K.mask
    return all(M.mask & km == M.mask for M in L.members if M.mask & hm == M.mask)


def condition_diamond(L: SubgroupClass, pair: NormPair, P: PrimeSet) -> bool:
    """The normed idempotent has mark 1 at every Q <= H with O^P(Q) ~ L."""
    G = pair.group
    lat = G.lattice
    resid = _residual_lookup(G, P)
    n = _normed_idempotent(L, pair, P)
    for i, c in enumerate(n.ring.classes):
        if resid[lat.find(c.representative)] == L.index and n.marks[i] != 1:
            return False
    return True


def norm_descends(L: SubgroupClass, pair: NormPair, P: PrimeSet) -> bool:
    """N_K^H(R_K e_L) divides R_H e_L, tested as N(R_K e) * R_H e == R_H e."""
    e_H = restrict(_idempotent(L, P), pair.H)
    return _normed_idempotent(L, pair, P) * e_H == e_H


# ---------------------------------------------------------------------------
# pair enumeration


def all_pairs(G: FiniteGroup) -> list[NormPair]:
    lat = G.lattice
    return [NormPair(lat.subgroups[k], H) for H in lat.subgroups for k in lat.subgroups_of(H)]


def pairs_up_to_conjugacy(G: FiniteGroup) -> list[NormPair]:
    """One pair (K, H) per simultaneous G-conjugacy class.

    H runs over the canonical class representatives; K over the
    N_G(H)-orbits of subgroups of H, taking the least member of each orbit.
    """
    key = ("pair-reps",)
    hit = G._cache.get(key)
    if hit is not None:
        return hit
    lat = G.lattice
    out = []
    for c in subgroup_classes(G):
        H = c.representative
        N = H.normalizer()
        perms = [lat.conj_perm(g) for g in N.generators]
        seen = set()
        for k in lat.subgroups_of(H):
            if k in seen:
                continue
            orbit = {k}
            todo = [k]
            while todo:
                t = todo.pop()
                for p in perms:
                    u = p[t]
                    if u not in orbit:
                        orbit.add(u)
                        todo.append(u)
            seen |= orbit
            out.append(NormPair(lat.subgroups[min(orbit)], H))
    G._cache[key] = out
    return out


# ---------------------------------------------------------------------------
# equivalence report


@dataclass
class TripleRecord:
    L: str
    pair: NormPair
    star: bool
    diamond: bool
    division: bool

    @property
    def agree(self) -> bool:
        return self.star == self.diamond == self.division

    def to_dict(self) -> dict:
        d = {"L": self.L}
        d.update(self.pair.labels())
        d.update(star=self.star, diamond=self.diamond, division=self.division)
        return d


@dataclass
class TheoremAReport:
    group: str
    order: int
    primes: PrimeSet
    records: list = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(r.agree for r in self.records)

    @property
    def counterexamples(self) -> list:
        return [r for r in self.records if not r.agree]

    def admissible(self, L_label: str, proper_only: bool = True) -> list[NormPair]:
        return [r.pair for r in self.records
                if r.L == L_label and r.star and not (proper_only and r.pair.is_reflexive())]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "triples": len(self.records),
            "counterexamples": len(self.counterexamples),
            "records": [r.to_dict() for r in self.records],
        }


def verify_theorem_a(G: FiniteGroup, P: PrimeSet, every_pair: bool = False) -> TheoremAReport:
    """Compare the subgroup, marks and division conditions on all triples.

    Pairs are taken up to simultaneous conjugacy unless ``every_pair``.
    """
    P = P.for_order(G.order)
    pairs = all_pairs(G) if every_pair else pairs_up_to_conjugacy(G)
    report = TheoremAReport(G.label, G.order, P)
    for L in p_perfect_classes(G, P):
        for pair in pairs:
            report.records.append(TripleRecord(
                L.label, pair,
                condition_star(L, pair),
                condition_diamond(L, pair, P),
                norm_descends(L, pair, P),
            ))
    return report


# ---------------------------------------------------------------------------
# indexing systems


class IndexingSystem:
    """Admissible pairs (K, H) for a group, stored as lattice index pairs.

    ``source`` optionally records the (L-class index, prime set) it came from.
    """

    def __init__(self, group: FiniteGroup, admissible: Iterable[tuple[int, int]], source=None):
        self.group = group
        self.admissible = frozenset(admissible)
        self.source = source

    @classmethod
    def from_predicate(cls, G: FiniteGroup, pred, source=None) -> IndexingSystem:
        lat = G.lattice
        adm = [(lat.find(p.K), lat.find(p.H)) for p in all_pairs(G) if pred(p)]
        return cls(G, adm, source)

    @classmethod
    def complete(cls, G: FiniteGroup) -> IndexingSystem:
        return cls.from_predicate(G, lambda p: True)

    @classmethod
    def trivial(cls, G: FiniteGroup) -> IndexingSystem:
        return cls.from_predicate(G, NormPair.is_reflexive)

    def __contains__(self, pair) -> bool:
        if isinstance(pair, NormPair):
            K, H = pair.K, pair.H
        else:
            K, H = pair
        lat = self.group.lattice
        return (lat.find(K), lat.find(H)) in self.admissible

    def __eq__(self, other):
        return isinstance(other, IndexingSystem) and self.group is other.group and self.admissible == other.admissible

    def __hash__(self):
        return hash(self.admissible)

    def __len__(self):
        return len(self.admissible)

    def __repr__(self):
        return f"<IndexingSystem on {self.group.label}: {len(self)} admissible pairs>"

    def admissible_at(self, H: Subgroup) -> list[Subgroup]:
        lat = self.group.lattice
        h = lat.find(H)
        return [lat.subgroups[k] for k, hh in sorted(self.admissible) if hh == h]

    def pairs(self, up_to_conjugacy: bool = True, proper_only: bool = False) -> list[NormPair]:
        source = pairs_up_to_conjugacy(self.group) if up_to_conjugacy else all_pairs(self.group)
        return [p for p in source if p in self and not (proper_only and p.is_reflexive())]

    def is_complete(self) -> bool:
        return len(self.admissible) == len(all_pairs(self.group))

    def violations(self) -> list[str]:
        """Failures of the four closure axioms, as readable strings."""
        G = self.group
        lat = G.lattice
        subs = lat.subgroups
        adm = self.admissible
        bad = []
        for h in range(len(subs)):
            if (h, h) not in adm:
                bad.append(f"reflexive: ({subs[h].label} <= {subs[h].label}) missing")
        perms = [lat.conj_perm(g) for g in G.whole.generators]
        for k, h in adm:
            for p in perms:
                if (p[k], p[h]) not in adm:
                    bad.append(f"conjugation: ({subs[k].label} <= {subs[h].label}) not closed")
        above = {}
        for k, h in adm:
            above.setdefault(k, []).append(h)
        for a, b in adm:
            for c in above.get(b, ()):
                if (a, c) not in adm:
                    bad.append(f"composition: ({subs[a].label} <= {subs[b].label} <= {subs[c].label})")
        for k, h in adm:
            K, H = subs[k], subs[h]
            for a in lat.subgroups_of(H):
                A = subs[a]
                for x in double_cosets(A, K, H):
                    if (lat.find(A & K.conjugate(x)), a) not in adm:
                        bad.append(f"pullback: ({K.label} <= {H.label}) along {A.label}")
        return bad

    def check(self) -> None:
        bad = self.violations()
        if bad:
            raise IndexingSystemError("; ".join(bad[:5]))


def indexing_system(L: SubgroupClass, P: PrimeSet) -> IndexingSystem:
    """The indexing system I_L of pairs satisfying the subgroup condition."""
    G = L.ambient.parent
    if p_residual(L.representative, P) != L.representative:
        raise ValueError(f"class {L.label} is not P-perfect")
    I = IndexingSystem.from_predicate(G, lambda p: condition_star(L, p), (L.index, P.for_order(G.order)))
    I.check()
    return I


def shared_admissible(pair: NormPair, P: PrimeSet) -> bool:
    """Every P-perfect subgroup of H lies in K."""
    G = pair.group
    lat = G.lattice
    km = pair.K.mask
    for i in lat.subgroups_of(pair.H):
        U = lat.subgroups[i]
        if U.mask & km != U.mask and p_residual(U, P) == U:
            return False
    return True


def intersect_indexing_systems(systems: Sequence[IndexingSystem]) -> IndexingSystem:
    """Levelwise intersection.

    When the inputs are exactly the I_L for all P-perfect classes L, the
    result is also compared pair for pair with :func:`shared_admissible`.
    """
    if not systems:
        raise ValueError("need at least one indexing system")
    G = systems[0].group
    if any(s.group is not G for s in systems):
        raise ValueError("indexing systems over different groups")
    adm = frozenset.intersection(*(s.admissible for s in systems))
    sources = [s.source for s in systems]
    I = IndexingSystem(G, adm)
    I.check()
    if all(s is not None for s in sources) and len({s[1] for s in sources}) == 1:
        P = sources[0][1]
        if {s[0] for s in sources} == {c.index for c in p_perfect_classes(G, P)}:
            direct = IndexingSystem.from_predicate(G, lambda p: shared_admissible(p, P))
            assert direct == I, "intersection disagrees with the direct characterization"
            I.source = ("all", P)
    return I


def shared_indexing_system(G: FiniteGroup, P: PrimeSet) -> IndexingSystem:
    P = P.for_order(G.order)
    return intersect_indexing_systems([indexing_system(L, P) for L in p_perfect_classes(G, P)])


def normality_characterization(L: SubgroupClass, P: PrimeSet) -> tuple[bool, bool]:
    """(L normal in G, every pair whose K contains a conjugate of L is admissible).

    The two always agree; a disagreement raises AssertionError.
    """
    G = L.ambient.parent
    if p_residual(L.representative, P) != L.representative:
        raise ValueError(f"class {L.label} is not P-perfect")
    is_normal = L.representative.is_normal_in(G.whole)
    has_all = True
    for pair in pairs_up_to_conjugacy(G):
        km = pair.K.mask
        if any(M.mask & km == M.mask for M in L.members) and not condition_star(L, pair):
            has_all = False
            break
    assert is_normal == has_all, f"normality corollary fails for {L.label}"
    return is_normal, has_all


def is_admissible_map(X: GSet, Y: GSet, f: Sequence[int], I: IndexingSystem) -> bool:
    """Each point x must give an admissible pair (G_x <= G_f(x))."""
    if X.group != Y.group:
        raise ValueError("G-sets over different groups")
    if len(f) != X.size:
        raise ValueError("point map has the wrong length")
    for g in X.group.generators:
        px, py = X.perm(g), Y.perm(g)
        for x in range(X.size):
            if f[px[x]] != py[f[x]]:
                raise ValueError("point map is not equivariant")
    for x in range(X.size):
        if (X.stabilizer(x), Y.stabilizer(f[x])) not in I:
            return False
    return True


# ---------------------------------------------------------------------------
# localized Green rings


class LocalizedGreenRing:
    """The summand e·A(-)_(P) for an idempotent e of A(G)_(P).

    Values at H are elements y of A(H) with R_H(e)·y = y.  Restriction and
    transfer are those of A(-); the norm is y -> R_H(e)·N(y) and exists only
    where N(R_K e) divides R_H e.
    """

    def __init__(self, e: BurnsideElement, P: PrimeSet):
        if e * e != e:
            raise ValueError("e is not idempotent")
        if not is_p_local(e, P):
            raise ValueError(f"e is not {P}-local")
        self.e = e
        self.P = P
        self.group = e.group

    def idempotent_at(self, H: Subgroup) -> BurnsideElement:
        return restrict(self.e, H)

    def basis(self, H: Subgroup) -> list[SubgroupClass]:
        e_H = self.idempotent_at(H)
        return [c for c, m in zip(e_H.ring.classes, e_H.marks) if m == 1]

    def rank(self, H: Subgroup) -> int:
        return len(self.basis(H))

    def localize(self, a: BurnsideElement) -> BurnsideElement:
        """The canonical map A(H) -> e_H·A(H)."""
        return self.idempotent_at(a.group) * a

    def contains(self, y: BurnsideElement) -> bool:
        return self.localize(y) == y

    def _member(self, y):
        if not self.contains(y):
            raise ValueError("element does not lie in the summand")

    def res(self, y: BurnsideElement, K: Subgroup) -> BurnsideElement:
        self._member(y)
        return restrict(y, K)

    def tr(self, y: BurnsideElement, H: Subgroup) -> BurnsideElement:
        self._member(y)
        return self.idempotent_at(H) * transfer(y, H)

    def descends(self, K: Subgroup, H: Subgroup) -> bool:
        e_H = self.idempotent_at(H)
        return norm(self.idempotent_at(K), H) * e_H == e_H

    def nm(self, y: BurnsideElement, H: Subgroup) -> BurnsideElement:
        self._member(y)
        if not self.descends(y.group, H):
            raise NotAdmissibleError(f"no localized norm from {y.group.label} to {H.label}")
        return self.idempotent_at(H) * norm(y, H)

    def ranks(self) -> dict:
        return {c.label: self.rank(c.representative) for c in subgroup_classes(self.group)}


def localized_green_ring(e: BurnsideElement, P: PrimeSet) -> LocalizedGreenRing:
    return LocalizedGreenRing(e, P)


# ---------------------------------------------------------------------------
# splitting report


def _pair_dicts(pairs):
    return [p.labels() for p in pairs]


def splitting_report(G: FiniteGroup, P: PrimeSet) -> dict:
    """Check the idempotent splitting of A(-)_(P) and tabulate its norms."""
    P = P.for_order(G.order)
    classes = subgroup_classes(G)
    perfect = p_perfect_classes(G, P)
    ring = burnside_ring(G)
    idems = [_idempotent(L, P) for L in perfect]
    total = ring.zero()
    for e in idems:
        total = total + e
    orthogonal = all((idems[i] * idems[j]).is_zero()
                     for i in range(len(idems)) for j in range(i + 1, len(idems)))
    summands = [LocalizedGreenRing(e, P) for e in idems]
    systems = [indexing_system(L, P) for L in perfect]
    shared = intersect_indexing_systems(systems)

    rank_rows = []
    for c in classes:
        H = c.representative
        parts = [s.rank(H) for s in summands]
        rank_rows.append({"H": c.label, "rank": burnside_ring(H).rank, "parts": parts,
                          "additive": sum(parts) == burnside_ring(H).rank})

    shared_pairs = shared.pairs()
    shared_descend = all(norm_descends(L, p, P) for L in perfect for p in shared_pairs)

    factors = []
    for L, e, s, I in zip(perfect, idems, summands, systems):
        factors.append({
            "L": L.label,
            "L_gens": L.representative.label,
            "normal": len(L.members) == 1,
            "marks": list(e.marks),
            "orbit_coeffs": list(e.orbit_coeffs),
            "ranks": s.ranks(),
            "admissible_proper_pairs": _pair_dicts(I.pairs(proper_only=True)),
        })

    experiment = []
    for L in perfect:
        for c in classes:
            experiment.append(restriction_decomposition(L, c.representative, P))

    checks = {
        "sum_is_one": total == ring.one(),
        "orthogonal": orthogonal,
        "rank_additive": all(r["additive"] for r in rank_rows),
        "shared_pairs_descend": shared_descend,
    }
    return {
        "factors": factors,
        "ranks": rank_rows,
        "shared_proper_pairs": _pair_dicts(shared.pairs(proper_only=True)),
        "restriction_experiment": experiment,
        "checks": checks,
        "ok": all(checks.values()),
    }
