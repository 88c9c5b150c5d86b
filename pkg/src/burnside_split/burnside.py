"""Exact (P-local) Burnside rings through their marks.

An element of A(H) is stored as its vector of marks, one exact rational per
H-conjugacy class of subgroups of H, in the class order produced by
:func:`subgroup_classes`.  The orbit basis is reached through the table of
marks, which is triangular in that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from .groups import (
    FiniteGroup,
    PrimeSet,
    Subgroup,
    SubgroupClass,
    as_subgroup,
    class_of,
    double_coset_decomposition,
    p_residual,
    subgroup_classes,
)


class NotPPerfectError(ValueError):
    """The subgroup class does not index an idempotent for this prime set."""


@dataclass(frozen=True, eq=False)
class TableOfMarks:
    """``matrix[i][j]`` is the mark of the orbit ``H/K_j`` at the class ``H_i``."""

    group: Subgroup
    classes: tuple
    matrix: tuple

    def __len__(self):
        return len(self.classes)

    def orbit_marks(self, j: int) -> tuple:
        return tuple(row[j] for row in self.matrix)

    def solve(self, marks: Sequence) -> tuple:
        """Orbit-basis coefficients with the given marks (back substitution)."""
        n = len(self.classes)
        M = self.matrix
        coeffs = [Fraction(0)] * n
        for i in range(n - 1, -1, -1):
            s = Fraction(marks[i])
            row = M[i]
            for j in range(i + 1, n):
                if row[j]:
                    s -= row[j] * coeffs[j]
            coeffs[i] = s / row[i]
        return tuple(coeffs)

    def apply(self, coeffs: Sequence) -> tuple:
        n = len(self.classes)
        return tuple(sum((Fraction(self.matrix[i][j]) * coeffs[j] for j in range(i, n)), Fraction(0))
                     for i in range(n))


class BurnsideRing:
    """The Burnside ring A(H) of a subgroup H, with cached lookup data."""

    def __init__(self, H: Subgroup):
        self.group = H
        G = H.parent
        self.lattice = G.lattice
        self.classes, self._lookup = self.lattice.classes_within(H)

    def __repr__(self):
        return f"<BurnsideRing of {self.group.label} in {self.group.parent.label}, rank {self.rank}>"

    @property
    def rank(self) -> int:
        return len(self.classes)

    def class_index(self, K: Subgroup) -> int:
        """Index of the H-class containing ``K`` (which must lie in H)."""
        return self._lookup[self.lattice.find(K)]

    @cached_property
    def table(self) -> TableOfMarks:
        return table_of_marks(self.group)

    def element(self, marks: Iterable) -> BurnsideElement:
        marks = tuple(Fraction(m) for m in marks)
        if len(marks) != self.rank:
            raise ValueError(f"expected {self.rank} marks, got {len(marks)}")
        return BurnsideElement(self, marks)

    def from_orbits(self, coeffs: Iterable) -> BurnsideElement:
        coeffs = tuple(Fraction(c) for c in coeffs)
        return BurnsideElement(self, self.table.apply(coeffs))

    def orbit(self, K: Subgroup) -> BurnsideElement:
        """The class of the orbit ``H/K``."""
        return BurnsideElement(self, tuple(Fraction(m) for m in self.table.orbit_marks(self.class_index(K))))

    def zero(self) -> BurnsideElement:
        return BurnsideElement(self, (Fraction(0),) * self.rank)

    def one(self) -> BurnsideElement:
        return BurnsideElement(self, (Fraction(1),) * self.rank)


def burnside_ring(H: FiniteGroup | Subgroup) -> BurnsideRing:
    H = as_subgroup(H)
    cache = H.parent._cache
    key = ("ring", H.mask)
    ring = cache.get(key)
    if ring is None:
        ring = cache[key] = BurnsideRing(H)
    return ring


@dataclass(frozen=True, eq=False)
class BurnsideElement:
    ring: BurnsideRing
    marks: tuple

    @property
    def group(self) -> Subgroup:
        return self.ring.group

    @cached_property
    def orbit_coeffs(self) -> tuple:
        return self.ring.table.solve(self.marks)

    def _check(self, other):
        if not isinstance(other, BurnsideElement):
            return NotImplemented
        if other.ring is not self.ring:
            raise ValueError("elements live in different Burnside rings")
        return other

    def __eq__(self, other):
        if not isinstance(other, BurnsideElement):
            return NotImplemented
        return self.ring is other.ring and self.marks == other.marks

    def __hash__(self):
        return hash(self.marks)

    def __add__(self, other):
        other = self._check(other)
        return BurnsideElement(self.ring, tuple(a + b for a, b in zip(self.marks, other.marks)))

    def __sub__(self, other):
        other = self._check(other)
        return BurnsideElement(self.ring, tuple(a - b for a, b in zip(self.marks, other.marks)))

    def __neg__(self):
        return BurnsideElement(self.ring, tuple(-a for a in self.marks))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return BurnsideElement(self.ring, tuple(a * other for a in self.marks))
        other = self._check(other)
        return BurnsideElement(self.ring, tuple(a * b for a, b in zip(self.marks, other.marks)))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return BurnsideElement(self.ring, tuple(a ** n for a in self.marks))

    def is_idempotent(self) -> bool:
        return all(m * m == m for m in self.marks)

    def is_zero(self) -> bool:
        return not any(self.marks)

    def __repr__(self):
        return f"BurnsideElement({self.group.label}: marks={[str(m) for m in self.marks]})"


# ---------------------------------------------------------------------------
# table of marks


def table_of_marks(G: FiniteGroup | Subgroup) -> TableOfMarks:
    """The table of marks of ``G`` in the class order of :func:`subgroup_classes`.

    Uses mark(G/K at H) = |N_G(H)| * #{conjugates of H inside K} / |K|.
    """
    A = as_subgroup(G)
    classes = subgroup_classes(A)
    n = len(classes)
    norms = [c.representative.normalizer(A).order for c in classes]
    matrix = [[0] * n for _ in range(n)]
    for j, cj in enumerate(classes):
        K = cj.representative
        km = K.mask
        for i in range(j + 1):
            ci = classes[i]
            if K.order % ci.order:
                continue
            inside = sum(1 for M in ci.members if M.mask & km == M.mask)
            num = norms[i] * inside
            assert num % K.order == 0
            matrix[i][j] = num // K.order
    return TableOfMarks(A, tuple(classes), tuple(tuple(r) for r in matrix))


# ---------------------------------------------------------------------------
# structure maps


def _restriction_plan(K: Subgroup, H: Subgroup) -> tuple:
    """For each K-class of subgroups of K, the H-class containing it."""
    key = ("res-plan", K.mask, H.mask)
    cache = H.parent._cache
    plan = cache.get(key)
    if plan is None:
        RK, RH = burnside_ring(K), burnside_ring(H)
        plan = tuple(RH.class_index(c.representative) for c in RK.classes)
        cache[key] = plan
    return plan


def restrict(x: BurnsideElement, K: Subgroup) -> BurnsideElement:
    """Restriction A(H) -> A(K) for K <= H: the mark at Q is kept."""
    H = x.group
    if not K <= H:
        raise ValueError("restrict needs K <= H")
    plan = _restriction_plan(K, H)
    return BurnsideElement(burnside_ring(K), tuple(x.marks[i] for i in plan))


def transfer(x: BurnsideElement, H: Subgroup) -> BurnsideElement:
    """Induction A(K) -> A(H), sending [K/J] to [H/J]."""
    K = x.group
    if not K <= H:
        raise ValueError("transfer needs K <= H")
    RK, RH = x.ring, burnside_ring(H)
    plan = _restriction_plan(K, H)
    tom = RH.table
    out = [Fraction(0)] * RH.rank
    for j, c in enumerate(x.orbit_coeffs):
        if not c:
            continue
        col = tom.orbit_marks(plan[j])
        for i, m in enumerate(col):
            if m:
                out[i] += c * m
    return BurnsideElement(RH, tuple(out))


def conjugate(x: BurnsideElement, g: int) -> BurnsideElement:
    """Conjugation c_g: A(H) -> A(gHg^-1); the mark at gQg^-1 is the mark at Q."""
    H = x.group
    G = H.parent
    gH = H.conjugate(g)
    target = burnside_ring(gH)
    ginv = G.inv[g]
    marks = tuple(x.marks[x.ring.class_index(c.representative.conjugate(ginv))] for c in target.classes)
    return BurnsideElement(target, marks)


def _norm_plan(K: Subgroup, H: Subgroup) -> tuple:
    """For each H-class Q, the K-classes of h^-1 Q h ∩ K over h in Q\\H/K."""
    key = ("norm-plan", K.mask, H.mask)
    cache = H.parent._cache
    plan = cache.get(key)
    if plan is None:
        G = H.parent
        RK, RH = burnside_ring(K), burnside_ring(H)
        rows = []
        for c in RH.classes:
            Q = c.representative
            row = []
            for h, _ in double_coset_decomposition(Q, K, H):
                row.append(RK.class_index(Q.conjugate(G.inv[h]) & K))
            rows.append(tuple(row))
        plan = cache[key] = tuple(rows)
    return plan


def norm(x: BurnsideElement, H: Subgroup) -> BurnsideElement:
    """Multiplicative transfer N_K^H, defined on marks by the double coset product.

    mark at Q = prod over h in Q\\H/K of the mark of x at h^-1 Q h ∩ K.
    """
    K = x.group
    if not K <= H:
        raise ValueError("norm needs K <= H")
    plan = _norm_plan(K, H)
    marks = []
    for row in plan:
        v = Fraction(1)
        for j in row:
            v *= x.marks[j]
            if not v:
                break
        marks.append(v)
    return BurnsideElement(burnside_ring(H), tuple(marks))


# ---------------------------------------------------------------------------
# idempotents


def residual_class_index(Q: Subgroup, P: PrimeSet, ambient: Subgroup) -> int:
    """Index of the ambient-class of O^P(Q)."""
    return burnside_ring(ambient).class_index(p_residual(Q, P))


def dress_idempotent(L: SubgroupClass, P: PrimeSet) -> BurnsideElement:
    """The primitive idempotent e_L of A(G)_(P): mark 1 where O^P(H) ~ L, else 0."""
    A = L.ambient
    rep = L.representative
    if p_residual(rep, P) != rep:
        raise NotPPerfectError(f"class {L.label} is not P-perfect for P = {P}")
    ring = burnside_ring(A)
    marks = tuple(Fraction(1 if residual_class_index(c.representative, P, A) == L.index else 0)
                  for c in ring.classes)
    e = BurnsideElement(ring, marks)
    assert is_p_local(e, P), f"idempotent for {L.label} is not {P}-local"
    return e


def is_p_local(x: BurnsideElement, P: PrimeSet) -> bool:
    """True iff every orbit-basis denominator is a unit in Z_(P)."""
    return all(P.is_unit(c.denominator) for c in x.orbit_coeffs)


def restriction_decomposition(L: SubgroupClass, H: Subgroup, P: PrimeSet) -> dict:
    """Split R^G_H(e_L) into primitive idempotents of A(H)_(P).

    Reports the H-classes M with e^H_M appearing in the restriction, next to
    the number of H-classes of subgroups of H lying in the G-class of L.
    """
    e = restrict(dress_idempotent(L, P), H)
    RH = burnside_ring(H)
    summands = []
    total = RH.zero()
    for c in RH.classes:
        if p_residual(c.representative, P) != c.representative:
            continue
        f = dress_idempotent(c, P)
        if f * e == f:
            summands.append(c.label)
            total = total + f
    members = {M.mask for M in L.members}
    h_classes = sum(1 for c in RH.classes if c.representative.mask in members)
    return {
        "L": L.label,
        "H": class_of(H).label,
        "H_gens": H.label,
        "summands": summands,
        "sum_matches": total == e,
        "h_classes_in_L": h_classes,
        "agrees": len(summands) == h_classes,
    }


# ---------------------------------------------------------------------------
# finite H-sets


class GSet:
    """A finite set with an action of a subgroup ``group``.

    ``perm_of(g)`` returns the permutation of ``range(size)`` induced by
    ``g`` as an integer numpy array; results are cached.
    """

    def __init__(self, group: Subgroup, size: int, perm_of: Callable[[int], np.ndarray]):
        self.group = group
        self.size = size
        self._perm_of = perm_of
        self._perms = {}

    def perm(self, g: int) -> np.ndarray:
        p = self._perms.get(g)
        if p is None:
            p = self._perms[g] = np.asarray(self._perm_of(g), dtype=np.int64)
        return p

    def action(self, g: int, x: int) -> int:
        return int(self.perm(g)[x])

    def check(self) -> None:
        """Verify the action axioms on every pair of group elements."""
        G = self.group.parent
        assert np.array_equal(self.perm(0), np.arange(self.size))
        for g in self.group.elements:
            pg = self.perm(g)
            for h in self.group.elements:
                assert np.array_equal(pg[self.perm(h)], self.perm(G.mul[g][h])), "not an action"

    def fixed_points(self, Q: Subgroup) -> int:
        if self.size == 0:
            return 0
        mask = np.ones(self.size, dtype=bool)
        idx = np.arange(self.size)
        for q in Q.generators:
            mask &= self.perm(q) == idx
        return int(mask.sum())

    def stabilizer(self, x: int) -> Subgroup:
        return Subgroup(self.group.parent, [g for g in self.group.elements if self.perm(g)[x] == x])

    def to_burnside(self) -> BurnsideElement:
        ring = burnside_ring(self.group)
        return ring.element(self.fixed_points(c.representative) for c in ring.classes)

    @classmethod
    def from_perms(cls, group: Subgroup, size: int, perms: dict) -> GSet:
        return cls(group, size, lambda g: perms[g])

    @classmethod
    def trivial(cls, group: Subgroup, size: int) -> GSet:
        return cls(group, size, lambda g: np.arange(size))

    @classmethod
    def cosets(cls, group: Subgroup, K: Subgroup) -> GSet:
        """Left cosets gK of ``K`` in ``group``, with g acting by left multiplication.

        Cosets are numbered by their least element.
        """
        G = group.parent
        mul = G.mul
        reps, where = [], {}
        for g in group.elements:
            if g in where:
                continue
            idx = len(reps)
            reps.append(g)
            for k in K.elements:
                where[mul[g][k]] = idx
        return cls(group, len(reps), lambda g: [where[mul[g][r]] for r in reps])

    @classmethod
    def disjoint_union(cls, parts: Sequence[GSet]) -> GSet:
        group = parts[0].group if parts else None
        offsets, total = [], 0
        for p in parts:
            offsets.append(total)
            total += p.size

        def perm_of(g):
            if not parts:
                return np.arange(0)
            return np.concatenate([p.perm(g) + off for p, off in zip(parts, offsets)])

        return cls(group, total, perm_of)


def coinduce(X: GSet, H: Subgroup) -> GSet:
    """The H-set map_K(H, X) of K-equivariant functions f(kh) = k f(h).

    H acts by (h'f)(h) = f(h h').  A function is stored by its values on the
    least representatives r_1 < r_2 < ... of the right cosets K r_i, and
    functions are numbered lexicographically by those value tuples.
    """
    K = X.group
    if not K <= H:
        raise ValueError("coinduce needs K <= H")
    G = H.parent
    mul, inv = G.mul, G.inv
    reps, where = [], {}
    for h in H.elements:
        if h in where:
            continue
        reps.append(h)
        for k in K.elements:
            where[mul[k][h]] = len(reps) - 1
    m, n = len(reps), X.size
    size = n ** m
    radix = np.array([n ** (m - 1 - i) for i in range(m)], dtype=np.int64)
    if size:
        funcs = np.array(list(product(range(n), repeat=m)), dtype=np.int64).reshape(size, m)
    else:
        funcs = np.zeros((0, m), dtype=np.int64)

    def perm_of(hp):
        out = np.empty_like(funcs)
        for i, r in enumerate(reps):
            y = mul[r][hp]
            j = where[y]
            k = mul[y][inv[reps[j]]]  # y = k r_j
            out[:, i] = X.perm(k)[funcs[:, j]] if n else funcs[:, j]
        return out @ radix if size else np.arange(0)

    return GSet(H, size, perm_of)


def gset_from_orbits(K: Subgroup, subgroups: Sequence[Subgroup]) -> GSet:
    return GSet.disjoint_union([GSet.cosets(K, J) for J in subgroups]) if subgroups else GSet(K, 0, lambda g: np.arange(0))
