"""Finite groups as multiplication tables, with their subgroup lattices.

Elements are the integers ``0 .. order-1`` and element 0 is always the
identity.  Groups built from permutations keep the permutations around so
that subgroups can be named in cycle notation.  Product convention:
``mul[a][b]`` is "apply ``b`` first, then ``a``", and ``^g H = g H g^-1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from sympy import factorint, isprime

DEFAULT_MAX_ORDER = 2000


class GroupSpecError(ValueError):
    """The group-spec string could not be parsed."""


class GroupOrderError(ValueError):
    """The generated group is larger than the configured cap."""


# ---------------------------------------------------------------------------
# prime sets


@dataclass(frozen=True)
class PrimeSet:
    """A set of primes ``P``; the local Burnside ring inverts every prime not in it.

    ``all_primes_mode`` stands for "every prime".  Only divisors of the group
    order matter for anything computed here, so :meth:`for_order` turns the
    flag into the concrete set of prime divisors.
    """

    primes: frozenset = frozenset()
    all_primes_mode: bool = False

    def __post_init__(self):
        for p in self.primes:
            if not isprime(p):
                raise ValueError(f"{p} is not a prime")

    @classmethod
    def of(cls, *primes: int) -> PrimeSet:
        return cls(frozenset(primes))

    @classmethod
    def none(cls) -> PrimeSet:
        return cls(frozenset())

    @classmethod
    def all(cls, order: int | None = None) -> PrimeSet:
        if order is None:
            return cls(frozenset(), True)
        return cls(frozenset(prime_divisors(order)), True)

    @classmethod
    def parse(cls, text: str, order: int | None = None) -> PrimeSet:
        """Parse ``"all"``, ``"none"`` or a comma separated list such as ``"2,3"``."""
        text = text.strip().lower()
        if text == "all":
            return cls.all(order)
        if text in ("none", "", "{}"):
            return cls.none()
        try:
            primes = [int(tok) for tok in re.split(r"[,\s]+", text.strip("{}")) if tok]
        except ValueError:
            raise ValueError(f"malformed prime list {text!r}") from None
        bad = [p for p in primes if not isprime(p)]
        if bad:
            raise ValueError(f"not prime: {', '.join(map(str, bad))}")
        return cls(frozenset(primes))

    def for_order(self, order: int) -> PrimeSet:
        if self.all_primes_mode:
            return PrimeSet(frozenset(prime_divisors(order)), True)
        return self

    def __contains__(self, p: int) -> bool:
        return self.all_primes_mode or p in self.primes

    def is_p_number(self, n: int) -> bool:
        """True if every prime factor of ``n`` lies in the set."""
        return all(p in self for p in prime_divisors(n))

    def is_unit(self, n: int) -> bool:
        """True if ``n`` is invertible in Z_(P), i.e. has no prime factor in P."""
        return all(p not in self for p in prime_divisors(n))

    def subsets(self):
        ps = sorted(self.primes)
        for r in range(len(ps) + 1):
            for combo in combinations(ps, r):
                yield PrimeSet(frozenset(combo))

    @property
    def label(self) -> str:
        if self.all_primes_mode:
            inner = ",".join(map(str, sorted(self.primes)))
            return f"all({inner})" if inner else "all"
        if not self.primes:
            return "none"
        return ",".join(map(str, sorted(self.primes)))

    def __str__(self) -> str:
        return self.label


def prime_divisors(n: int) -> list[int]:
    return sorted(factorint(abs(n))) if abs(n) > 1 else []


# ---------------------------------------------------------------------------
# permutations


def compose(a: Sequence[int], b: Sequence[int]) -> tuple:
    """``a * b``: apply ``b`` then ``a``."""
    return tuple(a[i] for i in b)


def cycles_to_perm(cycles: Iterable[Sequence[int]], degree: int) -> tuple:
    """Build a permutation of 0..degree-1 from 1-based cycles."""
    perm = list(range(degree))
    for cyc in cycles:
        if len(set(cyc)) != len(cyc):
            raise GroupSpecError(f"repeated point in cycle {tuple(cyc)}")
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            if perm[a - 1] != a - 1:
                raise GroupSpecError("cycles inside one permutation must be disjoint")
            perm[a - 1] = b - 1
    return tuple(perm)


def perm_to_cycles(perm: Sequence[int]) -> str:
    seen = set()
    out = []
    for i in range(len(perm)):
        if i in seen or perm[i] == i:
            continue
        cyc = [i]
        seen.add(i)
        j = perm[i]
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = perm[j]
        out.append("(" + ",".join(str(c + 1) for c in cyc) + ")")
    return "".join(out) or "()"


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str) -> list[list[int]]:
    """Parse one permutation such as ``"(1,2)(3,4)"`` into 1-based cycles."""
    text = text.strip()
    if not text:
        raise GroupSpecError("empty permutation")
    pos = 0
    cycles = []
    for m in _CYCLE_RE.finditer(text):
        if text[pos:m.start()].strip():
            raise GroupSpecError(f"malformed cycle notation {text!r}")
        pos = m.end()
        body = m.group(1).strip()
        if not body:
            continue
        try:
            pts = [int(tok) for tok in re.split(r"[,\s]+", body) if tok]
        except ValueError:
            raise GroupSpecError(f"malformed cycle notation {text!r}") from None
        if any(p < 1 for p in pts):
            raise GroupSpecError("points are 1-based")
        cycles.append(pts)
    if text[pos:].strip() or pos == 0:
        raise GroupSpecError(f"malformed cycle notation {text!r}")
    pts = [q for c in cycles for q in c]
    if len(set(pts)) != len(pts):
        raise GroupSpecError(f"cycles in {text!r} are not disjoint")
    return cycles


def parse_generators(text: str) -> list[list[list[int]]]:
    """Parse ``"(1,2)(3,4); (1,3,5)"`` into a list of cycle lists."""
    parts = [p for p in text.split(";") if p.strip()]
    if not parts:
        raise GroupSpecError("no generators given")
    return [parse_cycles(p) for p in parts]


# ---------------------------------------------------------------------------
# finite groups


class FiniteGroup:
    """A finite group given by its full multiplication table.

    ``perms`` optionally records a faithful permutation realization, one
    permutation (0-based image tuple) per element.
    """

    def __init__(self, mul, label: str = "G", perms: Sequence[tuple] | None = None):
        self.mul = [list(row) for row in mul]
        self.order = len(self.mul)
        self.identity = 0
        self.label = label
        self.perms = list(perms) if perms is not None else None
        row0 = self.mul[0]
        if row0 != list(range(self.order)):
            raise ValueError("element 0 must be the identity")
        self.inv = [row.index(0) for row in self.mul]
        self._perm_index = None
        self._conj = {}
        self._lattice = None
        self._cache = {}

    def __repr__(self):
        return f"<FiniteGroup {self.label} of order {self.order}>"

    @property
    def elements(self) -> range:
        return range(self.order)

    def check_axioms(self) -> None:
        """Exhaustively check associativity, identity and inverses."""
        mul, n = self.mul, self.order
        for x in range(n):
            assert mul[0][x] == x == mul[x][0]
            assert mul[x][self.inv[x]] == 0
        for a in range(n):
            ra = mul[a]
            for b in range(n):
                rab = mul[ra[b]]
                rb = mul[b]
                for c in range(n):
                    if rab[c] != ra[rb[c]]:
                        raise AssertionError(f"not associative at {(a, b, c)}")

    def conj_map(self, g: int) -> list[int]:
        """The automorphism ``x -> g x g^-1`` as a list."""
        m = self._conj.get(g)
        if m is None:
            mul, gi = self.mul, self.inv[g]
            rg = mul[g]
            m = [mul[rg[x]][gi] for x in range(self.order)]
            self._conj[g] = m
        return m

    def element_order(self, x: int) -> int:
        k, y = 1, x
        while y != 0:
            y = self.mul[y][x]
            k += 1
        return k

    def power(self, x: int, k: int) -> int:
        y = 0
        for _ in range(k):
            y = self.mul[y][x]
        return y

    def element_label(self, x: int) -> str:
        if self.perms is None:
            return str(x)
        return perm_to_cycles(self.perms[x])

    def element_from_perm(self, perm: Sequence[int]) -> int:
        if self.perms is None:
            raise ValueError(f"{self.label} has no permutation realization")
        if self._perm_index is None:
            self._perm_index = {p: i for i, p in enumerate(self.perms)}
        perm = tuple(perm) + tuple(range(len(perm), len(self.perms[0])))
        try:
            return self._perm_index[perm]
        except KeyError:
            raise ValueError(f"{perm_to_cycles(perm)} is not an element of {self.label}") from None

    @cached_property
    def whole(self) -> Subgroup:
        return Subgroup(self, tuple(range(self.order)))

    @cached_property
    def trivial(self) -> Subgroup:
        return Subgroup(self, (0,))

    def subgroup(self, gens: Iterable[int]) -> Subgroup:
        return Subgroup(self, closure(self, gens))

    def subgroup_from_cycles(self, text: str) -> Subgroup:
        """Subgroup generated by cycle-notation generators, e.g. ``"(1,2); (3,4)"``."""
        if self.perms is None:
            raise ValueError(f"{self.label} has no permutation realization")
        if text.strip() in ("", "()"):
            return self.trivial
        degree = len(self.perms[0])
        gens = []
        for cycles in parse_generators(text):
            if any(p > degree for c in cycles for p in c):
                raise GroupSpecError(f"point out of range for degree {degree}")
            gens.append(self.element_from_perm(cycles_to_perm(cycles, degree)))
        return self.subgroup(gens)

    @property
    def lattice(self) -> SubgroupLattice:
        if self._lattice is None:
            self._lattice = SubgroupLattice(self)
        return self._lattice


def closure(G: FiniteGroup, gens: Iterable[int], start: Iterable[int] = (0,)) -> tuple:
    """Sorted elements of the subgroup generated by ``start`` and ``gens``."""
    mul = G.mul
    elems = list(dict.fromkeys(start))
    if 0 not in elems:
        elems.insert(0, 0)
    seen = set(elems)
    gens = [g for g in dict.fromkeys(gens) if g != 0]
    gens += [g for g in elems if g != 0]
    i = 0
    while i < len(elems):
        row = mul[elems[i]]
        for g in gens:
            y = row[g]
            if y not in seen:
                seen.add(y)
                elems.append(y)
        i += 1
    return tuple(sorted(elems))


def group_from_permutations(gens: Sequence[Sequence[int]], label: str = "G",
                            max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """Close permutation generators into a group.

    Elements are enumerated breadth-first from the identity; each new layer
    is sorted by image tuple.
    """
    degree = max((len(g) for g in gens), default=1)
    degree = max(degree, 1)
    gens = [tuple(g) + tuple(range(len(g), degree)) for g in gens]
    ident = tuple(range(degree))
    gens = sorted(set(g for g in gens if g != ident))
    elems = [ident]
    index = {ident: 0}
    layer = [ident]
    while layer:
        nxt = set()
        for x in layer:
            for g in gens:
                y = compose(g, x)
                if y not in index and y not in nxt:
                    nxt.add(y)
        layer = sorted(nxt)
        for y in layer:
            index[y] = len(elems)
            elems.append(y)
        if len(elems) > max_order:
            raise GroupOrderError(f"group {label} has order > {max_order}")
    return FiniteGroup(_perm_mul_table(elems, index), label, elems)


def _perm_mul_table(elems: list, index: dict) -> list:
    n, d = len(elems), len(elems[0])
    arr = np.array(elems, dtype=np.int64)
    if d <= 15:
        radix = d ** np.arange(d, dtype=np.int64)
        codes = arr @ radix
        order = np.argsort(codes)
        sorted_codes = codes[order]
        table = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            comp = arr[a][arr]  # row b: a∘b
            pos = np.searchsorted(sorted_codes, comp @ radix)
            table[a] = order[pos]
        return table.tolist()
    return [[index[compose(a, b)] for b in elems] for a in elems]


# ---------------------------------------------------------------------------
# group-spec parsing


def _cyclic(n):
    if n < 1:
        raise GroupSpecError("C<n> needs n >= 1")
    return [tuple(list(range(1, n)) + [0])] if n > 1 else [], max(n, 1)


def _symmetric(n):
    if n < 1:
        raise GroupSpecError("S<n> needs n >= 1")
    if n == 1:
        return [], 1
    return [cycles_to_perm([[1, 2]], n), cycles_to_perm([list(range(1, n + 1))], n)], n


def _alternating(n):
    if n < 1:
        raise GroupSpecError("A<n> needs n >= 1")
    if n < 3:
        return [], n
    gens = [cycles_to_perm([[1, 2, 3]], n)]
    if n > 3:
        long = list(range(1, n + 1)) if n % 2 else list(range(2, n + 1))
        gens.append(cycles_to_perm([long], n))
    return gens, n


def _dihedral(order):
    if order < 2 or order % 2:
        raise GroupSpecError("D<2n> needs an even order >= 2")
    n = order // 2
    if n == 1:
        return [(1, 0)], 2
    if n == 2:
        return [cycles_to_perm([[1, 2]], 4), cycles_to_perm([[3, 4]], 4)], 4
    rot = cycles_to_perm([list(range(1, n + 1))], n)
    refl = tuple(n - 1 - i for i in range(n))
    return [rot, refl], n


def _quaternion():
    # regular representation of {±1, ±i, ±j, ±k}; points 0..7 = 1, i, j, k, -1, -i, -j, -k
    table = {
        (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
        (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
        (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
        (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
    }

    def left(unit):
        perm = []
        for pt in range(8):
            base, sign = pt % 4, (-1 if pt >= 4 else 1)
            b, s = table[(unit, base)]
            s *= sign
            perm.append(b if s == 1 else b + 4)
        return tuple(perm)

    return [left(1), left(2)], 8


def _sl23():
    # action of SL(2,3) on the 8 non-zero vectors of F_3^2
    vecs = [(a, b) for a in range(3) for b in range(3) if (a, b) != (0, 0)]
    idx = {v: i for i, v in enumerate(vecs)}

    def act(m):
        return tuple(idx[((m[0][0] * a + m[0][1] * b) % 3, (m[1][0] * a + m[1][1] * b) % 3)]
                     for a, b in vecs)

    return [act(((1, 1), (0, 1))), act(((1, 0), (1, 1)))], 8


_NAMED = re.compile(r"^(S|A|C|D)(\d+)$")


def _factor_generators(spec: str):
    s = spec.strip().upper().replace(" ", "")
    if s == "Q8":
        return _quaternion()
    if s in ("SL(2,3)", "SL23", "SL2(3)"):
        return _sl23()
    if s in ("1", "TRIVIAL"):
        return [], 1
    m = _NAMED.match(s)
    if not m:
        raise GroupSpecError(f"unknown group {spec!r}")
    kind, n = m.group(1), int(m.group(2))
    return {"S": _symmetric, "A": _alternating, "C": _cyclic, "D": _dihedral}[kind](n)


def _split_product(spec: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in spec:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "xX" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return parts


def validate_group_spec(spec: str) -> None:
    """Raise GroupSpecError if ``spec`` does not parse; builds nothing."""
    spec = spec.strip()
    if not spec:
        raise GroupSpecError("empty group spec")
    if spec.startswith("("):
        parse_generators(spec)
        return
    for f in _split_product(spec):
        if not f.strip():
            raise GroupSpecError(f"malformed product {spec!r}")
        _factor_generators(f)


def build_group(spec: str, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """Build a group from a spec string.

    Accepts named families ``S<n>``, ``A<n>``, ``C<n>``, ``D<2n>``, ``Q8`` and
    ``SL(2,3)``, direct products such as ``S3xC2``, or cycle-notation
    generators ``"(1,2)(3,4); (1,3,5)"`` with 1-based points.
    """
    spec = spec.strip()
    if not spec:
        raise GroupSpecError("empty group spec")
    if spec.startswith("("):
        gens_cycles = parse_generators(spec)
        degree = max((p for gen in gens_cycles for c in gen for p in c), default=1)
        gens = [cycles_to_perm(c, degree) for c in gens_cycles]
        return group_from_permutations(gens, spec, max_order)
    factors = _split_product(spec)
    if any(not f.strip() for f in factors):
        raise GroupSpecError(f"malformed product {spec!r}")
    gens, offset = [], 0
    pieces = [_factor_generators(f) for f in factors]
    total = sum(d for _, d in pieces)
    for fgens, degree in pieces:
        for g in fgens:
            perm = list(range(total))
            for i, j in enumerate(g):
                perm[offset + i] = offset + j
            gens.append(tuple(perm))
        offset += degree
    if not gens:
        gens = [tuple(range(total))]
    label = "x".join(f.strip() for f in factors)
    return group_from_permutations(gens, label, max_order)


# ---------------------------------------------------------------------------
# subgroups


class Subgroup:
    """A subgroup of ``parent``, stored as a sorted element tuple and a bitmask."""

    __slots__ = ("parent", "elements", "mask", "__dict__")

    def __init__(self, parent: FiniteGroup, elements: Iterable[int]):
        self.parent = parent
        self.elements = tuple(sorted(elements))
        mask = 0
        for x in self.elements:
            mask |= 1 << x
        self.mask = mask

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return bool(self.mask >> x & 1)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        return isinstance(other, Subgroup) and self.parent is other.parent and self.mask == other.mask

    def __hash__(self):
        return hash(self.mask)

    def __le__(self, other: Subgroup) -> bool:
        return self.mask & other.mask == self.mask

    def __lt__(self, other: Subgroup) -> bool:
        return self <= other and self.mask != other.mask

    def __and__(self, other: Subgroup) -> Subgroup:
        m = self.mask & other.mask
        return Subgroup(self.parent, [x for x in self.elements if m >> x & 1])

    def __repr__(self):
        return f"<Subgroup of order {self.order} in {self.parent.label}: {self.label}>"

    def sort_key(self):
        return (self.order, self.elements)

    def check(self) -> None:
        G = self.parent
        assert 0 in self, "subgroup must contain the identity"
        for a in self.elements:
            assert G.inv[a] in self
            row = G.mul[a]
            for b in self.elements:
                assert row[b] in self, "subgroup not closed"
        assert G.order % self.order == 0, "Lagrange violated"

    @cached_property
    def generators(self) -> tuple:
        """A small generating set, chosen greedily from largest element order."""
        G = self.parent
        gens, cur = [], 1
        by_order = sorted(self.elements, key=lambda x: (-G.element_order(x), x))
        for x in by_order:
            if cur >> x & 1:
                continue
            gens.append(x)
            elems = closure(G, gens)
            cur = 0
            for y in elems:
                cur |= 1 << y
            if cur == self.mask:
                break
        return tuple(gens)

    @property
    def label(self) -> str:
        G = self.parent
        if not self.generators:
            return "1"
        if G.perms is None:
            return "<" + ",".join(map(str, self.generators)) + ">"
        return ";".join(G.element_label(g) for g in self.generators)

    def conjugate(self, g: int) -> Subgroup:
        """``g H g^-1``."""
        c = self.parent.conj_map(g)
        return Subgroup(self.parent, [c[x] for x in self.elements])

    def conjugate_mask(self, g: int) -> int:
        c = self.parent.conj_map(g)
        m = 0
        for x in self.elements:
            m |= 1 << c[x]
        return m

    def is_normal_in(self, ambient: Subgroup) -> bool:
        return all(self.conjugate_mask(g) == self.mask for g in ambient.generators)

    def normalizer(self, ambient: Subgroup | None = None) -> Subgroup:
        ambient = ambient or self.parent.whole
        return Subgroup(self.parent, [g for g in ambient.elements if self.conjugate_mask(g) == self.mask])

    def as_group(self) -> FiniteGroup:
        """Re-index this subgroup as a standalone group (element 0 = identity)."""
        pos = {x: i for i, x in enumerate(self.elements)}
        mul = self.parent.mul
        table = [[pos[mul[a][b]] for b in self.elements] for a in self.elements]
        perms = None if self.parent.perms is None else [self.parent.perms[x] for x in self.elements]
        return FiniteGroup(table, self.label, perms)


def as_subgroup(G: FiniteGroup | Subgroup) -> Subgroup:
    return G.whole if isinstance(G, FiniteGroup) else G


@dataclass(eq=False)
class SubgroupClass:
    """A conjugacy class of subgroups under conjugation by ``ambient``."""

    ambient: Subgroup
    members: tuple
    index: int = -1
    label: str = ""

    @property
    def representative(self) -> Subgroup:
        return self.members[0]

    @property
    def order(self) -> int:
        return self.members[0].order

    def __contains__(self, H: Subgroup) -> bool:
        return any(H == M for M in self.members)

    def __len__(self):
        return len(self.members)

    def __repr__(self):
        return f"<SubgroupClass {self.label} ({len(self.members)} members) rep {self.representative.label}>"


# ---------------------------------------------------------------------------
# lattice


class SubgroupLattice:
    """All subgroups of a group plus cached conjugation data."""

    def __init__(self, G: FiniteGroup):
        self.group = G
        found = _cyclic_extension(G)
        self.subgroups = sorted((Subgroup(G, e) for e in found), key=Subgroup.sort_key)
        self.index = {H.mask: i for i, H in enumerate(self.subgroups)}
        self._classes = {}
        self._conj_perm = {}

    def __len__(self):
        return len(self.subgroups)

    def find(self, H: Subgroup) -> int:
        return self.index[H.mask]

    def subgroups_of(self, H: Subgroup) -> list[int]:
        m = H.mask
        return [i for i, K in enumerate(self.subgroups) if K.mask & m == K.mask and K.order <= H.order]

    def conj_perm(self, g: int) -> list[int]:
        """Action of conjugation by ``g`` on subgroup indices."""
        p = self._conj_perm.get(g)
        if p is None:
            p = [self.index[K.conjugate_mask(g)] for K in self.subgroups]
            self._conj_perm[g] = p
        return p

    def classes_within(self, A: Subgroup) -> tuple[list[SubgroupClass], dict[int, int]]:
        """Conjugacy classes of subgroups of ``A`` under ``A``-conjugation.

        Returns the sorted class list and a map subgroup-index -> class-index.
        """
        hit = self._classes.get(A.mask)
        if hit is not None:
            return hit
        inside = self.subgroups_of(A)
        perms = [self.conj_perm(g) for g in A.generators]
        seen = {}
        orbits = []
        for i in inside:
            if i in seen:
                continue
            orb = [i]
            seen[i] = True
            j = 0
            while j < len(orb):
                for p in perms:
                    k = p[orb[j]]
                    if k not in seen:
                        seen[k] = True
                        orb.append(k)
                j += 1
            orbits.append(sorted(orb, key=lambda t: self.subgroups[t].sort_key()))
        orbits.sort(key=lambda orb: self.subgroups[orb[0]].sort_key())
        classes, lookup = [], {}
        per_order = {}
        for ci, orb in enumerate(orbits):
            rep = self.subgroups[orb[0]]
            k = per_order.get(rep.order, 0)
            per_order[rep.order] = k + 1
            classes.append(SubgroupClass(A, tuple(self.subgroups[t] for t in orb), ci, f"{rep.order}:{k}"))
            for t in orb:
                lookup[t] = ci
        self._classes[A.mask] = (classes, lookup)
        return classes, lookup


def _prime_power(n: int) -> bool:
    return n > 1 and len(factorint(n)) == 1


def _cyclic_extension(G: FiniteGroup) -> set:
    """All subgroups (as sorted element tuples) by cyclic extension.

    Each non-perfect subgroup U has a normal subgroup V of prime index and
    U = <V, x> for an element x of prime-power order normalizing V.  Perfect
    subgroups are joins of two distinct maximal subgroups, so a join pass
    over pairs is alternated with cyclic extension until nothing new appears.
    """
    mul = G.mul
    pp = [x for x in G.elements if _prime_power(G.element_order(x))]
    found = {}  # mask -> elements

    def mask_of(elems):
        m = 0
        for x in elems:
            m |= 1 << x
        return m

    reps = []

    def add_with_conjugates(elems):
        m = mask_of(elems)
        if m in found:
            return False
        U = Subgroup(G, elems)
        orbit = {m: elems}
        for g in G.elements:
            cm = U.conjugate_mask(g)
            if cm not in orbit:
                c = G.conj_map(g)
                orbit[cm] = tuple(sorted(c[x] for x in elems))
        found.update(orbit)
        reps.append(elems)
        return True

    def extend(V_elems):
        V = Subgroup(G, V_elems)
        vm = V.mask
        done = vm
        for x in pp:
            if done >> x & 1:
                continue
            if V.conjugate_mask(x) != vm:
                continue
            # x normalizes V: <V, x> = union of cosets V x^i
            elems = set(V_elems)
            y = x
            while not (vm >> y & 1):
                elems.update(mul[v][y] for v in V_elems)
                y = mul[y][x]
            elems = tuple(sorted(elems))
            # <V, xv> = <V, x>, so the whole coset V x is settled
            for v in V_elems:
                done |= 1 << mul[v][x]
            add_with_conjugates(elems)

    add_with_conjugates((0,))
    processed = 0
    joined = set()
    while True:
        while processed < len(reps):
            extend(reps[processed])
            processed += 1
        new = False
        masks = list(found)
        rep_masks = [mask_of(r) for r in reps]
        for a, am in zip(reps, rep_masks):
            for bm in masks:
                if am & bm in (am, bm) or (am, bm) in joined:
                    continue
                joined.add((am, bm))
                b = found[bm]
                elems = closure(G, b, start=a)
                if add_with_conjugates(elems):
                    new = True
        if not new:
            break
    return set(found.values())


# ---------------------------------------------------------------------------
# lattice queries and residuals


def enumerate_subgroups(G: FiniteGroup | Subgroup) -> list[Subgroup]:
    """Every subgroup exactly once, sorted by (order, element list)."""
    if isinstance(G, Subgroup):
        lat = G.parent.lattice
        return [lat.subgroups[i] for i in lat.subgroups_of(G)]
    return list(G.lattice.subgroups)


def subgroup_classes(G: FiniteGroup | Subgroup) -> list[SubgroupClass]:
    """Conjugacy classes of subgroups, sorted by (order, representative)."""
    A = as_subgroup(G)
    return A.parent.lattice.classes_within(A)[0]


def class_of(H: Subgroup, ambient: FiniteGroup | Subgroup | None = None) -> SubgroupClass:
    A = as_subgroup(ambient) if ambient is not None else H.parent.whole
    lat = H.parent.lattice
    classes, lookup = lat.classes_within(A)
    return classes[lookup[lat.find(H)]]


def commutator_subgroup(H: Subgroup) -> Subgroup:
    G = H.parent
    mul, inv = G.mul, G.inv
    gens = H.generators
    comms = {mul[mul[a][b]][mul[inv[a]][inv[b]]] for a in gens for b in gens}
    return normal_closure(comms, H)


def normal_closure(elems: Iterable[int], H: Subgroup) -> Subgroup:
    """Smallest subgroup normal in ``H`` containing ``elems``."""
    G = H.parent
    cur = Subgroup(G, closure(G, elems))
    while True:
        extra = set()
        for g in H.generators:
            c = G.conj_map(g)
            for x in cur.generators:
                y = c[x]
                if y not in cur:
                    extra.add(y)
        if not extra:
            return cur
        cur = Subgroup(G, closure(G, list(cur.generators) + sorted(extra)))


def derived_series(H: Subgroup) -> list[Subgroup]:
    series = [H]
    while True:
        D = commutator_subgroup(series[-1])
        if D == series[-1]:
            return series
        series.append(D)


def is_solvable(H: FiniteGroup | Subgroup) -> bool:
    """True iff the derived series reaches the trivial subgroup."""
    return derived_series(as_subgroup(H))[-1].order == 1


def _abelian_p_step(N: Subgroup, P: PrimeSet) -> Subgroup:
    """Smallest normal M of N with N/M an abelian P-group.

    M is generated by [N, N] and the P'-parts of all elements of N.
    """
    G = N.parent
    parts = set(commutator_subgroup(N).generators)
    for x in N.elements:
        n = G.element_order(x)
        p_part = 1
        for p, e in factorint(n).items():
            if p in P:
                p_part *= p ** e
        parts.add(G.power(x, p_part))
    return Subgroup(G, closure(G, parts))


def p_residual(H: FiniteGroup | Subgroup, P: PrimeSet, check: bool = True) -> Subgroup:
    """O^P(H): the smallest normal subgroup with solvable P-group quotient.

    Computed by iterating the abelian-P-quotient step until it stabilizes.
    With ``check`` the result is compared against every normal subgroup of
    ``H`` whose quotient qualifies, asserting it lies in each of them.
    """
    H = as_subgroup(H)
    G = H.parent
    key = ("res", P.primes, P.all_primes_mode, H.mask)
    hit = G._cache.get(key)
    if hit is not None:
        return hit
    N = H
    while True:
        M = _abelian_p_step(N, P)
        if M == N:
            break
        N = M
    if check:
        core = derived_series(H)[-1]
        assert N.is_normal_in(H)
        assert P.is_p_number(H.order // N.order) and core <= N
        for K in enumerate_subgroups(H):
            if H.order % K.order or not K.is_normal_in(H):
                continue
            if P.is_p_number(H.order // K.order) and core <= K:
                assert N <= K, "P-residual is not unique"
    G._cache[key] = N
    return N


def is_p_perfect(H: Subgroup, P: PrimeSet) -> bool:
    return p_residual(H, P) == H


def p_perfect_classes(G: FiniteGroup | Subgroup, P: PrimeSet) -> list[SubgroupClass]:
    """Classes whose representative L satisfies O^P(L) = L."""
    return [c for c in subgroup_classes(G) if is_p_perfect(c.representative, P)]


def double_cosets(Q: Subgroup, K: Subgroup, H: Subgroup) -> list[int]:
    """Least element of each double coset Q h K in H."""
    if not (Q <= H and K <= H):
        raise ValueError("double_cosets needs Q <= H and K <= H")
    return [r for r, _ in double_coset_decomposition(Q, K, H)]


def double_coset_decomposition(Q: Subgroup, K: Subgroup, H: Subgroup) -> list[tuple[int, int]]:
    """Pairs (least representative, size) of the double cosets Q h K."""
    G = H.parent
    mul = G.mul
    covered = 0
    out = []
    for h in H.elements:
        if covered >> h & 1:
            continue
        qh = [mul[q][h] for q in Q.elements]
        size = 0
        for k in K.elements:
            for x in qh:
                y = mul[x][k]
                if not covered >> y & 1:
                    covered |= 1 << y
                    size += 1
        out.append((h, size))
    return out
