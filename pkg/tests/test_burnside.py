import random
from fractions import Fraction
import numpy as np
import pytest
from hypothesis import given, strategies as st

from burnside_split.burnside import (
    GSet,
    NotPPerfectError,
    burnside_ring,
    coinduce,
    conjugate,
    dress_idempotent,
    gset_from_orbits,
    is_p_local,
    norm,
    restrict,
    restriction_decomposition,
    table_of_marks,
    transfer,
)
from burnside_split.groups import (
    PrimeSet,
    class_of,
    double_cosets,
    enumerate_subgroups,
    p_perfect_classes,
    subgroup_classes,
)

from conftest import FIXTURES, SMALL, group, random_element
from oracles import check_coinduction, fixed_cosets

F = Fraction


def _s3():
    G = group("S3")
    return G, G.subgroup_from_cycles("(1,2)"), G.subgroup_from_cycles("(1,2,3)")


def _cls(G, order, idx=0):
    return [c for c in subgroup_classes(G) if c.order == order][idx]


# --- table of marks ------------------------------------------------------------

@pytest.mark.parametrize("spec", FIXTURES)
def test_table_matches_fixed_coset_oracle(spec):
    G = group(spec)
    tom = table_of_marks(G)
    for i, ci in enumerate(tom.classes):
        for j, cj in enumerate(tom.classes):
            assert tom.matrix[i][j] == fixed_cosets(G, ci.representative.elements, cj.representative.elements)


@pytest.mark.parametrize("spec", FIXTURES)
def test_table_triangular_with_positive_diagonal(spec):
    G = group(spec)
    tom = table_of_marks(G)
    for j, c in enumerate(tom.classes):
        K = c.representative
        assert tom.matrix[j][j] == K.normalizer().order // K.order
        for i in range(j + 1, len(tom)):
            assert tom.matrix[i][j] == 0


def test_table_examples():
    assert table_of_marks(group("1")).matrix == ((1,),)
    tom = table_of_marks(group("S3"))
    cols = [tom.orbit_marks(j) for j in range(4)]
    assert cols == [(6, 0, 0, 0), (3, 1, 0, 0), (2, 0, 2, 0), (1, 1, 1, 1)]
    tom = table_of_marks(group("C2"))
    assert [tom.orbit_marks(j) for j in range(2)] == [(2, 0), (1, 1)]


# --- ring structure ----------------------------------------------------------------

@given(st.sampled_from(FIXTURES), st.integers(0, 10**6))
def test_marks_are_a_ring_map(spec, seed):
    rng = random.Random(seed)
    R = burnside_ring(group(spec))
    x, y = random_element(R, rng, fractions=True), random_element(R, rng)
    assert (x + y).marks == tuple(a + b for a, b in zip(x.marks, y.marks))
    assert (x * y).marks == tuple(a * b for a, b in zip(x.marks, y.marks))
    # products of orbits agree with the product G-set built from scratch
    assert x * R.one() == x and (x - x).is_zero()


@pytest.mark.parametrize("spec", ["S3", "D8", "A4"])
def test_orbit_products_match_product_sets(spec):
    G = group(spec)
    R = burnside_ring(G)
    for a in R.classes:
        for b in R.classes:
            X = GSet.cosets(G.whole, a.representative)
            Y = GSet.cosets(G.whole, b.representative)
            n = Y.size
            prod = GSet(G.whole, X.size * n, lambda g, X=X, Y=Y, n=n: (X.perm(g)[:, None] * n + Y.perm(g)[None, :]).ravel())
            prod.check()
            assert prod.to_burnside() == R.orbit(a.representative) * R.orbit(b.representative)


@given(st.sampled_from(FIXTURES), st.integers(0, 10**6))
def test_basis_round_trip(spec, seed):
    rng = random.Random(seed)
    R = burnside_ring(group(spec))
    x = random_element(R, rng, fractions=True)
    assert R.from_orbits(x.orbit_coeffs) == x
    assert R.element(R.table.apply(R.table.solve(x.marks))).marks == x.marks


# --- structure maps ------------------------------------------------------------------

def test_restrict_examples():
    G, C2, A3 = _s3()
    e_c2 = dress_idempotent(_cls(G, 2), PrimeSet.of(3))
    assert restrict(e_c2, C2).marks == (0, 1)
    assert restrict(e_c2, A3).is_zero()
    for H in enumerate_subgroups(G):
        assert restrict(burnside_ring(G).one(), H) == burnside_ring(H).one()


def test_transfer_examples():
    G, C2, A3 = _s3()
    one = burnside_ring(G.trivial).one()
    assert transfer(one, C2).marks == (2, 0)
    assert transfer(burnside_ring(C2).one(), G.whole).marks == (3, 1, 0, 0)
    assert transfer(burnside_ring(C2).zero(), G.whole).is_zero()


def test_conjugate_examples():
    G, C2, A3 = _s3()
    e = dress_idempotent(_cls(G, 2), PrimeSet.of(3))
    x = restrict(e, C2)
    assert conjugate(x, 0) == x
    g = G.element_from_perm((1, 2, 0))  # (1,2,3)
    C2b = C2.conjugate(g)
    assert C2b == G.subgroup_from_cycles("(2,3)")
    assert conjugate(x, g) == restrict(e, C2b)
    # a normal subgroup: conjugation permutes the coordinates
    R = burnside_ring(A3)
    y = random_element(R, random.Random(1))
    assert sorted(conjugate(y, G.element_from_perm((1, 0, 2))).marks) == sorted(y.marks)


def test_norm_examples():
    G, C2, A3 = _s3()
    P = PrimeSet.of(3)
    e_c2 = dress_idempotent(_cls(G, 2), P)
    assert norm(restrict(e_c2, C2), G.whole).marks == (0, 0, 0, 1)
    assert norm(restrict(e_c2, C2), G.whole) == dress_idempotent(_cls(G, 6), P)
    for K in enumerate_subgroups(G):
        for H in enumerate_subgroups(G):
            if K <= H:
                assert norm(burnside_ring(K).one(), H) == burnside_ring(H).one()
    y = random_element(burnside_ring(C2), random.Random(5))
    assert norm(y, C2) == y


def test_norm_is_not_additive():
    G, C2, _ = _s3()
    R = burnside_ring(C2)
    x = R.one()
    assert norm(x + x, G.whole) != norm(x, G.whole) + norm(x, G.whole)


def _mark_at(x, Q):
    """Mark of x at an arbitrary subgroup Q of its group."""
    return x.marks[x.ring.class_index(Q)]


def _check_norm_identities(G, x, H):
    K = x.group
    n = norm(x, H)
    assert _mark_at(n, H) == _mark_at(x, K)
    for c in burnside_ring(H).classes:
        Q = c.representative
        expected = F(1)
        for h in double_cosets(Q, K, H):
            expected *= _mark_at(x, Q.conjugate(G.inv[h]) & K)
        assert _mark_at(n, Q) == expected


def _pairs(G):
    subs = enumerate_subgroups(G)
    return [(K, H) for H in subs for K in subs if K <= H]


@given(st.sampled_from(["S3", "D8", "Q8", "A4", "S4"]), st.integers(0, 10**6))
def test_marks_of_norms(spec, seed):
    G = group(spec)
    rng = random.Random(seed)
    K, H = rng.choice(_pairs(G))
    x = random_element(burnside_ring(K), rng, fractions=True)
    _check_norm_identities(G, x, H)


@given(st.sampled_from(["S3", "D8", "A4", "S4", "SL(2,3)"]), st.integers(0, 10**6))
def test_multiplicative_double_coset_formula(spec, seed):
    G = group(spec)
    rng = random.Random(seed)
    K, H = rng.choice(_pairs(G))
    Q = rng.choice([U for U in enumerate_subgroups(G) if U <= H])
    x = random_element(burnside_ring(K), rng)
    lhs = restrict(norm(x, H), Q)
    rhs = burnside_ring(Q).one()
    for h in double_cosets(Q, K, H):
        piece = restrict(x, Q.conjugate(G.inv[h]) & K)
        rhs = rhs * norm(conjugate(piece, h), Q)
    assert lhs == rhs


@given(st.sampled_from(["S3", "D8", "A4", "S4"]), st.integers(0, 10**6))
def test_norm_is_multiplicative(spec, seed):
    G = group(spec)
    rng = random.Random(seed)
    K, H = rng.choice(_pairs(G))
    R = burnside_ring(K)
    x, y = random_element(R, rng, fractions=True), random_element(R, rng)
    assert norm(x * y, H) == norm(x, H) * norm(y, H)


@given(st.sampled_from(["S3", "D8", "A4", "S4", "A5"]), st.integers(0, 10**6))
def test_frobenius_reciprocity(spec, seed):
    G = group(spec)
    rng = random.Random(seed)
    K, H = rng.choice(_pairs(G))
    x = random_element(burnside_ring(K), rng)
    y = random_element(burnside_ring(H), rng)
    assert transfer(restrict(y, K) * x, H) == y * transfer(x, H)


@pytest.mark.parametrize("spec", ["S3", "D8", "A4"])
def test_transfer_matches_induced_sets(spec):
    G = group(spec)
    for K, H in _pairs(G):
        for c in burnside_ring(K).classes:
            J = c.representative
            X = GSet.cosets(K, J)
            assert transfer(X.to_burnside(), H) == GSet.cosets(H, J).to_burnside()


# --- coinduction oracle ------------------------------------------------------------

def test_coinduce_examples():
    G = group("C2")
    X = GSet.trivial(G.trivial, 3)
    Y = coinduce(X, G.whole)
    Y.check()
    assert Y.size == 9 and Y.to_burnside().marks == (9, 3)
    S3 = group("S3")
    C2 = S3.subgroup_from_cycles("(1,2)")
    X = gset_from_orbits(C2, [S3.trivial, C2])
    assert coinduce(X, C2).to_burnside() == X.to_burnside()
    empty = GSet(C2, 0, lambda g: np.arange(0))
    assert coinduce(empty, S3.whole).size == 0
    assert coinduce(empty, S3.whole).to_burnside().is_zero()


@pytest.mark.parametrize("spec", ["C2", "S3", "D8"])
def test_coinduction_oracle_small(spec):
    assert check_coinduction(group(spec), max_size=4, max_index=4) > 0


@pytest.mark.parametrize("spec", ["S3", "A4"])
def test_coinduced_sets_are_actions(spec):
    G = group(spec)
    for K, H in _pairs(G)[:12]:
        X = gset_from_orbits(K, [K.parent.trivial, K])
        if H.order // K.order <= 3:
            coinduce(X, H).check()


# --- idempotents --------------------------------------------------------------------

def test_s3_idempotents():
    G = group("S3")
    P = PrimeSet.of(3)
    es = {L.label: dress_idempotent(L, P) for L in p_perfect_classes(G, P)}
    assert es["1:0"].marks == (1, 0, 1, 0)
    assert es["2:0"].marks == (0, 1, 0, 0)
    assert es["6:0"].marks == (0, 0, 0, 1)
    assert es["6:0"].orbit_coeffs == (F(1, 2), F(-1), F(-1, 2), F(1))
    assert is_p_local(es["6:0"], P)


def test_a5_idempotents():
    G = group("A5")
    P = PrimeSet.all(60)
    Ls = p_perfect_classes(G, P)
    e = dress_idempotent(Ls[-1], P)
    assert e.marks == (0,) * 8 + (1,)
    assert is_p_local(e, P)
    assert all(c.denominator == 1 for c in e.orbit_coeffs)


def test_not_perfect_raises():
    G = group("S3")
    with pytest.raises(NotPPerfectError):
        dress_idempotent(_cls(G, 3), PrimeSet.of(3))


def test_p_locality_predicate():
    G = group("S3")
    R = burnside_ring(G)
    half_free = R.from_orbits([F(1, 2), 0, 0, 0])
    assert not is_p_local(half_free, PrimeSet.of(2))
    assert is_p_local(half_free, PrimeSet.of(3))


@pytest.mark.parametrize("spec", FIXTURES)
def test_idempotents_complete_and_orthogonal(spec):
    G = group(spec)
    R = burnside_ring(G)
    for P in PrimeSet.all(G.order).subsets():
        es = [dress_idempotent(L, P) for L in p_perfect_classes(G, P)]
        assert sum(es, R.zero()) == R.one()
        for i, a in enumerate(es):
            assert a.is_idempotent() and not a.is_zero()
            assert is_p_local(a, P)
            for b in es[i + 1:]:
                assert (a * b).is_zero()


@pytest.mark.parametrize("spec", ["S3", "A4", "S4", "A5"])
def test_restriction_experiment_is_consistent(spec):
    G = group(spec)
    P = PrimeSet.all(G.order)
    for L in p_perfect_classes(G, P):
        for c in subgroup_classes(G):
            d = restriction_decomposition(L, c.representative, P)
            assert d["sum_matches"]
            assert d["H"] == class_of(c.representative).label
