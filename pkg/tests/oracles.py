"""Brute-force reference computations used only by the tests.

Everything here works from the raw multiplication table and avoids the
package's lattice, marks and double coset code.
"""

from itertools import combinations


def closure(G, gens):
    elems = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mul[g][x]
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(elems)


def is_closed(G, S):
    return 0 in S and all(G.mul[a][b] in S for a in S for b in S)


def subgroups_by_subsets(G):
    """Every subset of G that is closed under multiplication (so a subgroup)."""
    rest = list(range(1, G.order))
    out = set()
    for r in range(len(rest) + 1):
        if G.order % (r + 1):
            continue
        for combo in combinations(rest, r):
            S = frozenset((0,) + combo)
            if is_closed(G, S):
                out.add(S)
    return out


def subgroups_by_joins(G):
    """Close the cyclic subgroups under pairwise joins until nothing new appears."""
    subs = {closure(G, [g]) for g in range(G.order)}
    frontier = set(subs)
    while frontier:
        new = set()
        for A in frontier:
            for B in list(subs):
                J = closure(G, sorted(A | B))
                if J not in subs:
                    new.add(J)
        subs |= new
        frontier = new
    return subs


def conj(G, g, S):
    gi = G.inv[g]
    return frozenset(G.mul[G.mul[g][x]][gi] for x in S)


def conjugacy_classes_of_subgroups(G, subs):
    left = set(subs)
    classes = []
    while left:
        S = min(left, key=lambda s: (len(s), sorted(s)))
        cls = {conj(G, g, S) for g in range(G.order)}
        classes.append(cls)
        left -= cls
    return classes


def fixed_cosets(G, H, K):
    """Number of left cosets gK with hgK = gK for every h in H."""
    seen, count = set(), 0
    for g in range(G.order):
        coset = frozenset(G.mul[g][k] for k in K)
        if coset in seen:
            continue
        seen.add(coset)
        if all(G.mul[h][g] in coset for h in H):
            count += 1
    return count


def double_coset_blocks(G, Q, K, H):
    blocks, seen = [], set()
    for h in sorted(H):
        if h in seen:
            continue
        block = frozenset(G.mul[G.mul[q][h]][k] for q in Q for k in K)
        seen |= block
        blocks.append(block)
    return blocks


def derived_subgroup(G, H):
    comms = {G.mul[G.mul[a][b]][G.mul[G.inv[a]][G.inv[b]]] for a in H for b in H}
    return closure(G, sorted(comms))


def perfect_core(G, H):
    cur = frozenset(H)
    while True:
        nxt = derived_subgroup(G, cur)
        if nxt == cur:
            return cur
        cur = nxt


def is_normal(G, N, H):
    return all(conj(G, h, N) == N for h in H)


def residual_by_search(G, H, subs, P):
    """Intersection of all normal N of H with H/N a solvable P-group.

    Also returns whether that intersection itself qualifies, which is the
    uniqueness of the minimal such N.
    """
    H = frozenset(H)
    core = perfect_core(G, H)

    def qualifies(N):
        idx = len(H) // len(N)
        return is_normal(G, N, H) and all(p in P for p in _primes(idx)) and core <= N

    good = [N for N in subs if N <= H and qualifies(N)]
    meet = frozenset.intersection(*good)
    return meet, qualifies(meet)


def _primes(n):
    out, p = [], 2
    while n > 1:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    return out


def effective_sets(K, max_size):
    """Every K-set of size <= max_size, as a list of orbit stabilizers."""
    from itertools import combinations_with_replacement

    from burnside_split.burnside import burnside_ring

    orbits = [(c.representative, K.order // c.order) for c in burnside_ring(K).classes]
    out = [[]]
    for n in range(1, max_size + 1):
        for combo in combinations_with_replacement(range(len(orbits)), n):
            if sum(orbits[i][1] for i in combo) <= max_size:
                out.append([orbits[i][0] for i in combo])
    return out


def check_coinduction(G, max_size=6, max_index=6):
    """Compare explicit coinduction with the marks formula for the norm.

    Pairs K <= H are taken up to simultaneous conjugacy.  Returns the number
    of (pair, K-set) cases compared; a mismatch raises AssertionError.
    """
    from burnside_split.burnside import coinduce, gset_from_orbits, norm
    from burnside_split.tambara import pairs_up_to_conjugacy

    cases = 0
    for pair in pairs_up_to_conjugacy(G):
        K, H = pair.K, pair.H
        if H.order // K.order > max_index:
            continue
        for stabs in effective_sets(K, max_size):
            X = gset_from_orbits(K, stabs)
            got = coinduce(X, H).to_burnside()
            want = norm(X.to_burnside(), H)
            assert got == want, f"coinduction mismatch for {K.label} <= {H.label}"
            cases += 1
    return cases
