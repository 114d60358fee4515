"""Independent reference computations used only by the tests.

Each oracle takes a different route from the library code it checks:
brute force instead of search, matrices instead of coordinate formulas,
plain loops instead of numpy.
"""
import itertools
import math

import numpy as np


def sdr_exists(sets, universe_size):
    """Permanent positivity of the incidence matrix, by brute force over
    injective assignments."""
    k = len(sets)
    if k > universe_size:
        return False
    for choice in itertools.permutations(range(universe_size), k):
        if all(c in s for c, s in zip(choice, sets)):
            return True
    return k == 0


def hall_holds(sets):
    for r in range(1, len(sets) + 1):
        for sub in itertools.combinations(range(len(sets)), r):
            if len(set().union(*(set(sets[i]) for i in sub))) < r:
                return False
    return True


def min_cover_size(masks, full):
    """Smallest number of masks whose union is ``full``, by increasing size."""
    for r in range(0, len(masks) + 1):
        for combo in itertools.combinations(masks, r):
            acc = 0
            for mk in combo:
                acc |= mk
            if acc == full:
                return r
    return None


def heisenberg_matrix(p):
    x, y, z = p
    return np.array([[1, x, z], [0, 1, y], [0, 0, 1]], dtype=float)


def heisenberg_from_matrix(M):
    return (M[0, 1], M[1, 2], M[0, 2])


def affine_matrix(p):
    a, b = p
    return np.array([[a, b], [0, 1]], dtype=float)


def affine_from_matrix(M):
    return (M[0, 0], M[0, 1])


def riemann_sum_circle(f, n):
    """Midpoint rule on the unit circle with ``n`` cells."""
    return math.fsum(f((i + 0.5) / n) for i in range(n)) / n


def isomorphic(A, B):
    """Brute-force isomorphism test of two operation tables."""
    A, B = np.asarray(A), np.asarray(B)
    n = len(A)
    if len(B) != n:
        return False
    for perm in itertools.permutations(range(n)):
        if all(perm[A[a][b]] == B[perm[a]][perm[b]] for a in range(n) for b in range(n)):
            return True
    return False


def group_isomorphic(A, B):
    """Isomorphism of groups: backtracking over images, cheaper than full
    permutations for order 8 but still exhaustive."""
    A, B = np.asarray(A), np.asarray(B)
    n = len(A)
    if len(B) != n:
        return False

    def order_profile(T):
        e = next(i for i in range(n) if all(T[i][j] == j for j in range(n)))
        prof = []
        for g in range(n):
            k, x = 1, g
            while x != e:
                x, k = T[x][g], k + 1
            prof.append(k)
        return e, prof

    ea, pa = order_profile(A)
    eb, pb = order_profile(B)
    if sorted(pa) != sorted(pb):
        return False
    phi = [-1] * n

    def extend(i, used):
        if i == n:
            return all(phi[A[a][b]] == B[phi[a]][phi[b]] for a in range(n) for b in range(n))
        for cand in range(n):
            if cand in used or pb[cand] != pa[i]:
                continue
            phi[i] = cand
            ok = all(phi[A[a][b]] in (-1, B[phi[a]][phi[b]])
                     for a in range(i + 1) for b in range(i + 1) if phi[A[a][b]] != -1)
            if ok and extend(i + 1, used | {cand}):
                return True
        phi[i] = -1
        return False

    return extend(0, set())


def is_group_table(T):
    T = np.asarray(T)
    n = len(T)
    for a, b, c in itertools.product(range(n), repeat=3):
        if T[T[a][b]][c] != T[a][T[b][c]]:
            return False
    ids = [e for e in range(n) if all(T[e][x] == x and T[x][e] == x for x in range(n))]
    if len(ids) != 1:
        return False
    e = ids[0]
    return all(any(T[a][b] == e and T[b][a] == e for b in range(n)) for a in range(n))


def ideals_by_subsets(T):
    """All two-sided ideals (including the empty set) by subset enumeration."""
    T = np.asarray(T)
    n = len(T)
    out = []
    for mask in range(1 << n):
        I = {i for i in range(n) if mask >> i & 1}
        if all(T[s][i] in I and T[i][s] in I for i in I for s in range(n)):
            out.append(frozenset(I))
    return out
