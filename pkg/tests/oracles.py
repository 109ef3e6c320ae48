"""Brute-force oracles used to freeze and cross-check derived values."""
import itertools
import math
from fractions import Fraction

import numpy as np


def row_span(rows, n, dim):
    """All elements of the row span over Z/n, by closure under addition."""
    span = {tuple([0] * dim)}
    frontier = list(span)
    rows = [tuple(int(c) % n for c in r) for r in rows]
    while frontier:
        nxt = []
        for v in frontier:
            for r in rows:
                w = tuple((a + b) % n for a, b in zip(v, r))
                if w not in span:
                    span.add(w)
                    nxt.append(w)
        frontier = nxt
    return span


def det(mat):
    """Exact determinant by fraction-free expansion (small matrices only)."""
    k = len(mat)
    if k == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(k)):
        sign = 1
        for i in range(k):
            for j in range(i + 1, k):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = 1
        for i in range(k):
            prod *= mat[i][perm[i]]
        total += sign * prod
    return total


def determinantal_divisors(mat):
    """gcd of all k x k minors for k = 1..min(m, n)."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    out = []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, det([[mat[i][j] for j in cols] for i in rows]))
        out.append(g)
    return out


def smith_invariants_from_minors(mat):
    """Invariant factors d_k = D_k / D_{k-1}, stopping at the first zero."""
    out = []
    prev = 1
    for dk in determinantal_divisors(mat):
        if dk == 0:
            break
        out.append(dk // prev)
        prev = dk
    return out


def quotient_size(rows, n, dim):
    return n ** dim // len(row_span(rows, n, dim))


def homology_size_brute(d_in, d_out, n, dim):
    """|ker(v -> v.d_out) / rowspan(d_in)| over Z/n by enumeration."""
    kernel = 0
    for v in itertools.product(range(n), repeat=dim):
        va = np.array(v, dtype=np.int64)
        if d_out is None or not np.any(va.dot(np.asarray(d_out, dtype=np.int64)) % n):
            kernel += 1
    image = len(row_span(d_in, n, dim)) if d_in is not None and len(d_in) else 1
    return kernel // image


def rational_rank(mat):
    rows = [[Fraction(x) for x in r] for r in mat]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c] / rows[rank][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


class BruteModule:
    """(Z/n)^g / rowspan(rels), elements enumerated as canonical coset representatives."""

    def __init__(self, n, g, rels=()):
        self.n, self.g = n, g
        self.span = row_span(rels, n, g) if rels else {tuple([0] * g)}
        self._canon = {}
        for v in itertools.product(range(n), repeat=g):
            if v not in self._canon:
                coset = [tuple((a + b) % n for a, b in zip(v, s)) for s in self.span]
                rep = min(coset)
                for w in coset:
                    self._canon[w] = rep
        self.elements = sorted(set(self._canon.values()))

    def canon(self, v):
        return self._canon[tuple(int(a) % self.n for a in v)]

    def scale(self, x, v):
        return self.canon([x * a for a in v])

    def is_zero(self, v):
        return self.canon(v) == tuple([0] * self.g)


def brute_stable_image(M, x):
    """x^k M for k large, as a set of canonical elements."""
    cur = set(M.elements)
    while True:
        nxt = {M.scale(x, v) for v in cur}
        if nxt == cur:
            return cur
        cur = nxt


def brute_torsion(M, xs):
    """{m : x_i^K m = 0 for all i}, K large enough to exhaust every x_i-power torsion."""
    K = M.n.bit_length() + 1
    return [v for v in M.elements
            if all(M.is_zero([pow(x, K, M.n) * a for a in v]) for x in xs)]
