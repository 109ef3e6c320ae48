"""Exact linear algebra: Smith and Howell forms, kernels, solving, module classification.

Two backends do the work.  Residue rings (Z/N, F_p and flattened finite
algebras) use vectorised int64 elimination modulo N.  Z and Q use a
Euclidean-domain Smith form on Python objects.  Both expose the same small
interface (kernel, solve, compress, cyclic structure), which is all the
subquotient machinery further down needs.

Conventions: solving and kernels of maps act on row vectors (x.A = b), which
is how complex differentials are stored.  The public kernel_image follows
the usual column picture (A.v = 0) instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .rings import (FiniteAlgebra, Integers, IntegersModN, PrimeField, Rationals, Ring,
                    RingElem, WrongRingKind)


class UnsupportedRing(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """(d, x, y) with x*a + y*b = d = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _unit_normalizer(a: int, n: int) -> int:
    """A unit u mod n with a*u = gcd(a, n) mod n."""
    g = math.gcd(a, n)
    m = n // g
    u0 = pow(a // g % m, -1, m) if m > 1 else 1
    for k in range(g):
        u = u0 + k * m
        if math.gcd(u, n) == 1:
            return u % n
    raise AssertionError("no unit normalizer found")


# residue-ring backend ------------------------------------------------------

def _as_mod(a, n: int) -> np.ndarray:
    arr = np.array(a, dtype=np.int64 if n <= (1 << 20) else object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    return arr % n


def modn_diagonalize(a, n: int, want_u: bool = False, want_v: bool = False):
    """Return (U, diag, V) with U.A.V = D mod n, D diagonal with entries diag.

    The pivot is an entry whose gcd with n is minimal; when it does not
    divide an entry of its row or column an extended-gcd 2x2 step makes a
    smaller pivot.  No divisibility chain is imposed on diag.
    """
    A = _as_mod(a, n).copy()
    m, k = A.shape
    U = np.eye(m, dtype=A.dtype) if want_u else None
    V = np.eye(k, dtype=A.dtype) if want_v else None
    diag: list[int] = []
    gtab = np.gcd(np.arange(n, dtype=np.int64), n) if A.dtype != object else None
    t = 0
    while t < m and t < k:
        sub = A[t:, t:]
        ri, ci = np.nonzero(sub)
        if ri.size == 0:
            break
        vals = sub[ri, ci]
        g = gtab[vals] if gtab is not None else np.gcd(vals, n)
        best = int(np.argmin(g))
        i, j = int(ri[best]) + t, int(ci[best]) + t
        if i != t:
            A[[t, i]] = A[[i, t]]
            if U is not None:
                U[[t, i]] = U[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
            if V is not None:
                V[:, [t, j]] = V[:, [j, t]]
        while True:
            p = int(A[t, t])
            gp = math.gcd(p, n)
            col = A[t + 1:, t]
            bad = np.nonzero(np.gcd(col, n) % gp)[0]
            if bad.size:
                s = t + 1 + int(bad[0])
                b = int(A[s, t])
                d, x, y = _egcd(p, b)
                rt, rs = A[t].copy(), A[s].copy()
                A[t] = (x * rt + y * rs) % n
                A[s] = ((-b // d) * rt + (p // d) * rs) % n
                if U is not None:
                    ut, us = U[t].copy(), U[s].copy()
                    U[t] = (x * ut + y * us) % n
                    U[s] = ((-b // d) * ut + (p // d) * us) % n
                continue
            row = A[t, t + 1:]
            bad = np.nonzero(np.gcd(row, n) % gp)[0]
            if bad.size:
                s = t + 1 + int(bad[0])
                b = int(A[t, s])
                d, x, y = _egcd(p, b)
                ct, cs = A[:, t].copy(), A[:, s].copy()
                A[:, t] = (x * ct + y * cs) % n
                A[:, s] = ((-b // d) * ct + (p // d) * cs) % n
                if V is not None:
                    vt, vs = V[:, t].copy(), V[:, s].copy()
                    V[:, t] = (x * vt + y * vs) % n
                    V[:, s] = ((-b // d) * vt + (p // d) * vs) % n
                continue
            break
        ng = n // gp
        inv = pow(p // gp % ng, -1, ng) if ng > 1 else 0
        rows = np.nonzero(A[t + 1:, t])[0] + t + 1
        if rows.size:
            c = (A[rows, t] // gp) * inv % ng
            A[rows] = (A[rows] - np.outer(c, A[t])) % n
            if U is not None:
                U[rows] = (U[rows] - np.outer(c, U[t])) % n
        cols = np.nonzero(A[t, t + 1:])[0] + t + 1
        if cols.size:
            c = (A[t, cols] // gp) * inv % ng
            A[t, cols] = 0
            if V is not None:
                V[:, cols] = (V[:, cols] - np.outer(V[:, t], c)) % n
        diag.append(p)
        t += 1
    return U, diag, V


def modn_kernel(a, n: int) -> np.ndarray:
    """Generators of {v : v.A = 0 mod n}, compressed to Howell form."""
    A = _as_mod(a, n)
    m = A.shape[0]
    if m == 0:
        return np.zeros((0, 0), dtype=A.dtype)
    if A.shape[1] == 0:
        return np.eye(m, dtype=A.dtype)
    U, diag, _ = modn_diagonalize(A, n, want_u=True)
    gens = []
    for i, d in enumerate(diag):
        mult = n // math.gcd(d, n)
        if mult != n:
            gens.append(U[i] * mult % n)
    gens.extend(U[len(diag):])
    if not gens:
        return np.zeros((0, m), dtype=A.dtype)
    return modn_howell(np.array(gens, dtype=A.dtype), n)


def modn_solve(a, b, n: int) -> list:
    """For each row of b a row x with x.A = b mod n, or None."""
    A = _as_mod(a, n)
    B = _as_mod(b, n)
    m, k = A.shape
    if B.shape[0] == 0:
        return []
    if B.shape[1] != k:
        raise DimensionMismatch(f"right-hand side has {B.shape[1]} columns, expected {k}")
    if m == 0:
        return [np.zeros(0, dtype=A.dtype) if not row.any() else None for row in B]
    U, diag, V = modn_diagonalize(A, n, want_u=True, want_v=True)
    C = B.dot(V) % n
    ok = np.ones(B.shape[0], dtype=bool)
    Y = np.zeros((B.shape[0], m), dtype=A.dtype)
    for i, d in enumerate(diag):
        g = math.gcd(d, n)
        ng = n // g
        ci = C[:, i]
        ok &= (ci % g) == 0
        if ng > 1:
            Y[:, i] = (ci // g) * pow(d // g % ng, -1, ng) % ng
    if len(diag) < k:
        ok &= ~np.any(C[:, len(diag):], axis=1)
    X = Y.dot(U) % n
    return [X[i] if ok[i] else None for i in range(B.shape[0])]


def modn_span_size(a, n: int) -> int:
    A = _as_mod(a, n)
    if A.size == 0:
        return 1
    _, diag, _ = modn_diagonalize(A, n)
    size = 1
    for d in diag:
        size *= n // math.gcd(d, n)
    return size


def modn_is_invertible(a, n: int) -> bool:
    A = _as_mod(a, n)
    if A.shape[0] != A.shape[1]:
        return False
    return modn_span_size(A, n) == n ** A.shape[0]


def modn_howell(a, n: int) -> np.ndarray:
    """Canonical Howell form: equal row spans give equal outputs."""
    A = _as_mod(a, n)
    if A.size == 0:
        return np.zeros((0, A.shape[1] if A.ndim == 2 else 0), dtype=A.dtype)
    cols = A.shape[1]
    P = A[np.any(A != 0, axis=1)].copy()
    top = 0  # rows above top are finished pivots
    result: list[tuple[int, np.ndarray]] = []
    for j in range(cols):
        if top >= P.shape[0]:
            break
        nzr = np.nonzero(P[top:, j])[0] + top
        if nzr.size == 0:
            continue
        gs = np.gcd(P[nzr, j], n)
        best = int(np.argmin(gs))
        gp = int(gs[best])
        b = int(nzr[best])
        P[[top, b]] = P[[b, top]]
        others = np.nonzero(P[top + 1:, j])[0] + top + 1
        if not np.any(gs % gp):
            # the pivot divides the whole column: one vectorized elimination
            P[top] = P[top] * _unit_normalizer(int(P[top, j]), n) % n
            if others.size:
                q = (P[others, j] // gp).reshape(-1, 1)
                P[others] = (P[others] - q * P[top]) % n
        else:
            for idx in others:
                a0, b0 = int(P[top, j]), int(P[idx, j])
                if b0 % a0 == 0:
                    P[idx] = (P[idx] - (b0 // a0) * P[top]) % n
                else:
                    d, x, y = _egcd(a0, b0)
                    pt, pr = P[top].copy(), P[idx].copy()
                    P[top] = (x * pt + y * pr) % n
                    P[idx] = ((-b0 // d) * pt + (a0 // d) * pr) % n
            P[top] = P[top] * _unit_normalizer(int(P[top, j]), n) % n
        piv = P[top].copy()
        p = int(piv[j])
        result.append((j, piv))
        top += 1
        if p != 1:
            extra = piv * (n // p) % n
            if extra.any():
                P = np.concatenate([P, extra.reshape(1, -1)], axis=0)
    if not result:
        return np.zeros((0, cols), dtype=A.dtype)
    R = np.array([r for _, r in result], dtype=A.dtype)
    for i, (j, _) in enumerate(result):
        if i == 0:
            continue
        q = R[:i, j] // R[i, j]
        idx = np.nonzero(q)[0]
        if idx.size:
            R[idx] = (R[idx] - q[idx].reshape(-1, 1) * R[i]) % n
    return R


# Euclidean-domain backend ----------------------------------------------------

class _IntDomain:
    name = "Z"

    def reduce(self, a):
        return a

    def norm(self, a):
        return abs(a)

    def quo_rem(self, a, b):
        q, r = divmod(a, b)
        return q, r

    def normalizer(self, a):
        return -1 if a < 0 else 1

    def is_unit(self, a):
        return a in (1, -1)


class _RationalDomain:
    name = "Q"

    def reduce(self, a):
        return a

    def norm(self, a):
        return 0 if a == 0 else 1

    def quo_rem(self, a, b):
        return Fraction(a) / b, Fraction(0)

    def normalizer(self, a):
        return 1 / Fraction(a)

    def is_unit(self, a):
        return a != 0


class _PrimeDomain:
    def __init__(self, p):
        self.p = p
        self.name = f"F_{p}"

    def reduce(self, a):
        return a % self.p

    def norm(self, a):
        return 0 if a % self.p == 0 else 1

    def quo_rem(self, a, b):
        return a * pow(b, -1, self.p) % self.p, 0

    def normalizer(self, a):
        return pow(a, -1, self.p)

    def is_unit(self, a):
        return a % self.p != 0


def _domain_for(ring: Ring):
    if isinstance(ring, Integers):
        return _IntDomain()
    if isinstance(ring, Rationals):
        return _RationalDomain()
    if isinstance(ring, PrimeField):
        return _PrimeDomain(ring.modulus)
    raise UnsupportedRing(f"Smith form needs Z, Q or a prime field, got {ring.name}")


def ed_smith(a: Sequence[Sequence], dom, want_u: bool = True, want_v: bool = True):
    """Smith form over a Euclidean domain; returns (U, D, V, rank) as lists."""
    A = [[dom.reduce(x) for x in row] for row in a]
    m = len(A)
    k = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)] if want_u else None
    V = [[int(i == j) for j in range(k)] for i in range(k)] if want_v else None

    def row_op(dst, src, q):  # row dst -= q * row src
        if q == 0:
            return
        rd, rs = A[dst], A[src]
        for c in range(k):
            if rs[c]:
                rd[c] = dom.reduce(rd[c] - q * rs[c])
        if U is not None:
            ud, us = U[dst], U[src]
            for c in range(m):
                if us[c]:
                    ud[c] = dom.reduce(ud[c] - q * us[c])

    def col_op(dst, src, q):  # col dst -= q * col src
        if q == 0:
            return
        for r in range(m):
            if A[r][src]:
                A[r][dst] = dom.reduce(A[r][dst] - q * A[r][src])
        if V is not None:
            for r in range(k):
                if V[r][src]:
                    V[r][dst] = dom.reduce(V[r][dst] - q * V[r][src])

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            if U is not None:
                U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for row in A:
                row[i], row[j] = row[j], row[i]
            if V is not None:
                for row in V:
                    row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, k):
        best = None
        for i in range(t, m):
            for j in range(t, k):
                if A[i][j] != 0:
                    nv = dom.norm(A[i][j])
                    if best is None or nv < best[0]:
                        best = (nv, i, j)
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t] != 0:
                    q, r = dom.quo_rem(A[i][t], p)
                    row_op(i, t, q)
                    dirty = dirty or r != 0
            if dirty:
                i = min((i for i in range(t, m) if A[i][t] != 0), key=lambda i: dom.norm(A[i][t]))
                swap_rows(t, i)
                continue
            for j in range(t + 1, k):
                if A[t][j] != 0:
                    q, r = dom.quo_rem(A[t][j], p)
                    col_op(j, t, q)
                    dirty = dirty or r != 0
            if dirty:
                j = min((j for j in range(t, k) if A[t][j] != 0), key=lambda j: dom.norm(A[t][j]))
                swap_cols(t, j)
                continue
            spoiler = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, k)
                            if A[i][j] != 0 and dom.quo_rem(A[i][j], p)[1] != 0), None)
            if spoiler is not None:
                row_op(t, spoiler[0], -1)
                continue
            break
        u = dom.normalizer(A[t][t])
        if u != 1:
            A[t] = [dom.reduce(x * u) for x in A[t]]
            if U is not None:
                U[t] = [dom.reduce(x * u) for x in U[t]]
        t += 1
    return U, A, V, t


def _obj(rows, ncols) -> np.ndarray:
    out = np.empty((len(rows), ncols), dtype=object)
    for i, r in enumerate(rows):
        for j in range(ncols):
            out[i, j] = r[j]
    return out


# uniform backend interface --------------------------------------------------

class ModBackend:
    """Linear algebra on row vectors over Z/n."""

    def __init__(self, n: int):
        self.n = n
        self.dtype = np.int64 if n <= (1 << 20) else object
        self.finite = True

    def __eq__(self, other):
        return isinstance(other, ModBackend) and other.n == self.n

    def __hash__(self):
        return hash(("mod", self.n))

    def zeros(self, r, c):
        return np.zeros((r, c), dtype=self.dtype)

    def eye(self, n):
        return np.eye(n, dtype=self.dtype)

    def asarray(self, a):
        return np.array(a, dtype=self.dtype).reshape(np.shape(a)) % self.n

    def matmul(self, a, b):
        if a.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        return a.dot(b) % self.n

    def add(self, a, b):
        return (a + b) % self.n

    def neg(self, a):
        return (-a) % self.n

    def is_zero(self, a):
        return not np.any(a % self.n)

    def kernel(self, a):
        if a.shape[0] == 0:
            return self.zeros(0, 0)
        return modn_kernel(a, self.n)

    def compress(self, a):
        if a.shape[0] == 0:
            return a
        return modn_howell(a, self.n)

    def solve(self, a, b):
        return modn_solve(a, b, self.n)

    def in_span(self, a, b) -> bool:
        if b.shape[0] == 0 or self.is_zero(b):
            return True
        if a.shape[0] == 0:
            return False
        return all(x is not None for x in self.solve(a, b))

    def cyclic_orders(self, rel, m) -> list[int]:
        """Orders of the cyclic summands of (Z/n)^m / rowspan(rel)."""
        if m == 0:
            return []
        if rel.shape[0] == 0:
            return [self.n] * m
        _, diag, _ = modn_diagonalize(rel, self.n)
        orders = [math.gcd(d, self.n) for d in diag] + [self.n] * (m - len(diag))
        return [o for o in orders if o > 1]

    def classify(self, rel, m) -> "ModuleClassification":
        return classification_from_orders(self.cyclic_orders(rel, m), self.n)

    def span_size(self, a):
        return modn_span_size(a, self.n)


class EDBackend:
    """Linear algebra on row vectors over Z, Q or F_p via Smith forms."""

    def __init__(self, ring: Ring):
        self.ring = ring
        self.dom = _domain_for(ring)
        self.finite = isinstance(ring, PrimeField)
        self.n = ring.modulus if self.finite else None

    def __eq__(self, other):
        return isinstance(other, EDBackend) and other.ring == self.ring

    def __hash__(self):
        return hash(("ed", self.ring))

    def zeros(self, r, c):
        return self.ring.mat_zeros(r, c)

    def eye(self, n):
        return self.ring.mat_identity(n)

    def asarray(self, a):
        return a

    def matmul(self, a, b):
        if a.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        return self.ring.mat_reduce(a.dot(b))

    def add(self, a, b):
        return self.ring.mat_reduce(a + b)

    def neg(self, a):
        return self.ring.mat_reduce(-a)

    def is_zero(self, a):
        return all(v == 0 for v in a.flat)

    def _smith(self, a, want_u=True, want_v=True):
        return ed_smith(a.tolist(), self.dom, want_u, want_v)

    def kernel(self, a):
        m = a.shape[0]
        if m == 0:
            return self.zeros(0, 0)
        if a.shape[1] == 0:
            return self.eye(m)
        U, _, _, rank = self._smith(a, True, False)
        return _obj(U[rank:], m)

    def compress(self, a):
        if a.shape[0] == 0:
            return a
        U, _, _, rank = self._smith(a, True, False)
        if rank == 0:
            return self.zeros(0, a.shape[1])
        return self.matmul(_obj(U[:rank], a.shape[0]), a)

    def solve(self, a, b):
        m, k = a.shape
        if b.shape[0] == 0:
            return []
        if m == 0:
            return [self.zeros(1, 0)[0] if self.is_zero(row.reshape(1, -1)) else None for row in b]
        U, D, V, rank = self._smith(a)
        C = self.matmul(b, _obj(V, k))
        out = []
        for row in C:
            if any(row[j] != 0 for j in range(rank, k)):
                out.append(None)
                continue
            y = [0] * m
            ok = True
            for i in range(rank):
                q, r = self.dom.quo_rem(row[i], D[i][i])
                if r != 0:
                    ok = False
                    break
                y[i] = q
            if not ok:
                out.append(None)
                continue
            out.append(self.matmul(_obj([y], m), _obj(U, m))[0])
        return out

    def in_span(self, a, b):
        if b.shape[0] == 0 or self.is_zero(b):
            return True
        if a.shape[0] == 0:
            return False
        return all(x is not None for x in self.solve(a, b))

    def invariants(self, rel, m):
        """(free rank, normalized non-unit invariant factors) of base^m / rowspan(rel)."""
        if rel.shape[0] == 0 or m == 0:
            return m, []
        _, D, _, rank = self._smith(rel, False, False)
        inv = [D[i][i] for i in range(rank) if not self.dom.is_unit(D[i][i])]
        return m - rank, inv

    def classify(self, rel, m):
        free, inv = self.invariants(rel, m)
        if isinstance(self.ring, Integers):
            return ModuleClassification(free, tuple(str(d) for d in inv), None, "Z")
        if isinstance(self.ring, Rationals):
            return ModuleClassification(free, (), None, "Q")
        return ModuleClassification(free, (), self.ring.modulus ** free, self.ring.name)

    def span_size(self, a):
        if not self.finite:
            raise UnsupportedRing("span size needs a finite ring")
        if a.shape[0] == 0:
            return 1
        _, _, _, rank = self._smith(a, False, False)
        return self.n ** rank


def backend_for(ring: Ring):
    if isinstance(ring, (IntegersModN, FiniteAlgebra)):
        return ModBackend(ring.modulus)
    if isinstance(ring, PrimeField):
        return ModBackend(ring.modulus)
    if isinstance(ring, (Integers, Rationals)):
        return EDBackend(ring)
    raise UnsupportedRing(f"no linear algebra backend for {ring!r}")


# classifications --------------------------------------------------------------

def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def invariant_factors(orders: Sequence[int]) -> list[int]:
    """Turn a direct sum of cyclic groups into an ascending divisibility chain."""
    by_prime: dict[int, list[int]] = {}
    for o in orders:
        for p, e in _factorize(int(o)).items():
            by_prime.setdefault(p, []).append(e)
    if not by_prime:
        return []
    length = max(len(v) for v in by_prime.values())
    chain = [1] * length
    for p, exps in by_prime.items():
        exps = sorted(exps, reverse=True)
        for i, e in enumerate(exps):
            chain[length - 1 - i] *= p ** e
    return [c for c in chain if c > 1]


@dataclass(frozen=True)
class ModuleClassification:
    """Invariant-factor description of a finitely presented module.

    Over Z/N the cyclic summands equal to Z/N are counted in free_rank and
    the rest are listed in torsion (ascending, each dividing the next).
    Modules over finite algebras are described as Z/N-modules.
    """

    free_rank: int
    torsion: tuple[str, ...]
    cardinality: int | None
    base: str

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def render(self) -> str:
        if self.is_zero:
            return "0"
        parts = [f"{self.base}/{t}" if self.base == "Z" else f"Z/{t}" for t in self.torsion]
        if self.free_rank:
            parts.append(self.base if self.free_rank == 1 else f"{self.base}^{self.free_rank}")
        return " + ".join(parts)

    def to_json(self) -> dict:
        out = {"base": self.base, "freeRank": self.free_rank, "invariants": list(self.torsion)}
        if self.cardinality is not None:
            out["cardinality"] = self.cardinality
        out["text"] = self.render()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ModuleClassification":
        return cls(int(data["freeRank"]), tuple(data["invariants"]), data.get("cardinality"),
                   data["base"])

    def __str__(self):
        return self.render()


def classification_from_orders(orders: Sequence[int], n: int) -> ModuleClassification:
    chain = invariant_factors(orders)
    free = sum(1 for c in chain if c == n)
    tors = tuple(str(c) for c in chain if c != n)
    card = 1
    for c in chain:
        card *= c
    return ModuleClassification(free, tors, card, f"Z/{n}")


# Matrix ----------------------------------------------------------------------

class Matrix:
    """Dense matrix over a Ring, stored in the ring's native array layout."""

    __slots__ = ("ring", "data")

    def __init__(self, ring: Ring, data):
        self.ring = ring
        self.data = data

    @classmethod
    def from_rows(cls, ring: Ring, rows, cols: int | None = None) -> "Matrix":
        rows = [list(r) for r in rows]
        payloads = [[ring(v).payload for v in r] for r in rows]
        return cls(ring, ring.mat_from_payloads(payloads, cols))

    @classmethod
    def zeros(cls, ring, rows, cols) -> "Matrix":
        return cls(ring, ring.mat_zeros(rows, cols))

    @classmethod
    def identity(cls, ring, n) -> "Matrix":
        return cls(ring, ring.mat_identity(n))

    @classmethod
    def scalar(cls, ring, value, n) -> "Matrix":
        return cls.identity(ring, n).scale(value)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    def __getitem__(self, idx) -> RingElem:
        i, j = idx
        return RingElem(self.ring, self.ring.mat_entry(self.data, i, j))

    def entries(self) -> list[list[RingElem]]:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def payloads(self) -> list[list]:
        return [[self.ring.mat_entry(self.data, i, j) for j in range(self.cols)]
                for i in range(self.rows)]

    def _check(self, other: "Matrix"):
        if other.ring != self.ring:
            raise WrongRingKind(f"matrices over {self.ring.name} and {other.ring.name}")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.shape} @ {other.shape}")
        return Matrix(self.ring, self.ring.mat_mul(self.data, other.data))

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return Matrix(self.ring, self.ring.mat_add(self.data, other.data))

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def __neg__(self) -> "Matrix":
        return Matrix(self.ring, self.ring.mat_neg(self.data))

    def scale(self, value) -> "Matrix":
        return Matrix(self.ring, self.ring.mat_scale(self.ring(value).payload, self.data))

    def __eq__(self, other):
        return (isinstance(other, Matrix) and other.ring == self.ring
                and self.ring.mat_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.ring, self.shape))

    def is_zero(self) -> bool:
        return self.ring.mat_is_zero(self.data)

    @property
    def T(self) -> "Matrix":
        return Matrix(self.ring, self.ring.mat_transpose(self.data))

    def kron(self, other: "Matrix") -> "Matrix":
        self._check(other)
        return Matrix(self.ring, self.ring.mat_kron(self.data, other.data))

    def flat(self) -> np.ndarray:
        """Row-convention matrix over the base ring (for algebras, one row per basis element)."""
        return self.ring.flatten_matrix(self.data)

    def submatrix(self, rows, cols) -> "Matrix":
        return Matrix(self.ring, self.data[rows][:, cols])

    def power(self, k: int) -> "Matrix":
        out = Matrix.identity(self.ring, self.rows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def render(self) -> list[list[str]]:
        return [[self.ring.render(p) for p in row] for row in self.payloads()]

    def __repr__(self):
        return f"Matrix({self.ring.name}, {self.render()})"


def hstack(ring: Ring, blocks: Sequence[Matrix], rows: int | None = None) -> Matrix:
    if not blocks:
        return Matrix.zeros(ring, rows or 0, 0)
    return Matrix(ring, np.concatenate([b.data for b in blocks], axis=1))


def vstack(ring: Ring, blocks: Sequence[Matrix], cols: int | None = None) -> Matrix:
    if not blocks:
        return Matrix.zeros(ring, 0, cols or 0)
    return Matrix(ring, np.concatenate([b.data for b in blocks], axis=0))


def block_diag(ring: Ring, blocks: Sequence[Matrix]) -> Matrix:
    r = sum(b.rows for b in blocks)
    c = sum(b.cols for b in blocks)
    out = ring.mat_zeros(r, c)
    i = j = 0
    for b in blocks:
        out[i:i + b.rows, j:j + b.cols] = b.data
        i += b.rows
        j += b.cols
    return Matrix(ring, out)


def block_matrix(ring: Ring, grid: Sequence[Sequence[Matrix | None]], row_sizes, col_sizes) -> Matrix:
    """Assemble from blocks; None entries are zero blocks."""
    out = ring.mat_zeros(sum(row_sizes), sum(col_sizes))
    r0 = 0
    for bi, rs in enumerate(row_sizes):
        c0 = 0
        for bj, cs in enumerate(col_sizes):
            blk = grid[bi][bj]
            if blk is not None:
                if blk.shape != (rs, cs):
                    raise DimensionMismatch(f"block {bi},{bj} has shape {blk.shape}, expected {(rs, cs)}")
                out[r0:r0 + rs, c0:c0 + cs] = blk.data
            c0 += cs
        r0 += rs
    return Matrix(ring, out)


# finitely presented modules ---------------------------------------------------

class FpModule:
    """Cokernel of a relation matrix: R^g / rowspan(relations).

    operators are named g x g matrices in column convention (column j is the
    image of generator j), e.g. the U-variable actions on truncated modules.
    """

    def __init__(self, ring: Ring, generators: int, relations: Matrix | None = None,
                 operators: dict[str, Matrix] | None = None, check: bool = True):
        self.ring = ring
        self.generators = int(generators)
        if relations is None:
            relations = Matrix.zeros(ring, 0, self.generators)
        if relations.cols != self.generators:
            raise DimensionMismatch(f"relations have {relations.cols} columns, expected {generators}")
        self.relations = relations
        self.operators = dict(operators or {})
        if check:
            for name, op in self.operators.items():
                if op.shape != (self.generators, self.generators):
                    raise DimensionMismatch(f"operator {name} has shape {op.shape}")
                if not self.respects_relations(op.T):
                    raise ValueError(f"operator {name} does not preserve the relations")

    @classmethod
    def free(cls, ring: Ring, rank: int = 1) -> "FpModule":
        return cls(ring, rank)

    @classmethod
    def cyclic(cls, ring: Ring, *annihilators) -> "FpModule":
        """R / (a_1, ..., a_s)."""
        rel = Matrix.from_rows(ring, [[a] for a in annihilators], 1)
        return cls(ring, 1, rel)

    @property
    def is_free(self) -> bool:
        return self.relations.rows == 0 or self.relations.is_zero()

    def flat_relations(self) -> np.ndarray:
        """Relations over the base ring, in flattened coordinates."""
        return self.relations.flat()

    @property
    def flat_dim(self) -> int:
        return self.generators * self.ring.rank

    def respects_relations(self, row_map: Matrix) -> bool:
        """Does the row-convention map send relations into the relation span?"""
        if self.relations.rows == 0:
            return True
        image = (self.relations @ row_map).flat()
        be = backend_for(self.ring)
        return be.in_span(be.asarray(self.flat_relations()), be.asarray(image))

    def classify(self) -> ModuleClassification:
        return classify_module(self)

    def cardinality(self) -> int | None:
        return self.classify().cardinality

    def direct_sum(self, other: "FpModule") -> "FpModule":
        ops = {}
        for name in set(self.operators) & set(other.operators):
            ops[name] = block_diag(self.ring, [self.operators[name], other.operators[name]])
        rel = block_diag(self.ring, [self.relations, other.relations])
        return FpModule(self.ring, self.generators + other.generators, rel, ops, check=False)

    def power(self, k: int) -> "FpModule":
        """M^k with generator index block * g + s."""
        eye = Matrix.identity(self.ring, k)
        ops = {name: eye.kron(op) for name, op in self.operators.items()}
        return FpModule(self.ring, k * self.generators, eye.kron(self.relations), ops, check=False)

    def elements(self):
        """All elements as flattened coordinate tuples modulo relations (finite rings)."""
        be = backend_for(self.ring)
        if not be.finite:
            raise WrongRingKind("element enumeration needs a finite ring")
        return enumerate_quotient(be.n, self.flat_dim, self.flat_relations())

    def __repr__(self):
        return f"FpModule({self.ring.name}, g={self.generators}, relations={self.relations.rows})"


def enumerate_quotient(n: int, dim: int, rel) -> list[tuple[int, ...]]:
    """Brute-force canonical representatives of (Z/n)^dim / rowspan(rel)."""
    import itertools
    span = enumerate_span(n, dim, rel)
    seen = set()
    reps = []
    for v in itertools.product(range(n), repeat=dim):
        if v in seen:
            continue
        reps.append(v)
        va = np.array(v, dtype=np.int64)
        for s in span:
            seen.add(tuple(int(c) for c in (va + np.array(s, dtype=np.int64)) % n))
    return reps


def enumerate_span(n: int, dim: int, rows) -> set[tuple[int, ...]]:
    """Brute-force row span over Z/n by closure under addition."""
    rows = [tuple(int(c) % n for c in r) for r in np.asarray(rows).reshape(-1, dim)] if dim else []
    span = {tuple([0] * dim)}
    frontier = list(span)
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


# public operations ------------------------------------------------------------

def smith_normal_form(A: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """(U, D, V) with U.A.V = D, D diagonal with d1 | d2 | ...; Z, Q or F_p only."""
    dom = _domain_for(A.ring)
    U, D, V, _ = ed_smith(A.payloads(), dom)
    ring = A.ring
    return (Matrix.from_rows(ring, U, A.rows), Matrix.from_rows(ring, D, A.cols),
            Matrix.from_rows(ring, V, A.cols))


def howell_form(A: Matrix) -> Matrix:
    """Canonical Howell form over Z/N; algebra matrices are flattened first."""
    ring = A.ring
    if isinstance(ring, IntegersModN):
        return Matrix(ring, modn_howell(A.data, ring.modulus))
    if isinstance(ring, FiniteAlgebra):
        return Matrix(ring.base, modn_howell(A.flat(), ring.modulus))
    raise UnsupportedRing(f"Howell form needs Z/N or a finite algebra, got {ring.name}")


def kernel_image(A: Matrix) -> tuple[Matrix, Matrix]:
    """Row generators of ker(v -> A.v) and of the column span of A.

    Algebra matrices are flattened, so both outputs live over Z/N.
    """
    ring = A.ring
    if isinstance(ring, FiniteAlgebra):
        base, data = ring.base, A.T.flat()
    else:
        base, data = ring, A.T.data
    be = backend_for(base)
    data = be.asarray(data)
    ker = be.kernel(data)
    if ker.shape[0] == 0:
        ker = be.zeros(0, data.shape[0])
    img = be.compress(data)
    if img.shape[0] == 0:
        img = be.zeros(0, data.shape[1])
    if isinstance(be, EDBackend):
        ker = _normalize_rows(ker, be)
    return Matrix(base, ker), Matrix(base, img)


def _normalize_rows(rows, be):
    out = rows.copy()
    for i in range(out.shape[0]):
        lead = next((v for v in out[i] if v != 0), None)
        if lead is not None:
            u = be.dom.normalizer(lead)
            out[i] = [be.dom.reduce(v * u) for v in out[i]]
    return out


def solve_linear(A: Matrix, b) -> tuple | None:
    """x with x.A = b, or None.  For algebra matrices both sides are flattened."""
    ring = A.ring
    if isinstance(b, Matrix):
        bvec = b
    else:
        bvec = Matrix.from_rows(ring, [list(b)], A.cols)
    if isinstance(ring, FiniteAlgebra):
        # unknowns are algebra coefficients of x; rows of the flat matrix are e_a * A_i
        be = ModBackend(ring.modulus)
        flat_b = bvec.data.reshape(1, -1)
        sol = be.solve(A.flat(), flat_b)[0]
        if sol is None:
            return None
        coeffs = sol.reshape(A.rows, ring.rank)
        return tuple(RingElem(ring, tuple(int(c) for c in row)) for row in coeffs)
    be = backend_for(ring)
    sol = be.solve(be.asarray(A.data), be.asarray(bvec.data))[0]
    if sol is None:
        return None
    return tuple(RingElem(ring, ring.coerce(v)) for v in sol)


def classify_module(M: FpModule) -> ModuleClassification:
    """Invariant factors of the cokernel of the relations.

    For residue rings the relations are lifted to Z, stacked with N times the
    identity and put in Smith form; for fields and Z the Smith form is used
    directly.
    """
    ring = M.ring
    if isinstance(ring, (IntegersModN, FiniteAlgebra)):
        n = ring.modulus
        rel = M.flat_relations()
        dim = M.flat_dim
        if dim == 0:
            return ModuleClassification(0, (), 1, f"Z/{n}")
        lifted = [[int(v) for v in row] for row in np.asarray(rel).reshape(-1, dim)]
        lifted += [[n if i == j else 0 for j in range(dim)] for i in range(dim)]
        _, D, _, rank = ed_smith(lifted, _IntDomain(), False, False)
        orders = [abs(D[i][i]) for i in range(rank)]
        return classification_from_orders(orders, n)
    return backend_for(ring).classify(M.relations.data, M.generators)


# subquotients and induced maps ---------------------------------------------------

class Subquotient:
    """(span(gens) + span(rels)) / span(rels) inside base^dim, with a presentation.

    K holds compressed generators, L the relations among them, so the
    module is base^m / span(L) with m = K.rows.
    """

    def __init__(self, be, dim: int, gens, rels):
        self.be = be
        self.dim = dim
        if gens.shape[0] == 0:
            gens = be.zeros(0, dim)
        if rels.shape[0] == 0:
            rels = be.zeros(0, dim)
        self.B = be.compress(rels) if rels.shape[0] else rels
        if self.B.shape[0] == 0:
            self.B = be.zeros(0, dim)
        K = be.compress(gens) if gens.shape[0] else gens
        self.K = K if K.shape[0] else be.zeros(0, dim)
        m = self.K.shape[0]
        if m == 0:
            self.L = be.zeros(0, 0)
        elif self.B.shape[0] == 0:
            self.L = _proj(be.kernel(self.K), 0, m, be)
        else:
            stacked = np.concatenate([self.K, self.B], axis=0)
            self.L = _proj(be.kernel(stacked), 0, m, be)
        self.m = m
        self._class = None

    @property
    def classification(self) -> ModuleClassification:
        if self._class is None:
            self._class = self.be.classify(self.L, self.m)
        return self._class

    @property
    def is_zero(self) -> bool:
        return self.classification.is_zero

    @property
    def cardinality(self):
        return self.classification.cardinality

    def coords(self, vectors):
        """Coordinates (rows) of ambient vectors in terms of K; raises if outside."""
        if vectors.shape[0] == 0:
            return self.be.zeros(0, self.m)
        if self.m == 0 and self.B.shape[0] == 0:
            if not self.be.is_zero(vectors):
                raise ValueError("vector not in subquotient")
            return self.be.zeros(vectors.shape[0], 0)
        stacked = np.concatenate([self.K, self.B], axis=0)
        sols = self.be.solve(stacked, vectors)
        if any(s is None for s in sols):
            raise ValueError("vector not in subquotient")
        return np.array([s[:self.m] for s in sols], dtype=self.K.dtype).reshape(len(sols), self.m)

    def contains(self, vectors) -> bool:
        stacked = np.concatenate([self.K, self.B], axis=0)
        if stacked.shape[0] == 0:
            return self.be.is_zero(vectors)
        return self.be.in_span(stacked, vectors)

    def represents_zero(self, vectors) -> bool:
        """Are these ambient vectors zero in the subquotient (i.e. in span(B))?"""
        return self.be.in_span(self.B, vectors)

    def induced(self, other: "Subquotient", row_map) -> "InducedMap":
        """Map induced by an ambient row-convention matrix (self.dim x other.dim)."""
        if self.m == 0:
            return InducedMap(self, other, self.be.zeros(0, other.m))
        images = self.be.matmul(self.K, row_map)
        return InducedMap(self, other, other.coords(images))

    def operator(self, row_map):
        """Row-convention m x m matrix of an ambient endomorphism preserving the subquotient."""
        return self.induced(self, row_map).G


def _proj(rows, start, stop, be):
    if rows.shape[0] == 0:
        return be.zeros(0, stop - start)
    return np.ascontiguousarray(rows[:, start:stop])


class InducedMap:
    """Map between subquotients given by coordinates G (rows = source generators)."""

    def __init__(self, source: Subquotient, target: Subquotient, G):
        self.source = source
        self.target = target
        self.G = G if G.shape[0] or G.shape[1] else source.be.zeros(source.m, target.m)
        self.be = source.be

    def compose(self, after: "InducedMap") -> "InducedMap":
        return InducedMap(self.source, after.target, self.be.matmul(self.G, after.G))

    def __sub__(self, other: "InducedMap") -> "InducedMap":
        return InducedMap(self.source, self.target, self.be.add(self.G, self.be.neg(other.G)))

    def is_zero(self) -> bool:
        if self.source.m == 0 or self.target.m == 0:
            return True
        return self.be.in_span(self.target.L, self.G)

    def _stack_target(self):
        t = self.target
        if t.m == 0:
            return self.be.zeros(0, 0)
        return np.concatenate([self.G.reshape(-1, t.m), t.L.reshape(-1, t.m)], axis=0)

    def is_surjective(self) -> bool:
        t = self.target
        if t.m == 0:
            return True
        return self.be.classify(self._stack_target(), t.m).is_zero

    def kernel(self) -> Subquotient:
        s = self.source
        if s.m == 0:
            return Subquotient(self.be, 0, self.be.zeros(0, 0), self.be.zeros(0, 0))
        if self.target.m == 0:
            W = self.be.eye(s.m)
        else:
            stacked = np.concatenate([self.G, self.target.L.reshape(-1, self.target.m)], axis=0)
            W = _proj(self.be.kernel(stacked), 0, s.m, self.be)
        return Subquotient(self.be, s.m, W, s.L)

    def image(self) -> Subquotient:
        t = self.target
        if t.m == 0:
            return Subquotient(self.be, 0, self.be.zeros(0, 0), self.be.zeros(0, 0))
        return Subquotient(self.be, t.m, self.G.reshape(-1, t.m), t.L.reshape(-1, t.m))

    def cokernel(self) -> ModuleClassification:
        return self.be.classify(self._stack_target(), self.target.m)

    def is_injective(self) -> bool:
        return self.kernel().is_zero

    def is_iso(self) -> bool:
        return self.is_injective() and self.is_surjective()
