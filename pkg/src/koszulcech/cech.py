"""Localization of finite modules, the Čech complex built from it, and the
Koszul-side computations it is compared against.

Everything over a finite ring is done over the base ring Z/N: a module over
an algebra is flattened, and the action of a ring element is its flattened
matrix.  The localization M_x is realized inside M as T = x^k M, the part on
which x acts bijectively, with the natural map iota(m) = the unique t in T
with x^k t = x^k m.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .adic import (LimitsResult, fitting_exponent, koszul_systems, limits, xu_systems)
from .complexes import ChainComplex, ChainMap
from .koszul import SequenceContext, as_matrix, koszul_chain, koszul_cochain, label_map
from .linalg import FpModule, Matrix, ModuleClassification, Subquotient, backend_for, block_matrix
from .rings import Integers, Ring, RingElem

DEFAULT_MAX_TERM_SIZE = 4096


class InfiniteRing(ValueError):
    """The operation needs a finite ring."""


class TooLarge(ValueError):
    """The Čech complex would exceed the configured size guard."""


def max_term_size() -> int:
    return int(os.environ.get("KOSZUL_MAX_TERM_SIZE", DEFAULT_MAX_TERM_SIZE))


def _require_finite(ring: Ring) -> None:
    if not ring.is_finite:
        raise InfiniteRing(f"{ring.name} is infinite; the Čech oracle needs a finite ring")


def _elem(ring: Ring, x) -> RingElem:
    return x if isinstance(x, RingElem) else ring(x)


@dataclass
class FlatModule:
    """A module presented over the base ring: base^dim / span(rel)."""

    base: Ring
    be: object
    dim: int
    rel: np.ndarray

    @classmethod
    def of(cls, M: FpModule) -> "FlatModule":
        base = M.ring.base_ring()
        be = backend_for(base)
        rel = be.asarray(M.flat_relations()) if M.relations.rows else be.zeros(0, M.flat_dim)
        return cls(base, be, M.flat_dim, rel)

    def action(self, M: FpModule, x) -> np.ndarray:
        return self.be.asarray(Matrix.scalar(M.ring, _elem(M.ring, x), M.generators).flat())

    def whole(self) -> Subquotient:
        return Subquotient(self.be, self.dim, self.be.eye(self.dim), self.rel)


def _power(be, A, k: int):
    out = be.eye(A.shape[0])
    for _ in range(k):
        out = be.matmul(out, A)
    return out


def _solve_rows(be, stacked, rhs, m: int):
    sols = be.solve(stacked, rhs)
    if any(s is None for s in sols):
        raise ArithmeticError("linear system without solution")
    if not sols:
        return be.zeros(0, m)
    return np.array([s[:m] for s in sols], dtype=stacked.dtype).reshape(len(sols), m)


# localization ---------------------------------------------------------------------

@dataclass
class LocalizationData:
    """M_x realized as the stable image T = x^k M.

    module presents T over the base ring on the generators sub.K; iota is
    the row-convention matrix M -> T in those coordinates, x_action and
    x_inverse act on T.
    """

    module: FpModule
    iota: Matrix
    x_action: Matrix
    x_inverse: Matrix
    stabilization_exponent: int
    sub: Subquotient

    @property
    def cardinality(self) -> int:
        return self.sub.cardinality

    def check(self) -> bool:
        be = self.sub.be
        m = self.sub.m
        if m == 0:
            return True
        L = self.sub.L
        prod = be.matmul(be.asarray(self.x_action.data), be.asarray(self.x_inverse.data))
        return bool(be.in_span(L, be.add(prod, be.neg(be.eye(m)))))


def _localize(flat: FlatModule, X: np.ndarray, k: int) -> LocalizationData:
    be, base, D = flat.be, flat.base, flat.dim
    Xk = _power(be, X, k) if D else be.zeros(0, 0)
    T = Subquotient(be, D, Xk, flat.rel)
    m = T.m
    if m == 0:
        zero = Matrix.zeros(base, 0, 0)
        return LocalizationData(FpModule(base, 0), Matrix.zeros(base, D, 0), zero, zero, k, T)
    A = T.operator(X)
    Ak = T.operator(Xk)
    L = T.L
    stack_k = np.concatenate([Ak, L], axis=0) if L.shape[0] else Ak
    iota = _solve_rows(be, stack_k, T.coords(Xk), m)
    stack_1 = np.concatenate([A, L], axis=0) if L.shape[0] else A
    inv = _solve_rows(be, stack_1, be.eye(m), m)
    module = FpModule(base, m, as_matrix(base, L) if L.shape[0] else None, check=False)
    return LocalizationData(module, as_matrix(base, iota), as_matrix(base, A), as_matrix(base, inv), k, T)


def localize_finite(M: FpModule, x) -> LocalizationData:
    """M_x for a module over a finite ring."""
    _require_finite(M.ring)
    x = _elem(M.ring, x)
    flat = FlatModule.of(M)
    k = fitting_exponent(M, x)
    return _localize(flat, flat.action(M, x), k)


def hom_from_localization(M: FpModule, x) -> tuple[FpModule, Matrix]:
    """Hom_R(R_x, M) as the stable inverse limit of x on M, with evaluation at 1.

    A compatible sequence (m_0, m_1, ...) with x m_(j+1) = m_j lives in the
    part of M on which x is bijective, so phi |-> phi(1) identifies Hom with
    T = x^k M and the evaluation is the inclusion T -> M.
    """
    loc = localize_finite(M, x)
    base = loc.module.ring
    ev = as_matrix(base, loc.sub.K) if loc.sub.m else Matrix.zeros(base, 0, loc.sub.dim)
    return loc.module, ev


def torsion_subquotient(M: FpModule, ctx: SequenceContext) -> Subquotient:
    """Gamma(M) = ker(M -> prod_i M_(x_i)) inside the flattened module."""
    _require_finite(M.ring)
    flat = FlatModule.of(M)
    be = flat.be
    locs = [localize_finite(M, x) for x in ctx.elements]
    if flat.dim == 0:
        return flat.whole()
    cols = [be.asarray(l.iota.data) for l in locs if l.sub.m]
    if not cols:
        return flat.whole()
    big = np.concatenate(cols, axis=1)
    rels = []
    off = 0
    total = big.shape[1]
    for l in locs:
        if not l.sub.m:
            continue
        L = l.sub.L
        if L.shape[0]:
            pad = be.zeros(L.shape[0], total)
            pad[:, off:off + l.sub.m] = L
            rels.append(pad)
        off += l.sub.m
    stacked = np.concatenate([big] + rels, axis=0)
    ker = be.kernel(stacked)
    gens = np.ascontiguousarray(ker[:, :flat.dim]) if ker.shape[0] else be.zeros(0, flat.dim)
    return Subquotient(be, flat.dim, gens, flat.rel)


def annihilator_subquotient(M: FpModule, ctx: SequenceContext, k: int | None = None) -> Subquotient:
    """{m : x_i^k m = 0 for all i}; k defaults to the largest stabilization exponent."""
    _require_finite(M.ring)
    flat = FlatModule.of(M)
    be = flat.be
    if k is None:
        k = max(fitting_exponent(M, x) for x in ctx.elements)
    if flat.dim == 0:
        return flat.whole()
    blocks = []
    for x in ctx.elements:
        A = _power(be, flat.action(M, x), k)
        blocks.append(A)
    big = np.concatenate(blocks, axis=1)
    rels = []
    for i in range(len(blocks)):
        if flat.rel.shape[0]:
            pad = be.zeros(flat.rel.shape[0], big.shape[1])
            pad[:, i * flat.dim:(i + 1) * flat.dim] = flat.rel
            rels.append(pad)
    ker = be.kernel(np.concatenate([big] + rels, axis=0))
    gens = np.ascontiguousarray(ker[:, :flat.dim]) if ker.shape[0] else be.zeros(0, flat.dim)
    return Subquotient(be, flat.dim, gens, flat.rel)


def torsion_submodule(M: FpModule, ctx: SequenceContext) -> FpModule:
    """Gamma_a(M) presented over the base ring."""
    sq = torsion_subquotient(M, ctx)
    base = M.ring.base_ring()
    return FpModule(base, sq.m, as_matrix(base, sq.L) if sq.L.shape[0] else None, check=False)


# the Čech complex --------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cochain_signs(r: int) -> dict:
    """Sign of the block from label J to label J + {j} in the Koszul cochain.

    Read off the cochain complex of the integers on (2, 3, 5, 7) where each
    block is +-x_j.
    """
    Z = Integers()
    primes = (2, 3, 5, 7)[:r]
    K = koszul_cochain(SequenceContext(Z, primes), check=False)
    out = {}
    for n in range(K.lo + 1, K.hi + 1):
        src, tgt = K.labels[n], K.labels[n - 1]
        d = K.d(n)
        for a, I in enumerate(src):
            for b, J in enumerate(tgt):
                v = int(d[a, b].payload)
                if v:
                    (j,) = tuple(J - I)
                    out[(I, J)] = v // primes[j]
    return out


@dataclass
class CechComplex:
    """The Čech complex with the localizations behind each summand."""

    ctx: SequenceContext
    module: FpModule
    complex: ChainComplex
    localizations: dict = field(default_factory=dict)

    def natural_map(self, n: int, source: ChainComplex | None = None) -> ChainMap:
        """K^.(x^n; M) -> Č, m at label J |-> x_J^-n iota_J(m), over the base ring."""
        K = source if source is not None else koszul_cochain(self.ctx, self.module, n, check=False)
        flat = FlatModule.of(self.module)
        base, be, D = flat.base, flat.be, flat.dim
        C = self.complex
        comps = {}
        for deg in C.degrees():
            src, tgt = K.labels.get(deg, []), C.labels.get(deg, [])
            grid = []
            for I in src:
                row = []
                for J in tgt:
                    if I != J:
                        row.append(None)
                        continue
                    loc = self.localizations[J]
                    if loc.sub.m == 0:
                        row.append(None)
                        continue
                    inv = _power(be, be.asarray(loc.x_inverse.data), n)
                    row.append(as_matrix(base, be.matmul(be.asarray(loc.iota.data), inv)))
                grid.append(row)
            sizes = [self.localizations[J].sub.m for J in tgt]
            comps[deg] = block_matrix(base, grid, [D] * len(src), sizes)
        src_flat = flatten_labelled(K)
        return ChainMap(src_flat, C, comps)


    def _inverse_on(self, J, i):
        """Inverse of x_i on the localization at the product over J (i in J)."""
        key = (J, i)
        cache = self.__dict__.setdefault("_inv_cache", {})
        if key not in cache:
            loc = self.localizations[J]
            flat = FlatModule.of(self.module)
            be = flat.be
            A = loc.sub.operator(flat.action(self.module, self.ctx.elements[i]))
            L = loc.sub.L
            stacked = np.concatenate([A, L], axis=0) if L.shape[0] else A
            cache[key] = _solve_rows(be, stacked, be.eye(loc.sub.m), loc.sub.m)
        return cache[key]

    def window_map(self, n: int, source: ChainComplex | None = None) -> ChainMap:
        """K^.(x - U; Q_n(M)) -> Č.

        On label J the basis element U^-a m goes to
        prod_(i in J) x_i^-(a_i + 1) iota_J(m) when a_i = 0 for every i outside
        J, and to 0 otherwise.
        """
        from .adic import koszul_xu_cochain, monomials
        K = source if source is not None else koszul_xu_cochain(self.ctx, self.module, n, check=False)
        flat = FlatModule.of(self.module)
        base, be, D = flat.base, flat.be, flat.dim
        C = self.complex
        r = self.ctx.r
        monos = monomials(r, n)
        comps = {}
        for deg in C.degrees():
            src, tgt = K.labels.get(deg, []), C.labels.get(deg, [])
            grid = []
            for I in src:
                row = []
                for J in tgt:
                    loc = self.localizations[J]
                    if I != J or loc.sub.m == 0:
                        row.append(None)
                        continue
                    invs = {i: self._inverse_on(J, i) for i in J}
                    iota = be.asarray(loc.iota.data)
                    blocks = []
                    for a in monos:
                        if any(a[i] for i in range(r) if i not in J):
                            blocks.append(be.zeros(D, loc.sub.m))
                            continue
                        B = iota
                        for i in sorted(J):
                            B = be.matmul(B, _power(be, invs[i], a[i] + 1))
                        blocks.append(B)
                    row.append(as_matrix(base, np.concatenate(blocks, axis=0)))
                grid.append(row)
            sizes = [self.localizations[J].sub.m for J in tgt]
            comps[deg] = block_matrix(base, grid, [len(monos) * D] * len(src), sizes)
        return ChainMap(flatten_labelled(K), C, comps, check=False)

    def resolution_map(self, n: int, source: ChainComplex | None = None) -> ChainMap:
        """L_n(M) -> Č for one element: f |-> f(0) and U^b m |-> x^-b iota(m)."""
        from .adic import resolution_L
        if self.ctx.r != 1:
            raise ValueError("the L resolution map is defined for one element")
        x = self.ctx.elements[0]
        L = source if source is not None else resolution_L(x, self.module, n)
        flat = FlatModule.of(self.module)
        base, be, D = flat.base, flat.be, flat.dim
        C = self.complex
        (J1,) = [J for J in C.labels[-1]]
        loc0, loc1 = self.localizations[frozenset()], self.localizations[J1]
        top = [be.asarray(loc0.iota.data) if a == 0 else be.zeros(D, loc0.sub.m) for a in range(n)]
        comps = {0: as_matrix(base, np.concatenate(top, axis=0))}
        if loc1.sub.m:
            inv = self._inverse_on(J1, 0)
            iota = be.asarray(loc1.iota.data)
            comps[-1] = as_matrix(base, np.concatenate([be.matmul(iota, _power(be, inv, b))
                                                        for b in range(1, n + 1)], axis=0))
        return ChainMap(flatten_labelled(L), C, comps, check=False)


def flatten_labelled(K: ChainComplex) -> ChainComplex:
    """K over the base ring, keeping its labels."""
    base = K.ring.base_ring()
    terms = [FpModule(base, K.flat_dim(d), as_matrix(base, K.flat_rel(d)) if K.flat_rel(d).shape[0] else None,
                      check=False) for d in K.degrees()]
    diffs = [as_matrix(base, K.flat_d(d)) for d in range(K.lo + 1, K.hi + 1)]
    return ChainComplex(base, K.lo, terms, diffs, None, K.cohomological, K.labels, check=False)


def cech_complex_finite(ctx: SequenceContext, M: FpModule | None = None) -> CechComplex:
    """0 -> M -> sum M_(x_i) -> ... -> M_(x_1...x_r) -> 0.

    Stored like the Koszul cochain: homological degrees -r..0 with the same
    label order, so degree -p holds the localizations at products of p
    elements.
    """
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    _require_finite(ctx.ring)
    if ctx.r > 3:
        raise TooLarge(f"sequence length {ctx.r} exceeds the limit of 3")
    limit = max_term_size()
    flat = FlatModule.of(M)
    be, base = flat.be, flat.base
    skeleton = koszul_cochain(ctx, FpModule.free(ctx.ring, 1), check=False)
    locs = {}
    for deg in skeleton.degrees():
        for J in skeleton.labels[deg]:
            xJ = ctx.ring.one()
            for i in J:
                xJ = xJ * ctx.elements[i]
            k = fitting_exponent(M, xJ)
            loc = _localize(flat, flat.action(M, xJ), k)
            if loc.cardinality > limit:
                raise TooLarge(f"localization at {sorted(J)} has {loc.cardinality} elements "
                               f"(limit {limit}, set KOSZUL_MAX_TERM_SIZE)")
            locs[J] = loc
    signs = _cochain_signs(ctx.r)
    terms = []
    for deg in skeleton.degrees():
        labs = skeleton.labels[deg]
        terms.append(_sum_presentation(base, [locs[J] for J in labs]))
    diffs = []
    for deg in range(skeleton.lo + 1, skeleton.hi + 1):
        src, tgt = skeleton.labels[deg], skeleton.labels[deg - 1]
        grid = []
        for I in src:
            row = []
            for J in tgt:
                s = signs.get((I, J))
                if s is None or locs[I].sub.m == 0 or locs[J].sub.m == 0:
                    row.append(None)
                    continue
                blk = be.matmul(locs[I].sub.K, be.asarray(locs[J].iota.data))
                row.append(as_matrix(base, blk if s == 1 else be.neg(blk)))
            grid.append(row)
        diffs.append(block_matrix(base, grid, [locs[I].sub.m for I in src], [locs[J].sub.m for J in tgt]))
    C = ChainComplex(base, skeleton.lo, terms, diffs, None, True, skeleton.labels)
    return CechComplex(ctx, M, C, locs)


def _sum_presentation(base: Ring, locs: list[LocalizationData]) -> FpModule:
    sizes = [l.sub.m for l in locs]
    total = sum(sizes)
    rows = []
    off = 0
    for l in locs:
        L = l.sub.L
        for r in range(L.shape[0]):
            row = [0] * total
            for c in range(l.sub.m):
                row[off + c] = int(L[r, c])
            rows.append(row)
        off += l.sub.m
    rel = Matrix.from_rows(base, rows, total) if rows else None
    return FpModule(base, total, rel, check=False)


def cech_cohomology_oracle(ctx: SequenceContext, M: FpModule | None = None) -> dict[int, ModuleClassification]:
    """Cohomology of the materialized Čech complex, keyed by degree 0..r."""
    return cech_complex_finite(ctx, M).complex.cohomology()


def gamma(M: FpModule, ctx: SequenceContext) -> ModuleClassification:
    return torsion_subquotient(M, ctx).classification


# Koszul-side computations ---------------------------------------------------------------

def local_cohomology_koszul(ctx: SequenceContext, M: FpModule | None = None, n_max: int = 6) -> LimitsResult:
    """Colimit of H^i(x - U; inverse-polynomial window n) over n <= n_max."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return limits(xu_systems(ctx, M, n_max, "cochain"))


@dataclass(frozen=True)
class VerifiedUpTo:
    witnesses: dict

    def to_json(self) -> dict:
        return {"kind": "VerifiedUpTo", "witnesses": {str(k): v for k, v in sorted(self.witnesses.items())}}


@dataclass(frozen=True)
class Inconclusive:
    n_max: int
    m_max: int
    missing: tuple

    def to_json(self) -> dict:
        return {"kind": "Inconclusive", "nMax": self.n_max, "mMax": self.m_max, "missing": list(self.missing)}


@dataclass
class ProZeroVerdict:
    """Per homological degree i > 0: a zero-transition witness m(n) for every n, or not."""

    per_index: dict

    @property
    def verified(self) -> bool:
        return all(isinstance(v, VerifiedUpTo) for v in self.per_index.values())

    def to_json(self) -> dict:
        return {"verified": self.verified,
                "perIndex": {str(i): v.to_json() for i, v in sorted(self.per_index.items())}}


def proregular_check(ctx: SequenceContext, M: FpModule | None = None, n_max: int = 3,
                     m_max: int | None = None) -> ProZeroVerdict:
    """Search for zero transitions H_i(x^m; M) -> H_i(x^n; M), m <= m_max.

    Finite evidence can confirm the pro-zero condition up to n_max but can
    never refute it, so the verdict is VerifiedUpTo or Inconclusive.
    """
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    m_max = m_max if m_max is not None else n_max + 4
    if m_max < n_max:
        raise ValueError("need m_max >= n_max")
    chains = {}

    def chain(n):
        if n not in chains:
            chains[n] = koszul_chain(ctx, M, n, check=False)
        return chains[n]

    eye = Matrix.identity(ctx.ring, M.generators)

    def trans(m, n):
        diff = [x ** (m - n) for x in ctx.elements]

        def blk(_, I, J):
            if I != J:
                return None
            c = ctx.ring.one()
            for i in I:
                c = c * diff[i]
            return eye.scale(c)
        return label_map(chain(m), chain(n), blk, check=False)

    out = {}
    for i in range(1, ctx.r + 1):
        wit, missing = {}, []
        for n in range(1, n_max + 1):
            found = None
            for m in range(n, m_max + 1):
                if trans(m, n).induced(i).is_zero():
                    found = m
                    break
            if found is None:
                missing.append(n)
            else:
                wit[n] = found
        out[i] = VerifiedUpTo(wit) if not missing else Inconclusive(n_max, m_max, tuple(missing))
    return ProZeroVerdict(out)


def derived_completion_koszul(ctx: SequenceContext, M: FpModule | None = None, n_max: int = 6,
                              m_max: int | None = None) -> LimitsResult:
    """lim / lim1 of H_i(x - U; M[U]/U^n), identified as completion only when pro-regular.

    The result carries the pro-regularity verdict; when it is not verified
    the values are labelled as homology of the truncated model only.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    res = limits(xu_systems(ctx, M, n_max, "chain"))
    verdict = proregular_check(ctx, M, min(n_max, 3), m_max if m_max is not None else min(n_max, 3) + 4)
    res.proregular = verdict
    res.identification = "derived completion" if verdict.verified else "H of avatar, unidentified"
    return res


def koszul_cohomology_colimit(ctx: SequenceContext, M: FpModule | None = None, n_max: int = 6) -> LimitsResult:
    """Colimit of H^i(x^n; M), the classical Koszul description."""
    return limits(koszul_systems(ctx, M, n_max, "cochain"))
