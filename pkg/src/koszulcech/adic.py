"""Truncated polynomial and inverse-polynomial coefficients, the (x - U) Koszul
complexes built on them, directed systems in the truncation index, and their
limits.

Index conventions.  A truncated module P_n(M) = M[U_1..U_r]/(U_i^n) has
generator index mono * g + s, where mono enumerates exponent vectors
(a_1, ..., a_r) with a_1 most significant and s runs over the generators of
M.  The inverse-polynomial window Q_n(M) uses the same index for the basis
element U_1^-a_1 ... U_r^-a_r times generator s.  On P_n the variable U_i
raises a_i (killing at a_i = n - 1); on Q_n it lowers a_i (killing at 0).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .complexes import ChainComplex, ChainMap, cone, direct_sum_complexes, fibre
from .koszul import (SequenceContext, koszul_chain, koszul_cochain, koszul_from_operators,
                     koszul_transition, label_map)
from .linalg import FpModule, Matrix, ModuleClassification, backend_for, block_matrix
from .rings import FiniteAlgebra, Ring, RingElem


# coefficient modules -----------------------------------------------------------

def _raise_matrix(ring: Ring, n: int) -> Matrix:
    """Row-convention U on R[U]/U^n: e_a -> e_(a+1)."""
    S = Matrix.zeros(ring, n, n)
    one = ring.one().payload
    for a in range(n - 1):
        ring.mat_set(S.data, a, a + 1, one)
    return S


def _in_variable(ring: Ring, r: int, i: int, n: int, A: Matrix) -> Matrix:
    """I (x) ... (x) A (x) ... (x) I with A in tensor position i of r."""
    out = Matrix.identity(ring, 1)
    for j in range(r):
        out = out.kron(A if j == i else Matrix.identity(ring, n))
    return out


def _with_module(M: FpModule, r: int, n: int, row_ops: list[Matrix]) -> FpModule:
    ring, g = M.ring, M.generators
    size = n ** r
    eye_g = Matrix.identity(ring, g)
    ops = {f"U{i + 1}": op.kron(eye_g).T for i, op in enumerate(row_ops)}
    rel = Matrix.identity(ring, size).kron(M.relations) if M.relations.rows else None
    return FpModule(ring, size * g, rel, ops, check=False)


def trunc_poly_module(M: FpModule, r: int, n: int) -> FpModule:
    """M[U]/(U_1^n, ..., U_r^n) with the U_i as column-convention operators."""
    if n < 1:
        raise ValueError("truncation exponent must be at least 1")
    S = _raise_matrix(M.ring, n)
    return _with_module(M, r, n, [_in_variable(M.ring, r, i, n, S) for i in range(r)])


def inverse_poly_module(M: FpModule, r: int, n: int) -> FpModule:
    """Window U^0 .. U^-(n-1) of the inverse polynomials, U_i lowering a_i."""
    if n < 1:
        raise ValueError("truncation exponent must be at least 1")
    S = _raise_matrix(M.ring, n).T
    return _with_module(M, r, n, [_in_variable(M.ring, r, i, n, S) for i in range(r)])


def u_row(P: FpModule, i: int) -> Matrix:
    """Row-convention matrix of U_(i+1) on a truncated module."""
    return P.operators[f"U{i + 1}"].T


def variable_count(P: FpModule) -> int:
    return sum(1 for k in P.operators if k.startswith("U"))


def xu_operators(ctx: SequenceContext, P: FpModule) -> list[Matrix]:
    g = P.generators
    return [Matrix.scalar(ctx.ring, x, g) - u_row(P, i) for i, x in enumerate(ctx.elements)]


def koszul_xu(ctx: SequenceContext, M: FpModule | None, n: int, window: str = "poly",
              cochain: bool = False, check: bool = True) -> ChainComplex:
    """Koszul complex of the operators x_i - U_i on P_n(M) or Q_n(M)."""
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    build = trunc_poly_module if window == "poly" else inverse_poly_module
    P = build(M, ctx.r, n)
    return koszul_from_operators(P, xu_operators(ctx, P), cochain, P, check)


def koszul_xu_chain(ctx: SequenceContext, M: FpModule | None, n: int, check: bool = True) -> ChainComplex:
    """K_.(x - U; M[U]/U^(n))."""
    return koszul_xu(ctx, M, n, "poly", False, check)


def koszul_xu_cochain(ctx: SequenceContext, M: FpModule | None, n: int, check: bool = True) -> ChainComplex:
    """K^.(x - U; inverse-polynomial window of M)."""
    return koszul_xu(ctx, M, n, "inverse", True, check)


# duality pairing ---------------------------------------------------------------

@dataclass
class DualPairing:
    """Hom_R(Q_n(R), M) -> P_n(M) with the U-actions on both sides."""

    hom: FpModule
    poly: FpModule
    phi: Matrix
    hom_ops: list[Matrix]
    poly_ops: list[Matrix]

    def intertwines(self) -> bool:
        return all(self.phi @ b == a @ self.phi for a, b in zip(self.hom_ops, self.poly_ops))


def dual0_pairing(M: FpModule, r: int, n: int) -> DualPairing:
    """f |-> sum_a f(U^-a) U^a on the truncated window.

    Hom_R(Q_n(R), M) is stored as maps flattened row by row, so coordinate
    a * g + s is the s-th coordinate of f(U^-a).  U acts by precomposition.
    """
    ring, g = M.ring, M.generators
    Q = inverse_poly_module(FpModule.free(ring, 1), r, n)
    P = trunc_poly_module(M, r, n)
    size = n ** r
    rel = Matrix.identity(ring, size).kron(M.relations) if M.relations.rows else None
    eye_g = Matrix.identity(ring, g)
    hom_ops = [u_row(Q, i).T.kron(eye_g) for i in range(r)]
    hom = FpModule(ring, size * g, rel, {f"U{i + 1}": op.T for i, op in enumerate(hom_ops)}, check=False)
    phi = Matrix.identity(ring, size * g)
    return DualPairing(hom, P, phi, hom_ops, [u_row(P, i) for i in range(r)])


# explicit comparison maps ----------------------------------------------------------

def _column(ring: Ring, values) -> Matrix:
    return Matrix.from_rows(ring, [[v] for v in values], 1)


def _tensor_columns(ring: Ring, cols: list[Matrix], g: int) -> Matrix:
    out = Matrix.identity(ring, 1)
    for c in cols:
        out = out.kron(c)
    return out.kron(Matrix.identity(ring, g))


def _evaluation(x: RingElem, n: int) -> list:
    return [x ** a for a in range(n)]


def _top(ring: Ring, n: int) -> list:
    return [ring.one() if a == n - 1 else ring.zero() for a in range(n)]


def _bottom(ring: Ring, n: int) -> list:
    return [ring.one() if a == 0 else ring.zero() for a in range(n)]


def xu_chain_comparison(ctx: SequenceContext, M: FpModule | None, n: int,
                        source: ChainComplex | None = None, target: ChainComplex | None = None,
                        check: bool = True) -> ChainMap:
    """K_.(x - U; P_n(M)) -> K_.(x^n; M).

    On label I the block is, variable by variable, the top coefficient of
    U_i^(n-1) for i in I and evaluation U_i -> x_i otherwise.  It is a chain
    map because ev((x - U) p) = x^n top(p).
    """
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    ring = ctx.ring
    src = source if source is not None else koszul_xu_chain(ctx, M, n)
    tgt = target if target is not None else koszul_chain(ctx, M, n)
    cache = {}

    def blk(_, I, J):
        if I != J:
            return None
        if I not in cache:
            cols = [_column(ring, _top(ring, n) if i in I else _evaluation(x, n))
                    for i, x in enumerate(ctx.elements)]
            cache[I] = _tensor_columns(ring, cols, M.generators)
        return cache[I]

    return label_map(src, tgt, blk, check)


def xu_cochain_comparison(ctx: SequenceContext, M: FpModule | None, n: int,
                          source: ChainComplex | None = None, target: ChainComplex | None = None,
                          check: bool = True) -> ChainMap:
    """K^.(x - U; Q_n(M)) -> K^.(x^n; M).

    On label J: U_i^-a -> x_i^(n-1-a) for i in J, and U_i^-a -> [a = 0]
    otherwise.
    """
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    ring = ctx.ring
    src = source if source is not None else koszul_xu_cochain(ctx, M, n)
    tgt = target if target is not None else koszul_cochain(ctx, M, n)
    cache = {}

    def blk(_, I, J):
        if I != J:
            return None
        if I not in cache:
            cols = [_column(ring, list(reversed(_evaluation(x, n))) if i in I else _bottom(ring, n))
                    for i, x in enumerate(ctx.elements)]
            cache[I] = _tensor_columns(ring, cols, M.generators)
        return cache[I]

    return label_map(src, tgt, blk, check)


def _per_label(X: ChainComplex, Y: ChainComplex, block: Matrix, check: bool) -> ChainMap:
    return label_map(X, Y, lambda _, I, J: block if I == J else None, check)


def truncation_matrix(ring: Ring, r: int, m: int, n: int, g: int) -> Matrix:
    """P_m -> P_n (m >= n): keep monomials with every exponent below n."""
    q = Matrix.zeros(ring, m, n)
    one = ring.one().payload
    for a in range(n):
        ring.mat_set(q.data, a, a, one)
    out = Matrix.identity(ring, 1)
    for _ in range(r):
        out = out.kron(q)
    return out.kron(Matrix.identity(ring, g))


def window_inclusion(ring: Ring, r: int, n: int, m: int, g: int) -> Matrix:
    """Q_n -> Q_m (n <= m), U^-a -> U^-a."""
    return truncation_matrix(ring, r, m, n, g).T


def window_reversal(ring: Ring, n: int) -> Matrix:
    """U^-a <-> U^(n-1-a): identifies the r = 1 window with R[U]/U^n."""
    J = Matrix.zeros(ring, n, n)
    one = ring.one().payload
    for a in range(n):
        ring.mat_set(J.data, a, n - 1 - a, one)
    return J


# directed systems ----------------------------------------------------------------

@dataclass
class DirectedSystem:
    """Stages n = 1..n_max with transitions between any two stages.

    orientation "inverse": transition(a, b) maps stage b to stage a (a <= b);
    "direct": it maps stage a to stage b.  lag, when set, is an exponent k
    such that the image of stage 2k in stage k (inverse) or of stage k in
    stage 2k (direct) is the limit; lag_certificate says why.
    """

    orientation: str
    n_max: int
    build_stage: Callable[[int], ChainComplex]
    build_transition: Callable[[int, int, ChainComplex, ChainComplex], ChainMap]
    lag: int | None = None
    lag_certificate: str = ""
    description: str = ""
    _stages: dict = field(default_factory=dict, repr=False)
    _transitions: dict = field(default_factory=dict, repr=False)

    def stage(self, n: int) -> ChainComplex:
        if n not in self._stages:
            self._stages[n] = self.build_stage(n)
        return self._stages[n]

    def transition(self, a: int, b: int) -> ChainMap:
        if a > b:
            raise ValueError("transition(a, b) needs a <= b")
        key = (a, b)
        if key not in self._transitions:
            sa, sb = self.stage(a), self.stage(b)
            self._transitions[key] = self.build_transition(a, b, sa, sb)
        return self._transitions[key]

    @property
    def stages(self) -> list[ChainComplex]:
        return [self.stage(n) for n in range(1, self.n_max + 1)]

    @property
    def transitions(self) -> list[ChainMap]:
        return [self.transition(n, n + 1) for n in range(1, self.n_max)]

    def degrees(self) -> range:
        return self.stage(1).degrees()


def _finite_base(ring: Ring) -> int | None:
    be = backend_for(ring.base_ring() if isinstance(ring, FiniteAlgebra) else ring)
    return be.n if be.finite else None


def _image_size(M: FpModule, op: Matrix) -> int:
    """|op(M)| for a row-convention endomorphism of a module over a finite ring."""
    be = backend_for(M.ring.base_ring() if isinstance(M.ring, FiniteAlgebra) else M.ring)
    rel = M.flat_relations() if M.relations.rows else be.zeros(0, M.flat_dim)
    rel = be.asarray(rel)
    img = be.asarray(op.flat())
    both = np.concatenate([img, rel], axis=0) if rel.shape[0] else img
    return be.span_size(both) // (be.span_size(rel) if rel.shape[0] else 1)


def fitting_exponent(M: FpModule, x) -> int | None:
    """Smallest k with x^k M = x^(k+1) M (None over infinite rings)."""
    if _finite_base(M.ring) is None:
        return None
    xe = x if isinstance(x, RingElem) else M.ring(x)
    k = 0
    X = Matrix.scalar(M.ring, xe, M.generators)
    power = Matrix.identity(M.ring, M.generators)
    size = _image_size(M, power)
    while True:
        power = power @ X
        nxt = _image_size(M, power)
        if nxt == size:
            return k
        size, k = nxt, k + 1


def sequence_lag(ctx: SequenceContext, M: FpModule) -> tuple[int | None, str]:
    exps = [fitting_exponent(M, x) for x in ctx.elements]
    if any(e is None for e in exps):
        return None, ""
    k = max(max(exps), 1)
    cert = (f"Fitting exponents {exps} of the sequence on M; every stage splits into an "
            f"x-invertible part with zero homology and a part killed by x_i^{k}")
    return k, cert


def xu_systems(ctx: SequenceContext, M: FpModule | None, n_max: int, variant: str = "chain",
               check: bool = False) -> DirectedSystem:
    """Stages of the (x - U) Koszul complexes.

    chain: inverse system of K_.(x - U; P_n(M)) with truncation maps.
    cochain: direct system of K^.(x - U; Q_n(M)) with window inclusions,
    which under U^-a <-> U^(n-1-a) is multiplication by prod U_i^(m-n).
    """
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    ring, r, g = ctx.ring, ctx.r, M.generators
    lag, cert = sequence_lag(ctx, M)
    if variant == "chain":
        def build(n):
            return koszul_xu_chain(ctx, M, n, check)

        def trans(a, b, sa, sb):
            return _per_label(sb, sa, truncation_matrix(ring, r, b, a, g), check)

        return DirectedSystem("inverse", n_max, build, trans, lag, cert,
                              f"H_i(x - U; M[U]/U^(n)) for x = {ctx}")
    if variant == "cochain":
        def build(n):
            return koszul_xu_cochain(ctx, M, n, check)

        def trans(a, b, sa, sb):
            return _per_label(sa, sb, window_inclusion(ring, r, a, b, g), check)

        return DirectedSystem("direct", n_max, build, trans, lag, cert,
                              f"H^i(x - U; M[U^-1] window n) for x = {ctx}")
    raise ValueError(f"unknown variant {variant!r}")


def xu_dual_system(ctx: SequenceContext, D: FpModule, n_max: int, check: bool = False) -> DirectedSystem:
    """Inverse system K^.(x - U; P_n(D)) with truncation maps (Ext side of duality)."""
    ring, r, g = ctx.ring, ctx.r, D.generators
    lag, cert = sequence_lag(ctx, D)

    def build(n):
        return koszul_xu(ctx, D, n, "poly", True, check)

    def trans(a, b, sa, sb):
        return _per_label(sb, sa, truncation_matrix(ring, r, b, a, g), check)

    return DirectedSystem("inverse", n_max, build, trans, lag, cert,
                          f"H^i(x - U; D[U]/U^(n)) for x = {ctx}")


def koszul_systems(ctx: SequenceContext, M: FpModule | None, n_max: int, variant: str = "chain") -> DirectedSystem:
    """{K_.(x^n; M)} (inverse) or {K^.(x^n; M)} (direct) with the usual transitions."""
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    lag, cert = sequence_lag(ctx, M)
    if variant == "chain":
        return DirectedSystem("inverse", n_max, lambda n: koszul_chain(ctx, M, n),
                              lambda a, b, sa, sb: koszul_transition(ctx, M, b, a, "chain"),
                              lag, cert, f"H_i(x^n; M) for x = {ctx}")
    if variant == "cochain":
        return DirectedSystem("direct", n_max, lambda n: koszul_cochain(ctx, M, n),
                              lambda a, b, sa, sb: koszul_transition(ctx, M, b, a, "cochain"),
                              lag, cert, f"H^i(x^n; M) for x = {ctx}")
    raise ValueError(f"unknown variant {variant!r}")


def u_power_system(ring: Ring, N: int, n_max: int) -> DirectedSystem:
    """Direct system {K^.(U^n; R[U]/U^N)} with the multiplication-by-U transitions.

    Its colimit is the inverse-polynomial module of R[U]/U^N, and H^1 at
    stage n is R[U]/(U^min(n, N)).
    """
    P = trunc_poly_module(FpModule.free(ring, 1), 1, N)
    U = u_row(P, 0)

    def build(n):
        return koszul_from_operators(P, [U.power(n)], True, P, check=False)

    def trans(a, b, sa, sb):
        step = U.power(b - a)
        return label_map(sa, sb, lambda _, I, J: (step if I else Matrix.identity(ring, N)) if I == J else None,
                         check=False)

    return DirectedSystem("direct", n_max, build, trans, None, "", f"H^i(U^n; R[U]/U^{N})")


# limits --------------------------------------------------------------------------

@dataclass(frozen=True)
class Stabilized:
    value: ModuleClassification
    stage: int
    certificate: str

    def to_json(self) -> dict:
        return {"kind": "Stabilized", "value": self.value.to_json(), "stage": self.stage,
                "certificate": self.certificate}


@dataclass(frozen=True)
class ProObject:
    """Stage data of a system that did not stabilize within the computed range."""

    stages: tuple[ModuleClassification, ...]
    transitions: tuple[str, ...]

    def to_json(self) -> dict:
        return {"kind": "ProObject", "stages": [s.to_json() for s in self.stages],
                "transitions": list(self.transitions)}


@dataclass
class LimitsResult:
    """Per display degree: Stabilized or ProObject; lim1 only for inverse systems."""

    orientation: str
    cohomological: bool
    values: dict[int, Stabilized | ProObject]
    lim1: dict[int, ModuleClassification | None]
    lim1_reason: dict[int, str]
    identification: str = ""
    proregular: object = None

    @property
    def stabilized(self) -> bool:
        return all(isinstance(v, Stabilized) for v in self.values.values())

    def value(self, degree: int) -> ModuleClassification | None:
        v = self.values.get(degree)
        return v.value if isinstance(v, Stabilized) else None

    def to_json(self) -> dict:
        out = {"orientation": self.orientation, "cohomological": self.cohomological,
               "degrees": {str(k): self.values[k].to_json() for k in sorted(self.values)}}
        if self.orientation == "inverse":
            out["lim1"] = {str(k): (self.lim1[k].to_json() if self.lim1[k] is not None else None)
                           for k in sorted(self.lim1)}
            out["lim1Reason"] = {str(k): self.lim1_reason[k] for k in sorted(self.lim1_reason)}
        if self.identification:
            out["identification"] = self.identification
        if self.proregular is not None:
            out["proregular"] = self.proregular.to_json()
        return out


def _summary(f) -> str:
    inj, surj = f.is_injective(), f.is_surjective()
    if inj and surj:
        return "iso"
    if f.is_zero():
        return "zero"
    if inj:
        return "injective"
    if surj:
        return "surjective"
    return "neither"


def _zero_class(ring: Ring) -> ModuleClassification:
    from .linalg import classify_module
    return classify_module(FpModule(ring, 0))


def stable_image(sys: DirectedSystem, degree: int, k: int):
    """Image of H(stage 2k) -> H(stage k) (inverse) or H(stage k) -> H(stage 2k) (direct)."""
    t = sys.transition(k, 2 * k)
    return t.induced(degree).image()


def limits(sys: DirectedSystem, window: int = 2) -> LimitsResult:
    """lim / colim per degree, with lim1 for inverse systems.

    With a certified lag k and 2k <= n_max, the limit is the stable image
    between stages k and 2k.  Otherwise the system is declared Stabilized
    only if the last `window` consecutive transitions are isomorphisms;
    anything else is reported as a ProObject carrying all stage data.
    """
    first = sys.stage(1)
    cohom = first.cohomological
    values: dict = {}
    lim1: dict = {}
    reasons: dict = {}
    finite = _finite_base(first.ring) is not None
    if sys.lag is not None and 2 * sys.lag <= sys.n_max:
        k = sys.lag
        for d in first.degrees():
            img = stable_image(sys, d, k)
            kind = "lim" if sys.orientation == "inverse" else "colim"
            cert = f"{kind} = image of stage {2 * k if kind == 'lim' else k} in stage " \
                   f"{k if kind == 'lim' else 2 * k}; {sys.lag_certificate}"
            key = first.display_degree(d)
            values[key] = Stabilized(img.classification, k, cert)
            if sys.orientation == "inverse":
                lim1[key] = _zero_class(first.ring)
                reasons[key] = "finite stages satisfy Mittag-Leffler"
        return LimitsResult(sys.orientation, cohom, values, lim1, reasons)

    for d in first.degrees():
        key = first.display_degree(d)
        classes = [sys.stage(n).homology(d) for n in range(1, sys.n_max + 1)]
        maps = [sys.transition(n, n + 1).induced(d) for n in range(1, sys.n_max)]
        summaries = [_summary(f) for f in maps]
        start = sys.n_max
        while start > 1 and summaries[start - 2] == "iso":
            start -= 1
        if sys.n_max - start >= window or (sys.n_max == 1 and window == 0):
            values[key] = Stabilized(classes[start - 1], start,
                                     f"transitions from stage {start} to {sys.n_max} are isomorphisms")
        else:
            values[key] = ProObject(tuple(classes), tuple(summaries))
        if sys.orientation == "inverse":
            if isinstance(values[key], Stabilized):
                lim1[key] = _zero_class(first.ring)
                reasons[key] = "eventually isomorphic transitions (Mittag-Leffler)"
            elif all(s in ("iso", "surjective") for s in summaries):
                lim1[key] = _zero_class(first.ring)
                reasons[key] = "surjective transitions (Mittag-Leffler)"
            elif finite:
                lim1[key] = _zero_class(first.ring)
                reasons[key] = "finite stages satisfy Mittag-Leffler"
            else:
                lim1[key] = None
                reasons[key] = "undetermined from finite data"
    return LimitsResult(sys.orientation, cohom, values, lim1, reasons)


# telescope and microscope ----------------------------------------------------------

def _stack_rows(ring: Ring, blocks: list[Matrix], cols: int) -> Matrix:
    if not blocks:
        return Matrix.zeros(ring, 0, cols)
    return Matrix(ring, np.concatenate([b.data for b in blocks], axis=0))


def tel_mic_trunc(sys: DirectedSystem, N: int, variant: str = "telescope"):
    """Truncated telescope (direct systems) or microscope (inverse systems).

    telescope = cone of Phi: sum_{n<N} X_n -> sum_{n<=N} X_n, x_n |-> x_n - t(x_n),
    with comparison Tel -> X_N summing the transitions into stage N.
    microscope = fibre of Psi: prod_{n<=N} X_n -> prod_{n<N} X_n,
    (x_n) |-> (x_n - t(x_{n+1})), with comparison X_N -> Mic.
    """
    if N < 1 or N > sys.n_max:
        raise ValueError(f"need 1 <= N <= n_max, got N = {N}")
    stages = [sys.stage(n) for n in range(1, N + 1)]
    ring = stages[0].ring
    degrees = range(min(s.lo for s in stages), max(s.hi for s in stages) + 1)
    big = direct_sum_complexes(stages)
    small = direct_sum_complexes(stages[:-1]) if N > 1 else None

    def to_N(n, d):
        if n == N:
            return Matrix.identity(ring, sys.stage(N).gens(d))
        t = sys.transition(n, N)
        return t.component(d)

    if variant == "telescope":
        if sys.orientation != "direct":
            raise ValueError("the telescope needs a direct system")
        if small is None:
            comps = {d: Matrix.identity(ring, big.gens(d)) for d in big.degrees()}
            return big, ChainMap(big, sys.stage(N), comps)
        comps = {}
        for d in small.degrees():
            grid = []
            for n in range(1, N):
                row = [None] * N
                row[n - 1] = Matrix.identity(ring, sys.stage(n).gens(d))
                row[n] = -sys.transition(n, n + 1).component(d)
                grid.append(row)
            comps[d] = block_matrix(ring, grid, [s.gens(d) for s in stages[:-1]], [s.gens(d) for s in stages])
        phi = ChainMap(small, big, comps)
        c = cone(phi)
        T = c.complex
        out = {}
        for d in T.degrees():
            psi = _stack_rows(ring, [to_N(n, d) for n in range(1, N + 1)], sys.stage(N).gens(d))
            out[d] = block_matrix(ring, [[None], [psi]], [small.gens(d - 1), big.gens(d)],
                                  [sys.stage(N).gens(d)])
        return T, ChainMap(T, sys.stage(N), out)

    if variant == "microscope":
        if sys.orientation != "inverse":
            raise ValueError("the microscope needs an inverse system")
        if small is None:
            comps = {d: Matrix.identity(ring, big.gens(d)) for d in big.degrees()}
            return big, ChainMap(sys.stage(N), big, comps)
        comps = {}
        for d in big.degrees():
            grid = []
            for n in range(1, N + 1):
                row = [None] * (N - 1)
                if n <= N - 1:
                    row[n - 1] = Matrix.identity(ring, sys.stage(n).gens(d))
                if n >= 2:
                    row[n - 2] = -sys.transition(n - 1, n).component(d)
                grid.append(row)
            comps[d] = block_matrix(ring, grid, [s.gens(d) for s in stages], [s.gens(d) for s in stages[:-1]])
        psi_map = ChainMap(big, small, comps)
        f = fibre(psi_map)
        F = f.complex
        out = {}
        for d in sys.stage(N).degrees():
            psi = Matrix(ring, np.concatenate([to_N_inverse(sys, n, N, d).data for n in range(1, N + 1)],
                                              axis=1))
            out[d] = block_matrix(ring, [[psi, None]], [sys.stage(N).gens(d)],
                                  [big.gens(d), small.gens(d + 1)])
        return F, ChainMap(sys.stage(N), F, out)
    raise ValueError(f"unknown variant {variant!r}")


def to_N_inverse(sys: DirectedSystem, n: int, N: int, d: int) -> Matrix:
    """Component in degree d of the transition stage N -> stage n."""
    if n == N:
        return Matrix.identity(sys.stage(N).ring, sys.stage(N).gens(d))
    return sys.transition(n, N).component(d)


# small helpers shared with cech / verify --------------------------------------------

def monomials(r: int, n: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(n), repeat=r))


# truncated free resolutions of the Čech complex (one element) ------------------------

def _scalar_rows(ring: Ring, rows: int, cols: int, entries: dict) -> Matrix:
    A = Matrix.zeros(ring, rows, cols)
    for (a, b), v in entries.items():
        ring.mat_set(A.data, a, b, ring(v).payload if not isinstance(v, RingElem) else v.payload)
    return A


def _with_coefficient(A: Matrix, M: FpModule) -> Matrix:
    return A.kron(Matrix.identity(M.ring, M.generators))


def _two_term(M: FpModule, top: int, bottom: int, d: Matrix) -> ChainComplex:
    """Cochain complex top -> bottom of copies of M, cohomological degrees 0 and 1."""
    return ChainComplex(M.ring, -1, [M.power(bottom), M.power(top)], [_with_coefficient(d, M)],
                        M, True)


def resolution_L(x: RingElem, M: FpModule, n: int) -> ChainComplex:
    """M[U]_(<n) -> U M[U]_(<=n), r |-> -(r(0) - (1 - xU) r).

    Degree 0 has basis U^0..U^(n-1), degree 1 has U^1..U^n (index b - 1).
    The sign makes the differential agree with the Čech differential -iota.
    """
    ring = M.ring
    entries = {}
    for a in range(n):
        entries[(a, a)] = -x
        if a >= 1:
            entries[(a, a - 1)] = ring.one()
    return _two_term(M, n, n, _scalar_rows(ring, n, n, entries))


def resolution_Lcheck(x: RingElem, M: FpModule, n: int) -> ChainComplex:
    """M U^-1 + M[U]_(<n) -> M[U]_(<=n), (c, f) |-> -(c - (1 - xU) f).

    Degree 0 index: 0 for c, 1 + a for U^a.  Degree 1 index: a for U^a.
    """
    ring = M.ring
    entries = {(0, 0): -ring.one()}
    for a in range(n):
        entries[(1 + a, a)] = ring.one()
        entries[(1 + a, a + 1)] = -x
    return _two_term(M, n + 1, n + 1, _scalar_rows(ring, n + 1, n + 1, entries))


def resolution_E(M: FpModule) -> ChainComplex:
    """M U^-1 -> M, the identity up to the common sign."""
    ring = M.ring
    return _two_term(M, 1, 1, _scalar_rows(ring, 1, 1, {(0, 0): -ring.one()}))


@dataclass
class SplitDiagram:
    """E -> Lcheck -> L with a section s of p."""

    E: ChainComplex
    Lcheck: ChainComplex
    L: ChainComplex
    i: ChainMap
    p: ChainMap
    s: ChainMap


def split_diagram(x: RingElem, M: FpModule, n: int, check: bool = True) -> SplitDiagram:
    ring = M.ring
    E, Lc, L = resolution_E(M), resolution_Lcheck(x, M, n), resolution_L(x, M, n)
    one = ring.one()
    i = ChainMap(E, Lc, {0: _with_coefficient(_scalar_rows(ring, 1, n + 1, {(0, 0): one}), M),
                         -1: _with_coefficient(_scalar_rows(ring, 1, n + 1, {(0, 0): one}), M)}, check)
    p0 = {(1 + a, a): one for a in range(n)}
    p1 = {(b, b - 1): one for b in range(1, n + 1)}
    p = ChainMap(Lc, L, {0: _with_coefficient(_scalar_rows(ring, n + 1, n, p0), M),
                         -1: _with_coefficient(_scalar_rows(ring, n + 1, n, p1), M)}, check)
    s0 = {(a, 1 + a): one for a in range(n)}
    s0[(0, 0)] = one
    s1 = {(b - 1, b): one for b in range(1, n + 1)}
    s = ChainMap(L, Lc, {0: _with_coefficient(_scalar_rows(ring, n, n + 1, s0), M),
                         -1: _with_coefficient(_scalar_rows(ring, n, n + 1, s1), M)}, check)
    return SplitDiagram(E, Lc, L, i, p, s)


def resolution_L_inclusion(x: RingElem, M: FpModule, n: int, m: int,
                           source: ChainComplex | None = None, target: ChainComplex | None = None) -> ChainMap:
    """Window inclusion L_n -> L_m (n <= m)."""
    ring = M.ring
    src = source if source is not None else resolution_L(x, M, n)
    tgt = target if target is not None else resolution_L(x, M, m)
    inc = window_inclusion(ring, 1, n, m, M.generators)
    return ChainMap(src, tgt, {0: inc, -1: inc})
