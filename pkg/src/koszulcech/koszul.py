"""Koszul chain and cochain complexes.

Both are built as iterated cones (chain) or fibres (cochain) of commuting
endomorphisms of a presented module, so the same builder serves scalar
sequences x and the operator sequences x - U used by the adic avatars.
Each term is a direct sum of copies of the module indexed by subsets of
{0..r-1}; the labels dictionary of the complex records that order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .complexes import (ChainComplex, ChainMap, cone, fibre, shift, single_term)
from .linalg import FpModule, Matrix, Subquotient, backend_for, block_diag, block_matrix
from .rings import FiniteAlgebra, Integers, NotInvertible, Ring, RingElem


class BadExponents(ValueError):
    pass


class SequenceMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SequenceContext:
    ring: Ring
    elements: tuple

    def __post_init__(self):
        elems = tuple(e if isinstance(e, RingElem) else self.ring(e) for e in self.elements)
        if not elems:
            raise ValueError("a sequence needs at least one element")
        if any(e.ring != self.ring for e in elems):
            raise ValueError("all sequence elements must live in one ring")
        object.__setattr__(self, "elements", elems)

    @property
    def r(self) -> int:
        return len(self.elements)

    def powered(self, powers) -> tuple:
        exps = exponents(powers, self.r)
        return tuple(x ** k for x, k in zip(self.elements, exps))

    def extend(self, y) -> "SequenceContext":
        return SequenceContext(self.ring, self.elements + (y if isinstance(y, RingElem) else self.ring(y),))

    def __str__(self):
        return "(" + ", ".join(str(e) for e in self.elements) + ")"


def exponents(powers, r: int) -> tuple[int, ...]:
    if isinstance(powers, (int, np.integer)):
        exps = (int(powers),) * r
    else:
        exps = tuple(int(p) for p in powers)
    if len(exps) != r:
        raise BadExponents(f"need {r} exponents, got {len(exps)}")
    if any(e < 0 for e in exps):
        raise BadExponents("exponents must be non-negative")
    return exps


def lex_subsets(r: int, p: int) -> list[frozenset]:
    return [frozenset(c) for c in itertools.combinations(range(r), p)]


def _repeat(op: Matrix, k: int) -> Matrix:
    return block_diag(op.ring, [op] * k) if k != 1 else op


def koszul_from_operators(P: FpModule, ops: Sequence[Matrix], cochain: bool = False,
                          coefficient: FpModule | None = None, check: bool = True) -> ChainComplex:
    """Koszul complex of commuting row-convention endomorphisms of P.

    Chain: K(a_1..a_j) = cone(a_j on K(a_1..a_{j-1})); the summand coming from
    the source copy gets label S + {j}. Cochain: iterated fibres, where the
    target copy (one cohomological degree up) gets the new index.
    """
    ring = P.ring
    K = single_term(P)
    labels = {0: [frozenset()]}
    for j, op in enumerate(ops):
        comps = {n: _repeat(op, len(labels[n])) for n in K.degrees()}
        phi = ChainMap(K, K, comps, check=False)
        if cochain:
            K = fibre(phi).complex
            new = {}
            for n in K.degrees():
                src = labels.get(n, [])
                tgt = labels.get(n + 1, [])
                new[n] = list(src) + [s | {j} for s in tgt]
        else:
            K = cone(phi).complex
            new = {}
            for n in K.degrees():
                src = labels.get(n - 1, [])
                tgt = labels.get(n, [])
                new[n] = [s | {j} for s in src] + list(tgt)
        labels = new
    out = ChainComplex(ring, K.lo, K.terms, K.diffs, coefficient if coefficient is not None else P,
                       cochain, labels, check=check)
    return out


def _scalar_ops(M: FpModule, values) -> list[Matrix]:
    return [Matrix.scalar(M.ring, v, M.generators) for v in values]


def koszul_chain(ctx: SequenceContext, M: FpModule | None = None, powers=1, check: bool = True) -> ChainComplex:
    """K_.(x^(n); M) in homological degrees 0..r."""
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    return koszul_from_operators(M, _scalar_ops(M, ctx.powered(powers)), False, M, check)


def koszul_cochain(ctx: SequenceContext, M: FpModule | None = None, powers=1, check: bool = True) -> ChainComplex:
    """K^.(x^(n); M), stored in homological degrees -r..0."""
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    return koszul_from_operators(M, _scalar_ops(M, ctx.powered(powers)), True, M, check)


def label_positions(X: ChainComplex, n: int) -> dict[frozenset, int]:
    return {lab: i for i, lab in enumerate(X.labels.get(n, []))}


def _block_gens(X: ChainComplex) -> int:
    return X.coefficient.generators if X.coefficient is not None else 1


def label_map(X: ChainComplex, Y: ChainComplex, blocks, check: bool = True) -> ChainMap:
    """Chain map built from per-label blocks.

    blocks(n, I, J) returns the block from label I of X_n to label J of Y_n
    (a g x g matrix) or None for zero.
    """
    ring = X.ring
    gx, gy = _block_gens(X), _block_gens(Y)
    comps = {}
    for n in X.degrees():
        src, tgt = X.labels.get(n, []), Y.labels.get(n, [])
        grid = [[blocks(n, I, J) for J in tgt] for I in src]
        comps[n] = block_matrix(ring, grid, [gx] * len(src), [gy] * len(tgt))
    return ChainMap(X, Y, comps, check=check)


def exterior_sign(p: int) -> int:
    """Sign relating the iterated-cone basis to the wedge basis in degree p."""
    return -1 if (p * (p - 1) // 2) % 2 else 1


def koszul_exterior(ctx: SequenceContext, M: FpModule | None = None, powers=1):
    """Wedge-basis Koszul complex and its isomorphism onto koszul_chain.

    d(e_{i1} ^ ... ^ e_ip) = sum_j (-1)^(j+1) x_ij^n e_(omit j), bases in
    lexicographic subset order.
    """
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    ring, r, g = ctx.ring, ctx.r, M.generators
    xs = ctx.powered(powers)
    eye = Matrix.identity(ring, g)
    terms, diffs, labels = [], [], {}
    for p in range(r + 1):
        labels[p] = lex_subsets(r, p)
        terms.append(M.power(len(labels[p])))
    for p in range(1, r + 1):
        src, tgt = labels[p], labels[p - 1]
        pos = {lab: i for i, lab in enumerate(tgt)}
        grid = [[None] * len(tgt) for _ in src]
        for a, I in enumerate(src):
            for j, idx in enumerate(sorted(I)):
                sign = 1 if j % 2 == 0 else -1
                grid[a][pos[I - {idx}]] = eye.scale(xs[idx] if sign == 1 else -xs[idx])
        diffs.append(block_matrix(ring, grid, [g] * len(src), [g] * len(tgt)))
    E = ChainComplex(ring, 0, terms, diffs, M, False, labels)
    K = koszul_chain(ctx, M, powers)

    def blk(n, I, J):
        if I != J:
            return None
        return eye if exterior_sign(n) == 1 else -eye

    iso = label_map(E, K, blk)
    return E, iso


def koszul_transition(ctx: SequenceContext, M: FpModule | None, m, n, variant: str = "chain") -> ChainMap:
    """Chain: K_.(x^m) -> K_.(x^n); cochain: K^.(x^n) -> K^.(x^m).

    The block on label I is the product of x_i^(m_i - n_i) over i in I.
    """
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    me, ne = exponents(m, ctx.r), exponents(n, ctx.r)
    if any(a < b for a, b in zip(me, ne)):
        raise BadExponents(f"need m >= n, got m={me}, n={ne}")
    diff = [x ** (a - b) for x, a, b in zip(ctx.elements, me, ne)]
    eye = Matrix.identity(ctx.ring, M.generators)
    if variant == "chain":
        src, tgt = koszul_chain(ctx, M, me), koszul_chain(ctx, M, ne)
    elif variant == "cochain":
        src, tgt = koszul_cochain(ctx, M, ne), koszul_cochain(ctx, M, me)
    else:
        raise ValueError(f"unknown variant {variant!r}")

    def blk(_, I, J):
        if I != J:
            return None
        c = ctx.ring.one()
        for i in I:
            c = c * diff[i]
        return eye.scale(c)

    return label_map(src, tgt, blk)


def _det(entries: list[list[RingElem]], ring: Ring) -> RingElem:
    k = len(entries)
    if k == 0:
        return ring.one()
    total = ring.zero()
    for c in range(k):
        minor = [row[:c] + row[c + 1:] for row in entries[1:]]
        term = entries[0][c] * _det(minor, ring)
        total = total + term if c % 2 == 0 else total - term
    return total


def change_of_sequence(ctx_x: SequenceContext, ctx_y: SequenceContext, A: Matrix,
                       M: FpModule | None = None) -> ChainMap:
    """Isomorphism K_.(y; M) -> K_.(x; M) for y = x.A, A invertible.

    On labels the block J -> I is det A[I, J], i.e. the exterior powers of A.
    """
    ring = ctx_x.ring
    r = ctx_x.r
    if ctx_y.r != r or A.shape != (r, r):
        raise SequenceMismatch("sequence lengths and matrix size disagree")
    entries = A.entries()
    for j in range(r):
        yj = ring.zero()
        for i in range(r):
            yj = yj + ctx_x.elements[i] * entries[i][j]
        if yj != ctx_y.elements[j]:
            raise SequenceMismatch(f"y_{j + 1} = {ctx_y.elements[j]} but (x.A)_{j + 1} = {yj}")
    if not _det(entries, ring).is_unit():
        raise NotInvertible("change-of-sequence matrix is not invertible")
    M = M if M is not None else FpModule.free(ring, 1)
    eye = Matrix.identity(ring, M.generators)
    src, tgt = koszul_chain(ctx_y, M), koszul_chain(ctx_x, M)

    def blk(_, J, I):
        if len(I) != len(J):
            return None
        rows, cols = sorted(I), sorted(J)
        d = _det([[entries[a][b] for b in cols] for a in rows], ring)
        return None if d.is_zero() else eye.scale(d)

    return label_map(src, tgt, blk)


# sign matching between label-indexed complexes -------------------------------------

def match_label_signs(A: ChainComplex, B: ChainComplex, relabel) -> dict:
    """Signs eps with eps(I) . dB = dA . eps making I -> relabel(I) a chain map.

    Works on complexes whose label blocks are +-1 multiples of each other
    (e.g. generic integer instances); returns {(n, I): +-1}.
    """
    be = A._be
    signs: dict = {}
    g = _block_gens(A)
    adj: dict = {}
    for n in range(A.lo + 1, A.hi + 1):
        da, db = A.flat_d(n), B.flat_d(n)
        pa_src, pa_tgt = A.labels[n], A.labels[n - 1]
        pb_src = label_positions(B, n)
        pb_tgt = label_positions(B, n - 1)
        for i, I in enumerate(pa_src):
            for j, J in enumerate(pa_tgt):
                a = da[i * g:(i + 1) * g, j * g:(j + 1) * g]
                bi, bj = pb_src[relabel(I)], pb_tgt[relabel(J)]
                b = db[bi * g:(bi + 1) * g, bj * g:(bj + 1) * g]
                if be.is_zero(a) and be.is_zero(b):
                    continue
                if be.is_zero(be.add(a, be.neg(b))):
                    rel = 1
                elif be.is_zero(be.add(a, b)):
                    rel = -1
                else:
                    raise ValueError(f"blocks for labels {sorted(I)} -> {sorted(J)} are not +-equal")
                adj.setdefault((n, I), []).append(((n - 1, J), rel))
                adj.setdefault((n - 1, J), []).append(((n, I), rel))
    for n in A.degrees():
        for I in A.labels.get(n, []):
            if (n, I) in signs:
                continue
            signs[(n, I)] = 1
            stack = [(n, I)]
            while stack:
                node = stack.pop()
                for other, rel in adj.get(node, []):
                    want = signs[node] * rel
                    if other in signs:
                        if signs[other] != want:
                            raise ValueError("no consistent sign assignment")
                    else:
                        signs[other] = want
                        stack.append(other)
    return signs


_GENERIC = (2, 3, 5, 7)


@lru_cache(maxsize=None)
def hom_dual_signs(r: int) -> dict:
    """Signs making e_I^* -> +-(label I) an iso Hom(K_.(x;R), R) -> K^.(x;R)."""
    from .complexes import hom_complex
    ZZ = Integers()
    ctx = SequenceContext(ZZ, _GENERIC[:r])
    H = hom_complex(koszul_chain(ctx), single_term(FpModule.free(ZZ, 1)))
    H.labels = {n: list(koszul_chain(ctx).labels[-n]) for n in H.degrees()}
    C = koszul_cochain(ctx)
    return match_label_signs(H, C, lambda I: I)


def _complement(r: int):
    full = frozenset(range(r))
    return lambda I: full - I


@lru_cache(maxsize=None)
def self_duality_signs(r: int) -> dict:
    """Signs making e_I -> +-(label complement of I) an iso K_.(x) -> K^.(x)[r]."""
    ZZ = Integers()
    ctx = SequenceContext(ZZ, _GENERIC[:r])
    K = koszul_chain(ctx)
    C = shift(koszul_cochain(ctx), r)
    return match_label_signs(K, C, _complement(r))


def hom_dual_iso(ctx: SequenceContext, M: FpModule | None = None, powers=1) -> ChainMap:
    """Explicit isomorphism Hom(K_.(x^(n); R), M) -> K^.(x^(n); M)."""
    from .complexes import hom_complex
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    Kc = koszul_chain(ctx, None, powers)
    H = hom_complex(Kc, single_term(M))
    H.labels = {n: list(Kc.labels[-n]) for n in H.degrees()}
    H.coefficient = M
    C = koszul_cochain(ctx, M, powers)
    signs = hom_dual_signs(ctx.r)
    eye = Matrix.identity(ctx.ring, M.generators)
    return label_map(H, C, lambda n, I, J: (eye if signs[(n, I)] == 1 else -eye) if I == J else None)


def self_duality_iso(ctx: SequenceContext, M: FpModule | None = None, powers=1) -> ChainMap:
    """Explicit isomorphism K_.(x^(n); M) -> K^.(x^(n); M)[r] by label complement."""
    M = M if M is not None else FpModule.free(ctx.ring, 1)
    r = ctx.r
    K = koszul_chain(ctx, M, powers)
    C = shift(koszul_cochain(ctx, M, powers), r)
    C.coefficient = M
    signs = self_duality_signs(r)
    comp = _complement(r)
    eye = Matrix.identity(ctx.ring, M.generators)
    return label_map(K, C, lambda n, I, J: (eye if signs[(n, I)] == 1 else -eye) if comp(I) == J else None)


# the annihilator / quotient pair ---------------------------------------------------

def flat_module(T: FpModule) -> FpModule:
    """The same module presented over the base ring."""
    ring = T.ring
    if not isinstance(ring, FiniteAlgebra):
        return T
    base = ring.base_ring()
    rel = T.flat_relations()
    return FpModule(base, T.flat_dim, Matrix(base, base.mat_reduce(np.asarray(rel, dtype=np.int64))), check=False)


def as_matrix(ring: Ring, arr) -> Matrix:
    """Wrap a backend array (int64 or object) as a Matrix over ring."""
    arr = np.asarray(arr)
    rows, cols = arr.shape[:2]
    out = ring.mat_zeros(rows, cols)
    if rows and cols:
        out[:, :] = arr
    return Matrix(ring, ring.mat_reduce(out))


def flatten_complex(X: ChainComplex) -> ChainComplex:
    """X as a complex over the base ring (identity for non-algebra rings)."""
    ring = X.ring
    if not isinstance(ring, FiniteAlgebra):
        return X
    base = ring.base_ring()
    terms = [flat_module(t) for t in X.terms]
    diffs = [as_matrix(base, X.flat_d(n)) for n in range(X.lo + 1, X.hi + 1)]
    return ChainComplex(base, X.lo, terms, diffs, None, X.cohomological, check=False)


def _sub_presentation(base: Ring, sq: Subquotient) -> FpModule:
    return FpModule(base, sq.m, as_matrix(base, sq.L) if sq.L.shape[0] else None, check=False)


@dataclass
class TorsionQuotientMaps:
    koszul: ChainComplex
    incl: ChainMap
    surj: ChainMap


def torsion_and_quotient_maps(x, X: ChainComplex) -> TorsionQuotientMaps:
    """(0:_X x) shifted up one degree -> K_.(x; X) -> X / xX, over the base ring."""
    Xf = flatten_complex(X)
    base = Xf.ring
    be = backend_for(base)
    xe = x if isinstance(x, RingElem) else X.ring(x)
    gens = {n: X.gens(n) for n in X.degrees()}
    xop = {n: be.asarray(Matrix.scalar(X.ring, xe, gens[n]).flat()) for n in X.degrees()}
    xflat = {n: as_matrix(base, xop[n]) for n in X.degrees()}
    K = cone(ChainMap(Xf, Xf, xflat, check=False)).complex

    # annihilator subcomplex
    subs = {}
    for n in X.degrees():
        dim = Xf.flat_dim(n)
        rel = Xf.flat_rel(n)
        stacked = np.concatenate([xop[n], rel], axis=0) if rel.shape[0] else xop[n]
        ker = be.kernel(stacked)
        Z = np.ascontiguousarray(ker[:, :dim]) if ker.shape[0] else be.zeros(0, dim)
        subs[n] = Subquotient(be, dim, Z, rel)
    terms = [_sub_presentation(base, subs[n]) for n in X.degrees()]
    diffs = []
    for n in range(X.lo + 1, X.hi + 1):
        imgs = be.matmul(subs[n].K, Xf.flat_d(n)) if subs[n].m else be.zeros(0, Xf.flat_dim(n - 1))
        diffs.append(as_matrix(base, subs[n - 1].coords(imgs)) if subs[n].m else
                     Matrix.zeros(base, 0, subs[n - 1].m))
    A = ChainComplex(base, X.lo, terms, diffs, check=False)
    A1 = shift(A, 1)
    incl_comps = {}
    for n in A1.degrees():
        top = as_matrix(base, subs[n - 1].K)
        incl_comps[n] = block_matrix(base, [[top, None]], [subs[n - 1].m],
                                     [Xf.gens(n - 1), Xf.gens(n)])
    incl = ChainMap(A1, K, incl_comps)

    qterms = []
    for n in X.degrees():
        rel = Xf.flat_rel(n)
        both = np.concatenate([rel, xop[n]], axis=0) if rel.shape[0] else xop[n]
        qterms.append(FpModule(base, Xf.gens(n), as_matrix(base, both), check=False))
    Q = ChainComplex(base, X.lo, qterms, list(Xf.diffs), check=False)
    surj_comps = {}
    for n in K.degrees():
        if not (X.lo <= n <= X.hi):
            continue
        surj_comps[n] = block_matrix(base, [[None], [Matrix.identity(base, Xf.gens(n))]],
                                     [Xf.gens(n - 1), Xf.gens(n)], [Xf.gens(n)])
    surj = ChainMap(K, Q, surj_comps)
    return TorsionQuotientMaps(K, incl, surj)


def prel7_exact_pairs(x, X: ChainComplex) -> dict[int, dict]:
    """Per degree n: 0 -> H_n(X)/x -> H_n(K(x;X)) -> (0 :_{H_{n-1}(X)} x) -> 0.

    Verified with the cone maps: inj kills exactly xH_n(X), proj lands onto
    the x-torsion of H_{n-1}(X), and ker proj = im inj.
    """
    Xf = flatten_complex(X)
    xe = x if isinstance(x, RingElem) else X.ring(x)
    be = Xf._be
    xflat = {n: as_matrix(Xf.ring, be.asarray(Matrix.scalar(X.ring, xe, X.gens(n)).flat()))
             for n in X.degrees()}
    mu = ChainMap(Xf, Xf, xflat, check=False)
    c = cone(mu)
    out = {}
    for n in c.complex.degrees():
        inj = c.inj.induced(n)
        proj = c.proj.induced(n)
        mult_n = mu.induced(n)
        mult_prev = mu.induced(n - 1)
        left = mult_n.cokernel()
        right = mult_prev.kernel().classification
        ker_inj = inj.kernel().classification
        exact_mid = proj.kernel().classification == inj.image().classification and inj.compose(proj).is_zero()
        ok = (mult_n.compose(inj).is_zero() and ker_inj == mult_n.image().classification
              and inj.image().classification == left
              and proj.image().classification == right and exact_mid)
        out[n] = {"ok": ok, "quotient": left, "torsion": right,
                  "middle": c.complex.homology(n)}
    return out
