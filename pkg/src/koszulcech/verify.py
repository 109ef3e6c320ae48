"""Named machine checks over configurable instances.

Each check builds explicit complexes and morphisms for one instance and
certifies the claimed property exactly: chain-map identities on matrices,
quasi-isomorphisms through exactness of the mapping cone, isomorphisms
termwise, and short exact sequences either termwise or through the
cardinality identity on homology (the mode used is recorded).
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import adic
from .adic import (dual0_pairing, inverse_poly_module, koszul_systems, koszul_xu, koszul_xu_chain,
                   koszul_xu_cochain, limits, split_diagram, tel_mic_trunc, trunc_poly_module,
                   truncation_matrix, u_row, window_inclusion, window_reversal, xu_chain_comparison,
                   xu_cochain_comparison, xu_dual_system, xu_systems)
from .cech import (FlatModule, InfiniteRing, TooLarge, cech_complex_finite, derived_completion_koszul,
                   hom_from_localization, local_cohomology_koszul, proregular_check)
from .complexes import (ChainComplex, ChainMap, NotAChainMap, cone, hom_complex, quasi_iso_check,
                        shift, single_term)
from .koszul import (SequenceContext, as_matrix, koszul_chain, koszul_cochain, label_map,
                     label_positions, prel7_exact_pairs)
from .linalg import (FpModule, Matrix, ModuleClassification, Subquotient, backend_for, block_diag,
                     block_matrix)
from .rings import FiniteAlgebra, IntegersModN, Ring, make_ring


class UnknownCheck(KeyError):
    """No check with this id is registered."""


class UnsupportedInstance(ValueError):
    """The check does not apply to this instance (e.g. an oracle check over Z)."""


class CheckFailed(Exception):
    def __init__(self, witness: dict):
        super().__init__(witness.get("what", "check failed"))
        self.witness = witness


PASS, FAIL, INCONCLUSIVE = "Pass", "Fail", "Inconclusive"


# instances -----------------------------------------------------------------------------

@dataclass
class InstanceConfig:
    """Ring, module, sequence and truncation parameters of one instance.

    module is None (the ring itself), {"kind": "free", "rank": k},
    {"kind": "quotient", "by": [literals]} for R/(a_1, ...), or
    {"generators": g, "relations": [[literal, ...], ...]}.
    """

    ring: object = "Z/12"
    module: object = None
    sequence: tuple = ("2",)
    y: str | None = None
    n: int = 2
    m: int = 4
    n_max: int = 6
    m_max: int = 8
    options: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, data: dict) -> "InstanceConfig":
        trunc = data.get("truncation", {})
        return cls(ring=data.get("ring", "Z/12"), module=data.get("module"),
                   sequence=tuple(str(s) for s in data.get("sequence", ["2"])),
                   y=str(data["y"]) if data.get("y") is not None else None,
                   n=int(trunc.get("n", data.get("n", 2))), m=int(trunc.get("m", data.get("m", 4))),
                   n_max=int(trunc.get("n_max", data.get("n_max", 6))),
                   m_max=int(trunc.get("m_max", data.get("m_max", 8))),
                   options=dict(data.get("options", {})))

    def to_json(self) -> dict:
        out = {"ring": self.ring, "module": self.module, "sequence": list(self.sequence),
               "truncation": {"n": self.n, "m": self.m, "n_max": self.n_max, "m_max": self.m_max}}
        if self.y is not None:
            out["y"] = self.y
        if self.options:
            out["options"] = dict(self.options)
        return out

    def describe(self) -> str:
        ring = self.ring if isinstance(self.ring, str) else make_ring(self.ring).name
        mod = "R" if self.module is None else _module_text(self.module)
        extra = f", y={self.y}" if self.y is not None else ""
        opts = f", {self.options}" if self.options else ""
        return (f"{ring}, M={mod}, x=({', '.join(self.sequence)}){extra}, n={self.n}, m={self.m}, "
                f"n_max={self.n_max}{opts}")

    def build(self) -> "Instance":
        ring = make_ring(self.ring)
        M = build_module(ring, self.module)
        ctx = SequenceContext(ring, [ring.parse(s) for s in self.sequence])
        y = ring.parse(self.y) if self.y is not None else None
        return Instance(self, ring, M, ctx, y)


def _module_text(spec) -> str:
    if isinstance(spec, dict) and spec.get("kind") == "free":
        return f"R^{spec.get('rank', 1)}"
    if isinstance(spec, dict) and spec.get("kind") == "quotient":
        return "R/(" + ", ".join(str(a) for a in spec["by"]) + ")"
    if isinstance(spec, dict):
        return f"<{spec.get('generators')} gens | {spec.get('relations', [])}>"
    return str(spec)


def build_module(ring: Ring, spec) -> FpModule:
    if spec is None or spec == "R":
        return FpModule.free(ring, 1)
    if not isinstance(spec, dict):
        raise ValueError(f"bad module spec {spec!r}")
    kind = spec.get("kind")
    if kind == "free":
        return FpModule.free(ring, int(spec.get("rank", 1)))
    if kind == "quotient":
        return FpModule.cyclic(ring, *[ring.parse(str(a)) for a in spec["by"]])
    g = int(spec["generators"])
    rows = [[ring.parse(str(v)) for v in row] for row in spec.get("relations", [])]
    rel = Matrix.from_rows(ring, rows, g) if rows else None
    return FpModule(ring, g, rel)


@dataclass
class Instance:
    config: InstanceConfig
    ring: Ring
    M: FpModule
    ctx: SequenceContext
    y: object

    @property
    def finite(self) -> bool:
        return self.ring.is_finite


# reports ---------------------------------------------------------------------------------

@dataclass
class CheckReport:
    check_id: str
    statement: str
    instance: dict
    description: str
    verdict: str
    witness: dict | None = None
    reason: str = ""
    mode: str = ""
    artifacts: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def to_json(self) -> dict:
        out = {"checkId": self.check_id, "statement": self.statement, "instance": self.instance,
               "description": self.description, "verdict": self.verdict, "artifacts": self.artifacts}
        if self.mode:
            out["mode"] = self.mode
        if self.witness is not None:
            out["witness"] = self.witness
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass
class SuiteReport:
    reports: list

    @property
    def summary(self) -> dict:
        out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
        for r in self.reports:
            out[r.verdict] += 1
        return out

    @property
    def exit_code(self) -> int:
        s = self.summary
        if s[FAIL]:
            return 1
        if s[INCONCLUSIVE] and not s[PASS]:
            return 4
        return 0

    def to_json(self) -> dict:
        return {"summary": self.summary, "reports": [r.to_json() for r in self.reports]}


# certification helpers ---------------------------------------------------------------------

def _matrix_json(be, a) -> list:
    return [[int(v) for v in row] for row in np.asarray(a)]


def _cls(c: ModuleClassification | None) -> str | None:
    return None if c is None else c.render()


def certify_chain_map(f: ChainMap, name: str) -> None:
    try:
        f.validate()
    except NotAChainMap as exc:
        n = exc.degree
        witness = {"what": f"{name} is not a chain map", "map": name, "degree": n}
        if isinstance(n, int):
            witness["defect"] = _matrix_json(f.source._be, f.defect(n))
        raise CheckFailed(witness) from None


def certify_qiso(f: ChainMap, name: str) -> dict:
    certify_chain_map(f, name)
    ok, hom = quasi_iso_check(f)
    if not ok:
        bad = {d: c.render() for d, c in hom.items() if not c.is_zero}
        raise CheckFailed({"what": f"{name} is not a quasi-isomorphism", "map": name,
                           "coneHomology": {str(k): v for k, v in sorted(bad.items())}})
    return {str(d): "0" for d in hom}


def certify_iso(f: ChainMap, name: str) -> None:
    certify_chain_map(f, name)
    if not f.is_termwise_iso():
        raise CheckFailed({"what": f"{name} is not a termwise isomorphism", "map": name})


def require(cond: bool, what: str, **data) -> None:
    if not cond:
        raise CheckFailed({"what": what, **{k: _jsonable(v) for k, v in data.items()}})


def _jsonable(v):
    if isinstance(v, ModuleClassification):
        return v.render()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def same_on_homology(f: ChainMap, g: ChainMap, name: str) -> None:
    diff = f - g
    for d in f.source.degrees():
        if not diff.induced(d).is_zero():
            raise CheckFailed({"what": f"{name} does not commute on homology", "square": name, "degree": d})


def homology_json(X: ChainComplex) -> dict:
    return {str(k): v.render() for k, v in sorted(X.display_homology().items())}


def signed_label_map(A: ChainComplex, B: ChainComplex, relabel: Callable, block: Callable,
                     check: bool = True) -> ChainMap:
    """Label-to-label map with blocks +-block(n, I), signs solved so it is a chain map.

    For each nonzero differential block I -> J of A the constraint is
    eps(I) P_I dB = eps(J) dA P_J; the signs are propagated through the
    label graph.  The result is validated afterwards when check is set.
    """
    be = A._be
    sizes_a = {n: A.flat_dim(n) // len(A.labels[n]) if A.labels.get(n) else 0 for n in A.degrees()}
    sizes_b = {n: B.flat_dim(n) // len(B.labels[n]) if B.labels.get(n) else 0 for n in B.degrees()}
    flat_blocks = {}

    def fb(n, I):
        if (n, I) not in flat_blocks:
            flat_blocks[(n, I)] = be.asarray(block(n, I).flat())
        return flat_blocks[(n, I)]

    adj: dict = {}
    for n in range(A.lo + 1, A.hi + 1):
        da, db = A.flat_d(n), B.flat_d(n)
        sa, ta = sizes_a[n], sizes_a[n - 1]
        sb, tb = sizes_b[n], sizes_b[n - 1]
        pos_b_src, pos_b_tgt = label_positions(B, n), label_positions(B, n - 1)
        for i, I in enumerate(A.labels[n]):
            for j, J in enumerate(A.labels[n - 1]):
                dA = da[i * sa:(i + 1) * sa, j * ta:(j + 1) * ta]
                bi, bj = pos_b_src[relabel(I)], pos_b_tgt[relabel(J)]
                dB = db[bi * sb:(bi + 1) * sb, bj * tb:(bj + 1) * tb]
                left = be.matmul(fb(n, I), dB)
                right = be.matmul(dA, fb(n - 1, J))
                if be.is_zero(left) and be.is_zero(right):
                    continue
                same = be.is_zero(be.add(left, be.neg(right)))
                opposite = be.is_zero(be.add(left, right))
                if same and opposite:
                    # 2 * left = 0: either sign satisfies this constraint
                    continue
                if same:
                    rel = 1
                elif opposite:
                    rel = -1
                else:
                    raise CheckFailed({"what": "label blocks are not equal up to sign",
                                       "degree": n, "labels": [sorted(I), sorted(J)]})
                adj.setdefault((n, I), []).append(((n - 1, J), rel))
                adj.setdefault((n - 1, J), []).append(((n, I), rel))
    signs: dict = {}
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
                            raise CheckFailed({"what": "no consistent sign assignment",
                                               "degree": other[0], "label": sorted(other[1])})
                    else:
                        signs[other] = want
                        stack.append(other)
    ring = A.ring
    comps = {}
    for n in A.degrees():
        src, tgt = A.labels.get(n, []), B.labels.get(n, [])
        grid = []
        for I in src:
            row = [None] * len(tgt)
            k = label_positions(B, n)[relabel(I)]
            P = block(n, I)
            row[k] = P if signs[(n, I)] == 1 else -P
            grid.append(row)
        comps[n] = block_matrix(ring, grid, [A.gens(n) // max(1, len(src))] * len(src),
                                [B.gens(n) // max(1, len(tgt))] * len(tgt))
    f = ChainMap(A, B, comps, check=False)
    f.signs = {f"{n}:{''.join(str(i + 1) for i in sorted(I))}": s for (n, I), s in sorted(
        signs.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1])))}
    return f


def _negate_degree(f: ChainMap, degree: int) -> ChainMap:
    comps = dict(f.components)
    if degree in comps:
        comps[degree] = -comps[degree]
    return ChainMap(f.source, f.target, comps, check=False)


def _finite_or_unsupported(inst: Instance, what: str) -> None:
    if not inst.finite:
        raise UnsupportedInstance(f"{what} needs a finite ring, got {inst.ring.name}")


def _residue_or_unsupported(inst: Instance, what: str) -> None:
    if not isinstance(inst.ring, IntegersModN):
        raise UnsupportedInstance(f"{what} is checked over Z/N only, got {inst.ring.name}")


def _single_or_unsupported(inst: Instance, what: str) -> None:
    if inst.ctx.r != 1:
        raise UnsupportedInstance(f"{what} is stated for one element, got r = {inst.ctx.r}")


def _stage_windows(inst: Instance) -> tuple[int, int]:
    n = max(1, inst.config.n)
    m = max(n, inst.config.m)
    return n, m


def _koszul_label_transition(ctx: SequenceContext, M: FpModule, src: ChainComplex, tgt: ChainComplex,
                             diff_exp: int) -> ChainMap:
    eye = Matrix.identity(ctx.ring, M.generators)
    pw = [x ** diff_exp for x in ctx.elements]

    def blk(_, I, J):
        if I != J:
            return None
        c = ctx.ring.one()
        for i in I:
            c = c * pw[i]
        return eye.scale(c)
    return label_map(src, tgt, blk, check=False)


def _per_label(X: ChainComplex, Y: ChainComplex, block: Matrix) -> ChainMap:
    return label_map(X, Y, lambda _, I, J: block if I == J else None, check=False)


# the checks ------------------------------------------------------------------------------

def check_weak5(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    n, m = _stage_windows(inst)
    X = {k: koszul_xu_chain(ctx, M, k, check=False) for k in (n, m)}
    K = {k: koszul_chain(ctx, M, k, check=False) for k in (n, m)}
    f = {k: xu_chain_comparison(ctx, M, k, X[k], K[k], check=False) for k in (n, m)}
    if inst.config.options.get("mutant"):
        f = {k: _negate_degree(v, 1) for k, v in f.items()}
    for k in (n, m):
        certify_qiso(f[k], f"comparison at n={k}")
        art[f"homology_n{k}"] = homology_json(X[k])
    t_xu = _per_label(X[m], X[n], truncation_matrix(ctx.ring, ctx.r, m, n, M.generators))
    t_K = _koszul_label_transition(ctx, M, K[m], K[n], m - n)
    certify_chain_map(t_xu, "truncation")
    same_on_homology(t_xu.compose(f[n]), f[m].compose(t_K), f"transition square ({m} -> {n})")
    return "cone exactness + homology squares"


def check_coh2(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    n, m = _stage_windows(inst)
    X = {k: koszul_xu_cochain(ctx, M, k, check=False) for k in (n, m)}
    K = {k: koszul_cochain(ctx, M, k, check=False) for k in (n, m)}
    f = {k: xu_cochain_comparison(ctx, M, k, X[k], K[k], check=False) for k in (n, m)}
    if inst.config.options.get("mutant"):
        f = {k: _negate_degree(v, -1) for k, v in f.items()}
    for k in (n, m):
        certify_qiso(f[k], f"comparison at n={k}")
        art[f"cohomology_n{k}"] = homology_json(X[k])
    incl = _per_label(X[n], X[m], window_inclusion(ctx.ring, ctx.r, n, m, M.generators))
    t_K = _koszul_label_transition(ctx, M, K[n], K[m], m - n)
    certify_chain_map(incl, "window inclusion")
    certify_chain_map(t_K, "Koszul transition")
    same_on_homology(incl.compose(f[m]), f[n].compose(t_K), f"transition square ({n} -> {m})")
    # under U^-a <-> U^(n-1-a) the inclusion is multiplication by U^(m-n)
    ring = ctx.ring
    shift_mat = Matrix.zeros(ring, n, m)
    for c in range(n):
        ring.mat_set(shift_mat.data, c, c + m - n, ring.one().payload)
    one_var = window_reversal(ring, n) @ window_inclusion(ring, 1, n, m, 1) @ window_reversal(ring, m)
    require(one_var == shift_mat, "window inclusion is not multiplication by U^(m-n)")
    art["inclusionIsUPower"] = True
    return "cone exactness + homology squares"


def _window_certificate(C, ctx, M, s: int, s2: int, art: dict) -> None:
    """The window maps exhibit colim H(window) = H(Č) through stages s <= s2."""
    X = koszul_xu_cochain(ctx, M, s, check=False)
    X2 = koszul_xu_cochain(ctx, M, s2, check=False)
    g, g2 = C.window_map(s, X), C.window_map(s2, X2)
    certify_chain_map(g, f"window map at n={s}")
    certify_chain_map(g2, f"window map at n={s2}")
    incl = _per_label(X, X2, window_inclusion(ctx.ring, ctx.r, s, s2, M.generators))
    same_on_homology(adic_flat(incl).compose(g2), g, "window maps against inclusion")
    for d in g.source.degrees():
        gi = g.induced(d)
        t = incl.induced(d)
        require(gi.is_surjective(), "window map not surjective on cohomology", degree=d, stage=s)
        require(gi.kernel().cardinality == t.kernel().cardinality,
                "window map kernel differs from the transition kernel", degree=d, stage=s)
    art["windowStages"] = [s, s2]


def adic_flat(f: ChainMap) -> ChainMap:
    """A chain map between labelled complexes, re-expressed over the base ring."""
    from .cech import flatten_labelled
    S, T = flatten_labelled(f.source), flatten_labelled(f.target)
    base = S.ring
    return ChainMap(S, T, {n: as_matrix(base, f.flat(n)) for n in f.source.degrees()}, check=False)


def check_coh3_oracle(inst: Instance, art: dict) -> str:
    _finite_or_unsupported(inst, "the Čech oracle")
    ctx, M = inst.ctx, inst.M
    try:
        C = cech_complex_finite(ctx, M)
    except (TooLarge, InfiniteRing) as exc:
        raise UnsupportedInstance(str(exc)) from None
    oracle = C.complex.cohomology()
    lc = local_cohomology_koszul(ctx, M, inst.config.n_max)
    art["oracle"] = {str(k): v.render() for k, v in sorted(oracle.items())}
    art["avatar"] = {str(k): lc.values[k].to_json() for k in sorted(lc.values)}
    if not lc.stabilized:
        raise UnsupportedInstance("avatar did not stabilize within n_max")
    for d, c in oracle.items():
        require(lc.value(d) == c, "avatar and oracle differ", degree=d, avatar=lc.value(d), oracle=c)
    s = max(v.stage for v in lc.values.values())
    s2 = min(2 * s, max(inst.config.n_max, 2 * s))
    _window_certificate(C, ctx, M, s, s2, art)
    return "classification equality + explicit window maps"


def check_weak6(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    n_max = inst.config.n_max
    xu = limits(xu_systems(ctx, M, n_max, "chain"))
    ks = koszul_systems(ctx, M, n_max, "chain")
    kl = limits(ks)
    art["avatar"] = xu.to_json()["degrees"]
    art["koszul"] = kl.to_json()["degrees"]
    top = ctx.r
    for k in range(1, min(n_max, 4) + 1):
        f = xu_chain_comparison(ctx, M, k, check=False)
        certify_qiso(f, f"stage comparison at n={k}")
    if not (xu.stabilized and kl.stabilized) or not inst.finite:
        for d in range(0, top + 1):
            a, b = xu.values[d], kl.values[d]
            require(a.to_json() == b.to_json() if not isinstance(a, adic.Stabilized) else
                    a.value == getattr(b, "value", None), "stage data differ", degree=d)
        return "stagewise quasi-isomorphisms, pro-objects compared"
    for d in range(0, top + 1):
        lim1 = kl.lim1.get(d + 1)
        l1 = lim1.cardinality if lim1 is not None else 1
        lhs = xu.value(d).cardinality
        rhs = l1 * kl.value(d).cardinality
        require(lhs == rhs, "cardinality identity fails", degree=d, avatar=xu.value(d),
                lim=kl.value(d), lim1=lim1)
    return "cardinality identity"


def _xu_prozero_witnesses(ctx, M, n0: int, m0: int) -> dict:
    sys = xu_systems(ctx, M, m0, "chain")
    out = {}
    for i in range(1, ctx.r + 1):
        wit = {}
        for n in range(1, n0 + 1):
            for m in range(n, m0 + 1):
                t = sys.transition(n, m) if m > n else None
                zero = t.induced(i).is_zero() if t is not None else sys.stage(n).homology(i).is_zero
                if zero:
                    wit[n] = m
                    break
        out[i] = wit
    return out


def check_weak7(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    n0 = min(inst.config.n_max, 3)
    m0 = max(n0, min(inst.config.m_max, n0 + 4))
    verdict = proregular_check(ctx, M, n0, m0)
    xu_w = _xu_prozero_witnesses(ctx, M, n0, m0)
    art["proregular"] = verdict.to_json()
    art["avatarWitnesses"] = {str(i): {str(n): m for n, m in w.items()} for i, w in xu_w.items()}
    for i, v in verdict.per_index.items():
        kw = v.witnesses if hasattr(v, "witnesses") else {}
        require(kw == xu_w[i], "pro-zero witnesses differ between avatar and Koszul systems",
                index=i, koszul=kw, avatar=xu_w[i])
    for n in range(1, n0 + 1):
        f = xu_chain_comparison(ctx, M, n, check=False)
        require(f.induced(0).is_surjective(), "H_0 stage does not surject onto M/x^n M", stage=n)
    if inst.finite and verdict.verified:
        xu = limits(xu_systems(ctx, M, inst.config.n_max, "chain"))
        kl = limits(koszul_systems(ctx, M, inst.config.n_max, "chain"))
        if xu.stabilized and kl.stabilized:
            require(xu.value(0) == kl.value(0), "H_0 limit differs from the completion",
                    avatar=xu.value(0), completion=kl.value(0))
            require(xu.lim1[1].is_zero if 1 in xu.lim1 else True, "lim1 H_1 not zero")
            art["completion"] = kl.value(0).render()
    if isinstance(inst.ring, IntegersModN) and verdict.verified:
        # R = Z/N is self-injective, so Hom(M, R) is a test module for the vanishing
        D = _dual_module(M)
        dual = cech_complex_finite(ctx, D).complex.cohomology()
        art["cechOfDual"] = {str(d): c.render() for d, c in sorted(dual.items())}
        for d, c in dual.items():
            require(d == 0 or c.is_zero, "Čech cohomology of Hom(M, R) is not zero above degree 0",
                    degree=d, value=c)
    return "transition witnesses + stage surjections"


def check_hoc2(inst: Instance, art: dict) -> str:
    _single_or_unsupported(inst, "the Hom(R_x, M) comparison")
    ctx, M = inst.ctx, inst.M
    x = ctx.elements[0]
    n0 = min(inst.config.n_max, 4)
    for n in range(1, n0 + 1):
        f = xu_chain_comparison(ctx, M, n, check=False)
        require(f.induced(0).is_surjective(), "H_0 stage does not surject onto M/x^n M", stage=n)
    if not inst.finite:
        art["homSide"] = "skipped over an infinite ring"
        return "stage surjections"
    T, ev = hom_from_localization(M, x)
    flat = FlatModule.of(M)
    be = flat.be
    Tsq = Subquotient(be, T.generators, be.eye(T.generators),
                      be.asarray(T.relations.data) if T.relations.rows else be.zeros(0, T.generators))
    ker_ev = Tsq.induced(flat.whole(), be.asarray(ev.data)).kernel() if T.generators else Tsq
    xu = limits(xu_systems(ctx, M, inst.config.n_max, "chain"))
    require(xu.stabilized, "avatar did not stabilize")
    art["H1"] = xu.value(1).render()
    art["kerEval"] = ker_ev.classification.render()
    art["homRx"] = T.classify().render()
    require(xu.value(1).cardinality == ker_ev.cardinality, "lim H_1 differs from ker(eval)",
            H1=xu.value(1), kernel=ker_ev.classification)
    wit = _xu_prozero_witnesses(ctx, M, min(3, inst.config.n_max), min(3, inst.config.n_max) + 4)
    require(len(wit[1]) == min(3, inst.config.n_max), "H_1 stages are not pro-zero", witnesses=wit[1])
    kl = limits(koszul_systems(ctx, M, inst.config.n_max, "chain"))
    require(xu.value(0) == kl.value(0), "H_0 limit differs from the completion",
            avatar=xu.value(0), completion=kl.value(0))
    return "cardinality of ker(eval) + pro-zero witnesses"


def check_hoc3(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    n = inst.config.n
    r = ctx.r
    K = koszul_xu(ctx, M, n, "poly", False, check=False)
    C = shift(koszul_xu(ctx, M, n, "poly", True, check=False), r)
    C.coefficient = K.coefficient
    full = frozenset(range(r))
    eye = Matrix.identity(ctx.ring, K.coefficient.generators)
    f = signed_label_map(K, C, lambda I: full - I, lambda _n, _I: eye)
    certify_iso(f, "self-duality")
    art["signs"] = f.signs
    art["homology"] = homology_json(K)
    return "explicit isomorphism"


def check_dual0(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    d = dual0_pairing(M, ctx.r, inst.config.n)
    require(d.intertwines(), "U-actions are not intertwined")
    be = FlatModule.of(M).be
    H = Subquotient(be, d.hom.flat_dim, be.eye(d.hom.flat_dim),
                    be.asarray(d.hom.flat_relations()) if d.hom.relations.rows else be.zeros(0, d.hom.flat_dim))
    P = Subquotient(be, d.poly.flat_dim, be.eye(d.poly.flat_dim),
                    be.asarray(d.poly.flat_relations()) if d.poly.relations.rows else be.zeros(0, d.poly.flat_dim))
    require(H.induced(P, be.asarray(d.phi.flat())).is_iso(), "pairing is not bijective")
    art["size"] = d.phi.rows
    return "explicit isomorphism"


def _u_action(X: ChainComplex, n: int, per_label: Matrix) -> Matrix:
    return block_diag(X.ring, [per_label] * len(X.labels.get(n, []))) if X.labels.get(n) else \
        Matrix.zeros(X.ring, 0, 0)


def _check_intertwining(f: ChainMap, ua: Callable, ub: Callable, r: int, name: str) -> None:
    for n in f.source.degrees():
        for i in range(r):
            A, B = ua(n, i), ub(n, i)
            if A.rows == 0:
                continue
            require(A @ f.component(n) == f.component(n) @ B, f"{name} does not intertwine U",
                    degree=n, variable=i + 1)


def _hom_with_labels(X: ChainComplex, Y: FpModule, coefficient: FpModule) -> ChainComplex:
    H = hom_complex(X, single_term(Y))
    H.labels = {n: list(X.labels.get(-n, [])) for n in H.degrees()}
    H.coefficient = coefficient
    return H


def _hom_module(A: FpModule, B: FpModule) -> FpModule:
    ring = A.ring
    rel = Matrix.identity(ring, A.generators).kron(B.relations) if B.relations.rows else None
    return FpModule(ring, A.generators * B.generators, rel, check=False)


def check_dual1(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    n, r, ring = inst.config.n, inst.ctx.r, inst.ring
    Xc = koszul_xu_cochain(ctx, None, n, check=False)
    P = trunc_poly_module(M, r, n)
    A = _hom_with_labels(Xc, M, P)
    B = koszul_xu_chain(ctx, M, n, check=False)
    eye = Matrix.identity(ring, P.generators)
    f = signed_label_map(A, B, lambda I: I, lambda _n, _I: eye)
    certify_iso(f, "Hom(K(x-U; R[U^-1]), M) -> K(x-U; M[[U]])")
    Q = inverse_poly_module(FpModule.free(ring, 1), r, n)
    eg = Matrix.identity(ring, M.generators)
    _check_intertwining(f, lambda d, i: _u_action(A, d, u_row(Q, i).T.kron(eg)),
                        lambda d, i: _u_action(B, d, u_row(P, i)), r, "dual1 isomorphism")
    art["signs"] = f.signs
    return "explicit isomorphism with U-action"


def _free_rank(inst: Instance) -> int:
    return int(inst.config.options.get("rank", 2))


def check_dual2(inst: Instance, art: dict) -> str:
    ctx, Y = inst.ctx, inst.M
    n, r, ring = inst.config.n, ctx.r, inst.ring
    X = FpModule.free(ring, _free_rank(inst))
    H = _hom_module(X, Y)
    Xc = koszul_xu_cochain(ctx, X, n, check=False)
    PH = trunc_poly_module(H, r, n)
    A = _hom_with_labels(Xc, Y, PH)
    B = koszul_xu_chain(ctx, H, n, check=False)
    eye = Matrix.identity(ring, PH.generators)
    f = signed_label_map(A, B, lambda I: I, lambda _n, _I: eye)
    certify_iso(f, "Hom(K(x-U; X[U^-1]), Y) -> K(x-U; Hom(X, Y)[[U]])")
    QX = inverse_poly_module(X, r, n)
    eg = Matrix.identity(ring, Y.generators)
    _check_intertwining(f, lambda d, i: _u_action(A, d, u_row(QX, i).T.kron(eg)),
                        lambda d, i: _u_action(B, d, u_row(PH, i)), r, "dual2 isomorphism")
    art["signs"] = f.signs
    art["X"] = f"R^{X.generators}"
    return "explicit isomorphism with U-action"


def _perm(ring: Ring, size: int, target_of) -> Matrix:
    P = Matrix.zeros(ring, size, size)
    one = ring.one().payload
    for a in range(size):
        ring.mat_set(P.data, a, target_of(a), one)
    return P


def check_dual3(inst: Instance, art: dict) -> str:
    ctx, Y = inst.ctx, inst.M
    n, r, ring = inst.config.n, ctx.r, inst.ring
    a = _free_rank(inst)
    X = FpModule.free(ring, a)
    H = _hom_module(X, Y)
    g = Y.generators
    A = koszul_xu_chain(ctx, H, n, check=False)
    K = koszul_xu_chain(ctx, Y, n, check=False)
    B = hom_complex(single_term(X), K)
    size = n ** r
    comps = {}
    for d in A.degrees():
        nl = len(A.labels[d])
        per = size * g

        def tgt(idx, nl=nl, per=per):
            L, rest = divmod(idx, size * a * g)
            mono, rest = divmod(rest, a * g)
            t, s = divmod(rest, g)
            return t * (nl * per) + L * per + mono * g + s
        comps[d] = _perm(ring, nl * size * a * g, tgt)
    f = ChainMap(A, B, comps, check=False)
    certify_iso(f, "K(x-U; Hom(X, Y)[[U]]) -> Hom(X, K(x-U; Y[[U]]))")
    PH, PY = trunc_poly_module(H, r, n), trunc_poly_module(Y, r, n)
    _check_intertwining(f, lambda d, i: _u_action(A, d, u_row(PH, i)),
                        lambda d, i: Matrix.identity(ring, a).kron(_u_action(K, d, u_row(PY, i))),
                        r, "dual3 isomorphism")
    art["X"] = f"R^{a}"
    return "explicit isomorphism with U-action"


def _cochain_block_signs(r: int) -> dict:
    from .cech import _cochain_signs
    return _cochain_signs(r)


def check_dual6(inst: Instance, art: dict) -> str:
    ctx, Y = inst.ctx, inst.M
    n, r, ring = inst.config.n, ctx.r, inst.ring
    a = _free_rank(inst)
    X = FpModule.free(ring, a)
    H = _hom_module(X, Y)
    g = Y.generators
    size = n ** r
    per = a * size * g
    PY = trunc_poly_module(Y, r, n)
    PH = trunc_poly_module(H, r, n)
    # Hom over R[U] from K^.(x - U; X[U]) into Y[[U]], truncated: a label block
    # stores f(e_I (x) e_t) in P_n(Y) for t < a, index t * size * g + mono * g + s.
    skeleton = koszul_chain(ctx, check=False)
    csign = _cochain_block_signs(r)
    Ya = Matrix.identity(ring, a)
    terms, diffs = [], []
    for d in skeleton.degrees():
        terms.append(PY.power(a * len(skeleton.labels[d])))
    for d in range(skeleton.lo + 1, skeleton.hi + 1):
        grid = []
        for I in skeleton.labels[d]:
            row = []
            for J in skeleton.labels[d - 1]:
                c = csign.get((J, I))
                if c is None:
                    row.append(None)
                    continue
                (j,) = tuple(I - J)
                op = Matrix.scalar(ring, ctx.elements[j], PY.generators) - u_row(PY, j)
                s = -(-1) ** d * c
                blk = Ya.kron(op)
                row.append(blk if s == 1 else -blk)
            grid.append(row)
        diffs.append(block_matrix(ring, grid, [per] * len(skeleton.labels[d]),
                                  [per] * len(skeleton.labels[d - 1])))
    Mid = ChainComplex(ring, skeleton.lo, terms, diffs, FpModule.free(ring, per), False,
                       skeleton.labels)
    Xc = koszul_xu_cochain(ctx, X, n, check=False)
    A = _hom_with_labels(Xc, Y, FpModule.free(ring, per))
    B = koszul_xu_chain(ctx, H, n, check=False)

    def to_mid(idx):
        mono, rest = divmod(idx, a * g)
        t, s = divmod(rest, g)
        return t * size * g + mono * g + s

    def mid_to_b(idx):
        t, rest = divmod(idx, size * g)
        mono, s = divmod(rest, g)
        return mono * a * g + t * g + s

    P1, P2 = _perm(ring, per, to_mid), _perm(ring, per, mid_to_b)
    f1 = signed_label_map(A, Mid, lambda I: I, lambda _n, _I: P1)
    f2 = signed_label_map(Mid, B, lambda I: I, lambda _n, _I: P2)
    certify_iso(f1, "Hom_R(K(x-U; X[U^-1]), Y) -> Hom_R[U](K(x-U; X[U]), Y[[U]])")
    certify_iso(f2, "Hom_R[U](K(x-U; X[U]), Y[[U]]) -> K(x-U; Hom(X, Y)[[U]])")
    QX = inverse_poly_module(X, r, n)
    eg = Matrix.identity(ring, g)
    _check_intertwining(f1, lambda d, i: _u_action(A, d, u_row(QX, i).T.kron(eg)),
                        lambda d, i: _u_action(Mid, d, Ya.kron(u_row(PY, i))), r, "first isomorphism")
    _check_intertwining(f2, lambda d, i: _u_action(Mid, d, Ya.kron(u_row(PY, i))),
                        lambda d, i: _u_action(B, d, u_row(PH, i)), r, "second isomorphism")
    art["signsFirst"] = f1.signs
    art["signsSecond"] = f2.signs
    art["X"] = f"R^{a}"
    return "explicit isomorphisms with U-action"


def _dual_module(M: FpModule) -> FpModule:
    """Hom_R(M, R) for R = Z/N, presented on a kernel basis."""
    flat = FlatModule.of(M)
    be, base, D = flat.be, flat.base, flat.dim
    if flat.rel.shape[0] == 0:
        return FpModule.free(base, D)
    ker = be.kernel(np.ascontiguousarray(flat.rel.T))
    gens = np.ascontiguousarray(ker[:, :D]) if ker.shape[0] else be.zeros(0, D)
    sq = Subquotient(be, D, gens, be.zeros(0, D))
    return FpModule(base, sq.m, as_matrix(base, sq.L) if sq.L.shape[0] else None, check=False)


def _hom_to_ring(be, sq: Subquotient) -> ModuleClassification:
    """Classification of Hom(A, R) for A = R^m / span(L), R = Z/N."""
    m = sq.m
    if m == 0:
        return Subquotient(be, 0, be.zeros(0, 0), be.zeros(0, 0)).classification
    if sq.L.shape[0] == 0:
        return Subquotient(be, m, be.eye(m), be.zeros(0, m)).classification
    ker = be.kernel(np.ascontiguousarray(sq.L.T))
    gens = np.ascontiguousarray(ker[:, :m]) if ker.shape[0] else be.zeros(0, m)
    return Subquotient(be, m, gens, be.zeros(0, m)).classification


def check_dual7(inst: Instance, art: dict) -> str:
    _residue_or_unsupported(inst, "the injective-dual comparison")
    ctx, M = inst.ctx, inst.M
    r = ctx.r
    try:
        C = cech_complex_finite(ctx, M)
    except (TooLarge, InfiniteRing) as exc:
        raise UnsupportedInstance(str(exc)) from None
    D = _dual_module(M)
    ext = limits(xu_dual_system(ctx, D, inst.config.n_max))
    require(ext.stabilized, "Ext side did not stabilize")
    be = backend_for(inst.ring)
    out = {}
    for i in range(r + 1):
        sq = C.complex.homology_subquotient(-i)
        left = _hom_to_ring(be, sq)
        right = ext.value(r - i)
        out[str(i)] = {"HomH": left.render(), "Ext": right.render()}
        require(left == right, "Hom of Čech cohomology differs from the Ext side", degree=i,
                hom=left, ext=right)
    art["degrees"] = out
    art["dual"] = D.classify().render()
    return "classification equality"


def _module_from_subquotient(base: Ring, sq: Subquotient) -> FpModule:
    return FpModule(base, sq.m, as_matrix(base, sq.L) if sq.L.shape[0] else None, check=False)


def module_from_classification(ring: Ring, c: ModuleClassification) -> FpModule:
    orders = [ring.modulus] * c.free_rank + [int(t) for t in c.torsion]
    g = len(orders)
    if g == 0:
        return FpModule(ring, 0)
    rows = [[o if i == j else 0 for j in range(g)] for i, o in enumerate(orders)]
    return FpModule(ring, g, Matrix.from_rows(ring, rows, g), check=False)


def check_enl1(inst: Instance, art: dict) -> str:
    _residue_or_unsupported(inst, "the enlargement sequences")
    ctx, M = inst.ctx, inst.M
    if inst.y is None:
        raise UnsupportedInstance("enlargement needs an extra element y")
    n = inst.config.n
    base = inst.ring
    cy = SequenceContext(base, [inst.y])
    big = ctx.extend(inst.y)
    # chain side
    Kx = koszul_xu_chain(ctx, M, n, check=False)
    Kxy = koszul_xu_chain(big, M, n, check=False)
    chain = {}
    for i in range(0, big.r + 1):
        Ai = _module_from_subquotient(base, Kx.homology_subquotient(i)) if i <= ctx.r else FpModule(base, 0)
        Aim = _module_from_subquotient(base, Kx.homology_subquotient(i - 1)) if 0 <= i - 1 <= ctx.r \
            else FpModule(base, 0)
        left = koszul_xu_chain(cy, Ai, n, check=False).homology(0).cardinality if Ai.generators else 1
        right = koszul_xu_chain(cy, Aim, n, check=False).homology(1).cardinality if Aim.generators else 1
        mid = Kxy.homology(i).cardinality
        chain[str(i)] = [left, mid, right]
        require(mid == left * right, "chain sequence is not exact", degree=i, left=left, middle=mid,
                right=right)
    Cx = koszul_xu_cochain(ctx, M, n, check=False)
    Cxy = koszul_xu_cochain(big, M, n, check=False)
    cochain = {}
    for i in range(0, big.r + 1):
        Bi = _module_from_subquotient(base, Cx.homology_subquotient(-i)) if i <= ctx.r else FpModule(base, 0)
        Bim = _module_from_subquotient(base, Cx.homology_subquotient(-(i - 1))) if 0 <= i - 1 <= ctx.r \
            else FpModule(base, 0)
        left = koszul_xu_cochain(cy, Bim, n, check=False).homology(-1).cardinality if Bim.generators else 1
        right = koszul_xu_cochain(cy, Bi, n, check=False).homology(0).cardinality if Bi.generators else 1
        mid = Cxy.homology(-i).cardinality
        cochain[str(i)] = [left, mid, right]
        require(mid == left * right, "cochain sequence is not exact", degree=i, left=left, middle=mid,
                right=right)
    art["chain"] = chain
    art["cochain"] = cochain
    return "cardinality identity"


def check_enl2(inst: Instance, art: dict) -> str:
    _residue_or_unsupported(inst, "the enlargement sequences")
    ctx, M = inst.ctx, inst.M
    if inst.y is None:
        raise UnsupportedInstance("enlargement needs an extra element y")
    ring = inst.ring
    n_max = inst.config.n_max
    cy = SequenceContext(ring, [inst.y])
    big = ctx.extend(inst.y)
    for c, label in ((ctx, "a"), (big, "a+y"), (cy, "y")):
        v = proregular_check(c, M, 2, 6)
        if not v.verified:
            raise UnsupportedInstance(f"pro-regularity of {label} not verified")
    lam_a = derived_completion_koszul(ctx, M, n_max)
    lam_ay = derived_completion_koszul(big, M, n_max)
    h_a = local_cohomology_koszul(ctx, M, n_max)
    h_ay = local_cohomology_koszul(big, M, n_max)
    for res in (lam_a, lam_ay, h_a, h_ay):
        require(res.stabilized, "a limit did not stabilize")
    oracle = cech_complex_finite(big, M).complex.cohomology()
    for d, c in oracle.items():
        require(h_ay.value(d) == c, "local cohomology differs from the oracle", degree=d)
    rows = {}
    for i in range(0, big.r + 1):
        Li = lam_a.value(i) if i in lam_a.values else None
        Lim = lam_a.value(i - 1) if (i - 1) in lam_a.values else None
        left = derived_completion_koszul(cy, module_from_classification(ring, Li), n_max).value(0).cardinality \
            if Li is not None and not Li.is_zero else 1
        right = derived_completion_koszul(cy, module_from_classification(ring, Lim), n_max).value(1).cardinality \
            if Lim is not None and not Lim.is_zero else 1
        mid = lam_ay.value(i).cardinality
        require(mid == left * right, "completion sequence is not exact", degree=i, left=left, middle=mid,
                right=right)
        Hi = h_a.value(i) if i in h_a.values else None
        Him = h_a.value(i - 1) if (i - 1) in h_a.values else None
        hl = local_cohomology_koszul(cy, module_from_classification(ring, Him), n_max).value(1).cardinality \
            if Him is not None and not Him.is_zero else 1
        hr = local_cohomology_koszul(cy, module_from_classification(ring, Hi), n_max).value(0).cardinality \
            if Hi is not None and not Hi.is_zero else 1
        hm = h_ay.value(i).cardinality
        require(hm == hl * hr, "local cohomology sequence is not exact", degree=i, left=hl, middle=hm,
                right=hr)
        rows[str(i)] = {"completion": [left, mid, right], "localCohomology": [hl, hm, hr]}
    art["degrees"] = rows
    return "cardinality identity against independent limits and the oracle"


def check_enl4(inst: Instance, art: dict) -> str:
    _finite_or_unsupported(inst, "the five-term sequence")
    M = inst.M
    y = inst.y if inst.y is not None else inst.ctx.elements[0]
    cy = SequenceContext(inst.ring, [y])
    flat = FlatModule.of(M)
    be, D = flat.be, flat.dim
    T, ev = hom_from_localization(M, y)
    sys = xu_systems(cy, M, max(inst.config.n_max, 2), "chain")
    res = limits(sys)
    require(res.stabilized, "completion did not stabilize")
    k = sys.lag
    s = 2 * k
    whole = flat.whole()
    Tsq = Subquotient(be, T.generators, be.eye(T.generators),
                      be.asarray(T.relations.data) if T.relations.rows else be.zeros(0, T.generators))
    ev_map = Tsq.induced(whole, be.asarray(ev.data)) if T.generators else None
    ker_ev = ev_map.kernel().cardinality if ev_map is not None else 1
    require(res.value(1).cardinality == ker_ev, "Lambda_1 differs from ker(Hom(R_y, M) -> M)",
            lam1=res.value(1), kernel=ker_ev)
    stage = sys.stage(s)
    emb = be.zeros(D, stage.flat_dim(0))
    if D:
        emb[:, :D] = be.eye(D)
    c = whole.induced(stage.homology_subquotient(0), emb)
    require(stage.homology(0) == res.value(0), "stage H_0 differs from Lambda_0")
    if ev_map is not None:
        require(ev_map.compose(c).is_zero(), "Hom(R_y, M) -> M -> Lambda_0 is not zero")
    img_ev = ev_map.image().cardinality if ev_map is not None else 1
    require(c.kernel().cardinality == img_ev, "sequence not exact at M", kernel=c.kernel().cardinality,
            image=img_ev)
    # Ext^1(R_y, M) from the truncated resolution R[U]_(<n) -> R[U]_(<n+1)
    ext_stages = []
    ker_orders = []
    Y = flat.action(M, y)
    for n in range(1, s + 1):
        rho = be.zeros((n + 1) * D, n * D)
        for i in range(n):
            rho[i * D:(i + 1) * D, i * D:(i + 1) * D] = be.eye(D)
            rho[(i + 1) * D:(i + 2) * D, i * D:(i + 1) * D] = be.neg(Y)
        src = Subquotient(be, (n + 1) * D, be.eye((n + 1) * D), _blocks_rel(be, flat.rel, n + 1, D))
        tgt = Subquotient(be, n * D, be.eye(n * D), _blocks_rel(be, flat.rel, n, D))
        f = src.induced(tgt, rho)
        ext_stages.append(f.cokernel().cardinality)
        ker_orders.append(f.kernel().cardinality)
    require(all(e == 1 for e in ext_stages), "Ext stage is not zero", stages=ext_stages)
    ext1 = 1
    require(c.cokernel().cardinality == ext1, "Lambda_0 -> Ext^1 is not exact", cokernel=c.cokernel())
    art.update({"Lambda1": res.value(1).render(), "HomRy": T.classify().render(), "M": M.classify().render(),
                "Lambda0": res.value(0).render(), "Ext1": "0", "extStages": ext_stages,
                "kernelStages": ker_orders})
    return "maps at M, cardinalities at the ends"


def _blocks_rel(be, rel, k: int, D: int):
    if rel.shape[0] == 0:
        return be.zeros(0, k * D)
    out = be.zeros(k * rel.shape[0], k * D)
    for i in range(k):
        out[i * rel.shape[0]:(i + 1) * rel.shape[0], i * D:(i + 1) * D] = rel
    return out


def check_comp6(inst: Instance, art: dict) -> str:
    _single_or_unsupported(inst, "the split diagram")
    M = inst.M
    x = inst.ctx.elements[0]
    n = inst.config.n
    sd = split_diagram(x, M, n, check=False)
    for name, f in (("i", sd.i), ("p", sd.p), ("s", sd.s)):
        certify_chain_map(f, name)
    require(sd.E.is_exact(), "E is not exact")
    from .complexes import _module_subquotient
    for d in sd.Lcheck.degrees():
        i_mod = _module_subquotient(sd.E, d).induced(_module_subquotient(sd.Lcheck, d), sd.i.flat(d))
        p_mod = _module_subquotient(sd.Lcheck, d).induced(_module_subquotient(sd.L, d), sd.p.flat(d))
        require(i_mod.is_injective(), "column map i not injective", degree=d)
        require(p_mod.is_surjective(), "column map p not surjective", degree=d)
        require(i_mod.compose(p_mod).is_zero(), "p o i is not zero", degree=d)
        require(p_mod.kernel().cardinality == i_mod.image().cardinality, "column not exact in the middle",
                degree=d)
    certify_qiso(sd.p, "Lcheck -> L")
    sp = sd.s.compose(sd.p)
    for d in sd.L.degrees():
        require(sp.component(d) == Matrix.identity(inst.ring, sd.L.gens(d)), "p o s is not the identity",
                degree=d)
    art["L"] = homology_json(sd.L)
    return "termwise exact columns + cone exactness + section"


def _lag(inst: Instance) -> int:
    from .adic import sequence_lag
    k, _ = sequence_lag(inst.ctx, inst.M)
    return k if k is not None else 1


def check_comp5(inst: Instance, art: dict) -> str:
    _finite_or_unsupported(inst, "the Čech comparison")
    _single_or_unsupported(inst, "the L resolution")
    ctx, M = inst.ctx, inst.M
    x = ctx.elements[0]
    C = cech_complex_finite(ctx, M)
    k = _lag(inst)
    n = max(inst.config.n, k)
    L, L2 = adic.resolution_L(x, M, n), adic.resolution_L(x, M, n + k)
    f, f2 = C.resolution_map(n, L), C.resolution_map(n + k, L2)
    certify_chain_map(f, f"L window {n} -> Čech")
    certify_chain_map(f2, f"L window {n + k} -> Čech")
    t = adic.resolution_L_inclusion(x, M, n, n + k, L, L2)
    same_on_homology(adic_flat_plain(t).compose(f2), f, "window maps against inclusion")
    require(f.induced(0).is_iso(), "H^0 of the window is not Gamma", stage=n)
    g1, t1 = f.induced(-1), t.induced(-1)
    require(g1.is_surjective(), "degree one map is not surjective")
    require(g1.kernel().cardinality == t1.kernel().cardinality, "degree one kernel is not the transition kernel")
    art["window"] = homology_json(L)
    art["cech"] = homology_json(C.complex)
    art["stages"] = [n, n + k]
    return "chain maps + colimit-level isomorphism"


def adic_flat_plain(f: ChainMap) -> ChainMap:
    from .koszul import flatten_complex
    S, T = flatten_complex(f.source), flatten_complex(f.target)
    return ChainMap(S, T, {n: as_matrix(S.ring, f.flat(n)) for n in f.source.degrees()}, check=False)


def check_coh8(inst: Instance, art: dict) -> str:
    _finite_or_unsupported(inst, "the Čech comparison")
    ctx, M = inst.ctx, inst.M
    C = cech_complex_finite(ctx, M)
    k = _lag(inst)
    n = max(inst.config.n, k)
    _window_certificate(C, ctx, M, n, n + k, art)
    X = koszul_xu_cochain(ctx, M, n, check=False)
    g = C.window_map(n, X)
    for d in g.source.degrees():
        if d == 0:
            require(g.induced(d).is_iso(), "H^0 of the window is not Gamma", stage=n)
    art["cech"] = homology_json(C.complex)
    return "chain maps + colimit-level isomorphism"


def check_hoc1(inst: Instance, art: dict) -> str:
    _single_or_unsupported(inst, "the L resolution")
    ctx, M = inst.ctx, inst.M
    ring = inst.ring
    x = ctx.elements[0]
    n = inst.config.n
    L = adic.resolution_L(x, M, n)
    K = koszul_xu_cochain(ctx, M, n, check=False)
    f = ChainMap(L, K, {d: Matrix.identity(ring, L.gens(d)) for d in L.degrees()}, check=False)
    certify_iso(f, "L (x) M -> K(x-U; M[U^-1])")
    LR = adic.resolution_L(x, FpModule.free(ring, 1), n)
    H = hom_complex(LR, single_term(M))
    B = koszul_xu_chain(ctx, M, n, check=False)
    found = None
    for sign in (1, -1):
        eye0 = Matrix.identity(ring, H.gens(0))
        eye1 = Matrix.identity(ring, H.gens(1))
        h = ChainMap(H, B, {0: eye0 if sign == 1 else -eye0, 1: eye1}, check=False)
        if h.is_chain_map():
            found = (sign, h)
            break
    require(found is not None, "no sign makes Hom(L, M) -> K(x-U; M[[U]]) a chain map")
    certify_iso(found[1], "Hom(L, M) -> K(x-U; M[[U]])")
    art["degreeZeroSign"] = found[0]
    return "explicit isomorphisms"


def check_prel7(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    x = inst.y if inst.y is not None else ctx.elements[0]
    X = koszul_chain(ctx, M, 1, check=False)
    pairs = prel7_exact_pairs(x, X)
    for d, info in pairs.items():
        require(info["ok"], "homology pair is not exact", degree=d, quotient=info["quotient"],
                torsion=info["torsion"], middle=info["middle"])
    art["degrees"] = {str(d): {"quotient": v["quotient"].render(), "torsion": v["torsion"].render(),
                               "middle": v["middle"].render()} for d, v in sorted(pairs.items())}
    return "homology-level exact pairs"


def check_telescope(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    N = int(inst.config.options.get("N", max(inst.config.n, 1)))
    sys = koszul_systems(ctx, M, N, "cochain")
    T, c = tel_mic_trunc(sys, N, "telescope")
    art["cone"] = certify_qiso(c, "telescope -> stage N")
    art["N"] = N
    return "cone exactness"


def check_microscope(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    N = int(inst.config.options.get("N", max(inst.config.n, 1)))
    sys = koszul_systems(ctx, M, N, "chain")
    F, c = tel_mic_trunc(sys, N, "microscope")
    art["cone"] = certify_qiso(c, "stage N -> microscope")
    art["N"] = N
    return "cone exactness"


def check_weak9(inst: Instance, art: dict) -> str:
    ctx, M = inst.ctx, inst.M
    n0 = min(inst.config.n_max, 4)
    for n in range(1, n0 + 1):
        f = xu_chain_comparison(ctx, M, n, check=False)
        require(f.induced(0).is_iso(), "H_0 stage is not M/x^n M", stage=n)
    if not inst.finite:
        art["stages"] = {str(n): koszul_xu_chain(ctx, M, n, check=False).homology(0).render()
                         for n in range(1, n0 + 1)}
        return "stagewise isomorphisms"
    dc = derived_completion_koszul(ctx, M, inst.config.n_max)
    kl = limits(koszul_systems(ctx, M, inst.config.n_max, "chain"))
    require(dc.stabilized and kl.stabilized, "limits did not stabilize")
    require(dc.value(0) == kl.value(0), "H_0 of the avatar differs from the completion",
            avatar=dc.value(0), completion=kl.value(0))
    art["Lambda0"] = dc.value(0).render()
    art["identification"] = dc.identification
    return "stagewise isomorphisms + limit equality"


@dataclass(frozen=True)
class CheckSpec:
    fn: Callable
    statement: str


REGISTRY: dict[str, CheckSpec] = {
    "weak5": CheckSpec(check_weak5, "K(x-U; M[U]/U^n) -> K(x^n; M) is a quasi-isomorphism compatible with n"),
    "coh2": CheckSpec(check_coh2, "K(x-U; M[U^-1] window n) -> K^(x^n; M) is a quasi-isomorphism compatible with n"),
    "coh3_oracle": CheckSpec(check_coh3_oracle, "stabilized avatar cohomology equals Čech cohomology"),
    "weak6": CheckSpec(check_weak6, "|H_i(avatar)| = |lim1 H_(i+1)(x^n)| * |lim H_i(x^n)|"),
    "weak7": CheckSpec(check_weak7, "pro-zero avatar homology matches pro-regularity; H_0 maps onto the completion"),
    "hoc2": CheckSpec(check_hoc2, "H_1 of the avatar is ker(Hom(R_x, M) -> M); H_0 maps onto the completion"),
    "hoc3": CheckSpec(check_hoc3, "K_(x-U) and K^(x-U)[r] on the same module are isomorphic"),
    "dual0": CheckSpec(check_dual0, "Hom(R[U^-1], M) = M[[U]] as R[U]-modules"),
    "dual1": CheckSpec(check_dual1, "K(x-U; M[[U]]) = Hom(K^(x-U; R[U^-1]), M)"),
    "dual2": CheckSpec(check_dual2, "Hom(K^(x-U; X[U^-1]), Y) = K(x-U; Hom(X, Y)[[U]])"),
    "dual3": CheckSpec(check_dual3, "K(x-U; Hom(X, Y)[[U]]) = Hom(X, K(x-U; Y[[U]]))"),
    "dual6": CheckSpec(check_dual6, "Hom_R(K^(x-U; X[U^-1]), Y) = Hom_R[U](K^(x-U; X[U]), Y[[U]]) = K(x-U; Hom(X, Y)[[U]])"),
    "dual7": CheckSpec(check_dual7, "Hom(H^i(Č(M)), R) = Ext^(r-i)(M[U]/(x-U), R[[U]]) over Z/N"),
    "enl1": CheckSpec(check_enl1, "adding y gives short exact sequences of truncated Koszul (co)homology"),
    "enl2": CheckSpec(check_enl2, "short exact sequences for completion and local cohomology when adding y"),
    "enl4": CheckSpec(check_enl4, "0 -> Lambda_1 -> Hom(R_y, M) -> M -> Lambda_0 -> Ext^1(R_y, M) -> 0"),
    "comp5": CheckSpec(check_comp5, "the L resolution maps onto the Čech complex with the same colimit cohomology"),
    "coh8": CheckSpec(check_coh8, "U^-a |-> x^-(a+1) maps the inverse-polynomial window onto the Čech complex"),
    "comp6": CheckSpec(check_comp6, "E -> Lcheck -> L has exact columns, Lcheck -> L is a quasi-isomorphism and splits"),
    "hoc1": CheckSpec(check_hoc1, "L (x) M = K^(x-U; M[U^-1]) and Hom(L, M) = K(x-U; M[[U]])"),
    "prel7": CheckSpec(check_prel7, "0 -> H_n(X)/x -> H_n(K(x; X)) -> 0 :_(H_(n-1)(X)) x -> 0"),
    "telescope": CheckSpec(check_telescope, "the truncated telescope is quasi-isomorphic to the last stage"),
    "microscope": CheckSpec(check_microscope, "the last stage is quasi-isomorphic to the truncated microscope"),
    "weak9": CheckSpec(check_weak9, "H_0 of the avatar is the completion of M"),
}


def run_check(check_id: str, instance: InstanceConfig | dict) -> CheckReport:
    if check_id not in REGISTRY:
        raise UnknownCheck(check_id)
    cfg = instance if isinstance(instance, InstanceConfig) else InstanceConfig.from_json(instance)
    spec = REGISTRY[check_id]
    art: dict = {}
    start = time.perf_counter()
    base = dict(check_id=check_id, statement=spec.statement, instance=cfg.to_json(),
                description=cfg.describe())
    try:
        inst = cfg.build()
        mode = spec.fn(inst, art)
        report = CheckReport(**base, verdict=PASS, mode=mode or "", artifacts=_jsonable(art))
    except CheckFailed as exc:
        report = CheckReport(**base, verdict=FAIL, witness=_jsonable(exc.witness), artifacts=_jsonable(art))
    except (UnsupportedInstance, InfiniteRing, TooLarge) as exc:
        report = CheckReport(**base, verdict=INCONCLUSIVE,
                             reason=f"UnsupportedInstance: {exc}", artifacts=_jsonable(art))
    report.elapsed = time.perf_counter() - start
    return report


def _run_pair(args) -> CheckReport:
    check_id, cfg = args
    return run_check(check_id, cfg)


def run_suite(matrix: list, check_ids: list | None = None, parallelism: int = 1) -> SuiteReport:
    """Every check on every instance; the report order is (instance, check) regardless of parallelism."""
    cfgs = [c if isinstance(c, InstanceConfig) else InstanceConfig.from_json(c) for c in matrix]
    ids = list(check_ids) if check_ids is not None else list(REGISTRY)
    for cid in ids:
        if cid not in REGISTRY:
            raise UnknownCheck(cid)
    jobs = []
    for cfg in cfgs:
        per = cfg.options.get("checks")
        for cid in ids:
            if per is not None and cid not in per:
                continue
            jobs.append((cid, cfg))
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            reports = list(pool.map(_run_pair, jobs))
    else:
        reports = [_run_pair(j) for j in jobs]
    return SuiteReport(reports)


_ONE_ELEMENT = ["hoc1", "hoc2", "comp5", "comp6"]
_Z_MOD_N = ["dual7", "enl1", "enl2"]


def default_suite() -> list[InstanceConfig]:
    """The instance matrix of the acceptance run; each instance lists the checks that apply."""
    every = list(REGISTRY)
    finite_r2 = [c for c in every if c not in _ONE_ELEMENT + ["enl1", "enl2"]]
    infinite = [c for c in every if c not in _ONE_ELEMENT + _Z_MOD_N + ["coh3_oracle", "coh8", "enl4"]]
    mixed = {"generators": 2, "relations": [["4", "2"]]}
    return [
        InstanceConfig("Z/12", None, ("2",), "3", options={"checks": every}),
        InstanceConfig("Z/12", mixed, ("2",), "3", options={"checks": every}),
        InstanceConfig("Z/12", None, ("2", "3"), options={"checks": finite_r2}),
        InstanceConfig("Z/4", {"kind": "quotient", "by": ["2"]}, ("2",), "3",
                       options={"checks": every}),
        InstanceConfig("Z/4[t]/(t^2)", None, ("[0,1]",),
                       options={"checks": [c for c in every if c not in _Z_MOD_N]}),
        InstanceConfig("Z", None, ("2",), options={"checks": infinite + ["hoc1", "hoc2", "comp6"]}),
    ]
