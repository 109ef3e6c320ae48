"""The acceptance run: one test per criterion, each with its time bound.

Every test prints a single PASS/FAIL line (bypassing capture) so that
`pytest -v tests/test_acceptance.py` doubles as the acceptance report.
"""
import os
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from koszulcech.adic import ProObject, koszul_xu_chain, u_power_system
from koszulcech.cech import (VerifiedUpTo, cech_cohomology_oracle, cech_complex_finite,
                             derived_completion_koszul, local_cohomology_koszul, proregular_check)
from koszulcech.complexes import quasi_iso_check
from koszulcech.koszul import SequenceContext
from koszulcech.linalg import Matrix, modn_howell, smith_normal_form
from koszulcech.rings import Integers, IntegersModN, Rationals
from koszulcech.verify import PASS, InstanceConfig, run_suite

from oracles import det, row_span, smith_invariants_from_minors

JOBS = min(4, os.cpu_count() or 1)

# per ring: (zero divisor, unit, nilpotent) and the relation of a 2-generator module.
# In a finite ring a non-zero-divisor is a unit, so "regular" and "unit" coincide.
RINGS = {
    "Z/4": (("2", "3", "0"), [["2", "2"]]),
    "Z/8": (("2", "5", "4"), [["4", "2"]]),
    "Z/12": (("2", "5", "6"), [["4", "2"]]),
    "Z/4[t]/(t^2)": (("[0,1]", "[1,1]", "[2,1]"), [["[0,1]", "[2,0]"]]),
}


def instance_matrix(**truncation):
    out = []
    for ring, ((zd, unit, nil), rel) in RINGS.items():
        for seq in [(zd,), (unit,), (nil,), (zd, unit), (nil, zd), (zd, zd)]:
            for module in (None, {"kind": "quotient", "by": [seq[0]]}, {"generators": 2, "relations": rel}):
                out.append(InstanceConfig(ring, module, seq, **truncation))
    return out


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(k, bound, title):
        info = {}
        start = time.perf_counter()
        try:
            yield info
        except BaseException as exc:
            elapsed = time.perf_counter() - start
            with capsys.disabled():
                print(f"\nFAIL criterion {k} ({title}): {type(exc).__name__} after {elapsed:.2f}s")
            raise
        elapsed = time.perf_counter() - start
        ok = elapsed < bound
        detail = info.get("detail", "")
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k} ({title}): {elapsed:.2f}s < {bound}s"
                  f"{'' if ok else ' violated'}{'; ' + detail if detail else ''}")
        assert ok, f"criterion {k} took {elapsed:.2f}s, bound {bound}s"
    return run


def _all_pass(suite):
    bad = [(r.check_id, r.description, r.witness or r.reason) for r in suite.reports if r.verdict != PASS]
    assert not bad, bad
    return len(suite.reports)


def test_criterion_1_oracle_equivalence(criterion):
    with criterion(1, 60, "stabilized avatar local cohomology equals the Čech oracle") as info:
        count = 0
        for cfg in instance_matrix(n_max=6):
            inst = cfg.build()
            L = local_cohomology_koszul(inst.ctx, inst.M, 6)
            assert L.stabilized, cfg.describe()
            oracle = cech_cohomology_oracle(inst.ctx, inst.M)
            assert {k: L.value(k) for k in L.values} == oracle, cfg.describe()
            count += 1
        info["detail"] = f"{count} instances"


def test_criterion_2_truncated_quasi_isos(criterion):
    with criterion(2, 60, "chain and cochain (x - U) comparisons are quasi-isomorphisms") as info:
        cfgs = [InstanceConfig(c.ring, c.module, c.sequence, n=n, m=m)
                for c in instance_matrix() for n, m in ((1, 2), (2, 4))]
        info["detail"] = f"{_all_pass(run_suite(cfgs, ['weak5', 'coh2'], JOBS))} checks"


def test_criterion_3_derived_completion_stages(criterion):
    with criterion(3, 10, "completion stages over Z and limits over Z/12") as info:
        ZZ = Integers()
        ctx = SequenceContext(ZZ, (ZZ(2),))
        for n in range(1, 7):
            K = koszul_xu_chain(ctx, None, n)
            H = K.homology()
            assert H[0].render() == f"Z/{2 ** n}" and H[1].is_zero
            assert abs(det(K.d(1).payloads())) == 2 ** n
        L = derived_completion_koszul(ctx, None, 6)
        v = L.values[0]
        assert isinstance(v, ProObject)
        assert [s.render() for s in v.stages] == [f"Z/{2 ** n}" for n in range(1, 7)]
        assert L.value(1).is_zero
        R = IntegersModN(12)
        L = derived_completion_koszul(SequenceContext(R, (R(2),)), None, 6)
        assert L.stabilized and L.value(0).render() == "Z/4" and L.value(1).is_zero
        assert all(c.is_zero for c in L.lim1.values())
        info["detail"] = "Z: pro(Z/2..Z/64); Z/12: Lambda_0 = Z/4, Lambda_1 = 0, lim1 = 0"


def _one_element_finite():
    return [c for c in instance_matrix() if len(c.sequence) == 1]


def test_criterion_4_hom_from_localization(criterion):
    with criterion(4, 10, "H_1 = ker(Hom(R_x, M) -> M), pro-zero H_1, H_0 = completion") as info:
        info["detail"] = f"{_all_pass(run_suite(_one_element_finite(), ['hoc2', 'weak7'], JOBS))} checks"


def test_criterion_5_proregularity(criterion):
    with criterion(5, 10, "pro-regularity witnesses and Čech vanishing on Hom(M, Z/N)") as info:
        R = IntegersModN(12)
        v = proregular_check(SequenceContext(R, (R(2),)), None, 4, 8)
        assert v.per_index[1] == VerifiedUpTo({n: n + 2 for n in range(1, 5)})
        residue = [c for c in instance_matrix() if not c.ring.startswith("Z/4[")]
        suite = run_suite(residue, ["weak7"], JOBS)
        _all_pass(suite)
        verified = [r for r in suite.reports if r.artifacts["proregular"]["verified"]]
        assert verified and all("cechOfDual" in r.artifacts for r in verified)
        info["detail"] = f"witness m(n) = n + 2; Čech of the dual checked on {len(verified)} instances"


def test_criterion_6_duality(criterion):
    with criterion(6, 30, "duality isomorphisms with U-intertwining") as info:
        cfgs = [InstanceConfig(ring, module, seq, n=n, m=n + 1)
                for ring in ("Z/4", "Z/12") for seq in (("2",), ("2", "3"))
                for n in (1, 2, 3) for module in (None, {"kind": "quotient", "by": ["2"]})]
        checks = ["dual0", "dual1", "dual2", "dual3", "dual6", "dual7"]
        info["detail"] = f"{_all_pass(run_suite(cfgs, checks, JOBS))} checks"


def test_criterion_7_enlargement(criterion):
    with criterion(7, 30, "short exact sequences when adding y = 3 to (2) over Z/12") as info:
        modules = [None, {"kind": "quotient", "by": ["2"]}, {"generators": 2, "relations": [["4", "2"]]},
                   {"kind": "free", "rank": 2}]
        cfgs = [InstanceConfig("Z/12", m, ("2",), "3") for m in modules]
        info["detail"] = f"{_all_pass(run_suite(cfgs, ['enl1', 'enl2', 'enl4'], JOBS))} checks"


def test_criterion_8_resolution_structure(criterion):
    # the comparison with the Čech complex is certified in its colimit form; the
    # literal stagewise quasi-isomorphism is refuted below
    with criterion(8, 10, "resolution diagrams, split summand, colimit comparison with Čech") as info:
        suite = run_suite(_one_element_finite(), ["comp5", "comp6", "coh8", "hoc1"], JOBS)
        info["detail"] = f"{_all_pass(suite)} checks (colimit form)"


@pytest.mark.xfail(strict=True, reason="H^1 of a truncated stage is M/x^n M while Čech H^1 vanishes")
def test_criterion_8_literal_stage_quasi_iso(capsys):
    R = IntegersModN(12)
    C = cech_complex_finite(SequenceContext(R, (R(2),)))
    ok, cone_h = quasi_iso_check(C.resolution_map(4))
    with capsys.disabled():
        print(f"\nFAIL criterion 8 (literal stagewise quasi-isomorphism, Z/12, x = 2, window 4): "
              f"{'holds' if ok else 'cone homology ' + str({k: v.render() for k, v in cone_h.items()})}")
    assert ok


def test_criterion_9_linear_algebra(criterion):
    with criterion(9, 30, "Smith and Howell forms against brute force") as info:
        rng = random.Random(20240601)
        count = 0
        for _ in range(260):
            rows = [[rng.randint(-9, 9) for _ in range(rng.randint(1, 3))]]
            rows += [[rng.randint(-9, 9) for _ in rows[0]] for _ in range(rng.randint(0, 2))]
            A = Matrix.from_rows(Integers(), rows)
            U, D, V = smith_normal_form(A)
            assert U @ A @ V == D
            diag = [D[i, i].payload for i in range(min(D.shape))]
            assert [abs(d) for d in diag if d] == smith_invariants_from_minors(rows)
            count += 1
        for _ in range(260):
            n = rng.choice([4, 6, 8, 9, 12])
            dim = rng.randint(1, 3)
            rows = [[rng.randrange(n) for _ in range(dim)] for _ in range(rng.randint(1, 4))]
            H = modn_howell(np.array(rows), n)
            assert row_span(H.tolist(), n, dim) == row_span(rows, n, dim)
            count += 1
        assert count >= 500
        info["detail"] = f"{count} random matrices"


def test_criterion_10_inverse_polynomial_grading(criterion):
    with criterion(10, 5, "dim H^1(U^n; Q[U]/U^5) = min(n, 5), injective transitions") as info:
        N = 5
        sys = u_power_system(Rationals(), N, N + 2)
        dims = []
        for n in range(1, N + 3):
            dims.append(sys.stage(n).cohomology()[1].free_rank)
        assert dims == [min(n, N) for n in range(1, N + 3)]
        for n in range(1, N):
            assert sys.transition(n, n + 1).induced(-1).is_injective()
        info["detail"] = f"dims {dims}"
