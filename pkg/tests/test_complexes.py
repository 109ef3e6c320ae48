import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koszulcech.complexes import (ChainMap, NonFreeSource, NotAChainMap, NotAComplex, cone, fibre,
                                  hom_complex, identity_map, long_exact_sequence_ranks,
                                  make_complex, quasi_iso_check, scalar_map, shift, single_term,
                                  tensor_complexes, zero_complex, zero_map)
from koszulcech.linalg import FpModule, Matrix
from koszulcech.rings import Integers, IntegersModN, PrimeField
from oracles import homology_size_brute, row_span

ZZ = Integers()


def times(ring, c):
    return make_complex(ring, [1, 1], [[[c]]])


def render(X):
    return {n: c.render() for n, c in X.homology().items()}


def test_make_complex_examples():
    times(ZZ, 2)
    with pytest.raises(NotAComplex) as err:
        make_complex(ZZ, [1, 1, 1], [[[2]], [[2]]])
    assert err.value.degree == 2
    X = make_complex(IntegersModN(4), [1, 1, 1], [[[2]], [[2]]])
    assert render(X) == {0: "Z/2", 1: "0", 2: "Z/2"}


def test_shift_roundtrip_and_homology():
    X = make_complex(IntegersModN(4), [1, 2, 1], [[[2], [0]], [[2, 2]]])
    Y = shift(shift(X, 1), -1)
    assert Y.lo == X.lo and all(a == b for a, b in zip(Y.diffs, X.diffs))
    for k in (-2, 1, 3):
        S = shift(X, k)
        for n in X.degrees():
            assert S.homology(n + k) == X.homology(n)
    Z = shift(zero_complex(ZZ), 5)
    assert Z.is_exact() and not Z.terms


def test_shift_flips_sign_on_odd():
    X = times(ZZ, 2)
    assert shift(X, 1).d(2) == -X.d(1)
    assert shift(X, 2).d(3) == X.d(1)


def test_cone_examples():
    X = times(IntegersModN(6), 2)
    assert cone(identity_map(X)).complex.is_exact()
    Y = make_complex(IntegersModN(6), [1], [])
    C = cone(zero_map(X, Y)).complex
    # Y + X[1]
    assert render(C) == {0: "Z/6", 1: "Z/2", 2: "Z/2"}
    one = single_term(FpModule.free(ZZ, 1))
    phi = ChainMap(one, one, {0: Matrix.from_rows(ZZ, [[2]])})
    assert render(cone(phi).complex) == {0: "Z/2", 1: "0"}


def test_fibre_examples():
    one = single_term(FpModule.free(ZZ, 1))
    phi = ChainMap(one, one, {0: Matrix.from_rows(ZZ, [[2]])})
    F = fibre(phi).complex
    C = cone(phi).complex
    assert F.lo == C.lo - 1 and [t.generators for t in F.terms] == [t.generators for t in C.terms]
    # kernel of 2 is 0 in degree 0, cokernel Z/2 in degree -1
    assert render(F) == {-1: "Z/2", 0: "0"}
    assert fibre(identity_map(times(ZZ, 3))).complex.is_exact()


def test_cone_ses_maps_are_chain_maps():
    X = make_complex(IntegersModN(8), [1, 2, 1], [[[2], [4]], [[2, 7]]])
    c = cone(scalar_map(X, 2))
    c.inj.validate()
    c.proj.validate()
    assert c.inj.compose(c.proj).induces_zero()
    f = fibre(scalar_map(X, 2))
    f.inj.validate()
    f.proj.validate()


def test_chain_map_validation():
    X = times(ZZ, 2)
    with pytest.raises(NotAChainMap):
        ChainMap(X, X, {0: Matrix.from_rows(ZZ, [[1]]), 1: Matrix.from_rows(ZZ, [[0]])})


def test_quasi_iso_examples():
    X = times(IntegersModN(4), 2)
    ok, witness = quasi_iso_check(identity_map(X))
    assert ok and all(c.is_zero for c in witness.values())
    ok, _ = quasi_iso_check(zero_map(X, X))
    assert not ok


def test_tensor_unit_and_ranks():
    R = IntegersModN(12)
    X = make_complex(R, [1, 2, 1], [[[2], [3]], [[3, -2]]])
    unit = make_complex(R, [1], [])
    T = tensor_complexes(X, unit)
    assert T.lo == X.lo and all(a == b for a, b in zip(T.diffs, X.diffs))
    Y = times(R, 4)
    T = tensor_complexes(X, Y)
    for n in T.degrees():
        expect = sum(X.gens(i) * Y.gens(n - i) for i in X.degrees())
        assert T.gens(n) == expect


def test_tensor_with_coefficients():
    M = FpModule.cyclic(ZZ, 6)
    X = times(ZZ, 2)
    assert render(tensor_complexes(X, single_term(M))) == {0: "Z/2", 1: "Z/2"}


def test_hom_examples():
    R = IntegersModN(12)
    Y = make_complex(R, [1, 2, 1], [[[2], [3]], [[3, -2]]])
    unit = make_complex(R, [1], [])
    H = hom_complex(unit, Y)
    assert H.lo == Y.lo and all(a == b for a, b in zip(H.diffs, Y.diffs))
    X = times(R, 4)
    H = hom_complex(X, Y)
    assert H.gens(0) == sum(X.gens(i) * Y.gens(i) for i in X.degrees())
    with pytest.raises(NonFreeSource):
        hom_complex(single_term(FpModule.cyclic(R, 2)), Y)


def test_hom_into_module():
    # Hom(Z --2--> Z, Z/6): kernel and cokernel of 2 on Z/6
    X = times(ZZ, 2)
    H = hom_complex(X, single_term(FpModule.cyclic(ZZ, 6)))
    assert render(H) == {-1: "Z/2", 0: "Z/2"}


@pytest.mark.parametrize("c,expected", [(2, {0: "Z/2", 1: "Z/2"}), (0, {0: "Z/4", 1: "Z/4"}),
                                        (3, {0: "0", 1: "0"})])
def test_koszul_one_element_homology(c, expected):
    assert render(times(IntegersModN(4), c)) == expected


def _left_kernel_rows(d, n, rows):
    return [v for v in itertools.product(range(n), repeat=rows)
            if not np.any(np.array(v).dot(np.array(d)) % n)]


@st.composite
def small_complexes(draw):
    n = draw(st.integers(2, 8))
    a, b, c = (draw(st.integers(1, 3)) for _ in range(3))
    d1 = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=a, max_size=a), min_size=b, max_size=b))
    ker = _left_kernel_rows(d1, n, b)
    d2 = [draw(st.sampled_from(ker)) for _ in range(c)]
    return n, [a, b, c], [d1, [list(v) for v in d2]]


@settings(max_examples=80, deadline=None)
@given(small_complexes())
def test_homology_matches_enumeration(data):
    n, ranks, (d1, d2) = data
    X = make_complex(IntegersModN(n), ranks, [d1, d2])
    assert X.homology(0).cardinality == homology_size_brute(d1, None, n, ranks[0])
    assert X.homology(1).cardinality == homology_size_brute(d2, d1, n, ranks[1])
    assert X.homology(2).cardinality == homology_size_brute([], d2, n, ranks[2])


@settings(max_examples=60, deadline=None)
@given(small_complexes())
def test_cone_long_exact_sequence(data):
    n, ranks, diffs = data
    X = make_complex(IntegersModN(n), ranks, diffs)
    for c in range(n):
        assert long_exact_sequence_ranks(cone(scalar_map(X, c)))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.data())
def test_euler_characteristic_over_fields(p, data):
    F = PrimeField(p)
    a, b = data.draw(st.integers(1, 3)), data.draw(st.integers(1, 3))
    d1 = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=a, max_size=a),
                            min_size=b, max_size=b))
    X = make_complex(F, [a, b], [d1])
    H = X.homology()
    assert H[0].free_rank - H[1].free_rank == a - b
    image = len(row_span(d1, p, a))
    assert p ** H[0].free_rank * image == p ** a


@settings(max_examples=40, deadline=None)
@given(small_complexes(), small_complexes())
def test_tensor_and_hom_are_complexes(x, y):
    if x[0] != y[0]:
        return
    R = IntegersModN(x[0])
    X = make_complex(R, x[1], x[2])
    Y = make_complex(R, y[1], y[2])
    tensor_complexes(X, Y).validate()
    hom_complex(X, Y).validate()


def test_two_term_brute_span():
    # homology of Z/8 --4--> Z/8 in degree 0 is the quotient by {0,4}
    X = times(IntegersModN(8), 4)
    assert X.homology(0).cardinality == 8 // len(row_span([[4]], 8, 1))
