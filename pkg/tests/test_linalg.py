import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koszulcech.linalg import (FpModule, Matrix, ModBackend, Subquotient, UnsupportedRing,
                               classify_module, howell_form, invariant_factors, kernel_image,
                               modn_diagonalize, modn_howell, modn_is_invertible, modn_kernel, modn_solve,
                               smith_normal_form, solve_linear)
from koszulcech.rings import (Integers, IntegersModN, PrimeField, Rationals,
                              truncated_polynomial_ring)
from oracles import quotient_size, rational_rank, row_span, smith_invariants_from_minors

ZZ = Integers()


def small_int_matrices(max_dim=3, lo=-4, hi=4):
    return st.integers(1, max_dim).flatmap(
        lambda m: st.integers(1, max_dim).flatmap(
            lambda n: st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n),
                               min_size=m, max_size=m)))


def mod_matrices(max_dim=3, max_n=16):
    return st.integers(2, max_n).flatmap(
        lambda n: st.tuples(st.just(n), small_int_matrices(max_dim, 0, n - 1)))


def test_smith_example():
    U, D, V = smith_normal_form(Matrix.from_rows(ZZ, [[2, 4], [6, 8]]))
    assert D == Matrix.from_rows(ZZ, [[2, 0], [0, 4]])
    assert U @ Matrix.from_rows(ZZ, [[2, 4], [6, 8]]) @ V == D


@pytest.mark.parametrize("rows", [[[1, 0], [0, 1]], [[0, 0], [0, 0]], [[0]]])
def test_smith_trivial(rows):
    _, D, _ = smith_normal_form(Matrix.from_rows(ZZ, rows))
    assert D == Matrix.from_rows(ZZ, rows)


def test_smith_rejects_residue_ring():
    with pytest.raises(UnsupportedRing):
        smith_normal_form(Matrix.from_rows(IntegersModN(4), [[2]]))


@settings(max_examples=200, deadline=None)
@given(small_int_matrices())
def test_smith_matches_minors(rows):
    A = Matrix.from_rows(ZZ, rows)
    U, D, V = smith_normal_form(A)
    assert U @ A @ V == D
    diag = [D[i, i].payload for i in range(min(D.shape))]
    nonzero = [d for d in diag if d != 0]
    assert nonzero == smith_invariants_from_minors(rows)
    for a, b in zip(nonzero, nonzero[1:]):
        assert b % a == 0
    # off-diagonal entries vanish
    assert all(D[i, j].payload == 0 for i in range(D.rows) for j in range(D.cols) if i != j)


@settings(max_examples=50, deadline=None)
@given(small_int_matrices(3, -3, 3))
def test_smith_over_q_has_unit_pivots(rows):
    Q = Rationals()
    A = Matrix.from_rows(Q, rows)
    U, D, V = smith_normal_form(A)
    assert U @ A @ V == D
    diag = [D[i, i].payload for i in range(min(D.shape))]
    assert set(diag) <= {Fraction(0), Fraction(1)}
    assert sum(diag) == rational_rank(rows)


@pytest.mark.parametrize("rows,expected", [
    ([[2, 1]], [[2, 1], [0, 2]]),
    ([[2]], [[2]]),
])
def test_howell_examples(rows, expected):
    H = howell_form(Matrix.from_rows(IntegersModN(4), rows))
    assert H == Matrix.from_rows(IntegersModN(4), expected)


def test_howell_identity_mod6():
    ring = IntegersModN(6)
    assert howell_form(Matrix.identity(ring, 3)) == Matrix.identity(ring, 3)


@settings(max_examples=300, deadline=None)
@given(mod_matrices())
def test_howell_span_and_canonicity(data):
    n, rows = data
    dim = len(rows[0])
    H = modn_howell(np.array(rows), n)
    assert row_span(H.tolist(), n, dim) == row_span(rows, n, dim)
    # a random unimodular recombination has the same Howell form
    rng = random.Random(n * 1000 + sum(map(sum, rows)))
    mixed = [list(r) for r in rows]
    for _ in range(4):
        i, j = rng.randrange(len(mixed)), rng.randrange(len(mixed))
        if i != j:
            c = rng.randrange(n)
            mixed[i] = [(a + c * b) % n for a, b in zip(mixed[i], mixed[j])]
    mixed.append([0] * dim)
    rng.shuffle(mixed)
    assert np.array_equal(modn_howell(np.array(mixed), n), H)


def test_howell_distinguishes_spans():
    n = 8
    a = modn_howell(np.array([[2, 0]]), n)
    b = modn_howell(np.array([[4, 0]]), n)
    assert not np.array_equal(a, b)


@settings(max_examples=200, deadline=None)
@given(mod_matrices())
def test_diagonalize_transforms(data):
    n, rows = data
    A = np.array(rows, dtype=np.int64)
    U, diag, V = modn_diagonalize(A, n, True, True)
    D = U.dot(A).dot(V) % n
    expect = np.zeros_like(D)
    for i, d in enumerate(diag):
        expect[i, i] = d
    assert np.array_equal(D, expect)
    assert modn_is_invertible(U, n) and modn_is_invertible(V, n)


@settings(max_examples=200, deadline=None)
@given(mod_matrices())
def test_kernel_matches_enumeration(data):
    n, rows = data
    A = np.array(rows, dtype=np.int64)
    m = A.shape[0]
    K = modn_kernel(A, n)
    brute = {v for v in itertools.product(range(n), repeat=m)
             if not np.any(np.array(v).dot(A) % n)}
    assert row_span(K.tolist(), n, m) == brute


@settings(max_examples=200, deadline=None)
@given(mod_matrices(), st.data())
def test_solve_matches_enumeration(data, draw):
    n, rows = data
    A = np.array(rows, dtype=np.int64)
    image = row_span(rows, n, A.shape[1])
    b = draw.draw(st.lists(st.integers(0, n - 1), min_size=A.shape[1], max_size=A.shape[1]))
    x = modn_solve(A, np.array([b]), n)[0]
    assert (x is not None) == (tuple(b) in image)
    if x is not None:
        assert np.array_equal(x.dot(A) % n, np.array(b) % n)


@pytest.mark.parametrize("rows,b,expected", [
    ([[2]], [2], (1,)),
    ([[2]], [1], None),
    ([[1, 0], [0, 1]], [3, 1], (3, 1)),
])
def test_solve_examples(rows, b, expected):
    ring = IntegersModN(4)
    sol = solve_linear(Matrix.from_rows(ring, rows), b)
    if expected is None:
        assert sol is None
    else:
        assert tuple(s.payload for s in sol) == expected


def test_solve_over_integers():
    A = Matrix.from_rows(ZZ, [[2, 4], [6, 8]])
    sol = solve_linear(A, [8, 12])
    assert sol is not None
    assert [sum(sol[i].payload * A[i, j].payload for i in range(2)) for j in range(2)] == [8, 12]
    assert solve_linear(Matrix.from_rows(ZZ, [[2]]), [3]) is None


def test_kernel_image_examples():
    K, I = kernel_image(Matrix.from_rows(IntegersModN(4), [[2]]))
    assert row_span([[int(v) for v in r] for r in K.data], 4, 1) == {(0,), (2,)}
    assert row_span([[int(v) for v in r] for r in I.data], 4, 1) == {(0,), (2,)}
    K, _ = kernel_image(Matrix.from_rows(ZZ, [[2, 4]]))
    assert K == Matrix.from_rows(ZZ, [[2, -1]])
    K, I = kernel_image(Matrix.identity(ZZ, 3))
    assert K.rows == 0 and I.rows == 3


def test_kernel_image_integer_lattice_brute():
    # every small lattice point of the kernel of [2, 4] is a multiple of [2, -1]
    K, _ = kernel_image(Matrix.from_rows(ZZ, [[2, 4]]))
    gen = [K[0, 0].payload, K[0, 1].payload]
    for a, b in itertools.product(range(-5, 6), repeat=2):
        if 2 * a + 4 * b == 0:
            assert a * gen[1] == b * gen[0]


@settings(max_examples=100, deadline=None)
@given(mod_matrices())
def test_kernel_image_counts(data):
    n, rows = data
    ring = IntegersModN(n)
    A = Matrix.from_rows(ring, rows)
    K, I = kernel_image(A)
    # column picture: kernel in R^cols, image in R^rows, |ker| * |im| = |domain|
    ker = row_span([[int(v) for v in r] for r in K.data], n, A.cols)
    img = row_span([[int(v) for v in r] for r in I.data], n, A.rows)
    assert len(ker) * len(img) == n ** A.cols
    for v in ker:
        assert not np.any(np.array(rows).dot(np.array(v)) % n)


def test_kernel_image_field_rank_nullity():
    F = PrimeField(5)
    A = Matrix.from_rows(F, [[1, 2, 3], [2, 4, 1]])
    K, I = kernel_image(A)
    assert K.rows + I.rows == A.cols


@pytest.mark.parametrize("module,text,card", [
    (FpModule.cyclic(IntegersModN(4), 2), "Z/2", 2),
    (FpModule(ZZ, 1, Matrix.from_rows(ZZ, [[6], [4]])), "Z/2", None),
    (FpModule.free(Rationals(), 2), "Q^2", None),
    (FpModule.free(IntegersModN(12), 1), "Z/12", 12),
])
def test_classify_examples(module, text, card):
    c = classify_module(module)
    assert c.render() == text
    assert c.cardinality == card


@settings(max_examples=150, deadline=None)
@given(mod_matrices(3, 12))
def test_classify_cardinality_brute(data):
    n, rows = data
    ring = IntegersModN(n)
    M = FpModule(ring, len(rows[0]), Matrix.from_rows(ring, rows))
    c = classify_module(M)
    assert c.cardinality == quotient_size(rows, n, len(rows[0]))
    be = ModBackend(n)
    assert be.classify(np.array(rows) % n, len(rows[0])) == c


def test_classify_algebra_module():
    A = truncated_polynomial_ring(4, 2)
    M = FpModule(A, 1, Matrix.from_rows(A, [["[0,1]"]]))
    c = classify_module(M)
    assert c.cardinality == 4 and c.render() == "Z/4"


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 60), max_size=5))
def test_invariant_factors_chain(orders):
    chain = invariant_factors(orders)
    assert math.prod(chain) == math.prod(orders)
    for a, b in zip(chain, chain[1:]):
        assert b % a == 0


def test_subquotient_homology_small():
    # Z/4 --2--> Z/4 --2--> Z/4 : ker 2 / im 2 = {0,2}/{0,2} = 0
    be = ModBackend(4)
    d = np.array([[2]])
    Z = be.kernel(d)
    S = Subquotient(be, 1, Z, d)
    assert S.is_zero
    S = Subquotient(be, 1, Z, np.zeros((0, 1), dtype=np.int64))
    assert S.cardinality == 2


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12), st.data())
def test_induced_map_flags(n, data):
    # multiplication by c on Z/n: kernel, surjectivity and zero-ness by enumeration
    c = data.draw(st.integers(0, n - 1))
    be = ModBackend(n)
    S = Subquotient(be, 1, np.eye(1, dtype=np.int64), np.zeros((0, 1), dtype=np.int64))
    f = S.induced(S, np.array([[c]]))
    image = {c * v % n for v in range(n)}
    assert f.is_zero() == (image == {0})
    assert f.is_surjective() == (len(image) == n)
    assert f.is_injective() == (len(image) == n)
    assert f.kernel().cardinality == n // len(image)
