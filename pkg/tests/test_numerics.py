from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wfanorm.errors import MassDiverges, SingularMatrix
from wfanorm.numerics import (
    Backend, Matrix, Rational, as_fraction, inverse, is_mass_finite, neumann_inverse,
    solve_linear, spectral_radius,
)
from oracles import F


def M(rows):
    return Matrix.from_rows([[Rational(x) for x in r] for r in rows])


def test_solve_identity():
    assert solve_linear(Matrix.identity(2), [Rational(3), Rational(5)]) == (3, 5)


def test_solve_scc_block():
    a = M([[1, "-2/5"], ["-2/5", "2/5"]])
    assert solve_linear(a, [Rational(0), Rational(6)]) == (10, 25)


def test_solve_singular():
    with pytest.raises(SingularMatrix):
        solve_linear(M([[1, 1], [1, 1]]), [Rational(1), Rational(0)])


def test_solve_float_residual():
    a = Matrix.from_rows([[4.0, 1.0], [2.0, 3.0]])
    b = [1.0, 2.0]
    x = solve_linear(a, b)
    res = [sum(a[i, j] * x[j] for j in range(2)) - b[i] for i in range(2)]
    assert max(map(abs, res)) <= 1e-10 * max(map(abs, b))


def test_neumann_zero_matrix():
    assert neumann_inverse(Matrix.zeros(2)) == Matrix.identity(2)


def test_neumann_scc_block():
    got = neumann_inverse(M([[0, "2/5"], ["2/5", "3/5"]]))
    assert got == M([["5/3", "5/3"], ["5/3", "25/6"]])


def test_neumann_diverges_at_one():
    with pytest.raises(MassDiverges):
        neumann_inverse(M([[1]]))


def test_neumann_diverges_above_one_even_when_invertible():
    # I - M is invertible here but its inverse is negative
    with pytest.raises(MassDiverges):
        neumann_inverse(M([[2]]))
    assert not is_mass_finite(M([[0, 3], [1, 0]]))


def test_spectral_radius_examples():
    assert spectral_radius(M([["1/2", 0], [0, "1/3"]])) == pytest.approx(0.5, abs=1e-12)
    assert spectral_radius(M([[0, "2/5"], ["2/5", "3/5"]])) == pytest.approx(0.8, abs=1e-12)
    assert spectral_radius(Matrix.zeros(3)) == 0.0


def test_spectral_radius_periodic_block():
    # a pure 2-cycle has eigenvalues +-2; plain power iteration would oscillate
    assert spectral_radius(M([[0, 4], [1, 0]])) == pytest.approx(2.0, abs=1e-10)


def test_as_fraction():
    assert as_fraction(0.8) == Rational(4, 5)
    assert as_fraction(2 ** 0.5) is None
    assert as_fraction(Rational(1, 3)) == Rational(1, 3)


small = st.fractions(min_value=0, max_value=1, max_denominator=9)


def square(n, entries):
    return st.lists(entries, min_size=n * n, max_size=n * n).map(
        lambda xs: Matrix(n, n, tuple(Rational(x) for x in xs)))


@st.composite
def substochastic(draw):
    n = draw(st.integers(1, 4))
    rows = []
    for _ in range(n):
        raw = draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))
        total = sum(raw) + draw(st.integers(1, 5))
        rows.append([Fraction(x, total) for x in raw])
    return M(rows)


@given(substochastic())
def test_neumann_matches_columnwise_solve_and_series(m):
    n = m.rows
    inv = neumann_inverse(m)
    i_minus = Matrix.identity(n) - m
    for j in range(n):
        e = [Rational(int(i == j)) for i in range(n)]
        assert solve_linear(i_minus, e) == inv.col(j)
    # truncated series stays below the inverse and the gap is bounded by the tail
    power = Matrix.identity(n)
    series = Matrix.zeros(n)
    for _ in range(30):
        series = series + power
        power = power @ m
    r = max(sum(F(x) for x in m.row(i)) for i in range(n))
    tail = r ** 30 / (1 - r)
    for x, y in zip(inv.entries, series.entries):
        assert 0 <= F(x) - F(y) <= tail


def dominant_root(rows):
    """Largest root magnitude of the characteristic polynomial, coefficients by hand."""
    a = np.array(rows, dtype=float)
    n = len(rows)
    if n == 2:
        tr, det = a[0, 0] + a[1, 1], a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        coeffs = [1, -tr, det]
    else:
        tr = np.trace(a)
        minors = sum(a[i, i] * a[j, j] - a[i, j] * a[j, i] for i in range(3) for j in range(i + 1, 3))
        det = (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
               - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
               + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))
        coeffs = [1, -tr, minors, -det]
    return max(abs(r) for r in np.roots(coeffs))


@given(st.integers(2, 3).flatmap(lambda n: square(n, st.fractions(0, 3, max_denominator=5))))
def test_spectral_radius_matches_characteristic_polynomial(m):
    rows = [[float(x) for x in m.row(i)] for i in range(m.rows)]
    assert spectral_radius(m) == pytest.approx(dominant_root(rows), abs=1e-8)


@given(st.integers(1, 4).flatmap(lambda n: square(n, small)))
def test_exact_certificate_agrees_with_float_test(m):
    rho = spectral_radius(m)
    if abs(rho - 1) > 1e-6:
        assert is_mass_finite(m) == (rho < 1 - 1e-9)


def test_inverse_roundtrip():
    a = M([[2, 1], [1, 1]])
    assert a @ inverse(a) == Matrix.identity(2)


def test_backend_coerce():
    assert Backend.RATIONAL.coerce("2/5") == Rational(2, 5)
    assert Backend.FLOAT.coerce("1/4") == 0.25
    assert Backend.FLOAT.close(1.0, 1.0 + 1e-12)
    assert not Backend.RATIONAL.close(Rational(1), Rational(1) + Rational(1, 10**20))
