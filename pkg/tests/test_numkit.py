import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from bethe_surface.errors import NoRootFound, NumericalFailure, SingularOnContour, ValidationError
from bethe_surface.numkit import (
    ComplexRational,
    ContourSpec,
    contour_integrate,
    fd_derivative,
    laurent_coefficients,
    newton_multistart,
    series_div,
    series_inv,
    series_mul,
    series_sqrt,
    taylor_coefficients,
)

finite = st.floats(-2, 2, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def test_taylor_of_exp_matches_factorials():
    co = taylor_coefficients(np.exp, 0.3, 0.5, 8)
    expected = [math.exp(0.3) / math.factorial(k) for k in range(9)]
    # roundoff grows like eps * max|f| / radius**k
    tol = [1e-14 * math.exp(0.8) / 0.5 ** k for k in range(9)]
    assert all(abs(c - e) < t for c, e, t in zip(co, expected, tol))


def test_laurent_picks_out_principal_part():
    f = lambda z: 3 / z ** 2 - 2j / z + 5 + z
    co = laurent_coefficients(f, 0.0, 0.7, -3, 1)
    np.testing.assert_allclose(co, [0, 3, -2j, 5, 1], atol=1e-13)


@given(st.lists(cplx, min_size=2, max_size=6), st.lists(cplx, min_size=2, max_size=6))
def test_series_mul_matches_polynomial_product(a, b):
    n = min(len(a), len(b))
    expected = np.convolve(a, b)[:n]
    np.testing.assert_allclose(series_mul(a, b), expected, atol=1e-12)


@given(st.lists(cplx, min_size=1, max_size=6).filter(lambda a: abs(a[0]) > 0.3))
def test_series_sqrt_squares_back(a):
    r = series_sqrt(a)
    np.testing.assert_allclose(series_mul(r, r), a, atol=1e-9 * max(1, max(map(abs, a))) ** 3)


@given(st.lists(cplx, min_size=1, max_size=6).filter(lambda a: abs(a[0]) > 0.5))
def test_series_inverse_and_division(a):
    inv = series_inv(a)
    one = np.zeros(len(a), dtype=complex)
    one[0] = 1
    np.testing.assert_allclose(series_mul(a, inv), one, atol=1e-8)
    np.testing.assert_allclose(series_div(a, a), one, atol=1e-8)


def test_sqrt_of_series_vanishing_at_origin_raises():
    with pytest.raises(ZeroDivisionError):
        series_sqrt([0, 1, 2])


def test_circle_integral_gives_two_pi_i_times_residue():
    f = lambda z: np.exp(z) / (z - 0.2) ** 2
    val = contour_integrate(f, ContourSpec.circle(0, 1), 1e-13)
    assert abs(val - 2j * np.pi * np.exp(0.2)) < 1e-12


def test_segment_integral_matches_scipy_quad():
    a, b = 0.1 + 0.2j, 1.3 - 0.4j
    f = lambda z: np.sin(z) * z ** 2
    val = contour_integrate(f, ContourSpec.polyline([a, b]), 1e-13)
    g = lambda t, part: part(f(a + (b - a) * t) * (b - a))
    ref = integrate.quad(g, 0, 1, args=(np.real,), epsabs=1e-14)[0] + 1j * integrate.quad(
        g, 0, 1, args=(np.imag,), epsabs=1e-14)[0]
    assert abs(val - ref) < 1e-12


def test_reversed_contour_flips_sign():
    c = ContourSpec.polyline([0, 1, 1 + 1j])
    f = lambda z: z ** 3 + 1j
    assert abs(contour_integrate(f, c) + contour_integrate(f, c.reversed())) < 1e-12


def test_pole_on_contour_is_reported():
    with pytest.raises(NumericalFailure):
        contour_integrate(lambda z: 1 / (z - 1), ContourSpec.polyline([0, 2]))


def test_overflowing_integrand_is_reported():
    with pytest.raises(SingularOnContour):
        contour_integrate(lambda z: np.full_like(z, 1e300), ContourSpec.polyline([0, 1]))


def test_contour_json_round_trip():
    for c in (ContourSpec.circle(1 + 1j, 0.5, -1), ContourSpec.polyline([0, 1j, 2])):
        back = ContourSpec.from_json(c.to_json())
        np.testing.assert_allclose(back.sample(8), c.sample(8))


def test_contour_clearance_is_enforced():
    with pytest.raises(ValidationError):
        ContourSpec.circle(0, 1, singular_points=(1.001,), clearance=0.01)


@pytest.mark.parametrize("method,h,tol", [("central", 1e-5, 1e-9), ("five-point", 1e-3, 1e-11),
                                          ("richardson", 1e-2, 1e-11)])
def test_fd_derivative_methods(method, h, tol):
    d = fd_derivative(np.sin, 0.7 + 0.1j, h, method)
    assert abs(d.value - np.cos(0.7 + 0.1j)) < tol


def test_complex_step_on_real_function():
    assert abs(fd_derivative(np.exp, 0.4, 1e-20, "complex-step").value - math.exp(0.4)) < 1e-15


@given(st.lists(cplx, min_size=2, max_size=4, unique=True))
def test_rational_roots_and_derivative(roots):
    num = np.polynomial.polynomial.polyfromroots(roots)
    F = ComplexRational(num, [2.0 + 0j, 1.0])
    x = 0.37 + 1.1j
    d = fd_derivative(F, x, 1e-3, "richardson").value
    assert abs(F.derivative()(x) - d) < 1e-7 * max(1, abs(d))
    assert sorted(np.round(F.zeros(), 5), key=lambda z: (z.real, z.imag)) == pytest.approx(
        sorted(np.round(roots, 5), key=lambda z: (z.real, z.imag)), abs=1e-4)


def test_rational_taylor_matches_geometric_series():
    F = ComplexRational([1.0], [1.0, -1.0])  # 1 / (1 - x)
    np.testing.assert_allclose(F.taylor(0.5, 4), [2 ** (k + 1) for k in range(5)], rtol=1e-13)


def test_critical_points_of_cubic():
    F = ComplexRational.polynomial([0, -3, 0, 1])  # x^3 - 3x
    np.testing.assert_allclose(sorted(F.critical_points().real), [-1, 1], atol=1e-12)


def test_common_roots_cancel():
    F = ComplexRational(np.polynomial.polynomial.polyfromroots([1, 2]), [-1.0, 1.0])
    assert F.degree == 1


def test_newton_multistart_finds_cube_roots():
    roots = newton_multistart(lambda z: z ** 3 - 1, [np.array([s]) for s in (1, -1 + 1j, -1 - 1j)])
    got = sorted((complex(r[0]) for r in roots), key=lambda z: z.imag)
    expected = sorted(np.exp(2j * np.pi * np.arange(3) / 3), key=lambda z: z.imag)
    np.testing.assert_allclose(got, expected, atol=1e-11)


def test_newton_reports_no_root():
    with pytest.raises(NoRootFound):
        newton_multistart(lambda z: np.exp(z), [np.array([0.0])], max_iter=5)
