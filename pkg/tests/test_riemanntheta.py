import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bethe_surface.errors import BadPeriodMatrix, UnsupportedOrder, ValidationError
from bethe_surface.numkit import fd_derivative
from bethe_surface.riemanntheta import (
    PeriodMatrix,
    ThetaCharacteristic,
    all_characteristics,
    theta,
    theta_char,
    theta_deriv,
    theta_gradient,
)

small = st.floats(-0.8, 0.8)


@st.composite
def period_matrices(draw, g=2):
    X = np.array([[draw(small) for _ in range(g)] for _ in range(g)])
    L = np.array([[draw(st.floats(-0.5, 0.5)) for _ in range(g)] for _ in range(g)])
    Y = L @ L.T + np.eye(g) * draw(st.floats(0.6, 1.5))
    return 0.5 * (X + X.T) + 1j * Y


@st.composite
def points(draw, g=2):
    return np.array([complex(draw(small), draw(small)) for _ in range(g)])


def jacobi_theta3(z, tau, terms=60):
    """Product formula for the genus-1 theta with ``q = exp(i pi tau)``."""
    q = cmath.exp(1j * math.pi * tau)
    out = 1 + 0j
    for n in range(1, terms):
        out *= (1 - q ** (2 * n)) * (1 + 2 * q ** (2 * n - 1) * cmath.cos(2 * math.pi * z) + q ** (4 * n - 2))
    return out


def brute_force(z, om, N=12):
    g = len(z)
    total = 0j
    for n in itertools.product(range(-N, N + 1), repeat=g):
        n = np.array(n)
        total += np.exp(1j * np.pi * n @ om @ n + 2j * np.pi * n @ z)
    return total


@pytest.mark.parametrize("tau", [1j, 0.5 + 0.8j, -0.3 + 2j])
@pytest.mark.parametrize("z", [0.0, 0.2 + 0.1j, -0.4 + 0.5j])
def test_genus_one_matches_product_formula(tau, z):
    assert abs(theta([z], [[tau]]) - jacobi_theta3(z, tau)) < 1e-13


@given(period_matrices(), points())
def test_genus_two_matches_brute_force_sum(om, z):
    ref = brute_force(z, om)
    assert abs(theta(z, om) - ref) < 1e-12 * max(1.0, abs(ref))


@given(period_matrices(), points(), st.integers(0, 1))
def test_quasi_periodicity(om, z, j):
    t = theta(z, om)
    e = np.eye(2)[j]
    assert abs(theta(z + e, om) - t) < 1e-11 * max(1, abs(t))
    shifted = theta(z + om @ e, om)
    expected = cmath.exp(-1j * math.pi * om[j, j] - 2j * math.pi * z[j]) * t
    assert abs(shifted - expected) < 1e-10 * max(1, abs(expected), abs(shifted))


def test_block_diagonal_factorizes():
    om = np.diag([1j, 0.4 + 1.3j])
    z = np.array([0.1 + 0.2j, -0.3 + 0.05j])
    assert abs(theta(z, om) - theta([z[0]], [[1j]]) * theta([z[1]], [[0.4 + 1.3j]])) < 1e-13


def test_odd_characteristics_vanish_at_origin():
    om = np.array([[1.1j, 0.3 + 0.2j], [0.3 + 0.2j, 0.2 + 0.9j]])
    odd = all_characteristics(2, parity=1)
    assert len(odd) == 6 and len(all_characteristics(2, parity=0)) == 10
    for ch in odd:
        assert abs(theta_char(ch, np.zeros(2), om)) < 1e-13


@given(period_matrices(), points())
def test_characteristic_shift_identity(om, z):
    ch = ThetaCharacteristic([0.5, 0.0], [0.5, 0.5])
    b1, b2 = ch.beta1, ch.beta2
    pref = np.exp(1j * np.pi * b1 @ om @ b1 + 2j * np.pi * b1 @ (z + b2))
    ref = pref * theta(z + om @ b1 + b2, om)
    assert abs(theta_char(ch, z, om) - ref) < 1e-11 * max(1, abs(ref))


@pytest.mark.parametrize("alpha", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 3)])
def test_partial_derivatives_against_finite_differences(alpha):
    om = np.array([[1.1j, 0.3 + 0.2j], [0.3 + 0.2j, 0.2 + 0.9j]])
    z = np.array([0.1 + 0.1j, -0.2 + 0.05j])
    j = alpha.index(next(k for k in alpha if k))
    lower = list(alpha)
    lower[j] -= 1
    e = np.eye(2)[j]
    d = fd_derivative(lambda t: theta_deriv(lower, z + t * e, om), 0.0, 1e-3, "richardson").value
    assert abs(theta_deriv(alpha, z, om) - d) < 1e-8 * max(1, abs(d))


def test_heat_equation_in_the_diagonal_entry():
    tau, z = 0.2 + 1.1j, 0.13 + 0.07j
    d_tau = fd_derivative(lambda t: theta([z], [[t]]), tau, 1e-3, "richardson").value
    assert abs(4j * math.pi * d_tau - theta_deriv((2,), [z], [[tau]])) < 1e-8


def test_gradient_collects_first_partials():
    om = np.array([[1j, 0.2], [0.2, 1.5j]])
    z = np.array([0.3, 0.1j])
    g = theta_gradient(z, om)
    assert np.allclose(g, [theta_deriv((1, 0), z, om), theta_deriv((0, 1), z, om)])


def test_characteristic_parity_and_reduction():
    ch = ThetaCharacteristic([1.5, -1.0], [0.5, 2.5])
    assert ch.parity == ch.reduced().parity
    np.testing.assert_allclose(ch.reduced().beta1, [0.5, 0.0])
    with pytest.raises(ValidationError):
        ThetaCharacteristic([0.3], [0.0])


def test_period_matrix_json_round_trip():
    pm = PeriodMatrix(np.array([[1j, 0.2], [0.2, 1.5j]]))
    np.testing.assert_array_equal(PeriodMatrix.from_json(pm.to_json()).omega, pm.omega)


@pytest.mark.parametrize("om", [
    [[1j, 0.2], [0.3, 1j]],
    [[1j, 0], [0, -1j]],
    [[1j, 0.2]],
])
def test_bad_period_matrices(om):
    with pytest.raises(BadPeriodMatrix):
        theta(np.zeros(2), np.array(om))


def test_order_above_four_is_unsupported():
    with pytest.raises(UnsupportedOrder):
        theta_deriv((5,), [0.1], [[1j]])


def test_wrong_z_length():
    with pytest.raises(ValidationError):
        theta([0.0], np.eye(2) * 1j)
