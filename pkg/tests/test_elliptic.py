import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bethe_surface.elliptic import (
    EllipticConfig,
    accessory_elliptic,
    f_log,
    lattice_distance,
    period_conditions,
    period_integral,
    phi_eval,
    potential_direct,
    potential_elliptic,
    random_config,
    residue_check_elliptic,
    sb_residual_elliptic,
    solve_sb_elliptic,
    tau_yy_elliptic,
    theta1,
    theta1_d,
    theta1_dsigma,
)
from bethe_surface.errors import AtPole, BadModulus, DegenerateConfig, InconsistentProfile
from bethe_surface.numkit import fd_derivative

SIGMAS = [1j, 0.3 + 1.2j, -0.45 + 0.9j]
xs = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
seeds = st.integers(0, 10 ** 6)


def jacobi_product(x, sigma, terms=60):
    """Classical product for theta_1(pi x | q), q = exp(i pi sigma)."""
    q = cmath.exp(1j * math.pi * sigma)
    out = 2 * cmath.exp(1j * math.pi * sigma / 4) * cmath.sin(math.pi * x)
    for n in range(1, terms):
        out *= (1 - q ** (2 * n)) * (1 - 2 * q ** (2 * n) * cmath.cos(2 * math.pi * x) + q ** (4 * n))
    return out


@pytest.fixture(scope="module")
def solved():
    sols = solve_sb_elliptic(1j, [0.0], [2], 0, 0, rng=np.random.default_rng(0))
    return sols[0]


@pytest.mark.parametrize("sigma", SIGMAS)
@pytest.mark.parametrize("x", [0.13 + 0.05j, -0.4 + 0.3j, 0.77 - 0.2j])
def test_theta1_matches_product_formula_up_to_sign(sigma, x):
    # the series here is -2 sum (-1)^n q^((n+1/2)^2) sin((2n+1) pi x)
    assert abs(theta1(x, sigma) + jacobi_product(x, sigma)) < 1e-13


@given(xs, st.sampled_from(SIGMAS))
def test_theta1_quasi_periodicity(x, sigma):
    t = theta1(x, sigma)
    scale = max(1e-3, abs(t))
    assert abs(theta1(x + 1, sigma) + t) < 1e-10 * scale
    lhs = theta1(x + sigma, sigma)
    rhs = -cmath.exp(-1j * math.pi * sigma - 2j * math.pi * x) * t
    assert abs(lhs - rhs) < 1e-10 * max(1e-3, abs(rhs))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_theta1_derivatives_against_finite_differences(k):
    x, s = 0.21 + 0.13j, 0.2 + 1.1j
    d = fd_derivative(lambda z: theta1_d(k - 1, z, s), x, 1e-3, "richardson").value
    assert abs(theta1_d(k, x, s) - d) < 1e-8 * max(1, abs(d))


def test_theta1_heat_equation():
    # 4 pi i d/dsigma theta = d^2/dx^2 theta
    x, s = 0.3 + 0.1j, 0.1 + 0.8j
    assert abs(4j * math.pi * theta1_dsigma(x, s) - theta1_d(2, x, s)) < 1e-11


@given(seeds)
def test_sb_residual_matches_quadrature(seed):
    c = random_config(np.random.default_rng(seed), min_separation=0.15)
    np.testing.assert_allclose(sb_residual_elliptic(c), residue_check_elliptic(c), atol=1e-7)


@given(seeds)
def test_literal_residual_drops_the_exponential_term(seed):
    c = random_config(np.random.default_rng(seed), min_separation=0.15)
    diff = sb_residual_elliptic(c) - sb_residual_elliptic(c, literal=True)
    np.testing.assert_allclose(diff, 2j * math.pi * c.beta1)


@given(seeds)
def test_literal_residual_is_minus_log_derivative_of_tau_yy(seed):
    c = random_config(np.random.default_rng(seed), min_separation=0.15)
    sb = sb_residual_elliptic(c, literal=True)
    for k in range(c.n - 1):
        def lt(z, k=k):
            zs = list(c.zeros)
            zs[k] = z
            return cmath.log(tau_yy_elliptic(c.moved(zeros=zs)))
        d = fd_derivative(lt, c.zeros[k], 1e-4, "richardson").value
        assert abs(d + sb[k]) < 1e-6 * max(1, abs(d))


@given(seeds)
def test_accessory_is_twice_pole_log_derivative_of_tau_yy(seed):
    c = random_config(np.random.default_rng(seed), min_separation=0.15)
    H = accessory_elliptic(c)
    for j in range(c.m):
        def lt(z, j=j):
            ys = list(c.poles)
            ys[j] = z
            return cmath.log(tau_yy_elliptic(c.moved(poles=ys)))
        d = fd_derivative(lt, c.poles[j], 1e-4, "richardson").value
        assert abs(H[j] - 2 * d) < 1e-6 * max(1, abs(d))


def test_solution_has_vanishing_residual(solved):
    assert np.max(np.abs(residue_check_elliptic(solved))) < 1e-9
    assert abs(solved.balance()) < 1e-12


def test_potential_formula_matches_direct_evaluation(solved):
    for x in (0.31 + 0.42j, -0.2 + 0.77j):
        assert abs(potential_elliptic(solved, x) - potential_direct(solved, x)) < 1e-8


def test_periods_are_homotopy_invariant(solved):
    A, B = period_conditions(solved)
    p = 0.0667 + 0.1801j
    bent = [p, p + 0.5 + 0.2j, p + 1]
    straight = period_integral(solved, [p, p + 1])
    assert abs(period_integral(solved, bent) - straight) < 1e-9
    assert np.isfinite(A) and np.isfinite(B)


def test_phi_is_doubly_periodic_up_to_multipliers(solved):
    x = 0.2 + 0.3j
    assert abs(phi_eval(solved, x + 1) - phi_eval(solved, x)) < 1e-10 * abs(phi_eval(solved, x))


def test_phi_at_pole_raises(solved):
    with pytest.raises(AtPole):
        phi_eval(solved, 1.0)


def test_f_log_is_odd():
    assert abs(f_log(0.3 + 0.2j, 1j) + f_log(-0.3 - 0.2j, 1j)) < 1e-12


def test_lattice_distance_ignores_periods():
    assert lattice_distance(0.1 + 2 * 1j + 3, 0.1, 1j) < 1e-12


def test_json_round_trip(solved):
    assert EllipticConfig.from_json(solved.to_json()) == solved


def test_validation():
    with pytest.raises(BadModulus):
        theta1(0.1, -1j)
    with pytest.raises(InconsistentProfile):
        EllipticConfig(1j, (0.1,), (0.0,), (2,))
    with pytest.raises(DegenerateConfig):
        EllipticConfig(1j, (0.1, 0.3), (0.0,), (2,))
