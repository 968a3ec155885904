import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from bethe_surface.errors import DegenerateConfig, InconsistentProfile, ValidationError
from bethe_surface.genus0 import (
    INFINITY,
    Genus0Config,
    accessory,
    accessory_alt,
    covering_from_config,
    critical_profile,
    critical_values_residual,
    fit_covering,
    phi_value,
    residue_check,
    sb_residual,
    solve_sb,
    tau_b_cubed,
    tau_b_exponent,
    tau_yy,
)
from bethe_surface.numkit import ComplexRational, fd_derivative
from bethe_surface.schwarz import laurent_extract, potential_from_map

A = 1 / (2 * math.sqrt(3))
# hand-solved: poles 0 and 1 (simple), zeros 1/2 +- i/(2 sqrt 3) and infinity
TWO_POLE = Genus0Config((0.5 + A * 1j, 0.5 - A * 1j, INFINITY), (0.0, 1.0), (1, 1))

pt = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))


def _separated(points, gap=0.25):
    return all(abs(p - q) > gap for i, p in enumerate(points) for q in points[:i])


@st.composite
def configs(draw):
    orders = draw(st.lists(st.integers(1, 2), min_size=1, max_size=2))
    n = sum(orders) + 1
    pts = draw(st.lists(pt, min_size=n + len(orders), max_size=n + len(orders)))
    assume(_separated(pts))
    return Genus0Config(tuple(pts[:n]), tuple(pts[n:]), tuple(orders))


def test_hand_solution_satisfies_sb():
    assert np.max(np.abs(sb_residual(TWO_POLE))) < 1e-15


def test_solver_recovers_hand_solution():
    sols = solve_sb([0.0, 1.0], [1, 1], [INFINITY], n_seeds=24, rng=np.random.default_rng(1))
    finite = sorted((z for z in sols[0].zeros if not cmath.isinf(z)), key=lambda z: z.imag)
    np.testing.assert_allclose(finite, [0.5 - A * 1j, 0.5 + A * 1j], atol=1e-10)


@given(configs())
def test_sb_residual_matches_quadrature_residue(c):
    assert np.allclose(sb_residual(c), residue_check(c, normalized=True), atol=1e-8)


@given(configs())
def test_sb_residual_is_minus_log_derivative_of_tau_yy(c):
    for k in range(c.n - 1):
        def log_tau(z, k=k):
            zs = list(c.zeros)
            zs[k] = z
            return cmath.log(tau_yy(c.replace(zeros=zs)))
        d = fd_derivative(log_tau, c.zeros[k], 1e-4, "richardson").value
        assert abs(d + sb_residual(c)[k]) < 1e-6 * max(1, abs(d))


@given(configs())
def test_accessory_is_twice_log_derivative_of_tau_yy(c):
    H = accessory(c)
    for j in range(c.m):
        def log_tau(z, j=j):
            ys = list(c.poles)
            ys[j] = z
            return cmath.log(tau_yy(c.replace(poles=ys)))
        d = fd_derivative(log_tau, c.poles[j], 1e-4, "richardson").value
        assert abs(H[j] - 2 * d) < 1e-6 * max(1, abs(d))


def test_covering_derivative_is_inverse_phi_squared():
    F = covering_from_config(TWO_POLE)
    dF = F.derivative()
    ratios = [dF(x) * phi_value(TWO_POLE, x) ** 2 for x in (0.3 + 0.2j, -1.1 + 0.4j, 2 - 1j)]
    assert np.ptp(np.abs(ratios)) < 1e-12 and abs(ratios[0]) > 0.1


def test_accessory_is_simple_pole_coefficient_of_potential():
    u = potential_from_map(covering_from_config(TWO_POLE))
    H = accessory(TWO_POLE)
    for y, r, h in zip(TWO_POLE.poles, TWO_POLE.orders, H):
        A, H_fit = laurent_extract(u, y, rho=0.05)
        assert abs(A - r * (r + 1)) < 1e-8
        assert abs(H_fit - h) < 1e-8


def test_flagship_accessory_alt_at_origin():
    F = ComplexRational([1.0], [-1.0, 0, 0, 1])  # 1/(x^3 - 1)
    assert abs(accessory_alt(F, [0.0])[0] - 4 / 3) < 1e-10


def test_critical_profile_counts_multiplicity():
    F = ComplexRational.polynomial([0, 0, 0, 1])
    assert critical_profile(F) == [(pytest.approx(0, abs=1e-5), 2)]


def test_tau_b_exponents():
    assert tau_b_exponent(1, 1) == pytest.approx(2 / 3)
    assert tau_b_exponent(1, -1) == pytest.approx(2 / 3)
    assert tau_b_exponent(2, -1) == tau_b_exponent(-1, 2)


def test_tau_b_uses_principal_logs():
    c = Genus0Config((1.0, -1.0), (0.0,), (1,))
    expected = cmath.exp(2 / 3 * (math.log(2) + 1j * math.pi))
    assert abs(tau_b_cubed(c) - expected) < 1e-14
    _, branches = tau_b_cubed(c, return_branches=True)
    assert len(branches) == 3


def test_fit_covering_hits_critical_values():
    F, cfg = fit_covering([1, 1], [0.0, 1.0], rng=np.random.default_rng(0))
    assert critical_values_residual(F, cfg, [0.0, 1.0]) < 1e-9
    assert np.max(np.abs(sb_residual(cfg))) < 1e-8


def test_json_round_trip_keeps_infinity_last():
    back = Genus0Config.from_json(TWO_POLE.to_json())
    assert back == TWO_POLE and cmath.isinf(back.zeros[-1])


@pytest.mark.parametrize("zeros,poles,orders,exc", [
    ((1.0,), (0.0,), (1,), InconsistentProfile),
    ((1.0, 1.0), (0.0,), (1,), DegenerateConfig),
    ((INFINITY, 2.0), (INFINITY,), (1,), ValidationError),
    ((1.0, 2.0), (0.0,), (0,), ValidationError),
])
def test_invalid_configs_raise(zeros, poles, orders, exc):
    with pytest.raises(exc):
        Genus0Config(zeros, poles, orders)
