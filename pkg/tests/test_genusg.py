import numpy as np
import pytest

from bethe_surface import genusg as GG
from bethe_surface.errors import (
    AtDivisor,
    InconsistentProfile,
    NotCanonical,
    PathThroughDivisor,
    QNotConstant,
    ValidationError,
)
from bethe_surface.hypersurface import HyperellipticCurve
from bethe_surface.numkit import fd_derivative


@pytest.fixture(scope="module")
def curve():
    return HyperellipticCurve([-1, 0, 0, 0, 0, 0, 1])


@pytest.fixture(scope="module")
def config(curve):
    return GG.random_admissible_config(curve, (1, 1, 1), np.random.default_rng(3))


@pytest.fixture(scope="module")
def periods(config):
    return GG.period_conditions_genusg(config)


@pytest.fixture(scope="module")
def covering(curve):
    pts = [curve.lift(curve.point(0, 1)), curve.lift(curve.point(0, -1)),
           curve.lift(curve.infinity(-1)), curve.lift(curve.infinity(1))]
    c = GG.GenusGConfig(curve, pts, [-1, -1, -1, 2])
    return c, GG.HyperellipticFunction(curve, [0, 0, 0, 1], [1])


def test_characteristic_is_half_integral(config):
    for b in (config.beta1, config.beta2):
        np.testing.assert_allclose(2 * b, np.round(2 * b), atol=1e-12)
    assert config.beta_residual < 1e-8
    r1, r2 = config.reduced_characteristic()
    assert set(np.concatenate([r1, r2])) <= {0.0, 0.5}


def test_perturbed_divisor_is_not_canonical(curve, config):
    lifts = [p.lift for p in config.points]
    lifts[0] = curve.local_lift(lifts[0], 0.05)
    with pytest.raises(NotCanonical):
        GG.GenusGConfig(curve, lifts, [p.degree for p in config.points])


def test_degree_sum_is_enforced(curve, config):
    with pytest.raises(InconsistentProfile):
        GG.GenusGConfig(curve, [p.lift for p in config.points], [1, 1, -1, -1, -2])


def test_genus_one_curve_is_rejected():
    C = HyperellipticCurve([0, -1, 0, 1])
    with pytest.raises(ValidationError):
        GG.GenusGConfig(C, [C.lift(C.point(0.3, 1))], [0])


def test_phi_squared_is_single_valued(curve, config):
    L = curve.lift(curve.point(0.3 + 0.2j, 1))
    p0 = GG.phi_squared(config, L)
    for name in "ab":
        for j in range(2):
            assert abs(GG.phi_squared(config, curve.transport(L, name, j)) / p0 - 1) < 1e-8


def test_phi_at_divisor_point_raises(config):
    with pytest.raises(AtDivisor):
        GG.phi_squared(config, config.points[0].lift)


def test_zero_and_pole_orders_from_log_log_slope(curve, config):
    for k in (config.zero_indices[0], config.pole_indices[0]):
        p = config.points[k]
        chart = curve.chart(p.lift.point)
        rs = np.array([1e-3, 3e-3, 1e-2]) * chart.radius
        vals = [abs(GG.phi_squared_in_chart(config, p.lift, r * np.exp(0.3j), chart)) for r in rs]
        slope = np.polyfit(np.log(rs), np.log(vals), 1)[0]
        assert abs(slope - 2 * p.degree) < 0.05


def test_sb_residual_matches_quadrature_oracle(config):
    sb = GG.sb_residual_genusg(config)
    oracle = [GG.residue_oracle_genusg(config, i) for i in config.zero_indices[:-1]]
    np.testing.assert_allclose(sb, oracle, atol=1e-6)


def test_chart_rescaling_scales_derivative_quantities(config):
    jacs = [0.5 + 0.2j, 1.3, 0.7j, 1.0, 2.0][:len(config.points)]
    scaled = config.with_jacobians(jacs)
    ratio = GG.sb_residual_genusg(scaled) / GG.sb_residual_genusg(config)
    np.testing.assert_allclose(ratio, [jacs[i] for i in config.zero_indices[:-1]], rtol=1e-6)
    oracle = [GG.residue_oracle_genusg(scaled, i) for i in config.zero_indices[:-1]]
    np.testing.assert_allclose(GG.sb_residual_genusg(scaled), oracle, atol=1e-6)


def test_stationarity_and_accessory_from_tau_yy(config):
    sb = GG.sb_residual_genusg(config)
    for k, idx in enumerate(config.zero_indices[:-1]):
        assert abs(GG.dlog_tau_yy(config, idx) + sb[k]) < 1e-5
    H = GG.accessory_genusg(config)
    for k, idx in enumerate(config.pole_indices):
        assert abs(2 * GG.dlog_tau_yy(config, idx) - H[k]) < 1e-5


def test_ordered_pairs_add_one_more_prime_form_product(curve, config):
    extra = 1 + 0j
    pts = config.points
    for j in range(len(pts)):
        for k in range(j + 1, len(pts)):
            extra *= curve.prime_form_squared(pts[j].lift, pts[k].lift) ** (pts[j].degree * pts[k].degree)
    ratio = GG.tau_yy_genusg_squared(config, ordered=True) / GG.tau_yy_genusg_squared(config)
    assert abs(ratio / extra - 1) < 1e-10


def test_laurent_coefficients_at_a_pole(config):
    k = config.pole_indices[0]
    A, H, r = GG.laurent_phi(config, k)
    assert A == 2 and abs(r - 1) < 1e-6
    assert abs(H - GG.accessory_genusg(config, exact=True)[0]) < 1e-6


def test_periods_and_residues(config, periods):
    per, res = periods
    assert per.shape == (4,) and np.all(np.isfinite(per))
    np.testing.assert_allclose(res, GG.sb_residual_genusg(config), atol=1e-6)


def test_periods_are_homotopy_invariant(curve, config, periods):
    path = curve.cycle_path(curve.cycle("a", 0))
    rng = np.random.default_rng(1)
    bumped = [path[0]] + [v + 1e-3 * complex(*rng.standard_normal(2)) for v in path[1:-1]] + [path[-1]]
    assert abs(GG.period_along(config, bumped) - periods[0][0]) < 1e-9


def test_period_path_through_a_zero_is_refused(curve, config):
    x0 = config.points[config.zero_indices[0]].lift.x
    with pytest.raises(PathThroughDivisor):
        GG.period_along(config, [curve.base, x0, curve.base])


def test_hyperelliptic_function_series_and_derivative(curve):
    F = GG.HyperellipticFunction(curve, [0, 1, 0, 1], [2, 0.5])
    x0 = 0.4 + 0.3j
    y0 = curve.point(x0, 1).y
    branch = F.on_sheet(x0, y0)
    d = fd_derivative(branch, x0, 1e-3, "richardson").value
    assert abs(F.derivative(x0, y0) - d) < 1e-9
    co = F.taylor_at(x0, y0, 3)
    assert abs(co[0] - F(x0, y0)) < 1e-13 and abs(co[1] - d) < 1e-9


def test_q_factor_is_constant_on_the_covering(curve, covering):
    c, F = covering
    samples = [curve.lift(curve.point(x, s)) for x, s in ((0.4 + 0.3j, 1), (-0.6 + 0.2j, -1), (1.3 - 0.5j, 1))]
    value, q2 = GG.tau_b_three_halves(c, F, samples)
    assert np.ptp(np.abs(q2)) / abs(q2[0]) < 1e-8 and np.isfinite(value)
    with pytest.raises(QNotConstant):
        GG.tau_b_three_halves(c.with_jacobians([1, 1, 1, 1]).replaced(
            0, GG.DivisorPoint(curve.lift(curve.point(0.2, 1)), -1)), F, samples)


def test_covering_divisor_degrees():
    pts = GG.covering_divisor(None, [("a", 1), ("b", 2)], [("c", 3)])
    assert pts == [("a", -1), ("b", -2), ("c", 2)]


def test_dimension_count():
    d = GG.dimension_count(2, 3, 2, [1, 1, 1])
    assert (d.dimension, d.parameters, d.conditions) == (1, 6, 5)
    with pytest.raises(InconsistentProfile):
        GG.dimension_count(2, 3, 3, [1, 1, 1])


def test_json_round_trip(curve, config):
    back = GG.GenusGConfig.from_json(config.to_json(), curve)
    for a, b in zip(back.reduced_characteristic(), config.reduced_characteristic()):
        np.testing.assert_array_equal(a, b)
    L = curve.lift(curve.point(0.3 + 0.2j, 1))
    assert abs(GG.phi_squared(back, L) / GG.phi_squared(config, L) - 1) < 1e-8
