import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from bethe_surface.errors import BranchTrackingFailure, CriticalPoint
from bethe_surface.numkit import ComplexRational, fd_derivative
from bethe_surface.schwarz import (
    laurent_extract,
    potential_from_map,
    schwarzian,
    solution_pair,
    track_sqrt,
)

coef = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))


@pytest.mark.parametrize("n", [2, 3, 5, -1, -2])
def test_schwarzian_of_power_map(n):
    x = 0.8 + 0.3j
    F = ComplexRational.polynomial([0] * n + [1]) if n > 0 else ComplexRational([1.0], [0] * (-n) + [1])
    assert abs(schwarzian(F, x) - (1 - n * n) / (2 * x * x)) < 1e-11


def test_schwarzian_of_plain_callable():
    assert abs(schwarzian(np.exp, 0.2 - 0.1j) + 0.5) < 1e-9


@given(coef, coef, coef, coef)
def test_mobius_post_composition_leaves_schwarzian_unchanged(a, b, c, d):
    assume(abs(a * d - b * c) > 0.3)
    F = ComplexRational.polynomial([0, 1, 0.5, 0.2])
    x = 0.4 + 0.6j
    G = F.compose_mobius_after(a, b, c, d)
    assume(abs(c * F(x) + d) > 0.2)
    assert abs(schwarzian(G, x) - schwarzian(F, x)) < 1e-7 * max(1, abs(schwarzian(F, x)))


def test_schwarzian_at_critical_point_raises():
    with pytest.raises(CriticalPoint):
        schwarzian(ComplexRational.polynomial([0, 0, 1]), 0.0)


def test_quadratic_residue_of_cube_map():
    u = potential_from_map(ComplexRational.polynomial([0, 0, 0, 1]), [0.0], [1])
    A, H = laurent_extract(u, 0.0)
    assert abs(A - 2) < 1e-9 and abs(H) < 1e-9
    assert u.singular_points[0].quadratic_residue == 2


def test_track_sqrt_flips_sign_around_a_simple_zero():
    g = lambda z: z
    loop = [1, 1j, -1, -1j, 1]
    assert abs(track_sqrt(g, loop, 1.0) + 1) < 1e-12
    assert abs(track_sqrt(lambda z: z - 5, loop, 2j) - 2j) < 1e-12


def test_track_sqrt_refuses_to_pass_near_a_zero():
    with pytest.raises(BranchTrackingFailure):
        track_sqrt(lambda z: z, [-1, 1], 1j, forbidden=[0.0], clearance=1e-3)


def test_solution_pair_wronskian_and_ode():
    F = ComplexRational([0, 0, 0, 1.0], [-1.0, 0, 0, 1])  # x^3 / (x^3 - 1)
    pair = solution_pair(F, critical_points=[0.0])
    u = potential_from_map(F)
    for x in (0.5 + 0.5j, 0.9 + 0.1j):
        assert abs(pair.wronskian(x) - 1) < 1e-10
        d2 = fd_derivative(lambda z: fd_derivative(pair.phi, z, 1e-3, "richardson").value, x, 1e-3,
                           "richardson").value
        assert abs(d2 - u(x) * pair.phi(x)) < 1e-6 * max(1, abs(d2))
