import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bethe_surface.errors import ClearanceViolated
from bethe_surface.genus0 import Genus0Config
from bethe_surface.monodromy import (
    MonodromyMatrix,
    check_trivial,
    curve_critical_points,
    loop_from_json,
    ode_transport,
    parabolic_basis,
    parabolic_entry,
)
from bethe_surface.numkit import ComplexRational, ContourSpec

UNIT = ContourSpec.circle(0.0, 1.0)


def test_free_equation_has_trivial_monodromy():
    M = ode_transport(lambda x: 0.0, UNIT)
    assert M.classify() == ("identity", None)


@settings(max_examples=10)
@given(st.floats(-0.2, 2.0))
def test_euler_equation_trace(a):
    # phi = x**s with s (s - 1) = a; eigenvalues exp(2 pi i s)
    s = 0.5 + cmath.sqrt(0.25 + a)
    M = ode_transport(lambda x: a / x ** 2, UNIT)
    expected = cmath.exp(2j * math.pi * s) + cmath.exp(2j * math.pi * (1 - s))
    assert abs(M.trace - expected) < 1e-7


@pytest.mark.parametrize("r", [1, 2, 3])
def test_integer_exponents_give_identity(r):
    M = ode_transport(lambda x: r * (r + 1) / x ** 2, UNIT)
    assert M.distance_to_identity() < 1e-8


def test_parabolic_entry_equals_residue():
    # phi = (x - 1)(x + 1)/x does not solve the SB system: res_{x=1} phi**-2 = 1/4
    c = Genus0Config((1.0, -1.0), (0.0,), (1,))
    phi = lambda x: (x - 1) * (x + 1) / x
    loop = ContourSpec.circle(1.0, 0.5)
    assert abs(parabolic_entry(phi, loop) - 2j * math.pi / 4) < 1e-12
    rep = check_trivial(c)
    assert not rep.trivial
    entries = [r.entry for r in rep.loops if r.kind == "parabolic"]
    assert any(abs(abs(e) - math.pi / 2) < 1e-6 for e in entries)


def test_parabolic_basis_is_unimodular():
    B = parabolic_basis(2.0 + 1j, 0.3)
    assert abs(np.linalg.det(B) + 1) < 1e-15


def test_flagship_map_is_monodromy_free():
    rep = check_trivial(ComplexRational([1.0], [-1.0, 0, 0, 1]))
    assert rep.trivial
    assert all(r.sign in (1, -1) for r in rep.loops)
    assert {r.order for r in rep.loops if r.label != "infinity"} == {1}


def test_generic_potential_is_not_trivial():
    M = ode_transport(lambda x: 0.3 / x ** 2 + 1 / x, UNIT)
    assert M.classify()[0] == "other"


def test_clearance_is_enforced():
    with pytest.raises(ClearanceViolated):
        ode_transport(lambda x: 1 / x ** 2, ContourSpec.circle(0.0, 1.0), singular_points=[1.01],
                      clearance=0.05)


def test_classification_of_explicit_matrices():
    assert MonodromyMatrix(-np.eye(2)).classify() == ("minus-identity", None)
    kind, entry = MonodromyMatrix(np.array([[1, 0], [0.7j, 1]])).classify()
    assert kind == "parabolic" and entry == 0.7j


def test_composition_multiplies():
    a = MonodromyMatrix(np.array([[1, 1], [0, 1]], dtype=complex))
    assert np.allclose((a @ a).matrix, [[1, 2], [0, 1]])


def test_loop_json():
    loop = loop_from_json({"kind": "circle", "center": [1, 0], "radius": 0.5})
    assert loop.kind == "circle" and loop.center == 1


def test_curve_critical_points_are_zeros_of_the_differential():
    from bethe_surface.genusg import HyperellipticFunction
    from bethe_surface.hypersurface import HyperellipticCurve

    C = HyperellipticCurve([-1, 0, 0, 0, 0, 0, 1])
    F = HyperellipticFunction(C, [0, 0, 0, 1], [1])
    pts = curve_critical_points(F)
    assert len(pts) > 0
    for x, y in pts:
        assert abs(F.derivative(x, y)) < 1e-7 * max(1, abs(x)) ** 3
