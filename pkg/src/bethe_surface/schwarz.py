"""Schwarzian derivatives, potentials built from developing maps, Laurent
analysis of potentials at double poles, and the solution pair
``(F / sqrt(F'), 1 / sqrt(F'))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BranchTrackingFailure, CriticalPoint, FitUnstable, ValidationError
from .numkit import laurent_coefficients, taylor_coefficients

CRITICAL_THRESHOLD = 1e-12


def taylor3(F, x, radius=1e-2):
    """Taylor coefficients ``c0..c3`` of a map at ``x``.

    Objects with a ``taylor(x, order)`` method (``ComplexRational``, the
    hyperelliptic maps in :mod:`genusg`) are expanded exactly; plain callables
    are expanded by Cauchy sampling on a circle of the given radius.
    """
    if hasattr(F, "taylor"):
        return np.asarray(F.taylor(x, 3), dtype=complex)
    return taylor_coefficients(F, x, radius, 3, n_points=32)


def schwarzian(F, x, radius=1e-2) -> complex:
    """``(F''/F')' - (F''/F')**2 / 2`` at ``x``.

    Raises
    ------
    CriticalPoint
        if ``|F'(x)|`` is below ``CRITICAL_THRESHOLD`` relative to the scale of F.
    """
    c = taylor3(F, x, radius)
    scale = max(1.0, abs(c[0]))
    if abs(c[1]) < CRITICAL_THRESHOLD * scale:
        raise CriticalPoint(f"F'({x}) vanishes")
    return complex(6 * c[3] / c[1] - 6 * (c[2] / c[1]) ** 2)


@dataclass(frozen=True)
class SingularPoint:
    location: complex
    quadratic_residue: complex | None = None
    accessory: complex | None = None


@dataclass(frozen=True)
class Potential:
    """A potential ``u`` in a declared chart.

    ``evaluator`` accepts scalars or arrays of chart coordinates.
    """

    evaluator: Callable
    singular_points: tuple = ()
    chart: str = "x"
    meta: dict = field(default_factory=dict)

    def __call__(self, xi):
        return self.evaluator(xi)


def potential_from_map(F, critical_points: Sequence = (), orders: Sequence = (), radius=1e-2,
                       chart="x") -> Potential:
    """Potential ``u = -{F, x} / 2`` of a developing map.

    ``critical_points`` are the declared zeros of ``F'`` with orders ``2 r_j``
    (pass ``orders`` as the ``r_j``); each is registered with quadratic residue
    ``r_j (r_j + 1)``.
    """
    if orders and len(orders) != len(critical_points):
        raise ValidationError("orders must match critical_points")

    def u(xi):
        xi_arr = np.asarray(xi, dtype=complex)
        out = np.array([-0.5 * schwarzian(F, complex(z), radius) for z in xi_arr.ravel()])
        return out.reshape(xi_arr.shape) if xi_arr.ndim else complex(out[0])

    sing = tuple(
        SingularPoint(complex(y), (r * (r + 1)) if orders else None)
        for y, r in zip(critical_points, orders or [None] * len(critical_points))
    )
    return Potential(u, sing, chart, {"source": "developing map"})


def laurent_extract(p, y, rho: float = 1e-2, n_points: int = 64, tol: float = 1e-6):
    """Quadratic residue ``A`` and simple-pole coefficient ``H`` of ``u`` at ``y``.

    ``u(xi) = A / xi**2 + H / xi + O(1)`` in the chart ``xi = x - y``.  The
    trigonometric moments are taken on circles of radius ``rho`` and
    ``rho / 2``; disagreement of the two ``A`` estimates beyond ``tol``
    (relative) raises ``FitUnstable``.
    """
    f = p.evaluator if isinstance(p, Potential) else p
    c1 = laurent_coefficients(f, y, rho, -2, -1, n_points)
    c2 = laurent_coefficients(f, y, rho / 2, -2, -1, n_points)
    if abs(c1[0] - c2[0]) > tol * max(1.0, abs(c1[0])):
        raise FitUnstable(f"quadratic residue estimates disagree: {c1[0]} vs {c2[0]}")
    return complex(c1[0]), complex(c1[1])


# ---------------------------------------------------------------------------
# square-root continuation and the solution pair
# ---------------------------------------------------------------------------

def track_sqrt(g: Callable, path: Sequence, root0: complex, forbidden: Sequence = (),
               clearance: float = 0.0, max_steps: int = 200000):
    """Continue ``sqrt(g)`` along a polyline starting from ``root0``.

    Steps are subdivided until the argument of ``g`` changes by less than
    ``pi/4`` per step.  Returns the square root at the final vertex.
    """
    path = [complex(v) for v in path]
    for a, b in zip(path[:-1], path[1:]):
        for q in forbidden:
            if _seg_dist(q, a, b) < clearance:
                raise BranchTrackingFailure(f"path passes within {clearance} of zero {q}")
    s = complex(root0)
    gv = complex(g(path[0]))
    if abs(s * s - gv) > 1e-8 * max(1.0, abs(gv)):
        raise ValidationError("root0 is not a square root of g at the path start")
    steps = 0
    for a, b in zip(path[:-1], path[1:]):
        t, dt = 0.0, 1.0
        while t < 1.0:
            dt = min(dt, 1.0 - t)
            z = a + (b - a) * (t + dt)
            gz = complex(g(z))
            if gz == 0 or abs(np.angle(gz / gv)) > np.pi / 4:
                dt *= 0.5
                steps += 1
                if dt < 1e-14 or steps > max_steps:
                    raise BranchTrackingFailure("square-root continuation stalled (zero of g on path?)")
                continue
            s = s * np.sqrt(gz / gv)
            gv, t = gz, t + dt
            dt *= 2
    return s


def _seg_dist(p, a, b):
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * np.conj(d)).real / abs(d) ** 2))
    return abs(p - (a + t * d))


class SolutionPair:
    """The pair ``phi_tilde = F / sqrt(F')``, ``phi = 1 / sqrt(F')``.

    The branch of ``sqrt(F')`` is fixed at ``base`` and continued along the
    straight segment (or an explicit polyline) to each evaluation point.
    """

    def __init__(self, F, base, critical_points=(), clearance=1e-3, root0=None, radius=1e-2):
        self.F = F
        self.base = complex(base)
        self.critical_points = tuple(complex(c) for c in critical_points)
        self.clearance = clearance
        self.radius = radius
        d0 = self._dF(self.base)
        self.root0 = np.sqrt(d0) if root0 is None else complex(root0)

    def _dF(self, x):
        return complex(taylor3(self.F, x, self.radius)[1])

    def sqrt_dF(self, x, path=None):
        path = [self.base, complex(x)] if path is None else list(path)
        return track_sqrt(self._dF, path, self.root0, self.critical_points, self.clearance)

    def phi(self, x, path=None):
        return 1.0 / self.sqrt_dF(x, path)

    def phi_tilde(self, x, path=None):
        return complex(self.F(complex(x))) / self.sqrt_dF(x, path)

    def values(self, x, path=None):
        """``(phi_tilde, phi, phi_tilde', phi')`` at ``x``."""
        c = taylor3(self.F, complex(x), self.radius)
        s = self.sqrt_dF(x, path)
        phi = 1.0 / s
        dphi = -c[2] / (s ** 3)  # d/dx (F')^(-1/2) = -F''/(2 F'^(3/2)), F'' = 2 c2
        return c[0] * phi, phi, c[1] * phi + c[0] * dphi, dphi

    def wronskian(self, x, path=None):
        pt, p, dpt, dp = self.values(x, path)
        return dpt * p - pt * dp


def solution_pair(F, base=None, critical_points=(), clearance=1e-3):
    """Construct a :class:`SolutionPair` with the branch fixed at ``base``."""
    if base is None:
        base = 0.37 + 0.21j
    return SolutionPair(F, base, critical_points, clearance)
