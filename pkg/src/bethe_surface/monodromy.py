"""Monodromy of ``phi'' = u phi`` by direct ODE transport along loops.

The first-order system for ``(phi, phi')`` is integrated along each piece of
a loop with an adaptive Runge-Kutta 5(4) scheme.  The fundamental matrix at
the end of the loop, written in the initial basis, is the monodromy matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ClearanceViolated, StepFailure, ValidationError
from .genus0 import Genus0Config, is_inf, phi_value
from .numkit import ComplexRational, ContourSpec, contour_integrate
from .schwarz import Potential, potential_from_map

RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class MonodromyMatrix:
    """``2 x 2`` monodromy normalized to ``det = 1``.

    ``sign_ambiguous`` marks bases built from square roots (only the
    ``PSL(2)`` class is meaningful); ``det_error`` is ``|det - 1|`` before
    normalization.
    """

    matrix: np.ndarray
    sign_ambiguous: bool = False
    det_error: float = 0.0

    @property
    def trace(self):
        return complex(np.trace(self.matrix))

    def distance_to_identity(self, sign=1):
        return float(np.max(np.abs(self.matrix - sign * np.eye(2))))

    def classify(self, tol: float = 1e-6):
        """``("identity" | "minus-identity" | "parabolic" | "other", entry)``.

        For parabolic matrices ``entry`` is the off-diagonal element of
        ``sign * M - I`` with the larger modulus.
        """
        M = self.matrix
        if self.distance_to_identity(1) < tol:
            return "identity", None
        if self.distance_to_identity(-1) < tol:
            return "minus-identity", None
        for s in (1, -1):
            if abs(s * self.trace - 2) < tol:
                N = s * M - np.eye(2)
                e = N[1, 0] if abs(N[1, 0]) >= abs(N[0, 1]) else N[0, 1]
                return "parabolic", complex(e)
        return "other", None

    def __matmul__(self, other):
        return MonodromyMatrix(self.matrix @ other.matrix, self.sign_ambiguous or other.sign_ambiguous)

    def to_json(self):
        kind, entry = self.classify()
        return {"matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
                "class": kind, "entry": None if entry is None else [entry.real, entry.imag],
                "sign_ambiguous": self.sign_ambiguous, "det_error": self.det_error}


def loop_from_json(obj) -> ContourSpec:
    """``{"kind": "circle", "center": [re, im], "radius": r}`` or ``{"kind": "polyline", "vertices": [...]}``."""
    return ContourSpec.from_json(obj)


class _PlainSampler:
    def __init__(self, u):
        self.u = u

    def along(self, loop: ContourSpec):
        return [lambda t, z=z: complex(self.u(complex(z(t)))) for z, _ in loop.pieces()]


def ode_transport(u, loop, basis=None, rtol: float = RTOL, atol: float = ATOL,
                  singular_points=(), clearance: float = 0.0, sign_ambiguous: bool = False) -> MonodromyMatrix:
    """Transport a solution basis of ``phi'' = u phi`` once around ``loop``.

    Parameters
    ----------
    u : callable or sampler
        ``u(x)`` in the chart of the loop, or an object whose ``along(loop)``
        returns one callable ``t -> u`` per loop piece (used on curves, where
        the value depends on the sheet).
    loop : ContourSpec or sequence of vertices
    basis : (2, 2) array, optional
        Columns are initial data ``(phi, phi')`` of the basis; identity by default.

    Raises
    ------
    ClearanceViolated
        if the loop passes within ``clearance`` of a declared singular point.
    StepFailure
        if the integrator fails.
    """
    if not isinstance(loop, ContourSpec):
        loop = ContourSpec.polyline([complex(v) for v in loop])
    for p in singular_points:
        if loop.distance_to(complex(p)) < clearance:
            raise ClearanceViolated(f"loop passes within {clearance} of {p}")
    sampler = u if hasattr(u, "along") else _PlainSampler(u)
    us = sampler.along(loop)
    state = np.eye(2, dtype=complex).ravel()
    for (z, dz), ut in zip(loop.pieces(), us):
        def rhs(t, s, ut=ut, dz=dz):
            d = complex(dz(t))
            Y = s.reshape(2, 2)
            return np.array([Y[1], ut(t) * Y[0]]).ravel() * d

        sol = solve_ivp(rhs, (0.0, 1.0), state, method="RK45", rtol=rtol, atol=atol)
        if not sol.success:
            raise StepFailure(sol.message)
        state = sol.y[:, -1]
    Phi = state.reshape(2, 2)
    B = np.eye(2, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    M = np.linalg.solve(B, Phi @ B)
    det = np.linalg.det(M)
    return MonodromyMatrix(M / np.sqrt(det), sign_ambiguous, float(abs(det - 1)))


def parabolic_entry(phi, loop, tol: float = 1e-12, squared: bool = False) -> complex:
    """``oint phi**-2 dx`` along ``loop`` (``phi`` returns ``phi**2`` when ``squared``)."""
    if not isinstance(loop, ContourSpec):
        loop = ContourSpec.polyline([complex(v) for v in loop])
    if squared:
        return contour_integrate(lambda x: 1.0 / phi(x), loop, tol)
    return contour_integrate(lambda x: 1.0 / phi(x) ** 2, loop, tol)


def parabolic_basis(phi0, dphi0):
    """Initial data of ``(phi~, phi)`` with ``phi~ = phi int_{x0} phi**-2``."""
    return np.array([[0.0, phi0], [1.0 / phi0, dphi0]], dtype=complex)


# ---------------------------------------------------------------------------
# curve loops
# ---------------------------------------------------------------------------

class CurveSampler:
    """``u = -{F, x}/2`` of a function ``F = a + b y`` along loops in the x-plane of a hyperelliptic curve.

    The sheet is continued along a dense grid on each piece, starting from ``y0``.
    """

    def __init__(self, F, y0, n_grid: int = 4000):
        self.F, self.y0, self.n_grid = F, complex(y0), n_grid

    def u_at(self, x, y):
        c = self.F.taylor_at(complex(x), complex(y), 3)
        return -0.5 * (6 * c[3] / c[1] - 6 * (c[2] / c[1]) ** 2)

    def along(self, loop: ContourSpec):
        curve = self.F.curve
        y = self.y0
        out = []
        for z, _ in loop.pieces():
            ts = np.linspace(0.0, 1.0, self.n_grid + 1)
            xs = z(ts)
            ys = np.empty(len(ts), dtype=complex)
            for i, x in enumerate(xs):
                y = curve.sqrtP_near(x, y)
                ys[i] = y

            def ut(t, z=z, ys=ys):
                i = int(np.clip(round(float(t) * self.n_grid), 0, self.n_grid))
                x = complex(z(t))
                return self.u_at(x, curve.sqrtP_near(x, ys[i]))

            out.append(ut)
        self.y_end = y
        return out


def curve_critical_points(F, tol: float = 1e-6):
    """Finite critical points ``(x, y)`` of ``F = a + b y`` away from branch points.

    Uses ``2 y F' = 2 a' y + R`` with ``R = 2 b' P + b P'`` and the resultant
    ``R**2 - 4 a'**2 P``; each root is matched to the sheets where ``F'`` vanishes.
    """
    P = np.polynomial.polynomial
    curve = F.curve
    da, db, dP = P.polyder(F.a), P.polyder(F.b), P.polyder(curve.poly)
    R = P.polyadd(2 * P.polymul(db, curve.poly), P.polymul(F.b, dP))
    N = P.polysub(P.polymul(R, R), 4 * P.polymul(P.polymul(da, da), curve.poly))
    N = np.trim_zeros(np.asarray(N, dtype=complex), "b")
    xs = P.polyroots(N) if len(N) > 1 else np.zeros(0)
    pts = []
    for x in xs:
        if any(abs(x - q[0]) < 1e-3 for q in pts) or np.min(np.abs(curve.roots - x)) < 1e-6:
            continue
        y = np.sqrt(curve.P(x))
        for yy in (y, -y):
            scale = max(1.0, abs(P.polyval(x, R)), abs(P.polyval(x, da) * yy))
            if abs(2 * P.polyval(x, da) * yy + P.polyval(x, R)) < tol * scale * 1e3:
                pts.append((complex(x), complex(yy)))
    return pts


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass
class LoopReport:
    label: str
    monodromy: MonodromyMatrix
    kind: str
    entry: complex | None
    order: int | None = None

    @property
    def sign(self):
        return {"identity": 1, "minus-identity": -1}.get(self.kind)

    def to_json(self):
        return {"label": self.label, "class": self.kind, "sign": self.sign, "order": self.order,
                "entry": None if self.entry is None else [self.entry.real, self.entry.imag],
                "monodromy": self.monodromy.to_json()}


@dataclass
class TrivialityReport:
    loops: list
    trivial: bool

    def to_json(self):
        return {"trivial": self.trivial, "loops": [r.to_json() for r in self.loops]}


def _radius_around(p, others, cap):
    d = [abs(p - q) for q in others if abs(p - q) > 1e-12]
    return min([cap] + [0.4 * v for v in d])


def _genus0_loops(F: ComplexRational):
    crit = list(F.critical_points())
    poles = list(F.poles())
    sing = crit + poles
    uniq = []
    for c in crit:
        if not any(abs(c - q) < 1e-5 for q, _ in uniq):
            r = sum(abs(c - q) < 1e-5 for q in crit) // 2
            uniq.append((c, r))
    loops = [(f"x={c:.6g}", ContourSpec.circle(c, _radius_around(c, sing, 0.5)), r) for c, r in uniq]
    big = 2 * max([abs(s) for s in sing] + [1.0]) + 1
    loops.append(("infinity", ContourSpec.circle(0.0, big), None))
    return loops


def check_trivial(target, loops=None, tol: float = 1e-6, y0=None) -> TrivialityReport:
    """Classify the monodromy of the potential attached to ``target`` around each loop.

    ``target`` is a rational map (``u = -{F, x}/2``), a genus-0 config
    (``u = phi''/phi``) or a :class:`~bethe_surface.genusg.HyperellipticFunction`.
    Without ``loops``, circles around every finite singular point (and, on a
    curve, the ``2g`` cycle representatives) are used.  The verdict is
    trivial iff every loop gives ``+I`` or ``-I``.  For genus-0 configs the
    basis is ``(phi~, phi)`` at the loop start, so a parabolic entry is the
    period ``oint phi**-2``.
    """
    from .genusg import HyperellipticFunction

    reports = []
    if isinstance(target, ComplexRational):
        u = potential_from_map(target)
        items = loops if loops is not None else _genus0_loops(target)
        for label, loop, r in _normalize(items):
            M = ode_transport(u, loop)
            reports.append(_report(label, M, tol, r))
    elif isinstance(target, Genus0Config):
        num = np.array([1.0 + 0j])
        den = np.array([1.0 + 0j])
        P = np.polynomial.polynomial
        for p, d in target.divisor():
            if is_inf(p):
                continue
            for _ in range(abs(d)):
                if d > 0:
                    num = P.polymul(num, [-p, 1])
                else:
                    den = P.polymul(den, [-p, 1])
        phi = ComplexRational(num, den)

        def u(x):
            c = phi.taylor(x, 2)
            return 2 * c[2] / c[0]

        pts = [p for p, _ in target.divisor() if not is_inf(p)]
        items = loops if loops is not None else [
            (f"x={p:.6g}", ContourSpec.circle(p, _radius_around(p, pts, 0.5)), None) for p in pts]
        for label, loop, r in _normalize(items):
            c0 = phi.taylor(complex(loop.pieces()[0][0](0.0)), 1)
            M = ode_transport(u, loop, basis=parabolic_basis(c0[0], c0[1]))
            reports.append(_report(label, M, tol, None))
    elif isinstance(target, HyperellipticFunction):
        curve = target.curve
        if loops is None:
            items = []
            crit = curve_critical_points(target)
            avoid = list(curve.roots) + [c[0] for c in crit]
            for x, y in crit:
                rad = _radius_around(x, avoid, 0.5)
                items.append((f"({x:.6g}, {y:.6g})", ContourSpec.circle(x, rad), None, y))
            for name in ("a", "b"):
                for j in range(curve.g):
                    verts = curve.cycle_path(curve.cycle(name, j))
                    items.append((f"{name}{j + 1}", ContourSpec.polyline(verts), None, curve.y_base))
        else:
            items = [(lab, lp, r, y0 if y0 is not None else curve.y_base) for lab, lp, r in _normalize(loops)]
        for label, loop, r, ystart in items:
            start = complex(loop.pieces()[0][0](0.0))
            ys = curve.sqrtP_near(start, ystart)
            M = ode_transport(CurveSampler(target, ys), loop)
            reports.append(_report(label, M, tol, None))
    else:
        raise ValidationError("unsupported target for check_trivial")
    trivial = all(r.kind in ("identity", "minus-identity") for r in reports)
    return TrivialityReport(reports, trivial)


def _normalize(items):
    out = []
    for i, it in enumerate(items):
        if isinstance(it, ContourSpec):
            out.append((f"loop{i + 1}", it, None))
        elif len(it) == 2:
            out.append((it[0], it[1], None))
        else:
            out.append(tuple(it[:3]))
    return out


def _report(label, M, tol, order):
    kind, entry = M.classify(tol)
    return LoopReport(label, M, kind, entry, order)


def genus0_phi_sampler(c: Genus0Config):
    return lambda x: phi_value(c, x)


__all__ = ["MonodromyMatrix", "ode_transport", "parabolic_entry", "parabolic_basis", "check_trivial",
           "CurveSampler", "curve_critical_points", "TrivialityReport", "LoopReport", "loop_from_json",
           "Potential"]
