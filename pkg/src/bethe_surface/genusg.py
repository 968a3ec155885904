"""Monodromy-free potentials on hyperelliptic curves of genus ``g >= 2``.

A configuration is a divisor ``D = sum d_j p_j`` of lifted points with
``sum d_j = 1 - g`` together with half-integer vectors ``beta1, beta2``
solving ``-A(D) + K + Omega beta1 + beta2 = 0`` exactly for the given lifts
(base point ``b`` of the curve).  The section

    phi**2 = C(x)**(2/(g-1)) exp(4 pi i <beta1, K^x> / (1-g)) prod_j E(x, p_j)**(2 d_j)

is built from squared (branch-free) quantities throughout.

Every divisor point carries a chart: its canonical chart (see
:meth:`HyperellipticCurve.chart`) rescaled by ``J = d xi_canonical / d zeta``.
A tensor of weight ``w`` at that point is multiplied by ``J**w`` to express
it in the declared chart.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (AtDivisor, DegenerateConfig, InconsistentProfile, NotCanonical, PathThroughDivisor,
                     QNotConstant, ValidationError)
from .hypersurface import HyperellipticCurve, Lift, SurfacePoint
from .numkit import laurent_coefficients, series_sqrt, taylor_coefficients
from .schwarz import Potential

FD_STEP = 1e-3


# ---------------------------------------------------------------------------
# configurations
# ---------------------------------------------------------------------------

def characteristic_vectors(curve: HyperellipticCurve, lifts, degrees, tol: float = 1e-6):
    """``(beta1, beta2, residual)`` with ``Omega beta1 + beta2 = A(D) - K^b``.

    The half-integer vectors are *not* reduced modulo 1: they solve the
    relation exactly for the given lifts.  Use ``np.mod(beta, 1)`` for the
    reduced characteristic.

    Raises
    ------
    NotCanonical
        if the solution is not half-integer within ``tol`` (``-2D`` not canonical).
    """
    t = sum(d * L.abel for L, d in zip(lifts, degrees)) - curve.K_base
    Om = curve.Omega.omega
    b1 = np.linalg.solve(Om.imag, t.imag)
    b2 = (t - Om @ b1).real
    r1, r2 = np.round(2 * b1) / 2, np.round(2 * b2) / 2
    residual = float(np.max(np.abs(t - Om @ r1 - r2)))
    if residual > tol:
        raise NotCanonical(f"divisor is not half-canonical (residual {residual:.2e})")
    return r1, r2, residual


@dataclass
class DivisorPoint:
    lift: Lift
    degree: int
    jac: complex = 1.0  # d(canonical chart) / d(declared chart) at the point


class GenusGConfig:
    """Divisor, characteristic and charts on a hyperelliptic curve of genus ``g >= 2``.

    Parameters
    ----------
    curve : HyperellipticCurve
    points : list of Lift or DivisorPoint
    degrees : list of int
        ``+1`` for zeros of ``phi``, ``-r`` for poles of order ``r``.
    beta : (beta1, beta2), optional
        If omitted they are derived with :func:`characteristic_vectors`.
    check : bool
        Enforce ``sum d = 1 - g``, distinctness and half-canonicity.
    """

    def __init__(self, curve: HyperellipticCurve, points, degrees=None, beta=None, check: bool = True):
        if curve.g < 2:
            raise ValidationError("genus-g configs need g >= 2 (use the elliptic module for g = 1)")
        pts = []
        for i, p in enumerate(points):
            if isinstance(p, DivisorPoint):
                pts.append(p)
            else:
                pts.append(DivisorPoint(p, int(degrees[i])))
        self.curve = curve
        self.points = pts
        if check:
            if sum(p.degree for p in pts) != 1 - curve.g:
                raise InconsistentProfile(f"need sum d = 1 - g = {1 - curve.g}")
            for i in range(len(pts)):
                for j in range(i):
                    a, b = pts[i].lift.point, pts[j].lift.point
                    if a.kind == b.kind and a.sheet == b.sheet and (
                            (a.is_infinite and b.is_infinite)
                            or (not a.is_infinite and abs(a.x - b.x) < 1e-9 and abs(a.y - b.y) < 1e-6)):
                        raise DegenerateConfig("divisor points coincide")
        if beta is None:
            b1, b2, self.beta_residual = characteristic_vectors(curve, [p.lift for p in pts],
                                                                [p.degree for p in pts])
        else:
            b1, b2 = (np.asarray(v, dtype=float) for v in beta)
            self.beta_residual = None
        self.beta1, self.beta2 = b1, b2

    # index helpers
    @property
    def g(self):
        return self.curve.g

    @property
    def zero_indices(self):
        return [i for i, p in enumerate(self.points) if p.degree > 0]

    @property
    def pole_indices(self):
        return [i for i, p in enumerate(self.points) if p.degree < 0]

    @property
    def n(self):
        return sum(p.degree for p in self.points if p.degree > 0)

    @property
    def m(self):
        return len(self.pole_indices)

    @property
    def orders(self):
        return [-self.points[i].degree for i in self.pole_indices]

    def reduced_characteristic(self):
        return np.mod(self.beta1, 1.0), np.mod(self.beta2, 1.0)

    def replaced(self, idx, point: DivisorPoint) -> "GenusGConfig":
        pts = list(self.points)
        pts[idx] = point
        return GenusGConfig(self.curve, pts, beta=(self.beta1, self.beta2), check=False)

    def with_jacobians(self, jacs) -> "GenusGConfig":
        pts = [DivisorPoint(p.lift, p.degree, complex(j)) for p, j in zip(self.points, jacs)]
        return GenusGConfig(self.curve, pts, beta=(self.beta1, self.beta2), check=False)

    def moved(self, idx, zeta) -> "GenusGConfig":
        """Config with point ``idx`` moved to canonical-chart coordinate ``zeta``.

        The moved point keeps the original chart (so its Jacobian becomes
        ``dX/dzeta`` times the original one).
        """
        p = self.points[idx]
        chart = self.curve.chart(p.lift.point)
        L = self.curve.local_lift(p.lift, zeta, chart)
        jac = p.jac * (complex(chart.dX(zeta)) if complex(zeta) != 0 else 1.0)
        return self.replaced(idx, DivisorPoint(L, p.degree, jac))

    def to_json(self):
        def enc(p: DivisorPoint):
            pt = p.lift.point
            if pt.is_infinite:
                out = {"inf": True, "sheet": pt.sheet}
            else:
                sheet = 0 if pt.kind == "branch" else (1 if abs(pt.y - np.sqrt(self.curve.P(pt.x))) < 1e-9 * max(1, abs(pt.y)) else -1)
                out = {"x": [pt.x.real, pt.x.imag], "sheet": sheet}
            if p.degree < 0:
                out["order"] = -p.degree
            elif p.degree > 1:
                out["multiplicity"] = p.degree
            return out
        return {"curve": self.curve.to_json(),
                "zeros": [enc(self.points[i]) for i in self.zero_indices],
                "poles": [enc(self.points[i]) for i in self.pole_indices],
                "beta1": list(map(float, self.beta1)), "beta2": list(map(float, self.beta2)),
                "base": [self.curve.base.real, self.curve.base.imag]}

    @classmethod
    def from_json(cls, obj, curve: HyperellipticCurve | None = None):
        if isinstance(obj, str):
            obj = json.loads(obj)
        if curve is None:
            curve = HyperellipticCurve.from_json(obj["curve"])
        pts, degs = [], []
        for key, sign in (("zeros", 1), ("poles", -1)):
            for e in obj.get(key, []):
                pts.append(curve.lift(_decode_point(curve, e)))
                degs.append(sign * int(e.get("order", e.get("multiplicity", 1))))
        return cls(curve, pts, degs)


def _decode_point(curve, e) -> SurfacePoint:
    if e.get("inf"):
        return curve.infinity(int(e.get("sheet", 1)))
    x = complex(*e["x"])
    sheet = int(e.get("sheet", 1))
    if sheet == 0 or np.min(np.abs(curve.roots - x)) < 1e-12 * curve.scale:
        return curve.branch_point(int(np.argmin(np.abs(curve.roots - x))))
    return curve.point(x, sheet)


def random_admissible_config(curve: HyperellipticCurve, orders, rng, half_period=None,
                             radius: float = 1.0, max_tries: int = 20) -> GenusGConfig:
    """Random poles and ``n - g`` random zeros, the last ``g`` zeros by Jacobi inversion.

    The target ``-A(D) + K = -(Omega h1 + h2)`` uses a half-period ``(h1, h2)``
    (random if not given), so ``-2D`` is canonical.
    """
    from .errors import NumericalFailure

    g = curve.g
    orders = [int(r) for r in orders]
    n = sum(orders) + 1 - g
    if n < g:
        raise InconsistentProfile("need at least g zeros for Jacobi completion")
    centre = np.mean(curve.roots)

    def rand_point():
        while True:
            x = centre + radius * curve.scale * (rng.standard_normal() + 1j * rng.standard_normal()) * 0.6
            if np.min(np.abs(curve.roots - x)) > 0.15 * curve.sep:
                return curve.point(x, int(rng.choice([-1, 1])))

    for _ in range(max_tries):
        h = rng.integers(0, 2, size=2 * g) / 2 if half_period is None else np.concatenate(half_period)
        poles = [curve.lift(rand_point()) for _ in orders]
        free = [curve.lift(rand_point()) for _ in range(n - g)]
        w = (curve.K_base + curve.Omega.omega @ h[:g] + h[g:]
             + sum(r * L.abel for r, L in zip(orders, poles)) - sum((L.abel for L in free), np.zeros(g)))
        try:
            Z, _, _ = curve.jacobi_inversion(w)
            cfg = GenusGConfig(curve, free + Z + poles, [1] * n + [-r for r in orders])
        except (NumericalFailure, ValidationError):
            continue
        pts = [p.lift.point for p in cfg.points]
        if min(abs(a.x - b.x) for i, a in enumerate(pts) for b in pts[:i]) < 0.05 * curve.sep:
            continue
        return cfg
    raise DegenerateConfig("could not generate an admissible config")


# ---------------------------------------------------------------------------
# evaluation of the building blocks in declared charts
# ---------------------------------------------------------------------------

def _E2(curve, p: Lift, q: Lift, jp=1.0, jq=1.0):
    """``E(p,q)**2`` with each slot in its declared chart (weight -1 per slot)."""
    return curve.prime_form_squared(p, q) / (jp * jq)


def _C_power(curve, L: Lift, jac=1.0):
    """``C(x)**(2/(g-1))`` in the declared chart at ``x`` (weight ``-g``)."""
    g = curve.g
    c = curve.c_differential(L)
    return c ** (2.0 / (g - 1)) * jac ** (-g)


def _same_point(a: SurfacePoint, b: SurfacePoint):
    if a.is_infinite or b.is_infinite:
        return a.is_infinite and b.is_infinite and a.sheet == b.sheet
    return abs(a.x - b.x) < 1e-12 * max(1.0, abs(a.x)) and abs(a.y - b.y) < 1e-9 * max(1.0, abs(a.y))


def phi_squared(c: GenusGConfig, L: Lift, jac=1.0) -> complex:
    """``phi(x)**2`` in the declared chart at ``x`` (canonical chart times ``jac``).

    Raises
    ------
    AtDivisor
        if ``x`` is a divisor point.
    """
    curve, g = c.curve, c.g
    for p in c.points:
        if _same_point(p.lift.point, L.point):
            raise AtDivisor("phi is evaluated at a divisor point")
    K = curve.riemann_constants(L, check=False)
    val = _C_power(curve, L, jac) * np.exp(4j * np.pi * (c.beta1 @ K) / (1 - g))
    for p in c.points:
        val *= _E2(curve, L, p.lift, jac, p.jac) ** p.degree
    return complex(val)


def phi_eval(c: GenusGConfig, L: Lift, jac=1.0) -> complex:
    """``phi(x)`` (principal square root of :func:`phi_squared`; the overall sign is a spin choice)."""
    return complex(np.sqrt(phi_squared(c, L, jac)))


def phi_squared_in_chart(c: GenusGConfig, centre: Lift, zeta, chart=None) -> complex:
    """``phi**2`` at the point with coordinate ``zeta`` of the chart at ``centre`` (in that chart)."""
    chart = c.curve.chart(centre.point) if chart is None else chart
    zeta = complex(zeta)
    if zeta == 0:
        return phi_squared(c, centre)
    L = c.curve.local_lift(centre, zeta, chart)
    return phi_squared(c, L, complex(chart.dX(zeta)))


def _vectorize(fun):
    def f(z):
        z = np.asarray(z, dtype=complex)
        return np.array([fun(complex(v)) for v in z.ravel()]).reshape(z.shape)
    return f


def _dlog(values_at, h):
    """Richardson-extrapolated ``d/dzeta log f`` at 0 from ``f(+-h)``, ``f(+-2h)`` (vector valued)."""
    fp, fm, f2p, f2m = (np.asarray(values_at(s * h), dtype=complex) for s in (1, -1, 2, -2))
    d1 = np.log(fp / fm) / (2 * h)
    d2 = np.log(f2p / f2m) / (4 * h)
    return (4 * d1 - d2) / 3


def _step(c, idx, h):
    chart = c.curve.chart(c.points[idx].lift.point)
    return h * min(1.0, chart.radius)


# ---------------------------------------------------------------------------
# SB system, tau_YY and accessory parameters
# ---------------------------------------------------------------------------

def sb_residual_genusg(c: GenusGConfig, h: float = FD_STEP) -> np.ndarray:
    """Residuals at the first ``n - 1`` zeros, in their declared charts.

    ``sum_j r_j E'/E(x_k, y_j) - sum_{j != k} E'/E(x_k, x_j) + C'/C(x_k)/(1-g) + 2 pi i <beta1, v(x_k)>``
    with derivatives by Richardson-extrapolated central differences.
    """
    curve, g = c.curve, c.g
    zeros = c.zero_indices
    out = []
    for k in zeros[:-1] if zeros else []:
        if c.points[k].degree != 1:
            raise DegenerateConfig("SB residuals need simple zeros")
        step = _step(c, k, h)
        others = [j for j in range(len(c.points)) if j != k]

        def vals(z, k=k, others=others):
            ck = c.moved(k, z)
            pk = ck.points[k]
            e2 = [_E2(curve, pk.lift, ck.points[j].lift, pk.jac, ck.points[j].jac) for j in others]
            return e2 + [_C_power(curve, pk.lift, pk.jac)]

        d = _dlog(vals, step)
        res = -0.5 * sum(c.points[j].degree * d[i] for i, j in enumerate(others))
        # d log C^(2/(g-1)) = 2/(g-1) C'/C, so C'/C/(1-g) = -d/2
        res += -0.5 * d[-1]
        pk = c.points[k]
        res += 2j * np.pi * (c.beta1 @ curve.chart(pk.lift.point).v(0.0))
        # d/dzeta = jac d/dxi in the declared chart
        out.append(res * pk.jac)
    return np.array(out, dtype=complex)


def residue_oracle_genusg(c: GenusGConfig, k: int, rho=None, n_points: int = 64) -> complex:
    """``c_{-1} / (2 c_{-2})`` of ``phi**-2`` at divisor point ``k`` from trapezoidal moments on a circle."""
    curve = c.curve
    p = c.points[k]
    chart = curve.chart(p.lift.point)
    if rho is None:
        dist = [abs(q.lift.x - p.lift.x) for i, q in enumerate(c.points) if i != k and not q.lift.point.is_infinite]
        rho = 0.2 * min([chart.radius] + dist)
    f = _vectorize(lambda z: 1.0 / phi_squared_in_chart(c, p.lift, z, chart))
    cm2, cm1 = laurent_coefficients(f, 0.0, rho, -2, -1, n_points)
    return complex(cm1 / (2 * cm2) * p.jac)


def tau_yy_genusg_squared(c: GenusGConfig, ordered: bool = False) -> complex:
    """``tau_YY**2``: ``exp(-4 pi i <beta1, sum A(x_k)>) prod C(x_k)**(2/(g-1)) prod_{j<k} E(p_j,p_k)**(2 d_j d_k)``.

    With ``ordered=True`` the prime-form product runs over ordered pairs ``j != k``.
    """
    curve = c.curve
    zsum = sum((c.points[i].lift.abel * c.points[i].degree for i in c.zero_indices), np.zeros(c.g))
    val = np.exp(-4j * np.pi * (c.beta1 @ zsum))
    for i in c.zero_indices:
        p = c.points[i]
        val *= _C_power(curve, p.lift, p.jac) ** p.degree
    pts = c.points
    for j in range(len(pts)):
        for k in range(j + 1, len(pts)):
            e2 = _E2(curve, pts[j].lift, pts[k].lift, pts[j].jac, pts[k].jac)
            val *= e2 ** (pts[j].degree * pts[k].degree * (2 if ordered else 1))
    return complex(val)


def tau_yy_genusg(c: GenusGConfig, ordered: bool = False) -> complex:
    """``tau_YY`` (principal square root of :func:`tau_yy_genusg_squared`)."""
    return complex(np.sqrt(tau_yy_genusg_squared(c, ordered)))


def dlog_tau_yy(c: GenusGConfig, idx: int, h: float = FD_STEP) -> complex:
    """``d log tau_YY / d zeta`` in the declared chart of point ``idx`` by central differences."""
    step = _step(c, idx, h)
    d = _dlog(lambda z: [tau_yy_genusg_squared(c.moved(idx, z))], step)[0]
    return complex(0.5 * d * c.points[idx].jac)


def accessory_genusg(c: GenusGConfig, exact: bool = False, h: float = FD_STEP) -> np.ndarray:
    """``H_k = 2 r_k [sum_{l != k} r_l E'_2/E(y_l, y_k) - sum_j E'_2/E(x_j, y_k)]`` in the pole charts.

    With ``exact=True`` the terms ``-2 r_k [C'/C(y_k)/(g-1) - 2 pi i <beta1, v(y_k)>]``
    are added, giving the simple-pole coefficient of the potential ``phi''/phi``.
    """
    curve, g = c.curve, c.g
    out = []
    for k in c.pole_indices:
        rk = -c.points[k].degree
        step = _step(c, k, h)
        others = [j for j in range(len(c.points)) if j != k]

        def vals(z, k=k, others=others):
            ck = c.moved(k, z)
            pk = ck.points[k]
            e2 = [_E2(curve, ck.points[j].lift, pk.lift, ck.points[j].jac, pk.jac) for j in others]
            if exact:
                e2.append(_C_power(curve, pk.lift, pk.jac))
            return e2

        d = _dlog(vals, step)
        Hk = -2 * rk * sum(c.points[j].degree * 0.5 * d[i] for i, j in enumerate(others))
        if exact:
            v = curve.chart(c.points[k].lift.point).v(0.0)
            Hk += -2 * rk * (0.5 * d[-1] - 2j * np.pi * (c.beta1 @ v))
        out.append(Hk * c.points[k].jac)
    return np.array(out, dtype=complex)


def laurent_phi(c: GenusGConfig, k: int, rho=None, n_points: int = 64):
    """Quadratic residue and simple-pole coefficient of ``phi''/phi`` at pole ``k``.

    ``zeta**(2r) phi**2 = c0 + c1 zeta + ...`` gives ``A = r(r+1)`` and
    ``H = -r c1 / c0``; the measured ``A`` is the fitted pole order.
    Returns ``(A, H, r_fitted)``.
    """
    curve = c.curve
    p = c.points[k]
    chart = curve.chart(p.lift.point)
    if rho is None:
        dist = [abs(q.lift.x - p.lift.x) for i, q in enumerate(c.points) if i != k and not q.lift.point.is_infinite]
        rho = 0.2 * min([chart.radius] + dist)
    psi = _vectorize(lambda z: phi_squared_in_chart(c, p.lift, z, chart))
    # pole order from the winding of psi round the circle
    zs = rho * np.exp(2j * np.pi * np.arange(n_points) / n_points)
    vals = psi(zs)
    wind = np.sum(np.angle(np.roll(vals, -1) / vals)) / (2 * np.pi)
    r = -wind / 2
    rr = int(round(r.real))
    co = taylor_coefficients(lambda z: np.asarray(z) ** (2 * rr) * psi(z), 0.0, rho, 1, n_points)
    H = -rr * co[1] / co[0]
    return complex(rr * (rr + 1)), complex(H * p.jac), float(r)


def potential_genusg(c: GenusGConfig, centre: Lift, chart=None, inner: float = None) -> Potential:
    """``u = psi''/(2 psi) - psi'**2/(4 psi**2)`` with ``psi = phi**2`` in the chart at ``centre``.

    Derivatives of ``psi`` come from Cauchy sampling on a small circle of
    radius ``inner`` around each evaluation point.
    """
    curve = c.curve
    chart = curve.chart(centre.point) if chart is None else chart
    inner = 0.02 * chart.radius if inner is None else inner
    psi = _vectorize(lambda z: phi_squared_in_chart(c, centre, z, chart))

    def u_scalar(z):
        co = taylor_coefficients(psi, z, inner, 2, 16)
        p0, p1, p2 = co[0], co[1], 2 * co[2]
        return p2 / (2 * p0) - p1 ** 2 / (4 * p0 ** 2)

    return Potential(_vectorize(u_scalar), (), chart.kind, {"centre": centre.point})


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------

def _integrate_inv_phi2(c: GenusGConfig, vertices, clearance):
    curve = c.curve
    for p in c.points:
        if p.degree > 0 and not p.lift.point.is_infinite:
            for a, b in zip(vertices[:-1], vertices[1:]):
                if float(curve._seg_distance(complex(a), complex(b), np.array([p.lift.x]))[0]) < clearance:
                    raise PathThroughDivisor("cycle path passes too close to a zero of phi")
    tr = curve.trace(vertices, curve.y_base)
    total = 0j
    for x, y, dx, cum in zip(tr["x"], tr["y"], tr["dx"], tr["cum"]):
        L = Lift(SurfacePoint(complex(x), complex(y)), cum @ curve.Ainv, cum)
        total += dx / phi_squared(c, L)
    return complex(total)


def period_conditions_genusg(c: GenusGConfig, clearance: float = 1e-2):
    """``(periods, residues)``: ``phi**-2`` integrated over ``a_1..a_g, b_1..b_g`` and the SB residues.

    Residues are the quadrature oracle values at the first ``n - 1`` zeros.

    Raises
    ------
    PathThroughDivisor
        if a cycle representative passes within ``clearance`` of a zero of ``phi``.
    """
    curve = c.curve
    periods = []
    for name in ("a", "b"):
        for j in range(c.g):
            periods.append(_integrate_inv_phi2(c, curve.cycle_path(curve.cycle(name, j)), clearance))
    residues = [residue_oracle_genusg(c, k) for k in c.zero_indices[:-1]]
    return np.array(periods), np.array(residues, dtype=complex)


def period_along(c: GenusGConfig, vertices, clearance: float = 1e-2) -> complex:
    """``int phi**-2`` along an explicit closed polyline from the base point."""
    return _integrate_inv_phi2(c, [complex(v) for v in vertices], clearance)


# ---------------------------------------------------------------------------
# coverings and tau_B
# ---------------------------------------------------------------------------

class HyperellipticFunction:
    """Meromorphic function ``F = a(x) + b(x) y`` on a hyperelliptic curve."""

    def __init__(self, curve: HyperellipticCurve, a, b):
        self.curve = curve
        self.a = np.asarray(a, dtype=complex)
        self.b = np.asarray(b, dtype=complex)

    def __call__(self, x, y):
        pv = np.polynomial.polynomial.polyval
        return pv(x, self.a) + pv(x, self.b) * y

    def in_chart(self, chart, zeta):
        return self(chart.X(zeta), chart.Y(zeta))

    def taylor_at(self, x0, y0, order):
        """Taylor coefficients in ``x - x0`` on the sheet through ``(x0, y0)``."""
        from .numkit import _shift_poly, series_mul
        Pc = _shift_poly(self.curve.poly, x0, order)
        ys = y0 * series_sqrt(Pc / Pc[0], order, 1.0)
        ac = _shift_poly(self.a, x0, order)
        bc = _shift_poly(self.b, x0, order)
        return ac + series_mul(bc, ys, order)

    def derivative(self, x, y):
        pv = np.polynomial.polynomial.polyval
        P = np.polynomial.polynomial
        return (pv(x, P.polyder(self.a)) + pv(x, P.polyder(self.b)) * y
                + pv(x, self.b) * pv(x, P.polyder(self.curve.poly)) / (2 * y))

    def on_sheet(self, x0, y0):
        """A plain map object (with ``taylor``) for the local branch through ``(x0, y0)``."""
        F = self

        class _Branch:
            def __init__(self):
                self.y_ref = y0

            def __call__(self, x):
                y = F.curve.sqrtP_near(x, self.y_ref)
                return F(x, y)

            def taylor(self, x, order):
                y = F.curve.sqrtP_near(x, self.y_ref)
                return F.taylor_at(complex(x), y, order)

        return _Branch()


def covering_divisor(F: HyperellipticFunction, critical, poles):
    """Divisor of ``phi = 1/sqrt(dF)``.

    ``critical`` lists ``(point, r)`` with ``F - F(p)`` vanishing to order ``2r+1``;
    ``poles`` lists ``(point, k)`` with ``F`` having a pole of order ``k`` (odd),
    contributing ``d = (k + 1) / 2``.
    """
    pts = [(p, -int(r)) for p, r in critical] + [(p, (int(k) + 1) // 2) for p, k in poles]
    return pts


def distinguished_jacobians(c: GenusGConfig, F: HyperellipticFunction, rho_frac: float = 0.2,
                            n_points: int = 64):
    """``d xi / d zeta`` at each divisor point for the distinguished charts.

    At a pole of ``phi`` of order ``r``: ``zeta = (F - F(p))**(1/(2r+1))``.
    At a zero of multiplicity ``d``: ``zeta = (1/F)**(1/(2d-1))``.
    Principal roots are used for the leading coefficient.
    """
    curve = c.curve
    out = []
    for p in c.points:
        chart = curve.chart(p.lift.point)
        rho = rho_frac * chart.radius
        f = lambda z: F.in_chart(chart, z)
        if p.degree < 0:
            r = -p.degree
            k = 2 * r + 1
            co = laurent_coefficients(f, 0.0, rho, 0, k, n_points)
            lead = co[k]
            out.append(lead ** (-1.0 / k))
        else:
            k = 2 * p.degree - 1
            co = laurent_coefficients(f, 0.0, rho, -k, -k, n_points)
            out.append(co[0] ** (1.0 / k))
    return np.array(out, dtype=complex)


def q_factor_squared(c_dist: GenusGConfig, F: HyperellipticFunction, L: Lift) -> complex:
    """``Q**2 = F'(x) phi~(x)**2`` with ``phi~`` built on distinguished charts (x-independent)."""
    return complex(F.derivative(L.x, L.y) * phi_squared(c_dist, L))


def tau_b_three_halves(c: GenusGConfig, F: HyperellipticFunction, samples, rel_tol: float = 1e-4):
    """``Q**((g-1)/2) exp(-pi i <beta1, Omega beta1>/4) prod_{j<k} E~(p_j,p_k)**(d_j d_k)``.

    ``samples`` are lifts where ``Q**2`` is evaluated; their spread must stay
    below ``rel_tol``.  Returns ``(value, Q2_values)``.

    Raises
    ------
    QNotConstant
        if the ``Q**2`` samples disagree.
    """
    jac = distinguished_jacobians(c, F)
    cd = c.with_jacobians(jac)
    q2 = np.array([q_factor_squared(cd, F, L) for L in samples])
    spread = float(np.max(np.abs(q2 - q2[0])) / abs(q2[0]))
    if spread > rel_tol:
        raise QNotConstant(f"Q**2 varies by {spread:.2e} across samples")
    g = c.g
    Om = c.curve.Omega.omega
    val = np.sqrt(q2[0]) ** ((g - 1) / 2) * np.exp(-0.25j * np.pi * c.beta1 @ Om @ c.beta1)
    pts = cd.points
    for j in range(len(pts)):
        for k in range(j + 1, len(pts)):
            e2 = _E2(c.curve, pts[j].lift, pts[k].lift, pts[j].jac, pts[k].jac)
            val *= np.sqrt(e2) ** (pts[j].degree * pts[k].degree)
    return complex(val), q2


# ---------------------------------------------------------------------------
# bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimensionCount:
    dimension: int
    parameters: int
    conditions: int
    detail: dict = field(default_factory=dict)


def dimension_count(g: int, m: int, n: int, r) -> DimensionCount:
    """Dimension ``m - 2`` of the space of monodromy-free potentials with the given profile.

    Parameters: ``2g - 3 + n + m``; conditions: ``2g + n - 1`` (``2g`` periods
    and ``n - 1`` residues of ``phi**-2``).

    Raises
    ------
    InconsistentProfile
        if ``n - sum(r) != 1 - g`` or ``len(r) != m``.
    """
    r = list(r)
    if len(r) != m:
        raise InconsistentProfile("need one order per pole")
    if n - sum(r) != 1 - g:
        raise InconsistentProfile(f"n - sum(r) = {n - sum(r)} but 1 - g = {1 - g}")
    params = 2 * g - 3 + n + m
    conds = 2 * g + n - 1
    return DimensionCount(params - conds, params, conds,
                          {"periods": 2 * g, "residues": n - 1, "moduli_and_points": params})
