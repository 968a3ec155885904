"""Hyperelliptic curves ``y**2 = P(x)`` of genus 1 and 2.

Every multivalued quantity (Abel map, Riemann constants, prime form, the
solution ``phi``) is a function of a *lift*: a point of the curve together
with the Abel image accumulated along an explicit path from the base point
``b``.  Lifts therefore identify points of the universal cover, and moving a
lift around a cycle changes its Abel image by the corresponding period.

Homology is built from ``2g`` *chain loops*: closed paths from ``b`` that run
out to a thin stadium around the chord joining two angularly consecutive
branch points and come back on the same sheet.  Their intersection signs are
resolved numerically (the unique choice giving a symmetric period matrix with
positive imaginary part), and a canonical basis is extracted by integer
symplectic reduction.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as _leg

from .errors import (BranchClearance, BranchTrackingFailure, CycleEncodingInvalid, DegenerateImage,
                     NotCanonical, SingularCharacteristic, ValidationError, ValidationFailed,
                     WronskianZero)
from .numkit import taylor_coefficients
from .riemanntheta import (PeriodMatrix, ThetaCharacteristic, all_characteristics, theta,
                           theta_char, theta_directional)

INFINITY = complex("inf")

_GL_N = 20
_GL_X, _GL_W = _leg.leggauss(_GL_N)


def _integration_matrix():
    """``S[j, k] = int_{-1}^{x_j} l_k(t) dt`` for the Lagrange basis on the GL nodes."""
    V = _leg.legvander(_GL_X, _GL_N - 1)
    Cinv = np.linalg.inv(V)
    S = np.zeros((_GL_N, _GL_N))
    for m in range(_GL_N):
        e = np.zeros(_GL_N)
        e[m] = 1.0
        S += np.outer(_leg.legval(_GL_X, _leg.legint(e, lbnd=-1)), Cinv[m])
    return S


_GL_S = _integration_matrix()


# ---------------------------------------------------------------------------
# points and charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfacePoint:
    """A point of the curve.

    ``kind`` is ``"regular"``, ``"branch"`` (finite branch point, ``y = 0``) or
    ``"infinity"``.  For even degree the two points at infinity carry
    ``sheet = +1`` (``y / x**(g+1) -> +sqrt(lc)``) or ``-1``; for odd degree
    the single point at infinity is a branch point with ``sheet = 0``.
    """

    x: complex
    y: complex = 0j
    kind: str = "regular"
    sheet: int = 0

    @property
    def is_infinite(self):
        return self.kind == "infinity"

    def to_json(self):
        if self.is_infinite:
            return {"inf": True, "sheet": self.sheet}
        return {"x": [self.x.real, self.x.imag], "y": [self.y.real, self.y.imag]}


@dataclass
class Lift:
    """A point together with its Abel image from the base point along a recorded path."""

    point: SurfacePoint
    abel: np.ndarray
    raw: np.ndarray
    path: list = field(default_factory=list, repr=False)

    @property
    def x(self):
        return self.point.x

    @property
    def y(self):
        return self.point.y


class Chart:
    """Local coordinate ``zeta`` centred at a point.

    Provides ``X(zeta)``, ``Y(zeta)`` and the raw differentials
    ``x**k dx / y`` expressed in ``zeta`` (``wraw``), all analytic on
    ``|zeta| < radius``.
    """

    def __init__(self, curve, kind, centre: SurfacePoint, radius, X, dX, Y, wraw):
        self.curve, self.kind, self.centre, self.radius = curve, kind, centre, radius
        self.X, self.dX, self.Y, self.wraw = X, dX, Y, wraw

    def point(self, zeta) -> SurfacePoint:
        zeta = complex(zeta)
        if zeta == 0:
            return self.centre
        return SurfacePoint(complex(self.X(zeta)), complex(self.Y(zeta)), "regular", 0)

    def v(self, zeta=0.0):
        """Normalized holomorphic differentials in this chart."""
        return self.wraw(complex(zeta)) @ self.curve.Ainv

    def v_taylor(self, order):
        """Taylor coefficients (rows) of the normalized differentials at the centre."""
        rad = 0.25 * self.radius
        cols = [taylor_coefficients(lambda z, k=k: self.wraw(z)[..., k], 0.0, rad, order, n_points=32)
                for k in range(self.curve.g)]
        return np.array(cols).T @ self.curve.Ainv


def _sqrt_factors(z, roots_shift):
    """``prod_i sqrt(1 + z * c_i)`` with principal branches (analytic for small ``z``)."""
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for c in roots_shift:
        out = out * np.sqrt(1 + z * c)
    return out


# ---------------------------------------------------------------------------
# the curve
# ---------------------------------------------------------------------------

class HyperellipticCurve:
    """``y**2 = P(x)`` with ``P`` of degree 3 to 6 and simple roots.

    Parameters
    ----------
    poly : sequence of complex
        Coefficients ``c0..cN`` of ``P`` (lowest degree first).
    tol : float
        Target accuracy for periods and theta sums.
    base : complex, optional
        Base point ``b`` of all paths (chosen automatically if omitted).

    Raises
    ------
    ValidationError
        if the degree is out of range or ``P`` has a repeated root.
    CycleEncodingInvalid
        if no sign assignment of the chain intersections yields a valid period matrix.
    """

    def __init__(self, poly, tol: float = 1e-12, base=None):
        c = np.trim_zeros(np.asarray(poly, dtype=complex), "b")
        if not 3 <= len(c) - 1 <= 6:
            raise ValidationError("degree of P must be between 3 and 6")
        self.poly = c
        self.tol = tol
        self.degree = len(c) - 1
        self.g = (self.degree + 1) // 2 - 1
        self.lc = c[-1]
        self.roots = np.polynomial.polynomial.polyroots(c)
        sep = min(abs(a - b) for a, b in itertools.combinations(self.roots, 2))
        self.scale = max(1.0, float(np.max(np.abs(self.roots))))
        if sep < 1e-8 * self.scale:
            raise ValidationError("P has a repeated root (zero discriminant)")
        self.sep = sep
        self.clearance = 1e-3 * sep
        self._choose_base(base)
        self._build_chains()
        self._compute_periods()
        self._setup_theta()

    # -- polynomial helpers ------------------------------------------------
    def P(self, x):
        return np.polynomial.polynomial.polyval(x, self.poly)

    def sqrtP_near(self, x, y_ref):
        r = np.sqrt(self.P(complex(x)))
        return r if abs(r - y_ref) <= abs(r + y_ref) else -r

    def point(self, x, sheet: int = 1) -> SurfacePoint:
        """Regular point over ``x`` with ``y = sheet * sqrt(P(x))`` (principal root)."""
        x = complex(x)
        d = np.min(np.abs(self.roots - x))
        if d < 1e-12 * self.scale:
            return self.branch_point(int(np.argmin(np.abs(self.roots - x))))
        return SurfacePoint(x, sheet * complex(np.sqrt(self.P(x))), "regular", sheet)

    def branch_point(self, i) -> SurfacePoint:
        return SurfacePoint(complex(self.roots[i]), 0j, "branch", 0)

    def infinity(self, sheet: int = 1) -> SurfacePoint:
        if self.degree % 2:
            return SurfacePoint(INFINITY, 0j, "infinity", 0)
        if sheet not in (1, -1):
            raise ValidationError("sheet must be +1 or -1 at infinity on even-degree curves")
        return SurfacePoint(INFINITY, 0j, "infinity", sheet)

    def involution(self, p: SurfacePoint) -> SurfacePoint:
        if p.kind == "regular":
            return SurfacePoint(p.x, -p.y, "regular", -p.sheet)
        if p.kind == "infinity" and self.degree % 2 == 0:
            return self.infinity(-p.sheet)
        return p

    def on_curve(self, p: SurfacePoint) -> bool:
        if p.kind != "regular":
            return True
        return abs(p.y ** 2 - self.P(p.x)) <= 1e-12 * max(1.0, abs(p.y) ** 2)

    # -- charts --------------------------------------------------------------
    def chart(self, p: SurfacePoint) -> Chart:
        """The canonical chart at ``p``: ``x - x(p)``, ``sqrt(x - e)`` or the chart at infinity."""
        g, lc, roots = self.g, self.lc, self.roots
        ks = np.arange(g)
        if p.kind == "regular":
            x0, y0 = p.x, p.y
            shifts = 1.0 / (x0 - roots)
            rad = float(np.min(np.abs(x0 - roots)))
            X = lambda z: x0 + np.asarray(z)
            Y = lambda z: y0 * _sqrt_factors(z, shifts)
            wraw = lambda z: (X(z)[..., None] ** ks) / Y(z)[..., None]
            return Chart(self, "affine", p, rad, X, lambda z: np.ones_like(np.asarray(z, complex)), Y, wraw)
        if p.kind == "branch":
            j = int(np.argmin(np.abs(roots - p.x)))
            e = roots[j]
            others = np.delete(roots, j)
            cst = np.sqrt(lc * np.prod(e - others))
            shifts = 1.0 / (e - others)
            rad = float(np.sqrt(np.min(np.abs(e - others))))
            X = lambda z: e + np.asarray(z) ** 2
            Yred = lambda z: cst * _sqrt_factors(np.asarray(z) ** 2, shifts)
            Y = lambda z: np.asarray(z) * Yred(z)
            wraw = lambda z: 2 * (X(z)[..., None] ** ks) / Yred(z)[..., None]
            return Chart(self, "branch", p, rad, X, lambda z: 2 * np.asarray(z, complex), Y, wraw)
        # infinity
        sl = np.sqrt(lc)
        if self.degree % 2 == 0:
            sg = p.sheet
            rad = 1.0 / float(np.max(np.abs(roots)))
            X = lambda s: 1.0 / np.asarray(s)
            Yred = lambda s: sg * sl * _sqrt_factors(s, -roots)
            Y = lambda s: Yred(s) * np.asarray(s) ** (-(g + 1))
            wraw = lambda s: -(np.asarray(s, complex)[..., None] ** (g - 1 - ks)) / Yred(s)[..., None]
            return Chart(self, "infinity", p, rad, X, lambda s: -1.0 / np.asarray(s) ** 2, Y, wraw)
        rad = 1.0 / float(np.sqrt(np.max(np.abs(roots))))
        X = lambda t: np.asarray(t) ** -2
        Yred = lambda t: sl * _sqrt_factors(np.asarray(t) ** 2, -roots)
        Y = lambda t: Yred(t) * np.asarray(t) ** (-(2 * g + 1))
        wraw = lambda t: -2 * (np.asarray(t, complex)[..., None] ** (2 * g - 2 - 2 * ks)) / Yred(t)[..., None]
        return Chart(self, "infinity", p, rad, X, lambda t: -2 * np.asarray(t) ** -3, Y, wraw)

    # -- base point and chain loops -----------------------------------------
    def _choose_base(self, base):
        centre = np.mean(self.roots)
        cands = [complex(base)] if base is not None else [
            centre + 0.1234 * self.sep * np.exp(1j * (0.7 + 0.9 * k)) * (1 + 0.3 * k) for k in range(12)]
        for b in cands:
            if np.min(np.abs(self.roots - b)) < 0.05 * self.sep:
                continue
            ang = np.angle(self.roots - b)
            order = np.argsort(ang)
            angs = ang[order]
            gaps = np.diff(np.concatenate([angs, [angs[0] + 2 * np.pi]]))
            start = (int(np.argmax(gaps)) + 1) % len(order)
            chain = [order[(start + i) % len(order)] for i in range(2 * self.g + 1)]
            used = [gaps[(start + i) % len(order)] for i in range(2 * self.g)]
            if max(used) < np.pi - 0.05 and min(used) > 1e-3:
                self.base = complex(b)
                self.chain = [complex(self.roots[i]) for i in chain]
                self.y_base = complex(np.sqrt(self.P(self.base)))
                return
        raise CycleEncodingInvalid("could not find a base point with a valid chain of branch points")

    def _seg_distance(self, a, b, pts):
        d = b - a
        if d == 0:
            return np.abs(pts - a)
        t = np.clip(((pts - a) * np.conj(d)).real / abs(d) ** 2, 0, 1)
        return np.abs(pts - (a + t * d))

    def _build_chains(self):
        b = self.base
        self.chain_paths = []
        for i in range(2 * self.g):
            p, q = self.chain[i], self.chain[i + 1]
            others = np.array([r for r in self.roots if r != p and r != q])
            dist = self._seg_distance(p, q, others).min() if len(others) else abs(q - p)
            eps = 0.3 * min(dist, abs(q - p))
            u = (q - p) / abs(q - p)
            nrm = 1j * u
            mid = 0.5 * (p + q)
            if ((b - mid) * np.conj(nrm)).real < 0:
                nrm = -nrm
            start = mid + eps * nrm
            # stadium: mid -> near q on b-side, cap round q, back along far side, cap round p
            verts = [start, q + eps * nrm]
            verts += [q + eps * nrm * np.exp(-1j * np.pi * k / 24) for k in range(1, 25)]
            verts += [p - eps * nrm]
            verts += [p - eps * nrm * np.exp(-1j * np.pi * k / 24) for k in range(1, 25)]
            verts += [start]
            self.chain_paths.append([b] + verts + [b])

    def _flip_loop(self):
        """Loop from ``b`` round the first chain branch point (changes the sheet)."""
        e = self.chain[0]
        others = np.array([r for r in self.roots if r != e])
        rho = 0.25 * min(np.min(np.abs(others - e)), abs(self.base - e))
        u = (self.base - e) / abs(self.base - e)
        ring = [e + rho * u * np.exp(2j * np.pi * k / 32) for k in range(33)]
        return [self.base] + ring + [self.base]

    # -- path tracing --------------------------------------------------------
    def _panels(self, a, b, depth=0):
        d = float(self._seg_distance(a, b, self.roots).min())
        if d < self.clearance:
            raise BranchClearance(f"path segment {a}->{b} passes within {d:.2e} of a branch point")
        if abs(b - a) <= 0.4 * d or depth > 40:
            return [(a, b)]
        m = 0.5 * (a + b)
        return self._panels(a, m, depth + 1) + self._panels(m, b, depth + 1)

    def trace(self, vertices, y0, raw0=None):
        """Integrate the raw differentials along a polyline starting on the sheet of ``y0``.

        Returns a dict with node arrays ``x``, ``y``, ``dx`` (quadrature weight
        times ``dx/dt``), the cumulative raw integrals ``cum`` at the nodes, and
        ``raw``/``y_end`` at the final vertex.
        """
        vertices = [complex(v) for v in vertices]
        panels = []
        for a, b in zip(vertices[:-1], vertices[1:]):
            if a != b:
                panels.extend(self._panels(a, b))
        raw = np.zeros(self.g, dtype=complex) if raw0 is None else np.array(raw0, dtype=complex)
        if not panels:
            return {"x": np.zeros(0, complex), "y": np.zeros(0, complex), "dx": np.zeros(0, complex),
                    "cum": np.zeros((0, self.g), complex), "raw": raw, "y_end": complex(y0)}
        A = np.array([p[0] for p in panels])
        B = np.array([p[1] for p in panels])
        half = 0.5 * (B - A)
        xs = (0.5 * (A + B))[:, None] + half[:, None] * _GL_X[None, :]
        xs_flat = np.concatenate([xs.ravel(), [vertices[-1]]])
        r = np.sqrt(self.P(xs_flat))
        prev = np.concatenate([[complex(y0)], r[:-1]])
        steps = np.where(np.abs(r - prev) <= np.abs(r + prev), 1.0, -1.0)
        y = r * np.cumprod(steps)
        ratio = np.abs(y[1:] - y[:-1]) / np.maximum(np.abs(y[1:]), 1e-300)
        if np.any(ratio > 0.7):
            raise BranchTrackingFailure("square-root continuation is ambiguous along the path")
        ynodes = y[:-1].reshape(xs.shape)
        ks = np.arange(self.g)
        f = (xs[..., None] ** ks) / ynodes[..., None]  # panels x nodes x g
        local = np.einsum("jk,pkg->pjg", _GL_S, f) * half[:, None, None]
        totals = np.einsum("k,pkg->pg", _GL_W, f) * half[:, None]
        offsets = raw + np.concatenate([np.zeros((1, self.g)), np.cumsum(totals, axis=0)[:-1]])
        cum = (local + offsets[:, None, :]).reshape(-1, self.g)
        return {"x": xs.ravel(), "y": ynodes.ravel(), "dx": (half[:, None] * _GL_W[None, :]).ravel(),
                "cum": cum, "raw": raw + totals.sum(axis=0), "y_end": complex(y[-1])}

    def trace_chart(self, chart: Chart, z0, z1, raw0=None, n_panels=4):
        """Integrate the raw differentials along a straight segment in a chart variable."""
        z0, z1 = complex(z0), complex(z1)
        raw = np.zeros(self.g, dtype=complex) if raw0 is None else np.array(raw0, dtype=complex)
        edges = z0 + (z1 - z0) * np.linspace(0, 1, n_panels + 1)
        A, B = edges[:-1], edges[1:]
        half = 0.5 * (B - A)
        zs = (0.5 * (A + B))[:, None] + half[:, None] * _GL_X[None, :]
        f = chart.wraw(zs)
        local = np.einsum("jk,pkg->pjg", _GL_S, f) * half[:, None, None]
        totals = np.einsum("k,pkg->pg", _GL_W, f) * half[:, None]
        offsets = raw + np.concatenate([np.zeros((1, self.g)), np.cumsum(totals, axis=0)[:-1]])
        cum = (local + offsets[:, None, :]).reshape(-1, self.g)
        return {"zeta": zs.ravel(), "x": chart.X(zs).ravel(), "y": chart.Y(zs).ravel(),
                "dzeta": (half[:, None] * _GL_W[None, :]).ravel(), "cum": cum,
                "raw": raw + totals.sum(axis=0)}

    # -- periods --------------------------------------------------------------
    def _compute_periods(self):
        g = self.g
        C = []
        for path in self.chain_paths:
            tr = self.trace(path, self.y_base)
            if abs(tr["y_end"] - self.y_base) > 1e-6 * abs(self.y_base):
                raise CycleEncodingInvalid("chain loop does not close on its starting sheet")
            C.append(tr["raw"])
        self.chain_periods = np.array(C)
        n = 2 * g
        for signs in itertools.product((1, -1), repeat=n - 1):
            J = np.zeros((n, n), dtype=int)
            for i, s in enumerate(signs):
                J[i, i + 1], J[i + 1, i] = s, -s
            basis = _symplectic_basis(J)
            if basis is None:
                continue
            a_cyc, b_cyc = basis
            A = np.array([a @ self.chain_periods for a in a_cyc])
            B = np.array([bb @ self.chain_periods for bb in b_cyc])
            try:
                Ainv = np.linalg.inv(A)
            except np.linalg.LinAlgError:
                continue
            # normalized differentials v = w A^{-1}: int_{a_i} v_j = delta_ij
            Om = B @ Ainv
            if np.max(np.abs(Om - Om.T)) > 1e-7 * max(1.0, np.max(np.abs(Om))):
                continue
            if np.min(np.linalg.eigvalsh(0.5 * (Om.imag + Om.imag.T))) <= 0:
                continue
            self.intersection = J
            self.a_cycles, self.b_cycles = a_cyc, b_cyc
            self.A, self.B, self.Ainv = A, B, Ainv
            self.Omega = PeriodMatrix(0.5 * (Om + Om.T))
            self.symmetry_error = float(np.max(np.abs(Om - Om.T)))
            return
        raise CycleEncodingInvalid("no intersection-sign assignment gives a valid period matrix")

    def cycle_path(self, cycle):
        """Closed polyline from ``b`` realising an integer combination of chain loops."""
        verts = [self.base]
        for i, c in enumerate(cycle):
            loop = self.chain_paths[i] if c > 0 else self.chain_paths[i][::-1]
            for _ in range(abs(int(c))):
                verts.extend(loop[1:])
        return verts

    def cycle(self, name: str, j: int):
        """Coefficient vector of ``a_j`` or ``b_j`` (``j`` zero-based) in the chain basis."""
        return (self.a_cycles if name == "a" else self.b_cycles)[j]

    def period_of(self, name: str, j: int) -> np.ndarray:
        """Normalized period of cycle ``a_j`` (unit vector) or ``b_j`` (column of Omega)."""
        return self.cycle(name, j) @ self.chain_periods @ self.Ainv

    # -- lifts ----------------------------------------------------------------
    def _segment_ok(self, a, b, end_pt=None):
        d = self._seg_distance(a, b, self.roots)
        need = np.full(len(self.roots), 0.05 * self.sep)
        if end_pt is not None:
            need = np.minimum(need, 0.5 * np.abs(self.roots - end_pt))
        return bool(np.all(d >= need))

    def default_path(self, x):
        """Polyline from the base point to ``x`` keeping away from branch points."""
        b, x = self.base, complex(x)
        if self._segment_ok(b, x, x):
            return [b, x]
        best, best_d = None, -1.0
        mid = 0.5 * (b + x)
        span = max(abs(x - b), self.sep)
        for k in range(16):
            for rad in (0.3, 0.6, 1.0):
                w = mid + rad * span * np.exp(2j * np.pi * k / 16)
                if not (self._segment_ok(b, w) and self._segment_ok(w, x, x)):
                    continue
                d = min(self._seg_distance(b, w, self.roots).min(), self._seg_distance(w, x, self.roots).min())
                if d > best_d:
                    best, best_d = [b, w, x], d
        if best is None:
            raise BranchClearance(f"no clear path from the base point to {x}")
        return best

    def _approach(self, p: SurfacePoint):
        """Vertex from which the final chart leg to a branch point or infinity starts."""
        if p.kind == "branch":
            others = np.array([r for r in self.roots if abs(r - p.x) > 0])
            r = 0.25 * min(np.min(np.abs(others - p.x)), abs(self.base - p.x))
            return p.x + r * (self.base - p.x) / abs(self.base - p.x)
        R = 4.0 * self.scale + 2 * abs(self.base)
        best, best_d = None, -1.0
        for k in range(24):
            u = np.exp(2j * np.pi * (k + 0.37) / 24)
            xa = R * u
            d = self._seg_distance(self.base, xa, self.roots).min()
            if d > best_d:
                best, best_d = xa, d
        return best

    def lift(self, p: SurfacePoint, via=None) -> Lift:
        """Lift ``p`` along ``via`` (a polyline starting at the base point) or a default path.

        If the path arrives on the wrong sheet, a loop around a branch point is
        prepended.
        """
        if p.kind == "regular":
            xa = p.x
        else:
            xa = self._approach(p)
        verts = list(via) if via is not None else self.default_path(xa)
        if abs(verts[0] - self.base) > 0:
            raise ValidationError("paths must start at the base point")
        for attempt in range(2):
            tr = self.trace(verts, self.y_base)
            ok, leg = self._arrive(p, xa, tr)
            if ok:
                break
            verts = self._flip_loop() + verts[1:]
        else:
            raise BranchTrackingFailure("could not reach the requested sheet")
        raw = tr["raw"]
        if leg is not None:
            chart, za = leg
            raw = self.trace_chart(chart, za, 0.0, raw)["raw"]
            verts = verts + [("chart", za)]
        return Lift(p, raw @ self.Ainv, raw, verts)

    def _arrive(self, p, xa, tr):
        ye = tr["y_end"]
        if p.kind == "regular":
            return abs(ye - p.y) <= 1e-6 * max(abs(p.y), 1e-300), None
        chart = self.chart(p)
        if p.kind == "branch":
            za = np.sqrt(xa - p.x)
        elif self.degree % 2 == 0:
            za = 1.0 / xa
            return abs(chart.Y(za) - ye) <= 1e-6 * abs(ye), (chart, za)
        else:
            za = xa ** -0.5
        if abs(chart.Y(za) - ye) > abs(chart.Y(-za) - ye):
            za = -za
        return True, (chart, complex(za))

    def local_lift(self, base: Lift, zeta, chart: Chart | None = None) -> Lift:
        """Lift of the point with chart coordinate ``zeta`` reached along a chart segment from ``base``."""
        chart = self.chart(base.point) if chart is None else chart
        zeta = complex(zeta)
        if zeta == 0:
            return base
        if abs(zeta) > 0.9 * chart.radius:
            raise ValidationError("chart coordinate outside the chart")
        raw = self.trace_chart(chart, 0.0, zeta, base.raw)["raw"]
        return Lift(chart.point(zeta), raw @ self.Ainv, raw, base.path + [("chart", zeta)])

    def transport(self, L: Lift, name: str, j: int, times: int = 1) -> Lift:
        """The lift obtained by running cycle ``a_j`` or ``b_j`` (``times`` times) before the path of ``L``."""
        cyc = self.cycle(name, j) * times
        raw = L.raw + cyc @ self.chain_periods
        return Lift(L.point, raw @ self.Ainv, raw, [("cycle", name, j, times)] + list(L.path))

    def base_lift(self) -> Lift:
        return Lift(SurfacePoint(self.base, self.y_base), np.zeros(self.g, complex), np.zeros(self.g, complex),
                    [self.base])

    # -- Abel map ------------------------------------------------------------
    def abel_map(self, p, q, path=None):
        """Normalized Abel image ``int_p^q v``.

        With ``path=None`` both points are lifted by default paths from the
        base point and the difference of lifts is returned.  Otherwise
        ``path`` is a polyline in the x-plane from ``p.x`` to ``q.x`` (finite
        points); a branch-point endpoint is joined by a chart leg.  The
        starting sheet at a branch point is chosen so that the path arrives on
        the sheet of ``q``.  Returns ``(vector, path_used)``.
        """
        if path is None:
            Lp = p if isinstance(p, Lift) else self.lift(p)
            Lq = q if isinstance(q, Lift) else self.lift(q)
            return Lq.abel - Lp.abel, (Lp.path, Lq.path)
        p = p.point if isinstance(p, Lift) else p
        q = q.point if isinstance(q, Lift) else q
        path = [complex(v) for v in path]
        if p.is_infinite or q.is_infinite:
            raise ValidationError("explicit paths must join finite points")
        raw = np.zeros(self.g, complex)
        verts = list(path)
        start_sign = 1
        if p.kind == "branch":
            ch = self.chart(p)
            xa = p.x + 0.25 * ch.radius ** 2 * (verts[1] - p.x) / abs(verts[1] - p.x)
            za = np.sqrt(xa - p.x)
            raw = self.trace_chart(ch, 0.0, za)["raw"]
            y0 = complex(ch.Y(za))
            verts = [xa] + verts[1:]
        else:
            y0 = p.y
        end_leg = None
        if q.kind == "branch":
            ch = self.chart(q)
            xa = q.x + 0.25 * ch.radius ** 2 * (verts[-2] - q.x) / abs(verts[-2] - q.x)
            verts = verts[:-1] + [xa]
            end_leg = ch
        tr = self.trace(verts, y0, raw)
        raw = tr["raw"]
        if end_leg is not None:
            za = np.sqrt(verts[-1] - q.x)
            if abs(end_leg.Y(za) - tr["y_end"]) > abs(end_leg.Y(-za) - tr["y_end"]):
                za = -za
            raw = self.trace_chart(end_leg, za, 0.0, raw)["raw"]
        elif abs(tr["y_end"] - q.y) > 1e-6 * abs(q.y):
            if p.kind == "branch":
                raw, start_sign = -raw, -1
            else:
                raise BranchTrackingFailure("path arrives on the other sheet")
        return raw @ self.Ainv, verts

    def lattice_reduce(self, z):
        """Split ``z = m + Omega n + r`` with integer ``m, n``; returns ``(m, n, r)``."""
        z = np.asarray(z, dtype=complex)
        Om = self.Omega.omega
        n = np.round(np.linalg.solve(Om.imag, z.imag))
        m = np.round((z - Om @ n).real)
        return m.astype(int), n.astype(int), z - m - Om @ n

    # -- theta data --------------------------------------------------------------
    def theta_envelope(self, z):
        """``exp(pi c^T Im(Omega) c)``, ``c = Im(Omega)^{-1} Im z``: the natural size of ``Theta(z)``."""
        Y = self.Omega.Y
        c = np.linalg.solve(Y, np.asarray(z, dtype=complex).imag)
        return float(np.exp(np.pi * c @ Y @ c))

    def _setup_theta(self):
        g, Om = self.g, self.Omega
        self.delta = None
        for ch in all_characteristics(g, parity=1):
            grad = np.array([theta_char(ch, np.zeros(g), Om, vectors=[np.eye(g)[i]]) for i in range(g)])
            if np.linalg.norm(grad) > 1e-6:
                self.delta, self.grad_delta = ch, grad
                break
        if self.delta is None:
            raise SingularCharacteristic("every odd characteristic has vanishing gradient at 0")
        e0 = self.branch_point(int(np.argmin(np.abs(self.roots - self.chain[0]))))
        self.weierstrass_lift = self.lift(e0)
        rng = np.random.default_rng(5)
        tests = []
        while len(tests) < 3:
            x = self.base + self.sep * (rng.standard_normal() + 1j * rng.standard_normal())
            if np.min(np.abs(self.roots - x)) > 0.2 * self.sep:
                tests.append(self.lift(self.point(x, 1 if len(tests) % 2 == 0 else -1)))
        best, best_err = None, np.inf
        for bits in itertools.product((0, 1), repeat=2 * g):
            h = 0.5 * (np.array(bits[:g]) + Om.omega @ np.array(bits[g:]))
            Kb = h - (g - 1) * self.weierstrass_lift.abel
            pts = [Kb] if g == 1 else [L.abel + Kb for L in tests]
            err = max(abs(theta(z, Om)) / self.theta_envelope(z) for z in pts)
            if err < best_err:
                best, best_err = Kb, err
        if best_err > 1e-7:
            raise ValidationFailed(f"no half-period passes the vanishing test (best {best_err:.2e})")
        self.K_base = best
        self.K_half_period = best + (g - 1) * self.weierstrass_lift.abel

    def riemann_constants(self, x: Lift, check: bool = True) -> np.ndarray:
        """``K^x = K^b + (g - 1) A_b(x)``, so that ``Theta(A_x(D) + K^x) = 0`` for effective ``D`` of degree ``g-1``.

        Raises
        ------
        ValidationFailed
            if the vanishing test ``Theta(K^x) = 0`` fails (relative to the theta envelope).
        """
        K = self.K_base + (self.g - 1) * x.abel
        if check:
            err = abs(theta(K, self.Omega)) / self.theta_envelope(K)
            if err > 1e-6:
                raise ValidationFailed(f"Theta(K^x) = {err:.2e} (relative)")
        return K

    # -- prime form and C ----------------------------------------------------------
    def h_squared(self, L: Lift, chart: Chart | None = None) -> complex:
        """``sum_j d_j theta[delta](0) v_j`` in the chart at ``L``."""
        chart = self.chart(L.point) if chart is None else chart
        return complex(self.grad_delta @ chart.v(0.0))

    def prime_form_squared(self, p: Lift, q: Lift, chart_p=None, chart_q=None) -> complex:
        """``E(p, q)**2``: branch-free and antisymmetric-square symmetric."""
        t = theta_char(self.delta, p.abel - q.abel, self.Omega)
        return complex(t * t / (self.h_squared(p, chart_p) * self.h_squared(q, chart_q)))

    def prime_form(self, p: Lift, q: Lift, chart_p=None, chart_q=None) -> complex:
        """``E(p, q) = theta[delta](A(p) - A(q)) / (h(p) h(q))`` in the charts at ``p`` and ``q``.

        ``h`` is the principal square root of :meth:`h_squared`; the value is
        antisymmetric and behaves like ``zeta(p) - zeta(q)`` on the diagonal.
        """
        t = theta_char(self.delta, p.abel - q.abel, self.Omega)
        return complex(t / (np.sqrt(self.h_squared(p, chart_p)) * np.sqrt(self.h_squared(q, chart_q))))

    def wronskian(self, L: Lift, chart: Chart | None = None) -> complex:
        chart = self.chart(L.point) if chart is None else chart
        tay = chart.v_taylor(self.g - 1)
        fact = np.array([np.prod(np.arange(1, m + 1)) for m in range(self.g)], dtype=float)
        return complex(np.linalg.det(tay * fact[:, None]))

    def c_differential(self, L: Lift, chart: Chart | None = None) -> complex:
        """``D_v^g Theta(K^x) / W[v_1..v_g](x)`` in the chart at ``x``.

        ``D_v`` is the derivative along ``v(x)``; the numerator is the full
        ``g``-fold derivative ``sum d^g Theta / dz_i1..dz_ig v_i1 .. v_ig``.

        Raises
        ------
        WronskianZero
            at Weierstrass points for ``g >= 2``.
        """
        chart = self.chart(L.point) if chart is None else chart
        v = chart.v(0.0)
        W = self.wronskian(L, chart)
        if abs(W) < 1e-13 * max(1.0, float(np.max(np.abs(v)))) ** self.g:
            raise WronskianZero("Wronskian of holomorphic differentials vanishes")
        K = self.riemann_constants(L, check=False)
        return complex(theta_directional(K, self.Omega, [v] * self.g) / W)

    # -- Jacobi inversion -------------------------------------------------------------
    def jacobi_inversion(self, w, seeds=None, tol: float = 1e-11, max_iter: int = 60):
        """Degree-``g`` divisor with Abel image ``w`` modulo the lattice.

        Zeros of ``p -> Theta(A(p) - w - K^b)`` are found by Newton in ``x`` with
        incremental Abel updates.  Returns ``(lifts, m, n)`` where
        ``sum A(lifts) = w + m + Omega n``.

        Raises
        ------
        DegenerateImage
            if fewer than ``g`` distinct zeros are found or the lattice check fails.
        """
        w = np.asarray(w, dtype=complex)
        e = w + self.K_base
        Om = self.Omega
        if seeds is None:
            rng = np.random.default_rng(9)
            seeds = []
            for k in range(24):
                x = np.mean(self.roots) + self.scale * (0.4 + 0.8 * rng.random()) * np.exp(2j * np.pi * rng.random())
                if np.min(np.abs(self.roots - x)) > 0.1 * self.sep:
                    seeds.append(self.point(x, 1 if k % 2 == 0 else -1))
        zeros = []
        for s in seeds:
            L = self.lift(s)
            ok = False
            for _ in range(max_iter):
                z = L.abel - e
                val = theta(z, Om)
                ch = self.chart(L.point)
                v = ch.v(0.0)
                der = theta_directional(z, Om, [v])
                if der == 0:
                    break
                dx = -val / der
                lim = 0.3 * ch.radius
                if abs(dx) > lim:
                    dx *= lim / abs(dx)
                try:
                    L = self.local_lift(L, dx, ch)
                except (ValidationError, BranchTrackingFailure):
                    break
                if abs(L.x) > 50 * self.scale or ch.radius < 1e-4 * self.sep:
                    break
                if abs(dx) < tol * self.scale:
                    ok = True
                    break
            if not ok:
                continue
            if any(abs(L.x - Z.x) < 1e-7 * self.scale and abs(L.y - Z.y) < 1e-7 * max(1, abs(Z.y)) for Z in zeros):
                continue
            zeros.append(L)
            if len(zeros) == self.g:
                break
        if len(zeros) < self.g:
            raise DegenerateImage(f"found {len(zeros)} of {self.g} zeros")
        total = sum(Z.abel for Z in zeros) - w
        m, n, r = self.lattice_reduce(total)
        if np.max(np.abs(r)) > 1e-6:
            raise DegenerateImage(f"Abel image mismatch {np.max(np.abs(r)):.2e}")
        return zeros, m, n

    # -- serialization --------------------------------------------------------------
    def to_json(self):
        return {"poly": [[float(c.real), float(c.imag)] for c in self.poly], "tol": self.tol}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        poly = [complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in obj["poly"]]
        return cls(poly, obj.get("tol", 1e-12))

    def period_data_json(self):
        enc = lambda M: [[[float(v.real), float(v.imag)] for v in row] for row in np.atleast_2d(M)]
        return {"A": enc(self.A), "B": enc(self.B), "Omega": enc(self.Omega.omega),
                "a_cycles": [list(map(int, a)) for a in self.a_cycles],
                "b_cycles": [list(map(int, b)) for b in self.b_cycles]}


def _symplectic_basis(J):
    """Integer symplectic reduction of the chain basis; returns (a-cycles, b-cycles) or None."""
    n = J.shape[0]
    W = [np.eye(n, dtype=int)[i] for i in range(n)]
    form = lambda u, w: int(u @ J @ w)
    a_list, b_list = [], []
    while W:
        a = W.pop(0)
        idx = next((k for k, w in enumerate(W) if abs(form(a, w)) == 1), None)
        if idx is None:
            return None
        b = W.pop(idx)
        if form(a, b) == -1:
            b = -b
        W = [w - form(w, b) * a + form(w, a) * b for w in W]
        a_list.append(a)
        b_list.append(b)
    return a_list, b_list


def period_matrix(curve: HyperellipticCurve):
    """``(A, B, Omega, Ainv)`` of raw periods and the normalization ``v = w A^{-1}``."""
    return curve.A, curve.B, curve.Omega, curve.Ainv


def abel_map(curve: HyperellipticCurve, p, q, path=None):
    return curve.abel_map(p, q, path)


def riemann_constants(curve: HyperellipticCurve, x: Lift):
    return curve.riemann_constants(x)


def prime_form(curve: HyperellipticCurve, p: Lift, q: Lift, chart_p=None, chart_q=None):
    return curve.prime_form(p, q, chart_p, chart_q)


def c_differential(curve: HyperellipticCurve, x: Lift, chart=None):
    return curve.c_differential(x, chart)


def jacobi_inversion(curve: HyperellipticCurve, w, **kw):
    return curve.jacobi_inversion(w, **kw)
