"""Shared numerical kernels.

Complex rational functions, adaptive Gauss-Legendre contour quadrature,
multistart Newton for holomorphic systems, finite differences and a few
truncated power-series helpers used by the Laurent/Schwarzian code.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NoRootFound, NonConvergence, SingularOnContour, ValidationError

OVERFLOW_GUARD = 1e12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


# ---------------------------------------------------------------------------
# truncated power series (coefficient arrays, lowest order first)
# ---------------------------------------------------------------------------

def series_mul(a, b, order=None):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = min(len(a), len(b)) if order is None else order + 1
    out = np.convolve(a, b)[:n]
    return np.pad(out, (0, max(0, n - len(out))))


def series_inv(a, order=None):
    a = np.asarray(a, dtype=complex)
    n = len(a) if order is None else order + 1
    if a[0] == 0:
        raise ZeroDivisionError("series with vanishing constant term is not invertible")
    a = np.pad(a, (0, max(0, n - len(a))))
    out = np.zeros(n, dtype=complex)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        out[k] = -np.dot(a[1:k + 1], out[k - 1::-1][:k]) / a[0]
    return out


def series_div(a, b, order=None):
    n = min(len(a), len(b)) if order is None else order + 1
    return series_mul(a, series_inv(b, n - 1), n - 1)


def series_sqrt(a, order=None, root0=None):
    """Square root of a power series; ``root0`` fixes the branch of the constant term."""
    a = np.asarray(a, dtype=complex)
    n = len(a) if order is None else order + 1
    a = np.pad(a, (0, max(0, n - len(a))))
    out = np.zeros(n, dtype=complex)
    out[0] = np.sqrt(a[0]) if root0 is None else root0
    if out[0] == 0:
        raise ZeroDivisionError("square root of a series vanishing at the origin")
    for k in range(1, n):
        out[k] = (a[k] - np.dot(out[1:k], out[k - 1:0:-1])) / (2 * out[0])
    return out


def series_deriv(a):
    a = np.asarray(a, dtype=complex)
    return a[1:] * np.arange(1, len(a))


def taylor_coefficients(f, z0, radius, order, n_points=None):
    """Taylor coefficients ``c_0..c_order`` of ``f`` at ``z0`` from samples on a circle.

    ``f`` must accept complex arrays.  Accuracy is limited by roundoff
    ``eps * max|f| / radius**k`` and by aliasing from the radius of convergence.
    """
    n = n_points or max(32, 2 * order + 16)
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.asarray(f(z0 + radius * w), dtype=complex)
    coeffs = np.fft.fft(vals) / n
    k = np.arange(order + 1)
    return coeffs[: order + 1] / radius ** k


def laurent_coefficients(f, z0, radius, kmin, kmax, n_points=64):
    """Laurent coefficients ``c_kmin..c_kmax`` of ``f`` on the circle ``|z - z0| = radius``."""
    w = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    vals = np.asarray(f(z0 + radius * w), dtype=complex)
    coeffs = np.fft.fft(vals) / n_points
    ks = np.arange(kmin, kmax + 1)
    return coeffs[ks % n_points] / radius ** ks.astype(float)


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.nonzero(np.abs(c) > 0)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1]


def _polyval(c, x):
    return np.polynomial.polynomial.polyval(x, c)


@dataclass(frozen=True)
class ComplexRational:
    """Rational function ``numerator / denominator`` with complex coefficients.

    Coefficients are stored lowest degree first.  The constructor cancels
    common roots (within ``cancel_tol``) so the pair stays reduced.
    """

    numerator: np.ndarray
    denominator: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))
    cancel_tol: float = 1e-9

    def __post_init__(self):
        num = _trim(self.numerator)
        den = _trim(self.denominator)
        if np.all(den == 0):
            raise ValidationError("denominator is identically zero")
        num, den = _cancel_common_roots(num, den, self.cancel_tol)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def polynomial(cls, coeffs):
        return cls(np.asarray(coeffs, dtype=complex))

    @classmethod
    def mobius(cls, a, b, c, d):
        """``(a x + b) / (c x + d)``."""
        return cls(np.array([b, a], dtype=complex), np.array([d, c], dtype=complex))

    @property
    def degree(self):
        return max(len(self.numerator), len(self.denominator)) - 1

    def __call__(self, x):
        return _polyval(self.numerator, x) / _polyval(self.denominator, x)

    def taylor(self, x0, order):
        """Taylor coefficients of the function at ``x0`` up to ``order`` (exact arithmetic on coefficients)."""
        num = _shift_poly(self.numerator, x0, order)
        den = _shift_poly(self.denominator, x0, order)
        return series_div(num, den, order)

    def derivative(self):
        n, d = self.numerator, self.denominator
        P = np.polynomial.polynomial
        num = P.polysub(P.polymul(P.polyder(n), d), P.polymul(n, P.polyder(d)))
        return ComplexRational(num, P.polymul(d, d), self.cancel_tol)

    def poles(self):
        return _roots(self.denominator)

    def zeros(self):
        return _roots(self.numerator)

    def critical_points(self):
        """Finite zeros of ``F'`` (with multiplicity)."""
        return self.derivative().zeros()

    def compose_mobius_after(self, a, b, c, d):
        """Return ``M o F`` for ``M(w) = (a w + b)/(c w + d)``."""
        P = np.polynomial.polynomial
        n, dd = self.numerator, self.denominator
        num = P.polyadd(a * n, b * dd)
        den = P.polyadd(c * n, d * dd)
        return ComplexRational(num, den, self.cancel_tol)

    def to_json(self):
        return {
            "numerator": [[float(c.real), float(c.imag)] for c in self.numerator],
            "denominator": [[float(c.real), float(c.imag)] for c in self.denominator],
        }


def _roots(c):
    c = _trim(c)
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    return np.polynomial.polynomial.polyroots(c)


def _shift_poly(c, x0, order):
    """Coefficients of ``p(x0 + t)`` in ``t`` truncated at ``order``."""
    c = np.asarray(c, dtype=complex)
    out = np.zeros(order + 1, dtype=complex)
    d = c.copy()
    fact = 1.0
    for k in range(order + 1):
        if len(d) == 0:
            break
        out[k] = _polyval(d, x0) / fact
        d = np.polynomial.polynomial.polyder(d) if len(d) > 1 else np.zeros(0, dtype=complex)
        fact *= k + 1
    return out


def _cancel_common_roots(num, den, tol):
    if len(num) <= 1 or len(den) <= 1:
        return num, den
    rn = list(_roots(num))
    rd = list(_roots(den))
    common = []
    for r in list(rn):
        for s in rd:
            if abs(r - s) <= tol * max(1.0, abs(r)):
                common.append(r)
                rd.remove(s)
                rn.remove(r)
                break
    if not common:
        return num, den
    P = np.polynomial.polynomial
    lead_n, lead_d = num[-1], den[-1]
    num = lead_n * P.polyfromroots(rn) if rn else np.array([lead_n])
    den = lead_d * P.polyfromroots(rd) if rd else np.array([lead_d])
    return np.asarray(num, dtype=complex), np.asarray(den, dtype=complex)


# ---------------------------------------------------------------------------
# contours and quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    """A circle or polyline in the complex plane.

    ``singular_points`` and ``clearance`` declare points the contour must
    stay away from; violation raises ``ValidationError`` at construction.
    """

    kind: str
    center: complex = 0j
    radius: float = 1.0
    vertices: tuple = ()
    orientation: int = 1
    singular_points: tuple = ()
    clearance: float = 0.0

    def __post_init__(self):
        if self.kind not in ("circle", "polyline"):
            raise ValidationError(f"unknown contour kind {self.kind!r}")
        if self.orientation not in (1, -1):
            raise ValidationError("orientation must be +1 or -1")
        if self.kind == "circle" and not self.radius > 0:
            raise ValidationError("circle radius must be positive")
        if self.kind == "polyline" and len(self.vertices) < 2:
            raise ValidationError("polyline needs at least two vertices")
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))
        for p in self.singular_points:
            if self.distance_to(complex(p)) < self.clearance:
                raise ValidationError(f"contour passes within clearance of {p}")

    @classmethod
    def circle(cls, center, radius, orientation=1, **kw):
        return cls("circle", center=complex(center), radius=float(radius), orientation=orientation, **kw)

    @classmethod
    def polyline(cls, vertices, orientation=1, **kw):
        return cls("polyline", vertices=tuple(vertices), orientation=orientation, **kw)

    def reversed(self):
        return ContourSpec(self.kind, self.center, self.radius, self.vertices, -self.orientation)

    @property
    def is_closed(self):
        return self.kind == "circle" or abs(self.vertices[0] - self.vertices[-1]) < 1e-14

    def distance_to(self, p):
        if self.kind == "circle":
            return abs(abs(p - self.center) - self.radius)
        return min(_dist_point_segment(p, a, b) for a, b in zip(self.vertices[:-1], self.vertices[1:]))

    def pieces(self):
        """List of ``(z(t), z'(t))`` parametrizations on ``t in [0, 1]`` in traversal order."""
        out = []
        if self.kind == "circle":
            c, r, o = self.center, self.radius, self.orientation
            out.append((
                lambda t: c + r * np.exp(2j * np.pi * o * t),
                lambda t: 2j * np.pi * o * r * np.exp(2j * np.pi * o * t),
            ))
            return out
        verts = self.vertices if self.orientation == 1 else self.vertices[::-1]
        for a, b in zip(verts[:-1], verts[1:]):
            out.append((lambda t, a=a, b=b: a + (b - a) * t, lambda t, a=a, b=b: (b - a) * np.ones_like(t)))
        return out

    def sample(self, n_per_piece=64):
        pts = [z(np.linspace(0, 1, n_per_piece, endpoint=False)) for z, _ in self.pieces()]
        return np.concatenate(pts)

    def to_json(self):
        if self.kind == "circle":
            return {"kind": "circle", "center": [self.center.real, self.center.imag],
                    "radius": self.radius, "orientation": self.orientation}
        return {"kind": "polyline", "vertices": [[v.real, v.imag] for v in self.vertices],
                "orientation": self.orientation}

    @classmethod
    def from_json(cls, obj):
        kind = obj["kind"]
        o = int(obj.get("orientation", 1))
        if kind == "circle":
            return cls.circle(complex(*obj["center"]), obj["radius"], o)
        return cls.polyline([complex(*v) for v in obj["vertices"]], o)


def _dist_point_segment(p, a, b):
    d = b - a
    if d == 0:
        return abs(p - a)
    t = ((p - a) * np.conj(d)).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def _gl_panel(g, a, b):
    t = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
    vals = np.asarray(g(t), dtype=complex)
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > OVERFLOW_GUARD:
        raise SingularOnContour(f"integrand exceeds {OVERFLOW_GUARD:g} on panel [{a}, {b}]")
    return 0.5 * (b - a) * np.dot(_GL_WEIGHTS, vals)


def _adaptive(g, a, b, tol, depth, max_depth, whole=None):
    if whole is None:
        whole = _gl_panel(g, a, b)
    m = 0.5 * (a + b)
    left = _gl_panel(g, a, m)
    right = _gl_panel(g, m, b)
    err = abs(left + right - whole)
    # absolute tolerance, floored at the roundoff level of the panel sums
    if err <= max(tol, 64 * np.finfo(float).eps * (abs(left) + abs(right))):
        return left + right, err
    if depth >= max_depth:
        raise NonConvergence(f"quadrature refinement exceeded depth {max_depth}")
    l, el = _adaptive(g, a, m, 0.5 * tol, depth + 1, max_depth, left)
    r, er = _adaptive(g, m, b, 0.5 * tol, depth + 1, max_depth, right)
    return l + r, el + er


def contour_integrate(f: Callable, c: ContourSpec, tol: float = 1e-12, max_depth: int = 30,
                      initial_panels: int = 8, full_output: bool = False):
    """Integrate ``f(z) dz`` over ``c``.

    Gauss-Legendre (16 nodes) panels are halved until the panel estimate and
    the sum of its halves agree to the panel's share of ``tol`` (or to
    roundoff relative to the panel values, whichever is larger).

    Raises
    ------
    NonConvergence
        if refinement exceeds ``max_depth``.
    SingularOnContour
        if a sample is non-finite or exceeds the overflow guard.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    total = 0j
    err = 0.0
    pieces = c.pieces()
    share = tol / len(pieces)
    for z, dz in pieces:
        g = lambda t, z=z, dz=dz: f(z(t)) * dz(t)
        edges = np.linspace(0.0, 1.0, initial_panels + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            v, e = _adaptive(g, a, b, share / initial_panels, 0, max_depth)
            total += v
            err += e
    return (total, err) if full_output else total


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------

def fd_jacobian(F, z, h=1e-7):
    z = np.asarray(z, dtype=complex)
    f0 = np.asarray(F(z), dtype=complex)
    J = np.empty((len(f0), len(z)), dtype=complex)
    for j in range(len(z)):
        step = h * max(1.0, abs(z[j]))
        e = np.zeros(len(z), dtype=complex)
        e[j] = step
        J[:, j] = (np.asarray(F(z + e)) - np.asarray(F(z - e))) / (2 * step)
    return J, f0


def newton(F, z0, tol=1e-12, max_iter=50, h=1e-7):
    """Damped Newton with finite-difference Jacobian.  Returns ``(z, converged)``."""
    z = np.asarray(z0, dtype=complex).copy()
    try:
        fz = np.asarray(F(z), dtype=complex)
    except (ZeroDivisionError, FloatingPointError, ArithmeticError):
        return z, False
    norm = np.linalg.norm(fz)
    polish = 2
    for _ in range(max_iter):
        if not np.isfinite(norm):
            return z, False
        if norm < tol:
            if polish == 0:
                return z, True
            polish -= 1
        try:
            J, _ = fd_jacobian(F, z, h)
            dz = np.linalg.lstsq(J, -fz, rcond=None)[0]
        except (np.linalg.LinAlgError, ZeroDivisionError, ArithmeticError, ValueError):
            return z, norm < tol
        lam = 1.0
        for _ in range(12):
            trial = z + lam * dz
            try:
                ft = np.asarray(F(trial), dtype=complex)
                nt = np.linalg.norm(ft)
            except (ZeroDivisionError, ArithmeticError):
                nt = np.inf
            if np.isfinite(nt) and (nt < norm or nt < tol):
                break
            lam *= 0.5
        else:
            return z, norm < tol
        z, fz, norm = trial, ft, nt
    return z, norm < tol


def newton_multistart(F: Callable, seeds: Sequence, tol: float = 1e-12, max_iter: int = 50,
                      merge_radius: float | None = None, h: float = 1e-7):
    """Run damped Newton from every seed and return the distinct roots.

    Roots closer than ``merge_radius`` (default ``10 * tol``) are merged.
    Every returned root satisfies ``||F(root)|| < tol``.

    Raises
    ------
    NoRootFound
        if no seed converges.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValidationError("seeds must be nonempty")
    radius = 10 * tol if merge_radius is None else merge_radius
    roots = []
    with np.errstate(all="ignore"):
        for s in seeds:
            z, ok = newton(F, s, tol, max_iter, h)
            if not ok or np.linalg.norm(F(z)) >= tol:
                continue
            if any(np.linalg.norm(z - r) <= radius for r in roots):
                continue
            roots.append(z)
    if not roots:
        raise NoRootFound(f"none of {len(seeds)} seeds converged to tolerance {tol:g}")
    return roots


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Derivative:
    value: complex
    method: str
    h: float


def fd_derivative(f: Callable, z0, h: float = 1e-5, method: str = "central") -> Derivative:
    """Numerical derivative of a scalar sampler at ``z0``.

    ``method`` is one of ``central`` (2-point), ``five-point``,
    ``richardson`` (five-point at h and h/2, extrapolated) or
    ``complex-step`` (real-analytic ``f`` of a real variable only).
    """
    if not h > 0:
        raise ValidationError("h must be positive")
    if method == "central":
        v = (f(z0 + h) - f(z0 - h)) / (2 * h)
    elif method == "five-point":
        v = _five_point(f, z0, h)
    elif method == "richardson":
        d1 = _five_point(f, z0, h)
        d2 = _five_point(f, z0, h / 2)
        v = (16 * d2 - d1) / 15
    elif method == "complex-step":
        v = np.imag(f(z0 + 1j * h)) / h
    else:
        raise ValidationError(f"unknown method {method!r}")
    return Derivative(complex(v), method, h)


def _five_point(f, z0, h):
    return (-f(z0 + 2 * h) + 8 * f(z0 + h) - 8 * f(z0 - h) + f(z0 - 2 * h)) / (12 * h)
