"""Monodromy-free potentials on the Riemann sphere.

A configuration is the divisor ``sum x_k - sum r_j y_j`` of the rational
solution ``phi = prod (x - x_k) / prod (x - y_j)**r_j`` with
``n - sum r_j = 1``.  At most one point may sit at infinity; terms involving
it are dropped everywhere (they vanish in the limit), which keeps every
identity between ``tau_yy``, ``sb_residual`` and ``accessory`` intact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfig, InconsistentProfile, NoRootFound, ValidationError
from .numkit import ComplexRational, ContourSpec, contour_integrate, newton, newton_multistart
from .schwarz import schwarzian, taylor3

INFINITY = complex("inf")
_DEGENERATE = 1e-12


def is_inf(p) -> bool:
    return p is None or bool(np.isinf(complex(p)))


def _as_point(p):
    return INFINITY if is_inf(p) else complex(p)


@dataclass(frozen=True)
class Genus0Config:
    """Zeros ``x_k`` and poles ``y_j`` (orders ``r_j``) of ``phi`` on the sphere.

    An infinite zero is moved to the last slot so the SB residual is always
    taken at finite zeros.
    """

    zeros: tuple
    poles: tuple = ()
    orders: tuple = ()

    def __post_init__(self):
        zeros = [_as_point(z) for z in self.zeros]
        zeros.sort(key=is_inf)
        poles = tuple(_as_point(y) for y in self.poles)
        orders = tuple(int(r) for r in self.orders) if self.orders else (1,) * len(poles)
        object.__setattr__(self, "zeros", tuple(zeros))
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "orders", orders)
        if len(orders) != len(poles):
            raise ValidationError("orders must match poles")
        if any(r < 1 for r in orders):
            raise ValidationError("pole orders must be positive integers")
        if len(zeros) - sum(orders) != 1:
            raise InconsistentProfile(f"need n - sum(r) = 1, got n={len(zeros)}, sum(r)={sum(orders)}")
        pts = list(zeros) + list(poles)
        if sum(is_inf(p) for p in pts) > 1:
            raise ValidationError("at most one point may be at infinity")
        _check_distinct(pts)

    @property
    def n(self):
        return len(self.zeros)

    @property
    def m(self):
        return len(self.poles)

    def divisor(self):
        """List of ``(point, d)`` pairs: zeros first (d = 1), then poles (d = -r)."""
        return [(x, 1) for x in self.zeros] + [(y, -r) for y, r in zip(self.poles, self.orders)]

    def replace(self, zeros=None, poles=None):
        return Genus0Config(self.zeros if zeros is None else tuple(zeros),
                            self.poles if poles is None else tuple(poles), self.orders)

    def to_json(self):
        enc = lambda p: {"inf": True} if is_inf(p) else [p.real, p.imag]
        return {"zeros": [enc(x) for x in self.zeros], "poles": [enc(y) for y in self.poles],
                "orders": list(self.orders)}

    @classmethod
    def from_json(cls, obj):
        dec = lambda v: INFINITY if isinstance(v, dict) and v.get("inf") else complex(*v)
        return cls(tuple(dec(v) for v in obj["zeros"]), tuple(dec(v) for v in obj.get("poles", [])),
                   tuple(obj.get("orders", [])))


def _check_distinct(pts):
    finite = [p for p in pts if not is_inf(p)]
    for i in range(len(finite)):
        for j in range(i):
            if abs(finite[i] - finite[j]) < _DEGENERATE:
                raise DegenerateConfig(f"points {finite[j]} and {finite[i]} coincide")


def phi_value(c: Genus0Config, x):
    """The rational solution ``prod (x - x_k) / prod (x - y_j)**r_j`` (finite factors only)."""
    x = np.asarray(x, dtype=complex)
    out = np.ones_like(x)
    for p, d in c.divisor():
        if not is_inf(p):
            out = out * (x - p) ** d
    return out


def sb_residual(c: Genus0Config) -> np.ndarray:
    """``sum_i r_i/(x_k - y_i) - sum_{i != k} 1/(x_k - x_i)`` for ``k = 1..n-1``."""
    out = []
    for k in range(c.n - 1):
        xk = c.zeros[k]
        s = 0j
        for y, r in zip(c.poles, c.orders):
            if not is_inf(y):
                s += r / (xk - y)
        for i, xi in enumerate(c.zeros):
            if i != k and not is_inf(xi):
                s -= 1.0 / (xk - xi)
        out.append(s)
    return np.array(out, dtype=complex)


def _local_radius(c, p):
    others = [q for q, _ in c.divisor() if not is_inf(q) and q != p]
    if not others:
        return 0.5
    return 0.3 * min(abs(p - q) for q in others)


def residue_check(c: Genus0Config, tol: float = 1e-13, normalized: bool = False) -> np.ndarray:
    """Residues of ``dx / phi**2`` at ``x_1..x_{n-1}`` by contour quadrature.

    With ``normalized=True`` each residue is divided by ``2 / phi'(x_k)**2``
    (the coefficient of ``xi**-2`` is measured by a second contour integral),
    which makes the result directly comparable with :func:`sb_residual`.
    """
    out = []
    for k in range(c.n - 1):
        xk = c.zeros[k]
        circ = ContourSpec.circle(xk, _local_radius(c, xk))
        inv2 = lambda x: 1.0 / phi_value(c, x) ** 2
        res = contour_integrate(inv2, circ, tol) / (2j * np.pi)
        if normalized:
            lead = contour_integrate(lambda x: (x - xk) * inv2(x), circ, tol) / (2j * np.pi)
            res = res / (2 * lead)
        out.append(res)
    return np.array(out, dtype=complex)


def tau_yy(c: Genus0Config) -> complex:
    """``prod_{i<j} (p_i - p_j)**(d_i d_j)`` over finite divisor points."""
    div = [(p, d) for p, d in c.divisor() if not is_inf(p)]
    out = 1 + 0j
    for i in range(len(div)):
        for j in range(i + 1, len(div)):
            diff = div[i][0] - div[j][0]
            if abs(diff) < _DEGENERATE:
                raise DegenerateConfig("coincident points in tau_yy")
            out *= diff ** (div[i][1] * div[j][1])
    return complex(out)


def accessory(c: Genus0Config) -> np.ndarray:
    """``H_j = -2 r_j (sum_k 1/(y_j - x_k) + sum_{i != j} r_i/(y_i - y_j))`` (infinite poles give 0)."""
    out = []
    for j, (yj, rj) in enumerate(zip(c.poles, c.orders)):
        if is_inf(yj):
            out.append(0j)
            continue
        s = sum(1.0 / (yj - x) for x in c.zeros if not is_inf(x))
        s += sum(ri / (yi - yj) for i, (yi, ri) in enumerate(zip(c.poles, c.orders))
                 if i != j and not is_inf(yi))
        out.append(-2 * rj * s)
    return np.array(out, dtype=complex)


def tau_b_exponent(di, dj):
    return 2 * di * dj * (di + dj + 1) / ((2 * di + 1) * (2 * dj + 1))


def tau_b_cubed(c: Genus0Config, return_branches: bool = False):
    """``prod_{i<j} (p_i - p_j)**(2 d_i d_j (d_i+d_j+1) / ((2d_i+1)(2d_j+1)))``.

    Each factor uses the principal logarithm of the difference; with
    ``return_branches`` the list of ``(i, j, exponent, log(p_i - p_j))`` used is
    returned alongside the value.
    """
    div = [(p, d) for p, d in c.divisor() if not is_inf(p)]
    log_total = 0j
    branches = []
    for i in range(len(div)):
        for j in range(i + 1, len(div)):
            diff = div[i][0] - div[j][0]
            if abs(diff) < _DEGENERATE:
                raise DegenerateConfig("coincident points in tau_b")
            e = tau_b_exponent(div[i][1], div[j][1])
            lg = np.log(diff)
            log_total += e * lg
            branches.append((i, j, e, complex(lg)))
    val = complex(np.exp(log_total))
    return (val, branches) if return_branches else val


# ---------------------------------------------------------------------------
# coverings
# ---------------------------------------------------------------------------

def covering_from_config(c: Genus0Config) -> ComplexRational:
    """The developing map ``F = int dx / phi**2`` of a config solving the SB equations.

    Logarithmic terms (nonzero residues) are dropped, so for configs that
    violate the SB equations the result is only the rational part.
    """
    xs = [x for x in c.zeros if not is_inf(x)]
    ys = [(y, r) for y, r in zip(c.poles, c.orders) if not is_inf(y)]
    P = np.polynomial.polynomial
    Q = P.polyfromroots(xs) if xs else np.ones(1)
    num = np.zeros(1, dtype=complex)
    for k, xk in enumerate(xs):
        a = np.prod([(xk - y) ** (2 * r) for y, r in ys]) / np.prod(
            [(xk - xi) ** 2 for i, xi in enumerate(xs) if i != k])
        num = P.polysub(num, a * P.polyfromroots([xi for i, xi in enumerate(xs) if i != k]))
    if 2 * sum(r for _, r in ys) == 2 * len(xs):
        num = P.polyadd(num, P.polymul([0, 1], Q))
    return ComplexRational(num, Q)


def _cluster(points, tol=1e-5):
    groups = []
    for p in points:
        for g in groups:
            if abs(g[0] - p) < tol * max(1.0, abs(p)):
                g.append(p)
                break
        else:
            groups.append([p])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def critical_profile(F: ComplexRational):
    """Finite critical points of ``F`` with multiplicities ``(point, 2r)``."""
    return _cluster(F.critical_points())


def accessory_alt(F: ComplexRational, critical_points=None, tol: float = 1e-12) -> np.ndarray:
    """``H~_j = res_{y_j} u / F'`` with ``u = -{F, x}/2`` by contour quadrature.

    ``critical_points`` defaults to the finite critical points of ``F``.
    ``tol`` is relative to ``max |u / F'|`` times the circle length.
    """
    if critical_points is None:
        critical_points = [p for p, _ in critical_profile(F)]
    critical_points = [complex(p) for p in critical_points]
    if not critical_points:
        return np.zeros(0, dtype=complex)
    dF = F.derivative()
    avoid = list(critical_points) + [p for p, _ in critical_profile(F)] + list(F.poles())

    def integrand(x):
        x = np.atleast_1d(x)
        return np.array([-0.5 * schwarzian(F, z) / dF(z) for z in x])

    out = []
    for y in critical_points:
        others = [q for q in avoid if abs(q - y) > 1e-6]
        rad = 0.3 * min((abs(q - y) for q in others), default=1.0)
        circ = ContourSpec.circle(y, rad)
        scale = float(np.max(np.abs(integrand(circ.sample(16))))) * 2 * np.pi * rad
        out.append(contour_integrate(integrand, circ, tol * max(1.0, scale)) / (2j * np.pi))
    return np.array(out, dtype=complex)


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

def _seeds(rng, k, centre, scale, count):
    out = []
    for s in range(count):
        rot = np.exp(2j * np.pi * (np.arange(k) + rng.random()) / max(k, 1))
        rad = scale * (0.5 + 1.5 * rng.random())
        out.append(centre + rad * rot + 0.3 * scale * (rng.standard_normal(k) + 1j * rng.standard_normal(k)))
    return out


def solve_sb(poles, orders, fixed_zeros=(), seeds=None, tol: float = 1e-10, n_seeds: int = 64,
             rng=None, max_abs: float = 1e3):
    """All SB solutions found from the seeds, as configs.

    The free zeros are the ``n - len(fixed_zeros)`` unknowns; the equations
    are the SB residuals at the free zeros.  Solutions where a free zero
    escapes beyond ``max_abs`` times the pole scale, or collides with another
    point, are discarded.

    Raises
    ------
    NoRootFound
        if no admissible solution is found.
    """
    poles = tuple(_as_point(y) for y in poles)
    orders = tuple(int(r) for r in orders)
    n = 1 + sum(orders)
    fixed = [_as_point(z) for z in fixed_zeros]
    k = n - len(fixed)
    if k < 0:
        raise InconsistentProfile("more fixed zeros than the profile allows")
    if k == 0:
        return [Genus0Config(tuple(fixed), poles, orders)]
    finite = [p for p in list(poles) + fixed if not is_inf(p)]
    centre = np.mean(finite) if finite else 0j
    scale = max([abs(p - centre) for p in finite] + [1.0])
    rng = np.random.default_rng(0) if rng is None else rng
    if seeds is None:
        seeds = _seeds(rng, k, centre, scale, n_seeds)

    def residual(free):
        zeros = list(free) + fixed
        out = []
        for j in range(k):
            xj = free[j]
            s = sum(r / (xj - y) for y, r in zip(poles, orders) if not is_inf(y))
            s -= sum(1.0 / (xj - z) for i, z in enumerate(zeros) if i != j and not is_inf(z))
            # clearing denominators removes the spurious attractor at infinity
            others = [q for q in finite_poles + zeros[:j] + zeros[j + 1:] if not is_inf(q)]
            out.append(s * np.prod([(xj - q) / scale for q in others]))
        return np.array(out)

    finite_poles = [y for y in poles if not is_inf(y)]
    try:
        roots = newton_multistart(residual, seeds, tol=tol)
    except NoRootFound:
        roots = []
    configs, keys = [], []
    for root in roots:
        if np.max(np.abs(root - centre)) > max_abs * scale:
            continue
        try:
            cfg = Genus0Config(tuple(root) + tuple(fixed), poles, orders)
        except (DegenerateConfig, ValidationError):
            continue
        pts = [p for p, _ in cfg.divisor() if not is_inf(p)]
        if min((abs(a - b) for i, a in enumerate(pts) for b in pts[:i]), default=1.0) < 1e-6 * scale:
            continue
        key = sorted(np.round(root, 7), key=lambda z: (z.real, z.imag))
        if any(np.allclose(key, kk, atol=1e-6 * scale) for kk in keys):
            continue
        keys.append(key)
        configs.append(cfg)
    if not configs:
        raise NoRootFound("no admissible SB solution found")
    return configs


def fit_covering(r, z, n=None, tol: float = 1e-10, seeds=None, n_seeds: int = 64, rng=None):
    """Rational ``F`` with critical points of orders ``2 r_j`` and values ``F(y_j) = z_j``.

    Gauge: ``y_1 = 0``, ``y_2 = 1`` and the last pole of ``F`` at infinity;
    the affine freedom in the target is absorbed by fitting both a scale and a
    shift.  Requires ``m >= 2`` and degree ``n = 1 + sum r <= 5``.

    Returns ``(F, config)`` where config is the genus-0 divisor of ``1/sqrt(F')``.

    Raises
    ------
    InconsistentProfile
        if ``n`` contradicts Riemann-Hurwitz, ``len(z) != len(r)``, or ``m < 2``.
    NoRootFound
        if Newton fails from every seed.
    """
    r = tuple(int(v) for v in r)
    m = len(r)
    if n is not None and n != 1 + sum(r):
        raise InconsistentProfile(f"degree {n} violates Riemann-Hurwitz for profile {r}")
    n = 1 + sum(r)
    if len(z) != m:
        raise InconsistentProfile("need one critical value per critical point")
    if m < 2:
        raise InconsistentProfile("the gauge y_1=0, y_2=1 needs at least two critical points")
    if n > 5:
        raise InconsistentProfile("degree above 5 is not supported")
    z = np.asarray(z, dtype=complex)
    nx = n - 1

    def unpack(v):
        xs = v[:nx]
        ys = np.concatenate([[0.0, 1.0], v[nx:nx + m - 2]])
        return xs, ys, v[nx + m - 2], v[nx + m - 1]

    def F_eval(xs, ys, c, b, t):
        total = t
        for k in range(nx):
            a = np.prod([(xs[k] - y) ** (2 * rr) for y, rr in zip(ys, r)]) / np.prod(
                [(xs[k] - xs[i]) ** 2 for i in range(nx) if i != k])
            total = total - a / (t - xs[k])
        return c * total + b

    def residual(v):
        xs, ys, c, b = unpack(v)
        out = []
        for k in range(nx):
            s = sum(rr / (xs[k] - y) for y, rr in zip(ys, r))
            s -= sum(1.0 / (xs[k] - xs[i]) for i in range(nx) if i != k)
            others = list(ys) + [xs[i] for i in range(nx) if i != k]
            out.append(s * np.prod([xs[k] - q for q in others]))
        for j in range(m):
            out.append(F_eval(xs, ys, c, b, ys[j]) - z[j])
        return np.array(out)

    rng = np.random.default_rng(1) if rng is None else rng
    if seeds is None:
        seeds = []
        for _ in range(n_seeds):
            xs = 0.5 + 1.5 * (rng.standard_normal(nx) + 1j * rng.standard_normal(nx))
            ys = 0.5 + 1.5 * (rng.standard_normal(m - 2) + 1j * rng.standard_normal(m - 2))
            cb = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            seeds.append(np.concatenate([xs, ys, cb]))
    for seed in seeds:
        with np.errstate(all="ignore"):
            v, ok = newton(residual, seed, tol)
        if not ok or not np.all(np.isfinite(v)):
            continue
        xs, ys, c, b = unpack(v)
        try:
            cfg = Genus0Config(tuple(xs) + (INFINITY,), tuple(ys), r)
        except (DegenerateConfig, ValidationError):
            continue
        if abs(c) < 1e-8:
            continue
        base = covering_from_config(cfg)
        num = np.polynomial.polynomial.polyadd(c * base.numerator, b * base.denominator)
        F = ComplexRational(num, base.denominator)
        return F, cfg
    raise NoRootFound(f"no nondegenerate covering found from {len(seeds)} seeds")


def critical_values_residual(F: ComplexRational, cfg: Genus0Config, z) -> float:
    """Max ``|F(y_j) - z_j|`` over the finite critical points of the config."""
    return float(max(abs(F(y) - zz) for y, zz in zip(cfg.poles, z)))
