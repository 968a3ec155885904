"""Genus-one theory on the torus ``C / (Z + sigma Z)``.

``theta1(x) = -2 sum_{n>=0} (-1)**n q**((n+1/2)**2) sin((2n+1) pi x)``, ``q = exp(pi i sigma)``,
which equals the characteristic-``[1/2, 1/2]`` theta function of
:mod:`riemanntheta` exactly.  It is odd and satisfies
``theta1(x + 1) = -theta1(x)``, ``theta1(x + sigma) = -exp(-pi i sigma - 2 pi i x) theta1(x)``.

For a divisor ``sum x_j - sum r_k y_k`` with ``sum r_k = n`` and integers
``beta1, beta2`` with ``-sum x + sum r y + beta1 sigma + beta2 = 0`` the function

    phi(x) = prod theta1(x - x_j) / prod theta1(x - y_k)**r_k * exp(-2 pi i beta1 x)

has ``phi(x + 1) = phi(x + sigma) = phi(x)`` (the sign of the exponent is the
one that makes this true with the constraint as written).
"""
from __future__ import annotations

import warnings
from math import comb
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AtPole, BadModulus, DegenerateConfig, InconsistentProfile, PathThroughPole, SBViolated
from .numkit import ContourSpec, contour_integrate

_MIN_TERMS = 8
_DEGENERATE = 1e-12


def _check_sigma(sigma):
    sigma = complex(sigma)
    if sigma.imag <= 0:
        raise BadModulus(f"Im sigma must be positive, got {sigma}")
    if np.exp(-np.pi * sigma.imag) >= 0.999:
        raise BadModulus("Im sigma too small for the q-series (|q| >= 0.999)")
    return sigma


def _reduce(x, sigma):
    """Integers ``a, b`` and ``x_r = x - a sigma - b`` in the fundamental cell."""
    a = int(np.round(x.imag / sigma.imag))
    b = int(np.round((x - a * sigma).real))
    return a, b, x - a * sigma - b


def _series(x, sigma, k, tol):
    """k-th x-derivative of the q-series at an already reduced ``x``."""
    q = np.exp(1j * np.pi * sigma)
    total = 0j
    n = 0
    small = 0
    while True:
        w = (2 * n + 1) * np.pi
        # d^k/dx^k sin(w x) = w^k sin(w x + k pi / 2)
        term = -2 * (-1) ** n * q ** ((n + 0.5) ** 2) * w ** k * np.sin(w * x + k * np.pi / 2)
        total += term
        n += 1
        small = small + 1 if abs(term) <= tol * max(abs(total), 1e-300) else 0
        if n >= _MIN_TERMS and small >= 2:
            return total
        if n > 10000:
            raise BadModulus("q-series failed to converge")


def theta1_d(k: int, x, sigma, tol: float = 1e-16) -> complex:
    """``d^k theta1 / dx^k`` for ``k <= 3`` by term-wise differentiation with lattice reduction."""
    if not 0 <= k <= 3:
        raise ValueError("derivative order must be 0..3")
    sigma = _check_sigma(sigma)
    x = complex(x)
    a, b, xr = _reduce(x, sigma)
    # theta1(x) = E(x) theta1(x_r) with E(x) = (-1)^(a+b) exp(-pi i a^2 sigma - 2 pi i a x_r), x_r = x - a sigma - b
    E = (-1) ** (a + b) * np.exp(-1j * np.pi * a * a * sigma - 2j * np.pi * a * xr)
    lam = -2j * np.pi * a
    total = 0j
    for j in range(k + 1):
        total += comb(k, j) * lam ** (k - j) * _series(xr, sigma, j, tol)
    return complex(E * total)


def theta1(x, sigma, tol: float = 1e-16) -> complex:
    """``theta1(x, sigma)``.

    Raises
    ------
    BadModulus
        if ``Im sigma <= 0``.
    """
    return theta1_d(0, x, sigma, tol)


def theta1_dsigma(x, sigma, tol: float = 1e-16) -> complex:
    """``d theta1 / d sigma`` (no lattice reduction; intended for moderate ``Im x``)."""
    sigma = _check_sigma(sigma)
    x = complex(x)
    q = np.exp(1j * np.pi * sigma)
    total, n, small = 0j, 0, 0
    while True:
        e = (n + 0.5) ** 2
        term = -2 * (-1) ** n * 1j * np.pi * e * q ** e * np.sin((2 * n + 1) * np.pi * x)
        total += term
        n += 1
        small = small + 1 if abs(term) <= tol * max(abs(total), 1e-300) else 0
        if n >= _MIN_TERMS and small >= 2:
            return complex(total)


def f_log(x, sigma) -> complex:
    """``f = theta1' / theta1``."""
    return theta1_d(1, x, sigma) / theta1(x, sigma)


def f_prime(x, sigma) -> complex:
    """``f' = theta1'' / theta1 - f**2``."""
    t = theta1(x, sigma)
    return theta1_d(2, x, sigma) / t - (theta1_d(1, x, sigma) / t) ** 2


def lattice_distance(a, b, sigma) -> float:
    """Distance between ``a`` and ``b`` modulo ``Z + sigma Z``."""
    d = complex(a) - complex(b)
    _, _, dr = _reduce(d, complex(sigma))
    return min(abs(dr + i + j * sigma) for i in (-1, 0, 1) for j in (-1, 0, 1))


@dataclass(frozen=True)
class EllipticConfig:
    """Divisor data on the torus plus the integers ``beta1, beta2``.

    With ``strict=False`` the balancing constraint is not enforced, which is
    what the finite-difference identity checks need.
    """

    sigma: complex
    zeros: tuple
    poles: tuple
    orders: tuple
    beta1: int = 0
    beta2: int = 0
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        sigma = _check_sigma(self.sigma)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "zeros", tuple(complex(x) for x in self.zeros))
        object.__setattr__(self, "poles", tuple(complex(y) for y in self.poles))
        object.__setattr__(self, "orders", tuple(int(r) for r in self.orders))
        if len(self.orders) != len(self.poles):
            raise InconsistentProfile("orders must match poles")
        if sum(self.orders) != len(self.zeros):
            raise InconsistentProfile("need sum r = n on the torus")
        pts = self.zeros + self.poles
        for i in range(len(pts)):
            for j in range(i):
                if lattice_distance(pts[i], pts[j], sigma) < _DEGENERATE:
                    raise DegenerateConfig(f"points {pts[j]} and {pts[i]} coincide modulo the lattice")
        if self.strict and abs(self.balance()) > 1e-9 * max(1.0, max((abs(p) for p in pts), default=1.0)):
            raise DegenerateConfig(f"balancing constraint violated by {self.balance()}")

    @property
    def n(self):
        return len(self.zeros)

    @property
    def m(self):
        return len(self.poles)

    def balance(self) -> complex:
        """``-sum x + sum r y + beta1 sigma + beta2`` (zero for admissible configs)."""
        return (-sum(self.zeros) + sum(r * y for r, y in zip(self.orders, self.poles))
                + self.beta1 * self.sigma + self.beta2)

    def divisor(self):
        return [(x, 1) for x in self.zeros] + [(y, -r) for y, r in zip(self.poles, self.orders)]

    def moved(self, zeros=None, poles=None):
        """Copy with new points and the constraint switched off."""
        return replace(self, zeros=self.zeros if zeros is None else tuple(zeros),
                       poles=self.poles if poles is None else tuple(poles), strict=False)

    @classmethod
    def balanced(cls, sigma, free_zeros, poles, orders, beta1=0, beta2=0):
        """Config whose last zero is placed so the balancing constraint holds."""
        last = sum(r * y for r, y in zip(orders, poles)) - sum(free_zeros) + beta1 * sigma + beta2
        return cls(sigma, tuple(free_zeros) + (last,), tuple(poles), tuple(orders), beta1, beta2)

    def to_json(self):
        enc = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {"sigma": enc(self.sigma), "zeros": [enc(x) for x in self.zeros],
                "poles": [enc(y) for y in self.poles], "orders": list(self.orders),
                "beta1": self.beta1, "beta2": self.beta2}

    @classmethod
    def from_json(cls, obj):
        dec = lambda v: complex(*v)
        return cls(dec(obj["sigma"]), tuple(dec(v) for v in obj["zeros"]), tuple(dec(v) for v in obj["poles"]),
                   tuple(obj["orders"]), int(obj.get("beta1", 0)), int(obj.get("beta2", 0)))


def random_config(rng, sigma=1j, n=3, max_order=2, max_tries=200, min_separation=0.0) -> EllipticConfig:
    """Random admissible config with ``n`` zeros and random pole orders summing to ``n``.

    Draws whose points come closer than ``min_separation`` (modulo the
    lattice) are rejected.
    """
    sigma = complex(sigma)
    for _ in range(max_tries):
        orders = []
        while sum(orders) < n:
            orders.append(int(rng.integers(1, min(max_order, n - sum(orders)) + 1)))
        cell = lambda k: rng.random(k) + sigma * rng.random(k)
        try:
            c = EllipticConfig.balanced(sigma, tuple(cell(n - 1)), tuple(cell(len(orders))), tuple(orders),
                                        int(rng.integers(-1, 2)), int(rng.integers(-1, 2)))
        except DegenerateConfig:
            continue
        pts = c.zeros + c.poles
        if min((lattice_distance(a, b, sigma) for i, a in enumerate(pts) for b in pts[:i]), default=1.0) \
                >= min_separation:
            return c
    raise DegenerateConfig("could not draw a nondegenerate config")


def _log_deriv(c: EllipticConfig, x):
    return sum(d * f_log(x - p, c.sigma) for p, d in c.divisor()) - 2j * np.pi * c.beta1


def phi_eval(c: EllipticConfig, x) -> complex:
    """``prod theta1(x - x_j) / prod theta1(x - y_k)**r_k * exp(-2 pi i beta1 x)``.

    Raises
    ------
    AtPole
        if ``x`` coincides with a pole modulo the lattice.
    """
    x = complex(x)
    for y in c.poles:
        if lattice_distance(x, y, c.sigma) < _DEGENERATE:
            raise AtPole(f"{x} is a pole of phi")
    val = np.exp(-2j * np.pi * c.beta1 * x)
    for p, d in c.divisor():
        val *= theta1(x - p, c.sigma) ** d
    return complex(val)


def sb_residual_elliptic(c: EllipticConfig, literal: bool = False) -> np.ndarray:
    """``sum_i r_i f(x_j - y_i) - sum_{i != j} f(x_j - x_i) + 2 pi i beta1`` for ``j < n``.

    The constant ``2 pi i beta1`` makes the value equal to ``c_{-1} / (2 c_{-2})``
    for ``dx / phi**2 = (c_{-2} xi**-2 + c_{-1} xi**-1 + ...) dxi``; pass
    ``literal=True`` to omit it.
    """
    out = []
    for j in range(c.n - 1):
        xj = c.zeros[j]
        s = sum(r * f_log(xj - y, c.sigma) for y, r in zip(c.poles, c.orders))
        s -= sum(f_log(xj - xi, c.sigma) for i, xi in enumerate(c.zeros) if i != j)
        if not literal:
            s += 2j * np.pi * c.beta1
        out.append(s)
    return np.array(out, dtype=complex)


def residue_check_elliptic(c: EllipticConfig, tol: float = 1e-12) -> np.ndarray:
    """Quadrature oracle for :func:`sb_residual_elliptic`: ``res(dx/phi^2) / (2 res((x-x_j) dx/phi^2))``."""
    out = []
    pts = [p for p, _ in c.divisor()]
    for j in range(c.n - 1):
        xj = c.zeros[j]
        rad = 0.3 * min([lattice_distance(xj, p, c.sigma) for p in pts if p != xj] + [0.5 * c.sigma.imag, 0.5])
        circ = ContourSpec.circle(xj, rad)
        inv2 = np.vectorize(lambda x: 1.0 / phi_eval(c, x) ** 2)
        res = contour_integrate(inv2, circ, tol)
        lead = contour_integrate(lambda x: (x - xj) * inv2(x), circ, tol)
        out.append(res / (2 * lead))
    return np.array(out, dtype=complex)


def _segment_clear(a, b, pts, sigma, clearance):
    for t in np.linspace(0, 1, 201):
        z = a + (b - a) * t
        if any(lattice_distance(z, p, sigma) < clearance for p in pts):
            return False
    return True


def period_conditions(c: EllipticConfig, base=None, tol: float = 1e-12, clearance: float = 0.05,
                      rng=None):
    """``(int_p^{p+1} dx/phi^2, int_p^{p+sigma} dx/phi^2)`` along straight segments.

    The base point is shifted (up to 16 times) until both segments keep
    ``clearance`` away from the zeros of ``phi``.

    Raises
    ------
    PathThroughPole
        if no admissible base point is found.
    """
    rng = np.random.default_rng(7) if rng is None else rng
    p = complex(0.1234 + 0.0567j) * (1 + c.sigma) if base is None else complex(base)
    inv2 = np.vectorize(lambda x: 1.0 / phi_eval(c, x) ** 2)
    for _ in range(16):
        if (_segment_clear(p, p + 1, c.zeros, c.sigma, clearance)
                and _segment_clear(p, p + c.sigma, c.zeros, c.sigma, clearance)):
            A = contour_integrate(inv2, ContourSpec.polyline([p, p + 1]), tol)
            B = contour_integrate(inv2, ContourSpec.polyline([p, p + c.sigma]), tol)
            return complex(A), complex(B)
        p = p + 0.37 * (rng.random() - 0.5) + 0.37j * (rng.random() - 0.5) * c.sigma.imag
    raise PathThroughPole("no base point found whose period segments avoid the zeros of phi")


def period_integral(c: EllipticConfig, vertices, tol: float = 1e-12) -> complex:
    """``int dx/phi^2`` along an explicit polyline (for homotopy checks)."""
    inv2 = np.vectorize(lambda x: 1.0 / phi_eval(c, x) ** 2)
    return complex(contour_integrate(inv2, ContourSpec.polyline(list(vertices)), tol))


def tau_yy_elliptic(c: EllipticConfig) -> complex:
    """``prod_{i<j} theta1(p_i - p_j)**(d_i d_j)``."""
    div = c.divisor()
    out = 1 + 0j
    for i in range(len(div)):
        for j in range(i + 1, len(div)):
            out *= theta1(div[i][0] - div[j][0], c.sigma) ** (div[i][1] * div[j][1])
    return complex(out)


def accessory_elliptic(c: EllipticConfig, exact: bool = False) -> np.ndarray:
    """``H_k = 2 r_k (sum_{l != k} r_l f(y_k - y_l) - sum_j f(y_k - x_j))``.

    With ``exact=True`` the term ``4 pi i beta1 r_k`` from the exponential
    factor of ``phi`` is added, giving the simple-pole coefficient of the
    actual potential ``phi'' / phi``.
    """
    out = []
    for k, (yk, rk) in enumerate(zip(c.poles, c.orders)):
        s = sum(rl * f_log(yk - yl, c.sigma) for l, (yl, rl) in enumerate(zip(c.poles, c.orders)) if l != k)
        s -= sum(f_log(yk - x, c.sigma) for x in c.zeros)
        h = 2 * rk * s
        if exact:
            h += 4j * np.pi * c.beta1 * rk
        out.append(h)
    return np.array(out, dtype=complex)


def potential_direct(c: EllipticConfig, x) -> complex:
    """``phi'' / phi = (phi'/phi)' + (phi'/phi)**2`` from the theta quotients."""
    x = complex(x)
    g = _log_deriv(c, x)
    dg = sum(d * f_prime(x - p, c.sigma) for p, d in c.divisor())
    return complex(dg + g * g)


def _singular_part(c, H, x):
    return sum(-r * (r + 1) * f_prime(x - y, c.sigma) + h * f_log(x - y, c.sigma)
               for y, r, h in zip(c.poles, c.orders, H))


def potential_elliptic(c: EllipticConfig, x, sb_tol: float = 1e-8, sample=None) -> complex:
    """``u(x) = sum_k [-r_k(r_k+1) f'(x-y_k) + H_k f(x-y_k)] + C``.

    ``H_k`` are the exact accessory parameters and ``C`` is fitted against
    :func:`potential_direct` at one generic point.  A warning
    (:class:`SBViolated`) is issued if the config does not solve the SB system.
    """
    res = sb_residual_elliptic(c)
    if res.size and np.max(np.abs(res)) > sb_tol:
        warnings.warn(f"SB residual {np.max(np.abs(res)):.3g} exceeds {sb_tol:g}", SBViolated)
    H = accessory_elliptic(c, exact=True)
    p0 = complex(0.3141 + 0.2718 * c.sigma) if sample is None else complex(sample)
    C = potential_direct(c, p0) - _singular_part(c, H, p0)
    return complex(_singular_part(c, H, complex(x)) + C)


def solve_sb_elliptic(sigma, poles, orders, beta1=0, beta2=0, seeds=None, tol: float = 1e-11,
                      n_seeds: int = 24, rng=None):
    """Configs solving the elliptic SB system with the poles and ``beta`` held fixed.

    The unknowns are ``x_1..x_{n-1}``; ``x_n`` follows from the balancing
    constraint.  Distinct solutions (up to permutation and lattice shifts of
    the free zeros) are returned.

    Raises
    ------
    NoRootFound
        if no seed converges to a nondegenerate config.
    """
    from .errors import NoRootFound
    from .numkit import newton

    sigma = _check_sigma(sigma)
    poles, orders = tuple(complex(y) for y in poles), tuple(int(r) for r in orders)
    n = sum(orders)
    if n < 2:
        raise InconsistentProfile("need at least two zeros for a nontrivial SB system")
    rng = np.random.default_rng(11) if rng is None else rng
    if seeds is None:
        seeds = [rng.random(n - 1) + sigma * rng.random(n - 1) for _ in range(n_seeds)]

    def build(free, strict=False):
        last = sum(r * y for r, y in zip(orders, poles)) - sum(free) + beta1 * sigma + beta2
        return EllipticConfig(sigma, tuple(free) + (last,), poles, orders, beta1, beta2, strict=strict)

    def residual(free):
        try:
            return sb_residual_elliptic(build(free))
        except (DegenerateConfig, ZeroDivisionError):
            return np.full(n - 1, 1e300, dtype=complex)

    found, keys = [], []
    for s in seeds:
        with np.errstate(all="ignore"):
            z, ok = newton(residual, np.asarray(s, dtype=complex), tol)
        if not ok or not np.all(np.isfinite(z)):
            continue
        # reducing a free zero by a lattice vector shifts x_n and changes beta; keep z as found
        try:
            cfg = build(z, strict=True)
        except DegenerateConfig:
            continue
        pts = cfg.zeros + cfg.poles
        if min(lattice_distance(a, b, sigma) for i, a in enumerate(pts) for b in pts[:i]) < 1e-4:
            continue
        key = sorted((np.round(_reduce(complex(x), sigma)[2], 6) for x in cfg.zeros),
                     key=lambda w: (w.real, w.imag))
        if any(np.allclose(key, k, atol=1e-6) for k in keys):
            continue
        keys.append(key)
        found.append(cfg)
    if not found:
        raise NoRootFound("no elliptic SB solution found")
    return found
