"""Riemann theta functions with certified lattice-sum truncation.

``Theta(z, Omega) = sum_n exp(pi i <n, Omega n> + 2 pi i <n, z>)``.  Every
sum is taken over the ellipsoid ``|T (n + c)| <= R`` where ``T^T T = pi Im Omega``,
``c = (Im Omega)^{-1} Im z`` is the centre of the Gaussian envelope and ``R``
is chosen from the Gaussian tail bound so the neglected terms, relative to
the envelope maximum ``exp(pi c^T Im Omega c)``, are below ``tol``.  Centring
the ellipsoid at ``-c`` plays the role of reducing ``z`` to the fundamental
domain.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, gamma

from .errors import BadPeriodMatrix, UnsupportedOrder, ValidationError

MAX_ORDER = 4


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """Symmetric ``g x g`` matrix with positive definite imaginary part."""

    omega: np.ndarray

    def __post_init__(self):
        om = np.atleast_2d(np.asarray(self.omega, dtype=complex))
        if om.shape[0] != om.shape[1]:
            raise BadPeriodMatrix("period matrix must be square")
        if np.max(np.abs(om - om.T)) > 1e-10 * max(1.0, np.max(np.abs(om))):
            raise BadPeriodMatrix("period matrix is not symmetric")
        Y = om.imag
        Y = 0.5 * (Y + Y.T)
        if np.min(np.linalg.eigvalsh(Y)) <= 0:
            raise BadPeriodMatrix("imaginary part is not positive definite")
        om = 0.5 * (om + om.T)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "_Y", Y)
        object.__setattr__(self, "_Yinv", np.linalg.inv(Y))
        T = np.linalg.cholesky(np.pi * Y).T  # upper: T^T T = pi Y
        object.__setattr__(self, "_T", T)
        object.__setattr__(self, "_rho", _shortest_vector(T))

    @property
    def g(self):
        return self.omega.shape[0]

    @property
    def Y(self):
        return self._Y

    def to_json(self):
        return [[[float(v.real), float(v.imag)] for v in row] for row in self.omega]

    @classmethod
    def from_json(cls, rows):
        return cls(np.array([[complex(*v) for v in row] for row in rows]))


def as_period_matrix(omega) -> PeriodMatrix:
    return omega if isinstance(omega, PeriodMatrix) else PeriodMatrix(np.asarray(omega))


def _shortest_vector(T):
    """Length of the shortest nonzero vector of the lattice ``T Z^g`` (small g, brute force)."""
    g = T.shape[0]
    best = min(np.linalg.norm(T[:, i]) for i in range(g))
    # every vector shorter than `best` has |n_i| <= best * sqrt(((T^T T)^{-1})_ii)
    Ginv = np.linalg.inv(T.T @ T)
    bounds = [int(np.floor(best * np.sqrt(Ginv[i, i]))) for i in range(g)]
    for n in itertools.product(*[range(-b, b + 1) for b in bounds]):
        if any(n):
            best = min(best, np.linalg.norm(T @ np.array(n)))
    return best


def _tail_bound(R, g, rho, order):
    """Gaussian tail bound for the neglected terms outside radius ``R`` (with a polynomial weight)."""
    if R <= rho / 2:
        return np.inf
    x = (R - rho / 2) ** 2
    base = 0.5 * g * (2.0 / rho) ** g * gammaincc(0.5 * g, x) * gamma(0.5 * g)
    # term-wise derivatives pick up at most (2 pi |n|)^order; bound |n| on the shell crudely by R
    return base * (1.0 + 2 * np.pi * R) ** order


@lru_cache(maxsize=256)
def _radius(g, rho, tol, order):
    lo, hi = rho / 2, rho / 2 + 2.0
    while _tail_bound(hi, g, rho, order) > tol:
        hi = rho / 2 + 2 * (hi - rho / 2)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _tail_bound(mid, g, rho, order) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def _index_set(pm: PeriodMatrix, centre, R):
    """Integer points with ``|T (n - centre)| <= R``."""
    box = R * np.sqrt(np.diag(np.linalg.inv(pm._T.T @ pm._T)))
    ranges = [np.arange(np.ceil(centre[i] - box[i]), np.floor(centre[i] + box[i]) + 1) for i in range(pm.g)]
    grid = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(pm.g, -1).T
    keep = np.linalg.norm((grid - centre) @ pm._T.T, axis=1) <= R
    return grid[keep]



def _check_tol(tol):
    if not (tol > 0):
        raise ValidationError("tol must be positive")


def lattice_sum(z, omega, tol=1e-14, a=None, b=None, vectors=()):
    """``sum_n prod_k (2 pi i <n+a, v_k>) exp(pi i <n+a, Omega(n+a)> + 2 pi i <n+a, z+b>)``.

    ``vectors`` lists the directions ``v_k`` of the derivatives (at most four).
    """
    _check_tol(tol)
    pm = as_period_matrix(omega)
    g = pm.g
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (g,):
        raise ValidationError(f"z must have length {g}")
    a = np.zeros(g) if a is None else np.asarray(a, dtype=float)
    b = np.zeros(g) if b is None else np.asarray(b, dtype=float)
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    if len(vectors) > MAX_ORDER:
        raise UnsupportedOrder(f"derivative order {len(vectors)} exceeds {MAX_ORDER}")
    c = pm._Yinv @ z.imag
    R = _radius(g, float(pm._rho), float(tol), len(vectors))
    n = _index_set(pm, -c - a, R) + a
    expo = 1j * np.pi * np.einsum("ki,ij,kj->k", n, pm.omega, n) + 2j * np.pi * n @ (z + b)
    shift = np.pi * c @ pm._Y @ c
    terms = np.exp(expo - shift)
    for v in vectors:
        terms = terms * (2j * np.pi * (n @ v))
    return complex(np.sum(np.sort_complex(terms)[::-1]) * np.exp(shift))


def theta(z, omega, tol: float = 1e-14) -> complex:
    """Riemann theta ``Theta(z, Omega)``.

    Raises
    ------
    BadPeriodMatrix
        if ``Omega`` is not symmetric or ``Im Omega`` is not positive definite.
    """
    return lattice_sum(z, omega, tol)


def _multi_index_vectors(alpha, g):
    alpha = tuple(int(k) for k in alpha)
    if len(alpha) != g or any(k < 0 for k in alpha):
        raise ValidationError("multi-index must have g nonnegative entries")
    if sum(alpha) > MAX_ORDER:
        raise UnsupportedOrder(f"|alpha| = {sum(alpha)} exceeds {MAX_ORDER}")
    eye = np.eye(g)
    return [eye[i] for i, k in enumerate(alpha) for _ in range(k)]


def theta_deriv(alpha, z, omega, tol: float = 1e-14) -> complex:
    """Partial derivative ``d^alpha Theta / dz^alpha`` for a multi-index ``alpha`` with ``|alpha| <= 4``."""
    pm = as_period_matrix(omega)
    return lattice_sum(z, pm, tol, vectors=_multi_index_vectors(alpha, pm.g))


def theta_directional(z, omega, vectors, tol: float = 1e-14) -> complex:
    """Mixed directional derivative ``D_{v_1} ... D_{v_k} Theta(z)``."""
    return lattice_sum(z, omega, tol, vectors=vectors)


def theta_gradient(z, omega, tol: float = 1e-14, char=None) -> np.ndarray:
    pm = as_period_matrix(omega)
    eye = np.eye(pm.g)
    a, b = (None, None) if char is None else (char.beta1, char.beta2)
    return np.array([lattice_sum(z, pm, tol, a, b, [eye[i]]) for i in range(pm.g)])


@dataclass(frozen=True, eq=False)
class ThetaCharacteristic:
    """Half-integer characteristic ``[beta1, beta2]``.

    Entries need not be reduced to ``{0, 1/2}``; :meth:`reduced` does that.
    The parity ``4 <beta1, beta2> mod 2`` is unchanged by integer shifts.
    """

    beta1: np.ndarray
    beta2: np.ndarray

    def __post_init__(self):
        b1 = np.atleast_1d(np.asarray(self.beta1, dtype=float))
        b2 = np.atleast_1d(np.asarray(self.beta2, dtype=float))
        if b1.shape != b2.shape:
            raise ValidationError("beta1 and beta2 must have equal length")
        for v in (b1, b2):
            if np.max(np.abs(2 * v - np.round(2 * v)), initial=0) > 1e-9:
                raise ValidationError("characteristic entries must be half-integers")
        object.__setattr__(self, "beta1", np.round(2 * b1) / 2)
        object.__setattr__(self, "beta2", np.round(2 * b2) / 2)

    @property
    def g(self):
        return len(self.beta1)

    @property
    def parity(self) -> int:
        """0 for even, 1 for odd."""
        return int(round(4 * float(self.beta1 @ self.beta2))) % 2

    def reduced(self) -> "ThetaCharacteristic":
        return ThetaCharacteristic(np.mod(self.beta1, 1.0), np.mod(self.beta2, 1.0))

    def __eq__(self, other):
        return (isinstance(other, ThetaCharacteristic) and np.array_equal(self.beta1, other.beta1)
                and np.array_equal(self.beta2, other.beta2))

    def __hash__(self):
        return hash((tuple(self.beta1), tuple(self.beta2)))

    def __repr__(self):
        return f"ThetaCharacteristic({list(self.beta1)}, {list(self.beta2)})"

    def to_json(self):
        return {"beta1": list(map(float, self.beta1)), "beta2": list(map(float, self.beta2))}


def all_characteristics(g: int, parity=None):
    """The ``4**g`` reduced half-integer characteristics, optionally filtered by parity."""
    out = []
    for bits in itertools.product((0.0, 0.5), repeat=2 * g):
        ch = ThetaCharacteristic(bits[:g], bits[g:])
        if parity is None or ch.parity == parity:
            out.append(ch)
    return out


def theta_char(char: ThetaCharacteristic, z, omega, tol: float = 1e-14, vectors=()) -> complex:
    """``theta[beta1, beta2](z) = sum_n exp(pi i <n+b1, Omega(n+b1)> + 2 pi i <n+b1, z+b2>)``.

    Equal to ``exp(pi i <b1, Omega b1> + 2 pi i <b1, z + b2>) Theta(z + Omega b1 + b2)``.
    ``vectors`` requests directional derivatives in ``z``.
    """
    pm = as_period_matrix(omega)
    if char.g != pm.g:
        raise ValidationError("characteristic and period matrix have different genus")
    return lattice_sum(z, pm, tol, char.beta1, char.beta2, vectors)
