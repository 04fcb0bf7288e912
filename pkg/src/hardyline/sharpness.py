"""Sharp constants, Rayleigh quotients and their minimisation on truncated domains.

Test vectors are arrays ``u = (u_1, ..., u_K)``; the value u_0 = 0 and the
zeros past the support are implicit, so the quotient always includes the
boundary term |u_K|^p nu(K+1).

For p = 2 the truncated minimum is the smallest eigenvalue of K x = lam D x,
with K the path-graph stiffness matrix and D = diag(mu). Writing K = B^T W B,
the eigenvalues are the squared singular values of the lower bidiagonal
C = W^(1/2) B D^(-1/2). They are found by Sturm-count bisection on the
zero-diagonal Golub-Kahan tridiagonal built from C, which is accurate to high
relative precision. For other p, nonlinear inverse iteration solves
L v = mu u^(p-1) exactly at each step by shooting on the edge fluxes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import DomainError, NotConverged, PrefixViolation, UnsupportedAlpha, ZeroDenominator
from .halfline_operator import signed_power
from .weights import Power, WeightFamily, as_p


# ---------------------------------------------------------------- sharp constant


@dataclass(frozen=True)
class Value:
    value: float


@dataclass(frozen=True)
class Bounds:
    lo: float
    hi: float


def continuum_constant(alpha: float, p) -> float:
    """|(alpha - p + 1)/p|^p."""
    p = as_p(p)
    return abs((alpha - p + 1.0) / p) ** p


def sharp_constant(alpha: float, p):
    """Value for alpha >= 0 off the critical exponent, None at alpha = p-1, Bounds for alpha < 0."""
    p = as_p(p)
    if alpha == p - 1.0:
        return None
    A = continuum_constant(alpha, p)
    if alpha < 0:
        return Bounds(2.0 ** (alpha - p) * A, A)
    return Value(A)


# ---------------------------------------------------------------- quotients


def _as_vector(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise DomainError("a test vector must be a non-empty 1-d sequence")
    return u


def energy_and_mass(u, mu: WeightFamily, nu: WeightFamily, p, start: int = 1):
    """(sum nu |Du|^p, sum mu |u|^p) for u supported on start..start+K-1."""
    p = as_p(p)
    u = _as_vector(u)
    K = u.size
    padded = np.concatenate(([0.0], u, [0.0]))
    du = np.abs(np.diff(padded))
    energy = math.fsum(nu.values(start, start + K) * du ** p)
    mass = math.fsum(mu.values(start, start + K - 1) * np.abs(u) ** p)
    return energy, mass


def rayleigh_quotient(u, mu: WeightFamily, nu: WeightFamily, p, start: int = 1) -> float:
    energy, mass = energy_and_mass(u, mu, nu, p, start)
    if mass == 0.0:
        raise ZeroDenominator("the test vector vanishes on its support")
    return energy / mass


def _check_alpha(alpha, p):
    if alpha == p - 1.0:
        raise UnsupportedAlpha(f"alpha = p - 1 = {alpha} has no power-weight constant")
    if alpha < 0:
        raise UnsupportedAlpha(f"alpha = {alpha} < 0: only bounds are known, see sharp_constant")


def hardy_margins(U, alpha: float, p):
    """Rowwise LHS - A * RHS of the power-weight inequality, plus the LHS values.

    ``U`` has shape (batch, K); each row is u_1..u_K.
    """
    p = as_p(p)
    _check_alpha(alpha, p)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    K = U.shape[1]
    n = np.arange(1, K + 2, dtype=float)
    padded = np.pad(U, ((0, 0), (1, 1)))
    lhs = (np.abs(np.diff(padded, axis=1)) ** p * n ** alpha).sum(axis=1)
    rhs = (np.abs(U) ** p * n[:K] ** (alpha - p)).sum(axis=1)
    A = continuum_constant(alpha, p)
    return lhs - A * rhs, lhs


def hardy_check(u, alpha: float, p) -> float:
    """LHS - A * RHS for one vector; non-negative by the sharp inequality."""
    u = _as_vector(u)
    p = as_p(p)
    _check_alpha(alpha, p)
    n = np.arange(1, u.size + 2, dtype=float)
    du = np.abs(np.diff(np.concatenate(([0.0], u, [0.0]))))
    lhs = math.fsum(du ** p * n ** alpha)
    rhs = math.fsum(np.abs(u) ** p * n[:-1] ** (alpha - p))
    return lhs - continuum_constant(alpha, p) * rhs


def critical_margins(U, p):
    """Rowwise margins of the log-corrected inequality at alpha = p-1, plus LHS values."""
    p = as_p(p)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if np.any(U[:, 0] != 0.0):
        raise PrefixViolation("the critical inequality needs u_1 = 0")
    K = U.shape[1]
    n = np.arange(1, K + 2, dtype=float)
    padded = np.pad(U, ((0, 0), (1, 1)))
    du = np.abs(np.diff(padded, axis=1))[:, 1:]  # edges n = 2..K+1
    lhs = (du ** p * n[1:] ** (p - 1.0)).sum(axis=1)
    m = n[1:K]
    rhs = (np.abs(U[:, 1:]) ** p / (m * np.log(m) ** p)).sum(axis=1)
    return lhs - ((p - 1.0) / p) ** p * rhs, lhs


def critical_hardy_check(u, p) -> float:
    u = _as_vector(u)
    margin, _ = critical_margins(u[None, :], p)
    return float(margin[0])


# ---------------------------------------------------------------- problems


@dataclass
class RayleighProblem:
    """Minimise the quotient over vectors supported on [M, N].

    With ``alpha`` given the weights default to mu = n^(alpha-p), nu = n^alpha.
    """

    p: float
    N: int
    M: int = 1
    alpha: float | None = None
    mu: WeightFamily | None = None
    nu: WeightFamily | None = None

    def __post_init__(self):
        self.p = as_p(self.p)
        if self.mu is None or self.nu is None:
            if self.alpha is None:
                raise DomainError("give alpha or both weights mu and nu")
            self.mu = self.mu or Power(self.alpha - self.p)
            self.nu = self.nu or Power(self.alpha)
        if int(self.M) != self.M or int(self.N) != self.N or not 1 <= self.M <= self.N:
            raise DomainError(f"need integers 1 <= M <= N, got M={self.M!r}, N={self.N!r}")
        self.M, self.N = int(self.M), int(self.N)

    @property
    def size(self) -> int:
        return self.N - self.M + 1

    def weights(self):
        """mu on vertices M..N and nu on edges M..N+1."""
        return self.mu.values(self.M, self.N), self.nu.values(self.M, self.N + 1)

    def quotient(self, x) -> float:
        return rayleigh_quotient(x, self.mu, self.nu, self.p, start=self.M)

    def initial_profile(self) -> np.ndarray:
        n = np.arange(self.M, self.N + 1, dtype=float)
        if self.alpha is None:
            g = 0.5
        else:
            g = (self.p - 1.0 - self.alpha) / self.p
        return n ** g * (1.0 - n / (self.N + 1.0))


@dataclass
class RayleighResult:
    value: float
    minimizer: np.ndarray
    iterations: int
    residual: float
    converged: bool
    method: str
    M: int = 1
    bracket: tuple | None = None
    history: list = field(default_factory=list, repr=False)
    residual_floor: float = 0.0


def _normalise(x, mu, p):
    x = np.asarray(x, dtype=float)
    norm = math.fsum(mu * np.abs(x) ** p) ** (1.0 / p)
    if norm == 0.0:
        raise ZeroDenominator("cannot normalise the zero vector")
    x = x / norm
    nz = np.flatnonzero(x)
    if nz.size and x[nz[0]] < 0:
        x = -x
    return x


def _residual(x, value, mu, nu, p):
    """Dual-norm size of L x - value * mu x^(p-1) for a normalised x.

    The second return value is the rounding floor of that norm. Each difference
    x_n - x_{n-1} carries an error up to u(|x_n| + |x_{n-1}|); near the peak of
    the minimiser, where the difference vanishes, that error is amplified by
    the non-Lipschitz power |t|^(p-1) when p < 2.
    """
    padded = np.concatenate(([0.0], x, [0.0]))
    diff = np.diff(padded)
    flux = nu * signed_power(diff, p - 1.0)
    mass = value * mu * signed_power(x, p - 1.0)
    r = flux[:-1] - flux[1:] - mass
    u = 2.0 ** -53
    eps = u * (np.abs(padded[1:]) + np.abs(padded[:-1]))
    a = np.abs(diff)
    with np.errstate(divide="ignore"):
        if p < 2.0:
            dflux = nu * np.minimum(eps ** (p - 1.0), (p - 1.0) * a ** (p - 2.0) * eps)
        else:
            dflux = nu * (p - 1.0) * (a + eps) ** (p - 2.0) * eps
    scale = dflux[:-1] + dflux[1:] + 8 * u * (np.abs(flux[:-1]) + np.abs(flux[1:]) + np.abs(mass))
    q = p / (p - 1.0)
    w = mu ** (1.0 - q)
    norm = math.fsum(np.abs(r) ** q * w) ** (1.0 / q)
    floor = math.fsum(scale ** q * w) ** (1.0 / q)
    return norm, floor


# ---------------------------------------------------------------- exact p = 2


def _sturm_below(e2: list, x: float) -> int:
    """Number of eigenvalues < x of the zero-diagonal tridiagonal with squared off-diagonals e2."""
    count = 0
    q = -x
    tiny = 1e-300
    if q < 0:
        count += 1
    for s in e2:
        if q == 0.0:
            q = -tiny
        q = -x - s / q
        if q < 0:
            count += 1
    return count


def _smallest_singular(mu, nu, upper: float):
    """Bracket of the smallest singular value of the bidiagonal factor by bisection."""
    a = np.sqrt(nu[:-1] / mu)
    b = np.sqrt(nu[1:] / mu)
    off = np.empty(2 * mu.size)
    off[0::2], off[1::2] = a, b
    e2 = (off * off).tolist()
    m = mu.size
    lo, hi = 0.0, upper
    while _sturm_below(e2, hi) - (m + 1) < 1:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_below(e2, mid) - (m + 1) >= 1:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 4e-16 * hi:
            break
    return lo, hi


def _inverse_iteration(mu, nu, shift, x0, steps=4):
    m = mu.size
    diag = nu[:-1] + nu[1:] - shift * mu
    ab = np.zeros((3, m))
    ab[0, 1:] = -nu[1:-1]
    ab[1] = diag
    ab[2, :-1] = -nu[1:-1]
    x = x0.copy()
    for _ in range(steps):
        y = solve_banded((1, 1), ab, mu * x)
        if not np.all(np.isfinite(y)):
            break
        x = _normalise(y, mu, 2.0)
    return x


def _exact_p2(problem: RayleighProblem) -> RayleighResult:
    mu, nu = problem.weights()
    x0 = _normalise(problem.initial_profile(), mu, 2.0)
    upper = math.sqrt(problem.quotient(x0))
    s_lo, s_hi = _smallest_singular(mu, nu, upper)
    # floating-point Sturm counts carry a backward error of order m * eps
    slack = 4.0 * (mu.size + 1) * 2.0 ** -53
    lam_lo, lam_hi = s_lo * s_lo * (1.0 - slack), s_hi * s_hi * (1.0 + slack)
    x = _inverse_iteration(mu, nu, lam_lo * (1.0 - 1e-13), x0)
    value = problem.quotient(x)
    res, _ = _residual(x, value, mu, nu, 2.0)
    ok = value <= lam_hi * (1.0 + 1e-12)
    return RayleighResult(value, x, 1, res, ok, "exact", problem.M, (lam_lo, lam_hi))


# ---------------------------------------------------------------- general p


def solve_p_poisson(nu_edges: np.ndarray, f: np.ndarray, p: float) -> np.ndarray:
    """Solve L v = f on vertices 1..m with v_0 = v_{m+1} = 0.

    Fluxes obey phi_{e+1} = phi_e - f_e, so phi_e = phi_1 - F_e; the unknown
    phi_1 is fixed by requiring the increments psi(phi_e / nu_e) to sum to zero.
    """
    F = np.concatenate(([0.0], np.cumsum(f)))
    e = 1.0 / (p - 1.0)

    def incr(phi):
        return signed_power((phi - F) / nu_edges, e)

    def total(phi):
        return math.fsum(incr(phi))

    a, b = float(F.min()), float(F.max())
    if a == b:
        return np.zeros(f.size)
    phi = brentq(total, a, b, xtol=1e-300, rtol=8.9e-16, maxiter=400)
    d = incr(phi)
    left = np.cumsum(d)[:-1]
    right = -np.cumsum(d[::-1])[::-1][1:]
    turn = int(np.argmax(d < 0)) if np.any(d < 0) else d.size
    return np.where(np.arange(f.size) < turn, left, right)


def _descent(problem: RayleighProblem, x0=None, tol=1e-9, max_iter=2000) -> RayleighResult:
    p = problem.p
    mu, nu = problem.weights()
    x = _normalise(problem.initial_profile() if x0 is None else x0, mu, p)
    value = problem.quotient(x)
    history = [value]
    res, floor = _residual(x, value, mu, nu, p)
    best, since_best, it = res, 0, 0

    def done(r, fl, v):
        return r < tol * v or r <= fl

    while it < max_iter and not done(res, floor, value):
        it += 1
        y = _normalise(solve_p_poisson(nu, mu * signed_power(x, p - 1.0), p), mu, p)
        vy = problem.quotient(y)
        if vy > value * (1.0 + 1e-14):
            # damped step back towards the current iterate
            t = 0.5
            while t > 1e-8:
                z = _normalise(x + t * (y - x), mu, p)
                vz = problem.quotient(z)
                if vz <= value:
                    y, vy = z, vz
                    break
                t *= 0.5
            else:
                break
        x, value = y, vy
        res, floor = _residual(x, value, mu, nu, p)
        history.append(value)
        if res < best * (1.0 - 1e-3):
            best, since_best = res, 0
        else:
            since_best += 1
            if since_best >= 50:
                break
    return RayleighResult(value, x, it, res, done(res, floor, value), "descent", problem.M, None, history,
                          floor)


def minimize_rayleigh(problem: RayleighProblem, method: str = "auto", x0=None, tol: float = 1e-9,
                      max_iter: int = 2000, strict: bool = False) -> RayleighResult:
    """Minimise the p-Rayleigh quotient over vectors supported on [M, N].

    ``method`` is ``"exact"`` (p = 2 only), ``"descent"`` or ``"auto"``. When the
    descent stops early the best iterate is returned with ``converged=False``,
    or :class:`NotConverged` is raised if ``strict``.
    """
    if method == "auto":
        method = "exact" if problem.p == 2.0 else "descent"
    if problem.size == 1:
        x = _normalise(np.ones(1), problem.mu.values(problem.M, problem.M), problem.p)
        return RayleighResult(problem.quotient(x), x, 0, 0.0, True, method, problem.M)
    if method == "exact":
        if problem.p != 2.0:
            raise DomainError("the exact eigen-solver needs p = 2")
        result = _exact_p2(problem)
    elif method == "descent":
        result = _descent(problem, x0, tol, max_iter)
    else:
        raise DomainError(f"unknown method {method!r}")
    if strict and not result.converged:
        raise NotConverged(f"{method} stopped with residual {result.residual:.3e}", result)
    return result


# ---------------------------------------------------------------- sampled profiles


@dataclass(frozen=True)
class PolyBump:
    """x^a (1-x)^b on [0, 1]."""

    a: float = 1.0
    b: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x ** self.a * (1.0 - x) ** self.b


@dataclass(frozen=True)
class PowerProfile:
    """x^((p-1-alpha)/p + eps) (1-x)^cutoff: the continuum extremal, made admissible."""

    alpha: float
    p: float
    eps: float
    cutoff: float = 2.0

    @property
    def exponent(self) -> float:
        return (self.p - 1.0 - self.alpha) / self.p + self.eps

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x ** self.exponent * (1.0 - x) ** self.cutoff


def sampled_test_quotient(phi, m: int, alpha: float, p) -> float:
    """Quotient of u_n = phi(n/m), n = 1..m-1, for the power weights."""
    p = as_p(p)
    if int(m) != m or m < 2:
        raise DomainError(f"m must be an integer >= 2, got {m!r}")
    m = int(m)
    u = phi(np.arange(1, m, dtype=float) / m)
    return rayleigh_quotient(u, Power(alpha - p), Power(alpha), p)
