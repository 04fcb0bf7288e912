"""Power-sum inequalities, the remainder series, stability margins and expansion fits.

Every check returns a signed margin whose sign is the claim being tested.
Sweeps are vectorised over n; the registry at the bottom maps suite names to
per-point functions so the command line can spread grid points over processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import DomainError, IllConditioned, NotFound
from .halfline_operator import hardy_weight
from .muckenhoupt import b_term
from .sharpness import continuum_constant
from .weights import U, Power, Table, TailModel, as_p, prefix_sums, suffix_sums


# ---------------------------------------------------------------- power sums


class PowerSum:
    """S_n = sum_{k<=n} k^(gamma-1) with a growing cache; S_0 = 0."""

    def __init__(self, gamma: float):
        self.gamma = float(gamma)
        self._S = np.zeros(1)

    def prefix(self, n: int) -> np.ndarray:
        """Array S_0..S_n."""
        if int(n) != n or n < 0:
            raise DomainError(f"power sums need n >= 0, got {n!r}")
        n = int(n)
        if self._S.size <= n:
            size = max(n, 2 * (self._S.size - 1), 16)
            lo, hi = prefix_sums(Power(self.gamma - 1.0), 1.0, size)
            self._S = np.concatenate(([0.0], 0.5 * (lo + hi)))
        return self._S[: n + 1]

    def __call__(self, n: int) -> float:
        return float(self.prefix(n)[-1])


def power_sum(gamma: float, n: int) -> float:
    """S_n by compensated summation."""
    if int(n) != n or n < 0:
        raise DomainError(f"power sums need n >= 0, got {n!r}")
    if n == 0:
        return 0.0
    return math.fsum(np.arange(1, int(n) + 1, dtype=float) ** (float(gamma) - 1.0))


_PARTS = ("i", "ii", "iii")


def _check_part(gamma, part):
    if part not in _PARTS:
        raise DomainError(f"unknown part {part!r}; expected one of {_PARTS}")
    if part == "i" and not 1.0 < gamma < 2.0:
        raise DomainError(f"part i needs 1 < gamma < 2, got {gamma}")
    if part == "ii" and not gamma > 0:
        raise DomainError(f"part ii needs gamma > 0, got {gamma}")


def prop41_margins(gamma: float, n_max: int, part: str, scaled: bool = False):
    """Margins at n = 2..n_max (index 0 is n = 2); ``scaled`` also returns the larger side."""
    gamma = float(gamma)
    _check_part(gamma, part)
    if n_max < 2:
        raise DomainError("the power-sum inequalities start at n = 2")
    S = PowerSum(gamma).prefix(n_max)
    n = np.arange(2, n_max + 1, dtype=float)
    Sn, Sm = S[2:], S[1:-1]
    if part == "i":
        big = 2.0 * n ** gamma / gamma
        m = big - (Sm + Sn)
    elif part == "ii":
        big = n ** (2 * gamma) / gamma ** 2
        m = big - Sm * Sn
    else:
        # S_n - e^(g/n) S_{n-1} = n^(g-1) - expm1(g/n) S_{n-1}
        big = Sn
        m = n ** (gamma - 1.0) - np.expm1(gamma / n) * Sm
    return (m, big) if scaled else m


def prop41_check(gamma: float, n: int, part: str) -> float:
    """RHS - LHS for parts i and ii, LHS - RHS for part iii."""
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    return float(prop41_margins(gamma, int(n), part)[-1])


# ---------------------------------------------------------------- corollary gap


def _theta(alpha, p):
    return (alpha - p + 1.0) / (2.0 * (p - 1.0))


def _check_supercritical(alpha, p):
    if not alpha > p - 1.0:
        raise DomainError(f"need alpha > p - 1, got alpha={alpha}, p={p}")


def _sinhc_minus_one(z):
    """sinh(z)/z - 1 without cancellation for small z."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 0.1
    out = np.empty_like(z)
    zs = z[small] ** 2
    term = np.ones_like(zs)
    acc = np.zeros_like(zs)
    for k in range(1, 9):
        term = term * zs / ((2 * k) * (2 * k + 1))
        acc += term
    out[small] = acc
    zb = z[~small]
    out[~small] = np.sinh(zb) / zb - 1.0
    return out


def remainder_h(alpha: float, p, n):
    """h(n) = sinh(z)/z with z = theta/n and theta = (alpha-p+1)/(2(p-1))."""
    p = as_p(p)
    _check_supercritical(alpha, p)
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1):
        raise DomainError("h is defined for n >= 1")
    out = 1.0 + _sinhc_minus_one(_theta(alpha, p) / n_arr)
    return float(out) if np.ndim(out) == 0 else out


def series_coefficients(alpha: float, p, K: int) -> np.ndarray:
    """c_0..c_{K-1} with c_k = theta^(2k)/(2k+1)!."""
    theta = _theta(alpha, as_p(p))
    return np.array([theta ** (2 * k) / math.factorial(2 * k + 1) for k in range(K)])


def remainder_h_series(alpha: float, p, n, K: int = 25):
    """Truncated series sum_{k<K} c_k n^(-2k)."""
    p = as_p(p)
    _check_supercritical(alpha, p)
    c = series_coefficients(alpha, p, K)
    x = np.asarray(n, dtype=float) ** -2.0
    out = np.zeros_like(x)
    for ck in c[::-1]:
        out = out * x + ck
    return float(out) if np.ndim(out) == 0 else out


def cor43_margins(alpha: float, p, n_max: int, K=1, scaled: bool = False):
    """LHS - RHS_K at n = 2..n_max; K = math.inf uses the closed form sinh(z)/z."""
    p = as_p(p)
    _check_supercritical(alpha, p)
    if not (K == math.inf or (int(K) == K and K >= 1)):
        raise DomainError(f"K must be a positive integer or inf, got {K!r}")
    e = 1.0 / (p - 1.0)
    S = PowerSum(alpha - p + 1.0).prefix(n_max)
    n = np.arange(2, n_max + 1, dtype=float)
    Sn, Sm = S[2:], S[1:-1]
    lhs = Sn ** -e * np.expm1(e * np.log1p(n ** (alpha - p) / Sm))
    rhs1 = (alpha - p + 1.0) ** (p * e) / ((p - 1.0) * n ** (alpha * e))
    factor = remainder_h(alpha, p, n) if K == math.inf else remainder_h_series(alpha, p, n, int(K))
    return (lhs - rhs1 * factor, lhs) if scaled else lhs - rhs1 * factor


def cor43_gap(alpha: float, p, n: int, K=1) -> float:
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    return float(cor43_margins(alpha, p, int(n), K)[-1])


def hermite_hadamard_margins(alpha: float, p, n_max: int, scaled: bool = False):
    """Direct route to the K = 1 bound: (intermediate bound) - RHS_1 at n = 2..n_max.

    For p <= 2 the intermediate bound is the Hermite-Hadamard estimate of
    S_{n-1}^(-e) - S_n^(-e); for p > 2 (where alpha < p+1 is required) it is the
    mean-value bound with the arithmetic mean of S_{n-1} and S_n.
    """
    p = as_p(p)
    _check_supercritical(alpha, p)
    if p > 2 and not alpha < p + 1.0:
        raise DomainError("for p > 2 the direct route needs alpha < p + 1")
    S = PowerSum(alpha - p + 1.0).prefix(n_max)
    n = np.arange(2, n_max + 1, dtype=float)
    Sn, Sm = S[2:], S[1:-1]
    e = 1.0 / (p - 1.0)
    diff = n ** (alpha - p) / (Sm * Sn)  # 1/S_{n-1} - 1/S_n
    r = (2.0 - p) * e
    if p > 2:
        bound = e * n ** (alpha - p) * (Sm * Sn) ** -e * (0.5 * (Sm + Sn)) ** r
    elif p >= 1.5:
        bound = 0.5 * e * diff * (Sm ** -r + Sn ** -r)
    else:
        bound = e * diff * (0.5 / Sm + 0.5 / Sn) ** r
    rhs1 = (alpha - p + 1.0) ** (p * e) / ((p - 1.0) * n ** (alpha * e))
    return (bound - rhs1, bound) if scaled else bound - rhs1


def midpoint_bound_margins(alpha: float, p, r_max: int, scaled: bool = False):
    """For alpha > p+1: margins of the midpoint estimates and of the B2 bound, r = 1..r_max.

    Returns, per r, the minimum of
    (r+1/2)^g/g - S_r, c (r+1/2)^(-g/(p-1)) - T_{r+1} and bound - B2(r),
    where g = alpha-p+1, c = (p-1)/g and bound = (p-1)^(p-1)/g^p.
    """
    p = as_p(p)
    if not alpha > p + 1.0:
        raise DomainError("the midpoint route needs alpha > p + 1")
    g = alpha - p + 1.0
    q = -1.0 / (p - 1.0)
    r = np.arange(1, r_max + 1, dtype=float)
    _, S_hi = prefix_sums(Power(alpha - p), 1.0, r_max)
    _, T_hi = suffix_sums(Power(alpha), q, 2, r_max + 1)
    s1 = (r + 0.5) ** g / g
    s2 = (p - 1.0) / g * (r + 0.5) ** (-g / (p - 1.0))
    bound = (p - 1.0) ** (p - 1.0) / g ** p
    rel = np.stack([(s1 - S_hi) / s1, (s2 - T_hi) / s2, (bound - S_hi * T_hi ** (p - 1.0)) / bound])
    k = np.argmin(rel, axis=0)
    scale = np.choose(k, [s1, s2, np.full_like(s1, bound)])
    m = np.take_along_axis(rel, k[None, :], 0)[0] * scale
    return (m, scale) if scaled else m


def remark46_b2_bound(alpha: float, p, r: int) -> tuple:
    """(B2 term enclosure at r, the closed-form bound (p-1)^(p-1)/(alpha-p+1)^p)."""
    p = as_p(p)
    g = alpha - p + 1.0
    return b_term(Power(alpha - p), Power(alpha), p, 2, r), (p - 1.0) ** (p - 1.0) / g ** p


# ---------------------------------------------------------------- two-variable function


_LEMMA_DPS = 64


def _lemma42_mp(x: float, gamma: float) -> float:
    with mpmath.workdps(_LEMMA_DPS):
        x, g = mpmath.mpf(x), mpmath.mpf(gamma)
        val = (1 + x) ** (g - 1) * (-mpmath.expm1(-g * x)) - mpmath.expm1(g * x / (1 + x))
        return float(val)


def lemma42_values(x, gamma):
    """Vectorised F(x, gamma); points whose float sign is uncertain are redone in mpmath.

    Returns (values, n_fallback).
    """
    x, gamma = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(gamma, dtype=float))
    if np.any((x < 0) | (x > 1)):
        raise DomainError("F is studied for 0 <= x <= 1")
    if np.any(gamma < 2):
        raise DomainError("F is studied for gamma >= 2")
    A = np.power(1.0 + x, gamma - 1.0) * -np.expm1(-gamma * x)
    B = np.expm1(gamma * x / (1.0 + x))
    F = A - B
    budget = 8 * U * (2.0 + gamma) * (np.abs(A) + np.abs(B))
    unsure = (np.abs(F) <= budget) & (x > 0)
    F = np.where(x == 0, 0.0, F)
    idx = np.flatnonzero(unsure)
    flat = F.reshape(-1)
    xf, gf = x.reshape(-1), gamma.reshape(-1)
    for i in idx:
        flat[i] = _lemma42_mp(xf[i], gf[i])
    return flat.reshape(F.shape), int(idx.size)


def lemma42_F(x: float, gamma: float) -> float:
    """F(x, g) = (1+x)^(g-1) (1 - e^(-g x)) - e^(g x/(1+x)) + 1."""
    vals, _ = lemma42_values(x, gamma)
    return float(vals)


# ---------------------------------------------------------------- remainder weights


def subcritical_weight(alpha: float, p, n):
    """w_alpha(n): the kinetic weight left over after the sharp Hardy term.

    alpha > p-1: n^a (1 - h(n)^(1-p)); 0 < alpha < p-1: n^a - nu(n) with
    nu(1) = (p-1-a)/(p-a), nu(n) = (n-1)^a; alpha = 0: the explicit residual.
    """
    p = as_p(p)
    alpha = float(alpha)
    if alpha < 0 or alpha == p - 1.0:
        raise DomainError(f"subcritical weights need alpha >= 0 and alpha != p-1, got {alpha}")
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1) or np.any(n_arr != np.floor(n_arr)):
        raise DomainError("n must be a positive integer")
    with np.errstate(divide="ignore"):
        out = _subcritical(alpha, p, n_arr)
    return float(out) if np.ndim(out) == 0 else out


def _subcritical(alpha, p, n_arr):
    if alpha > p - 1.0:
        s = _sinhc_minus_one(_theta(alpha, p) / n_arr)
        out = n_arr ** alpha * -np.expm1(-(p - 1.0) * np.log1p(s))
    elif alpha > 0:
        out = n_arr ** alpha * -np.expm1(alpha * np.log1p(-1.0 / n_arr))
        out = np.where(n_arr == 1, 1.0 - (p - 1.0 - alpha) / (p - alpha), out)
    else:
        b = (p - 1.0) / p
        a = -np.expm1(b * np.log1p(-1.0 / n_arr))
        c = np.expm1(b * np.log1p(1.0 / n_arr))
        out = a ** (p - 1.0) - c ** (p - 1.0) - b ** p / n_arr ** p
    return out


def _remainder_exponent(alpha, p):
    # w_alpha ~ c n^(alpha-2) above p-1 and ~ alpha n^(alpha-1) below
    return alpha - 2.0 if alpha > p - 1.0 else alpha - 1.0


@lru_cache(maxsize=64)
def _remainder_table(alpha: float, p: float, N: int):
    L = max(N + 1, 64)
    w = subcritical_weight(alpha, p, np.arange(1, L + 1))
    table = Table(tuple(w), TailModel.power_like(_remainder_exponent(alpha, p), L))
    hw = hardy_weight(table, p, N)
    return hw.values, hw.uncertainty


def remainder_weights(alpha: float, p, N: int) -> np.ndarray:
    """R_alpha(1..N): the optimal weight of the kinetic weight w_alpha (alpha = 0: explicit residual)."""
    p = as_p(p)
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if alpha == 0:
        return subcritical_weight(0.0, p, np.arange(1, int(N) + 1))
    if alpha < 0 or alpha == p - 1.0:
        raise DomainError(f"remainder weights need alpha >= 0 and alpha != p-1, got {alpha}")
    return _remainder_table(float(alpha), p, int(N))[0].copy()


def remainder_weight(alpha: float, p, n: int) -> float:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return float(remainder_weights(alpha, p, int(n))[-1])


# ---------------------------------------------------------------- stability


@dataclass(frozen=True)
class StabilityReport:
    energy: float
    remainder_norm_p: float
    margin: float
    d: float
    psi_of_d: float


def stability_margins(U, alpha: float, p):
    """Rowwise (energy, remainder term) for a batch of vectors u_1..u_K."""
    p = as_p(p)
    if alpha < 0 or alpha == p - 1.0:
        raise DomainError(f"stability needs alpha >= 0 and alpha != p-1, got {alpha}")
    U = np.atleast_2d(np.asarray(U, dtype=float))
    K = U.shape[1]
    n = np.arange(1, K + 2, dtype=float)
    padded = np.pad(U, ((0, 0), (1, 1)))
    absu = np.abs(U) ** p
    kinetic = (np.abs(np.diff(padded, axis=1)) ** p * n ** alpha).sum(axis=1)
    energy = kinetic - continuum_constant(alpha, p) * (absu * n[:K] ** (alpha - p)).sum(axis=1)
    remainder = (absu * remainder_weights(alpha, p, K)).sum(axis=1)
    return energy, remainder


def stability_margin(u, alpha: float, p) -> StabilityReport:
    u = np.asarray(u, dtype=float).ravel()
    if u.size == 0 or not np.all(np.isfinite(u)):
        raise DomainError("u must be a non-empty finite vector")
    energy, rem = stability_margins(u[None, :], alpha, p)
    energy, rem = float(energy[0]), float(rem[0])
    d = rem ** (1.0 / as_p(p))
    return StabilityReport(energy, rem, energy - rem, d, d ** as_p(p))


# ---------------------------------------------------------------- expansion fits


@dataclass(frozen=True)
class FitResult:
    powers: tuple
    coefficients: tuple
    residual: float
    condition: float
    nuisance: tuple = field(default=(), repr=False)

    def coefficient(self, k: int) -> float:
        return self.coefficients[self.powers.index(k)]


def default_grid() -> np.ndarray:
    return 2.0 ** np.arange(6, 15)


def asymptotic_fit(values, n, powers, extra: int = 3, max_condition: float = 1e12) -> FitResult:
    """Least squares of values ~ sum_k c_k n^(-k) over ``powers``.

    ``extra`` further consecutive orders are fitted as nuisance terms so that the
    truncation error does not leak into the reported coefficients, in the spirit
    of Richardson extrapolation. Columns are scaled by the smallest n.
    """
    values = np.asarray(values, dtype=float)
    n = np.asarray(n, dtype=float)
    powers = tuple(int(k) for k in powers)
    if not powers or len(set(powers)) != len(powers):
        raise DomainError("powers must be distinct integers")
    if values.shape != n.shape or n.ndim != 1:
        raise DomainError("values and n must be 1-d arrays of equal length")
    orders = sorted(powers) + [max(powers) + j for j in range(1, extra + 1)]
    if n.size < len(powers) + 2 or n.size < len(orders):
        raise DomainError(f"need at least {max(len(powers) + 2, len(orders))} grid points, got {n.size}")
    kmin = min(orders)
    n0 = n.min()
    x = n0 / n
    y = values * n ** kmin
    A = np.column_stack([x ** (k - kmin) for k in orders])
    colnorm = np.linalg.norm(A, axis=0)
    As = A / colnorm
    cond = float(np.linalg.cond(As))
    if not cond <= max_condition:
        raise IllConditioned(f"design matrix condition {cond:.3g} exceeds {max_condition:.0e}")
    sol, *_ = np.linalg.lstsq(As, y, rcond=None)
    sol = sol / colnorm
    coef = [sol[i] * n0 ** (k - kmin) for i, k in enumerate(orders)]
    resid = y - A @ sol
    scale = max(float(np.max(np.abs(y))), np.finfo(float).tiny)
    by_order = dict(zip(orders, coef))
    return FitResult(
        powers=powers,
        coefficients=tuple(float(by_order[k]) for k in powers),
        residual=float(np.sqrt(np.mean(resid ** 2)) / scale),
        condition=cond,
        nuisance=tuple(float(c) for c in coef[len(powers):]),
    )


def normalised_weight(alpha: float, p, grid=None):
    """(n, w_nu(n)/n^alpha) for nu = Power(alpha) on the geometric grid."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    idx = grid.astype(int)
    hw = hardy_weight(Power(alpha), p, int(idx.max()))
    return grid, hw.values[idx - 1] / grid ** alpha


def expansion_fit(alpha: float, p, powers=(2, 3), extra: int = 3) -> FitResult:
    n, v = normalised_weight(alpha, p)
    return asymptotic_fit(v, n, powers, extra=extra)


def expected_coefficients(alpha: float) -> dict:
    """Orders 2 and 3 of w_nu(n)/n^alpha at p = 2."""
    return {2: (alpha - 1.0) ** 2 / 4.0, 3: (alpha - 1.0) ** 2 * (alpha - 2.0) / 8.0}


@dataclass(frozen=True)
class GapWitness:
    alpha: float
    n_alpha: int
    checked_to: int
    min_relative_deficit: float
    persists_to: int


def discrete_vs_continuous_gap(alpha: float, p=2, n_scan: int = 10_000) -> GapWitness:
    """Smallest n with w_nu(m) < A_cont m^(alpha-2) for every m in [n, 10n]."""
    p = as_p(p)
    if p != 2.0:
        raise DomainError("the witness search is implemented for p = 2")
    if alpha != int(alpha) or alpha >= 0:
        raise DomainError(f"alpha must be a negative integer, got {alpha!r}")
    top = 10 * int(n_scan)
    hw = hardy_weight(Power(float(alpha)), p, top)
    n = np.arange(1, top + 1, dtype=float)
    cont = continuum_constant(alpha, p) * n ** (alpha - p)
    deficit = cont - hw.values
    good = deficit > hw.uncertainty + 4 * U * cont
    # next_bad[i]: first index >= i where the strict deficit fails
    idx = np.where(good, top, np.arange(top))
    next_bad = np.minimum.accumulate(idx[::-1])[::-1]
    for i in range(int(n_scan)):
        m = i + 1
        if good[i] and next_bad[i] >= 10 * m:
            rel = deficit[i:10 * m] / cont[i:10 * m]
            return GapWitness(float(alpha), m, 10 * m, float(rel.min()), int(next_bad[i]))
    raise NotFound(f"no persistent deficit found for n <= {n_scan}")


# ---------------------------------------------------------------- suite registry


@dataclass(frozen=True)
class PointResult:
    key: tuple
    min_margin: float
    location: dict
    extra: dict = field(default_factory=dict)


def _grid(lo, hi, step, include_lo=True):
    k = np.arange(0, int(round((hi - lo) / step)) + 1)
    g = np.round(lo + k * step, 12)
    return [float(v) for v in g if (include_lo or v > lo)]


PROP41_GRIDS = {
    "i": lambda: [g for g in _grid(1.0, 2.0, 0.05) if 1.0 < g < 2.0],
    "ii": lambda: _grid(0.0, 10.0, 0.1, include_lo=False),
    "iii": lambda: _grid(-5.0, 50.0, 0.25),
}
COR43_GRID = ((3.0, 2.0), (2.5, 1.5), (5.0, 3.0), (10.0, 2.0))
HH_GRID = tuple((a, p) for p in (1.25, 1.5, 1.75, 2.0) for a in (p - 0.5, p, p + 1.5, 5.0)) + (
    (2.0, 2.5), (3.0, 2.5), (2.5, 3.0), (3.5, 3.0))
MIDPOINT_GRID = ((4.0, 2.0), (6.0, 2.0), (5.0, 3.0), (3.0, 1.5))
STABILITY_GRID = ((0.0, 2.0), (3.0, 2.0), (0.5, 2.0), (4.0, 3.0))


def _summary(key, location, m, scale, offset, index_name, extra=None):
    """Minimum absolute margin with its index, plus the minimum margin relative to ``scale``."""
    i = int(np.argmin(m))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(scale > 0, m / scale, m)
    j = int(np.argmin(rel))
    loc = dict(location, **{index_name: i + offset})
    info = {"min_relative_margin": float(rel[j]), "relative_at": j + offset}
    info.update(extra or {})
    return PointResult(key, float(m[i]), loc, info)


def prop41_point(part, gamma, nmax):
    m, big = prop41_margins(gamma, nmax, part, scaled=True)
    return _summary(("prop41", part, gamma), {"part": part, "gamma": gamma}, m, big, 2, "n")


def _lemma42_scale(x, gamma):
    return np.power(1.0 + x, gamma - 1.0) * -np.expm1(-gamma * x)


def lemma42_point(gamma, nmax):
    x = 1.0 / np.arange(1, nmax + 1, dtype=float)
    F, fb = lemma42_values(x, gamma)
    return _summary(("lemma42", gamma), {"gamma": gamma}, F, _lemma42_scale(x, gamma), 1, "n", {"mp_fallbacks": fb})


def lemma42_dense_point(points):
    x = np.linspace(0.0, 1.0, points)
    F, fb = lemma42_values(x, 2.0)
    i = int(np.argmin(F))
    rel = F[1:] / _lemma42_scale(x[1:], 2.0)
    j = int(np.argmin(rel)) + 1
    return PointResult(("lemma42-dense", 2.0), float(F[i]), {"gamma": 2.0, "x": float(x[i])},
                       {"min_relative_margin": float(rel[j - 1]), "relative_at": float(x[j]),
                        "mp_fallbacks": fb, "points": int(points), "F(1/2,2)": lemma42_F(0.5, 2.0)})


def cor43_point(alpha, p, K, nmax):
    m, lhs = cor43_margins(alpha, p, nmax, K, scaled=True)
    Kk = "inf" if K == math.inf else int(K)
    return _summary(("cor43", alpha, p, str(Kk)), {"alpha": alpha, "p": p, "K": Kk}, m, lhs, 2, "n")


def hh_point(alpha, p, nmax):
    m, b = hermite_hadamard_margins(alpha, p, nmax, scaled=True)
    return _summary(("hermite-hadamard", alpha, p), {"route": "hermite-hadamard", "alpha": alpha, "p": p}, m, b, 2, "n")


def midpoint_point(alpha, p, rmax):
    m, sc = midpoint_bound_margins(alpha, p, rmax, scaled=True)
    return _summary(("midpoint", alpha, p), {"route": "midpoint", "alpha": alpha, "p": p}, m, sc, 1, "r")


def random_vectors(rng: np.random.Generator, count: int, max_support: int = 40) -> np.ndarray:
    """Rows u_1..u_K with a uniform random support length and standard normal entries."""
    U = np.zeros((count, max_support))
    lengths = rng.integers(1, max_support + 1, size=count)
    vals = rng.standard_normal((count, max_support))
    mask = np.arange(max_support)[None, :] < lengths[:, None]
    U[mask] = vals[mask]
    return U


def extremal_vectors(alpha: float, p: float, count: int, max_support: int = 40) -> np.ndarray:
    """Truncated power profiles n^((p-1-alpha)/p) (1 - n/(K+1)) for K spread over [2, max_support]."""
    g = (p - 1.0 - alpha) / p
    n = np.arange(1, max_support + 1, dtype=float)
    Ks = np.linspace(2, max_support, count).astype(int)
    U = np.zeros((count, max_support))
    for row, K in enumerate(Ks):
        U[row, :K] = n[:K] ** g * (1.0 - n[:K] / (K + 1.0))
    return U


def stability_point(alpha, p, samples, seed):
    rng = np.random.default_rng(seed)
    k = max(samples // 4, 1) if samples >= 4 else 0
    U_ = np.vstack([random_vectors(rng, samples - k), extremal_vectors(alpha, p, k)]) if k else random_vectors(rng, samples)
    energy, rem = stability_margins(U_, alpha, p)
    margins = energy - rem
    rel = margins / np.maximum(np.abs(energy) + rem, np.finfo(float).tiny)
    i = int(np.argmin(rel))
    n_rand = samples - k
    rand_min = float(np.min(rel[:n_rand])) if n_rand else math.nan
    return PointResult(("stability", alpha, p), float(margins[i]), {"alpha": alpha, "p": p, "sample": i},
                       {"min_relative_margin": float(rel[i]), "random_min_relative_margin": rand_min,
                        "samples": int(U_.shape[0])})


def expansion_point(alpha):
    fit = expansion_fit(alpha, 2.0)
    exp = expected_coefficients(alpha)
    errs = {k: abs(fit.coefficient(k) - exp[k]) for k in (2, 3)}
    worst = max(errs, key=errs.get)
    wit = discrete_vs_continuous_gap(alpha)
    return PointResult(("expansion", alpha), 1e-3 - errs[worst], {"alpha": alpha, "order": worst},
                       {"coefficients": list(fit.coefficients), "expected": [exp[2], exp[3]],
                        "witness": wit.n_alpha, "checked_to": wit.checked_to})


def suite_tasks(name: str, **opts) -> list:
    """(function, args) pairs for a suite; each is pure and picklable."""
    nmax = int(opts.get("nmax") or 10_000)
    if name == "prop41":
        parts = [opts["part"]] if opts.get("part") else list(_PARTS)
        tasks = []
        for part in parts:
            gammas = [float(opts["gamma"])] if opts.get("gamma") is not None else PROP41_GRIDS[part]()
            tasks += [(prop41_point, (part, g, nmax)) for g in gammas]
        return tasks
    if name == "lemma42":
        gammas = [float(opts["gamma"])] if opts.get("gamma") is not None else _grid(2.0, 50.0, 0.5)
        tasks = [(lemma42_point, (g, nmax)) for g in gammas]
        if opts.get("gamma") is None:
            tasks.append((lemma42_dense_point, (int(opts.get("dense") or 100_001),)))
        return tasks
    if name == "cor43":
        grid = [(float(opts["alpha"]), float(opts["p"]))] if opts.get("alpha") is not None else COR43_GRID
        return [(cor43_point, (a, p, K, nmax)) for a, p in grid for K in (1, math.inf)]
    if name == "alternate":
        if opts.get("alpha") is not None:
            a, p = float(opts["alpha"]), float(opts["p"])
            return [(midpoint_point, (a, p, nmax))] if a > p + 1 else [(hh_point, (a, p, nmax))]
        return [(hh_point, (a, p, nmax)) for a, p in HH_GRID] + [(midpoint_point, (a, p, nmax)) for a, p in MIDPOINT_GRID]
    if name == "stability":
        grid = [(float(opts["alpha"]), float(opts["p"]))] if opts.get("alpha") is not None else STABILITY_GRID
        samples = int(opts.get("samples") or 1000)
        seed = int(opts.get("seed") or 0)
        return [(stability_point, (a, p, samples, seed)) for a, p in grid]
    if name == "expansion":
        alphas = [float(opts["alpha"])] if opts.get("alpha") is not None else [-1.0, -2.0, -3.0]
        return [(expansion_point, (a,)) for a in alphas]
    raise DomainError(f"unknown suite {name!r}; expected one of {SUITES}")


SUITES = ("prop41", "lemma42", "cor43", "alternate", "stability", "expansion")


@dataclass(frozen=True)
class SuiteResult:
    name: str
    min_margin: float
    location: dict
    points: tuple
    passed: bool


def aggregate(name: str, points, tolerance: float = 0.0) -> SuiteResult:
    pts = tuple(sorted(points, key=lambda r: tuple(str(k) for k in r.key)))
    worst = min(pts, key=lambda r: r.min_margin)
    return SuiteResult(name, worst.min_margin, worst.location, pts, worst.min_margin >= -tolerance)


def run_suite(name: str, executor=None, **opts) -> SuiteResult:
    tasks = suite_tasks(name, **opts)
    if executor is None:
        results = [f(*a) for f, a in tasks]
    else:
        futures = [executor.submit(f, *a) for f, a in tasks]
        results = [fu.result() for fu in futures]
    return aggregate(name, results)
