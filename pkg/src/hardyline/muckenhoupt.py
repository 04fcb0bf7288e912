"""Muckenhoupt constants B1, B2 and the two-sided bounds they give on Hardy constants.

With dual terms d_k = nu(k)**(-1/(p-1)):

    B1 = sup_r  (sum_{x>=r} mu(x)) * (sum_{x<=r} d_x)**(p-1)
    B2 = sup_r  (sum_{x<=r} mu(x)) * (sum_{x>r}  d_x)**(p-1)

The supremum is split into an enclosed scan over r <= r_max and an upper
envelope for r > r_max built from the tail laws of the two weights. Each factor
is bounded on [R, inf) by ``coef * (r + delta)**e * log(r + lam)**m``; the two
bounds are multiplied, their offsets aligned with monotone ratio factors, and the
sign of the combined exponent decides where the envelope peaks. When no envelope
can be built the analytic limit and the trend of the scan are used instead and
the result is flagged as uncertified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, Inconclusive
from .weights import (
    CriticalLog,
    Enclosure,
    LogLaw,
    PowerLaw,
    WeightFamily,
    ZeroLaw,
    as_p,
    down,
    powered_tail_sum,
    prefix_sums,
    suffix_sums,
    up,
)

DEFAULT_RMAX = 100_000
_SLACK = 1e-12  # relative padding on envelope constants
_FLAT = 1e-12  # exponent sums below this are treated as exactly zero


@dataclass(frozen=True)
class BResult:
    enclosure: Enclosure
    argmax: int | None
    scanned_to: int
    limit: float | None
    certified: bool


@dataclass(frozen=True)
class MuckenhouptReport:
    b1: Enclosure
    b2: Enclosure
    argmax_r1: int | None
    argmax_r2: int | None
    scanned_to: int
    limit_estimate: float | None
    c_lower: float
    c_upper: float
    c0_upper: float
    certified: bool = True


def hardy_factor(p: float) -> float:
    """K_p = p^p/(p-1)^(p-1), rounded upwards by a few ulps."""
    p = as_p(p)
    return float(up(up(p ** p / (p - 1.0) ** (p - 1.0))))


# ---------------------------------------------------------------- envelopes


@dataclass(frozen=True)
class _Factor:
    """Upper bound coef * (r + delta)**e * log(r + lam)**m for r >= R."""

    coef: float
    delta: float = 0.0
    e: float = 0.0
    lam: float = 0.0
    m: float = 0.0

    def at(self, r: float) -> float:
        if self.coef == 0.0:
            return 0.0
        v = self.coef * (r + self.delta) ** self.e
        if self.m:
            v *= math.log(r + self.lam) ** self.m
        return v


def _tail_factor(law, off: int, R: int):
    """Bound on T(r + off) = sum_{k >= r+off} t_k, decreasing in r."""
    if isinstance(law, ZeroLaw):
        if law.divergent:
            return None
        return _Factor(0.0) if law.k0 <= R + off else None
    if law is None or law.k0 > R + off:
        return None
    if isinstance(law, PowerLaw):
        if law.s >= -1.0:
            return None
        c = law.coef * (1.0 + law.coef_rel + _SLACK) / (-law.s - 1.0)
        return _Factor(c, off + law.shift - 0.5, law.s + 1.0)
    if isinstance(law, LogLaw):
        d = off + law.shift - 0.5
        if law.q == 1.0 and law.p > 1.0:
            return _Factor((1.0 + _SLACK) / (law.p - 1.0), 0.0, 0.0, d, 1.0 - law.p)
        if law.q > 1.0:
            return _Factor((1.0 + _SLACK) / (law.q - 1.0), d, 1.0 - law.q, d, -law.p * law.q)
    return None


def _partial_factor(w: WeightFamily, q: float, law, s_r0: float, r0: int):
    """Bound on S(r) = sum_{k <= r} t_k for r > r0, increasing in r."""
    R = r0 + 1
    if law is None or law.k0 > R:
        return None
    if isinstance(law, ZeroLaw):
        return None if law.divergent else _Factor(s_r0 * (1.0 + _SLACK))
    if isinstance(law, LogLaw):
        if law.q >= 1.0:
            total = s_r0 + powered_tail_sum(w, q, R).hi
            return _Factor(total * (1.0 + _SLACK)) if math.isfinite(total) else None
        return None
    c, j, s = law.coef * (1.0 + law.coef_rel + _SLACK), law.shift, law.s
    if s < -1.0:
        total = s_r0 + powered_tail_sum(w, q, R).hi
        return _Factor(total * (1.0 + _SLACK))
    if s == -1.0:
        K = s_r0 - c * math.log(r0 + j)
        lead = math.log(R + j)
        boost = 1.0 + max(K, 0.0) / (c * lead)
        return _Factor(c * boost * (1.0 + _SLACK), 0.0, 0.0, float(j), 1.0)
    delta = j + (1.0 if 0.0 < s < 1.0 else 0.5)
    base = r0 + j + (1.0 if 0.0 < s < 1.0 else 0.5)
    coef = c / (s + 1.0)
    K = s_r0 - coef * base ** (s + 1.0)
    boost = 1.0 + max(K, 0.0) / (coef * (R + delta) ** (s + 1.0))
    return _Factor(coef * boost * (1.0 + _SLACK), delta, s + 1.0)


def _sup_product(f1: _Factor, f2: _Factor, p: float, R: int):
    """Upper bound of f1(r) * f2(r)**(p-1) on [R, inf), or None if undecided."""
    if f1.coef == 0.0 or f2.coef == 0.0:
        return 0.0
    q = p - 1.0
    C = f1.coef * f2.coef ** q
    e1, e2 = f1.e, f2.e * q
    m1, m2 = f1.m, f2.m * q
    kappa = 1.0
    if e1 and e2 and f1.delta != f2.delta:
        rho = (R + f2.delta) / (R + f1.delta)
        kappa *= max(rho ** e2, 1.0)
    delta = f1.delta if e1 else f2.delta
    if m1 and m2 and f1.lam != f2.lam:
        if min(R + f1.lam, R + f2.lam) <= 1.0:
            return None
        ratio = math.log(R + f2.lam) / math.log(R + f1.lam)
        kappa *= max(ratio ** m2, 1.0)
    lam = f1.lam if m1 else f2.lam
    E, M = e1 + e2, m1 + m2
    if abs(E) < _FLAT:
        E = 0.0
    if abs(M) < _FLAT:
        M = 0.0
    if M and R + lam <= 1.0:
        return None

    def g(r):
        v = C * kappa * (r + delta) ** E
        return v * math.log(r + lam) ** M if M else v

    if E > 0.0 or (E == 0.0 and M > 0.0):
        return math.inf
    if E == 0.0:
        return g(R)
    if M <= 0.0:
        return g(R)
    slope = M * max(1.0, (R + delta) / (R + lam)) / math.log(R + lam)
    return g(R) if slope <= -E else None


def _analytic_limit(law_mu, law_dual, p: float, kind: int):
    """Limit of the B-term as r -> inf for power-law pairs, else None."""
    if not (isinstance(law_mu, PowerLaw) and isinstance(law_dual, PowerLaw)):
        return None
    q = p - 1.0
    a, d = law_mu.s, law_dual.s
    cm, cd = law_mu.coef, law_dual.coef
    if kind == 1:
        if a >= -1.0:
            return math.inf
        if d < -1.0:
            return 0.0  # the tail decays, the dual sum stays bounded
        if d == -1.0:
            return 0.0 if a < -1.0 else math.inf
        E = (a + 1.0) + q * (d + 1.0)
        lead = cm / (-a - 1.0) * (cd / (d + 1.0)) ** q
    else:
        if d >= -1.0:
            return math.inf
        if a < -1.0:
            return 0.0
        if a == -1.0:
            return 0.0
        E = (a + 1.0) + q * (d + 1.0)
        lead = cm / (a + 1.0) * (cd / (-d - 1.0)) ** q
    if abs(E) < _FLAT:
        return lead
    return 0.0 if E < 0 else math.inf


def _beyond(mu, nu, p, kind, r0, s_hi_r0):
    q = -1.0 / (p - 1.0)
    R = r0 + 1
    if kind == 1:
        f1 = _tail_factor(mu.law(1.0), 0, R)
        f2 = _partial_factor(nu, q, nu.law(q), s_hi_r0, r0)
    else:
        f1 = _partial_factor(mu, 1.0, mu.law(1.0), s_hi_r0, r0)
        f2 = _tail_factor(nu.law(q), 1, R)
    if f1 is None or f2 is None:
        return None
    return _sup_product(f1, f2, p, R)


# ---------------------------------------------------------------- B constants


def _scan(mu, nu, p, kind, r_max):
    q = -1.0 / (p - 1.0)
    if kind == 1:
        a_lo, a_hi = suffix_sums(mu, 1.0, 1, r_max)
        b_lo, b_hi = prefix_sums(nu, q, r_max)
    else:
        a_lo, a_hi = prefix_sums(mu, 1.0, r_max)
        b_lo, b_hi = suffix_sums(nu, q, 2, r_max + 1)
    e = p - 1.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        pw_rel = 8e-16 * (1.0 + e * np.abs(np.log(np.maximum(b_hi, 1e-300))))
        lo = a_lo * np.power(b_lo, e) * (1.0 - pw_rel)
        hi = a_hi * np.power(b_hi, e) * (1.0 + pw_rel)
    if e == 1.0:
        # integer data: the products are exact when they stay below 2**53
        prod = a_lo * b_lo
        exact = (a_lo == a_hi) & (b_lo == b_hi) & (prod == np.floor(prod)) & (prod < 2.0 ** 53)
        lo = np.where(exact, prod, lo)
        hi = np.where(exact, prod, hi)
    else:
        exact = np.zeros(lo.shape, dtype=bool)
    lo = np.where(np.isnan(lo), 0.0, np.where(exact, lo, down(lo)))
    hi = np.where(np.isnan(hi), np.inf, np.where(exact, hi, up(hi)))
    s_r0 = a_hi[-1] if kind == 2 else b_hi[-1]
    return lo, hi, s_r0


def _rising(lo: np.ndarray) -> bool:
    n = lo.size
    tail = lo[int(0.99 * n):]
    return bool(tail.size) and tail[-1] >= np.max(lo) * (1.0 - 1e-12)


def b_result(mu: WeightFamily, nu: WeightFamily, p, kind: int, r_max: int = DEFAULT_RMAX) -> BResult:
    p = as_p(p)
    if kind not in (1, 2):
        raise DomainError(f"kind must be 1 or 2, got {kind!r}")
    if int(r_max) != r_max or r_max < 1:
        raise DomainError(f"r_max must be a positive integer, got {r_max!r}")
    r_max = int(r_max)
    q = -1.0 / (p - 1.0)
    lo, hi, s_r0 = _scan(mu, nu, p, kind, r_max)
    limit = _analytic_limit(mu.law(1.0), nu.law(q), p, kind)
    k = int(np.argmax(lo))
    lo_max, hi_max = float(lo[k]), float(np.max(hi))
    if math.isinf(lo_max):
        return BResult(Enclosure.divergent(), k + 1, r_max, limit, True)
    beyond = _beyond(mu, nu, p, kind, r_max, float(s_r0)) if math.isfinite(s_r0) else None
    certified = beyond is not None
    if beyond is None:
        table = mu.is_table or nu.is_table
        if (table or limit is None) and _rising(lo):
            raise Inconclusive(
                f"B{kind} scan is still rising at r_max = {r_max} and no tail envelope is available"
            )
        beyond = hi_max if limit is None else max(limit, 0.0)
    top = max(hi_max, beyond)
    if math.isinf(beyond) and limit == math.inf:
        return BResult(Enclosure.divergent(), None, r_max, limit, certified)
    argmax = k + 1 if beyond <= hi_max else None
    return BResult(Enclosure(lo_max, top, lo_max == top), argmax, r_max, limit, certified)


def b_constant(mu: WeightFamily, nu: WeightFamily, p, kind: int, r_max: int = DEFAULT_RMAX):
    """Enclosure of B1 (kind=1) or B2 (kind=2) and the scanned maximiser (None if at infinity)."""
    res = b_result(mu, nu, p, kind, r_max)
    return res.enclosure, res.argmax


def b_term(mu: WeightFamily, nu: WeightFamily, p, kind: int, r: int) -> Enclosure:
    """Enclosure of the single B-term at index r."""
    from .weights import powered_partial_sum

    p = as_p(p)
    q = -1.0 / (p - 1.0)
    if kind == 1:
        a, b = powered_tail_sum(mu, 1.0, r), powered_partial_sum(nu, q, r)
    else:
        a, b = powered_partial_sum(mu, 1.0, r), powered_tail_sum(nu, q, r + 1)
    if math.isinf(a.lo) or math.isinf(b.lo):
        return Enclosure.divergent()
    rel = 8e-16 * (1.0 + (p - 1.0) * abs(math.log(max(b.hi, 1e-300))))
    lo = a.lo * b.lo ** (p - 1.0) * (1.0 - rel)
    hi = a.hi * b.hi ** (p - 1.0) * (1.0 + rel)
    return Enclosure(float(down(lo)), float(up(hi)))


def hardy_constant_bounds(mu: WeightFamily, nu: WeightFamily, p, r_max: int = DEFAULT_RMAX) -> MuckenhouptReport:
    """Two-sided bounds on the best constant C with sum mu|u|^p <= C sum nu|Du|^p."""
    p = as_p(p)
    r1 = b_result(mu, nu, p, 1, r_max)
    r2 = b_result(mu, nu, p, 2, r_max)
    K = hardy_factor(p)
    c_upper = float(up(K * r1.enclosure.hi)) if r1.enclosure.finite else math.inf
    m = min(r1.enclosure.hi, r2.enclosure.hi)
    c0 = float(up(K * m)) if math.isfinite(m) else math.inf
    if r1.limit is not None and math.isfinite(r1.limit):
        limit = r1.limit
    else:
        limit = r2.limit if r2.limit is not None and math.isfinite(r2.limit) else None
    return MuckenhouptReport(
        b1=r1.enclosure,
        b2=r2.enclosure,
        argmax_r1=r1.argmax,
        argmax_r2=r2.argmax,
        scanned_to=r1.scanned_to,
        limit_estimate=limit,
        c_lower=r1.enclosure.lo,
        c_upper=c_upper,
        c0_upper=c0,
        certified=r1.certified and r2.certified,
    )


def critical_weight(p) -> CriticalLog:
    """The log-corrected weight used at the critical exponent alpha = p - 1."""
    return CriticalLog(as_p(p))


def critical_counterexample_ratio(N: int, p) -> float:
    """Energy/mass ratio of the ramp 1 on [1,N], 2 - n/N on [N+1,2N].

    The energy counts the ramp's own slope, sum_{n=N+1}^{2N} N^-p n^(p-1); the
    mass is sum |u_n|^p / n.
    """
    p = as_p(p)
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    ramp = np.arange(N + 1, 2 * N + 1, dtype=np.float64)
    num = math.fsum(np.power(ramp, p - 1.0)) / float(N) ** p
    flat = math.fsum(1.0 / np.arange(1, N + 1, dtype=np.float64))
    den = flat + math.fsum(np.power(2.0 - ramp / N, p) / ramp)
    return num / den
