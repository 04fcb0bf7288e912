"""The p-Laplacian of the weighted path graph on {0, 1, 2, ...} and its optimal Hardy weight.

Edges join k and k+1 with weight nu(k+1). Writing d_k = nu(k)**(-1/(p-1)), the
ground state is the prefix sum of d (when sum d_k diverges) or its tail
sum_{k>n} d_k (when it converges), with G(0) = 0 in both cases.

The optimal weight divides H[G^b] by G^(b(p-1)) with b = (p-1)/p. Both
neighbour differences are rewritten relative to G(n) so that nothing cancels
catastrophically:

    divergent:  w = (A/d_n)^(p-1) - (B/d_{n+1})^(p-1),
                A = -expm1(b log1p(-d_n/G)),  B = expm1(b log1p(d_{n+1}/G))
    convergent: w = -(A/d_n)^(p-1) + (B/d_{n+1})^(p-1),
                A = expm1(b log1p(d_n/G)),    B = -expm1(b log1p(-d_{n+1}/G))

At n = 1 in the convergent branch the first term is nu(1), because G(0) = 0.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, OutOfTable
from .weights import U, WeightFamily, as_p, prefix_sums, suffix_sums, tail_converges

DIVERGENT = "divergent"
CONVERGENT = "convergent"


def signed_power(z, e: float):
    """|z|**e * sign(z), elementwise for arrays."""
    if e <= 0:
        raise DomainError(f"signed_power needs e > 0, got {e!r}")
    out = np.sign(z) * np.power(np.abs(z), e)
    return float(out) if np.ndim(out) == 0 else out


def burn_in(N: int) -> int:
    """Length of the prefix ignored by trend heuristics: 10% of the window, at least 16."""
    return max(16, N // 10)


# ---------------------------------------------------------------- ground state


@dataclass(eq=False)
class GroundState:
    """Lazily evaluated ground state with a lock-guarded memo of enclosures."""

    nu: WeightFamily
    p: float
    branch: str
    _lo: np.ndarray = field(default=None, repr=False)
    _hi: np.ndarray = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def enclosure(self, n_max: int):
        """Arrays (lo, hi) enclosing G(0..n_max)."""
        with self._lock:
            if self._lo is None or self._lo.size <= n_max:
                size = max(int(n_max), 64, 0 if self._lo is None else 2 * (self._lo.size - 1))
                try:
                    self._lo, self._hi = self._compute(size)
                except OutOfTable:
                    # short tables without tail model: fetch exactly what was asked
                    self._lo, self._hi = self._compute(int(n_max))
            return self._lo[: n_max + 1], self._hi[: n_max + 1]

    def _compute(self, n_max):
        q = -1.0 / (self.p - 1.0)
        if self.branch == DIVERGENT:
            lo, hi = prefix_sums(self.nu, q, n_max)
        else:
            lo, hi = suffix_sums(self.nu, q, 2, n_max + 1)
        return np.concatenate(([0.0], lo)), np.concatenate(([0.0], hi))

    def values(self, n_max: int) -> np.ndarray:
        lo, hi = self.enclosure(n_max)
        return 0.5 * (lo + hi)

    def __call__(self, n: int) -> float:
        if int(n) != n or n < 0:
            raise DomainError(f"ground state is defined on n >= 0, got {n!r}")
        return float(self.values(int(n))[int(n)])

    def __getitem__(self, n):
        return self(n)

    def increments(self, n_max: int) -> np.ndarray:
        """d_1..d_{n_max} with d_k = nu(k)**(-1/(p-1))."""
        return self.nu.powers(-1.0 / (self.p - 1.0), 1, n_max)[0]


def ground_state(nu: WeightFamily, p, branch: str | None = None) -> GroundState:
    """Ground state of the path-graph p-Laplacian; the branch follows the dual sum.

    ``branch`` may be forced for table weights whose tail is not modelled.
    """
    p = as_p(p)
    if branch is None:
        branch = CONVERGENT if tail_converges(nu, -1.0 / (p - 1.0)) else DIVERGENT
    elif branch not in (DIVERGENT, CONVERGENT):
        raise DomainError(f"unknown branch {branch!r}")
    return GroundState(nu, p, branch)


# ---------------------------------------------------------------- operator


def _lookup(f, n):
    try:
        return float(f(n)) if callable(f) else float(f[n])
    except (IndexError, KeyError) as exc:
        raise DomainError(f"sequence has no value at n = {n}") from exc


def p_laplacian_apply(nu: WeightFamily, p, f, n: int) -> float:
    """L f(n) = nu(n) (f(n)-f(n-1))^(p-1) + nu(n+1) (f(n)-f(n+1))^(p-1), signed powers.

    ``f`` is a callable or an indexable sequence with f[0] = f(0).
    """
    p = as_p(p)
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    fn = _lookup(f, n)
    right = nu(n + 1) * signed_power(fn - _lookup(f, n + 1), p - 1.0)
    if n == 0:
        return right
    return nu(n) * signed_power(fn - _lookup(f, n - 1), p - 1.0) + right


def p_laplacian(nu: WeightFamily, p, f: np.ndarray) -> np.ndarray:
    """L f on vertices 1..len(f)-2 for an array f indexed from 0."""
    p = as_p(p)
    f = np.asarray(f, dtype=float)
    n = f.size - 2
    v = nu.values(1, n + 1)
    diff = f[1:] - f[:-1]  # edge k joins k-1 and k
    flux = v * signed_power(diff, p - 1.0)
    return flux[:-1] - flux[1:]


# ---------------------------------------------------------------- optimal weight


@dataclass(frozen=True)
class HardyWeight:
    nu: WeightFamily
    p: float
    values: np.ndarray
    uncertainty: np.ndarray
    branch: str

    def __call__(self, n: int) -> float:
        return float(self.values[n - 1])


def _weight_formula(G, d, d1, p, branch):
    b = (p - 1.0) / p
    e = p - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        if branch == DIVERGENT:
            A = -np.expm1(b * np.log1p(-d / G))
            B = np.expm1(b * np.log1p(d1 / G))
            t1, t2 = np.power(A / d, e), -np.power(B / d1, e)
        else:
            A = np.expm1(b * np.log1p(d / G))
            B = -np.expm1(b * np.log1p(-d1 / G))
            t1, t2 = -np.power(A / d, e), np.power(B / d1, e)
            t1[0] = np.power(1.0 / d[0], e)
    return t1 + t2, np.abs(t1) + np.abs(t2)


def hardy_weight(nu: WeightFamily, p, N: int, gs: GroundState | None = None) -> HardyWeight:
    """Optimal p-Hardy weight w(1..N) with a pointwise uncertainty estimate."""
    p = as_p(p)
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    gs = gs or ground_state(nu, p)
    lo, hi = gs.enclosure(N)
    dd = gs.increments(N + 1)
    d, d1 = dd[:-1], dd[1:]
    # G(n) >= d_n (divergent) and G(n) >= d_{n+1} (convergent) hold exactly
    floor = d if gs.branch == DIVERGENT else d1
    mid = np.maximum(0.5 * (lo[1:] + hi[1:]), floor)
    w, scale = _weight_formula(mid, d, d1, p, gs.branch)
    if np.array_equal(lo, hi):
        spread = 0.0
    else:
        w_lo, _ = _weight_formula(np.maximum(lo[1:], floor), d, d1, p, gs.branch)
        w_hi, _ = _weight_formula(hi[1:], d, d1, p, gs.branch)
        spread = np.abs(w_hi - w_lo)
    unc = spread + 32 * U * (1.0 + p) * scale
    return HardyWeight(nu, p, w, unc, gs.branch)


def optimal_hardy_weight(nu: WeightFamily, p, n: int) -> float:
    """w_nu(n) from the ground-state transform."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return hardy_weight(nu, p, int(n)).values[-1].item()


# ---------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class OscillationStats:
    sup_ratio: float
    m1_ratios: tuple
    heuristic: bool = True


def oscillation_stats(nu: WeightFamily, p, N: int, gs: GroundState | None = None) -> OscillationStats:
    """Neighbour ratios of G over [1, N] and window extremes of nu(n+1)/nu(n)."""
    p = as_p(p)
    if N < 2:
        raise DomainError("oscillation window needs N >= 2")
    gs = gs or ground_state(nu, p)
    G = gs.values(N + 1)[1:]
    r = G[1:] / G[:-1]
    sup_ratio = float(np.max(np.maximum(r, 1.0 / r)))
    v = nu.values(1, N + 1)
    m1 = (v[1:] / v[:-1])[burn_in(N):]
    if m1.size == 0:
        m1 = v[1:] / v[:-1]
    return OscillationStats(sup_ratio, (float(m1.min()), float(m1.max())))


@dataclass(frozen=True)
class ComparisonVerdict:
    verdict: str
    witness: int | None
    ratio_stats: tuple
    heuristic: bool
    slope: float


HOLDS = "Holds"
FAILS = "FailsAtConstantOne"
INCONCLUSIVE = "Inconclusive"


def weight_comparison(nu: WeightFamily, p, mu: WeightFamily, N: int, scale: float = 1.0) -> ComparisonVerdict:
    """Compare w_nu with scale*mu on [1, N].

    Inconclusive when w/mu decays like a power (log-log slope below -0.1 after
    burn-in); FailsAtConstantOne when mu > w + uncertainty on a terminal segment
    at least burn-in long; Holds otherwise, as a window heuristic.
    """
    p = as_p(p)
    if int(N) != N or N < 1:
        raise DomainError("comparison window must be non-empty")
    N = int(N)
    hw = hardy_weight(nu, p, N)
    m = scale * mu.values(1, N)
    ratio = hw.values / m
    stats = (float(ratio.min()), float(ratio.max()))
    burn = min(burn_in(N), max(N - 2, 0))
    n = np.arange(1, N + 1, dtype=float)
    post = slice(burn, N)
    slope = 0.0
    if N - burn >= 2 and np.all(ratio[post] > 0):
        slope = float(np.polyfit(np.log(n[post]), np.log(ratio[post]), 1)[0])
    if slope < -0.1:
        return ComparisonVerdict(INCONCLUSIVE, None, stats, True, slope)
    below = m > hw.values + hw.uncertainty
    if below[-1]:
        bad = np.flatnonzero(~below)
        start = int(bad[-1]) + 2 if bad.size else 1
        if N - start + 1 >= burn:
            return ComparisonVerdict(FAILS, start, stats, False, slope)
    if stats[0] > 0 and math.isfinite(stats[0]):
        return ComparisonVerdict(HOLDS, None, stats, True, slope)
    return ComparisonVerdict(INCONCLUSIVE, None, stats, True, slope)
