"""Positive weight sequences on the positive integers and enclosed sums of their powers.

A weight is evaluated at n >= 1. Sums of ``w(k)**q`` are returned as
:class:`Enclosure` objects whose endpoints carry an explicit rounding budget:

* each term ``t_k`` is charged a relative error ``rel_k`` (a few units of
  roundoff, scaled by ``|exponent * log|`` for powers);
* prefix arrays are accumulated in blocks of ``BLOCK`` terms with
  ``numpy.cumsum`` inside a block and correctly rounded block totals
  (``math.fsum``) as anchors, so the accumulation error of ``S_i`` is at most
  ``u * (BLOCK * inner_i + (b_i + 2) * anchor_i + |S_i|)`` with ``u = 2**-53``;
* tails beyond a cut index are bracketed by integrals. For a convex decreasing
  integrand ``f`` the trapezoid and midpoint rules give
  ``int_M^inf f + f(M)/2 <= sum_{k>=M} f(k) <= int_{M-1/2}^inf f``.

Every endpoint is finally nudged one ulp outwards.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, OutOfTable, SpecError, TailUnknown

U = 2.0 ** -53
BLOCK = 1024
TAIL_CUT = 10_000
_EXACT_LIMIT = 2.0 ** 53


# ---------------------------------------------------------------- exponent


@dataclass(frozen=True)
class Exponent:
    """The Lebesgue exponent p > 1."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise DomainError(f"exponent p must be a finite real > 1, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def dual(self) -> float:
        """Power -1/(p-1) applied to a weight inside the dual sum."""
        return -1.0 / (self.p - 1.0)

    @property
    def conjugate(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def hardy_factor(self) -> float:
        """K_p = p^p / (p-1)^(p-1)."""
        p = self.p
        return p ** p / (p - 1.0) ** (p - 1.0)


def as_p(p) -> float:
    """Validate ``p`` (float or :class:`Exponent`) and return it as a float."""
    if isinstance(p, Exponent):
        return p.p
    return Exponent(p).p


# ---------------------------------------------------------------- enclosure


def down(x):
    """One ulp towards -inf; infinities are kept."""
    return np.where(np.isinf(x), x, np.nextafter(x, -np.inf))[()]


def up(x):
    """One ulp towards +inf; infinities are kept."""
    return np.where(np.isinf(x), x, np.nextafter(x, np.inf))[()]


@dataclass(frozen=True)
class Enclosure:
    """A certified interval [lo, hi]; ``hi = inf`` marks divergence."""

    lo: float
    hi: float
    exact: bool = False

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid enclosure [{lo}, {hi}]")
        if self.exact and lo != hi:
            raise ValueError("an exact enclosure needs lo == hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Enclosure":
        return cls(x, x, True)

    @classmethod
    def divergent(cls) -> "Enclosure":
        return cls(math.inf, math.inf)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        if math.isinf(self.hi):
            return self.hi if math.isinf(self.lo) else math.inf
        return 0.5 * (self.lo + self.hi)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def to_list(self) -> list:
        return [self.lo, self.hi]

    def __add__(self, other: "Enclosure") -> "Enclosure":
        exact = self.exact and other.exact
        lo, hi = self.lo + other.lo, self.hi + other.hi
        if exact and lo - self.lo == other.lo and hi - self.hi == other.hi:
            return Enclosure(lo, hi, True)
        return Enclosure(float(down(lo)), float(up(hi)))


# ---------------------------------------------------------------- tail models


@dataclass(frozen=True)
class TailModel:
    """Behaviour of a table weight past its last entry.

    ``kind`` is ``"none"`` (unknown), ``"zero"`` (finitely supported) or
    ``"power"``: for n > L the weight continues as ``values[-1] * (n/L)**exponent``.
    ``valid_from`` records the index from which the data already follows the law.
    """

    kind: str = "none"
    exponent: float | None = None
    valid_from: int | None = None

    def __post_init__(self):
        if self.kind not in ("none", "zero", "power"):
            raise DomainError(f"unknown tail kind {self.kind!r}")
        if self.kind == "power":
            if self.exponent is None or not math.isfinite(self.exponent):
                raise DomainError("power tail needs a finite exponent")
            if self.valid_from is None or self.valid_from < 1:
                raise DomainError("power tail needs valid_from >= 1")

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def power_like(cls, exponent: float, valid_from: int):
        return cls("power", float(exponent), int(valid_from))


# Laws describing t_k = w(k)**q for every k >= k0.


@dataclass(frozen=True)
class PowerLaw:
    coef: float
    shift: int
    s: float
    k0: int
    coef_rel: float = 0.0


@dataclass(frozen=True)
class LogLaw:
    """t_k = f(k + shift) with f(t) = (t * log(t)**p)**(-q)."""

    p: float
    q: float
    shift: int
    k0: int


@dataclass(frozen=True)
class ZeroLaw:
    k0: int
    divergent: bool = False


# ---------------------------------------------------------------- families


def _index_range(a: int, b: int) -> np.ndarray:
    return np.arange(a, b + 1, dtype=np.float64)


class WeightFamily:
    """Base class of positive weights on n >= 1."""

    def __call__(self, n: int) -> float:
        return eval_weight(self, n)

    def values(self, a: int, b: int) -> np.ndarray:
        raise NotImplementedError

    def powers(self, q: float, a: int, b: int):
        """Terms ``w(k)**q`` for k = a..b and a per-term relative error bound."""
        raise NotImplementedError

    def law(self, q: float):
        raise NotImplementedError

    @property
    def is_table(self) -> bool:
        return False


@dataclass(frozen=True)
class Power(WeightFamily):
    """n -> n**alpha."""

    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise DomainError("power exponent must be finite")
        object.__setattr__(self, "alpha", float(self.alpha))

    def values(self, a, b):
        return np.power(_index_range(a, b), self.alpha)

    def powers(self, q, a, b):
        n = _index_range(a, b)
        s = self.alpha * q
        t = np.power(n, s)
        if s == 0.0:
            return t, np.zeros_like(t)
        if s == round(s) and s > 0 and float(b) ** s < _EXACT_LIMIT:
            return t, np.zeros_like(t)
        return t, 4 * U * (1.0 + abs(s) * np.log(n))

    def law(self, q):
        return PowerLaw(1.0, 0, self.alpha * q, 1)


@dataclass(frozen=True)
class CriticalLog(WeightFamily):
    """1 at n = 1 and 1/(n log(n)**p) for n >= 2."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", as_p(self.p))

    def values(self, a, b):
        n = _index_range(a, b)
        with np.errstate(divide="ignore"):
            out = 1.0 / (n * np.log(n) ** self.p)
        out[n == 1] = 1.0
        return out

    def powers(self, q, a, b):
        w = self.values(a, b)
        t = np.power(w, q)
        rel = 16 * U * (2.0 + abs(q) * (2.0 + self.p) + np.abs(q * np.log(w)))
        return t, rel

    def law(self, q):
        return LogLaw(self.p, q, 0, 2)


@dataclass(frozen=True)
class Shift(WeightFamily):
    """n -> base(n + k)."""

    k: int
    base: WeightFamily

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"shift must be a non-negative integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    def values(self, a, b):
        return self.base.values(a + self.k, b + self.k)

    def powers(self, q, a, b):
        return self.base.powers(q, a + self.k, b + self.k)

    def law(self, q):
        inner = self.base.law(q)
        k0 = lambda k: max(1, k - self.k)  # noqa: E731
        if isinstance(inner, PowerLaw):
            return PowerLaw(inner.coef, inner.shift + self.k, inner.s, k0(inner.k0), inner.coef_rel)
        if isinstance(inner, LogLaw):
            return LogLaw(inner.p, inner.q, inner.shift + self.k, k0(inner.k0))
        if isinstance(inner, ZeroLaw):
            return ZeroLaw(k0(inner.k0), inner.divergent)
        return None

    @property
    def is_table(self):
        return self.base.is_table


@dataclass(frozen=True)
class Table(WeightFamily):
    """Finite list of positive values w(1..L) plus a tail model."""

    data: tuple
    tail: TailModel = field(default_factory=TailModel.none)
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        data = tuple(float(v) for v in self.data)
        if not data:
            raise DomainError("a table weight needs at least one value")
        if not all(v > 0 and math.isfinite(v) for v in data):
            raise DomainError("table values must be finite and > 0")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "_arr", np.asarray(data))

    @property
    def is_table(self):
        return True

    def values(self, a, b):
        L = len(self.data)
        n = _index_range(a, b)
        out = np.empty_like(n)
        inside = n <= L
        out[inside] = self._arr[a - 1:min(b, L)]
        if not inside.all():
            kind = self.tail.kind
            if kind == "none":
                raise OutOfTable(f"table of length {L} queried at n = {b}")
            if kind == "zero":
                out[~inside] = 0.0
            else:
                out[~inside] = self.data[-1] * np.power(n[~inside] / L, self.tail.exponent)
        return out

    def powers(self, q, a, b):
        w = self.values(a, b)
        with np.errstate(divide="ignore"):
            t = np.power(w, q)
        if q == 1.0:
            rel = np.zeros_like(t)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                rel = 4 * U * (1.0 + np.abs(q * np.log(w)))
        L = len(self.data)
        if b > L and self.tail.kind == "power":
            n = _index_range(a, b)
            extra = 8 * U * (1.0 + abs(self.tail.exponent) * np.log(n)) * (1.0 + abs(q))
            rel = np.where(n > L, rel + extra, rel)
        return t, np.nan_to_num(rel, nan=0.0, posinf=0.0)

    def law(self, q):
        L = len(self.data)
        if self.tail.kind == "none":
            return None
        if self.tail.kind == "zero":
            return ZeroLaw(L + 1, divergent=q <= 0)
        s = self.tail.exponent
        vL = self.data[-1]
        coef = vL ** q * float(L) ** (-s * q)
        rel = 8 * U * (1.0 + abs(q * math.log(vL)) + abs(s * q * math.log(L)))
        return PowerLaw(coef, 0, s * q, L + 1, rel)


# ---------------------------------------------------------------- evaluation


def eval_weight(w: WeightFamily, n: int) -> float:
    """Value w(n) for n >= 1."""
    if int(n) != n or n < 1:
        raise DomainError(f"weights are indexed from 1, got n = {n!r}")
    n = int(n)
    return float(w.values(n, n)[0])


def _blocked_cumsum(t: np.ndarray, rel: np.ndarray):
    """Cumulative sums of non-negative terms with a rigorous error bound per entry."""
    n = t.size
    nb = -(-n // BLOCK)
    padded = np.zeros(nb * BLOCK)
    padded[:n] = t
    blocks = padded.reshape(nb, BLOCK)
    inner = np.cumsum(blocks, axis=1)
    totals = np.array([math.fsum(row) for row in blocks])
    anchors = np.concatenate(([0.0], np.cumsum(totals)[:-1]))
    s = (inner + anchors[:, None]).ravel()[:n]
    inner = inner.ravel()[:n]
    bidx = np.repeat(np.arange(nb, dtype=np.float64), BLOCK)[:n]
    anch = np.repeat(anchors, BLOCK)[:n]
    err = U * (BLOCK * inner + (bidx + 2.0) * anch + s)
    err += np.cumsum(t * rel) * (1.0 + 1e-6)
    exact = (
        not rel.any()
        and bool(np.all(t == np.floor(t)))
        and (s[-1] if n else 0.0) < _EXACT_LIMIT
    )
    if exact:
        return s, s.copy(), True
    return np.maximum(down(s - err), 0.0), up(s + err), False


def _fsum_enclosure(t: np.ndarray, rel: np.ndarray) -> Enclosure:
    if t.size == 0:
        return Enclosure.point(0.0)
    if np.isinf(t).any():
        return Enclosure.divergent()
    s = math.fsum(t)
    if not rel.any() and np.all(t == np.floor(t)) and s < _EXACT_LIMIT:
        return Enclosure.point(s)
    err = U * abs(s) + math.fsum(t * rel) * (1.0 + 1e-6)
    return Enclosure(max(float(down(s - err)), 0.0), float(up(s + err)))


def powered_partial_sum(w: WeightFamily, q: float, n: int) -> Enclosure:
    """Enclosure of sum_{k=1..n} w(k)**q; n = 0 gives the exact empty sum."""
    if int(n) != n or n < 0:
        raise DomainError(f"partial sums need n >= 0, got {n!r}")
    if n == 0:
        return Enclosure.point(0.0)
    t, rel = w.powers(q, 1, int(n))
    return _fsum_enclosure(t, rel)


def prefix_sums(w: WeightFamily, q: float, n: int):
    """Arrays (lo, hi) enclosing S_1..S_n of the terms w(k)**q."""
    t, rel = w.powers(q, 1, int(n))
    if np.isinf(t).any():
        lo, hi, _ = _blocked_cumsum(np.where(np.isinf(t), 0.0, t), rel)
        first = int(np.argmax(np.isinf(t)))
        lo[first:] = np.inf
        hi[first:] = np.inf
        return lo, hi
    lo, hi, _ = _blocked_cumsum(t, rel)
    return lo, hi


def _integral_bracket(law, m: int):
    """Bracket of sum_{k>=m} t_k assuming the law holds for k >= m."""
    if law is None:
        raise TailUnknown("tail of a table weight without tail model")
    if isinstance(law, ZeroLaw):
        return (math.inf, math.inf) if law.divergent else (0.0, 0.0)
    if isinstance(law, PowerLaw):
        s, c = law.s, law.coef
        x = float(m + law.shift)
        if s >= -1.0:
            return math.inf, math.inf
        e = s + 1.0
        lo = c * (x ** e / -e + 0.5 * x ** s)
        hi = c * ((x - 0.5) ** e / -e)
        rel = 16 * U * (1.0 + abs(s) * math.log(x + 1.0)) + law.coef_rel
        return lo * (1.0 - rel), hi * (1.0 + rel)
    # LogLaw
    p, q = law.p, law.q
    x = float(m + law.shift)
    if q < 1.0 or (q == 1.0 and p <= 1.0):
        return math.inf, math.inf
    f = (x * math.log(x) ** p) ** (-q)
    rel = 64 * U * (1.0 + q * p)
    if q == 1.0:
        lo = math.log(x) ** (1.0 - p) / (p - 1.0) + 0.5 * f
        hi = math.log(x - 0.5) ** (1.0 - p) / (p - 1.0)
    else:
        lo = f
        hi = (x - 0.5) ** (1.0 - q) * math.log(x - 0.5) ** (-p * q) / (q - 1.0)
    return lo * (1.0 - rel), hi * (1.0 + rel)


def _cut_index(w: WeightFamily, q: float, r: int) -> tuple:
    law = w.law(q)
    if law is None:
        raise TailUnknown("tail of a table weight without tail model")
    return law, max(int(r), TAIL_CUT, law.k0 - 1)


def powered_tail_sum(w: WeightFamily, q: float, r: int) -> Enclosure:
    """Enclosure of sum_{k>=r} w(k)**q (explicit terms to max(r, 10^4), integrals beyond)."""
    if int(r) != r or r < 1:
        raise DomainError(f"tail sums need r >= 1, got {r!r}")
    law, cut = _cut_index(w, q, r)
    blo, bhi = _integral_bracket(law, cut + 1)
    if math.isinf(blo):
        return Enclosure.divergent()
    t, rel = w.powers(q, int(r), cut)
    head = _fsum_enclosure(t, rel)
    if head.exact and blo == bhi == 0.0:
        return head
    return Enclosure(max(float(down(head.lo + blo)), 0.0), float(up(head.hi + bhi)))


def suffix_sums(w: WeightFamily, q: float, r1: int, r2: int):
    """Arrays (lo, hi) enclosing T(r) = sum_{k>=r} w(k)**q for r = r1..r2."""
    law, cut = _cut_index(w, q, r2)
    blo, bhi = _integral_bracket(law, cut + 1)
    size = r2 - r1 + 1
    if math.isinf(blo):
        return np.full(size, np.inf), np.full(size, np.inf)
    t, rel = w.powers(q, r1, cut)
    lo, hi, exact = _blocked_cumsum(t[::-1], rel[::-1])
    lo, hi = lo[::-1][:size], hi[::-1][:size]
    if exact and blo == bhi == 0.0:
        return lo, hi
    return np.maximum(down(lo + blo), 0.0), up(hi + bhi)


def tail_converges(w: WeightFamily, q: float) -> bool:
    """Whether sum_k w(k)**q is finite, decided from the tail law alone."""
    law = w.law(q)
    if law is None:
        raise TailUnknown("tail of a table weight without tail model")
    blo, _ = _integral_bracket(law, max(TAIL_CUT, law.k0) + 1)
    return math.isfinite(blo)


# ---------------------------------------------------------------- spec grammar

_SHIFT = re.compile(r"^shift:\s*(\d+)\s*\((.*)\)$", re.S)


def _number(token: str, spec: str) -> float:
    try:
        x = float(token)
    except ValueError:
        raise SpecError(f"cannot read a number from {token!r} in weight spec {spec!r}") from None
    if not math.isfinite(x):
        raise SpecError(f"non-finite number {token!r} in weight spec {spec!r}")
    return x


def parse_weight(spec: str, base_dir: str | Path | None = None) -> WeightFamily:
    """Parse ``power:<a> | critlog:<p> | shift:<k>(<spec>) | table:<path>``."""
    text = spec.strip()
    head, sep, rest = text.partition(":")
    if not sep:
        raise SpecError(f"missing ':' in weight spec token {text!r}")
    head = head.strip().lower()
    if head == "power":
        return Power(_number(rest.strip(), spec))
    if head == "critlog":
        try:
            return CriticalLog(_number(rest.strip(), spec))
        except DomainError as exc:
            raise SpecError(f"bad critlog exponent {rest.strip()!r}: {exc}") from None
    if head == "shift":
        m = _SHIFT.match(text)
        if not m:
            raise SpecError(f"malformed shift token {text!r}; expected shift:<k>(<spec>)")
        return Shift(int(m.group(1)), parse_weight(m.group(2), base_dir))
    if head == "table":
        path = Path(rest.strip())
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_table(path)
    raise SpecError(f"unknown weight kind {head!r} in token {text!r}")


def _parse_tail_header(line: str, path) -> TailModel:
    body = line.lstrip("#").strip()
    if not body.startswith("tail="):
        return None
    value = body[len("tail="):].strip()
    if value == "zero":
        return TailModel.zero()
    if value == "none":
        return TailModel.none()
    m = re.match(r"^power:\s*([^,\s]+)\s*,\s*from\s*=\s*(\d+)$", value)
    if not m:
        raise SpecError(f"bad tail header {line.strip()!r} in {path}")
    return TailModel.power_like(_number(m.group(1), line), int(m.group(2)))


def load_table(path) -> Table:
    """Read a CSV table ``n,value`` with an optional ``# tail=...`` header line."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise SpecError(f"cannot read table file {str(path)!r}: {exc.strerror}") from None
    tail = TailModel.none()
    values = []
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parsed = _parse_tail_header(line, path)
            if parsed is not None:
                tail = parsed
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 2:
            raise SpecError(f"expected 'n,value' row, got {line!r} in {path}")
        if cells[0].lower() == "n":
            continue
        n = int(_number(cells[0], line))
        if n != len(values) + 1:
            raise SpecError(f"table rows must be n = 1, 2, ...; got n = {cells[0]!r} in {path}")
        values.append(_number(cells[1], line))
    try:
        return Table(tuple(values), tail, source=str(path))
    except DomainError as exc:
        raise SpecError(f"invalid table {str(path)!r}: {exc}") from None


def format_weight(w: WeightFamily) -> str:
    """Inverse of :func:`parse_weight` for closed-form families."""
    if isinstance(w, Power):
        return f"power:{w.alpha!r}"
    if isinstance(w, CriticalLog):
        return f"critlog:{w.p!r}"
    if isinstance(w, Shift):
        return f"shift:{w.k}({format_weight(w.base)})"
    if isinstance(w, Table):
        return f"table:{w.source}" if w.source else f"table:<{len(w.data)} values>"
    raise TypeError(type(w).__name__)
