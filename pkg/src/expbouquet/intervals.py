"""Directed-rounding interval arithmetic.

Every certified quantity in this package (potentials, endpoint heights,
orbit coordinates) is carried as an ``Interval`` with outward rounding via
``math.nextafter``, so enclosures are sound under double precision.  Upper
bounds saturate to ``+inf`` (flagged open) once the growth map e^t - 1
overflows; lower bounds saturate to a certified huge constant instead, so
"this value exceeds any threshold we care about" remains decidable.

Threshold questions are answered as a ``TriBool``: yes / no / unknown, the
last carrying the blocking enclosure as evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

# expm1 overflows just above e^709 ~ 8.2e307
EXP_OVERFLOW_T = 709.0
# certified lower saturation: 8e307 < e^709 - 1, so growth of any t > 709 exceeds it
HUGE = 8.0e307
# beyond this, a +-1 floor/ceil slack propagates through one log far below 1 ulp
TOWER_PIN = 1e30

DEFAULT_TOL = 1e-9
TEST_MARGIN = 1e-6


class RigorError(Exception):
    """An enclosure violated a proven bound; indicates a bug, never bad input."""


def round_down(x: float) -> float:
    return math.nextafter(x, -math.inf) if math.isfinite(x) else x


def round_up(x: float) -> float:
    return math.nextafter(x, math.inf) if math.isfinite(x) else x


def sum_down(a: float, b: float) -> float:
    """Largest double certainly <= a + b (2Sum error term decides the direction)."""
    s = a + b
    if not math.isfinite(s):
        return -math.inf if math.isnan(s) else s
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    return s if err >= 0 else round_down(s)


def sum_up(a: float, b: float) -> float:
    """Smallest double certainly >= a + b."""
    s = a + b
    if not math.isfinite(s):
        return math.inf if math.isnan(s) else s
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    return s if err <= 0 else round_up(s)


def expm1_down(t: float) -> float:
    """Certified lower bound of e^t - 1, saturating at HUGE."""
    if t == 0.0:
        return 0.0
    if t > EXP_OVERFLOW_T:
        return HUGE
    try:
        v = math.expm1(t)
    except OverflowError:
        return HUGE
    # e^t - 1 > -1 always
    return max(round_down(v), -1.0)


def expm1_up(t: float) -> float:
    """Certified upper bound of e^t - 1 (+inf once the double range is exceeded)."""
    if t == 0.0:
        return 0.0
    if t == math.inf:
        return math.inf
    try:
        v = math.expm1(t)
    except OverflowError:
        return math.inf
    if v == math.inf:
        return math.inf
    return round_up(v)


def log1p_down(x: float) -> float:
    if x == 0.0:
        return 0.0
    if x == math.inf:
        return math.inf
    return round_down(math.log1p(x))


def log1p_up(x: float) -> float:
    if x == 0.0:
        return 0.0
    if x == math.inf:
        return math.inf
    return round_up(math.log1p(x))


@dataclass(frozen=True)
class Interval:
    """Enclosure [lo, hi] of one real value, with open/closed endpoint flags.

    ``hi = inf`` with ``hi_open`` means "finite but beyond double range" (the
    usual saturation case); ``hi = inf`` closed is reserved for genuinely
    infinite quantities such as the endpoint height of a hair with no finite
    minimum.
    """

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise RigorError("NaN endpoint in interval")
        if self.lo > self.hi:
            raise RigorError(f"inverted interval [{self.lo}, {self.hi}]")
        if self.lo == self.hi and (self.lo_open or self.hi_open):
            raise RigorError(f"empty interval at {self.lo}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(v: float) -> "Interval":
        return Interval(v, v)

    @staticmethod
    def from_fraction(fr: Fraction) -> "Interval":
        f = float(fr)
        lo = f if Fraction(f) <= fr else round_down(f)
        hi = f if Fraction(f) >= fr else round_up(f)
        return Interval(lo, hi)

    # -- basic queries -----------------------------------------------------

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        if self.hi == math.inf:
            return self.lo
        if self.lo == -math.inf:
            return self.hi
        return 0.5 * (self.lo + self.hi)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains_value(self, v: float) -> bool:
        above = v > self.lo or (v == self.lo and not self.lo_open)
        below = v < self.hi or (v == self.hi and not self.hi_open)
        return above and below

    # -- arithmetic (outward rounded) ---------------------------------------

    def _coerce(self, other) -> "Interval":
        if isinstance(other, Interval):
            return other
        return Interval.point(float(other))

    def __add__(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval(sum_down(self.lo, o.lo), sum_up(self.hi, o.hi),
                        self.lo_open or o.lo_open, self.hi_open or o.hi_open)

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval(sum_down(self.lo, -o.hi), sum_up(self.hi, -o.lo),
                        self.lo_open or o.hi_open, self.hi_open or o.lo_open)

    def ln1p(self) -> "Interval":
        """Image under the strictly increasing map t -> ln(1 + t)."""
        if self.lo <= -1.0:
            raise RigorError(f"ln1p domain violation: lo = {self.lo}")
        return Interval(log1p_down(self.lo), log1p_up(self.hi), self.lo_open, self.hi_open)

    def growth(self) -> "Interval":
        """Image under t -> e^t - 1, saturating outside the double range."""
        lo = expm1_down(self.lo)
        hi = expm1_up(self.hi)
        hi_open = self.hi_open or (hi == math.inf and self.hi != math.inf)
        return Interval(lo, hi, self.lo_open, hi_open)

    # -- threshold decisions -------------------------------------------------

    def certainly_gt(self, r: float) -> bool:
        return self.lo > r or (self.lo == r and self.lo_open)

    def certainly_ge(self, r: float) -> bool:
        return self.lo >= r

    def certainly_lt(self, r: float) -> bool:
        return self.hi < r or (self.hi == r and self.hi_open)

    def certainly_le(self, r: float) -> bool:
        return self.hi <= r

    def tri_gt(self, r: float) -> "TriBool":
        if self.certainly_gt(r):
            return TriBool.yes()
        if self.certainly_le(r):
            return TriBool.no()
        return TriBool.unknown(self)

    def tri_lt(self, r: float) -> "TriBool":
        if self.certainly_lt(r):
            return TriBool.yes()
        if self.certainly_ge(r):
            return TriBool.no()
        return TriBool.unknown(self)

    # -- lattice helpers -----------------------------------------------------

    def intersect(self, other: "Interval") -> "Interval":
        if other.lo > self.lo or (other.lo == self.lo and other.lo_open):
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open
        if other.hi < self.hi or (other.hi == self.hi and other.hi_open):
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open
        if lo > hi or (lo == hi and (lo_open or hi_open)):
            raise RigorError(f"empty intersection of {self} and {other}")
        return Interval(lo, hi, lo_open, hi_open)

    @staticmethod
    def sup_hull(terms: list["Interval"]) -> "Interval":
        """Enclosure of sup(v_1, v_2, ...) given enclosures of each v_i.

        The sup is > every open lower bound and <= every term's upper bound,
        so [max lo, max hi] is sound; on ties an open lower bound is kept
        (strict information survives) and the upper stays closed unless all
        maximal terms are open.
        """
        if not terms:
            raise ValueError("sup_hull of no terms")
        lo, lo_open = -math.inf, False
        for t in terms:
            if t.lo > lo or (t.lo == lo and t.lo_open):
                lo, lo_open = t.lo, t.lo_open
        hi = max(t.hi for t in terms)
        hi_open = all(t.hi_open for t in terms if t.hi == hi)
        return Interval(lo, hi, lo_open, hi_open)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        def enc(x: float):
            if x == math.inf:
                return "inf"
            if x == -math.inf:
                return "-inf"
            return x

        return {"lo": enc(self.lo), "hi": enc(self.hi),
                "lo_open": self.lo_open, "hi_open": self.hi_open}

    @staticmethod
    def from_json(obj: dict) -> "Interval":
        def dec(x):
            if x == "inf":
                return math.inf
            if x == "-inf":
                return -math.inf
            return float(x)

        return Interval(dec(obj["lo"]), dec(obj["hi"]),
                        bool(obj.get("lo_open", False)), bool(obj.get("hi_open", False)))

    def __repr__(self) -> str:
        lb = "(" if self.lo_open else "["
        rb = ")" if self.hi_open else "]"
        return f"{lb}{self.lo:.17g}, {self.hi:.17g}{rb}"


@dataclass(frozen=True)
class TriBool:
    """Certified three-valued answer; unknown carries the blocking enclosure."""

    value: bool | None
    evidence: Interval | None = None

    @staticmethod
    def yes() -> "TriBool":
        return TriBool(True)

    @staticmethod
    def no(evidence: Interval | None = None) -> "TriBool":
        return TriBool(False, evidence)

    @staticmethod
    def unknown(evidence: Interval | None = None) -> "TriBool":
        return TriBool(None, evidence)

    @property
    def is_true(self) -> bool:
        return self.value is True

    @property
    def is_false(self) -> bool:
        return self.value is False

    @property
    def is_unknown(self) -> bool:
        return self.value is None

    def label(self) -> str:
        return {True: "true", False: "false", None: "unknown"}[self.value]


def growth_pow(x: Interval | float | int, n: int) -> Interval:
    """Interval enclosure of the n-fold growth map F^n, F(t) = e^t - 1, n >= 0."""
    iv = x if isinstance(x, Interval) else Interval.point(float(x))
    for _ in range(n):
        iv = iv.growth()
    return iv


def growth_inv_pow(x: Interval | float | int, k: int) -> Interval:
    """Interval enclosure of the k-fold inverse growth map F^-k = ln(1 + .) iterated."""
    iv = x if isinstance(x, Interval) else Interval.point(float(x))
    for _ in range(k):
        iv = iv.ln1p()
    return iv


def growth_net(x: Interval | float | int, e: int) -> Interval:
    """F^e for any integer e: forward growth for e >= 0, iterated ln(1+.) below."""
    if e >= 0:
        return growth_pow(x, e)
    return growth_inv_pow(x, -e)
