"""Exact rational arithmetic and certified dyadic interval arithmetic.

All certified quantities in this package flow through two kinds of values:

* exact rationals (``fractions.Fraction``), used wherever a quantity is
  representable exactly (probabilities, channel entries, total variation
  distances, Taylor sums), and
* ``Enclosure`` intervals with rational endpoints, used for everything
  transcendental (base-2 logarithms, powers of two, entropies).

The defining contract of an ``Enclosure`` is soundness: every operation
returns an interval that contains the exact real result.  Transcendental
kernels work internally on integer mantissas at a fixed dyadic scale with
outward rounding, which keeps them fast while preserving containment.

Precision arguments are always exponents: a precision of ``M`` requests an
interval of width below ``2**-M``.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

Rational = Fraction

__all__ = [
    "Rational",
    "DomainError",
    "rat_arith",
    "parse_rational",
    "format_rational",
    "Enclosure",
    "enc_log2",
    "enc_exp2",
    "RealRep",
    "realrep_query",
    "CompareResult",
    "compare_below",
]


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


def parse_rational(text: str) -> Fraction:
    """Parse a rational from canonical ``num/den`` text (plain integers allowed)."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational: {text!r}") from exc
    return value


def format_rational(value: Fraction) -> str:
    """Render a rational as canonical ``num/den`` text, sign on the numerator."""
    return f"{value.numerator}/{value.denominator}"


_RAT_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def rat_arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    """Exact rational arithmetic; ``op`` is one of add, sub, mul, div.

    Results are canonical by construction (``Fraction`` keeps gcd-reduced
    form with a positive denominator).  Division by zero raises
    :class:`ZeroDivisionError` rather than producing a value.
    """
    try:
        fn = _RAT_OPS[op]
    except KeyError:
        raise DomainError(f"unknown operation {op!r}") from None
    if op == "div" and b == 0:
        raise ZeroDivisionError("rational division by zero")
    return fn(Fraction(a), Fraction(b))


# ---------------------------------------------------------------------------
# Enclosures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` with exact rational endpoints.

    Invariant: ``lo <= hi``.  Arithmetic between enclosures is exact (rational
    endpoints never need rounding), so containment of the true result is
    preserved automatically.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"inverted enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value) -> "Enclosure":
        value = Fraction(value)
        return cls(value, value)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value) -> bool:
        return self.lo <= Fraction(value) <= self.hi

    def overlaps(self, other: "Enclosure") -> bool:
        return max(self.lo, other.lo) <= min(self.hi, other.hi)

    def hull(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __mul__(self, other: "Enclosure") -> "Enclosure":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Enclosure(min(products), max(products))

    def scale(self, factor) -> "Enclosure":
        """Multiply by an exact rational scalar."""
        factor = Fraction(factor)
        if factor >= 0:
            return Enclosure(self.lo * factor, self.hi * factor)
        return Enclosure(self.hi * factor, self.lo * factor)

    def shift(self, offset) -> "Enclosure":
        offset = Fraction(offset)
        return Enclosure(self.lo + offset, self.hi + offset)

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}


# ---------------------------------------------------------------------------
# Dyadic kernels
#
# Internally a value x is held as an integer interval [a, b] at scale W,
# meaning a * 2**-W <= x <= b * 2**-W.  Floor/ceil divisions implement
# outward rounding; soundness never depends on how many loop iterations ran.
# ---------------------------------------------------------------------------


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _scaled(q: Fraction, bits: int) -> tuple[int, int]:
    n, d = q.numerator, q.denominator
    shifted = n << bits
    return shifted // d, _ceil_div(shifted, d)


def _pow2_floor_exponent(q: Fraction) -> int:
    """Largest integer e with 2**e <= q (q > 0)."""
    n, d = q.numerator, q.denominator
    e = n.bit_length() - d.bit_length()
    # candidate is within one of the answer; fix up with exact comparisons
    if not _ge_pow2(n, d, e):
        e -= 1
    if _ge_pow2(n, d, e + 1):
        e += 1
    return e


def _ge_pow2(n: int, d: int, k: int) -> bool:
    """n/d >= 2**k for positive n, d."""
    if k >= 0:
        return n >= (d << k)
    return (n << (-k)) >= d


def _ln_scaled(m: Fraction, bits: int, tail_bits: int) -> tuple[int, int]:
    """Integer interval for ln(m) at scale ``bits``, m in (1, 2].

    Uses ln(m) = 2*atanh(z) with z = (m-1)/(m+1) in (0, 1/3], summed until
    the geometric tail drops below 2**-tail_bits.
    """
    z = (m - 1) / (m + 1)
    zlo, zhi = _scaled(z, bits)
    z2lo = (zlo * zlo) >> bits
    z2hi = _ceil_div(zhi * zhi, 1 << bits)
    plo, phi = zlo, zhi
    slo, shi = zlo, zhi
    tail_limit = 1 << max(bits - tail_bits, 0)
    j = 0
    while True:
        j += 1
        plo = (plo * z2lo) >> bits
        phi = _ceil_div(phi * z2hi, 1 << bits)
        slo += plo // (2 * j + 1)
        shi += _ceil_div(phi, 2 * j + 1)
        # remaining tail <= z^(2j+3) / ((2j+3)(1 - z^2)); z^2 <= 1/8 here,
        # so 1/(1 - z^2) <= 8/7
        next_hi = _ceil_div(phi * z2hi, 1 << bits)
        tail = _ceil_div(next_hi * 8, 7) + 1
        if tail <= tail_limit:
            return 2 * slo, 2 * (shi + tail)


_LN2_CACHE: dict[int, tuple[int, int]] = {}


def _ln2_scaled(bits: int) -> tuple[int, int]:
    cached = _LN2_CACHE.get(bits)
    if cached is None:
        cached = _ln_scaled(Fraction(2), bits, bits - 6)
        _LN2_CACHE[bits] = cached
    return cached


@functools.lru_cache(maxsize=1 << 15)
def _log2_fraction(q: Fraction, precision: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of log2(q) with width below 2**-precision (q > 0)."""
    e = _pow2_floor_exponent(q)
    m = q / (Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e))
    if m == 1:
        exact = Fraction(e)
        return exact, exact
    target = Fraction(1, 1 << precision)
    for guard in (14, 28, 56, 112):
        bits = precision + guard
        num_lo, num_hi = _ln_scaled(m, bits, bits - 6)
        den_lo, den_hi = _ln2_scaled(bits)
        lo = (num_lo << bits) // den_hi
        hi = _ceil_div(num_hi << bits, den_lo)
        lo_f = Fraction(lo, 1 << bits) + e
        hi_f = Fraction(hi, 1 << bits) + e
        if hi_f - lo_f < target:
            return lo_f, hi_f
    raise AssertionError("log2 kernel could not reach requested width")


def enc_log2(x: Enclosure, precision: int) -> Enclosure:
    """Sound enclosure of log2 over ``x``; needs ``x.lo > 0``.

    For point inputs the result width is below ``2**-precision``; for wide
    inputs the width is dominated by the image of the interval itself.
    """
    if x.lo <= 0:
        raise DomainError("log2 requires a strictly positive enclosure")
    lo_pair = _log2_fraction(x.lo, precision)
    if x.hi == x.lo:
        return Enclosure(lo_pair[0], lo_pair[1])
    hi_pair = _log2_fraction(x.hi, precision)
    return Enclosure(lo_pair[0], hi_pair[1])


def _exp2_fraction(t: Fraction, precision: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of 2**t with width below 2**-precision."""
    i = t.numerator // t.denominator
    f = t - i
    pow2i = Fraction(1 << i) if i >= 0 else Fraction(1, 1 << -i)
    if f == 0:
        return pow2i, pow2i
    target = Fraction(1, 1 << precision)
    extra = max(i, 0)
    for guard in (14, 28, 56, 112):
        bits = precision + extra + guard
        one = 1 << bits
        ln2_lo, ln2_hi = _ln2_scaled(bits)
        flo, fhi = _scaled(f, bits)
        ulo = (flo * ln2_lo) >> bits
        uhi = _ceil_div(fhi * ln2_hi, 1 << bits)
        term_lo, term_hi = one, one
        sum_lo, sum_hi = one, one
        tail_limit = 1 << max(guard - 8, 0)
        j = 0
        while True:
            j += 1
            term_lo = ((term_lo * ulo) >> bits) // j
            term_hi = _ceil_div(_ceil_div(term_hi * uhi, 1 << bits), j)
            sum_lo += term_lo
            sum_hi += term_hi
            # u < ln 2, so the remaining tail is below twice the next term
            next_hi = _ceil_div(_ceil_div(term_hi * uhi, 1 << bits), j + 1)
            tail = 2 * next_hi + 1
            if tail <= tail_limit:
                break
        lo_f = Fraction(sum_lo, one) * pow2i
        hi_f = Fraction(sum_hi + tail, one) * pow2i
        if hi_f - lo_f < target:
            return lo_f, hi_f
    raise AssertionError("exp2 kernel could not reach requested width")


def enc_exp2(t: Enclosure, precision: int) -> Enclosure:
    """Sound enclosure of 2**t over the enclosure ``t`` (monotone endpoints)."""
    lo_pair = _exp2_fraction(t.lo, precision)
    if t.hi == t.lo:
        return Enclosure(lo_pair[0], lo_pair[1])
    hi_pair = _exp2_fraction(t.hi, precision)
    return Enclosure(lo_pair[0], hi_pair[1])


# ---------------------------------------------------------------------------
# Computable-real representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealRep:
    """A computable real as an approximant sequence plus a convergence modulus.

    ``approximant(n)`` is the n-th rational approximation; ``modulus(M)``
    returns an index from which every approximant is within ``2**-M`` of the
    represented real.  Both maps must be total; representations are pure
    values and queries never mutate them.
    """

    approximant: Callable[[int], Fraction]
    modulus: Callable[[int], int]

    @classmethod
    def constant(cls, value) -> "RealRep":
        value = Fraction(value)
        return cls(approximant=lambda n: value, modulus=lambda M: 0)

    def enclosure_at(self, M: int) -> Enclosure:
        radius = Fraction(1, 1 << M)
        center = realrep_query(self, M)
        return Enclosure(center - radius, center + radius)


def realrep_query(rep: RealRep, M: int) -> Fraction:
    """Rational within ``2**-M`` of the represented real (``M >= 0``)."""
    if M < 0:
        raise DomainError("precision exponent must be non-negative")
    return Fraction(rep.approximant(rep.modulus(M)))


# ---------------------------------------------------------------------------
# Sound threshold comparison
# ---------------------------------------------------------------------------


class CompareResult(enum.Enum):
    CONFIRMED_BELOW = "ConfirmedBelow"
    UNDECIDED = "Undecided"


def compare_below(
    value: Union[Enclosure, RealRep], threshold: Fraction, budget: int
) -> CompareResult:
    """Semi-decide ``value < threshold`` with a bounded refinement budget.

    Sound in one direction only: CONFIRMED_BELOW is returned just when the
    entire refined enclosure sits strictly below the threshold, so a true
    value at or above the threshold can never be confirmed.  An ``Enclosure``
    carries no refinement source and is judged as-is; a ``RealRep`` is
    queried at geometrically shrinking widths, one halving per budget step.
    """
    if budget < 0:
        raise DomainError("budget must be non-negative")
    threshold = Fraction(threshold)
    if isinstance(value, Enclosure):
        if value.hi < threshold:
            return CompareResult.CONFIRMED_BELOW
        return CompareResult.UNDECIDED
    for step in range(budget + 1):
        if value.enclosure_at(step).hi < threshold:
            return CompareResult.CONFIRMED_BELOW
    return CompareResult.UNDECIDED
