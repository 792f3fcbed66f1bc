"""Dual numeric backend: exact rationals and signed log-domain floats.

Exact hitting times mix binomials with extreme powers such as p**(1-n), so
plain doubles overflow long before the sizes of interest.  Everything exact
runs on ``fractions.Fraction``; everything large runs on :class:`LogFloat`,
which keeps magnitudes in log space with an mpmath mantissa well past 80
bits.  :class:`ExactValue` tags a result with the backend that produced it
and carries infinity as a first-class flag rather than an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

import mpmath

# Shared mpmath context for all log-domain arithmetic.  120 bits keeps the
# relative error around 1e-30 even after long accumulations, comfortably
# beyond the 80-bit floor the backend promises.
MP = mpmath.mp.clone()
MP.prec = 120

_LN10 = MP.log(MP.mpf(10))


class Backend(Enum):
    RATIONAL = "rational"
    LOGFLOAT = "logfloat"


class LogFloat:
    """A real number stored as a sign plus the natural log of its magnitude.

    Addition of like-signed values goes through log-sum-exp, so sums of huge
    positive terms never leave log space.  Mixed signs fall back to
    log-diff-exp; mpmath precision absorbs the cancellation at the scales
    this package produces.
    """

    __slots__ = ("sign", "log")

    def __init__(self, sign: int, log) -> None:
        if sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        self.sign = sign
        self.log = MP.mpf(log) if sign else MP.ninf

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zero(cls) -> "LogFloat":
        return cls(0, 0)

    @classmethod
    def one(cls) -> "LogFloat":
        return cls(1, 0)

    @classmethod
    def from_fraction(cls, value: Union[Fraction, int]) -> "LogFloat":
        value = Fraction(value)
        if value == 0:
            return cls.zero()
        sign = 1 if value > 0 else -1
        num, den = abs(value.numerator), value.denominator
        return cls(sign, MP.log(MP.mpf(num)) - MP.log(MP.mpf(den)))

    @classmethod
    def from_float(cls, value: float) -> "LogFloat":
        if value == 0.0:
            return cls.zero()
        if math.isnan(value) or math.isinf(value):
            raise ValueError("LogFloat cannot hold nan/inf; infinities are flags on ExactValue")
        return cls(1 if value > 0 else -1, MP.log(MP.mpf(abs(value))))

    @classmethod
    def from_log(cls, log_magnitude, sign: int = 1) -> "LogFloat":
        """Value sign * exp(log_magnitude) without ever forming the exponential."""
        return cls(sign, log_magnitude)

    @classmethod
    def coerce(cls, value) -> "LogFloat":
        if isinstance(value, LogFloat):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.from_fraction(value)
        if isinstance(value, float):
            return cls.from_float(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to LogFloat")

    # ------------------------------------------------------------------
    # arithmetic

    def __mul__(self, other):
        other = LogFloat.coerce(other)
        sign = self.sign * other.sign
        if sign == 0:
            return LogFloat.zero()
        return LogFloat(sign, self.log + other.log)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = LogFloat.coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogFloat division by zero")
        if self.sign == 0:
            return LogFloat.zero()
        return LogFloat(self.sign * other.sign, self.log - other.log)

    def __rtruediv__(self, other):
        return LogFloat.coerce(other) / self

    def __add__(self, other):
        other = LogFloat.coerce(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log >= other.log else (other, self)
        diff = small.log - big.log  # <= 0
        if big.sign == small.sign:
            return LogFloat(big.sign, big.log + MP.log1p(MP.exp(diff)))
        if diff == 0:
            return LogFloat.zero()
        return LogFloat(big.sign, big.log + MP.log1p(-MP.exp(diff)))

    __radd__ = __add__

    def __neg__(self):
        return LogFloat(-self.sign, self.log)

    def __abs__(self):
        return LogFloat(abs(self.sign), self.log)

    def __sub__(self, other):
        return self + (-LogFloat.coerce(other))

    def __rsub__(self, other):
        return LogFloat.coerce(other) + (-self)

    def __pow__(self, exponent):
        if isinstance(exponent, float) and not float(exponent).is_integer():
            exponent = Fraction(exponent)
        if isinstance(exponent, float):
            exponent = int(exponent)
        if self.sign == 0:
            if isinstance(exponent, int) and exponent > 0 or isinstance(exponent, Fraction) and exponent > 0:
                return LogFloat.zero()
            raise ZeroDivisionError("0 raised to a nonpositive power")
        if isinstance(exponent, int):
            sign = self.sign if exponent % 2 else 1
            return LogFloat(sign, self.log * exponent)
        if isinstance(exponent, Fraction):
            if self.sign < 0:
                raise ValueError("fractional power of a negative LogFloat")
            scale = MP.mpf(exponent.numerator) / MP.mpf(exponent.denominator)
            return LogFloat(1, self.log * scale)
        raise TypeError(f"unsupported exponent type {type(exponent).__name__}")

    # ------------------------------------------------------------------
    # comparisons

    def _cmp(self, other) -> int:
        other = LogFloat.coerce(other)
        if self.sign != other.sign:
            return -1 if self.sign < other.sign else 1
        if self.sign == 0:
            return 0
        if self.log == other.log:
            return 0
        bigger_mag = self.log > other.log
        if self.sign > 0:
            return 1 if bigger_mag else -1
        return -1 if bigger_mag else 1

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.sign, self.log))

    # ------------------------------------------------------------------
    # conversions

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * float(MP.exp(self.log))

    def log10(self):
        """log10 of the magnitude as an mpmath float; sign must be nonzero."""
        if self.sign == 0:
            raise ValueError("log10 of zero")
        return self.log / _LN10

    def decimal_string(self, digits: int = 12) -> str:
        """Deterministic scientific-notation rendering, safe at any magnitude."""
        if self.sign == 0:
            return "0"
        e10 = self.log / _LN10
        exp10 = int(MP.floor(e10))
        mant = float(MP.power(10, e10 - exp10))
        # floor/rounding interplay may leave mant at 10.0; renormalize.
        if mant >= 10.0:
            mant /= 10.0
            exp10 += 1
        body = f"{self.sign * mant:.{digits}g}"
        if exp10 == 0:
            return body
        return f"{body}e{exp10:+d}"

    def __repr__(self):
        return f"LogFloat({self.decimal_string(6)})"


@dataclass(frozen=True)
class ExactValue:
    """A computed quantity tagged with the numeric backend that produced it.

    ``value`` is a Fraction (rational backend) or a LogFloat; ``infinite``
    marks legitimately infinite expectations (unreachable optima), in which
    case ``value`` is None.
    """

    backend: Backend
    value: Optional[Union[Fraction, LogFloat]]
    infinite: bool = False

    @classmethod
    def rational(cls, value) -> "ExactValue":
        return cls(Backend.RATIONAL, Fraction(value))

    @classmethod
    def logfloat(cls, value) -> "ExactValue":
        return cls(Backend.LOGFLOAT, LogFloat.coerce(value))

    @classmethod
    def wrap(cls, backend: Backend, value) -> "ExactValue":
        if backend is Backend.RATIONAL:
            return cls.rational(value)
        return cls.logfloat(value)

    @classmethod
    def infinity(cls, backend: Backend) -> "ExactValue":
        return cls(backend, None, True)

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    def as_fraction(self) -> Fraction:
        if self.infinite:
            raise ValueError("infinite value has no rational form")
        if not isinstance(self.value, Fraction):
            raise ValueError("not a rational-backend value")
        return self.value

    def as_float(self) -> float:
        if self.infinite:
            return math.inf
        return float(self.value)

    def as_logfloat(self) -> LogFloat:
        if self.infinite:
            raise ValueError("infinite value has no LogFloat form")
        if isinstance(self.value, LogFloat):
            return self.value
        return LogFloat.from_fraction(self.value)

    def decimal_string(self, digits: int = 12) -> str:
        if self.infinite:
            return "inf"
        if isinstance(self.value, Fraction):
            if self.value.denominator == 1:
                return str(self.value.numerator)
            return LogFloat.from_fraction(self.value).decimal_string(digits)
        return self.value.decimal_string(digits)

    def exact_string(self) -> str:
        """num/den for rationals, decimal for log-domain, `inf` when flagged."""
        if self.infinite:
            return "inf"
        if isinstance(self.value, Fraction):
            return str(self.value)
        return self.value.decimal_string()

    def _key(self, other):
        if isinstance(other, ExactValue):
            a = math.inf if self.infinite else self.value
            b = math.inf if other.infinite else other.value
        else:
            a = math.inf if self.infinite else self.value
            b = other
        if isinstance(a, Fraction) and isinstance(b, (Fraction, int)):
            return a, Fraction(b)
        if a is math.inf or b is math.inf:
            fa = math.inf if a is math.inf else 0.0
            fb = math.inf if b is math.inf else 0.0
            return fa, fb
        return LogFloat.coerce(a), LogFloat.coerce(b)

    def __lt__(self, other):
        a, b = self._key(other)
        return a < b

    def __le__(self, other):
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other):
        a, b = self._key(other)
        return a > b

    def __ge__(self, other):
        a, b = self._key(other)
        return a >= b

    def __repr__(self):
        if self.infinite:
            return f"ExactValue(inf, {self.backend.value})"
        return f"ExactValue({self.decimal_string(6)}, {self.backend.value})"


def relative_difference(a, b) -> float:
    """|a-b| / max(|a|,|b|) with LogFloat/Fraction/ExactValue inputs; 0 if both 0."""
    if isinstance(a, ExactValue):
        a = math.inf if a.infinite else a.value
    if isinstance(b, ExactValue):
        b = math.inf if b.infinite else b.value
    if a is math.inf or b is math.inf:
        return 0.0 if a is b else math.inf
    la, lb = LogFloat.coerce(a), LogFloat.coerce(b)
    if la.sign == 0 and lb.sign == 0:
        return 0.0
    diff = abs(la - lb)
    scale = max(abs(la), abs(lb), key=lambda v: (v.sign, v.log))
    return float(diff / scale)
