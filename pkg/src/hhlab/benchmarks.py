"""OneMax, Cliff and Jump as exact level functions.

All three landscapes depend on a bit string only through its number of
one-bits (the level), so the level form is the primary interface and the
bit-string form exists for cross-checking.  Fitness values are exact
rationals: Cliff sits on half-integers and acceptance decisions must never
flip due to rounding.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

Fitness = Fraction

_HALF = Fraction(1, 2)


class BenchmarkKind(Enum):
    ONEMAX = "onemax"
    CLIFF = "cliff"
    JUMP = "jump"


@dataclass(frozen=True)
class BenchmarkSpec:
    """A fitness landscape: which benchmark, at which dimension, with which width.

    ``param`` is d for Cliff (1 <= d <= n/2) and m for Jump (2 <= m <= n);
    OneMax takes no parameter.  m = 1 is rejected outright: the Jump analysis
    assumes a genuine valley.
    """

    kind: BenchmarkKind
    n: int
    param: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if self.kind is BenchmarkKind.ONEMAX:
            if self.param is not None:
                raise ValueError("onemax takes no parameter")
        elif self.kind is BenchmarkKind.CLIFF:
            d = self.param
            if not isinstance(d, int) or not (1 <= d and 2 * d <= self.n):
                raise ValueError(f"cliff requires 1 <= d <= n/2, got d={d!r}, n={self.n}")
        elif self.kind is BenchmarkKind.JUMP:
            m = self.param
            if not isinstance(m, int) or not (2 <= m <= self.n):
                raise ValueError(f"jump requires 2 <= m <= n, got m={m!r}, n={self.n}")


def level_fitness(spec: BenchmarkSpec, level: int) -> Fitness:
    """Exact fitness of any string with the given number of one-bits."""
    n = spec.n
    if not 0 <= level <= n:
        raise ValueError(f"level must lie in [0, {n}], got {level}")
    if spec.kind is BenchmarkKind.ONEMAX:
        return Fraction(level)
    if spec.kind is BenchmarkKind.CLIFF:
        d = spec.param
        if level <= n - d:
            return Fraction(level)
        return Fraction(level) - d + _HALF
    m = spec.param
    if level == n:
        return Fraction(n + m)
    if level <= n - m:
        return Fraction(m + level)
    return Fraction(n - level)


def evaluate(spec: BenchmarkSpec, x: Sequence[int]) -> Fitness:
    """Fitness of a bit string; delegates to the level form via the popcount."""
    arr = np.asarray(x)
    if arr.shape != (spec.n,):
        raise ValueError(f"bit string must have length {spec.n}, got shape {arr.shape}")
    return level_fitness(spec, int(np.count_nonzero(arr)))


def global_optimum_level(spec: BenchmarkSpec) -> int:
    """The unique fitness-maximal level; n for all three benchmarks."""
    return spec.n


def local_optimum_level(spec: BenchmarkSpec) -> Optional[int]:
    """Level of the deceptive local optimum: n-m for Jump, n-d for Cliff."""
    if spec.kind is BenchmarkKind.JUMP:
        return spec.n - spec.param
    if spec.kind is BenchmarkKind.CLIFF:
        return spec.n - spec.param
    return None


@functools.lru_cache(maxsize=None)
def level_fitness_table(spec: BenchmarkSpec) -> tuple:
    """Fitness at every level 0..n, as exact rationals."""
    return tuple(level_fitness(spec, k) for k in range(spec.n + 1))


@functools.lru_cache(maxsize=None)
def doubled_fitness_table(spec: BenchmarkSpec) -> np.ndarray:
    """2 * fitness at every level as int64; exact, and cheap to compare in hot loops."""
    table = np.array([int(2 * f) for f in level_fitness_table(spec)], dtype=np.int64)
    table.flags.writeable = False
    return table


# ----------------------------------------------------------------------
# serialization: onemax:n=20 | cliff:n=20,d=3 | jump:n=20,m=2

_SPEC_RE = re.compile(r"^(onemax|cliff|jump):(.+)$")


def format_benchmark(spec: BenchmarkSpec) -> str:
    if spec.kind is BenchmarkKind.ONEMAX:
        return f"onemax:n={spec.n}"
    key = "d" if spec.kind is BenchmarkKind.CLIFF else "m"
    return f"{spec.kind.value}:n={spec.n},{key}={spec.param}"


def parse_benchmark(text: str, default_n: Optional[int] = None) -> BenchmarkSpec:
    """Parse a benchmark spec string; ``default_n`` fills in a missing n=
    (used by grid runs where n comes from the grid)."""
    text = text.strip().lower()
    match = _SPEC_RE.match(text)
    if not match:
        raise ValueError(
            f"unrecognized benchmark spec {text!r}; expected onemax:n=<n>, "
            "cliff:n=<n>,d=<d> or jump:n=<n>,m=<m>"
        )
    kind = BenchmarkKind(match.group(1))
    fields = {}
    for part in match.group(2).split(","):
        if "=" not in part:
            raise ValueError(f"malformed field {part!r} in benchmark spec {text!r}")
        key, _, value = part.partition("=")
        try:
            fields[key.strip()] = int(value)
        except ValueError:
            raise ValueError(f"benchmark field {key.strip()!r} must be an integer, got {value!r}") from None
    n = fields.pop("n", default_n)
    if n is None:
        raise ValueError(f"benchmark spec {text!r} is missing n= and no grid value applies")
    param = None
    if kind is BenchmarkKind.CLIFF:
        param = fields.pop("d", None)
        if param is None:
            raise ValueError(f"cliff spec {text!r} is missing d=")
    elif kind is BenchmarkKind.JUMP:
        param = fields.pop("m", None)
        if param is None:
            raise ValueError(f"jump spec {text!r} is missing m=")
    if fields:
        raise ValueError(f"unexpected field(s) {sorted(fields)} in benchmark spec {text!r}")
    return BenchmarkSpec(kind, n, param)
