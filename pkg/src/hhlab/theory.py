"""Closed-form runtime expressions, finite-n bounds and drift diagnostics.

Everything here is a pure function of the problem parameters.  Asymptotic
bounds are represented by their certified finite-n parts (single binomial
terms extracted from the valley-crossing sum) plus comparator magnitudes
whose hidden constants are recorded as ratios, never asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

from .values import MP, Backend, ExactValue, LogFloat
from .benchmarks import BenchmarkSpec, local_optimum_level
from .heuristics import AlgorithmSpec
from .chain import ChainStructure, LevelChain, build_level_chain

Number = Union[int, float, Fraction]

# e bracketed by rationals, wide enough to absorb float rounding of p values
_E_LO = Fraction(271828182845904, 10 ** 14)
_E_HI = Fraction(271828182845905, 10 ** 14)


def _check_nm(n: int, m: int):
    if not (isinstance(n, int) and isinstance(m, int) and 2 <= m <= n):
        raise ValueError(f"need integers 2 <= m <= n, got n={n}, m={m}")


def last_step_formula(n: int, m: int, p: Number) -> ExactValue:
    """Expected time of the final upstep of the one-bit move acceptance
    hyper-heuristic on the m-wide valley benchmark.

    Evaluates p^(n-2m+1) * sum_{k<=n-m-1} p^(-k) C(n,k)
            + p^(1-n)    * sum_{n-m<=k<=n-1} p^k C(n,k),
    exactly over rationals when p is rational, in log floats otherwise.
    p = 0 yields the infinity flag: an elitist walk never crosses the valley.
    """
    _check_nm(n, m)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0,1], got {p}")
    rational = not isinstance(p, float)
    if p == 0:
        return ExactValue.infinity(Backend.RATIONAL if rational else Backend.LOGFLOAT)
    if rational:
        pf = Fraction(p)
        total = Fraction(0)
        for k in range(0, n - m):
            total += math.comb(n, k) * pf ** (n - 2 * m + 1 - k)
        for k in range(n - m, n):
            total += math.comb(n, k) * pf ** (k + 1 - n)
        return ExactValue.rational(total)
    pl = LogFloat.from_float(p)
    total = LogFloat.zero()
    for k in range(0, n - m):
        total = total + LogFloat.from_fraction(Fraction(math.comb(n, k))) * pl ** (n - 2 * m + 1 - k)
    for k in range(n - m, n):
        total = total + LogFloat.from_fraction(Fraction(math.comb(n, k))) * pl ** (k + 1 - n)
    return ExactValue.logfloat(total)


def ratio_pk(k: int, n: int, m: int, p: Number) -> ExactValue:
    """Downstep/upstep probability ratio of that chain at level k, by cases.

    Must equal trans(k,k-1)/trans(k,k+1) of the built chain: the acceptance
    probabilities cancel at the local optimum and at n-1.
    """
    _check_nm(n, m)
    if not 0 <= k <= n - 1:
        raise ValueError(f"k must lie in [0, {n - 1}], got {k}")
    pf = Fraction(p)
    if k == n - 1:
        return ExactValue.rational(Fraction(n - 1))
    if k == n - m:
        return ExactValue.rational(Fraction(n - m, m))
    if k <= n - m - 1:
        return ExactValue.rational(Fraction(k, n - k) * pf)
    if pf == 0:
        return ExactValue.infinity(Backend.RATIONAL)
    return ExactValue.rational(Fraction(k, n - k) / pf)


def lower_bound_small_m(n: int, m: int) -> ExactValue:
    """Certified finite-n lower bound on the last-step time: the single
    binomial term C(n, n-2m+1), valid for every acceptance probability."""
    _check_nm(n, m)
    if n - 2 * m + 1 < 0:
        raise ValueError(f"need n - 2m + 1 >= 0, got n={n}, m={m}")
    return ExactValue.rational(Fraction(math.comb(n, n - 2 * m + 1)))


@dataclass(frozen=True)
class SmallMBoundChain:
    """Links of the inequality chain behind the n^(2m-1) lower bound.

    binomial >= comparator * poly_factor holds exactly, and
    poly_factor <= exp_factor instantiates (1-x)^y <= exp(-xy).
    """

    binomial: ExactValue
    comparator: ExactValue
    poly_factor: ExactValue
    exp_factor: float


def small_m_bound_chain(n: int, m: int) -> SmallMBoundChain:
    _check_nm(n, m)
    if n - 2 * m + 1 < 0:
        raise ValueError(f"need n - 2m + 1 >= 0, got n={n}, m={m}")
    y = 2 * m - 1
    binomial = Fraction(math.comb(n, y))
    comparator = Fraction(n ** y, math.factorial(y))
    poly = (1 - Fraction(2 * m - 2, n)) ** y
    exp_factor = math.exp(-(2 * m - 1) * (2 * m - 2) / n)
    return SmallMBoundChain(
        binomial=ExactValue.rational(binomial),
        comparator=ExactValue.rational(comparator),
        poly_factor=ExactValue.rational(poly),
        exp_factor=exp_factor,
    )


def kappa(alpha: Number) -> float:
    """1 / (alpha^alpha (1-alpha)^(1-alpha)), the base of the exponential
    lower bound for valley width alpha*n; exceeds 1 on (0,1)."""
    a = float(alpha)
    if not 0 < a < 1:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    return 1.0 / (a ** a * (1 - a) ** (1 - a))


def lower_bound_linear_m(n: int, alpha: Number) -> ExactValue:
    """Certified finite-n bound C(n, n-m) with m = round(alpha*n); the
    asymptotic statement is exponential with base kappa(alpha)."""
    a = float(alpha)
    if not 0 < a < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    m = round(a * n)
    if m < 2:
        raise ValueError(f"round(alpha*n) = {m} < 2; pick a larger n or alpha")
    return ExactValue.rational(Fraction(math.comb(n, n - m)))


def _log_comb_terms(n: int, m: int) -> LogFloat:
    # n^(2m-1) / (m! * m^(m-2)) computed in the log domain
    log = (2 * m - 1) * MP.log(MP.mpf(n)) - MP.log(MP.factorial(m)) - (m - 2) * MP.log(MP.mpf(m))
    return LogFloat.from_log(log)


def upper_bound_classic(n: int, m: int) -> ExactValue:
    """Comparator magnitude n ln n + n^(2m-1)/(m! m^(m-2)) for the one-bit
    algorithm's runtime; no hidden constant is claimed."""
    _check_nm(n, m)
    nlogn = LogFloat.from_float(n * math.log(n)) if n > 1 else LogFloat.zero()
    return ExactValue.logfloat(nlogn + _log_comb_terms(n, m))


def upper_bound_global(n: int, m: int) -> ExactValue:
    """Comparator n ln n + m * min(e n^m, 8^(m-1) (e n)^(2m-1)/(m! m^(m-1)))
    for the global-mutation variant."""
    _check_nm(n, m)
    nlogn = LogFloat.from_float(n * math.log(n)) if n > 1 else LogFloat.zero()
    branch_a = LogFloat.from_log(1 + m * MP.log(MP.mpf(n)))
    branch_b = LogFloat.from_log(
        (m - 1) * MP.log(MP.mpf(8))
        + (2 * m - 1) * (1 + MP.log(MP.mpf(n)))
        - MP.log(MP.factorial(m))
        - (m - 1) * MP.log(MP.mpf(m))
    )
    best = branch_a if branch_a < branch_b else branch_b
    return ExactValue.logfloat(nlogn + LogFloat.coerce(m) * best)


def path_probability(n: int, m: int, p: Number) -> ExactValue:
    """Probability m! p^(m-1) / n^m of crossing the valley by the straight
    path; lower-bounds the per-phase success probability."""
    _check_nm(n, m)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0,1], got {p}")
    if not isinstance(p, float):
        return ExactValue.rational(Fraction(math.factorial(m)) * Fraction(p) ** (m - 1) / n ** m)
    value = (
        LogFloat.from_fraction(Fraction(math.factorial(m), n ** m))
        * LogFloat.from_float(p) ** (m - 1)
        if p > 0
        else LogFloat.zero()
    )
    return ExactValue.logfloat(value)


def p_interval_8en(n: int, m: int) -> tuple:
    """Rational interval certain to contain m/(8 e n), including its float
    rounding; drift is affine in p, so checking both ends certifies the
    whole interval."""
    _check_nm(n, m)
    return (Fraction(m) / (8 * _E_HI * n), Fraction(m) / (8 * _E_LO * n))


# ----------------------------------------------------------------------
# drift diagnostics


class DistanceKind(Enum):
    ABSOLUTE = "absolute"
    POTENTIAL_ALPHA = "potential"


@dataclass(frozen=True)
class DistanceSpec:
    """Distance to the local-optimum level: absolute value, or the skewed
    potential that weights the valley side by alpha."""

    kind: DistanceKind
    alpha: Optional[Number] = None

    def __post_init__(self):
        if self.kind is DistanceKind.POTENTIAL_ALPHA:
            if self.alpha is None or not self.alpha > 1:
                raise ValueError(f"the potential distance needs alpha > 1, got {self.alpha!r}")
        elif self.alpha is not None:
            raise ValueError("absolute distance takes no alpha")

    @classmethod
    def absolute(cls) -> "DistanceSpec":
        return cls(DistanceKind.ABSOLUTE)

    @classmethod
    def potential_alpha(cls, alpha: Number) -> "DistanceSpec":
        return cls(DistanceKind.POTENTIAL_ALPHA, alpha)

    def value(self, level: int, anchor: int) -> Fraction:
        if self.kind is DistanceKind.ABSOLUTE:
            return Fraction(abs(anchor - level))
        if level <= anchor:
            return Fraction(anchor - level)
        return Fraction(self.alpha) * (level - anchor)


def drift_onestep(
    bench: BenchmarkSpec,
    alg: AlgorithmSpec,
    level: int,
    distance: DistanceSpec,
    chain: Optional[LevelChain] = None,
    backend: Optional[Backend] = None,
) -> ExactValue:
    """Exact one-step drift E[d(now) - d(next) | level] of the chosen
    distance; positive values certify expected progress toward the
    local-optimum level."""
    anchor = local_optimum_level(bench)
    if anchor is None:
        raise ValueError("drift distances are anchored at a local optimum; "
                         "this benchmark has none")
    if chain is None:
        chain = build_level_chain(bench, alg, backend)
    n = chain.n
    if not 0 <= level <= n:
        raise ValueError(f"level must lie in [0, {n}], got {level}")
    d_here = distance.value(level, anchor)
    if chain.backend is Backend.RATIONAL:
        total = Fraction(0)
        if chain.structure is ChainStructure.BIRTH_DEATH:
            targets = [t for t in (level - 1, level + 1) if 0 <= t <= n]
        else:
            targets = [j for j in range(n + 1) if j != level]
        for j in targets:
            q = chain._scalar(level, j)
            if q != 0:
                total += q * (d_here - distance.value(j, anchor))
        return ExactValue.rational(total)
    total = LogFloat.zero()
    if chain.structure is ChainStructure.BIRTH_DEATH:
        targets = [t for t in (level - 1, level + 1) if 0 <= t <= n]
    else:
        targets = [j for j in range(n + 1) if j != level]
    for j in targets:
        q = chain._scalar(level, j)
        if q.sign != 0:
            total = total + q * LogFloat.from_fraction(d_here - distance.value(j, anchor))
    return ExactValue.logfloat(total)


# ----------------------------------------------------------------------
# bound reports


class BoundDirection(Enum):
    LOWER_BOUND = "lower"
    UPPER_BOUND_UP_TO_CONSTANT = "upper-up-to-constant"


@dataclass(frozen=True)
class BoundReport:
    """One bound against the exact quantity it speaks about.

    Lower bounds carry a hard verdict (exact >= value); up-to-constant
    comparators only record the ratio.
    """

    name: str
    n: int
    m: Optional[int]
    p: Optional[Number]
    value: ExactValue
    compared_to: ExactValue
    direction: BoundDirection
    satisfied: bool
    ratio: float


def _ratio(exact: ExactValue, value: ExactValue) -> float:
    if not exact.is_finite:
        return math.inf
    v = value.as_float()
    return exact.as_float() / v if v else math.inf


def make_lower_report(name: str, n: int, m: Optional[int], p, value: ExactValue,
                      exact: ExactValue) -> BoundReport:
    satisfied = (not exact.is_finite) or exact >= value
    return BoundReport(name, n, m, p, value, exact, BoundDirection.LOWER_BOUND,
                       satisfied, _ratio(exact, value))


def make_comparator_report(name: str, n: int, m: Optional[int], p, value: ExactValue,
                           exact: ExactValue) -> BoundReport:
    return BoundReport(name, n, m, p, value, exact,
                       BoundDirection.UPPER_BOUND_UP_TO_CONSTANT,
                       True, _ratio(exact, value))


def _format_p(p) -> str:
    if p is None:
        return ""
    if isinstance(p, Fraction):
        return str(p)
    return repr(p)


def bound_reports_csv(reports: list) -> str:
    lines = ["bound_name,n,m,p,value,exact,satisfied,ratio"]
    for r in reports:
        lines.append(
            f"{r.name},{r.n},{r.m if r.m is not None else ''},{_format_p(r.p)},"
            f"{r.value.decimal_string()},{r.compared_to.decimal_string()},"
            f"{str(r.satisfied).lower()},{r.ratio:.6g}"
        )
    return "\n".join(lines) + "\n"
