"""Exact level-space Markov chains and expected hitting times.

The level of a solution (its number of one-bits) is a Markov chain under
every algorithm here, because the benchmark fitness and the mutation law
depend on the solution only through its level.  One-bit algorithms give
birth-death chains; standard bit mutation gives dense chains whose rows
come from the exact level kernel of the mutation operator.

Expected times to absorption at level n are computed three ways: a forward
recurrence over per-level upstep times, the equivalent closed-form sum
(both birth-death only), and a general absorbing-chain solve.  The solver
uses state elimination with subtraction-free pivots, so it is exact over
rationals and forward-stable in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from .values import MP, Backend, ExactValue, LogFloat
from .benchmarks import BenchmarkSpec, BenchmarkKind, doubled_fitness_table
from .heuristics import AcceptanceVariant, AlgorithmKind, AlgorithmSpec, Init

Scalar = Union[Fraction, LogFloat]

_ROW_SUM_TOL = 1e-12


class ChainStructure(Enum):
    BIRTH_DEATH = "birth-death"
    DENSE = "dense"


def _is_zero(value: Scalar) -> bool:
    if isinstance(value, LogFloat):
        return value.sign == 0
    return value == 0


def _zero(backend: Backend) -> Scalar:
    return LogFloat.zero() if backend is Backend.LOGFLOAT else Fraction(0)


def _one(backend: Backend) -> Scalar:
    return LogFloat.one() if backend is Backend.LOGFLOAT else Fraction(1)


def _lift(backend: Backend, value) -> Scalar:
    if backend is Backend.LOGFLOAT:
        return LogFloat.coerce(value)
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(value)


@dataclass(eq=False)
class LevelChain:
    """Transition structure of the level process, absorbing at level n.

    Birth-death chains store per-level up/down probabilities; dense chains
    store full rows (exact rationals, or float64 log-probabilities for the
    logfloat backend).  Row n is pinned to the identity.
    """

    bench: BenchmarkSpec
    alg: AlgorithmSpec
    backend: Backend
    structure: ChainStructure
    n: int
    up: Optional[list] = None
    down: Optional[list] = None
    rows: Optional[list] = None
    log_rows: Optional[np.ndarray] = None
    _float_rows: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def absorbing(self) -> frozenset:
        return frozenset({self.n})

    def _scalar(self, i: int, j: int) -> Scalar:
        n = self.n
        if not (0 <= i <= n and 0 <= j <= n):
            raise ValueError(f"levels must lie in [0, {n}], got ({i}, {j})")
        if i == n:
            return _one(self.backend) if j == n else _zero(self.backend)
        if self.structure is ChainStructure.BIRTH_DEATH:
            if j == i + 1:
                return self.up[i]
            if j == i - 1:
                return self.down[i]
            if j == i:
                return self._stay(i)
            return _zero(self.backend)
        if self.rows is not None:
            return self.rows[i][j]
        log_q = float(self.log_rows[i, j])
        return LogFloat.zero() if log_q == -math.inf else LogFloat.from_log(MP.mpf(log_q))

    def _stay(self, i: int) -> Scalar:
        up = self.up[i]
        down = self.down[i]
        if self.backend is Backend.RATIONAL:
            return Fraction(1) - up - down
        return LogFloat.one() - up - down

    def trans(self, i: int, j: int) -> ExactValue:
        return ExactValue.wrap(self.backend, self._scalar(i, j))

    def row(self, i: int) -> list:
        return [self.trans(i, j) for j in range(self.n + 1)]

    def float_rows(self) -> np.ndarray:
        """Row-stochastic float64 matrix, renormalized for simulation use."""
        if self._float_rows is None:
            n = self.n
            if self.log_rows is not None:
                mat = np.exp(self.log_rows)
            elif self.rows is not None:
                mat = np.array([[float(q) for q in row] for row in self.rows])
            else:
                mat = np.zeros((n + 1, n + 1))
                for i in range(n):
                    mat[i, i] = float(self._stay(i))
                    if i + 1 <= n:
                        mat[i, i + 1] = float(self.up[i])
                    if i - 1 >= 0:
                        mat[i, i - 1] = float(self.down[i])
                mat[n, n] = 1.0
            mat /= mat.sum(axis=1, keepdims=True)
            mat.flags.writeable = False
            self._float_rows = mat
        return self._float_rows


# ----------------------------------------------------------------------
# level kernel of standard bit mutation


@lru_cache(maxsize=None)
def _kernel_numerators(n: int) -> tuple:
    """Integer numerators of the level kernel over the denominator n^n.

    entry[i][j] = sum over flip splits (a up-flips, b down-flips) with
    a - b = j - i of C(n-i, a) * C(i, b) * (n-1)^(n-a-b).
    """
    powers = [(n - 1) ** t for t in range(n + 1)]
    table = []
    for i in range(n + 1):
        row = [0] * (n + 1)
        for a in range(n - i + 1):
            ca = math.comb(n - i, a)
            for b in range(i + 1):
                row[i + a - b] += ca * math.comb(i, b) * powers[n - a - b]
        table.append(tuple(row))
    return tuple(table)


def mutation_level_kernel(n: int, i: int, j: int) -> ExactValue:
    """Exact probability that standard bit mutation moves level i to level j."""
    if not (0 <= i <= n and 0 <= j <= n):
        raise ValueError(f"levels must lie in [0, {n}], got ({i}, {j})")
    if n <= 64:
        num = _kernel_numerators(n)[i][j]
        return ExactValue.rational(Fraction(num, n ** n))
    total = 0
    for a in range(max(0, j - i), n - i + 1):
        b = a - (j - i)
        if b > i:
            break
        total += math.comb(n - i, a) * math.comb(i, b) * (n - 1) ** (n - a - b)
    return ExactValue.rational(Fraction(total, n ** n))


@lru_cache(maxsize=None)
def _log_kernel_matrix(n: int) -> np.ndarray:
    """Level kernel as float64 log-probabilities, shape (n+1, n+1)."""
    if n == 1:
        mat = np.array([[-np.inf, 0.0], [0.0, -np.inf]])
        mat.flags.writeable = False
        return mat
    lgfact = gammaln(np.arange(n + 1) + 1.0)
    log_p = -math.log(n)
    log_q = math.log(n - 1) - math.log(n)
    out = np.empty((n + 1, n + 1))
    for i in range(n + 1):
        a = np.arange(n - i + 1)
        b = np.arange(i + 1)
        log_ca = lgfact[n - i] - lgfact[a] - lgfact[n - i - a]
        log_cb = lgfact[i] - lgfact[b] - lgfact[i - b]
        flips = a[:, None] + b[None, :]
        term = log_ca[:, None] + log_cb[None, :] + flips * log_p + (n - flips) * log_q
        shifted = np.full((n - i + 1, n + 1), -np.inf)
        for ai in range(n - i + 1):
            # b runs 0..i, landing level j = i + ai - b, a contiguous slice
            shifted[ai, ai : i + ai + 1] = term[ai, ::-1]
        out[i] = logsumexp(shifted, axis=0)
    out.flags.writeable = False
    return out


# ----------------------------------------------------------------------
# chain construction


def _acceptance_exact(alg: AlgorithmSpec, delta2: int) -> Fraction:
    """Exact acceptance probability for a proposed fitness change of delta2/2."""
    if alg.kind is AlgorithmKind.ONE_PLUS_ONE_EA:
        return Fraction(1) if delta2 >= 0 else Fraction(0)
    if alg.kind is AlgorithmKind.METROPOLIS:
        if delta2 >= 0:
            return Fraction(1)
        if delta2 % 2 != 0:
            raise ValueError(
                "metropolis acceptance is irrational on half-integer fitness gaps; "
                "use the logfloat backend"
            )
        return Fraction(alg.metropolis_alpha) ** (delta2 // 2)
    if delta2 > 0:
        return Fraction(1)
    if delta2 == 0 and alg.acceptance_variant is AcceptanceVariant.IMPROVING_AND_EQUAL:
        return Fraction(1)
    return Fraction(alg.p)


def _acceptance_log(alg: AlgorithmSpec, delta2: int) -> float:
    """log acceptance probability (float64), -inf for never."""
    if alg.kind is AlgorithmKind.ONE_PLUS_ONE_EA:
        return 0.0 if delta2 >= 0 else -math.inf
    if alg.kind is AlgorithmKind.METROPOLIS:
        if delta2 >= 0:
            return 0.0
        return (delta2 / 2.0) * math.log(float(alg.metropolis_alpha))
    if delta2 > 0:
        return 0.0
    if delta2 == 0 and alg.acceptance_variant is AcceptanceVariant.IMPROVING_AND_EQUAL:
        return 0.0
    p = float(alg.p)
    return math.log(p) if p > 0 else -math.inf


def _rational_params(alg: AlgorithmSpec) -> bool:
    for value in (alg.p, alg.metropolis_alpha):
        if isinstance(value, float):
            return False
    return True


def _auto_backend(bench: BenchmarkSpec, alg: AlgorithmSpec) -> Backend:
    if alg.kind is AlgorithmKind.METROPOLIS and bench.kind is BenchmarkKind.CLIFF:
        return Backend.LOGFLOAT
    if bench.n <= 64 and _rational_params(alg):
        return Backend.RATIONAL
    return Backend.LOGFLOAT


@lru_cache(maxsize=128)
def build_level_chain(
    bench: BenchmarkSpec, alg: AlgorithmSpec, backend: Optional[Backend] = None
) -> LevelChain:
    """Exact one-iteration level chain of the algorithm on the benchmark.

    One-bit algorithms give birth-death chains with raw proposal rates
    (n-i)/n up and i/n down; global mutation gives dense chains built from
    the mutation level kernel.  Either way the proposal is damped by the
    acceptance probability and the rejected mass stays put.  The backend
    defaults to exact rationals for n <= 64 and rational parameters, log
    floats otherwise.  Chains are cached and must be treated as immutable.
    """
    if backend is None:
        backend = _auto_backend(bench, alg)
    n = bench.n
    fit2 = doubled_fitness_table(bench)
    one_bit = alg.kind in (AlgorithmKind.MAHH, AlgorithmKind.METROPOLIS)
    if one_bit:
        up = [_zero(backend)] * (n + 1)
        down = [_zero(backend)] * (n + 1)
        for i in range(n):
            up[i] = _bd_rate(backend, alg, n - i, n, int(fit2[i + 1]) - int(fit2[i]))
        for i in range(1, n):
            down[i] = _bd_rate(backend, alg, i, n, int(fit2[i - 1]) - int(fit2[i]))
        return LevelChain(bench, alg, backend, ChainStructure.BIRTH_DEATH, n, up=up, down=down)
    if backend is Backend.RATIONAL:
        rows = _dense_rows_rational(bench, alg)
        return LevelChain(bench, alg, backend, ChainStructure.DENSE, n, rows=rows)
    log_rows = _dense_rows_log(bench, alg)
    return LevelChain(bench, alg, backend, ChainStructure.DENSE, n, log_rows=log_rows)


def _bd_rate(backend: Backend, alg: AlgorithmSpec, numer: int, n: int, delta2: int) -> Scalar:
    if backend is Backend.RATIONAL:
        return Fraction(numer, n) * _acceptance_exact(alg, delta2)
    proposal = LogFloat.from_fraction(Fraction(numer, n))
    log_acc = _acceptance_log(alg, delta2)
    if log_acc == -math.inf:
        return LogFloat.zero()
    if log_acc == 0.0:
        return proposal
    if alg.kind is AlgorithmKind.METROPOLIS:
        # recompute the exponent at working precision; float64 log is not enough
        alpha = alg.metropolis_alpha
        if isinstance(alpha, Fraction):
            log_alpha = MP.log(MP.mpf(alpha.numerator)) - MP.log(MP.mpf(alpha.denominator))
        else:
            log_alpha = MP.log(MP.mpf(alpha))
        return proposal * LogFloat.from_log(MP.mpf(delta2) / 2 * log_alpha)
    return proposal * LogFloat.coerce(alg.p)


def _dense_rows_rational(bench: BenchmarkSpec, alg: AlgorithmSpec) -> list:
    n = bench.n
    fit2 = doubled_fitness_table(bench)
    kernel = _kernel_numerators(n)
    denom = n ** n
    rows = []
    for i in range(n):
        row = [Fraction(0)] * (n + 1)
        stay_num = Fraction(kernel[i][i], denom)
        for j in range(n + 1):
            if j == i:
                continue
            mass = Fraction(kernel[i][j], denom)
            acc = _acceptance_exact(alg, int(fit2[j]) - int(fit2[i]))
            row[j] = mass * acc
            stay_num += mass * (1 - acc)
        row[i] = stay_num
        assert sum(row) == 1
        rows.append(row)
    last = [Fraction(0)] * (n + 1)
    last[n] = Fraction(1)
    rows.append(last)
    return rows


def _dense_rows_log(bench: BenchmarkSpec, alg: AlgorithmSpec) -> np.ndarray:
    n = bench.n
    fit2 = doubled_fitness_table(bench)
    kernel = _log_kernel_matrix(n)
    out = np.full((n + 1, n + 1), -np.inf)
    for i in range(n):
        log_acc = np.array([_acceptance_log(alg, int(fit2[j]) - int(fit2[i])) for j in range(n + 1)])
        log_acc[i] = 0.0
        moved = kernel[i] + log_acc
        with np.errstate(divide="ignore"):
            log_reject = np.log1p(-np.exp(np.minimum(log_acc, 0.0)))
        log_reject[i] = -np.inf
        rejected = kernel[i] + log_reject
        stay = logsumexp(np.append(rejected, moved[i]))
        row = moved.copy()
        row[i] = stay
        total = logsumexp(row)
        if abs(total) > _ROW_SUM_TOL:
            raise ArithmeticError(f"chain row {i} sums to exp({total}), outside tolerance")
        out[i] = row - total
    out[n, n] = 0.0
    out.flags.writeable = False
    return out


# ----------------------------------------------------------------------
# hitting-time engines


def hitting_time_recurrence(chain: LevelChain) -> list:
    """Expected per-level upstep times E[T_i+], i = 0..n-1, by forward recurrence.

    T_i+ is the time to first reach level i+1 from level i.  An upstep
    probability of zero makes that level's time infinite, and infinity
    propagates upward only through levels that can actually fall back down.
    """
    if chain.structure is not ChainStructure.BIRTH_DEATH:
        raise ValueError("the upstep recurrence needs a birth-death chain")
    backend = chain.backend
    one = _one(backend)
    times = []
    prev = None
    prev_infinite = False
    for i in range(chain.n):
        up = chain.up[i]
        down = chain.down[i]
        if _is_zero(up) or (prev_infinite and not _is_zero(down)):
            times.append(ExactValue.infinity(backend))
            prev_infinite = True
            prev = None
            continue
        total = one / up
        if prev is not None and not _is_zero(down):
            total = total + (down / up) * prev
        times.append(ExactValue.wrap(backend, total))
        prev = total
        prev_infinite = False
    return times


def hitting_time_closed_form(chain: LevelChain, i: int) -> ExactValue:
    """E[T_i+] as the closed-form sum over return paths.

    Equals sum over k <= i of (1/up_k) times the product over l in (k, i]
    of down_l/up_l; evaluated from k = i downward so the product telescopes.
    """
    if chain.structure is not ChainStructure.BIRTH_DEATH:
        raise ValueError("the closed form needs a birth-death chain")
    if not 0 <= i < chain.n:
        raise ValueError(f"level must lie in [0, {chain.n - 1}], got {i}")
    backend = chain.backend
    one = _one(backend)
    total = _zero(backend)
    prod = one
    for k in range(i, -1, -1):
        up = chain.up[k]
        if _is_zero(up):
            if _is_zero(prod):
                break
            return ExactValue.infinity(backend)
        total = total + prod / up
        if _is_zero(chain.down[k]):
            break
        prod = prod * (chain.down[k] / up)
    return ExactValue.wrap(backend, total)


def _nonzero_targets(chain: LevelChain, i: int) -> list:
    n = chain.n
    if i == n:
        return [n]
    if chain.structure is ChainStructure.BIRTH_DEATH:
        targets = [i]
        if i > 0 and not _is_zero(chain.down[i]):
            targets.append(i - 1)
        if not _is_zero(chain.up[i]):
            targets.append(i + 1)
        return targets
    if chain.rows is not None:
        return [j for j, q in enumerate(chain.rows[i]) if q != 0]
    return [j for j in range(n + 1) if chain.log_rows[i, j] != -np.inf]


def _reachability(chain: LevelChain, support: list) -> tuple:
    """Forward closure of the start support, and whether all of it reaches n."""
    n = chain.n
    seen = set(support)
    frontier = list(support)
    while frontier:
        i = frontier.pop()
        for j in _nonzero_targets(chain, i):
            if j not in seen:
                seen.add(j)
                frontier.append(j)
    preds = {i: set() for i in range(n + 1)}
    for i in sorted(seen):
        for j in _nonzero_targets(chain, i):
            if i != j:
                preds[j].add(i)
    can_reach = {n}
    frontier = [n]
    while frontier:
        j = frontier.pop()
        for i in preds[j]:
            if i not in can_reach:
                can_reach.add(i)
                frontier.append(i)
    return seen, seen <= can_reach


def _gth_solve_scalar(chain: LevelChain, transient: list) -> dict:
    """Expected absorption times over the given transient levels, by state
    elimination with subtraction-free pivots.  Exact over rationals."""
    backend = chain.backend
    zero = _zero(backend)
    one = _one(backend)
    n = chain.n
    rows = {}
    absorb = {}
    for i in transient:
        row = {}
        a = zero
        for j in _nonzero_targets(chain, i):
            q = chain._scalar(i, j)
            if j == n:
                a = a + q
            else:
                row[j] = q
        rows[i] = row
        absorb[i] = a
    c = {i: one for i in transient}
    preds = {i: set() for i in transient}
    for i, row in rows.items():
        for j in row:
            if j != i:
                preds[j].add(i)
    recorded = []
    for s in sorted(transient, reverse=True):
        row_s = rows.pop(s)
        row_s.pop(s, None)
        piv = absorb[s]
        for q in row_s.values():
            piv = piv + q
        for i in preds[s]:
            if i not in rows:
                continue
            q_is = rows[i].pop(s, None)
            if q_is is None or _is_zero(q_is):
                continue
            f = q_is / piv
            c[i] = c[i] + f * c[s]
            absorb[i] = absorb[i] + f * absorb[s]
            target = rows[i]
            for j, q in row_s.items():
                target[j] = target.get(j, zero) + f * q
                if j != i:
                    preds[j].add(i)
        recorded.append((s, piv, c[s], row_s))
    h = {}
    for s, piv, cs, row_s in reversed(recorded):
        total = cs
        for j, q in row_s.items():
            total = total + q * h[j]
        h[s] = total / piv
    return h


def _gth_solve_numpy(mat: np.ndarray, transient: list, n: int) -> Optional[np.ndarray]:
    """float64 variant of the same elimination; returns None if it degrades."""
    k = len(transient)
    index = {lvl: t for t, lvl in enumerate(transient)}
    q = np.zeros((k, k))
    a = np.zeros(k)
    for t, lvl in enumerate(transient):
        row = mat[lvl]
        a[t] = row[n]
        for u, lvl2 in enumerate(transient):
            q[t, u] = row[lvl2]
    c = np.ones(k)
    piv = np.empty(k)
    for s in range(k - 1, -1, -1):
        piv[s] = a[s] + q[s, :s].sum()
        if not np.isfinite(piv[s]) or piv[s] <= 0:
            return None
        f = q[:s, s] / piv[s]
        c[:s] += f * c[s]
        a[:s] += f * a[s]
        q[:s, :s] += np.outer(f, q[s, :s])
    h = np.empty(k)
    for s in range(k):
        h[s] = (c[s] + q[s, :s] @ h[:s]) / piv[s]
    if not np.all(np.isfinite(h)):
        return None
    return h


def absorbing_expected_time(chain: LevelChain, start) -> ExactValue:
    """Expected iterations to absorption at level n from a start distribution.

    `start` maps levels to weights summing to one.  If any positive-weight
    level can reach a region from which n is unreachable, the expectation
    is infinite and the infinity flag is returned.
    """
    backend = chain.backend
    n = chain.n
    weights = dict(start)
    total = sum(float(w) for w in weights.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"start weights must sum to 1, got {total}")
    support = [i for i, w in weights.items() if float(w) != 0.0]
    for i in support:
        if not 0 <= i <= n:
            raise ValueError(f"start level {i} outside [0, {n}]")
    if all(i == n for i in support):
        return ExactValue.wrap(backend, _zero(backend))
    reach, absorbable = _reachability(chain, support)
    if not absorbable:
        return ExactValue.infinity(backend)
    transient = sorted(i for i in reach if i != n)
    h = None
    if backend is Backend.LOGFLOAT and chain.structure is ChainStructure.DENSE:
        hv = _gth_solve_numpy(chain.float_rows(), transient, n)
        if hv is not None:
            h = {lvl: LogFloat.from_float(float(v)) if v > 0 else LogFloat.zero()
                 for lvl, v in zip(transient, hv)}
    if h is None:
        h = _gth_solve_scalar(chain, transient)
    acc = _zero(backend)
    for i, w in weights.items():
        if i == n:
            continue
        lifted = _lift(backend, w)
        if _is_zero(lifted):
            continue
        acc = acc + lifted * h[i]
    return ExactValue.wrap(backend, acc)


def uniform_start(n: int) -> dict:
    """Level law of a uniform random bit string: Binomial(n, 1/2)."""
    denom = 2 ** n
    return {i: Fraction(math.comb(n, i), denom) for i in range(n + 1)}


@lru_cache(maxsize=512)
def expected_runtime_exact(
    bench: BenchmarkSpec,
    alg: AlgorithmSpec,
    init: Init = Init(),
    backend: Optional[Backend] = None,
) -> ExactValue:
    """Exact expected runtime: absorbing solve from the initial level law."""
    chain = build_level_chain(bench, alg, backend)
    if init.level is None:
        start = uniform_start(bench.n)
    else:
        if not 0 <= init.level <= bench.n:
            raise ValueError(f"init level must lie in [0, {bench.n}], got {init.level}")
        start = {init.level: Fraction(1)}
    return absorbing_expected_time(chain, start)


# ----------------------------------------------------------------------
# text export


def format_chain_matrix(chain: LevelChain) -> str:
    """Chain as text, one row per level: exact fractions or decimal strings."""
    lines = []
    for i in range(chain.n + 1):
        lines.append(" ".join(entry.exact_string() for entry in chain.row(i)))
    return "\n".join(lines) + "\n"


def absorption_times_all(chain: LevelChain) -> dict:
    """Expected absorption time from every level; None marks infinite ones.

    A level has finite expectation iff no trap (a region that cannot reach
    n) is reachable from it; those levels form a forward-closed set and are
    solved together in one elimination.
    """
    n = chain.n
    preds = {i: set() for i in range(n + 1)}
    for i in range(n + 1):
        for j in _nonzero_targets(chain, i):
            if i != j:
                preds[j].add(i)
    can_reach = {n}
    frontier = [n]
    while frontier:
        j = frontier.pop()
        for i in preds[j]:
            if i not in can_reach:
                can_reach.add(i)
                frontier.append(i)
    bad = set(range(n + 1)) - can_reach
    doomed = set(bad)
    frontier = list(bad)
    while frontier:
        j = frontier.pop()
        for i in preds[j]:
            if i not in doomed:
                doomed.add(i)
                frontier.append(i)
    finite = sorted(set(range(n + 1)) - doomed)
    transient = [i for i in finite if i != n]
    h = None
    if transient:
        if chain.backend is Backend.LOGFLOAT and chain.structure is ChainStructure.DENSE:
            hv = _gth_solve_numpy(chain.float_rows(), transient, n)
            if hv is not None:
                h = {lvl: LogFloat.from_float(float(v)) if v > 0 else LogFloat.zero()
                     for lvl, v in zip(transient, hv)}
        if h is None:
            h = _gth_solve_scalar(chain, transient)
    out = {n: _zero(chain.backend)}
    for i in range(n):
        out[i] = h[i] if h is not None and i in h else None
    return out


def hitting_times_csv(chain: LevelChain) -> str:
    """CSV `level,expected_time` of expected absorption times from each level."""
    lines = ["level,expected_time"]
    times = absorption_times_all(chain)
    for i in range(chain.n + 1):
        value = times[i]
        if value is None:
            lines.append(f"{i},inf")
        else:
            lines.append(f"{i},{ExactValue.wrap(chain.backend, value).exact_string()}")
    return "\n".join(lines) + "\n"
