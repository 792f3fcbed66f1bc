"""One iteration (and full runs) of the four search heuristics on bit strings.

Each step operator flips bits, evaluates the exact fitness change and applies
the algorithm's acceptance rule.  States carry the level and doubled fitness
as cached integers so the hot loop never touches rationals.  Randomness comes
from counter-based streams addressed by (seed, stream_id), so trials on
distinct streams are independent and any (seed, stream_id, spec) triple
replays bit-identically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from enum import Enum
from typing import Optional, Union

import numpy as np

from .benchmarks import (
    BenchmarkSpec,
    doubled_fitness_table,
    global_optimum_level,
    local_optimum_level,
)

_MASK64 = (1 << 64) - 1


class AlgorithmKind(Enum):
    MAHH = "mahh"
    METROPOLIS = "metropolis"
    ONE_PLUS_ONE_EA = "ea"
    MAHH_GLOBAL = "mahh-global"


class AcceptanceVariant(Enum):
    ONLY_IMPROVING = "oi"
    IMPROVING_AND_EQUAL = "ie"


_MAHH_FAMILY = (AlgorithmKind.MAHH, AlgorithmKind.MAHH_GLOBAL)

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class AlgorithmSpec:
    """Which heuristic to run, plus its parameters.

    ``p`` is the unconditional-acceptance probability of the MAHH family and
    must be absent for the other kinds; ``metropolis_alpha`` is the base of
    the acceptance exponential and must be > 1.  ``acceptance_variant``
    (MAHH family only) defaults to only-improving.
    """

    kind: AlgorithmKind
    p: Optional[Number] = None
    metropolis_alpha: Optional[Number] = None
    acceptance_variant: Optional[AcceptanceVariant] = None

    def __post_init__(self):
        if self.kind in _MAHH_FAMILY:
            if self.p is None:
                raise ValueError(f"{self.kind.value} requires p")
            if not 0 <= self.p <= 1:
                raise ValueError(f"p must lie in [0,1], got {self.p}")
            if self.metropolis_alpha is not None:
                raise ValueError(f"{self.kind.value} does not read metropolis_alpha")
            if self.acceptance_variant is None:
                object.__setattr__(self, "acceptance_variant", AcceptanceVariant.ONLY_IMPROVING)
        elif self.kind is AlgorithmKind.METROPOLIS:
            if self.metropolis_alpha is None or not self.metropolis_alpha > 1:
                raise ValueError(f"metropolis requires alpha > 1, got {self.metropolis_alpha!r}")
            if self.p is not None or self.acceptance_variant is not None:
                raise ValueError("metropolis reads only metropolis_alpha")
        else:  # OnePlusOneEA
            if self.p is not None or self.metropolis_alpha is not None or self.acceptance_variant is not None:
                raise ValueError("ea takes no parameters")


@dataclass(frozen=True, eq=True)
class RngStream:
    """A counter-based random stream addressed by (seed, stream_id).

    Distinct pairs give statistically independent Philox streams; equal pairs
    replay identical sequences.  The underlying generator is materialized
    lazily and advances across step calls on the same stream object.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    @property
    def gen(self) -> np.random.Generator:
        cached = self.__dict__.get("_gen")
        if cached is None:
            seq = np.random.SeedSequence([self.seed, self.stream_id])
            cached = np.random.Generator(np.random.Philox(seq))
            object.__setattr__(self, "_gen", cached)
        return cached

    def derived(self, index: int) -> "RngStream":
        return RngStream(self.seed, (self.stream_id + index) & _MASK64)


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.gen
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"rng must be an RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass
class SearchState:
    """Current solution with cached level and doubled fitness."""

    x: np.ndarray
    level: int
    fitness2: int
    iterations: int = 0

    @property
    def fitness(self) -> Fraction:
        return Fraction(self.fitness2, 2)


@dataclass(frozen=True)
class Init:
    """Start distribution: uniform random string, or a fixed level."""

    level: Optional[int] = None

    @classmethod
    def uniform_random(cls) -> "Init":
        return cls(None)

    @classmethod
    def at_level(cls, level: int) -> "Init":
        return cls(level)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one run: iterations used plus level-trajectory landmarks."""

    seed: int
    stream_id: int
    iterations: int
    hit_optimum: bool
    truncated: bool
    first_hit_local_opt: Optional[int]
    first_hit_global_opt: Optional[int]


def initial_state(bench: BenchmarkSpec, init: Init, rng) -> SearchState:
    n = bench.n
    table = doubled_fitness_table(bench)
    if init.level is None:
        x = _generator(rng).random(n) < 0.5
    else:
        if not 0 <= init.level <= n:
            raise ValueError(f"init level must lie in [0, {n}], got {init.level}")
        x = np.zeros(n, dtype=bool)
        x[: init.level] = True
    level = int(np.count_nonzero(x))
    return SearchState(x, level, int(table[level]), 0)


def _require_kind(alg: AlgorithmSpec, *kinds: AlgorithmKind):
    if alg.kind not in kinds:
        expected = " or ".join(k.value for k in kinds)
        raise ValueError(f"expected a {expected} spec, got {alg.kind.value}")


def _accept_mahh(alg: AlgorithmSpec, delta2: int, gen: np.random.Generator) -> bool:
    if delta2 > 0:
        return True
    if delta2 == 0 and alg.acceptance_variant is AcceptanceVariant.IMPROVING_AND_EQUAL:
        return True
    # Not improving: only the unconditional-acceptance coin can take it.
    return gen.random() < alg.p


def _one_bit_proposal(state: SearchState, table: np.ndarray, gen: np.random.Generator):
    j = int(gen.integers(state.x.shape[0]))
    new_level = state.level + (-1 if state.x[j] else 1)
    return j, new_level, int(table[new_level]) - state.fitness2


def _apply_flip(state: SearchState, table: np.ndarray, j: int, new_level: int) -> SearchState:
    x = state.x.copy()
    x[j] = not x[j]
    return SearchState(x, new_level, int(table[new_level]), state.iterations + 1)


def _reject(state: SearchState) -> SearchState:
    return SearchState(state.x, state.level, state.fitness2, state.iterations + 1)


def mahh_step(state: SearchState, bench: BenchmarkSpec, alg: AlgorithmSpec, rng) -> SearchState:
    """One-bit flip accepted unconditionally with probability p, else only if improving."""
    _require_kind(alg, AlgorithmKind.MAHH)
    gen = _generator(rng)
    table = doubled_fitness_table(bench)
    j, new_level, delta2 = _one_bit_proposal(state, table, gen)
    if _accept_mahh(alg, delta2, gen):
        return _apply_flip(state, table, j, new_level)
    return _reject(state)


def metropolis_step(state: SearchState, bench: BenchmarkSpec, alg: AlgorithmSpec, rng) -> SearchState:
    """One-bit flip; worsenings accepted with probability alpha**delta_f."""
    _require_kind(alg, AlgorithmKind.METROPOLIS)
    gen = _generator(rng)
    table = doubled_fitness_table(bench)
    j, new_level, delta2 = _one_bit_proposal(state, table, gen)
    if delta2 >= 0 or gen.random() < float(alg.metropolis_alpha) ** (delta2 / 2.0):
        return _apply_flip(state, table, j, new_level)
    return _reject(state)


def _global_offspring_level(state: SearchState, gen: np.random.Generator):
    """Sample standard bit mutation; returns (flip positions, offspring level).

    Flipping each bit independently with probability 1/n is sampled as a
    binomial flip count plus a uniform subset, which is the same law.
    """
    n = state.x.shape[0]
    count = int(gen.binomial(n, 1.0 / n))
    if count == 0:
        return None, state.level
    positions = gen.choice(n, size=count, replace=False)
    ones_flipped = int(np.count_nonzero(state.x[positions]))
    return positions, state.level + (count - ones_flipped) - ones_flipped


def _apply_mask(state: SearchState, table: np.ndarray, positions, new_level: int) -> SearchState:
    if positions is None:
        return SearchState(state.x, state.level, state.fitness2, state.iterations + 1)
    x = state.x.copy()
    x[positions] = ~x[positions]
    return SearchState(x, new_level, int(table[new_level]), state.iterations + 1)


def opo_ea_step(state: SearchState, bench: BenchmarkSpec, alg: AlgorithmSpec, rng) -> SearchState:
    """Standard bit mutation; offspring kept iff its fitness is >= the parent's."""
    _require_kind(alg, AlgorithmKind.ONE_PLUS_ONE_EA)
    gen = _generator(rng)
    table = doubled_fitness_table(bench)
    positions, new_level = _global_offspring_level(state, gen)
    if int(table[new_level]) - state.fitness2 >= 0:
        return _apply_mask(state, table, positions, new_level)
    return _reject(state)


def mahh_global_step(state: SearchState, bench: BenchmarkSpec, alg: AlgorithmSpec, rng) -> SearchState:
    """Standard bit mutation with the MAHH acceptance rule."""
    _require_kind(alg, AlgorithmKind.MAHH_GLOBAL)
    gen = _generator(rng)
    table = doubled_fitness_table(bench)
    positions, new_level = _global_offspring_level(state, gen)
    if _accept_mahh(alg, int(table[new_level]) - state.fitness2, gen):
        return _apply_mask(state, table, positions, new_level)
    return _reject(state)


_STEP_FUNCTIONS = {
    AlgorithmKind.MAHH: mahh_step,
    AlgorithmKind.METROPOLIS: metropolis_step,
    AlgorithmKind.ONE_PLUS_ONE_EA: opo_ea_step,
    AlgorithmKind.MAHH_GLOBAL: mahh_global_step,
}


def step_once(state: SearchState, bench: BenchmarkSpec, alg: AlgorithmSpec, rng) -> SearchState:
    return _STEP_FUNCTIONS[alg.kind](state, bench, alg, rng)


_BLOCK = 4096


def run_until_optimum(
    bench: BenchmarkSpec,
    alg: AlgorithmSpec,
    rng: RngStream,
    max_iters: int,
    init: Init = Init(),
) -> TrialRecord:
    """Iterate the algorithm until the global optimum is current or the
    budget runs out.  The initial solution costs 0 iterations; a run that
    starts at the optimum reports runtime 0.

    Randomness is drawn in blocks for speed; one-step semantics match the
    step operators exactly, trajectory law included.
    """
    if max_iters <= 0:
        raise ValueError("max_iters must be positive")
    gen = _generator(rng)
    n = bench.n
    tab = doubled_fitness_table(bench)
    local = local_optimum_level(bench)
    state = initial_state(bench, init, rng)
    x = state.x
    level = state.level
    f2 = int(tab[level])
    iters = 0
    first_local = 0 if (local is not None and level == local) else None
    first_global = 0 if level == n else None
    one_bit = alg.kind in (AlgorithmKind.MAHH, AlgorithmKind.METROPOLIS)
    is_metropolis = alg.kind is AlgorithmKind.METROPOLIS
    is_ea = alg.kind is AlgorithmKind.ONE_PLUS_ONE_EA
    p = float(alg.p) if alg.p is not None else 0.0
    alpha = float(alg.metropolis_alpha) if is_metropolis else 0.0
    ie = alg.acceptance_variant is AcceptanceVariant.IMPROVING_AND_EQUAL
    while first_global is None and iters < max_iters:
        steps = min(_BLOCK, max_iters - iters)
        coin = gen.random(steps)
        if one_bit:
            idx = gen.integers(0, n, size=steps)
            for t in range(steps):
                j = idx[t]
                nl = level - 1 if x[j] else level + 1
                d2 = int(tab[nl]) - f2
                if is_metropolis:
                    ok = d2 >= 0 or coin[t] < alpha ** (d2 / 2.0)
                else:
                    ok = d2 > 0 or (d2 == 0 and ie) or coin[t] < p
                if ok:
                    x[j] = not x[j]
                    level = nl
                    f2 = int(tab[nl])
                iters += 1
                if first_local is None and level == local:
                    first_local = iters
                if level == n:
                    first_global = iters
                    break
        else:
            counts = gen.binomial(n, 1.0 / n, size=steps)
            single = gen.integers(0, n, size=steps)
            for t in range(steps):
                k = int(counts[t])
                if k == 0:
                    # offspring equals parent; acceptance cannot change it
                    iters += 1
                    continue
                if k == 1:
                    positions = single[t]
                    ones = 1 if x[positions] else 0
                else:
                    positions = gen.choice(n, size=k, replace=False)
                    ones = int(np.count_nonzero(x[positions]))
                nl = level + k - 2 * ones
                d2 = int(tab[nl]) - f2
                if is_ea:
                    ok = d2 >= 0
                else:
                    ok = d2 > 0 or (d2 == 0 and ie) or coin[t] < p
                if ok:
                    if k == 1:
                        x[positions] = not x[positions]
                    else:
                        x[positions] = ~x[positions]
                    level = nl
                    f2 = int(tab[nl])
                iters += 1
                if first_local is None and level == local:
                    first_local = iters
                if level == n:
                    first_global = iters
                    break
    hit = first_global is not None
    seed, stream_id = (rng.seed, rng.stream_id) if isinstance(rng, RngStream) else (0, 0)
    return TrialRecord(
        seed=seed,
        stream_id=stream_id,
        iterations=first_global if hit else max_iters,
        hit_optimum=hit,
        truncated=not hit,
        first_hit_local_opt=first_local,
        first_hit_global_opt=first_global,
    )


# ----------------------------------------------------------------------
# serialization: mahh:p=<p>[,acc=oi|ie] | metropolis:alpha=<a> | ea |
#                mahh-global:p=<p>[,acc=oi|ie]

_P_SYMBOLIC_8EN = re.compile(r"^m/\(8en\)$")
_P_SYMBOLIC_MN = re.compile(r"^m/n$")
_P_SYMBOLIC_EPS = re.compile(r"^1/\(\(1\+eps\)n\)$")


def resolve_p(text: str, n: Optional[int] = None, bench_param: Optional[int] = None,
              eps: Optional[Number] = None) -> Number:
    """Resolve a p expression: a literal number, or one of the symbolic forms
    m/n, m/(8en), 1/((1+eps)n) evaluated for the given n and benchmark width."""
    text = text.strip()
    if _P_SYMBOLIC_MN.match(text):
        if n is None or bench_param is None:
            raise ValueError("p=m/n needs a dimension and a benchmark width to resolve")
        return Fraction(bench_param, n)
    if _P_SYMBOLIC_8EN.match(text):
        if n is None or bench_param is None:
            raise ValueError("p=m/(8en) needs a dimension and a benchmark width to resolve")
        import math

        return bench_param / (8.0 * math.e * n)
    if _P_SYMBOLIC_EPS.match(text):
        if n is None:
            raise ValueError("p=1/((1+eps)n) needs a dimension to resolve")
        if eps is None:
            raise ValueError("p=1/((1+eps)n) needs eps=<value>")
        return Fraction(1, 1) / ((1 + Fraction(str(eps))) * n)
    try:
        return Fraction(text)
    except ValueError:
        raise ValueError(f"cannot parse p value {text!r}") from None


def format_algorithm(alg: AlgorithmSpec) -> str:
    if alg.kind is AlgorithmKind.ONE_PLUS_ONE_EA:
        return "ea"
    if alg.kind is AlgorithmKind.METROPOLIS:
        return f"metropolis:alpha={_format_number(alg.metropolis_alpha)}"
    base = f"{alg.kind.value}:p={_format_number(alg.p)}"
    if alg.acceptance_variant is AcceptanceVariant.IMPROVING_AND_EQUAL:
        base += ",acc=ie"
    return base


def _format_number(value: Number) -> str:
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    return repr(value)


def parse_algorithm(text: str, n: Optional[int] = None, bench_param: Optional[int] = None) -> AlgorithmSpec:
    """Parse an algorithm spec string; symbolic p forms resolve against n and
    the benchmark width when given."""
    text = text.strip().lower()
    if text == "ea":
        return AlgorithmSpec(AlgorithmKind.ONE_PLUS_ONE_EA)
    name, _, rest = text.partition(":")
    fields = {}
    if rest:
        for part in rest.split(","):
            if "=" not in part:
                raise ValueError(f"malformed field {part!r} in algorithm spec {text!r}")
            key, _, value = part.partition("=")
            fields[key.strip()] = value.strip()
    if name == "metropolis":
        alpha = fields.pop("alpha", None)
        if alpha is None:
            raise ValueError(f"metropolis spec {text!r} is missing alpha=")
        if fields:
            raise ValueError(f"unexpected field(s) {sorted(fields)} in {text!r}")
        try:
            alpha_value: Number = Fraction(alpha)
        except ValueError:
            raise ValueError(f"cannot parse alpha value {alpha!r}") from None
        return AlgorithmSpec(AlgorithmKind.METROPOLIS, metropolis_alpha=alpha_value)
    if name in ("mahh", "mahh-global"):
        p_text = fields.pop("p", None)
        if p_text is None:
            raise ValueError(f"{name} spec {text!r} is missing p=")
        eps = fields.pop("eps", None)
        variant = None
        if "acc" in fields:
            acc = fields.pop("acc")
            try:
                variant = AcceptanceVariant(acc)
            except ValueError:
                raise ValueError(f"acc must be oi or ie, got {acc!r}") from None
        if fields:
            raise ValueError(f"unexpected field(s) {sorted(fields)} in {text!r}")
        p = resolve_p(p_text, n=n, bench_param=bench_param, eps=eps)
        if not 0 <= p <= 1:
            raise ValueError(f"p must lie in [0,1], got {p} from {p_text!r}")
        kind = AlgorithmKind.MAHH if name == "mahh" else AlgorithmKind.MAHH_GLOBAL
        return AlgorithmSpec(kind, p=p, acceptance_variant=variant)
    raise ValueError(
        f"unrecognized algorithm spec {text!r}; expected mahh:p=<p>[,acc=oi|ie], "
        "metropolis:alpha=<a>, ea or mahh-global:p=<p>[,acc=oi|ie]"
    )
