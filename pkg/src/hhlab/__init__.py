"""Runtime-analysis laboratory for randomized search heuristics.

Exact level-chain engines, closed-form runtime expressions, drift
diagnostics and seeded Monte Carlo experiments for MAHH, Metropolis and
(1+1) EA style algorithms on the OneMax, Cliff and Jump benchmarks.
"""

from .values import Backend, ExactValue, LogFloat, relative_difference
from .benchmarks import (
    BenchmarkKind,
    BenchmarkSpec,
    evaluate,
    format_benchmark,
    global_optimum_level,
    level_fitness,
    local_optimum_level,
    parse_benchmark,
)
from .heuristics import (
    AcceptanceVariant,
    AlgorithmKind,
    AlgorithmSpec,
    Init,
    RngStream,
    SearchState,
    TrialRecord,
    format_algorithm,
    initial_state,
    mahh_global_step,
    mahh_step,
    metropolis_step,
    opo_ea_step,
    parse_algorithm,
    run_until_optimum,
    step_once,
)
from .chain import (
    ChainStructure,
    LevelChain,
    absorbing_expected_time,
    absorption_times_all,
    build_level_chain,
    expected_runtime_exact,
    format_chain_matrix,
    hitting_time_closed_form,
    hitting_time_recurrence,
    hitting_times_csv,
    mutation_level_kernel,
    uniform_start,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
