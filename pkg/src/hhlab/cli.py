"""Command-line front end: config parsing, orchestration, CSV/JSON output.

Every command reads an ExperimentConfig (from a YAML/JSON file, inline
flags, or both; flags win) and emits one deterministic table.  Outputs are
byte-reproducible from (config, seed): stable row order, stable float
formatting, no timestamps.  Infinite exact results are legitimate findings
and render as `inf` rows with exit status 0.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import yaml

from .values import ExactValue
from .benchmarks import BenchmarkSpec, BenchmarkKind, parse_benchmark, format_benchmark
from .heuristics import (
    AlgorithmKind,
    AlgorithmSpec,
    Init,
    format_algorithm,
    parse_algorithm,
)
from .chain import expected_runtime_exact
from . import theory
from . import runner


class Mode(Enum):
    EXACT = "exact"
    SIMULATE = "simulate"
    BOUNDS = "bounds"
    SCALING = "scaling"
    PHASES = "phases"
    COMPARE = "compare"


@dataclass
class ExperimentConfig:
    mode: Mode
    benchmark: str
    algorithms: list
    n_grid: list = field(default_factory=list)
    init: Init = Init()
    trials: int = 1000
    max_iters: Optional[int] = None
    seed: int = 0
    output: Optional[str] = None
    fmt: str = "csv"
    threads: Optional[int] = None


class ConfigError(ValueError):
    pass


_KNOWN_KEYS = {
    "mode", "benchmark", "algorithm", "n_grid", "init", "trials",
    "max_iters", "seed", "output", "format", "threads",
}


def _parse_init(value) -> Init:
    if value is None or value == "uniform":
        return Init.uniform_random()
    if isinstance(value, bool):
        raise ConfigError(f"init: expected 'uniform' or a level integer, got {value!r}")
    if isinstance(value, int):
        return Init.at_level(value)
    if isinstance(value, str) and value.lstrip("-").isdigit():
        return Init.at_level(int(value))
    raise ConfigError(f"init: expected 'uniform' or a level integer, got {value!r}")


def _as_positive_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name}: expected an integer >= {minimum}, got {value!r}")
    return value


def parse_config(text: str, mode: Optional[Mode] = None) -> ExperimentConfig:
    """Parse and validate a YAML or JSON experiment document.

    Schema keys: mode, benchmark, algorithm (string or list), n_grid,
    init, trials, max_iters, seed, output, format, threads.  Defaults:
    trials 1000, seed 0, init uniform.  Violations raise ConfigError
    naming the offending key.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML/JSON: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config must be a key-value document, got {type(doc).__name__}")
    unknown = sorted(set(doc) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return build_config(doc, mode)


def build_config(doc: dict, mode: Optional[Mode] = None) -> ExperimentConfig:
    raw_mode = doc.get("mode")
    if raw_mode is not None:
        try:
            file_mode = Mode(str(raw_mode).strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in Mode)
            raise ConfigError(f"mode: must be one of {choices}, got {raw_mode!r}") from None
        if mode is not None and file_mode is not mode:
            raise ConfigError(
                f"mode: config says {file_mode.value!r} but the command is {mode.value!r}"
            )
        mode = file_mode
    if mode is None:
        raise ConfigError("mode: missing (pick exact, simulate, bounds, scaling, phases or compare)")

    benchmark = doc.get("benchmark")
    if not isinstance(benchmark, str) or not benchmark.strip():
        raise ConfigError("benchmark: missing or not a spec string")
    benchmark = benchmark.strip()

    algorithm = doc.get("algorithm")
    if isinstance(algorithm, str):
        algorithms = [algorithm.strip()]
    elif isinstance(algorithm, list) and algorithm and all(isinstance(a, str) for a in algorithm):
        algorithms = [a.strip() for a in algorithm]
    else:
        raise ConfigError("algorithm: missing; expected a spec string or a list of them")
    if len(algorithms) > 1 and mode is not Mode.COMPARE:
        raise ConfigError(f"algorithm: {mode.value} mode takes a single spec, compare takes several")

    n_grid = doc.get("n_grid", [])
    if n_grid is None:
        n_grid = []
    if not isinstance(n_grid, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in n_grid
    ):
        raise ConfigError(f"n_grid: expected a list of positive integers, got {n_grid!r}")
    if n_grid and sorted(n_grid) != n_grid:
        raise ConfigError("n_grid: must be ascending")
    if n_grid and len(set(n_grid)) != len(n_grid):
        raise ConfigError("n_grid: must not repeat entries")
    if mode is Mode.SCALING and len(n_grid) < 3:
        raise ConfigError("n_grid: scaling needs at least 3 points for the slope fit")

    config = ExperimentConfig(
        mode=mode,
        benchmark=benchmark,
        algorithms=algorithms,
        n_grid=list(n_grid),
        init=_parse_init(doc.get("init")),
        trials=_as_positive_int("trials", doc.get("trials", 1000)),
        max_iters=(None if doc.get("max_iters") is None
                   else _as_positive_int("max_iters", doc.get("max_iters"))),
        seed=_as_positive_int("seed", doc.get("seed", 0), minimum=0),
        output=doc.get("output"),
        fmt=str(doc.get("format", "csv")).lower(),
        threads=(None if doc.get("threads") is None
                 else _as_positive_int("threads", doc.get("threads"))),
    )
    if config.fmt not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {config.fmt!r}")
    if config.output is not None and not isinstance(config.output, str):
        raise ConfigError(f"output: expected a path string, got {config.output!r}")
    # parse the spec strings once now so schema errors surface here
    try:
        first_n = config.n_grid[0] if config.n_grid else None
        bench = parse_benchmark(config.benchmark, default_n=first_n)
        for text in config.algorithms:
            parse_algorithm(text, n=bench.n, bench_param=bench.param)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config


def _grid(config: ExperimentConfig) -> list:
    """Benchmark instances for each requested n (template n otherwise)."""
    first_n = config.n_grid[0] if config.n_grid else None
    template = parse_benchmark(config.benchmark, default_n=first_n)
    if not config.n_grid:
        return [template]
    return [dataclasses.replace(template, n=n) for n in config.n_grid]


def _resolve(config: ExperimentConfig, bench: BenchmarkSpec, text: str) -> AlgorithmSpec:
    return parse_algorithm(text, n=bench.n, bench_param=bench.param)


def _fmt_float(value: float) -> str:
    return f"{value:.10g}"


def _fmt_p(alg: AlgorithmSpec) -> str:
    if alg.p is None:
        return ""
    if isinstance(alg.p, Fraction):
        return str(alg.p)
    return repr(alg.p)


def _exact_cell(value: ExactValue) -> str:
    return value.decimal_string()


# ----------------------------------------------------------------------
# per-mode table builders; each returns (header, rows) of plain strings


def _exact_table(config: ExperimentConfig):
    rows = []
    for bench in _grid(config):
        alg = _resolve(config, bench, config.algorithms[0])
        exact = expected_runtime_exact(bench, alg, config.init)
        rows.append([format_benchmark(bench), format_algorithm(alg), str(bench.n),
                     _exact_cell(exact)])
    return ["benchmark", "algorithm", "n", "expected_runtime"], rows


def _compare_table(config: ExperimentConfig):
    rows = []
    for bench in _grid(config):
        for text in config.algorithms:
            alg = _resolve(config, bench, text)
            exact = expected_runtime_exact(bench, alg, config.init)
            rows.append([format_algorithm(alg), format_benchmark(bench), str(bench.n),
                         _exact_cell(exact)])
    return ["algorithm", "benchmark", "n", "expected_runtime"], rows


def _simulate_table(config: ExperimentConfig):
    rows = []
    for bench in _grid(config):
        alg = _resolve(config, bench, config.algorithms[0])
        stats = runner.run_batch(
            bench, alg, config.init, trials=config.trials, max_iters=config.max_iters,
            base_seed=config.seed, threads=config.threads, on_truncated="keep",
        )
        rows.append([
            format_algorithm(alg), format_benchmark(bench), str(bench.n),
            "" if bench.param is None else str(bench.param), _fmt_p(alg),
            str(stats.trials), _fmt_float(stats.mean), _fmt_float(stats.std_error),
            str(stats.truncation_count),
        ])
    return ["algorithm", "benchmark", "n", "param", "p",
            "trials", "mean", "stderr", "truncated"], rows


def _phases_table(config: ExperimentConfig):
    rows = []
    for bench in _grid(config):
        alg = _resolve(config, bench, config.algorithms[0])
        stats = runner.phase_experiment(bench, alg, phases=config.trials, base_seed=config.seed)
        rows.append([
            format_algorithm(alg), format_benchmark(bench), str(bench.n),
            "" if bench.param is None else str(bench.param), _fmt_p(alg),
            str(stats.phases), _fmt_float(stats.mean_phase_length),
            _fmt_float(stats.se_phase_length), "0",
            _fmt_float(stats.mean_phase_length), _fmt_float(stats.success_rate),
            _fmt_float(stats.mean_phase_count), _fmt_float(stats.wald_product),
            _fmt_float(stats.mean_T2),
        ])
    return ["algorithm", "benchmark", "n", "param", "p", "trials", "mean", "stderr",
            "truncated", "phase_len_mean", "phase_success", "est_N", "wald_product",
            "t2_mean"], rows


def _bounds_reports(config: ExperimentConfig) -> list:
    reports = []
    for bench in _grid(config):
        if bench.kind is not BenchmarkKind.JUMP:
            raise ConfigError("bounds: the bound catalog speaks about the jump benchmark")
        n, m = bench.n, bench.param
        alg = _resolve(config, bench, config.algorithms[0])
        if alg.kind is AlgorithmKind.MAHH:
            last = theory.last_step_formula(n, m, alg.p)
            if n - 2 * m + 1 >= 0:
                reports.append(theory.make_lower_report(
                    "small-m-term", n, m, alg.p, theory.lower_bound_small_m(n, m), last))
            if 2 <= m < n / 2 and round(m / n * n) == m:
                reports.append(theory.make_lower_report(
                    "linear-m-term", n, m, alg.p, theory.lower_bound_linear_m(n, Fraction(m, n)), last))
            exact = expected_runtime_exact(bench, alg, config.init)
            reports.append(theory.make_comparator_report(
                "classic-comparator", n, m, alg.p, theory.upper_bound_classic(n, m), exact))
        elif alg.kind is AlgorithmKind.MAHH_GLOBAL:
            exact = expected_runtime_exact(bench, alg, config.init)
            reports.append(theory.make_comparator_report(
                "global-comparator", n, m, alg.p, theory.upper_bound_global(n, m), exact))
        else:
            raise ConfigError(
                "bounds: no bound rows apply to this algorithm; use mahh or mahh-global"
            )
    return reports


def _scaling_table(config: ExperimentConfig):
    points = []
    rows = []
    for bench in _grid(config):
        alg = _resolve(config, bench, config.algorithms[0])
        exact = expected_runtime_exact(bench, alg, config.init)
        rows.append(["point", str(bench.n), _exact_cell(exact)])
        if exact.is_finite:
            points.append((bench.n, exact.as_float()))
    if len(points) < 3:
        raise ConfigError("n_grid: fewer than 3 finite values; cannot fit a slope")
    slope, intercept, r2 = runner.loglog_slope(points)
    rows.append(["slope", "", _fmt_float(slope)])
    rows.append(["intercept", "", _fmt_float(intercept)])
    rows.append(["r2", "", _fmt_float(r2)])
    return ["row_type", "n", "value"], rows


# ----------------------------------------------------------------------


def _render_csv(header: list, rows: list) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _render_json(header: list, rows: list) -> str:
    data = [dict(zip(header, row)) for row in rows]
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_run(config: ExperimentConfig) -> tuple:
    """Execute one experiment; returns (exit_status, output_text)."""
    if config.mode is Mode.BOUNDS:
        reports = _bounds_reports(config)
        if config.fmt == "json":
            data = [
                {
                    "bound_name": r.name, "n": r.n, "m": r.m,
                    "p": theory._format_p(r.p),
                    "value": r.value.decimal_string(),
                    "exact": r.compared_to.decimal_string(),
                    "satisfied": r.satisfied, "ratio": r.ratio,
                }
                for r in reports
            ]
            return 0, json.dumps(data, indent=2, sort_keys=True) + "\n"
        return 0, theory.bound_reports_csv(reports)
    builders = {
        Mode.EXACT: _exact_table,
        Mode.COMPARE: _compare_table,
        Mode.SIMULATE: _simulate_table,
        Mode.PHASES: _phases_table,
        Mode.SCALING: _scaling_table,
    }
    header, rows = builders[config.mode](config)
    text = _render_json(header, rows) if config.fmt == "json" else _render_csv(header, rows)
    return 0, text


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="YAML/JSON experiment file")
    parser.add_argument("--benchmark", help="benchmark spec, e.g. jump:n=20,m=2")
    parser.add_argument("--algorithm", action="append",
                        help="algorithm spec, e.g. mahh:p=m/n (repeat for compare)")
    parser.add_argument("--n-grid", help="comma-separated ascending sizes, e.g. 64,128,256")
    parser.add_argument("--init", help="'uniform' or a start level integer")
    parser.add_argument("--trials", type=int, help="trials (or phases) per point")
    parser.add_argument("--max-iters", type=int, help="iteration cap per trial")
    parser.add_argument("--seed", type=int, help="base seed (default 0)")
    parser.add_argument("--output", help="output file (default stdout)")
    parser.add_argument("--format", choices=["csv", "json"], help="output format")
    parser.add_argument("--threads", type=int, help="worker processes for batches")


def _doc_from_args(args: argparse.Namespace) -> dict:
    doc = {}
    if args.benchmark is not None:
        doc["benchmark"] = args.benchmark
    if args.algorithm:
        doc["algorithm"] = args.algorithm if len(args.algorithm) > 1 else args.algorithm[0]
    if args.n_grid is not None:
        try:
            doc["n_grid"] = [int(part) for part in args.n_grid.split(",") if part.strip()]
        except ValueError:
            raise ConfigError(f"n_grid: expected comma-separated integers, got {args.n_grid!r}")
    if args.init is not None:
        doc["init"] = args.init
    for key in ("trials", "max_iters", "seed", "output", "format", "threads"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    return doc


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hhlab",
        description="exact and Monte Carlo runtime analysis of randomized search "
                    "heuristics on onemax, cliff and jump benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in Mode:
        p = sub.add_parser(mode.value, help=f"{mode.value} experiment")
        _add_common_flags(p)
    args = parser.parse_args(argv)
    mode = Mode(args.command)
    try:
        doc = {}
        if args.config:
            with open(args.config, "r", encoding="utf-8") as handle:
                file_doc = yaml.safe_load(handle.read())
            if file_doc is None:
                file_doc = {}
            if not isinstance(file_doc, dict):
                raise ConfigError("config: file must hold a key-value document")
            unknown = sorted(set(file_doc) - _KNOWN_KEYS)
            if unknown:
                raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
            doc.update(file_doc)
        doc.update(_doc_from_args(args))
        config = build_config(doc, mode)
    except (ConfigError, OSError) as exc:
        print(f"hhlab: {exc}", file=sys.stderr)
        return 2
    except yaml.YAMLError as exc:
        print(f"hhlab: config is not valid YAML/JSON: {exc}", file=sys.stderr)
        return 2
    try:
        status, text = cmd_run(config)
    except ConfigError as exc:
        print(f"hhlab: {exc}", file=sys.stderr)
        return 2
    except runner.TruncatedRunError as exc:
        print(f"hhlab: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, ValueError) as exc:
        print(f"hhlab: computation failed: {exc}", file=sys.stderr)
        return 1
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
