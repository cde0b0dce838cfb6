"""Experiment harness: configured solve batches, presets, and result emitters."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from .operators import ProblemInstance, make_problem
from .solver import RunReport, SolverParams, StopReason, BetaSchedule, solve
from .sets import as_point

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "run_experiment",
    "run_reports",
    "emit",
    "emit_many",
    "preset_configs",
    "configs_from_file",
    "rows_from_json",
    "exit_code_for",
    "PRESET_NAMES",
    "CSV_HEADER",
]

CSV_HEADER = "x0,iter,nT,cpu_s,sol,stop_reason"
OUTPUT_FORMATS = ("csv", "json", "table")
PRESET_NAMES = ("table1", "table2", "table3", "table4")


@dataclass
class ExperimentConfig:
    """One batch of solves: a problem, a list of starts, and shared parameters.

    ``repetitions`` only affects timing (the reported wall time is the median
    over that many identical runs); counters and terminal points come from the
    first run and are deterministic given ``seed``.
    """

    problem: str
    starts: list[np.ndarray]
    params: SolverParams = field(default_factory=SolverParams)
    a: float | None = None
    repetitions: int = 1
    seed: int = 0
    output_format: str = "table"
    label: str | None = None

    def __post_init__(self):
        if not self.starts:
            raise ValueError("an experiment needs at least one start point")
        self.starts = [as_point(s) for s in self.starts]
        dims = {s.size for s in self.starts}
        if len(dims) != 1:
            raise ValueError("all start points must share one dimension")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output format must be one of {OUTPUT_FORMATS}")
        # fail fast on unknown problems / dimension mismatches
        self.build_problem()

    @property
    def dim(self) -> int:
        return self.starts[0].size

    def build_problem(self) -> ProblemInstance:
        return make_problem(self.problem, dim=self.dim, a=self.a, seed=self.seed)

    def to_dict(self) -> dict:
        p = self.params
        return {
            "problem": self.problem,
            "starts": [list(s) for s in self.starts],
            "a": self.a,
            "seed": self.seed,
            "repetitions": self.repetitions,
            "output_format": self.output_format,
            "label": self.label,
            "params": {
                "delta": p.delta,
                "theta": p.theta,
                "beta_lower": p.beta_schedule.lower,
                "beta_upper": p.beta_schedule.upper,
                "tol_residual": p.tol_residual,
                "tol_step4": p.tol_step4,
                "max_outer_iterations": p.max_outer_iterations,
                "max_linesearch_halvings": p.max_linesearch_halvings,
            },
        }


@dataclass
class ResultRow:
    """Flat view of one solve, mirroring the run report fields."""

    start: np.ndarray
    iterations: int
    operator_evals: int
    wall_time_s: float
    terminal_point: np.ndarray
    stop_reason: StopReason

    @classmethod
    def from_report(cls, start: np.ndarray, report: RunReport) -> "ResultRow":
        return cls(
            start=np.array(start),
            iterations=report.counters.outer_iters,
            operator_evals=report.counters.operator_evals,
            wall_time_s=report.wall_time_s,
            terminal_point=np.array(report.terminal_point),
            stop_reason=report.stop_reason,
        )


def run_reports(config: ExperimentConfig) -> list[RunReport]:
    """Solve every start of the experiment, recording full iteration history.

    Wall times are medians over ``config.repetitions`` identical runs.
    """
    problem = config.build_problem()
    params = config.params
    if not params.record_history:
        params = SolverParams(**{**params.__dict__, "record_history": True})
    reports = []
    for start in config.starts:
        report = solve(problem, start, params)
        if config.repetitions > 1:
            times = [report.wall_time_s]
            for _ in range(config.repetitions - 1):
                times.append(solve(problem, start, params).wall_time_s)
            report.wall_time_s = statistics.median(times)
        reports.append(report)
    return reports


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run the experiment and flatten the reports into result rows."""
    reports = run_reports(config)
    return [
        ResultRow.from_report(start, report)
        for start, report in zip(config.starts, reports)
    ]


def _fmt_point(point: np.ndarray) -> str:
    return ";".join(f"{v:.6g}" for v in point)


def _row_dict(row: ResultRow) -> dict:
    return {
        "x0": list(row.start),
        "iter": row.iterations,
        "nT": row.operator_evals,
        "cpu_s": row.wall_time_s,
        "sol": list(row.terminal_point),
        "stop_reason": row.stop_reason.value,
    }


def rows_from_json(text: str) -> list[ResultRow]:
    """Rebuild result rows from the json emitted by :func:`emit`."""
    payload = json.loads(text)
    blocks = payload if isinstance(payload, list) else [payload]
    rows = []
    for block in blocks:
        for entry in block["rows"]:
            rows.append(
                ResultRow(
                    start=np.array(entry["x0"], dtype=float),
                    iterations=int(entry["iter"]),
                    operator_evals=int(entry["nT"]),
                    wall_time_s=float(entry["cpu_s"]),
                    terminal_point=np.array(entry["sol"], dtype=float),
                    stop_reason=StopReason(entry["stop_reason"]),
                )
            )
    return rows


def _emit_csv(rows) -> list[str]:
    lines = []
    for row in rows:
        lines.append(
            f"{_fmt_point(row.start)},{row.iterations},{row.operator_evals},"
            f"{row.wall_time_s:.6g},{_fmt_point(row.terminal_point)},{row.stop_reason.value}"
        )
    return lines


def _emit_table(rows, title: str | None) -> str:
    headers = ["x0", "iter(nT)", "cpu_s", "sol", "stop"]
    body = [
        [
            "(" + ", ".join(f"{v:.6g}" for v in row.start) + ")",
            f"{row.iterations}({row.operator_evals})",
            f"{row.wall_time_s:.4g}",
            "(" + ", ".join(f"{v:.6g}" for v in row.terminal_point) + ")",
            row.stop_reason.value,
        ]
        for row in rows
    ]
    widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(headers)]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)


def emit(rows: list[ResultRow], output_format: str, config: ExperimentConfig | None = None) -> str:
    """Serialize result rows as csv, json, or an aligned text table.

    The json form embeds the resolved configuration (when given) so a saved
    result file records how it was produced.
    """
    if not rows:
        raise ValueError("no result rows to emit")
    if output_format == "csv":
        return "\n".join([CSV_HEADER] + _emit_csv(rows))
    if output_format == "json":
        payload = {
            "config": config.to_dict() if config is not None else None,
            "rows": [_row_dict(r) for r in rows],
        }
        return json.dumps(payload, indent=2)
    if output_format == "table":
        return _emit_table(rows, config.label if config is not None else None)
    raise ValueError(f"output format must be one of {OUTPUT_FORMATS}")


def emit_many(results: list[tuple[ExperimentConfig, list[ResultRow]]], output_format: str) -> str:
    """Serialize several experiments' rows into one document."""
    if not results:
        raise ValueError("no experiments to emit")
    if output_format == "csv":
        lines = [CSV_HEADER]
        for _, rows in results:
            lines.extend(_emit_csv(rows))
        return "\n".join(lines)
    if output_format == "json":
        return json.dumps(
            [
                {"config": cfg.to_dict(), "rows": [_row_dict(r) for r in rows]}
                for cfg, rows in results
            ],
            indent=2,
        )
    if output_format == "table":
        return "\n\n".join(_emit_table(rows, cfg.label) for cfg, rows in results)
    raise ValueError(f"output format must be one of {OUTPUT_FORMATS}")


def exit_code_for(rows: list[ResultRow]) -> int:
    """0 when every run stopped at a solution, 2 on iteration caps, 3 on linesearch failure."""
    reasons = {row.stop_reason for row in rows}
    if StopReason.LINESEARCH_FAILURE in reasons:
        return 3
    if StopReason.MAX_ITERATIONS in reasons:
        return 2
    return 0


def _params(delta, theta, tol_residual, tol_step4=1e-12, max_iter=10_000):
    return SolverParams(
        delta=delta,
        theta=theta,
        beta_schedule=BetaSchedule.constant(1.0),
        tol_residual=tol_residual,
        tol_step4=tol_step4,
        max_outer_iterations=max_iter,
        record_history=True,
    )


def preset_configs(name: str) -> list[ExperimentConfig]:
    """Built-in experiment batches covering the four benchmark problems."""
    if name == "table1":
        return [
            ExperimentConfig(
                problem="hs-quasimonotone",
                starts=[
                    [0.0, 1.0], [0.0, 0.0], [1.0, 0.0],
                    [0.5, 0.5], [0.2, 0.7], [0.1, 0.7],
                ],
                params=_params(0.01, 0.5, 1e-8),
                label="quasimonotone box problem",
            )
        ]
    if name == "table2":
        mk = lambda variant, n, start, label: ExperimentConfig(
            problem=variant,
            starts=[start],
            params=_params(0.01, 0.5, 1e-8),
            a=1.0,
            label=label,
        )
        return [
            mk("rho-squared", 1, [0.1], "rho = |x|^2, n = 1"),
            mk("rho-squared", 1, [0.5], "rho = |x|^2, n = 1"),
            mk("rho-squared", 1, [-0.5], "rho = |x|^2, n = 1"),
            mk("rho-norm", 5, [1e-3] * 5, "rho = |x|, n = 5"),
            mk("rho-norm", 50, [-0.1] * 50, "rho = |x|, n = 50"),
            mk("rho-norm", 100, [-0.001] * 100, "rho = |x|, n = 100"),
        ]
    if name == "table3":
        mk = lambda delta, a, starts: ExperimentConfig(
            problem="fractional-simplex",
            starts=starts,
            params=_params(delta, 0.25, 1e-4),
            a=a,
            seed=0,
            label=f"fractional objective on the simplex, delta = {delta}, a = {a}",
        )
        return [
            mk(0.01, 5.0, [[0.0, 0.0, 5.0, 0.0, 0.0], [0.0, 2.0, 0.0, 2.0, 1.0]]),
            mk(0.5, 5.0, [[0.0, 0.0, 5.0, 0.0, 0.0], [0.0, 2.0, 0.0, 2.0, 1.0]]),
            mk(0.01, 10.0, [[1.0, 1.0, 1.0, 1.0, 6.0], [1.0, 1.0, 6.0, 1.0, 1.0]]),
            mk(0.99, 10.0, [[1.0, 1.0, 1.0, 1.0, 6.0], [1.0, 1.0, 6.0, 1.0, 1.0]]),
        ]
    if name == "table4":
        return [
            ExperimentConfig(
                problem="ray-setvalued",
                starts=[
                    [1.0, math.pi / 2], [0.5, math.pi / 3], [0.1, math.pi / 2],
                    [100.0, math.pi / 2], [0.1, math.pi / 10], [1.0, math.pi / 100],
                    [20.0, math.pi / 6], [10.0, math.pi / 4], [1500.0, math.pi / 8],
                ],
                # the residual tolerance is an exact-zero test here: the run
                # only stops once the trial point coincides with the iterate
                # to machine precision
                params=_params(0.5, 0.5, 1e-30),
                label="ray-valued operator on the quarter plane",
            )
        ]
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


def configs_from_file(path: str) -> list[ExperimentConfig]:
    """Load one or more experiment configs from a json file.

    The file holds either a single object or a list of objects with keys:
    ``problem`` (required), ``starts`` (required, list of vectors), ``a``,
    ``seed``, ``repetitions``, ``output``, ``label``, and the solver knobs
    ``delta``, ``theta``, ``beta``, ``tol_residual``, ``tol_step4``,
    ``max_outer_iterations``, ``max_linesearch_halvings``.
    """
    with open(path) as fh:
        payload = json.load(fh)
    entries = payload if isinstance(payload, list) else [payload]
    configs = []
    for entry in entries:
        if "problem" not in entry or "starts" not in entry:
            raise ValueError("each experiment needs 'problem' and 'starts'")
        params = SolverParams(
            delta=entry.get("delta", 0.01),
            theta=entry.get("theta", 0.5),
            beta_schedule=BetaSchedule.constant(entry.get("beta", 1.0)),
            tol_residual=entry.get("tol_residual", 1e-8),
            tol_step4=entry.get("tol_step4", 1e-12),
            max_outer_iterations=entry.get("max_outer_iterations", 10_000),
            max_linesearch_halvings=entry.get("max_linesearch_halvings", 200),
            record_history=True,
        )
        configs.append(
            ExperimentConfig(
                problem=entry["problem"],
                starts=entry["starts"],
                params=params,
                a=entry.get("a"),
                seed=entry.get("seed", 0),
                repetitions=entry.get("repetitions", 1),
                output_format=entry.get("output", "table"),
                label=entry.get("label"),
            )
        )
    return configs
