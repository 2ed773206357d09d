"""
sweep: solve a registered example across a list of steps h or orders alpha and
write each extremal next to its deviation from the example's reference curve.

CSV columns: t, then y[<param>=<value>], dev[<param>=<value>] per sweep value.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from apps.backend.fracvar.lib.exit_codes import EXIT_OK, EXIT_SOLVER, EXIT_USAGE
from apps.backend.fracvar.lib.reference import reference_curve
from apps.utils.csv_writer import write_sweep
from apps.utils.problem_config import ConfigError, ProblemConfig, load_examples, load_problem, solver_defaults
from apps.utils.solver import NoConvergenceError, best_candidate, solve
from logs.logging_setup import get_logger

LOG = get_logger(
    "cmd_sweep",
    file_name="fracvar_cli.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)


def _configure(base: ProblemConfig, param: str, value: float, fixed: dict) -> ProblemConfig:
    cfg = base
    for key, val in fixed.items():
        if key == param:
            continue
        cfg = cfg.with_step(val) if key == "h" else cfg.with_alpha(val)
    return cfg.with_step(value) if param == "h" else cfg.with_alpha(value)


def cmd_sweep(example_id: str, output_path, h_values: Optional[Sequence[float]] = None,
              alpha_values: Optional[Sequence[float]] = None, seed: Optional[int] = None,
              starts: Optional[int] = None, workers: Optional[int] = None,
              settings: Optional[dict] = None, examples_path=None) -> int:
    try:
        if h_values and alpha_values:
            raise ConfigError("give either an h list or an alpha list, not both")
        examples = load_examples(examples_path)
        if example_id not in examples:
            raise ConfigError(f"unknown example '{example_id}' (known: {', '.join(sorted(examples))})")
        entry = examples[example_id]
        base = load_problem(entry.config_path)
        if h_values:
            param, values = "h", list(h_values)
        elif alpha_values:
            param, values = "alpha", list(alpha_values)
        else:
            param, values = entry.sweep_param, list(entry.sweep_values)
        configs = [_configure(base, param, v, entry.fixed) for v in values]
        problems = [c.to_problem() for c in configs]
        defaults = solver_defaults(settings)
        solver_cfgs = [c.solver_config(defaults, seed=seed, starts=starts, workers=workers) for c in configs]
    except ConfigError as e:
        LOG.error(f"[sweep] config error: {e}")
        return EXIT_USAGE

    series = []
    summary = []
    for value, problem, solver_cfg in zip(values, problems, solver_cfgs):
        label = f"{param}={value:.10g}"
        try:
            report = solve(problem, solver_cfg)
        except NoConvergenceError as e:
            LOG.error(f"[sweep] {example_id} {label}: {e}")
            return EXIT_SOLVER
        cand = best_candidate(report)
        t = problem.grid.points()
        y = cand.trajectory.array
        dev = None
        if entry.reference:
            dev = np.abs(y - reference_curve(entry.reference, t))
        series.append((label, t, y, dev))
        max_dev = float(np.nanmax(dev)) if dev is not None and np.any(np.isfinite(dev)) else np.nan
        summary.append({
            "sweep": label,
            "k": problem.k,
            "extremals": len(report.candidates),
            "L": cand.functional_value,
            "max deviation": max_dev,
        })
        LOG.info(f"[sweep] {example_id} {label}: L={cand.functional_value:.10g} max_dev={max_dev:.3e}")

    print(pd.DataFrame(summary).to_string(index=False, float_format=lambda x: f"{x:.10g}"))
    write_sweep(Path(output_path), series)
    return EXIT_OK
