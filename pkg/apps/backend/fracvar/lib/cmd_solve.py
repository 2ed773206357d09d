"""
solve: read a problem file, find every extremal, print the candidate table and
write full trajectories (t, candidate_1, candidate_2, ...) as CSV.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import pandas as pd

from apps.utils.csv_writer import write_trajectories
from apps.utils.problem_config import ConfigError, load_problem, solver_defaults
from apps.backend.fracvar.lib.exit_codes import EXIT_OK, EXIT_SOLVER, EXIT_USAGE
from apps.utils.solver import NoConvergenceError, SolveReport, solve
from logs.logging_setup import get_logger

LOG = get_logger(
    "cmd_solve",
    file_name="fracvar_cli.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)


def format_report(report: SolveReport, interior_t) -> str:
    rows = []
    for n, cand in enumerate(report.candidates, start=1):
        row = {"#": n}
        for t, y in zip(interior_t, cand.trajectory.interior):
            row[f"y({t:.10g})"] = y
        row["L"] = cand.functional_value
        row["EL residual"] = cand.el_residual_norm
        row["Legendre"] = "Verified" if cand.legendre_verified else "Not verified"
        rows.append(row)
    table = pd.DataFrame(rows)
    return table.to_string(index=False, float_format=lambda x: f"{x:.10g}")


def cmd_solve(config_path, output_path, seed: Optional[int] = None, starts: Optional[int] = None,
              workers: Optional[int] = None, settings: Optional[dict] = None) -> int:
    try:
        cfg = load_problem(config_path)
        problem = cfg.to_problem()
        solver_cfg = cfg.solver_config(solver_defaults(settings), seed=seed, starts=starts, workers=workers)
    except ConfigError as e:
        LOG.error(f"[solve] config error: {e}")
        return EXIT_USAGE

    LOG.info(f"[solve] {config_path}: L='{cfg.lagrangian}' k={cfg.k} h={cfg.h} starts={solver_cfg.n_starts}")
    try:
        report = solve(problem, solver_cfg)
    except NoConvergenceError as e:
        LOG.error(f"[solve] {e}")
        return EXIT_SOLVER

    grid = problem.grid
    print(format_report(report, grid.points()[1:-1]))
    print(
        f"\nextremals={len(report.candidates)} "
        f"verified={sum(c.legendre_verified for c in report.candidates)} "
        f"converged={report.n_starts_converged}/{report.n_starts_total} "
        f"merged={report.n_duplicates_merged}"
    )

    columns = {f"candidate_{n}": c.trajectory.array for n, c in enumerate(report.candidates, start=1)}
    write_trajectories(Path(output_path), grid.points(), columns)
    return EXIT_OK
