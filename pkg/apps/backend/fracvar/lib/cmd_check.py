"""
check: randomized self-checks of the operator identities and of the
finite-difference oracles behind the Euler-Lagrange and Legendre assemblies.

    summation_by_parts    |∫ f aΔ^α g - (boundary + adjoint + kernel terms)|
    left_shift / right_shift
    exchange_lemma
    gradient_consistency  ∂J/∂y(σ(τ)) vs h·EL(τ)            (relative)
    hessian_consistency   Φ''(0) vs h·Legendre(τ)            (relative)

Exit 0 when every maximum is under its tolerance, 1 otherwise.
"""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
import pandas as pd

from apps.backend.fracvar.lib.exit_codes import EXIT_OK, EXIT_VIOLATION
from apps.utils.expr import parse
from apps.utils.operators import (
    FractionalOrders,
    GridFunction,
    GridSpec,
    clear_kernel_cache,
    exchange_lemma_residual,
    left_shift_identity_residual,
    right_shift_identity_residual,
)
from apps.utils.variational import (
    VariationalProblem,
    gradient_consistency_error,
    hessian_consistency_error,
    summation_by_parts_residual,
)
from logs.logging_setup import get_logger

LOG = get_logger(
    "cmd_check",
    file_name="fracvar_cli.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

DEFAULTS = {
    "seed": 2024,
    "instances": 100,
    "max_k": 16,
    "steps": [0.1, 0.25, 1.0],
    "identity_tol": 1e-10,
    "oracle_instances": 50,
    "oracle_max_k": 8,
    "gradient_tol": 1e-5,
    "hessian_tol": 1e-3,
    "lagrangians": ["0.5*v^2 - u", "v^3 + w^2"],
}


def _random_grid(rng: np.random.Generator, max_k: int, steps) -> GridSpec:
    k = int(rng.integers(2, max_k + 1))
    h = float(rng.choice(steps))
    a = float(rng.uniform(-1.0, 1.0))
    return GridSpec(a, h, k)


def identity_residuals(rng: np.random.Generator, instances: int, max_k: int, steps) -> dict[str, float]:
    worst = {"summation_by_parts": 0.0, "left_shift": 0.0, "right_shift": 0.0, "exchange_lemma": 0.0}
    for _ in range(instances):
        grid = _random_grid(rng, max_k, steps)
        alpha = float(rng.uniform(0.05, 1.0))
        nu = float(rng.uniform(0.05, 1.0))
        sub, sub2 = grid.truncated(1), grid.truncated(2)

        g = GridFunction(grid, rng.normal(size=grid.n_points))
        f_kappa = GridFunction(sub, rng.normal(size=sub.n_points))
        k_kappa2 = GridFunction(sub2, rng.normal(size=sub2.n_points))
        c1, c2 = rng.normal(size=2)

        worst["summation_by_parts"] = max(worst["summation_by_parts"], summation_by_parts_residual(f_kappa, g, alpha))
        worst["left_shift"] = max(worst["left_shift"], left_shift_identity_residual(g, nu))
        worst["right_shift"] = max(worst["right_shift"], right_shift_identity_residual(g, nu))
        worst["exchange_lemma"] = max(
            worst["exchange_lemma"],
            exchange_lemma_residual(f_kappa, k_kappa2, lambda t, s: math.cos(c1 * t + c2 * s)),
        )
    return worst


def oracle_errors(rng: np.random.Generator, instances: int, max_k: int, steps, lagrangians) -> dict[str, float]:
    asts = [parse(src) for src in lagrangians]
    worst = {"gradient_consistency": 0.0, "hessian_consistency": 0.0}
    for _ in range(instances):
        grid = _random_grid(rng, max_k, steps)
        orders = FractionalOrders(float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.1, 1.0)))
        values = 0.5 * rng.normal(size=grid.n_points)
        ast = asts[int(rng.integers(len(asts)))]
        p = VariationalProblem(grid, orders, ast, left_bc=float(values[0]), right_bc=float(values[-1]))
        y = p.trajectory(values)
        worst["gradient_consistency"] = max(worst["gradient_consistency"], gradient_consistency_error(p, y))
        worst["hessian_consistency"] = max(worst["hessian_consistency"], hessian_consistency_error(p, y))
    return worst


def cmd_check(settings: Optional[dict] = None, seed: Optional[int] = None, instances: Optional[int] = None) -> int:
    opts = dict(DEFAULTS)
    opts.update((settings or {}).get("check") or {})
    if seed is not None:
        opts["seed"] = seed
    if instances is not None:
        opts["instances"] = instances
        opts["oracle_instances"] = max(1, instances // 2)

    clear_kernel_cache()
    rng = np.random.default_rng(opts["seed"])
    LOG.info(f"[check] seed={opts['seed']} instances={opts['instances']} oracle_instances={opts['oracle_instances']}")

    identities = identity_residuals(rng, opts["instances"], opts["max_k"], opts["steps"])
    oracles = oracle_errors(rng, opts["oracle_instances"], opts["oracle_max_k"], opts["steps"], opts["lagrangians"])

    tolerances = {name: opts["identity_tol"] for name in identities}
    tolerances["gradient_consistency"] = opts["gradient_tol"]
    tolerances["hessian_consistency"] = opts["hessian_tol"]

    rows = []
    for name, value in {**identities, **oracles}.items():
        ok = value < tolerances[name]
        rows.append({"check": name, "max residual": value, "tolerance": tolerances[name], "status": "ok" if ok else "FAIL"})
        if not ok:
            LOG.error(f"[check] {name}: {value:.3e} >= {tolerances[name]:.1e}")
    table = pd.DataFrame(rows)
    print(table.to_string(index=False, float_format=lambda x: f"{x:.3e}"))

    failed = [r["check"] for r in rows if r["status"] != "ok"]
    return EXIT_VIOLATION if failed else EXIT_OK
