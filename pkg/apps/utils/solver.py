"""
Usage Examples:

from apps.utils.solver import SolverConfig, solve

report = solve(problem, SolverConfig(n_starts=500, seed=7))
for cand in report.candidates:
    print(cand.trajectory.interior, cand.functional_value, cand.legendre_verified)

Every start runs damped Newton on the Euler-Lagrange residual (plus the natural
boundary residuals of free endpoints). Converged starts are assessed, merged when
they agree within dedupe_tol, and ranked by functional value.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as la

from apps.utils.variational import (
    TOL_LEGENDRE,
    TOL_RESIDUAL,
    ExtremalCandidate,
    VariationalProblem,
    Trajectory,
    assess,
    euler_lagrange_residual,
    natural_bc_left_residual,
    natural_bc_right_residual,
)
from apps.utils.operators import GridFunction
from logs.logging_setup import get_logger

LOG = get_logger(
    "solver",
    file_name="fracvar.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

MIN_DAMPING = 1e-4
FD_REL_STEP = 1e-7
DIVERGED = 1e12

ResidualMap = Callable[[np.ndarray], np.ndarray]


class SolverFailure(Exception):
    """Base exception for a start (or a whole solve) that produced no root."""


class StalledStepError(SolverFailure):
    pass


class SingularJacobianError(SolverFailure):
    pass


class NoConvergenceError(SolverFailure):
    def __init__(self, message: str, n_starts_total: int, n_starts_stalled: int, n_starts_failed: int):
        self.n_starts_total = n_starts_total
        self.n_starts_stalled = n_starts_stalled
        self.n_starts_failed = n_starts_failed
        super().__init__(message)


@dataclass(frozen=True)
class SolverConfig:
    n_starts: int = 200
    init_box: tuple[float, float] = (-5.0, 5.0)
    max_iters: int = 100
    step_tol: float = 1e-12
    residual_tol: float = TOL_RESIDUAL
    dedupe_tol: float = 1e-6
    seed: int = 0
    workers: int = 1
    legendre_tol: float = TOL_LEGENDRE

    def __post_init__(self):
        if int(self.n_starts) != self.n_starts or self.n_starts < 0:
            raise ValueError(f"n_starts must be a nonnegative integer, got {self.n_starts!r}")
        lo, hi = self.init_box
        if not lo < hi:
            raise ValueError(f"init_box must satisfy lo < hi, got {self.init_box!r}")
        if self.max_iters < 1 or self.workers < 1:
            raise ValueError("max_iters and workers must be positive")
        for name in ("step_tol", "residual_tol", "dedupe_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "init_box", (float(lo), float(hi)))


@dataclass(frozen=True)
class SolveReport:
    candidates: tuple[ExtremalCandidate, ...]
    n_starts_converged: int
    n_duplicates_merged: int
    n_starts_total: int = 0
    n_starts_stalled: int = 0
    n_starts_failed: int = 0


# ------------ Newton machinery ------------

def fd_jacobian(residual_map: ResidualMap, rel_step: float = FD_REL_STEP) -> Callable[[np.ndarray], np.ndarray]:
    """Central finite-difference Jacobian with step rel_step * (1 + |x_i|)."""
    def jacobian(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cols = []
        for i in range(x.size):
            e = rel_step * (1.0 + abs(x[i]))
            plus, minus = x.copy(), x.copy()
            plus[i] += e
            minus[i] -= e
            cols.append((residual_map(plus) - residual_map(minus)) / (2 * e))
        return np.column_stack(cols) if cols else np.zeros((0, 0))
    return jacobian


def _solve_linear(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        dx = la.solve(jac, rhs)
        if np.all(np.isfinite(dx)):
            return dx
    except ValueError:
        pass
    delta = 1e-10 * (1.0 + np.abs(jac).max(initial=0.0))
    try:
        dx = la.solve(jac + delta * np.eye(jac.shape[0]), rhs)
    except ValueError as exc:
        raise SingularJacobianError("Jacobian singular even after diagonal perturbation") from exc
    if not np.all(np.isfinite(dx)):
        raise SingularJacobianError("Jacobian singular even after diagonal perturbation")
    return dx


def newton_step(
    residual_map: ResidualMap,
    jacobian: Callable[[np.ndarray], np.ndarray],
    x: Sequence[float],
    residual_tol: float = TOL_RESIDUAL,
) -> np.ndarray:
    """One damped Newton update x - λΔx, halving λ until the residual norm drops."""
    x = np.asarray(x, dtype=float)
    r = residual_map(x)
    if np.max(np.abs(r), initial=0.0) <= residual_tol:
        return x.copy()
    norm0 = la.norm(r)
    dx = _solve_linear(jacobian(x), r)
    lam = 1.0
    while lam >= MIN_DAMPING:
        trial = x - lam * dx
        try:
            r_trial = residual_map(trial)
        except ArithmeticError:
            r_trial = None
        if r_trial is not None and np.all(np.isfinite(r_trial)) and la.norm(r_trial) < norm0:
            return trial
        lam *= 0.5
    raise StalledStepError(f"no residual decrease down to damping {MIN_DAMPING}")


# ------------ problem plumbing ------------

@dataclass(frozen=True)
class _Layout:
    """Which grid values are unknowns and how to rebuild the full trajectory."""
    problem: VariationalProblem
    free: tuple[int, ...] = field(default=())

    @classmethod
    def of(cls, p: VariationalProblem) -> "_Layout":
        free = list(range(1, p.k))
        if p.left_bc is None:
            free.insert(0, 0)
        if p.right_bc is None:
            free.append(p.k)
        return cls(p, tuple(free))

    def full(self, x: np.ndarray) -> np.ndarray:
        p = self.problem
        y = np.empty(p.k + 1)
        y[0] = p.left_bc if p.left_bc is not None else 0.0
        y[-1] = p.right_bc if p.right_bc is not None else 0.0
        y[list(self.free)] = x
        return y

    def trajectory(self, x: np.ndarray) -> Trajectory:
        return Trajectory(GridFunction(self.problem.grid, self.full(x)))

    def residual(self, x: np.ndarray) -> np.ndarray:
        p = self.problem
        y = self.trajectory(x)
        parts = [euler_lagrange_residual(p, y).values]
        if p.left_bc is None:
            parts.append([natural_bc_left_residual(p, y)])
        if p.right_bc is None:
            parts.append([natural_bc_right_residual(p, y)])
        return np.concatenate(parts)

    def linear_start(self) -> np.ndarray:
        p = self.problem
        ya = p.left_bc if p.left_bc is not None else 0.0
        yb = p.right_bc if p.right_bc is not None else 0.0
        frac = np.array(self.free, dtype=float) / p.k
        return ya + (yb - ya) * frac


def _polish(residual_map: ResidualMap, jacobian, x: np.ndarray) -> np.ndarray:
    """One extra full Newton step below tolerance, kept only if it lowers the residual."""
    try:
        return newton_step(residual_map, jacobian, x, residual_tol=0.0)
    except (SolverFailure, ArithmeticError, ValueError):
        return x


def _run_start(layout: _Layout, x0: np.ndarray, cfg: SolverConfig) -> tuple[str, Optional[np.ndarray]]:
    residual_map = layout.residual
    jacobian = fd_jacobian(residual_map)
    x = np.array(x0, dtype=float)
    try:
        for _ in range(cfg.max_iters):
            r = residual_map(x)
            if np.max(np.abs(r), initial=0.0) <= cfg.residual_tol:
                return "converged", _polish(residual_map, jacobian, x)
            x_new = newton_step(residual_map, jacobian, x, cfg.residual_tol)
            if not np.all(np.abs(x_new) < DIVERGED):
                return "failed", None
            moved = la.norm(x_new - x)
            x = x_new
            if moved <= cfg.step_tol * (1.0 + la.norm(x)):
                break
        r = residual_map(x)
        if np.max(np.abs(r), initial=0.0) <= cfg.residual_tol:
            return "converged", _polish(residual_map, jacobian, x)
        return "stalled", None
    except StalledStepError:
        return "stalled", None
    except (SingularJacobianError, ArithmeticError, ValueError):
        return "failed", None


def dedupe(candidates: Sequence[ExtremalCandidate], tol: float = 1e-6) -> list[ExtremalCandidate]:
    """Greedy max-norm clustering; each cluster keeps its smallest-residual member."""
    ordered = sorted(candidates, key=lambda c: c.el_residual_norm + c.bc_residual_norm)
    kept: list[ExtremalCandidate] = []
    for cand in ordered:
        y = cand.trajectory.array
        if any(np.max(np.abs(y - rep.trajectory.array)) <= tol for rep in kept):
            continue
        kept.append(cand)
    return kept


def _rank_key(c: ExtremalCandidate):
    return (c.functional_value, tuple(c.trajectory.array.tolist()))


def solve(p: VariationalProblem, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    layout = _Layout.of(p)
    n_unknowns = len(layout.free)
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.init_box
    starts = [np.zeros(n_unknowns), layout.linear_start()]
    starts += list(rng.uniform(lo, hi, size=(cfg.n_starts, n_unknowns)))

    LOG.info(
        f"[solve] k={p.k} h={p.h} alpha={p.orders.alpha} beta={p.orders.beta} "
        f"unknowns={n_unknowns} starts={len(starts)} workers={cfg.workers}"
    )

    def run(x0):
        return _run_start(layout, x0, cfg)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = [run(x0) for x0 in starts]

    n_stalled = sum(1 for status, _ in outcomes if status == "stalled")
    n_failed = sum(1 for status, _ in outcomes if status == "failed")
    roots = [x for status, x in outcomes if status == "converged"]
    if not roots:
        raise NoConvergenceError(
            f"none of {len(starts)} starts converged (stalled={n_stalled}, failed={n_failed})",
            len(starts), n_stalled, n_failed,
        )

    assessed = [assess(p, layout.trajectory(x), cfg.legendre_tol) for x in roots]
    assessed = [c for c in assessed if c.el_residual_norm <= cfg.residual_tol and c.bc_residual_norm <= cfg.residual_tol]
    if not assessed:
        raise NoConvergenceError(
            f"none of {len(roots)} converged roots passed re-verification at residual_tol={cfg.residual_tol}",
            len(starts), n_stalled, n_failed,
        )
    unique = dedupe(assessed, cfg.dedupe_tol)
    unique.sort(key=_rank_key)

    if n_stalled or n_failed:
        LOG.warning(f"[solve] attrition: stalled={n_stalled} failed={n_failed} of {len(starts)}")
    LOG.info(
        f"[solve] converged={len(roots)} merged={len(assessed) - len(unique)} "
        f"extremals={len(unique)} verified={sum(c.legendre_verified for c in unique)}"
    )
    return SolveReport(
        candidates=tuple(unique),
        n_starts_converged=len(roots),
        n_duplicates_merged=len(assessed) - len(unique),
        n_starts_total=len(starts),
        n_starts_stalled=n_stalled,
        n_starts_failed=n_failed,
    )


def best_candidate(report: SolveReport) -> ExtremalCandidate:
    """Lowest functional value among Legendre-verified candidates, else overall lowest."""
    verified = [c for c in report.candidates if c.legendre_verified]
    pool = verified or list(report.candidates)
    return min(pool, key=_rank_key)
