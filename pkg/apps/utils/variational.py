"""
Discrete fractional variational problems on T = [a, b] ∩ (hZ)_a.

    J(y) = Σ_{t ∈ T^κ} h · L(t, y(σ(t)), aΔ^α y(t), hΔ_b^β y(t))

Unknown trajectories are full GridFunctions on T. With γ = 1 - α and ν = 1 - β:

    euler_lagrange_residual   L_u + hΔ_{ρ(b)}^α L_v + aΔ^β L_w on T^{κ²}
                              (equals (1/h) ∂J/∂y(σ(t)))
    natural_bc_*_residual     ∂J/∂y(a) and ∂J/∂y(b) for free endpoints
    legendre_lhs              h · ∂²J/∂y(σ(t))² on T^{κ²}

The left natural boundary condition carries h^ν on its L_w(a) term and the
Legendre expression carries h^{2γ} on its L_vv(t) term; both are the exact
derivatives of J and reduce to the textbook forms when ν = 0 (resp. γ = 0).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from apps.utils.expr import ExpressionDomainError, JetBatch, Node, eval_jet_batch, free_variables
from apps.utils.operators import (
    FractionalOrders,
    GridFunction,
    GridSpec,
    left_fractional_difference,
    right_fractional_difference,
)
from apps.utils.special import gamma, h_factorial
from logs.logging_setup import get_logger

LOG = get_logger(
    "variational",
    file_name="fracvar.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

TOL_RESIDUAL = 1e-9
TOL_LEGENDRE = 1e-9


class ProblemError(ValueError):
    pass


class BoundaryConditionError(ValueError):
    pass


class LagrangianDomainError(ArithmeticError):
    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(f"{message} (at t={t!r})")


@dataclass(frozen=True, eq=False)
class VariationalProblem:
    grid: GridSpec
    orders: FractionalOrders
    lagrangian: Node
    left_bc: Optional[float] = None
    right_bc: Optional[float] = None
    source: str = ""

    def __post_init__(self):
        if self.grid.k < 2:
            raise ProblemError(f"need k >= 2 so that T^κ² is nonempty, got k={self.grid.k}")

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def k(self) -> int:
        return self.grid.k

    def trajectory(self, values: Sequence[float]) -> "Trajectory":
        """Full trajectory on T; pinned boundary values must match exactly."""
        y = Trajectory(GridFunction(self.grid, values))
        if self.left_bc is not None and y.values.values[0] != self.left_bc:
            raise ProblemError(f"y(a)={y.values.values[0]!r} but left_bc={self.left_bc!r}")
        if self.right_bc is not None and y.values.values[-1] != self.right_bc:
            raise ProblemError(f"y(b)={y.values.values[-1]!r} but right_bc={self.right_bc!r}")
        return y


@dataclass(frozen=True, eq=False)
class Trajectory:
    values: GridFunction

    @property
    def array(self) -> np.ndarray:
        return self.values.values

    @property
    def interior(self) -> np.ndarray:
        return self.values.values[1:-1]


@dataclass(frozen=True, eq=False)
class ExtremalCandidate:
    trajectory: Trajectory
    functional_value: float
    el_residual_norm: float
    legendre_values: np.ndarray
    legendre_verified: bool
    bc_residual_norm: float = 0.0


# ------------ assembly ------------

def _check_grid(p: VariationalProblem, y: Trajectory) -> None:
    if y.values.grid != p.grid or y.values.offset != 0.0:
        raise ProblemError(f"trajectory lives on {y.values.grid}, problem on {p.grid}")


def _arguments(p: VariationalProblem, y: Trajectory) -> tuple[np.ndarray, ...]:
    f = y.values
    t = p.grid.points(1)
    u = f.values[1:]
    v = left_fractional_difference(f, p.orders.alpha).values
    w = right_fractional_difference(f, p.orders.beta).values
    return t, u, v, w


def _jets(p: VariationalProblem, y: Trajectory) -> JetBatch:
    _check_grid(p, y)
    t, u, v, w = _arguments(p, y)
    try:
        return eval_jet_batch(p.lagrangian, t, u, v, w)
    except ExpressionDomainError as exc:
        raise LagrangianDomainError(str(exc), float(t[exc.index])) from exc


def evaluate_functional(p: VariationalProblem, y: Trajectory) -> float:
    return p.h * math.fsum(_jets(p, y).value)


def euler_lagrange_residual(p: VariationalProblem, y: Trajectory) -> GridFunction:
    jets = _jets(p, y)
    sub = p.grid.truncated(1)
    l_v = GridFunction(sub, jets.L_v)
    l_w = GridFunction(sub, jets.L_w)
    res = (
        jets.L_u[:-1]
        + right_fractional_difference(l_v, p.orders.alpha).values
        + left_fractional_difference(l_w, p.orders.beta).values
    )
    return GridFunction(p.grid.truncated(2), res)


def _left_bc_value(p: VariationalProblem, jets: JetBatch) -> float:
    h, k = p.h, p.k
    gam, nu = p.orders.gamma_order, p.orders.nu_order
    l_v, l_w = jets.L_v, jets.L_w
    terms = [-h ** gam * l_v[0], h ** nu * l_w[0]]
    if gam != 0:
        c = gam / gamma(gam + 1.0)
        terms += [c * h_factorial((i + gam) * h, gam - 1.0, h) * l_v[i] * h for i in range(k)]
        terms += [-c * h_factorial((i - 1 + gam) * h, gam - 1.0, h) * l_v[i] * h for i in range(1, k)]
    return math.fsum(terms)


def _right_bc_value(p: VariationalProblem, jets: JetBatch) -> float:
    h, k = p.h, p.k
    gam, nu = p.orders.gamma_order, p.orders.nu_order
    l_w = jets.L_w
    terms = [h * jets.L_u[-1], h ** gam * jets.L_v[-1], -h ** nu * l_w[-1]]
    if nu != 0:
        c = nu / gamma(nu + 1.0)
        terms += [c * h_factorial((k - i - 1 + nu) * h, nu - 1.0, h) * l_w[i] * h for i in range(k)]
        terms += [-c * h_factorial((k - i - 2 + nu) * h, nu - 1.0, h) * l_w[i] * h for i in range(k - 1)]
    return math.fsum(terms)


def natural_bc_left_residual(p: VariationalProblem, y: Trajectory) -> float:
    if p.left_bc is not None:
        raise BoundaryConditionError("left endpoint is pinned; no natural boundary condition at a")
    return _left_bc_value(p, _jets(p, y))


def natural_bc_right_residual(p: VariationalProblem, y: Trajectory) -> float:
    if p.right_bc is not None:
        raise BoundaryConditionError("right endpoint is pinned; no natural boundary condition at b")
    return _right_bc_value(p, _jets(p, y))


def legendre_lhs(p: VariationalProblem, y: Trajectory) -> GridFunction:
    jets = _jets(p, y)
    h, k = p.h, p.k
    gam, nu = p.orders.gamma_order, p.orders.nu_order
    l_uu, l_uv, l_uw, l_vv, l_vw, l_ww = jets.hess
    names = free_variables(p.lagrangian)
    # memory sums carry only L_ww and L_vv
    c_nu = nu * (1.0 - nu) / gamma(nu + 1.0) if nu != 0 and "w" in names else 0.0
    c_gam = gam * (gam - 1.0) / gamma(gam + 1.0) if gam != 0 and "v" in names else 0.0

    out = np.empty(k - 1)
    for i in range(k - 1):
        terms = [
            h * h * l_uu[i],
            2 * h ** (gam + 1) * l_uv[i],
            2 * h ** (nu + 1) * (nu - 1) * l_uw[i],
            h ** (2 * gam) * (gam - 1) ** 2 * l_vv[i + 1],
            2 * h ** (nu + gam) * (gam - 1) * l_vw[i + 1],
            2 * h ** (nu + gam) * (nu - 1) * l_vw[i],
            h ** (2 * nu) * (nu - 1) ** 2 * l_ww[i],
            h ** (2 * nu) * l_ww[i + 1],
            h ** (2 * gam) * l_vv[i],
        ]
        if c_nu:
            terms += [
                h ** 4 * l_ww[j] * (c_nu * h_factorial((i - j - 1 + nu) * h, nu - 2.0, h)) ** 2
                for j in range(i)
            ]
        if c_gam:
            terms += [
                h ** 4 * l_vv[j] * (c_gam * h_factorial((j - i - 2 + gam) * h, gam - 2.0, h)) ** 2
                for j in range(i + 2, k)
            ]
        out[i] = math.fsum(terms)
    return GridFunction(p.grid.truncated(2), out)


def trajectory_norm(p: VariationalProblem, f: Trajectory) -> float:
    _check_grid(p, f)
    _, u, v, w = _arguments(p, f)
    return float(np.max(np.abs(u)) + np.max(np.abs(v)) + np.max(np.abs(w)))


def summation_by_parts_residual(f: GridFunction, g: GridFunction, alpha: float) -> float:
    """|∫_a^b f aΔ^α g - (boundary terms + ∫_a^{ρ(b)} (hΔ_{ρ(b)}^α f) g^σ + kernel terms at a)|.

    f lives on T^κ, g on T.
    """
    if g.grid.k < 2 or f.grid != g.grid.truncated(1):
        raise ProblemError("summation by parts needs g on T (k >= 2) and f on T^κ")
    h, k = g.grid.h, g.grid.k
    gam = 1.0 - alpha
    fv, gv = f.values, g.values

    d_g = left_fractional_difference(g, alpha).values
    lhs = h * math.fsum(fv[m] * d_g[m] for m in range(k))

    rd_f = right_fractional_difference(f, alpha).values
    terms = [
        h ** gam * fv[-1] * gv[-1],
        -h ** gam * fv[0] * gv[0],
        h * math.fsum(rd_f[i] * gv[i + 1] for i in range(k - 1)),
    ]
    if gam != 0:
        c = gam / gamma(gam + 1.0)
        terms += [c * gv[0] * h * h_factorial((m + gam) * h, gam - 1.0, h) * fv[m] for m in range(k)]
        terms += [-c * gv[0] * h * h_factorial((m - 1 + gam) * h, gam - 1.0, h) * fv[m] for m in range(1, k)]
    return abs(lhs - math.fsum(terms))


# ------------ candidate assessment ------------

def assess(p: VariationalProblem, y: Trajectory, legendre_tol: float = TOL_LEGENDRE) -> ExtremalCandidate:
    jets = _jets(p, y)
    el = euler_lagrange_residual(p, y).values
    bc = []
    if p.left_bc is None:
        bc.append(_left_bc_value(p, jets))
    if p.right_bc is None:
        bc.append(_right_bc_value(p, jets))
    lhs = legendre_lhs(p, y).values
    return ExtremalCandidate(
        trajectory=y,
        functional_value=p.h * math.fsum(jets.value),
        el_residual_norm=float(np.max(np.abs(el))),
        legendre_values=lhs,
        legendre_verified=bool(np.all(lhs >= -legendre_tol)),
        bc_residual_norm=float(max((abs(r) for r in bc), default=0.0)),
    )


# ------------ finite-difference oracles ------------

def _functional_at(p: VariationalProblem, values: np.ndarray) -> float:
    return evaluate_functional(p, Trajectory(GridFunction(p.grid, values)))


def gradient_consistency_error(p: VariationalProblem, y: Trajectory, step: float = 1e-6) -> float:
    """max_τ |∂J/∂y(σ(τ)) - h·EL(τ)| / (1 + |h·EL(τ)|), central differences."""
    el = euler_lagrange_residual(p, y).values
    base = np.array(y.array, dtype=float)
    worst = 0.0
    for i, r in enumerate(el):
        plus, minus = base.copy(), base.copy()
        plus[i + 1] += step
        minus[i + 1] -= step
        fd = (_functional_at(p, plus) - _functional_at(p, minus)) / (2 * step)
        worst = max(worst, abs(fd - p.h * r) / (1.0 + abs(p.h * r)))
    return worst


def hessian_consistency_error(p: VariationalProblem, y: Trajectory, step: float = 1e-4) -> float:
    """max_τ |Φ''(0) - h·LHS(τ)| / (1 + |h·LHS(τ)|) for η = h at σ(τ), zero elsewhere."""
    lhs = legendre_lhs(p, y).values
    base = np.array(y.array, dtype=float)
    centre = _functional_at(p, base)
    worst = 0.0
    for i, value in enumerate(lhs):
        plus, minus = base.copy(), base.copy()
        plus[i + 1] += step * p.h
        minus[i + 1] -= step * p.h
        second = (_functional_at(p, plus) - 2 * centre + _functional_at(p, minus)) / step ** 2
        worst = max(worst, abs(second - p.h * value) / (1.0 + abs(p.h * value)))
    return worst
