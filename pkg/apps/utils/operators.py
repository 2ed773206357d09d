"""
Grids on (hZ)_a and the fractional h-sum / h-difference operators.

A GridSpec(a, h, k) is T = {a, a+h, ..., a+k*h}. A GridFunction carries an offset so
the shifted domains {t + nu*h} and {t - nu*h} of the fractional sums are explicit:
domain point i is a + offset + i*h.

Both fractional sums are Toeplitz in the grid index. The weight of f(s_j) in the
left sum at t_i + nu*h (and of f(s_j) in the right sum at t_i - nu*h) is

    w_n = h * ((n - 1 + nu) h)_h^(nu-1) / Γ(nu),   n = |i - j|

so w_0 = h^nu and, for nu = 1, every w_n = h. Weight vectors are cached per
(n_max, h, nu); rows are accumulated in index order with math.fsum.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from apps.utils.special import gamma, h_factorial
from logs.logging_setup import get_logger

LOG = get_logger(
    "operators",
    file_name="fracvar.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

INDEX_TOL = 1e-9


class GridError(ValueError):
    """Invalid grid, point off the grid, or mismatched domains."""


class OrderError(ValueError):
    """Fractional order outside its admissible range."""


# ------------ grids ------------

@dataclass(frozen=True)
class GridSpec:
    a: float
    h: float
    k: int

    def __post_init__(self):
        if not self.h > 0:
            raise GridError(f"step h must be positive, got h={self.h!r}")
        if int(self.k) != self.k or self.k < 0:
            raise GridError(f"k must be a nonnegative integer, got k={self.k!r}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "k", int(self.k))

    @property
    def b(self) -> float:
        return self.point(self.k)

    @property
    def n_points(self) -> int:
        return self.k + 1

    def point(self, i: int) -> float:
        return self.a + i * self.h

    def points(self, kappa: int = 0) -> np.ndarray:
        """Points of T, T^κ (kappa=1) or T^{κ²} (kappa=2)."""
        n = self.k + 1 - kappa
        if n < 1:
            raise GridError(f"T^κ{kappa} is empty for k={self.k}")
        return self.a + np.arange(n) * self.h

    def truncated(self, kappa: int = 1) -> "GridSpec":
        if self.k - kappa < 0:
            raise GridError(f"cannot drop {kappa} point(s) from a grid with k={self.k}")
        return GridSpec(self.a, self.h, self.k - kappa)

    def index_of(self, t: float, offset: float = 0.0) -> int:
        x = (t - self.a - offset) / self.h
        i = round(x)
        if abs(x - i) > INDEX_TOL or i < 0 or i > self.k:
            raise GridError(f"t={t!r} is not a point of the grid {self} (offset={offset!r})")
        return int(i)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: GridSpec
    values: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.shape[0] != self.grid.n_points:
            raise GridError(
                f"expected {self.grid.n_points} values for {self.grid}, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_callable(cls, grid: GridSpec, fn: Callable[[float], float], offset: float = 0.0) -> "GridFunction":
        pts = grid.a + offset + np.arange(grid.n_points) * grid.h
        return cls(grid, np.array([fn(float(t)) for t in pts]), offset)

    @property
    def points(self) -> np.ndarray:
        return self.grid.a + self.offset + np.arange(self.grid.n_points) * self.grid.h

    def __len__(self) -> int:
        return self.grid.n_points


@dataclass(frozen=True)
class FractionalOrders:
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                raise OrderError(f"{name} must lie in (0, 1], got {value!r}")

    @property
    def gamma_order(self) -> float:
        return 1.0 - self.alpha

    @property
    def nu_order(self) -> float:
        return 1.0 - self.beta


# ------------ kernels ------------

def kernel_weight(n: int, nu: float, h: float) -> float:
    """Weight of a sample n steps away in a fractional sum of order nu > 0."""
    return h * h_factorial((n - 1 + nu) * h, nu - 1.0, h) / gamma(nu)


@lru_cache(maxsize=512)
def _kernel_weights(n_max: int, h: float, nu: float) -> tuple[float, ...]:
    LOG.debug(f"[kernel] build n_max={n_max} h={h} nu={nu}")
    return tuple(kernel_weight(n, nu, h) for n in range(n_max + 1))


def clear_kernel_cache() -> None:
    _kernel_weights.cache_clear()


def _left_sum_values(values: np.ndarray, nu: float, h: float) -> np.ndarray:
    n = len(values)
    if nu == 0:
        return np.array(values, dtype=float)
    w = _kernel_weights(n - 1, h, nu)
    return np.array([math.fsum(w[i - j] * values[j] for j in range(i + 1)) for i in range(n)])


def _right_sum_values(values: np.ndarray, nu: float, h: float) -> np.ndarray:
    n = len(values)
    if nu == 0:
        return np.array(values, dtype=float)
    w = _kernel_weights(n - 1, h, nu)
    return np.array([math.fsum(w[j - i] * values[j] for j in range(i, n)) for i in range(n)])


def _check_positive_order(nu: float) -> None:
    if not nu > 0:
        raise OrderError(f"fractional sum order must be > 0, got nu={nu!r}")


def _check_unit_order(name: str, value: float) -> None:
    if not (0.0 < value <= 1.0):
        raise OrderError(f"{name} must lie in (0, 1], got {value!r}")


# ------------ operators ------------

def delta_derivative(f: GridFunction) -> GridFunction:
    if f.grid.n_points < 2:
        raise GridError("delta derivative needs at least 2 points")
    return GridFunction(f.grid.truncated(1), np.diff(f.values) / f.grid.h, f.offset)


def h_integral(f: GridFunction, lo: float, hi: float) -> float:
    i_lo = f.grid.index_of(lo, f.offset)
    i_hi = f.grid.index_of(hi, f.offset)
    if i_lo > i_hi:
        raise GridError(f"h_integral needs lo <= hi, got lo={lo!r} hi={hi!r}")
    return f.grid.h * math.fsum(f.values[i_lo:i_hi])


def left_fractional_sum(f: GridFunction, nu: float) -> GridFunction:
    _check_positive_order(nu)
    h = f.grid.h
    return GridFunction(f.grid, _left_sum_values(f.values, nu, h), f.offset + nu * h)


def right_fractional_sum(f: GridFunction, nu: float) -> GridFunction:
    _check_positive_order(nu)
    h = f.grid.h
    return GridFunction(f.grid, _right_sum_values(f.values, nu, h), f.offset - nu * h)


def left_fractional_difference(f: GridFunction, alpha: float) -> GridFunction:
    """(aΔ^{-γ} f(t + γh))^Δ on T^κ, γ = 1 - alpha; alpha = 1 is the forward difference."""
    _check_unit_order("alpha", alpha)
    gam = 1.0 - alpha
    if gam == 0:
        return delta_derivative(f)
    s = _left_sum_values(f.values, gam, f.grid.h)
    return GridFunction(f.grid.truncated(1), np.diff(s) / f.grid.h, f.offset)


def right_fractional_difference(f: GridFunction, beta: float) -> GridFunction:
    """-(hΔ_b^{-ν} f(t - νh))^Δ on T^κ, ν = 1 - beta."""
    _check_unit_order("beta", beta)
    nu = 1.0 - beta
    if nu == 0:
        d = delta_derivative(f)
        return GridFunction(d.grid, -d.values, d.offset)
    r = _right_sum_values(f.values, nu, f.grid.h)
    return GridFunction(f.grid.truncated(1), -np.diff(r) / f.grid.h, f.offset)


def left_sum_split_form(f: GridFunction, nu: float) -> GridFunction:
    """h^ν f(t) + ν/Γ(ν+1) Σ_{s<t} h (t+νh-σ(s))_h^(ν-1) f(s), evaluated at t + νh."""
    _check_positive_order(nu)
    h = f.grid.h
    c = nu / gamma(nu + 1.0)
    vals = f.values
    out = [
        h ** nu * vals[i]
        + c * math.fsum(h * h_factorial((i - j - 1 + nu) * h, nu - 1.0, h) * vals[j] for j in range(i))
        for i in range(len(vals))
    ]
    return GridFunction(f.grid, np.array(out), f.offset + nu * h)


def right_sum_split_form(f: GridFunction, nu: float) -> GridFunction:
    """h^ν f(t) + ν/Γ(ν+1) Σ_{s>t} h (s+νh-σ(t))_h^(ν-1) f(s), evaluated at t - νh."""
    _check_positive_order(nu)
    h = f.grid.h
    c = nu / gamma(nu + 1.0)
    vals = f.values
    n = len(vals)
    out = [
        h ** nu * vals[i]
        + c * math.fsum(h * h_factorial((j - i - 1 + nu) * h, nu - 1.0, h) * vals[j] for j in range(i + 1, n))
        for i in range(n)
    ]
    return GridFunction(f.grid, np.array(out), f.offset - nu * h)


# ------------ identity residuals ------------

def left_shift_identity_residual(f: GridFunction, nu: float) -> float:
    """max over T^κ of |aΔ^{-ν} f^Δ(t+νh) - (aΔ^{-ν} f(t+νh))^Δ + ν/Γ(ν+1) (t+νh-a)_h^(ν-1) f(a)|."""
    if nu < 0:
        raise OrderError(f"nu must be >= 0, got {nu!r}")
    if nu == 0:
        return 0.0
    h = f.grid.h
    df = delta_derivative(f)
    lhs = _left_sum_values(df.values, nu, h)
    s = _left_sum_values(f.values, nu, h)
    c = nu / gamma(nu + 1.0)
    f_a = f.values[0]
    rhs = np.array([
        (s[i + 1] - s[i]) / h - c * h_factorial((i + nu) * h, nu - 1.0, h) * f_a
        for i in range(f.grid.k)
    ])
    return float(np.max(np.abs(lhs - rhs)))


def right_shift_identity_residual(f: GridFunction, nu: float) -> float:
    """max over T^κ of |hΔ_{ρ(b)}^{-ν} f^Δ(t-νh) - ν/Γ(ν+1)(b+νh-σ(t))_h^(ν-1) f(b) - (hΔ_b^{-ν} f(t-νh))^Δ|."""
    if nu < 0:
        raise OrderError(f"nu must be >= 0, got {nu!r}")
    if nu == 0:
        return 0.0
    h = f.grid.h
    k = f.grid.k
    df = delta_derivative(f)
    lhs = _right_sum_values(df.values, nu, h)
    r = _right_sum_values(f.values, nu, h)
    c = nu / gamma(nu + 1.0)
    f_b = f.values[-1]
    rhs = np.array([
        c * h_factorial((k - i - 1 + nu) * h, nu - 1.0, h) * f_b + (r[i + 1] - r[i]) / h
        for i in range(k)
    ])
    return float(np.max(np.abs(lhs - rhs)))


def exchange_lemma_residual(f: GridFunction, k: GridFunction, g: Callable[[float, float], float]) -> float:
    """|∫_a^b f(t) ∫_a^t g(t,s) k(s) Δs Δt - ∫_a^{ρ(b)} k(t) ∫_{σ(t)}^b g(s,t) f(s) Δs Δt|.

    f lives on T^κ, k on T^{κ²}; g is any callable of two grid times.
    """
    if f.grid.a != k.grid.a or f.grid.h != k.grid.h or k.grid.n_points != f.grid.n_points - 1:
        raise GridError("exchange lemma needs f on T^κ and k on T^{κ²} of the same grid")
    h = f.grid.h
    t = f.points
    fv = f.values
    kv = k.values
    m_pts = len(fv)
    lhs = math.fsum(
        h * fv[m] * math.fsum(h * g(t[m], t[j]) * kv[j] for j in range(m))
        for m in range(m_pts)
    )
    rhs = math.fsum(
        h * kv[j] * math.fsum(h * g(t[m], t[j]) * fv[m] for m in range(j + 1, m_pts))
        for j in range(len(kv))
    )
    return abs(lhs - rhs)
