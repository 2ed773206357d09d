"""
Reference curves the sweeps are compared against.

ex1: y(t) = 1/2 ∫_0^t dx / [(1-x)(t-x)]^{1/4}, the continuous extremal of
     min 1/2 ∫ (0Δ^{3/4} y)^2 with y(0)=0, y(1)=1.
ex2: y(t) = t(1-t)/2.
"""
from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy import integrate

from logs.logging_setup import get_logger

LOG = get_logger(
    "reference",
    file_name="fracvar_cli.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

ABS_TOL = 1e-8


class QuadratureError(ArithmeticError):
    pass


def _quad(func, lo, hi, **kwargs) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(func, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=200, **kwargs)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    if not np.isfinite(value) or err > ABS_TOL:
        raise QuadratureError(f"quadrature error estimate {err:.3g} above {ABS_TOL}")
    return float(value)


def reference_quadrature_ex1(t: float, scheme: str = "substitution") -> float:
    """
    substitution: x = t - u^{4/3} removes the (t-x)^{-1/4} endpoint singularity,
                  y(t) = 2/3 ∫_0^{t^{3/4}} (1 - t + u^{4/3})^{-1/4} du
    algebraic:    QAWS with weight (t-x)^{-1/4} on (1-x)^{-1/4}; at t = 1 the two
                  factors merge into the single weight (1-x)^{-1/2}
    """
    if not (0.0 < t <= 1.0):
        raise ValueError(f"t must lie in (0, 1], got {t!r}")
    if scheme == "substitution":
        upper = t ** 0.75
        return (2.0 / 3.0) * _quad(lambda u: (1.0 - t + u ** (4.0 / 3.0)) ** -0.25, 0.0, upper)
    if scheme == "algebraic":
        if t == 1.0:
            return 0.5 * _quad(lambda x: 1.0, 0.0, 1.0, weight="alg", wvar=(0.0, -0.5))
        return 0.5 * _quad(lambda x: (1.0 - x) ** -0.25, 0.0, t, weight="alg", wvar=(0.0, -0.25))
    raise ValueError(f"unknown quadrature scheme {scheme!r}")


def quadratic_reference(t: float) -> float:
    return 0.5 * t * (1.0 - t)


def reference_curve(name: str, t: np.ndarray) -> np.ndarray:
    """Reference values on a grid; points where quadrature fails become NaN."""
    out = np.empty(len(t))
    for i, ti in enumerate(t):
        if name == "quadratic":
            out[i] = quadratic_reference(float(ti))
        elif name == "ex1_quadrature":
            if ti <= 0.0:
                out[i] = 0.0
                continue
            try:
                out[i] = reference_quadrature_ex1(min(float(ti), 1.0))
            except QuadratureError as exc:
                LOG.warning(f"[reference] quadrature failed at t={ti!r}: {exc}")
                out[i] = np.nan
        else:
            raise ValueError(f"unknown reference curve {name!r}")
    return out
