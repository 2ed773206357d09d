"""
Gamma machinery for grids on (hZ)_a.

    gamma(x)                       Euler gamma, poles and overflow reported separately
    gamma_ratio(num, den)          Γ(num)/Γ(den) through log-gamma with sign tracking
    h_factorial(x, y, h)           x_h^(y) = h^y Γ(x/h+1) / Γ(x/h+1-y)
    generalized_polynomial(k,t,s,h) H_k(t,s) = (t-s)_h^(k) / k!

Pole convention: z is "at a pole" when |z - round(z)| < POLE_TOL and round(z) <= 0.
A pole in the denominator alone makes a ratio vanish. When both arguments sit on
poles the ratio is replaced by its limit (-1)^(den-num) Γ(1-den)/Γ(1-num).
"""
from __future__ import annotations

import math

from scipy import special as sp

POLE_TOL = 1e-9
# Γ(x) overflows a double just above this
GAMMA_MAX_ARG = 171.6243769563027


class GammaPoleError(ArithmeticError):
    """Γ evaluated at (or within POLE_TOL of) a nonpositive integer."""


class GammaOverflowError(OverflowError):
    """Γ(x) is finite mathematically but exceeds the float range."""


def at_pole(z: float) -> bool:
    r = round(z)
    return r <= 0 and abs(z - r) < POLE_TOL


def gamma(x: float) -> float:
    x = float(x)
    if at_pole(x):
        raise GammaPoleError(f"gamma pole at x={x!r}")
    if x > GAMMA_MAX_ARG:
        raise GammaOverflowError(f"gamma({x!r}) overflows double precision")
    value = float(sp.gamma(x))
    if not math.isfinite(value):
        raise GammaOverflowError(f"gamma({x!r}) is not representable")
    return value


def gamma_ratio(num: float, den: float) -> float:
    num = float(num)
    den = float(den)
    num_pole = at_pole(num)
    den_pole = at_pole(den)

    if num_pole and den_pole:
        # Γ(-n)/Γ(-m) -> (-1)^(m-n) Γ(m+1)/Γ(n+1) with n=-num, m=-den
        n_num = round(num)
        n_den = round(den)
        sign = -1.0 if (n_den - n_num) % 2 else 1.0
        return sign * math.exp(sp.gammaln(1 - n_den) - sp.gammaln(1 - n_num))
    if den_pole:
        return 0.0
    if num_pole:
        raise GammaPoleError(f"gamma_ratio numerator at pole: num={num!r}, den={den!r}")

    if num == den:
        return 1.0
    log_mag = float(sp.gammaln(num) - sp.gammaln(den))
    sign = float(sp.gammasgn(num) * sp.gammasgn(den))
    if log_mag > 709.0:
        raise GammaOverflowError(f"gamma_ratio({num!r}, {den!r}) overflows")
    return sign * math.exp(log_mag)


def h_factorial(x: float, y: float, h: float) -> float:
    if h <= 0:
        raise ValueError(f"h must be positive, got h={h!r}")
    if y == 0:
        return 1.0
    z = x / h + 1.0
    return h ** y * gamma_ratio(z, z - y)


def generalized_polynomial(k: int, t: float, s: float, h: float) -> float:
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a nonnegative integer, got k={k!r}")
    if k == 0:
        return 1.0
    return h_factorial(t - s, float(k), h) / math.factorial(int(k))

