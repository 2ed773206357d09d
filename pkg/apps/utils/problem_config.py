"""
Usage Examples:

from apps.utils.problem_config import load_problem, load_settings, solver_defaults

settings = load_settings()                      # configs/fracvar/settings.yml
cfg = load_problem("configs/problems/cubic.cfg")
problem = cfg.to_problem()
solver_cfg = cfg.solver_config(solver_defaults(settings), seed=7)

Problem files are flat "key = value" lines with "#" comments:

    a = 0
    b = 1                # or: k = 4
    h = 0.25
    alpha = 0.8
    beta = 0.5           # optional, defaults to 1
    lagrangian = v^3 + 1*w^2
    left_bc = 0          # omit or "free" for a natural boundary condition
    right_bc = 1
    n_starts = 500       # optional solver overrides

A .yml/.yaml file with the same flat keys is accepted as well.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import yaml

from apps.utils.expr import ExpressionSyntaxError, parse
from apps.utils.operators import FractionalOrders, GridError, GridSpec, OrderError
from apps.utils.solver import SolverConfig
from apps.utils.variational import ProblemError, VariationalProblem
from logs.logging_setup import get_logger

LOG = get_logger(
    "problem_config",
    file_name="fracvar.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

REPO_ROOT = Path(__file__).resolve().parents[2]
SETTINGS_PATH = REPO_ROOT / "configs" / "fracvar" / "settings.yml"
EXAMPLES_PATH = REPO_ROOT / "configs" / "problems" / "examples.yml"

SNAP_TOL = 1e-9

FLOAT_KEYS = ("a", "b", "h", "alpha", "beta", "init_lo", "init_hi", "residual_tol", "dedupe_tol", "step_tol")
INT_KEYS = ("k", "n_starts", "seed", "max_iters", "workers")
BC_KEYS = ("left_bc", "right_bc")
KNOWN_KEYS = set(FLOAT_KEYS) | set(INT_KEYS) | set(BC_KEYS) | {"lagrangian"}
SOLVER_KEYS = ("n_starts", "seed", "max_iters", "residual_tol", "dedupe_tol", "step_tol", "workers")


class ConfigError(ValueError):
    pass


# ------------ settings ------------

def load_settings(config_path=None) -> dict:
    """
    Load application settings (solver defaults, logging, check sizes) from YAML.
    """
    if config_path is None:
        config_path = SETTINGS_PATH
    with open(config_path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    return data


def solver_defaults(settings: Optional[dict] = None) -> SolverConfig:
    data = dict((settings or {}).get("solver") or {})
    if "init_box" in data:
        data["init_box"] = tuple(float(x) for x in data["init_box"])
    unknown = set(data) - {f.name for f in dataclasses.fields(SolverConfig)}
    if unknown:
        raise ConfigError(f"unknown solver settings: {sorted(unknown)}")
    try:
        return SolverConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc


# ------------ value parsing ------------

def parse_number(text: Any) -> float:
    """Float from a literal such as 0.25, 1e-3 or 1/30."""
    if isinstance(text, bool):
        raise ValueError(f"expected a number, got {text!r}")
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    if "/" in s:
        return float(Fraction(s))
    return float(s)


def _coerce(key: str, raw: Any, origin: str) -> Any:
    try:
        if key in FLOAT_KEYS:
            return parse_number(raw)
        if key in INT_KEYS:
            if isinstance(raw, bool) or (isinstance(raw, float) and not raw.is_integer()):
                raise ValueError(raw)
            return int(str(raw).strip()) if not isinstance(raw, (int, float)) else int(raw)
        if key in BC_KEYS:
            if raw is None or str(raw).strip().lower() in ("", "free", "none"):
                return None
            return parse_number(raw)
        return str(raw).strip()
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{origin}: invalid value for '{key}': {raw!r}") from exc


# ------------ problem config ------------

@dataclass(frozen=True)
class ProblemConfig:
    a: float
    h: float
    k: int
    alpha: float
    lagrangian: str
    beta: float = 1.0
    left_bc: Optional[float] = None
    right_bc: Optional[float] = None
    solver_overrides: dict = field(default_factory=dict)
    origin: str = "<config>"

    @property
    def b(self) -> float:
        return self.a + self.k * self.h

    def grid(self) -> GridSpec:
        return GridSpec(self.a, self.h, self.k)

    def orders(self) -> FractionalOrders:
        return FractionalOrders(self.alpha, self.beta)

    def to_problem(self) -> VariationalProblem:
        try:
            return VariationalProblem(
                grid=self.grid(),
                orders=self.orders(),
                lagrangian=parse(self.lagrangian),
                left_bc=self.left_bc,
                right_bc=self.right_bc,
                source=self.lagrangian,
            )
        except (ExpressionSyntaxError, GridError, OrderError, ProblemError) as exc:
            raise ConfigError(f"{self.origin}: {exc}") from exc

    def solver_config(self, base: SolverConfig, seed: Optional[int] = None, starts: Optional[int] = None,
                      workers: Optional[int] = None) -> SolverConfig:
        """settings.yml defaults < problem-file keys < command-line flags."""
        over = dict(self.solver_overrides)
        lo = over.pop("init_lo", base.init_box[0])
        hi = over.pop("init_hi", base.init_box[1])
        over["init_box"] = (lo, hi)
        for key, value in (("seed", seed), ("n_starts", starts), ("workers", workers)):
            if value is not None:
                over[key] = value
        try:
            return dataclasses.replace(base, **over)
        except ValueError as exc:
            raise ConfigError(f"{self.origin}: {exc}") from exc

    def with_step(self, h: float) -> "ProblemConfig":
        return dataclasses.replace(self, h=h, k=snap_steps(self.a, self.b, h, self.origin))

    def with_alpha(self, alpha: float) -> "ProblemConfig":
        _check_order("alpha", alpha, self.origin)
        return dataclasses.replace(self, alpha=alpha)


def snap_steps(a: float, b: float, h: float, origin: str = "<config>") -> int:
    if not h > 0:
        raise ConfigError(f"{origin}: h must be positive, got {h!r}")
    ratio = (b - a) / h
    n = round(ratio)
    if abs(ratio - n) > SNAP_TOL or n < 1:
        raise ConfigError(f"{origin}: (b - a)/h = {ratio!r} is not a positive integer")
    return int(n)


def _check_order(name: str, value: float, origin: str) -> None:
    if not (0.0 < value <= 1.0):
        raise ConfigError(f"{origin}: {name} must lie in (0, 1], got {value!r}")


def problem_from_mapping(raw: dict, origin: str = "<config>") -> ProblemConfig:
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"{origin}: unknown key(s) {sorted(unknown)}")
    values = {key: _coerce(key, val, origin) for key, val in raw.items()}

    for key in ("a", "h", "alpha", "lagrangian"):
        if key not in values:
            raise ConfigError(f"{origin}: missing required key '{key}'")
    a, h = values["a"], values["h"]
    if "b" in values:
        k = snap_steps(a, values["b"], h, origin)
        if "k" in values and values["k"] != k:
            raise ConfigError(f"{origin}: b and k disagree (k={values['k']}, (b-a)/h={k})")
    elif "k" in values:
        k = values["k"]
        if k < 1 or not h > 0:
            raise ConfigError(f"{origin}: need k >= 1 and h > 0")
    else:
        raise ConfigError(f"{origin}: give either 'b' or 'k'")

    alpha = values["alpha"]
    beta = values.get("beta", 1.0)
    _check_order("alpha", alpha, origin)
    _check_order("beta", beta, origin)
    if not values["lagrangian"]:
        raise ConfigError(f"{origin}: empty lagrangian")

    overrides = {key: values[key] for key in (*SOLVER_KEYS, "init_lo", "init_hi") if key in values}
    return ProblemConfig(
        a=a, h=h, k=k, alpha=alpha, beta=beta,
        lagrangian=values["lagrangian"],
        left_bc=values.get("left_bc"),
        right_bc=values.get("right_bc"),
        solver_overrides=overrides,
        origin=origin,
    )


def parse_problem_text(text: str, origin: str = "<string>") -> ProblemConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in body.split("=", 1))
        if key in raw:
            raise ConfigError(f"{origin}:{lineno}: duplicate key '{key}'")
        raw[key] = value
    return problem_from_mapping(raw, origin)


def load_problem(path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix.lower() in (".yml", ".yaml"):
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a flat mapping")
        return problem_from_mapping(data, str(path))
    return parse_problem_text(text, str(path))


# ------------ example registry ------------

@dataclass(frozen=True)
class ExampleEntry:
    example_id: str
    config_path: Path
    reference: Optional[str]
    sweep_param: str
    sweep_values: tuple[float, ...]
    fixed: dict = field(default_factory=dict)
    description: str = ""


def load_examples(config_path=None) -> dict[str, ExampleEntry]:
    """Map example ids (ex1, ex2, ex3, ...) to their problem file and default sweep."""
    if config_path is None:
        config_path = EXAMPLES_PATH
    config_path = Path(config_path)
    with open(config_path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}

    entries: dict[str, ExampleEntry] = {}
    for example_id, item in (data.get("examples") or {}).items():
        sweep = dict(item.get("sweep") or {})
        lists = [key for key, val in sweep.items() if isinstance(val, list)]
        if len(lists) != 1:
            raise ConfigError(f"{config_path}: example '{example_id}' needs exactly one swept parameter")
        param = lists[0]
        values = tuple(parse_number(x) for x in sweep.pop(param))
        fixed = {key: parse_number(val) for key, val in sweep.items()}
        reference = item.get("reference")
        entries[example_id] = ExampleEntry(
            example_id=example_id,
            config_path=config_path.parent / item["config"],
            reference=None if reference in (None, "none") else str(reference),
            sweep_param=param,
            sweep_values=values,
            fixed=fixed,
            description=str(item.get("description", "")),
        )
    return entries
