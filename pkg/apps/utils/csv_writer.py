"""
CSV emission for trajectories and sweeps.

Every file has a header row and a leading "t" column; floats are written with
17 significant digits so a re-read reproduces them exactly.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from logs.logging_setup import get_logger

LOG = get_logger(
    "csv_writer",
    file_name="fracvar.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

FLOAT_FORMAT = "%.17g"
# grid times from different steps are matched on this many decimals
T_DECIMALS = 12


def _write(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    LOG.info(f"[csv] wrote {len(df)} row(s) x {len(df.columns)} col(s) -> {path}")
    return path


def write_trajectories(path, t: Sequence[float], columns: Mapping[str, Sequence[float]]) -> Path:
    df = pd.DataFrame({"t": np.asarray(t, dtype=float)})
    for name, values in columns.items():
        df[name] = np.asarray(values, dtype=float)
    return _write(df, path)


def write_sweep(path, series: Sequence[tuple[str, Sequence[float], Sequence[float], Optional[Sequence[float]]]]) -> Path:
    """
    series: (label, t, y, deviation) per sweep value. The t column is the sorted union
    of all grids; cells off a given grid stay empty.
    """
    merged: Optional[pd.DataFrame] = None
    exact_t: dict[float, float] = {}
    for label, t, y, dev in series:
        t = np.asarray(t, dtype=float)
        key = np.round(t, T_DECIMALS)
        for k_, t_ in zip(key, t):
            exact_t.setdefault(float(k_), float(t_))
        frame = pd.DataFrame({
            "_key": key,
            f"y[{label}]": np.asarray(y, dtype=float),
            f"dev[{label}]": np.asarray(dev, dtype=float) if dev is not None else np.full(len(t), np.nan),
        })
        merged = frame if merged is None else merged.merge(frame, on="_key", how="outer")
    if merged is None:
        merged = pd.DataFrame({"_key": []})
    merged = merged.sort_values("_key", kind="mergesort").reset_index(drop=True)
    merged.insert(0, "t", [exact_t[float(k_)] for k_ in merged["_key"]])
    merged = merged.drop(columns="_key")
    return _write(merged, path)


def read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
