"""Decibel and dBm conversions.

All configuration surfaces take dB/dBm; everything internal is linear
(watts for powers). Conversion happens exactly once, at load time.
"""

from __future__ import annotations

import numpy as np


def db_to_linear(x_db: float) -> float:
    """Convert a dB ratio to a linear ratio."""
    return float(10.0 ** (np.asarray(x_db, dtype=float) / 10.0))


def linear_to_db(x: float) -> float:
    """Convert a linear ratio to dB. Requires x > 0."""
    x = float(x)
    if x <= 0.0:
        raise ValueError(f"dB undefined for non-positive value {x}")
    return float(10.0 * np.log10(x))


def dbm_to_watts(x_dbm: float) -> float:
    """Convert a power in dBm to watts."""
    return db_to_linear(float(x_dbm) - 30.0)


def watts_to_dbm(x_w: float) -> float:
    """Convert a power in watts to dBm. Requires x_w > 0."""
    return linear_to_db(x_w) + 30.0
