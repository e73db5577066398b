"""Exponential decay rates fitted to norm histories."""

import numpy as np

from cgl_control.errors import WindowError
from cgl_control.solvers.base import RunRecord


def fit_decay_rate(record: RunRecord, window: tuple[float, float], norm: str = "h1") -> float:
    """
    Least-squares slope of log(norm) over ``window``, negated so that a
    positive value means decay.
    """
    history = {"h1": record.h1_history, "l2": record.l2_history}.get(norm)
    if history is None:
        raise ValueError(f"unknown norm '{norm}' (expected 'h1' or 'l2')")
    t_a, t_b = window
    mask = (record.times >= t_a - 1e-12) & (record.times <= t_b + 1e-12)
    if mask.sum() < 2:
        raise WindowError(f"window [{t_a}, {t_b}] holds fewer than two samples")
    values = history[mask]
    if np.any(values <= 0):
        raise WindowError(f"non-positive {norm} norm inside window [{t_a}, {t_b}]")
    slope, _ = np.polyfit(record.times[mask], np.log(values), 1)
    return float(-slope)
