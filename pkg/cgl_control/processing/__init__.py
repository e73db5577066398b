"""
Processing helpers: initial data and CSV export.
"""

from .export import read_csv, write_csv, write_final_state, write_kernel_csv, write_norms, write_text
from .initial_data import (
    PRESETS,
    eigenmode_series,
    exp1_profile,
    exp2_profile,
    resolve_profile,
    sample_profile,
    sine_series,
    zero_profile,
)

__all__ = [
    "PRESETS",
    "exp1_profile",
    "exp2_profile",
    "zero_profile",
    "sine_series",
    "eigenmode_series",
    "resolve_profile",
    "sample_profile",
    "write_csv",
    "read_csv",
    "write_text",
    "write_norms",
    "write_final_state",
    "write_kernel_csv",
]
