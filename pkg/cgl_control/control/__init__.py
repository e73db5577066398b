"""
Feedback law and decay-rate planning.
"""

from .controller import (
    ControlLaw,
    build_control_law,
    feedback,
    feedback_gain,
    instability_level,
    minimal_mode_plan,
    mu_window,
    predicted_eta,
    rapid_mode_count,
    rapid_plan,
)

__all__ = [
    "ControlLaw",
    "build_control_law",
    "feedback",
    "feedback_gain",
    "instability_level",
    "rapid_mode_count",
    "rapid_plan",
    "mu_window",
    "minimal_mode_plan",
    "predicted_eta",
]
