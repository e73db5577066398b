"""
Initial data - turn an InitialDatum selector into a function of x.

Responsibilities:
- Named presets for the two reference experiments
- Sine and eigenmode coefficient sums with complex coefficients
- Sampling on a grid
"""

from collections.abc import Callable

import numpy as np

from cgl_control.errors import ConfigError
from cgl_control.models.experiment import InitialDatum
from cgl_control.models.params import Grid

Profile = Callable[[np.ndarray], np.ndarray]


# =============================================================================
# PRESETS
# =============================================================================

def exp1_profile(x: np.ndarray) -> np.ndarray:
    """sin(2 pi x) - sin(3 pi x) / 2"""
    x = np.asarray(x, dtype=float)
    return (np.sin(2 * np.pi * x) - 0.5 * np.sin(3 * np.pi * x)).astype(complex)


def exp2_profile(x: np.ndarray) -> np.ndarray:
    """2x - 1 - cos(pi x) - 2i sin(2 pi x); equals -2 at x = 0."""
    x = np.asarray(x, dtype=float)
    return 2 * x - 1 - np.cos(np.pi * x) - 2j * np.sin(2 * np.pi * x)


def zero_profile(x: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(x), dtype=complex)


PRESETS: dict[str, Profile] = {
    "exp1": exp1_profile,
    "exp2": exp2_profile,
    "zero": zero_profile,
}


# =============================================================================
# COEFFICIENT SUMS
# =============================================================================

def _complex_coefficients(re: list[float], im: list[float]) -> np.ndarray:
    n = max(len(re), len(im))
    c = np.zeros(n, dtype=complex)
    c[: len(re)] += np.asarray(re, dtype=float)
    c[: len(im)] += 1j * np.asarray(im, dtype=float)
    return c


def sine_series(re: list[float], im: list[float], L: float) -> Profile:
    """x -> sum_k c_k sin(k pi x / L), k = 1, 2, ..."""
    c = _complex_coefficients(re, im)
    k = np.arange(1, c.size + 1)

    def profile(x):
        x = np.asarray(x, dtype=float)
        return np.sin(np.multiply.outer(x, k) * np.pi / L) @ c

    return profile


def eigenmode_series(re: list[float], im: list[float], L: float) -> Profile:
    """x -> sum_j c_j e_j(x), e_j = sqrt(2/L) sin((2j - 1) pi x / (2L))."""
    c = _complex_coefficients(re, im)
    j = np.arange(1, c.size + 1)

    def profile(x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(2 / L) * np.sin(np.multiply.outer(x, 2 * j - 1) * np.pi / (2 * L)) @ c

    return profile


# =============================================================================
# RESOLUTION
# =============================================================================

def resolve_profile(datum: InitialDatum, L: float) -> Profile:
    """Preset, or the sum of the sine and eigenmode series."""
    if datum.preset is not None:
        try:
            return PRESETS[datum.preset]
        except KeyError:
            raise ConfigError(f"unknown initial-datum preset '{datum.preset}' (known: {', '.join(PRESETS)})")

    sine = sine_series(datum.sine_re, datum.sine_im, L)
    eigen = eigenmode_series(datum.eigen_re, datum.eigen_im, L)
    return lambda x: sine(x) + eigen(x)


def sample_profile(datum: InitialDatum, grid: Grid) -> np.ndarray:
    return np.asarray(resolve_profile(datum, grid.L)(grid.nodes), dtype=complex)
