"""
cgl-control: finite-dimensional boundary feedback for the complex
Ginzburg-Landau equation on an interval.
"""

__version__ = "0.1.0"
