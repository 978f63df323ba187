"""Spectral laboratory for the stability threshold of 2D Couette flow."""
from .spectral import Grid, SpectralField, PhysicalField
from .multipliers import WeightParams
from .linear import LinearSolution, evolve_linear
from .solver import SimConfig, simulate
from .errors import CouetteLabError

__version__ = "0.1.0"

__all__ = [
    "Grid", "SpectralField", "PhysicalField", "WeightParams", "LinearSolution", "evolve_linear",
    "SimConfig", "simulate", "CouetteLabError", "__version__",
]
