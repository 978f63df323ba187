"""Exception types raised across the package."""


class CouetteLabError(Exception):
    """Base class for all package errors."""


class NonFiniteError(CouetteLabError, ValueError):
    """Input data contained NaN or Inf."""


class GridMismatchError(CouetteLabError, ValueError):
    """Two fields live on different grids."""


class NoResonantWindow(CouetteLabError, ValueError):
    """|eta| < 3: the frequency has no resonant interval."""


class BlowUpError(CouetteLabError, FloatingPointError):
    """A time step produced non-finite coefficients."""

    def __init__(self, t: float, message: str = "blow-up detected"):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = t


class CoordinateDegeneracy(CouetteLabError, ValueError):
    """The map y -> v(t, y) stopped being a diffeomorphism (v' <= 1/2)."""


class ContractionError(CouetteLabError, RuntimeError):
    """The Picard iteration for the elliptic problem failed to contract."""

    def __init__(self, factor: float):
        super().__init__(f"Picard iteration does not contract (measured factor {factor:.3g})")
        self.factor = factor


class ConfigError(CouetteLabError, ValueError):
    """Malformed configuration; message carries the offending line when known."""
