"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is used. :func:`use_backend` switches explicitly (tests and the
benchmark compare both).
"""
import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active = "compiled" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _compiled is not None else [])


def backend() -> str:
    return _active


def use_backend(name: str) -> None:
    global _active
    if name not in available_backends():
        raise ValueError(f"backend {name!r} unavailable; choose from {available_backends()}")
    _active = name


def log_weight(t, eta, nu: float, beta: float, backend: str | None = None):
    """(log w, d/dt log w) at paired samples; inputs broadcast together."""
    t, eta = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(eta, dtype=float))
    shape = t.shape
    impl = _compiled if (backend or _active) == "compiled" else _kernels_py
    lw, rate = impl.log_weight(t.ravel(), eta.ravel(), float(nu), float(beta))
    return lw.reshape(shape), rate.reshape(shape)
