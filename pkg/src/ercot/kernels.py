"""Backend selection for the population kernels.

The compiled extension is preferred. Set ``ERCOT_PURE_PYTHON=1`` to force the
numpy implementation (used by the backend benchmark and equivalence tests).
"""

from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _kernels_py

SEP_PENALTY = _kernels_py.SEP_PENALTY


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("ERCOT_PURE_PYTHON"):
        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "cython"


_impl, BACKEND = _load()


def use_backend(name: str) -> None:
    """Switch the active backend at runtime (``"cython"`` or ``"python"``)."""
    global _impl, BACKEND
    if name == "python":
        _impl, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        _impl, BACKEND = _kernels, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    try:
        from . import _kernels  # type: ignore[attr-defined]  # noqa: F401
    except ImportError:
        return False
    return True


def _f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def assign(genomes, X, c_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Nearest active centroid index and distance, shapes ``(N, S)``."""
    return _impl.assign(_f64(genomes), _f64(X), int(c_max))


def encode(genomes, X_assign, X_mean, c_max: int, lo, hi) -> np.ndarray:
    """Assign on ``X_assign``, then set active centroids to ``X_mean`` cluster means."""
    return _impl.encode(_f64(genomes), _f64(X_assign), _f64(X_mean), int(c_max), _f64(lo), _f64(hi))


def evaluate(genomes, X, c_max: int) -> np.ndarray:
    """``(N, 2)`` array of (compactness, separation)."""
    return _impl.evaluate(_f64(genomes), _f64(X), int(c_max))


def pareto_ranks(F) -> np.ndarray:
    """Front index per row of an objective matrix, 1 for the non-dominated set."""
    return _impl.pareto_ranks(_f64(np.atleast_2d(F)))
