"""Small input-validation helpers used across the public API."""

from __future__ import annotations

import numpy as np

from .errors import ContractError


def ensure_rng(random_state) -> np.random.Generator:
    """Coerce ``None`` / int seed / Generator into a ``numpy`` Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ContractError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ContractError(f"{name} must be > 0, got {value!r}")
    return value


def check_finite_matrix(name: str, X) -> np.ndarray:
    """Return ``X`` as a 2-D float array, rejecting NaN/inf entries."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ContractError(f"{name} must be a 2-D matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ContractError(f"{name} contains non-finite entries")
    return X


def check_finite_vector(name: str, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ContractError(f"{name} must be a 1-D vector, got shape {y.shape}")
    if not np.isfinite(y).all():
        raise ContractError(f"{name} contains non-finite entries")
    return y
