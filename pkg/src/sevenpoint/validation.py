"""Input validation helpers shared across the package.

These mirror the small check_* utilities scikit-learn users expect: each
returns a validated (and possibly converted) array or raises ContractError
with a message naming the offending argument.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .constants import N_ATTRIBUTES
from .errors import ContractError


def check_vector(x, length: int | None = None, *, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ContractError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite values")
    return arr


def check_matrix(x, shape: tuple[int | None, int | None] = (None, None), *, name: str = "X") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {arr.shape}")
    rows, cols = shape
    if rows is not None and arr.shape[0] != rows:
        raise ContractError(f"{name} must have {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ContractError(f"{name} must have {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite values")
    return arr


def check_binary(x, length: int | None = None, *, name: str = "labels") -> np.ndarray:
    arr = np.asarray(x)
    if length is not None and arr.shape[-1] != length:
        raise ContractError(f"{name} must have {length} entries per row, got {arr.shape[-1]}")
    values = np.unique(arr)
    if not np.all(np.isin(values, (0, 1))):
        raise ContractError(f"{name} must contain only 0/1, found {values[:5]}")
    return arr.astype(np.int64)


def check_attr_values(attrs, *, allow_probabilities: bool = True, name: str = "attrs") -> np.ndarray:
    """A 7-vector of attribute positivities, binary or in [0, 1]."""
    arr = check_vector(attrs, N_ATTRIBUTES, name=name)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ContractError(f"{name} entries must lie in [0, 1]")
    if not allow_probabilities and not np.all(np.isin(arr, (0.0, 1.0))):
        raise ContractError(f"{name} must be binary")
    return arr


def check_unit_interval(value: float, *, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ContractError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_fractions(fractions: Sequence[float], *, tol: float = 1e-9) -> np.ndarray:
    arr = check_vector(fractions, 3, name="fractions")
    if np.any(arr < 0):
        raise ContractError("fractions must be nonnegative")
    if abs(float(arr.sum()) - 1.0) > tol:
        raise ContractError(f"fractions must sum to 1 within {tol}, got {arr.sum()!r}")
    return arr


def check_row_stochastic(P, *, tol: float = 1e-9, name: str = "P") -> np.ndarray:
    arr = check_matrix(P, name=name)
    if arr.shape[0] != arr.shape[1]:
        raise ContractError(f"{name} must be square, got {arr.shape}")
    if np.any(arr < 0):
        raise ContractError(f"{name} must be nonnegative")
    rowsums = arr.sum(axis=1)
    if np.any(np.abs(rowsums - 1.0) > tol):
        raise ContractError(f"{name} rows must sum to 1 within {tol}")
    return arr
