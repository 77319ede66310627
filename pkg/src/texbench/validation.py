"""Input validation helpers.

All public operations funnel their array arguments through these checks so
error messages and accepted dtypes stay consistent across the package.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def as_rgb01(image, name: str = "image") -> np.ndarray:
    """Coerce an RGB image to float64 with channels in [0, 1].

    Accepts uint8 (rescaled by 1/255) or floating arrays already in [0, 1].
    """
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError(f"{name} is empty: shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    arr = arr.astype(np.float64, copy=False)
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidInputError(f"{name} values must lie in [0, 1]")
    return arr


def as_binary_mask(mask, name: str = "mask") -> np.ndarray:
    """Coerce a 2-D array to a boolean mask."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.dtype != bool:
        if not np.isin(arr, (0, 1)).all():
            raise InvalidInputError(f"{name} must be binary")
        arr = arr.astype(bool)
    return arr


def as_label_array(labels, name: str = "labels") -> np.ndarray:
    """Coerce a 2-D array of non-negative integer region ids."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInputError(f"{name} must be integer-typed, got {arr.dtype}")
    if arr.size and arr.min() < 0:
        raise InvalidInputError(f"{name} ids must be non-negative")
    return arr


def check_same_extent(shape_a, shape_b, what: str = "inputs") -> None:
    """Require two (H, W) leading shapes to match."""
    if tuple(shape_a[:2]) != tuple(shape_b[:2]):
        raise InvalidInputError(
            f"{what} have mismatched extents: {tuple(shape_a[:2])} vs {tuple(shape_b[:2])}"
        )


def check_unit_interval(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or not np.isfinite(value):
        raise InvalidInputError(f"{name} must lie in [0, 1], got {value}")
    return value


def as_extent(extent, name: str = "extent") -> tuple[int, int]:
    """Normalize an extent given as a scalar (square) or (width, height)."""
    if np.isscalar(extent):
        w = h = int(extent)
    else:
        if len(extent) != 2:
            raise InvalidInputError(f"{name} must be a scalar or (width, height)")
        w, h = int(extent[0]), int(extent[1])
    if w <= 0 or h <= 0:
        raise InvalidInputError(f"{name} must be positive, got {(w, h)}")
    return w, h
