"""Image file I/O and resampling (cv2-backed, RGB channel order)."""
from __future__ import annotations

import os

import cv2
import numpy as np

from .errors import CorruptFormatError, InvalidInputError


def read_rgb(path) -> np.ndarray:
    """Read an image file as uint8 RGB (H, W, 3)."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    img = cv2.imread(path, cv2.IMREAD_COLOR)
    if img is None:
        raise CorruptFormatError(f"not a readable image file: {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def write_rgb(path, image: np.ndarray) -> None:
    """Write an RGB image (uint8, or float in [0, 1]) as an 8-bit file."""
    img = np.asarray(image)
    if img.dtype != np.uint8:
        img = float01_to_uint8(img)
    ok = cv2.imwrite(os.fspath(path), cv2.cvtColor(img, cv2.COLOR_RGB2BGR))
    if not ok:
        raise OSError(f"failed to write image: {path}")


def read_label_png(path) -> np.ndarray:
    """Read a single-channel integer label PNG (uint8 or uint16)."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    img = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if img is None:
        raise CorruptFormatError(f"not a readable image file: {path}")
    if img.ndim != 2:
        raise CorruptFormatError(
            f"label map must be single-channel, got shape {img.shape}: {path}"
        )
    if not np.issubdtype(img.dtype, np.integer):
        raise CorruptFormatError(f"label map must be integer-typed, got {img.dtype}: {path}")
    return img


def write_label_png(path, labels: np.ndarray) -> None:
    """Write region ids as a single-channel 16-bit PNG."""
    arr = np.asarray(labels)
    if arr.ndim != 2 or not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInputError("labels must be a 2-D integer array")
    if arr.size and (arr.min() < 0 or arr.max() > np.iinfo(np.uint16).max):
        raise InvalidInputError("label ids must fit in uint16")
    ok = cv2.imwrite(os.fspath(path), arr.astype(np.uint16))
    if not ok:
        raise OSError(f"failed to write label map: {path}")


def resize_rgb(image: np.ndarray, extent: tuple[int, int]) -> np.ndarray:
    """Bilinear resize of a uint8 RGB image to (width, height)."""
    w, h = extent
    return cv2.resize(image, (w, h), interpolation=cv2.INTER_LINEAR)


def resize_labels(labels: np.ndarray, extent: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbor resize of a label map; ids are preserved exactly."""
    w, h = extent
    return cv2.resize(labels, (w, h), interpolation=cv2.INTER_NEAREST)


def float01_to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
