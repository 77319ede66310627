"""Deterministic fake mask generator for tests without model weights.

Quantizes colors to a coarse palette and emits one mask per connected
component of each quantized color, so outputs are a pure function of the
image.
"""
from __future__ import annotations

import cv2
import numpy as np


class StubMaskGenerator:
    """Connected components of quantized color, in deterministic order."""

    def __init__(self, levels_per_channel: int = 4, min_area: int = 1, connectivity: int = 4):
        if levels_per_channel < 2 or levels_per_channel > 256:
            raise ValueError("levels_per_channel must be in [2, 256]")
        if connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        self.levels_per_channel = levels_per_channel
        self.min_area = min_area
        self.connectivity = connectivity

    def generate(self, image: np.ndarray):
        """Yield (mask, score, stability) with area-fraction scores.

        Emission order: quantized color value ascending, then component label
        order, which is fixed for a fixed image.
        """
        image = np.asarray(image)
        if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
            raise ValueError("stub generator expects a uint8 RGB image")
        h, w = image.shape[:2]
        step = 256 // self.levels_per_channel
        quantized = (image // step).astype(np.int64)
        color_index = (
            quantized[:, :, 0] * self.levels_per_channel**2
            + quantized[:, :, 1] * self.levels_per_channel
            + quantized[:, :, 2]
        )
        total = float(h * w)
        results = []
        for color in np.unique(color_index):
            binary = (color_index == color).astype(np.uint8)
            n_components, component_map = cv2.connectedComponents(
                binary, connectivity=self.connectivity
            )
            for label in range(1, n_components):
                mask = component_map == label
                area = int(mask.sum())
                if area < self.min_area:
                    continue
                results.append((mask, round(area / total, 6), 1.0))
        return results
