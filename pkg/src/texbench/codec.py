"""Analytic codec between images and compositions of 2-D Gaussian splats.

An image is cut into overlapping square patches; each patch is summarized by
a regular grid of isotropic Gaussians carrying local appearance statistics
(per-channel mean and standard deviation). Overlapping patch compositions are
merged with a windowed amplitude blend so reconstructions transition smoothly
across patch seams, and decoding renders the normalized splat blend plus a
seeded per-pixel detail-noise term driven by the blended standard deviations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, InvalidGeometryError, InvalidInputError
from .seeds import counter_normals
from .validation import as_extent, as_rgb01

FEATURE_DIM = 6  # mean R, G, B then std R, G, B
MIN_PATCH_SIZE = 4
WINDOW_FLOOR = 0.05
TRUNCATION_SIGMAS = 3.0
COVERAGE_EPS = 1e-12


@dataclass(frozen=True)
class GaussianSplat:
    """A single 2-D Gaussian: center, covariance, appearance feature, weight."""

    mu: np.ndarray        # (2,) canvas coordinates (x, y)
    sigma: np.ndarray     # (2, 2) symmetric positive-definite, pixels^2
    feature: np.ndarray   # (d,) appearance statistics
    amplitude: float      # blend weight >= 0


@dataclass(frozen=True)
class PatchGrid:
    """Top-left patch positions covering a canvas with overlapping patches."""

    patch_size: int
    stride: int
    positions_x: tuple[int, ...]
    positions_y: tuple[int, ...]

    def __post_init__(self):
        if self.patch_size < MIN_PATCH_SIZE:
            raise InvalidGeometryError(
                f"patch_size must be >= {MIN_PATCH_SIZE}, got {self.patch_size}"
            )
        if self.stride != int(0.75 * self.patch_size):
            raise InvalidGeometryError(
                f"stride must be floor(0.75 * patch_size) = "
                f"{int(0.75 * self.patch_size)}, got {self.stride}"
            )
        for axis, positions in (("x", self.positions_x), ("y", self.positions_y)):
            if not positions or positions[0] != 0:
                raise InvalidGeometryError(f"positions_{axis} must start at 0")
            steps = np.diff(positions)
            if steps.size and (steps <= 0).any():
                raise InvalidGeometryError(f"positions_{axis} must be strictly increasing")
            if steps.size and (steps > self.patch_size).any():
                raise InvalidGeometryError(f"positions_{axis} leave uncovered pixels")

    @property
    def n_patches(self) -> int:
        return len(self.positions_x) * len(self.positions_y)

    def __iter__(self):
        """Yield (x, y) top-left corners in row-major order."""
        for y in self.positions_y:
            for x in self.positions_x:
                yield (x, y)


class GaussianComposition:
    """An ordered set of splats over a canvas, stored as parallel arrays.

    Arrays are copied on construction and frozen, so compositions are
    immutable values that can be shared across threads; derive modified
    compositions by constructing new ones.
    """

    __slots__ = ("mu", "sigma", "feature", "amplitude", "canvas")

    def __init__(self, mu, sigma, feature, amplitude, canvas):
        mu = np.array(mu, dtype=np.float64)
        sigma = np.array(sigma, dtype=np.float64)
        feature = np.array(feature, dtype=np.float64)
        amplitude = np.array(amplitude, dtype=np.float64)
        canvas = as_extent(canvas, "canvas")
        n = mu.shape[0] if mu.ndim == 2 else -1
        if mu.ndim != 2 or mu.shape[1] != 2:
            raise InvalidInputError(f"mu must have shape (n, 2), got {mu.shape}")
        if sigma.shape != (n, 2, 2):
            raise InvalidInputError(f"sigma must have shape ({n}, 2, 2), got {sigma.shape}")
        if feature.ndim != 2 or feature.shape[0] != n:
            raise InvalidInputError(f"feature must have shape ({n}, d), got {feature.shape}")
        if amplitude.shape != (n,):
            raise InvalidInputError(f"amplitude must have shape ({n},), got {amplitude.shape}")
        w, h = canvas
        if n:
            if (mu[:, 0] < 0).any() or (mu[:, 0] >= w).any() or (mu[:, 1] < 0).any() or (mu[:, 1] >= h).any():
                raise InvalidGeometryError("splat centers must lie inside the canvas")
            if not np.allclose(sigma, np.swapaxes(sigma, 1, 2)):
                raise InvalidInputError("sigma matrices must be symmetric")
            det = sigma[:, 0, 0] * sigma[:, 1, 1] - sigma[:, 0, 1] * sigma[:, 1, 0]
            if (sigma[:, 0, 0] <= 0).any() or (det <= 0).any():
                raise InvalidInputError("sigma matrices must be positive definite")
            if (amplitude < 0).any():
                raise InvalidInputError("amplitudes must be >= 0")
            d = feature.shape[1]
            if d % 2:
                raise InvalidInputError("feature dimension must be even (means then stds)")
            means, stds = feature[:, : d // 2], feature[:, d // 2 :]
            if (means < 0).any() or (means > 1).any():
                raise InvalidInputError("feature mean components must lie in [0, 1]")
            if (stds < 0).any() or (stds > 0.5).any():
                raise InvalidInputError("feature std components must lie in [0, 0.5]")
        for arr in (mu, sigma, feature, amplitude):
            arr.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "feature", feature)
        object.__setattr__(self, "amplitude", amplitude)
        object.__setattr__(self, "canvas", canvas)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianComposition is immutable")

    def __len__(self) -> int:
        return self.mu.shape[0]

    def __getitem__(self, i: int) -> GaussianSplat:
        return GaussianSplat(
            mu=self.mu[i], sigma=self.sigma[i],
            feature=self.feature[i], amplitude=float(self.amplitude[i]),
        )

    @property
    def feature_dim(self) -> int:
        return self.feature.shape[1]

    def with_features(self, feature: np.ndarray) -> "GaussianComposition":
        """A copy of this composition with the feature matrix replaced."""
        return GaussianComposition(self.mu, self.sigma, feature, self.amplitude, self.canvas)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussianComposition):
            return NotImplemented
        return (
            self.canvas == other.canvas
            and np.array_equal(self.mu, other.mu)
            and np.array_equal(self.sigma, other.sigma)
            and np.array_equal(self.feature, other.feature)
            and np.array_equal(self.amplitude, other.amplitude)
        )


def plan_patches(canvas_extent, patch_size: int) -> PatchGrid:
    """Plan overlapping patch positions with stride floor(0.75 * patch_size).

    Positions advance from 0 in stride steps; if the arithmetic progression
    does not end flush with the canvas, the flush position (extent - size) is
    appended so every pixel is covered by at least one patch.
    """
    w, h = as_extent(canvas_extent, "canvas_extent")
    patch_size = int(patch_size)
    if patch_size < MIN_PATCH_SIZE:
        raise InvalidGeometryError(f"patch_size must be >= {MIN_PATCH_SIZE}, got {patch_size}")
    if w < patch_size or h < patch_size:
        raise InvalidGeometryError(
            f"canvas extent {(w, h)} is smaller than patch_size {patch_size}"
        )
    stride = int(0.75 * patch_size)
    return PatchGrid(
        patch_size=patch_size,
        stride=stride,
        positions_x=_axis_positions(w, patch_size, stride),
        positions_y=_axis_positions(h, patch_size, stride),
    )


def _axis_positions(extent: int, size: int, stride: int) -> tuple[int, ...]:
    last = extent - size
    positions = list(range(0, last + 1, stride))
    if positions[-1] != last:
        positions.append(last)
    return tuple(positions)


def encode_patch(patch_pixels, grid_k: int = 4) -> GaussianComposition:
    """Encode a square patch as a grid_k x grid_k grid of isotropic splats.

    Splats sit at the cell centers of a uniform partition of the patch with
    std = patch_size / (2 * grid_k). Each splat's feature holds the
    kernel-weighted mean and standard deviation of the patch pixels, so the
    composition summarizes local color and contrast. All amplitudes are 1.
    """
    pixels = as_rgb01(patch_pixels, "patch")
    h, w = pixels.shape[:2]
    if h != w:
        raise InvalidInputError(f"patch must be square, got {h}x{w}")
    grid_k = int(grid_k)
    if grid_k < 1:
        raise InvalidInputError(f"grid_k must be >= 1, got {grid_k}")
    size = float(w)
    cell = size / grid_k
    sd = size / (2.0 * grid_k)
    coords = np.arange(w, dtype=np.float64) + 0.5  # pixel centers
    centers = (np.arange(grid_k, dtype=np.float64) + 0.5) * cell
    # Separable kernel: per-axis weight vectors against every pixel center.
    axis_w = np.exp(-((coords[None, :] - centers[:, None]) ** 2) / (2.0 * sd * sd))

    n = grid_k * grid_k
    mu = np.empty((n, 2))
    feature = np.empty((n, FEATURE_DIM))
    # Pixels stacked with a ones channel: numerator and denominator sums then
    # share one reduction order, so constant patches encode bit-exactly.
    stacked = np.concatenate([pixels, np.ones_like(pixels[:, :, :1])], axis=2)
    for gy in range(grid_k):
        for gx in range(grid_k):
            weights = np.outer(axis_w[gy], axis_w[gx])[:, :, None]
            sums = (weights * stacked).sum(axis=(0, 1))
            mean = sums[:3] / sums[3]
            var = (weights * (pixels - mean) ** 2).sum(axis=(0, 1)) / sums[3]
            i = gy * grid_k + gx
            mu[i] = (centers[gx], centers[gy])
            feature[i, :3] = np.clip(mean, 0.0, 1.0)
            feature[i, 3:] = np.clip(np.sqrt(var), 0.0, 0.5)
    sigma = np.broadcast_to(np.diag([sd * sd, sd * sd]), (n, 2, 2))
    return GaussianComposition(mu, sigma, feature, np.ones(n), canvas=(w, w))


def merge(patch_compositions, canvas) -> GaussianComposition:
    """Merge patch-local compositions into one canvas-level composition.

    Every splat is kept. Each splat's center is translated by its patch
    position and its amplitude is scaled by a separable Hann window of the
    center's location within its patch, floored at 0.05, so contributions
    fade toward patch borders without any splat fully vanishing. Output
    ordering is row-major by patch position, then grid order within a patch.

    Parameters
    ----------
    patch_compositions : list of ((x, y), GaussianComposition)
        Patch top-left corners with their patch-local compositions.
    canvas : int or (width, height)
    """
    w, h = as_extent(canvas, "canvas")
    if not patch_compositions:
        raise InvalidInputError("patch_compositions is empty")
    parts = []
    for (px, py), comp in sorted(patch_compositions, key=lambda item: (item[0][1], item[0][0])):
        pw, ph = comp.canvas
        if pw != ph:
            raise InvalidGeometryError(f"patch compositions must be square, got {comp.canvas}")
        if px < 0 or py < 0 or px + pw > w or py + ph > h:
            raise InvalidGeometryError(
                f"patch at {(px, py)} with size {pw} lies outside canvas {(w, h)}"
            )
        window = _hann_window(comp.mu[:, 0], pw) * _hann_window(comp.mu[:, 1], ph)
        parts.append((
            comp.mu + np.array([px, py], dtype=np.float64),
            comp.sigma,
            comp.feature,
            comp.amplitude * np.maximum(window, WINDOW_FLOOR),
        ))
    mu, sigma, feature, amplitude = (np.concatenate(arrs) for arrs in zip(*parts))
    return GaussianComposition(mu, sigma, feature, amplitude, canvas=(w, h))


def _hann_window(t: np.ndarray, length: float) -> np.ndarray:
    return np.sin(np.pi * t / length) ** 2


def encode_image(image, patch_size: int = 16, grid_k: int = 4) -> GaussianComposition:
    """Encode a full image: plan patches, encode each, merge into one canvas."""
    pixels = as_rgb01(image, "image")
    h, w = pixels.shape[:2]
    grid = plan_patches((w, h), patch_size)
    size = grid.patch_size
    patches = [
        ((x, y), encode_patch(pixels[y : y + size, x : x + size], grid_k))
        for (x, y) in grid
    ]
    return merge(patches, canvas=(w, h))


def _accumulate(composition: GaussianComposition) -> tuple[np.ndarray, np.ndarray]:
    """Splat all kernels onto the canvas.

    Returns (total_weight (H, W), weighted_feature_sum (H, W, d)); kernels are
    truncated at 3 sigma in Mahalanobis distance.
    """
    w, h = composition.canvas
    acc_w = np.zeros((h, w))
    acc_f = np.zeros((h, w, composition.feature_dim))
    rad2 = TRUNCATION_SIGMAS**2
    for i in range(len(composition)):
        amp = composition.amplitude[i]
        if amp == 0.0:
            continue
        cx, cy = composition.mu[i]
        s = composition.sigma[i]
        trace_half = 0.5 * (s[0, 0] + s[1, 1])
        det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
        eig_max = trace_half + math.sqrt(max(trace_half**2 - det, 0.0))
        reach = TRUNCATION_SIGMAS * math.sqrt(eig_max)
        x0 = max(int(math.ceil(cx - reach - 0.5)), 0)
        x1 = min(int(math.floor(cx + reach - 0.5)), w - 1)
        y0 = max(int(math.ceil(cy - reach - 0.5)), 0)
        y1 = min(int(math.floor(cy + reach - 0.5)), h - 1)
        if x0 > x1 or y0 > y1:
            continue
        dx = np.arange(x0, x1 + 1) + 0.5 - cx
        dy = np.arange(y0, y1 + 1) + 0.5 - cy
        i00, i01, i11 = s[1, 1] / det, -s[0, 1] / det, s[0, 0] / det
        q = (
            i00 * dx[None, :] ** 2
            + 2.0 * i01 * dy[:, None] * dx[None, :]
            + i11 * dy[:, None] ** 2
        )
        kern = amp * np.exp(-0.5 * q)
        kern[q > rad2] = 0.0
        acc_w[y0 : y1 + 1, x0 : x1 + 1] += kern
        acc_f[y0 : y1 + 1, x0 : x1 + 1] += kern[:, :, None] * composition.feature[i]
    return acc_w, acc_f


def coverage(composition: GaussianComposition) -> np.ndarray:
    """Per-pixel total splat weight over the canvas."""
    if len(composition) == 0:
        raise InvalidInputError("composition is empty")
    acc_w, _ = _accumulate(composition)
    return acc_w


def decode(composition: GaussianComposition, noise_seed: int | None = None) -> np.ndarray:
    """Render a composition back to an RGB image in [0, 1].

    Each pixel is the amplitude-weighted normalized blend of splat mean
    colors. With a noise seed, per-pixel Gaussian detail noise scaled by the
    blended std features is added channel-wise; the noise field is addressed
    by (seed, pixel index) so repeated decodes are bit-identical. Pass
    ``noise_seed=None`` to disable the noise term.
    """
    if len(composition) == 0:
        raise InvalidInputError("composition is empty")
    if composition.feature_dim != FEATURE_DIM:
        raise InvalidInputError(
            f"decode requires {FEATURE_DIM}-dim features (RGB mean + std), "
            f"got {composition.feature_dim}"
        )
    acc_w, acc_f = _accumulate(composition)
    if (acc_w <= COVERAGE_EPS).any():
        n_bad = int((acc_w <= COVERAGE_EPS).sum())
        raise CoverageError(
            f"{n_bad} canvas pixels received no splat weight; patch planning is broken"
        )
    blended = acc_f / acc_w[:, :, None]
    rgb = blended[:, :, :3]
    if noise_seed is not None:
        std = blended[:, :, 3:]
        rgb = rgb + counter_normals(int(noise_seed), rgb.shape) * std
    return np.clip(rgb, 0.0, 1.0)


def roundtrip_stats(image, patch_size: int = 16, grid_k: int = 4) -> dict:
    """Encode, merge, and decode an image; report reconstruction error stats."""
    pixels = as_rgb01(image, "image")
    comp = encode_image(pixels, patch_size=patch_size, grid_k=grid_k)
    recon = decode(comp, noise_seed=None)
    err = np.abs(recon - pixels)
    acc_w, _ = _accumulate(comp)
    return {
        "extent": [int(pixels.shape[1]), int(pixels.shape[0])],
        "patch_size": int(patch_size),
        "grid_k": int(grid_k),
        "n_splats": len(comp),
        "max_abs_error": float(err.max()),
        "mean_abs_error": float(err.mean()),
        "rmse": float(np.sqrt((err**2).mean())),
        "min_coverage_weight": float(acc_w.min()),
    }
