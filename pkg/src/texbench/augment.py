"""Per-instance texture replacement and deterministic dataset construction.

Each labeled instance of a content image gets its appearance features pulled
toward features sampled from a texture image, with the blend strength set by
eta (0 keeps the content, 1 replaces it). Texture categories are consumed
without repetition while unused ones remain. All randomness flows through
streams keyed by (master seed, image index, purpose), so outputs are
independent of execution order and worker count.
"""
from __future__ import annotations

import json
import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import imgio
from .codec import GaussianComposition, decode, encode_image, encode_patch
from .errors import ConfigurationError, InvalidInputError, TexbenchError
from .seeds import derive_seed, make_stream, stream_from_seed
from .validation import as_label_array, as_rgb01, check_same_extent, check_unit_interval

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp")


@dataclass(frozen=True)
class TextureBank:
    """Texture images organized into named categories."""

    categories: dict  # category name -> tuple of image paths (strings)

    def __post_init__(self):
        if not self.categories:
            raise InvalidInputError("texture bank has no categories")
        for name, paths in self.categories.items():
            if not paths:
                raise InvalidInputError(f"texture category {name!r} is empty")
        object.__setattr__(
            self,
            "categories",
            {str(k): tuple(str(p) for p in v) for k, v in sorted(self.categories.items())},
        )

    @classmethod
    def from_dir(cls, root) -> "TextureBank":
        """Scan a directory of category subdirectories containing images."""
        root = Path(root)
        if not root.is_dir():
            raise ConfigurationError(f"texture bank directory not found: {root}")
        categories = {}
        for sub in sorted(p for p in root.iterdir() if p.is_dir()):
            paths = sorted(
                str(p) for p in sub.iterdir()
                if p.suffix.lower() in IMAGE_EXTENSIONS and p.is_file()
            )
            if paths:
                categories[sub.name] = tuple(paths)
        if not categories:
            raise ConfigurationError(f"no texture categories with images under {root}")
        return cls(categories)

    @property
    def category_names(self) -> tuple:
        return tuple(self.categories)

    def all_textures(self) -> tuple:
        """Every (category, path) pair, in deterministic order."""
        return tuple(
            (name, path) for name in self.categories for path in self.categories[name]
        )


@dataclass(frozen=True)
class AugmentationConfig:
    """Knobs of the augmentation pipeline.

    The content canvas after rescaling is always (scale_factor * patch_size)
    squared, and textures are rescaled to one patch.
    """

    eta_max: float = 0.3
    eta_mode: str = "uniform"  # "uniform": eta ~ U[0, eta_max] per image; "fixed": eta = eta_max
    patch_size: int = 16
    grid_k: int = 4
    scale_factor: int = 8
    master_seed: int = 0

    def __post_init__(self):
        check_unit_interval(self.eta_max, "eta_max")
        if self.eta_mode not in ("uniform", "fixed"):
            raise InvalidInputError(f"eta_mode must be 'uniform' or 'fixed', got {self.eta_mode!r}")
        if self.patch_size < 4:
            raise InvalidInputError(f"patch_size must be >= 4, got {self.patch_size}")
        if self.grid_k < 1 or self.scale_factor < 1:
            raise InvalidInputError("grid_k and scale_factor must be >= 1")

    @property
    def canvas_size(self) -> int:
        return self.scale_factor * self.patch_size


@dataclass
class InstanceRecord:
    instance_id: int
    category: str
    texture: str
    feature_stream: int   # seed of the stream that drew this instance's texture features
    n_splats_modified: int


@dataclass
class AugmentationRecord:
    """Full provenance of one augmented image."""

    image_id: str
    eta: float
    instances: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    output_image: str = ""
    output_labels: str = ""

    def to_json(self) -> dict:
        return asdict(self)


def interpolate_feature(f_content, f_texture, eta: float) -> np.ndarray:
    """Affine blend of appearance features; eta is the texture strength.

    eta=0 returns the content feature exactly, eta=1 the texture feature.
    """
    check_unit_interval(eta, "eta")
    f_content = np.asarray(f_content, dtype=np.float64)
    f_texture = np.asarray(f_texture, dtype=np.float64)
    if f_content.shape != f_texture.shape:
        raise InvalidInputError(
            f"feature shapes differ: {f_content.shape} vs {f_texture.shape}"
        )
    return (1.0 - eta) * f_content + eta * f_texture


def texturize_instance(
    content_comp: GaussianComposition,
    mask,
    texture_comp: GaussianComposition,
    eta: float,
    rng_stream: np.random.Generator,
) -> GaussianComposition:
    """Blend texture features into every splat centered inside the mask.

    For each selected splat a texture feature is drawn uniformly (with
    replacement) from the texture composition via ``rng_stream``; splats
    outside the mask are bit-identical to the input. An empty mask returns
    the input unchanged with a warning.
    """
    mask = np.asarray(mask).astype(bool)
    w, h = content_comp.canvas
    if mask.shape != (h, w):
        raise InvalidInputError(
            f"mask shape {mask.shape} does not match canvas {(h, w)} (rows, cols)"
        )
    if len(texture_comp) == 0:
        raise InvalidInputError("texture composition is empty")
    if not mask.any():
        warnings.warn("instance mask is empty; composition returned unchanged", RuntimeWarning)
        return content_comp
    ix = np.clip(np.rint(content_comp.mu[:, 0]), 0, w - 1).astype(np.int64)
    iy = np.clip(np.rint(content_comp.mu[:, 1]), 0, h - 1).astype(np.int64)
    selected = mask[iy, ix]
    if not selected.any():
        return content_comp
    draws = rng_stream.integers(0, len(texture_comp), size=int(selected.sum()))
    features = content_comp.feature.copy()
    features[selected] = interpolate_feature(
        features[selected], texture_comp.feature[draws], eta
    )
    return content_comp.with_features(features)


def _sample_texture(bank: TextureBank, used: set, rng: np.random.Generator) -> tuple[str, str]:
    """Pick a texture from an unused category; fall back to the whole bank."""
    unused = [name for name in bank.category_names if name not in used]
    if unused:
        category = unused[int(rng.integers(len(unused)))]
        paths = bank.categories[category]
        path = paths[int(rng.integers(len(paths)))]
        used.add(category)
        return category, path
    pool = bank.all_textures()
    return pool[int(rng.integers(len(pool)))]


def draw_eta(cfg: AugmentationConfig, image_index: int) -> float:
    if cfg.eta_mode == "fixed":
        return float(cfg.eta_max)
    stream = make_stream(cfg.master_seed, image_index, "eta")
    return float(stream.uniform(0.0, cfg.eta_max))


def rescale_labels(labels, cfg: AugmentationConfig) -> np.ndarray:
    labels = as_label_array(labels)
    return imgio.resize_labels(labels, (cfg.canvas_size, cfg.canvas_size))


def augment_image(
    content,
    labels,
    bank: TextureBank,
    cfg: AugmentationConfig,
    image_index: int,
    image_id: str | None = None,
) -> tuple[np.ndarray, AugmentationRecord]:
    """Texture-replace every instance of one image.

    The content is rescaled to the square codec canvas (bilinear; labels
    nearest-neighbor), encoded, and each instance id in ascending order gets
    a texture sampled under the unused-category rule, encoded at patch size,
    and blended in at this image's eta. Unreadable textures are recorded and
    the instance skipped; an image with no instances is a pure codec
    round-trip. Returns the decoded uint8 image and the provenance record.
    """
    pixels = as_rgb01(content, "content")
    labels = as_label_array(labels)
    check_same_extent(pixels.shape, labels.shape, "content and labels")
    side = cfg.canvas_size
    content_r = imgio.resize_rgb(imgio.float01_to_uint8(pixels), (side, side))
    labels_r = imgio.resize_labels(labels, (side, side))

    eta = draw_eta(cfg, image_index)
    record = AugmentationRecord(
        image_id=image_id if image_id is not None else f"{image_index:06d}",
        eta=eta,
    )
    comp = encode_image(
        content_r.astype(np.float64) / 255.0, patch_size=cfg.patch_size, grid_k=cfg.grid_k
    )

    sampler = make_stream(cfg.master_seed, image_index, "sampling")
    used: set = set()
    for rid in (int(v) for v in np.unique(labels_r) if v != 0):
        category, path = _sample_texture(bank, used, sampler)
        feature_seed = derive_seed(cfg.master_seed, image_index, "features", rid)
        try:
            texture = imgio.read_rgb(path)
        except (TexbenchError, OSError) as exc:
            log.warning("skipping instance %d: %s", rid, exc)
            record.errors.append(f"instance {rid}: unreadable texture {path}: {exc}")
            continue
        texture_comp = encode_patch(
            imgio.resize_rgb(texture, (cfg.patch_size, cfg.patch_size)).astype(np.float64) / 255.0,
            grid_k=cfg.grid_k,
        )
        before = comp
        comp = texturize_instance(
            before, labels_r == rid, texture_comp, eta, stream_from_seed(feature_seed)
        )
        record.instances.append(
            InstanceRecord(
                instance_id=rid,
                category=category,
                texture=path,
                feature_stream=feature_seed,
                n_splats_modified=int((comp.feature != before.feature).any(axis=1).sum()),
            )
        )
    out = decode(comp, noise_seed=derive_seed(cfg.master_seed, image_index, "decode"))
    return imgio.float01_to_uint8(out), record


def _augment_entry(args) -> tuple[int, dict | None, dict | None]:
    index, image_path, labels_path, bank, cfg, out_dir = args
    try:
        content = imgio.read_rgb(image_path)
        labels = imgio.read_label_png(labels_path)
        stem = Path(image_path).stem
        image_id = f"{index:06d}_{stem}"
        out_image, record = augment_image(content, labels, bank, cfg, index, image_id)
        image_out = os.path.join(out_dir, "images", f"{image_id}.png")
        labels_out = os.path.join(out_dir, "labels", f"{image_id}.png")
        imgio.write_rgb(image_out, out_image)
        imgio.write_label_png(labels_out, rescale_labels(labels, cfg))
        record.output_image = image_out
        record.output_labels = labels_out
        return index, record.to_json(), None
    except (TexbenchError, OSError) as exc:
        log.warning("augmentation failed for %s: %s", image_path, exc)
        return index, None, {
            "index": index, "image": str(image_path), "labels": str(labels_path),
            "error": str(exc),
        }


def load_manifest(path) -> list[tuple[str, str]]:
    """Read a dataset manifest: JSON array of {"image": ..., "labels": ...}.

    Relative paths resolve against the manifest's own directory.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            entries = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"manifest is not valid JSON: {path}: {exc}") from exc
    if not isinstance(entries, list):
        raise ConfigurationError(f"manifest must be a JSON array: {path}")
    base = path.parent
    pairs = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "image" not in entry or "labels" not in entry:
            raise ConfigurationError(f"manifest entry {i} must have 'image' and 'labels'")
        pairs.append((
            str(base / entry["image"]) if not os.path.isabs(entry["image"]) else entry["image"],
            str(base / entry["labels"]) if not os.path.isabs(entry["labels"]) else entry["labels"],
        ))
    return pairs


def build_dataset(
    manifest_in,
    bank: TextureBank,
    cfg: AugmentationConfig,
    out_dir,
    workers: int = 1,
) -> dict:
    """Augment every manifest entry into ``out_dir``; returns the run manifest.

    Per-image RNG streams are keyed by manifest index, so outputs are
    byte-identical for any worker count. Partial failures are collected in
    the manifest's error list; surviving images are still produced.
    """
    pairs = load_manifest(manifest_in)
    out_dir = str(out_dir)
    os.makedirs(os.path.join(out_dir, "images"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "labels"), exist_ok=True)
    jobs = [
        (i, image_path, labels_path, bank, cfg, out_dir)
        for i, (image_path, labels_path) in enumerate(pairs)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_augment_entry, jobs))
    else:
        results = [_augment_entry(job) for job in jobs]

    from . import __version__

    manifest = {
        "tool_version": __version__,
        "config": asdict(cfg),
        "images": [],
        "errors": [],
    }
    for _, record, error in sorted(results, key=lambda r: r[0]):
        if error is not None:
            manifest["errors"].append(error)
        else:
            manifest["images"].append(record)
    return manifest
