"""Scikit-learn style wrappers around the codec and the augmentor.

These adapters expose the pipeline through the estimator protocol
(``get_params``/``set_params``, ``fit``, ``transform``) so it composes with
sklearn pipelines and model-selection tooling; the functional API underneath
stays the primary surface.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .augment import AugmentationConfig, TextureBank, augment_image
from .codec import decode, encode_image
from .errors import InvalidInputError
from .seeds import derive_seed


def _is_single_image(X) -> bool:
    return isinstance(X, np.ndarray) and X.ndim == 3


class GaussianTextureCodec(BaseEstimator, TransformerMixin):
    """Stateless transformer: image -> its codec round-trip (texturization).

    ``transform`` accepts one (H, W, 3) image or a sequence of images and
    returns reconstructions in [0, 1]. The transform is deterministic in
    (input, seed).
    """

    def __init__(self, patch_size: int = 16, grid_k: int = 4, noise: bool = True, seed: int = 0):
        self.patch_size = patch_size
        self.grid_k = grid_k
        self.noise = noise
        self.seed = seed

    def fit(self, X=None, y=None):
        if self.patch_size < 4 or self.grid_k < 1:
            raise InvalidInputError("patch_size must be >= 4 and grid_k >= 1")
        return self

    def encode(self, image):
        return encode_image(image, patch_size=self.patch_size, grid_k=self.grid_k)

    def decode(self, composition, image_index: int = 0):
        seed = derive_seed(self.seed, image_index, "decode") if self.noise else None
        return decode(composition, noise_seed=seed)

    def transform(self, X):
        self.fit()
        if _is_single_image(X):
            return self.decode(self.encode(X))
        return [self.decode(self.encode(img), i) for i, img in enumerate(X)]


class TextureAugmenter(BaseEstimator):
    """Estimator over a texture bank; transforms (image, labels) samples.

    ``fit`` binds the texture source (a directory path or a
    :class:`TextureBank`); ``transform`` takes a sequence of
    ``(image, labels)`` pairs and returns the augmented uint8 images,
    stashing the per-image provenance records on ``records_``.
    """

    def __init__(
        self,
        textures=None,
        eta_max: float = 0.3,
        eta_mode: str = "uniform",
        patch_size: int = 16,
        grid_k: int = 4,
        scale_factor: int = 8,
        master_seed: int = 0,
    ):
        self.textures = textures
        self.eta_max = eta_max
        self.eta_mode = eta_mode
        self.patch_size = patch_size
        self.grid_k = grid_k
        self.scale_factor = scale_factor
        self.master_seed = master_seed

    def _config(self) -> AugmentationConfig:
        return AugmentationConfig(
            eta_max=self.eta_max,
            eta_mode=self.eta_mode,
            patch_size=self.patch_size,
            grid_k=self.grid_k,
            scale_factor=self.scale_factor,
            master_seed=self.master_seed,
        )

    def fit(self, X=None, y=None):
        if isinstance(self.textures, TextureBank):
            self.bank_ = self.textures
        elif self.textures is not None:
            self.bank_ = TextureBank.from_dir(self.textures)
        else:
            raise InvalidInputError("textures must be a TextureBank or a directory path")
        self._config()  # validate parameters eagerly
        return self

    def augment(self, image, labels, image_index: int = 0, image_id: str | None = None):
        if not hasattr(self, "bank_"):
            raise NotFittedError("TextureAugmenter is not fitted; call fit() first")
        return augment_image(image, labels, self.bank_, self._config(), image_index, image_id)

    def transform(self, X):
        images = []
        self.records_ = []
        for i, (image, labels) in enumerate(X):
            out, record = self.augment(image, labels, image_index=i)
            images.append(out)
            self.records_.append(record)
        return images

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)
