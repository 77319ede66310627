"""texbench: texture-transfer augmentation and texture-aware segmentation evaluation.

The package has two halves. The augmentation half rewrites the appearance of
labeled instances by round-tripping images through an analytic 2-D Gaussian
codec and blending per-splat appearance features toward features sampled from
a texture bank. The evaluation half scores possibly-overlapping predicted
masks against instance label maps with aggregated/non-aggregated mean IoU,
adjusted Rand index, and fragmentation statistics.
"""

__version__ = "0.1.0"

from .augment import (
    AugmentationConfig,
    AugmentationRecord,
    TextureBank,
    augment_image,
    build_dataset,
    interpolate_feature,
    texturize_instance,
)
from .codec import (
    GaussianComposition,
    GaussianSplat,
    PatchGrid,
    coverage,
    decode,
    encode_image,
    encode_patch,
    merge,
    plan_patches,
)
from .errors import (
    ConfigurationError,
    CorruptFormatError,
    CoverageError,
    InvalidGeometryError,
    InvalidInputError,
    TexbenchError,
    UndefinedMetricError,
)
from .estimators import GaussianTextureCodec, TextureAugmenter
from .fragstats import FragmentationSummary, fragmentation
from .maskio import (
    InstanceLabelMap,
    PredictionMask,
    PredictionSet,
    RunLength,
    load_label_map,
    load_predictions,
    rle_decode,
    rle_encode,
    save_label_map,
    save_predictions,
)
from .metrics import (
    AssignmentTable,
    EvalConfig,
    MetricsReport,
    ari,
    assign,
    evaluate_dataset,
    flatten_predictions,
    iou,
    miou,
)

__all__ = [
    "__version__",
    "AssignmentTable",
    "AugmentationConfig",
    "AugmentationRecord",
    "ConfigurationError",
    "CorruptFormatError",
    "CoverageError",
    "EvalConfig",
    "FragmentationSummary",
    "GaussianComposition",
    "GaussianSplat",
    "GaussianTextureCodec",
    "InstanceLabelMap",
    "InvalidGeometryError",
    "InvalidInputError",
    "MetricsReport",
    "PatchGrid",
    "PredictionMask",
    "PredictionSet",
    "RunLength",
    "TexbenchError",
    "TextureAugmenter",
    "TextureBank",
    "UndefinedMetricError",
    "ari",
    "assign",
    "augment_image",
    "build_dataset",
    "coverage",
    "decode",
    "encode_image",
    "encode_patch",
    "evaluate_dataset",
    "flatten_predictions",
    "fragmentation",
    "interpolate_feature",
    "iou",
    "load_label_map",
    "load_predictions",
    "merge",
    "miou",
    "plan_patches",
    "rle_decode",
    "rle_encode",
    "save_label_map",
    "save_predictions",
    "texturize_instance",
]
