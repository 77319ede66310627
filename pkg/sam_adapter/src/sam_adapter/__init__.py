"""sam_adapter: bridge between an automatic mask generator and texbench files.

Runs a SAM-2 style automatic mask generator (or a deterministic stub) over a
directory of images and exports prediction-set JSON files in the texbench
wire format, and materializes fine-tune configuration files pointing an
upstream trainer at an augmented dataset.
"""

__version__ = "0.1.0"

from .predictions import masks_to_prediction_json, rle_encode_rows
from .profiles import PROFILES, UPSTREAM_DEFAULTS, GeneratorProfile, generator_params
from .infer import run_inference
from .stub import StubMaskGenerator
from .train_config import emit_finetune_config

__all__ = [
    "__version__",
    "GeneratorProfile",
    "PROFILES",
    "StubMaskGenerator",
    "UPSTREAM_DEFAULTS",
    "emit_finetune_config",
    "generator_params",
    "masks_to_prediction_json",
    "rle_encode_rows",
    "run_inference",
]
