"""Zero-shot low-light image enhancement.

Each image is enhanced independently: a small sine-activated MLP is optimized
against a four-term objective to estimate the Retinex illumination of the HSV
value channel at a reduced working resolution, the enhanced plane is the
observation divided by that illumination, and a guided filter carries the
result back to full resolution.
"""

from .errors import (
    DecodeError,
    LumifitError,
    OptimizationDivergedError,
    StaleTapeError,
    UnsupportedFormatError,
)
from .guided_filter import GuidedFilterParams, box_filter, guided_upsample
from .hsv import HsvDecomposition, hsv_to_rgb, recombine, rgb_to_hsv
from .image_ops import (
    ContextWindowSpec,
    decode_image,
    encode_image,
    extract_context,
    reflect_pad,
    resize_bilinear,
)
from .losses import (
    ExposureSpec,
    LossReport,
    LossWeights,
    exposure_loss,
    fidelity_loss,
    smoothness_loss,
    sparsity_loss,
    total_loss,
)
from .metrics import MetricReport, measure, psnr, ssim
from .network import (
    AdamState,
    DenseLayer,
    DesignMatrix,
    GradientBuffer,
    MlpParameters,
    adam_step,
    backward,
    build_design_matrix,
    coordinate_grid,
    forward,
    init_parameters,
    load_parameters,
    save_parameters,
)
from .pipeline import (
    LOSS_MASKS,
    AblationRow,
    EnhancementConfig,
    EnhancementTrace,
    ablate,
    enhance,
    estimate_illumination,
    write_trace_jsonl,
)

__version__ = "0.1.0"

__all__ = [
    "AblationRow",
    "AdamState",
    "ContextWindowSpec",
    "DecodeError",
    "DenseLayer",
    "DesignMatrix",
    "EnhancementConfig",
    "EnhancementTrace",
    "ExposureSpec",
    "GradientBuffer",
    "GuidedFilterParams",
    "HsvDecomposition",
    "LossReport",
    "LossWeights",
    "LOSS_MASKS",
    "LumifitError",
    "MetricReport",
    "MlpParameters",
    "OptimizationDivergedError",
    "StaleTapeError",
    "UnsupportedFormatError",
    "ablate",
    "adam_step",
    "backward",
    "box_filter",
    "build_design_matrix",
    "coordinate_grid",
    "decode_image",
    "encode_image",
    "enhance",
    "estimate_illumination",
    "exposure_loss",
    "extract_context",
    "fidelity_loss",
    "forward",
    "guided_upsample",
    "hsv_to_rgb",
    "init_parameters",
    "load_parameters",
    "measure",
    "psnr",
    "recombine",
    "reflect_pad",
    "resize_bilinear",
    "rgb_to_hsv",
    "save_parameters",
    "smoothness_loss",
    "sparsity_loss",
    "ssim",
    "total_loss",
    "write_trace_jsonl",
]
