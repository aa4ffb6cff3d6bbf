"""End-to-end enhancement of one image.

Flow: HSV split -> downscale the value plane to the working resolution ->
fit the illumination with per-image optimization -> divide (Retinex) ->
guided-filter the enhanced plane back to full resolution -> recombine with
the original hue/saturation.

The optimization runs in float32 internally (the dense passes dominate the
cost and are ~4x faster than float64 on common BLAS builds); all public
inputs/outputs are float64.  Two calibrations applied here rather than in the
component modules:

* the smoothness weight is divided by the working pixel count, making the
  term's contribution independent of the working resolution (its raw value
  grows with the number of difference entries, which would otherwise drown
  the pixel-mean-scaled terms);
* the loss consumes the same [0,1]-clipped enhanced plane that the pipeline
  outputs, which bounds the sparsity term on near-black pixels (the raw
  quotient y/x can reach 1/illum_floor there, and gradients of that size
  destabilize the moment estimates of the optimizer).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import OptimizationDivergedError
from .guided_filter import GuidedFilterParams, guided_upsample
from .hsv import rgb_to_hsv, recombine
from .image_ops import ContextWindowSpec, resize_bilinear, validate_image
from .losses import ExposureSpec, LossReport, LossWeights, total_loss
from .network import (
    AdamState,
    GradientBuffer,
    MlpParameters,
    Tape,
    adam_step,
    backward,
    build_design_matrix,
    forward,
    init_parameters,
)

LOSS_MASKS = ("full", "no_smoothness", "no_exposure", "no_sparsity")


@dataclass(frozen=True)
class EnhancementConfig:
    """Every tunable of one enhancement run."""

    weights: LossWeights = LossWeights()
    exposure: ExposureSpec = ExposureSpec()
    window: ContextWindowSpec = ContextWindowSpec(side=7)
    epochs: int = 100
    lr: float = 1e-5
    working_size: int = 256
    guided: GuidedFilterParams = GuidedFilterParams()
    illum_floor: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.illum_floor <= 0:
            raise ValueError("illum_floor must be > 0")
        if self.working_size < 1:
            raise ValueError("working_size must be >= 1")
        if self.working_size % self.exposure.region_side:
            raise ValueError(
                f"working_size {self.working_size} must be divisible by the "
                f"exposure region side {self.exposure.region_side}"
            )
        if not 0 < self.lr:
            raise ValueError("lr must be > 0")

    def as_dict(self) -> dict:
        return {
            "weights": {
                "alpha": self.weights.alpha,
                "beta": self.weights.beta,
                "gamma": self.weights.gamma,
                "delta": self.weights.delta,
            },
            "exposure": {
                "target_L": self.exposure.target_L,
                "region_side": self.exposure.region_side,
            },
            "window": {"side": self.window.side},
            "epochs": self.epochs,
            "lr": self.lr,
            "working_size": self.working_size,
            "guided": {
                "radius": self.guided.radius,
                "regularization_eps": self.guided.regularization_eps,
            },
            "illum_floor": self.illum_floor,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EnhancementConfig":
        kw = {}
        if "weights" in data:
            kw["weights"] = LossWeights(**data["weights"])
        if "exposure" in data:
            kw["exposure"] = ExposureSpec(**data["exposure"])
        if "window" in data:
            kw["window"] = ContextWindowSpec(**data["window"])
        if "guided" in data:
            kw["guided"] = GuidedFilterParams(**data["guided"])
        for key in ("epochs", "lr", "working_size", "illum_floor", "seed"):
            if key in data:
                kw[key] = data[key]
        return cls(**kw)


@dataclass
class EnhancementTrace:
    """Per-epoch loss reports plus the final working-resolution illumination.

    ``final_parameters`` keeps the fitted network so callers can audit or
    snapshot it without rerunning the optimization.
    """

    reports: list[LossReport] = field(default_factory=list)
    final_illumination: np.ndarray | None = None
    final_parameters: MlpParameters | None = None
    wall_time: float = 0.0


def estimate_illumination(
    value_lr: np.ndarray, cfg: EnhancementConfig
) -> tuple[np.ndarray, EnhancementTrace]:
    """Fit the illumination of a working-resolution value plane.

    Runs ``cfg.epochs`` full-batch optimization steps.  Each epoch evaluates
    the network, clamps illumination to [illum_floor, 1], forms the enhanced
    plane, computes the objective and backpropagates through the clamp (zero
    gradient where clamped).  The returned plane corresponds to the last
    recorded epoch; the trace holds one loss report per epoch.

    Raises :class:`OptimizationDivergedError` if the loss goes non-finite.
    """
    value_lr = np.asarray(value_lr, dtype=np.float64)
    expected = (cfg.working_size, cfg.working_size)
    if value_lr.shape != expected:
        raise ValueError(f"value plane shape {value_lr.shape}, expected {expected}")

    start = time.perf_counter()
    compute_dtype = np.float32
    params = init_parameters(cfg.window, cfg.seed).astype(compute_dtype)
    batch = build_design_matrix(value_lr, cfg.window, dtype=compute_dtype)
    state = AdamState.for_params(params, lr=cfg.lr)
    grads = GradientBuffer.zeros_like(params)
    tape = Tape()

    y = value_lr.astype(compute_dtype)
    pixels = y.size
    weights_eff = replace(cfg.weights, beta=cfg.weights.beta / pixels)
    floor = compute_dtype(cfg.illum_floor)
    one = compute_dtype(1.0)

    trace = EnhancementTrace()
    illum = None
    for epoch in range(cfg.epochs):
        residuals, tape = forward(params, batch, tape)
        raw = y + residuals.reshape(expected)
        illum = np.clip(raw, floor, one)
        enhanced = np.clip(y / illum, 0.0, 1.0)
        report, grad = total_loss(illum, y, enhanced, weights_eff, cfg.exposure)
        if not math.isfinite(report.total):
            raise OptimizationDivergedError(epoch)
        trace.reports.append(report)
        # clamp has zero gradient outside (floor, 1)
        active = (raw > floor) & (raw < one)
        residual_grads = np.where(active, grad, 0.0).ravel().astype(compute_dtype)
        backward(params, tape, residual_grads, out=grads)
        adam_step(params, grads, state)

    trace.final_illumination = illum.astype(np.float64)
    trace.final_parameters = params
    trace.wall_time = time.perf_counter() - start
    return trace.final_illumination, trace


def enhance(
    img: np.ndarray, cfg: EnhancementConfig = EnhancementConfig()
) -> tuple[np.ndarray, EnhancementTrace]:
    """Enhance one image; returns (enhanced image, optimization trace).

    3-channel inputs are processed on the HSV value plane and recombined with
    the original hue/saturation; single-plane inputs are treated as the value
    plane directly.  Output dimensions always equal input dimensions.
    """
    img = validate_image(np.asarray(img, dtype=np.float64))
    if img.size == 0:
        raise ValueError("zero-area image")
    squeeze = img.ndim == 3 and img.shape[2] == 1
    color = img.ndim == 3 and img.shape[2] == 3

    if color:
        decomposition = rgb_to_hsv(img)
        value = decomposition.value
    else:
        value = img[:, :, 0] if squeeze else img

    ws = cfg.working_size
    value_lr = resize_bilinear(value, ws, ws)
    illum, trace = estimate_illumination(value_lr, cfg)
    enhanced_lr = np.clip(value_lr / illum, 0.0, 1.0)
    enhanced_value = guided_upsample(enhanced_lr, value_lr, value, cfg.guided)

    if color:
        out = recombine(decomposition, enhanced_value)
    else:
        out = enhanced_value[:, :, None] if squeeze else enhanced_value
    return out, trace


@dataclass
class AblationRow:
    """One sweep setting's outcome."""

    setting: object
    enhanced: np.ndarray
    trace: EnhancementTrace
    mean_value: float
    final_total: float


def _apply_setting(cfg: EnhancementConfig, kind: str, value) -> EnhancementConfig:
    if kind == "window":
        return replace(cfg, window=ContextWindowSpec(side=int(value)))
    if kind == "L":
        return replace(cfg, exposure=replace(cfg.exposure, target_L=float(value)))
    if kind == "loss_mask":
        if value not in LOSS_MASKS:
            raise ValueError(f"unknown loss mask {value!r}, expected one of {LOSS_MASKS}")
        w = cfg.weights
        masked = {
            "full": w,
            "no_smoothness": replace(w, beta=0.0),
            "no_exposure": replace(w, gamma=0.0),
            "no_sparsity": replace(w, delta=0.0),
        }[value]
        return replace(cfg, weights=masked)
    raise ValueError(f"unknown sweep kind {kind!r}; expected window, L or loss_mask")


def ablate(
    img: np.ndarray, base_cfg: EnhancementConfig, kind: str, values
) -> list[AblationRow]:
    """Run enhance once per sweep setting (same seed throughout).

    ``kind`` is one of "window", "L", "loss_mask"; for "loss_mask", values
    come from :data:`LOSS_MASKS`.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep values must be non-empty")
    rows = []
    for value in values:
        cfg = _apply_setting(base_cfg, kind, value)
        enhanced, trace = enhance(img, cfg)
        mean_value = _mean_value_plane(enhanced)
        rows.append(
            AblationRow(
                setting=value,
                enhanced=enhanced,
                trace=trace,
                mean_value=mean_value,
                final_total=trace.reports[-1].total,
            )
        )
    return rows


def _mean_value_plane(img: np.ndarray) -> float:
    if img.ndim == 3 and img.shape[2] == 3:
        return float(img.max(axis=2).mean())
    return float(img.mean())


def write_trace_jsonl(trace: EnhancementTrace, path) -> None:
    """One JSON record per epoch (loss components only, so files are
    byte-identical across reruns of the same configuration)."""
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for epoch, report in enumerate(trace.reports):
            record = {"epoch": epoch, **report.as_dict()}
            fh.write(json.dumps(record) + "\n")
