"""The four-term zero-shot objective and its analytic gradients.

All gradients are taken with respect to the illumination plane.  The sparsity
term is evaluated on the enhanced plane and chain-ruled through the Retinex
division enhanced = observed / illum (d enhanced / d illum = -observed/illum^2);
where the supplied enhanced plane does not equal that quotient (because the
caller transformed it, e.g. clipped it into [0,1]), the division chain is
inactive and the sparsity gradient there is zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_ops import validate_plane


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0  # fidelity
    beta: float = 20.0  # smoothness
    gamma: float = 8.0  # exposure
    delta: float = 5.0  # sparsity

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"loss weight {name} must be >= 0")


@dataclass(frozen=True)
class ExposureSpec:
    target_L: float = 0.5
    region_side: int = 16

    def __post_init__(self):
        if not 0.0 < self.target_L <= 1.0:
            raise ValueError(f"target_L must lie in (0, 1], got {self.target_L}")
        if self.region_side < 1:
            raise ValueError("region_side must be >= 1")


@dataclass(frozen=True)
class LossReport:
    fidelity: float
    smoothness: float
    exposure: float
    sparsity: float
    total: float

    def as_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "smoothness": self.smoothness,
            "exposure": self.exposure,
            "sparsity": self.sparsity,
            "total": self.total,
        }


def fidelity_loss(illum: np.ndarray, observed: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error between illumination and the observed value plane."""
    illum = validate_plane(illum)
    observed = validate_plane(observed)
    if illum.shape != observed.shape:
        raise ValueError(f"shape mismatch: {illum.shape} vs {observed.shape}")
    diff = illum - observed
    value = float(np.mean(np.square(diff)))
    grad = diff * (2.0 / diff.size)
    return value, grad


def smoothness_loss(illum: np.ndarray) -> tuple[float, np.ndarray]:
    """Squared sum of the Frobenius norms of forward vertical/horizontal differences.

    value = (||d_i||_F + ||d_j||_F)^2 where d_i, d_j are the row- and
    column-direction forward differences (no wrap-around: the last row and
    column contribute no difference of their own).
    """
    illum = validate_plane(illum)
    if illum.shape[0] < 2 or illum.shape[1] < 2:
        raise ValueError(f"smoothness needs at least a 2x2 plane, got {illum.shape}")
    di = illum[1:, :] - illum[:-1, :]
    dj = illum[:, 1:] - illum[:, :-1]
    norm_i = float(np.sqrt(np.sum(np.square(di))))
    norm_j = float(np.sqrt(np.sum(np.square(dj))))
    value = (norm_i + norm_j) ** 2
    grad = np.zeros_like(illum)
    # d value / d x = 2 (A + B) (dA/dx + dB/dx); each norm back-propagates
    # +-(difference / norm) to the pixels forming it
    if norm_i > 0:
        scaled = di / norm_i
        grad[1:, :] += scaled
        grad[:-1, :] -= scaled
    if norm_j > 0:
        scaled = dj / norm_j
        grad[:, 1:] += scaled
        grad[:, :-1] -= scaled
    grad *= 2.0 * (norm_i + norm_j)
    return value, grad


def exposure_loss(illum: np.ndarray, spec: ExposureSpec) -> tuple[float, np.ndarray]:
    """Mean |sqrt(block mean) - L| over non-overlapping region_side^2 blocks."""
    illum = validate_plane(illum)
    side = spec.region_side
    h, w = illum.shape
    if h % side or w % side:
        raise ValueError(f"plane {illum.shape} not divisible into {side}x{side} regions")
    blocks = illum.reshape(h // side, side, w // side, side)
    means = blocks.mean(axis=(1, 3))
    if np.any(means <= 0):
        raise ValueError("region mean <= 0: square root undefined")
    roots = np.sqrt(means)
    n_blocks = means.size
    value = float(np.mean(np.abs(roots - spec.target_L)))
    per_block = np.sign(roots - spec.target_L) / (2.0 * roots) / (n_blocks * side * side)
    grad = np.repeat(np.repeat(per_block, side, axis=0), side, axis=1)
    return value, grad


def sparsity_loss(enhanced: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean absolute enhanced intensity; gradient is sign(enhanced)/M (sign(0)=0)."""
    enhanced = np.asarray(enhanced)
    value = float(np.mean(np.abs(enhanced)))
    grad = np.sign(enhanced) / enhanced.size
    return value, grad


def total_loss(
    illum: np.ndarray,
    observed: np.ndarray,
    enhanced: np.ndarray,
    weights: LossWeights,
    exposure_spec: ExposureSpec,
) -> tuple[LossReport, np.ndarray]:
    """Weighted sum of the four terms; gradient entirely w.r.t. the illumination.

    ``enhanced`` is whatever plane the caller derived from observed/illum; the
    sparsity chain rule is applied only where it still equals that exact
    quotient (see module docstring).
    """
    illum = validate_plane(illum)
    if illum.shape != observed.shape or illum.shape != enhanced.shape:
        raise ValueError("illum/observed/enhanced dimensions must match")
    f_val, f_grad = fidelity_loss(illum, observed)
    s_val, s_grad = smoothness_loss(illum)
    e_val, e_grad = exposure_loss(illum, exposure_spec)
    sp_val, sp_grad_enh = sparsity_loss(enhanced)

    with np.errstate(divide="ignore", invalid="ignore"):
        quotient = observed / illum
        chain = -observed / np.square(illum)
    live = np.isfinite(quotient) & (enhanced == quotient)
    sp_grad = np.where(live, sp_grad_enh * chain, 0.0)

    w = weights
    total = w.alpha * f_val + w.beta * s_val + w.gamma * e_val + w.delta * sp_val
    grad = w.alpha * f_grad + w.beta * s_grad + w.gamma * e_grad + w.delta * sp_grad
    report = LossReport(
        fidelity=f_val, smoothness=s_val, exposure=e_val, sparsity=sp_val, total=float(total)
    )
    return report, grad
