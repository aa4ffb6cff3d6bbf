"""Guided-filter upsampling of the enhanced value plane.

The low-resolution result is expressed as a local linear model of the
low-resolution guide (a = cov/(var+eps), b = mean - a*mean_guide); the
coefficients are box-smoothed, bilinearly resized to the output geometry and
applied to the full-resolution guide.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_ops import resize_bilinear, validate_plane


@dataclass(frozen=True)
class GuidedFilterParams:
    radius: int = 1
    regularization_eps: float = 1e-2

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("guided filter radius must be >= 1")
        if self.regularization_eps <= 0:
            raise ValueError("guided filter eps must be > 0")


def box_filter(plane: np.ndarray, radius: int) -> np.ndarray:
    """Mean over the (2r+1)^2 window around each pixel.

    Windows are truncated at the borders and normalized by the number of
    pixels actually covered.  Implemented with an integral image, O(HW).
    """
    plane = validate_plane(plane).astype(np.float64, copy=False)
    h, w = plane.shape
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius >= min(h, w):
        raise ValueError(f"radius {radius} too large for plane of shape {plane.shape}")
    if radius == 0:
        return plane.copy()

    integral = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(plane, axis=0), axis=1, out=integral[1:, 1:])
    rows = np.arange(h)
    cols = np.arange(w)
    r0 = np.maximum(rows - radius, 0)
    r1 = np.minimum(rows + radius, h - 1) + 1
    c0 = np.maximum(cols - radius, 0)
    c1 = np.minimum(cols + radius, w - 1) + 1
    sums = (
        integral[np.ix_(r1, c1)]
        - integral[np.ix_(r0, c1)]
        - integral[np.ix_(r1, c0)]
        + integral[np.ix_(r0, c0)]
    )
    counts = np.outer(r1 - r0, c1 - c0)
    return sums / counts


def guided_upsample(
    lowres_signal: np.ndarray,
    lowres_guide: np.ndarray,
    fullres_guide: np.ndarray,
    params: GuidedFilterParams = GuidedFilterParams(),
) -> np.ndarray:
    """Transfer the low-res signal to the full-res guide's geometry, in [0, 1].

    The full-resolution guide may have any positive dimensions — including
    smaller than the working plane, in which case the coefficient fields are
    simply resized downward (keeps tiny-input pipelines total).
    """
    signal = validate_plane(lowres_signal).astype(np.float64, copy=False)
    guide = validate_plane(lowres_guide).astype(np.float64, copy=False)
    full = validate_plane(fullres_guide).astype(np.float64, copy=False)
    if signal.shape != guide.shape:
        raise ValueError(
            f"low-res signal {signal.shape} and guide {guide.shape} must share dimensions"
        )
    r = params.radius
    mean_g = box_filter(guide, r)
    mean_s = box_filter(signal, r)
    var_g = box_filter(guide * guide, r) - mean_g * mean_g
    cov_gs = box_filter(guide * signal, r) - mean_g * mean_s
    a = cov_gs / (var_g + params.regularization_eps)
    b = mean_s - a * mean_g
    a = box_filter(a, r)
    b = box_filter(b, r)
    out_h, out_w = full.shape
    a_full = resize_bilinear(a, out_h, out_w)
    b_full = resize_bilinear(b, out_h, out_w)
    return np.clip(a_full * full + b_full, 0.0, 1.0)
