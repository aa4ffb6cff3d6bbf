"""Full-reference quality metrics: PSNR and single-scale SSIM."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image_ops import validate_image

_SSIM_SIDE = 11
_SSIM_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float

    def as_dict(self) -> dict:
        return {
            "psnr_db": "inf" if math.isinf(self.psnr_db) else self.psnr_db,
            "ssim": self.ssim,
        }


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = validate_image(np.asarray(a, dtype=np.float64))
    b = validate_image(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(1/MSE) with peak 1.0; identical images give +inf."""
    a, b = _check_pair(a, b)
    mse = float(np.mean(np.square(a - b)))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_kernel() -> np.ndarray:
    half = (_SSIM_SIDE - 1) / 2.0
    x = np.arange(_SSIM_SIDE) - half
    k = np.exp(-(x * x) / (2.0 * _SSIM_SIGMA * _SSIM_SIGMA))
    return k / k.sum()


def _filter_valid(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable Gaussian, valid windows only
    out = sliding_window_view(plane, len(kernel), axis=0) @ kernel
    return sliding_window_view(out, len(kernel), axis=1) @ kernel


def _ssim_plane(x: np.ndarray, y: np.ndarray, kernel: np.ndarray) -> float:
    c1 = _K1 * _K1
    c2 = _K2 * _K2
    mu_x = _filter_valid(x, kernel)
    mu_y = _filter_valid(y, kernel)
    sig_xx = _filter_valid(x * x, kernel) - mu_x * mu_x
    sig_yy = _filter_valid(y * y, kernel) - mu_y * mu_y
    sig_xy = _filter_valid(x * y, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sig_xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sig_xx + sig_yy + c2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5), channel-averaged.

    Uses the standard constants K1=0.01, K2=0.03 with dynamic range 1.0.
    """
    a, b = _check_pair(a, b)
    if min(a.shape[0], a.shape[1]) < _SSIM_SIDE:
        raise ValueError(
            f"images must be at least {_SSIM_SIDE}x{_SSIM_SIDE} for SSIM, got {a.shape}"
        )
    kernel = _gaussian_kernel()
    if a.ndim == 2:
        return _ssim_plane(a, b, kernel)
    return float(
        np.mean([_ssim_plane(a[..., c], b[..., c], kernel) for c in range(a.shape[2])])
    )


def measure(a: np.ndarray, b: np.ndarray) -> MetricReport:
    return MetricReport(psnr_db=psnr(a, b), ssim=ssim(a, b))
