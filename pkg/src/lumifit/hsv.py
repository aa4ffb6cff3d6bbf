"""RGB <-> HSV conversion (hexcone model) on [0,1] float planes.

Hue is stored normalized to [0, 1) (angle / 360); achromatic pixels get hue 0.
Value is max(R, G, B), which is the plane the enhancement operates on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_ops import validate_image, validate_plane


@dataclass
class HsvDecomposition:
    hue: np.ndarray
    saturation: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        if not (self.hue.shape == self.saturation.shape == self.value.shape):
            raise ValueError("hue/saturation/value planes must share dimensions")

    @property
    def height(self) -> int:
        return self.value.shape[0]

    @property
    def width(self) -> int:
        return self.value.shape[1]


def rgb_to_hsv(img: np.ndarray) -> HsvDecomposition:
    img = validate_image(np.asarray(img, dtype=np.float64))
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"rgb_to_hsv expects a 3-channel image, got shape {img.shape}")
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    v = img.max(axis=2)
    c = v - img.min(axis=2)
    chromatic = c > 0
    safe_c = np.where(chromatic, c, 1.0)

    # piecewise hue in sixths of a turn, tied to whichever channel is the max
    h = np.zeros_like(v)
    r_max = chromatic & (v == r)
    g_max = chromatic & (v == g) & ~r_max
    b_max = chromatic & (v == b) & ~r_max & ~g_max
    h = np.where(r_max, ((g - b) / safe_c) % 6.0, h)
    h = np.where(g_max, (b - r) / safe_c + 2.0, h)
    h = np.where(b_max, (r - g) / safe_c + 4.0, h)
    h = (h / 6.0) % 1.0

    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    return HsvDecomposition(hue=h, saturation=s, value=v)


def hsv_to_rgb(hsv: HsvDecomposition) -> np.ndarray:
    h = np.asarray(hsv.hue, dtype=np.float64) * 6.0
    s = np.asarray(hsv.saturation, dtype=np.float64)
    v = np.asarray(hsv.value, dtype=np.float64)
    i = np.floor(h).astype(np.intp) % 6
    f = h - np.floor(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.clip(np.stack([r, g, b], axis=-1), 0.0, 1.0)


def recombine(original: HsvDecomposition, enhanced_value: np.ndarray) -> np.ndarray:
    """Rebuild RGB from the original hue/saturation and a replacement value plane."""
    enhanced_value = validate_plane(enhanced_value)
    if enhanced_value.shape != original.value.shape:
        raise ValueError(
            f"value plane shape {enhanced_value.shape} does not match "
            f"decomposition {original.value.shape}"
        )
    return hsv_to_rgb(
        HsvDecomposition(hue=original.hue, saturation=original.saturation, value=enhanced_value)
    )
