"""Pixel containers and raster primitives.

Images are numpy arrays in [0, 1]: color rasters are (H, W, 3) float64,
single planes are (H, W).  All functions are pure.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, UnsupportedFormatError


@dataclass(frozen=True)
class ContextWindowSpec:
    """Side length of the square context neighborhood (must be odd)."""

    side: int = 7

    def __post_init__(self):
        if self.side < 1 or self.side % 2 == 0:
            raise ValueError(f"context window side must be odd and >= 1, got {self.side}")

    @property
    def margin(self) -> int:
        return self.side // 2


def validate_plane(plane: np.ndarray) -> np.ndarray:
    plane = np.asarray(plane)
    if plane.ndim != 2 or plane.size == 0:
        raise ValueError(f"expected a non-empty 2-D plane, got shape {plane.shape}")
    return plane


def validate_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] in (1, 3):
        return img
    raise ValueError(f"expected (H, W), (H, W, 1) or (H, W, 3) image, got shape {img.shape}")


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG/JPEG bytes to a float image in [0, 1].

    Grayscale files give (H, W); color files give (H, W, 3).
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode in ("I", "I;16", "F"):
                raise UnsupportedFormatError(f"unsupported bit depth (mode {mode!r})")
            if mode == "L":
                arr = np.asarray(im, dtype=np.float64)
            elif mode in ("RGB", "RGBA", "P", "LA", "CMYK", "1"):
                arr = np.asarray(im.convert("RGB"), dtype=np.float64)
            else:
                raise UnsupportedFormatError(f"unsupported image mode {mode!r}")
    except UnidentifiedImageError as exc:
        raise DecodeError(f"cannot decode image bytes: {exc}") from exc
    except (OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode image bytes: {exc}") from exc
    return arr / 255.0


def quantize_u8(img: np.ndarray) -> np.ndarray:
    """[0,1] float -> uint8 with round-half-up (0.5 -> 128 after scaling)."""
    scaled = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).clip(0, 255).astype(np.uint8)


def encode_image(img: np.ndarray, format: str = "png") -> bytes:
    """Encode a float image to 8-bit PNG or JPEG bytes."""
    fmt = format.lower()
    if fmt not in ("png", "jpeg", "jpg"):
        raise ValueError(f"format must be png or jpeg, got {format!r}")
    img = validate_image(img)
    u8 = quantize_u8(img)
    if u8.ndim == 3 and u8.shape[2] == 1:
        u8 = u8[:, :, 0]
    pil = Image.fromarray(u8, mode="L" if u8.ndim == 2 else "RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG" if fmt == "png" else "JPEG")
    return buf.getvalue()


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with half-pixel-centered sampling.

    Works on (H, W) planes and (H, W, C) images; constant inputs are
    preserved exactly and outputs stay within the input's min/max.
    """
    img = validate_image(np.asarray(img, dtype=np.float64))
    if out_h < 1 or out_w < 1:
        raise ValueError("output dimensions must be >= 1")
    in_h, in_w = img.shape[:2]
    if (out_h, out_w) == (in_h, in_w):
        return img.copy()

    def axis_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # source sample position for each output center, clamped to the grid
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        pos = np.clip(pos, 0.0, n_in - 1.0)
        lo = np.floor(pos).astype(np.intp)
        lo = np.minimum(lo, n_in - 1)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, pos - lo

    y0, y1, fy = axis_coords(in_h, out_h)
    x0, x1, fx = axis_coords(in_w, out_w)
    fy = fy.reshape(-1, 1) if img.ndim == 2 else fy.reshape(-1, 1, 1)
    fx = fx.reshape(1, -1) if img.ndim == 2 else fx.reshape(1, -1, 1)
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bot = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def reflect_pad(plane: np.ndarray, margin: int) -> np.ndarray:
    """Mirror-pad a plane without repeating the edge sample ([b,a|a,b,c|c,b] style -> [b,a,b,c,b])."""
    plane = validate_plane(plane)
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if margin == 0:
        return plane.copy()
    if margin >= min(plane.shape):
        raise ValueError(
            f"margin {margin} too large for plane of shape {plane.shape} under reflect-101"
        )
    return np.pad(plane, margin, mode="reflect")


def extract_context(plane: np.ndarray, spec: ContextWindowSpec) -> np.ndarray:
    """Per-pixel flattened W x W neighborhoods.

    Returns an (H*W, W*W) matrix in row-major pixel order; the neighborhood is
    taken from the reflect-padded plane so every row has a full window.  The
    center column of each row equals the pixel's own value.
    """
    plane = validate_plane(plane)
    m = spec.margin
    padded = reflect_pad(plane, m) if m else plane
    windows = sliding_window_view(padded, (spec.side, spec.side))
    return windows.reshape(plane.size, spec.side * spec.side).copy()
