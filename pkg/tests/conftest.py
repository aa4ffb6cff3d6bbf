"""Shared fixtures: bundled photographs and the expensive default-config runs."""
import time

import numpy as np
import pytest
import skimage.data

from lumifit.pipeline import EnhancementConfig, enhance

PHOTO_NAMES = ("astronaut", "camera", "chelsea", "coffee", "rocket")


def load_photo(name: str) -> np.ndarray:
    """One of the bundled test photographs as float64 in [0, 1].

    ``camera`` is grayscale (H, W); the others are (H, W, 3).
    """
    arr = getattr(skimage.data, name)()
    return arr.astype(np.float64) / 255.0


@pytest.fixture(scope="session")
def photos():
    return {name: load_photo(name) for name in PHOTO_NAMES}


@pytest.fixture(scope="session")
def default_runs(photos):
    """Default-config enhancement of all five photos darkened to 20 percent value.

    This is the expensive part of the suite (a full 100-epoch fit per photo at
    the 256x256 working resolution), so it runs once per session and backs the
    quality, optimization-sanity and shape checks together.
    """
    runs = {}
    for name, img in photos.items():
        dark = img * 0.2
        t0 = time.perf_counter()
        out, trace = enhance(dark, EnhancementConfig())
        wall = time.perf_counter() - t0
        runs[name] = {
            "original": img,
            "dark": dark,
            "enhanced": out,
            "trace": trace,
            "wall": wall,
        }
    return runs
