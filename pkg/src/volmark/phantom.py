"""Synthetic test volumes.

structured_phantom builds a smooth, organ-like scene: a multi-scale random
field (coarse grids, trilinearly upsampled) plus soft ellipsoidal blobs.
The broad low-frequency spread keeps pooled-band features away from their
median, which is what makes them stable under mild attacks, and the
smoothness keeps difference-expansion distortion low. random_phantom is
iid uniform noise for null-hypothesis calibration. Both are deterministic
per seed.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .volume import Volume


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF))


def _smooth_field(dims, rng, scales=(4, 8, 16)) -> np.ndarray:
    field = np.zeros(dims, dtype=np.float64)
    for weight, scale in enumerate(scales, start=1):
        coarse = rng.normal(0.0, 1.0, size=(scale, scale, scale))
        zoom = [d / scale for d in dims]
        field += ndimage.zoom(coarse, zoom, order=1, mode="nearest") / weight
    return field


def structured_phantom(dims, bit_depth: int = 8, seed: int = 0, blobs: int = 5) -> Volume:
    dims = tuple(int(d) for d in dims)
    rng = _rng(seed)
    max_value = (1 << bit_depth) - 1
    img = _smooth_field(dims, rng)
    x, y, z = np.meshgrid(*(np.linspace(0.0, 1.0, d) for d in dims), indexing="ij")
    for _ in range(blobs):
        cx, cy, cz = rng.uniform(0.2, 0.8, size=3)
        sx, sy, sz = rng.uniform(0.1, 0.3, size=3)
        amp = rng.uniform(0.5, 1.5)
        img = img + amp * np.exp(
            -(((x - cx) / sx) ** 2 + ((y - cy) / sy) ** 2 + ((z - cz) / sz) ** 2)
        )
    lo, hi = img.min(), img.max()
    img = (img - lo) / (hi - lo)
    # keep headroom at both rails so difference expansion rarely overflows
    voxels = np.floor((0.05 + 0.9 * img) * max_value + 0.5).astype(np.int64)
    return Volume(dims=dims, bit_depth=bit_depth, voxels=voxels)


def random_phantom(dims, bit_depth: int = 8, seed: int = 0) -> Volume:
    dims = tuple(int(d) for d in dims)
    rng = _rng(seed)
    voxels = rng.integers(0, 1 << bit_depth, size=dims, dtype=np.int64)
    return Volume(dims=dims, bit_depth=bit_depth, voxels=voxels)
