"""Volume feature binarization and ownership-share construction.

The baseline extractor is a deterministic integer pipeline: box-mean pool
to a fixed 32x32x32 grid, one transform level, then threshold the leading
low-band coefficients at their median. It stands in for a learned
extractor; externally trained features arrive through .vmbits files and
take the same shape here. The ownership share is the elementwise XOR
OS = w ^ c ^ f, and watermark recovery is the same XOR applied to the
extracted share.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bits import BitVector, read_bits
from .errors import LengthMismatch, NTooLarge
from .lifting import forward_iwt3
from .volume import Volume

POOL_GRID = 32
BASELINE_ID = "baseline-v1"
EXTERNAL_ID = "external"
_MAX_FEATURE_BITS = (POOL_GRID // 2) ** 3  # LLL budget of the pooled grid


@dataclass
class FeatureVector:
    n: int
    bits: BitVector
    extractor_id: str
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.bits) != self.n:
            raise LengthMismatch(f"{len(self.bits)} bits for declared n {self.n}")


@dataclass
class OwnershipShare:
    bits: BitVector
    key_id: Optional[str] = None
    extractor_id: Optional[str] = None
    created_at: Optional[float] = None


def _pool_axis(sums: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Box sums along one axis onto the fixed grid; returns (sums, counts).

    Box i spans [floor(i*dim/G), floor((i+1)*dim/G)); for dims below the
    grid size an empty box degenerates to the single sample at its lower
    boundary (edge replication upward).
    """
    dim = sums.shape[axis]
    lo = (np.arange(POOL_GRID) * dim) // POOL_GRID
    hi = ((np.arange(POOL_GRID) + 1) * dim) // POOL_GRID
    hi = np.maximum(hi, lo + 1)
    csum = np.concatenate(
        [np.zeros_like(np.take(sums, [0], axis=axis)), np.cumsum(sums, axis=axis)],
        axis=axis,
    )
    box = np.take(csum, hi, axis=axis) - np.take(csum, lo, axis=axis)
    return box, (hi - lo).astype(np.int64)


def _pool_to_grid(voxels: np.ndarray) -> np.ndarray:
    """Box-mean pool to (32, 32, 32), rounding half-up in exact integers."""
    sums = voxels.astype(np.int64)
    counts = []
    for axis in range(3):
        sums, cnt = _pool_axis(sums, axis)
        counts.append(cnt)
    total = (
        counts[0][:, None, None] * counts[1][None, :, None] * counts[2][None, None, :]
    )
    return (2 * sums + total) // (2 * total)


def extract_features_baseline(v: Volume, n: int) -> FeatureVector:
    """Deterministic baseline features: pooled low-band coefficients vs median.

    Bits are 1 where the coefficient strictly exceeds the lower median of
    the n selected coefficients, so ties (and constant volumes) give 0.
    """
    if n > _MAX_FEATURE_BITS:
        raise NTooLarge(f"n {n} exceeds {_MAX_FEATURE_BITS} available coefficients")
    if n < 1:
        raise ValueError("n must be positive")
    if v.voxels.size == 0:
        raise ValueError("volume is empty")
    pooled = _pool_to_grid(v.voxels)
    grid = Volume(
        dims=(POOL_GRID, POOL_GRID, POOL_GRID), bit_depth=v.bit_depth, voxels=pooled
    )
    lll = forward_iwt3(grid).lll
    sel = lll.ravel()[:n]  # raster order, z fastest
    median = np.partition(sel, (n - 1) // 2)[(n - 1) // 2]
    bits = (sel > median).astype(np.uint8)
    return FeatureVector(
        n=n,
        bits=BitVector(bits),
        extractor_id=BASELINE_ID,
        source={"pool_grid": POOL_GRID, "input_dims": list(v.dims)},
    )


def load_external_features(path, n: int) -> FeatureVector:
    """Load externally produced feature bits (.vmbits) of declared length n."""
    bits = read_bits(path)
    if len(bits) != n:
        raise LengthMismatch(f"{path}: holds {len(bits)} bits, expected {n}")
    return FeatureVector(n=n, bits=bits, extractor_id=EXTERNAL_ID, source={"path": str(path)})


def make_ownership_share(
    w: BitVector, c: BitVector, f: FeatureVector, key: Optional[bytes] = None
) -> OwnershipShare:
    """OS = w ^ c ^ f over equal-length inputs."""
    if isinstance(key, str):
        key = key.encode("utf-8")
    return OwnershipShare(
        bits=w ^ c ^ f.bits,
        key_id=hashlib.sha256(key).hexdigest()[:16] if key else None,
        extractor_id=f.extractor_id,
        created_at=time.time(),
    )


def recover_watermark(os_share: OwnershipShare | BitVector, c: BitVector, f: FeatureVector) -> BitVector:
    """Invert the share construction: w = OS ^ c ^ f."""
    os_bits = os_share.bits if isinstance(os_share, OwnershipShare) else os_share
    return os_bits ^ c ^ f.bits
