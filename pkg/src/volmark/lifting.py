"""One-level integer 3D wavelet transform (S-transform lifting) and its inverse.

Per axis, each pair (x0, x1) maps to h = x0 - x1 and l = floor((x0 + x1)/2),
low halves stored first; the inverse is x0 = l + floor((h + 1)/2),
x1 = x0 - h, which is exact for all integers. The forward pass runs along
z, then y, then x; the inverse undoes the axes in reverse order. Band names
use letter position 1 for the x-axis result, 2 for y, 3 for z, so LLL is
the low band in all three axes.

Locality: each output voxel depends only on the eight same-position
coefficients (one per band), so a 2x2x2 coefficient block fully determines
its 4x4x4 voxel footprint. local_inverse_block exploits this for the exact
overflow check used during embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentBands, OddDimension, OutOfBounds
from .volume import Dims, Volume

BAND_NAMES = ("lll", "hll", "lhl", "hhl", "llh", "hlh", "lhh", "hhh")


@dataclass(eq=False)
class SubBands:
    lll: np.ndarray
    hll: np.ndarray
    lhl: np.ndarray
    hhl: np.ndarray
    llh: np.ndarray
    hlh: np.ndarray
    lhh: np.ndarray
    hhh: np.ndarray
    source_dims: Dims
    bit_depth: int

    def band(self, name: str) -> np.ndarray:
        return getattr(self, name.lower())

    @property
    def band_dims(self) -> Dims:
        return tuple(d // 2 for d in self.source_dims)

    def check(self) -> "SubBands":
        shape = tuple(self.band_dims)
        for name in BAND_NAMES:
            if self.band(name).shape != shape:
                raise InconsistentBands(
                    f"band {name.upper()} has shape {self.band(name).shape}, "
                    f"expected {shape}"
                )
        return self


def _lift_axis(a: np.ndarray, axis: int) -> np.ndarray:
    """One lifting pass along axis: low half first, then the differences."""
    even = np.take(a, np.arange(0, a.shape[axis], 2), axis=axis)
    odd = np.take(a, np.arange(1, a.shape[axis], 2), axis=axis)
    h = even - odd
    l = (even + odd) // 2
    return np.concatenate([l, h], axis=axis)


def _unlift_axis(a: np.ndarray, axis: int) -> np.ndarray:
    """Exact inverse of _lift_axis."""
    n = a.shape[axis]
    l = np.take(a, np.arange(0, n // 2), axis=axis)
    h = np.take(a, np.arange(n // 2, n), axis=axis)
    even = l + (h + 1) // 2
    odd = even - h
    out = np.empty_like(a)
    sl_even = [slice(None)] * a.ndim
    sl_odd = [slice(None)] * a.ndim
    sl_even[axis] = slice(0, n, 2)
    sl_odd[axis] = slice(1, n, 2)
    out[tuple(sl_even)] = even
    out[tuple(sl_odd)] = odd
    return out


def _forward_array(arr: np.ndarray) -> np.ndarray:
    t = np.asarray(arr, dtype=np.int64)
    for axis in (2, 1, 0):  # z, then y, then x
        t = _lift_axis(t, axis)
    return t

def _inverse_array(t: np.ndarray) -> np.ndarray:
    out = np.asarray(t, dtype=np.int64)
    for axis in (0, 1, 2):  # x, then y, then z
        out = _unlift_axis(out, axis)
    return out


def _split_bands(t: np.ndarray, dims: Dims, bit_depth: int) -> SubBands:
    m2, n2, o2 = (d // 2 for d in dims)
    def sl(letter, half):
        return slice(0, half) if letter == "l" else slice(half, 2 * half)
    bands = {}
    for name in BAND_NAMES:
        bands[name] = t[sl(name[0], m2), sl(name[1], n2), sl(name[2], o2)].copy()
    return SubBands(source_dims=tuple(dims), bit_depth=bit_depth, **bands)


def _assemble(b: SubBands) -> np.ndarray:
    m2, n2, o2 = b.band_dims
    t = np.empty(b.source_dims, dtype=np.int64)
    def sl(letter, half):
        return slice(0, half) if letter == "l" else slice(half, 2 * half)
    for name in BAND_NAMES:
        t[sl(name[0], m2), sl(name[1], n2), sl(name[2], o2)] = b.band(name)
    return t


def forward_iwt3(v: Volume) -> SubBands:
    """Decompose a volume into the eight half-resolution integer sub-bands."""
    if any(d % 2 for d in v.dims):
        raise OddDimension(f"dims {v.dims} must all be even")
    t = _forward_array(v.voxels)
    return _split_bands(t, v.dims, v.bit_depth)


def inverse_iwt3(b: SubBands) -> Volume:
    """Exact inverse of forward_iwt3.

    If the bands were modified, output voxels may leave [0, 2^bit_depth - 1];
    range checking is the caller's responsibility.
    """
    b.check()
    voxels = _inverse_array(_assemble(b))
    return Volume(dims=b.source_dims, bit_depth=b.bit_depth, voxels=voxels)


def _block_view(band: np.ndarray) -> np.ndarray:
    """Reshape a band of shape (2Cx, 2Cy, 2Cz) to blocks (Cx, Cy, Cz, 2, 2, 2)."""
    cx, cy, cz = band.shape[0] // 2, band.shape[1] // 2, band.shape[2] // 2
    return band.reshape(cx, 2, cy, 2, cz, 2).transpose(0, 2, 4, 1, 3, 5)


def _stack_blocks(b: SubBands, lll_override: np.ndarray | None = None) -> np.ndarray:
    """Arrange all 2x2x2 coefficient blocks as (Cx, Cy, Cz, 4, 4, 4) tiles.

    Tile layout mirrors the full transform array: low-band coefficients in
    the first two entries of each tile axis, high-band in the last two.
    Inverting a tile (x, then y, then z) yields that block's exact 4x4x4
    voxel footprint.
    """
    m2, n2, o2 = b.band_dims
    cx, cy, cz = m2 // 2, n2 // 2, o2 // 2
    tiles = np.empty((cx, cy, cz, 4, 4, 4), dtype=np.int64)
    for name in BAND_NAMES:
        band = lll_override if (name == "lll" and lll_override is not None) else b.band(name)
        ox = 2 * (name[0] == "h")
        oy = 2 * (name[1] == "h")
        oz = 2 * (name[2] == "h")
        tiles[:, :, :, ox : ox + 2, oy : oy + 2, oz : oz + 2] = _block_view(band)
    return tiles


def _invert_tiles(tiles: np.ndarray) -> np.ndarray:
    out = tiles
    for axis in (-3, -2, -1):
        out = _unlift_axis(out, axis)
    return out


def local_inverse_block(b: SubBands, ci: Dims, extent: Dims = (2, 2, 2)) -> np.ndarray:
    """Voxels of the 4x4x4 footprint of the 2x2x2 coefficient block at ci.

    Agrees exactly with the corresponding slice of inverse_iwt3(b).
    """
    if tuple(extent) != (2, 2, 2):
        raise ValueError("only 2x2x2 coefficient blocks are supported")
    b.check()
    m2, n2, o2 = b.band_dims
    bx, by, bz = (int(c) for c in ci)
    if not (0 <= bx < m2 // 2 and 0 <= by < n2 // 2 and 0 <= bz < o2 // 2):
        raise OutOfBounds(f"block {ci} outside grid {(m2 // 2, n2 // 2, o2 // 2)}")
    tile = np.empty((4, 4, 4), dtype=np.int64)
    for name in BAND_NAMES:
        band = b.band(name)
        ox = 2 * (name[0] == "h")
        oy = 2 * (name[1] == "h")
        oz = 2 * (name[2] == "h")
        tile[ox : ox + 2, oy : oy + 2, oz : oz + 2] = band[
            2 * bx : 2 * bx + 2, 2 * by : 2 * by + 2, 2 * bz : 2 * bz + 2
        ]
    return _invert_tiles(tile)
