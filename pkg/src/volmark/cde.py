"""Cubic difference expansion: reversible one-bit-per-cube embedding.

Each 2x2x2 cube of the LLL band contributes four designated coefficients:
the reference A at the cube origin and its three axis neighbors B (x),
C (y), D (z). Embedding doubles the three reference differences, adds the
payload bit to each, and rebuilds the cube around the rounded mean:

    d = A - {B, C, D};  d'' = 2d + bit;  D'' = sum(d'')
    A' = ceil((A + B + C + D + D'' - 2) / 4)   # Round_down(M + D''/4)
    B' = A' - d''_ab, ...

Extraction votes the bit from the parities of the three recovered
differences (2-of-3), halves them, and restores the cube with the matching
floor rounding; the pair is an exact inverse for all integers. A cube is
committed only if its 4x4x4 voxel footprint, reconstructed through the
local inverse transform, stays inside [0, 2^bit_depth - 1]; otherwise the
cube is marked in the location map, left untouched, and the bit is retried
at the next cube.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .bits import BitVector
from .errors import (
    CorruptFile,
    DimsMismatch,
    DimsNotAligned,
    InsufficientCapacity,
    MapVersionUnsupported,
)
from .lifting import _invert_tiles, _stack_blocks, forward_iwt3, inverse_iwt3
from .volume import Dims, Volume, crop_to_original

VMLOC_MAGIC = b"VMLC"
VMLOC_VERSION = 1


def embed_cube(a: int, b: int, c: int, d: int, bit: int) -> tuple[int, int, int, int]:
    """Embed one bit into the four designated coefficients of a cube."""
    d_ab, d_ac, d_ad = a - b, a - c, a - d
    e_ab, e_ac, e_ad = 2 * d_ab + bit, 2 * d_ac + bit, 2 * d_ad + bit
    total = e_ab + e_ac + e_ad
    a1 = -((-(a + b + c + d + total - 2)) // 4)  # mathematical ceiling
    return a1, a1 - e_ab, a1 - e_ac, a1 - e_ad


def extract_cube(a1: int, b1: int, c1: int, d1: int) -> tuple[int, tuple[int, int, int, int]]:
    """Recover (bit, original coefficients) from an embedded cube.

    Total on arbitrary integers; the bit is the 2-of-3 parity vote of the
    three differences.
    """
    e_ab, e_ac, e_ad = a1 - b1, a1 - c1, a1 - d1
    odd = (e_ab % 2 != 0) + (e_ac % 2 != 0) + (e_ad % 2 != 0)
    bit = 1 if odd >= 2 else 0
    d_ab, d_ac, d_ad = (e_ab - bit) // 2, (e_ac - bit) // 2, (e_ad - bit) // 2
    total = d_ab + d_ac + d_ad
    a = (a1 + b1 + c1 + d1 + total + 2) // 4  # mathematical floor
    return bit, (a, a - d_ab, a - d_ac, a - d_ad)


@dataclass
class LocationMap:
    grid_dims: Dims                      # (C_x, C_y, C_z) = LLL dims / 2
    marked: np.ndarray                   # bool, shape grid_dims
    bits_embedded: int
    source_dims: Dims
    bit_depth: int
    original_dims: Optional[Dims] = None
    version: int = VMLOC_VERSION

    def __post_init__(self):
        self.grid_dims = tuple(int(d) for d in self.grid_dims)
        self.source_dims = tuple(int(d) for d in self.source_dims)
        if self.original_dims is not None:
            self.original_dims = tuple(int(d) for d in self.original_dims)
        self.marked = np.asarray(self.marked, dtype=bool).reshape(self.grid_dims)
        unmarked = self.marked.size - int(np.count_nonzero(self.marked))
        if self.bits_embedded > unmarked:
            raise CorruptFile(
                f"bits_embedded {self.bits_embedded} exceeds {unmarked} unmarked cubes"
            )


@dataclass
class EmbedResult:
    volume: Volume
    location_map: LocationMap


def _cube_grid_dims(dims: Dims) -> Dims:
    return tuple(d // 4 for d in dims)


def _designated(lll: np.ndarray):
    """Strided views of A, B, C, D over every cube; shape (C_x, C_y, C_z)."""
    a = lll[0::2, 0::2, 0::2]
    b = lll[1::2, 0::2, 0::2]
    c = lll[0::2, 1::2, 0::2]
    d = lll[0::2, 0::2, 1::2]
    return a, b, c, d


def _embed_all(a, b, c, d, bit: int):
    """Vectorized embed_cube over whole cube grids for a fixed bit value."""
    e_ab, e_ac, e_ad = 2 * (a - b) + bit, 2 * (a - c) + bit, 2 * (a - d) + bit
    total = e_ab + e_ac + e_ad
    a1 = -((-(a + b + c + d + total - 2)) // 4)
    return a1, a1 - e_ab, a1 - e_ac, a1 - e_ad


def embed(v: Volume, os_bits: BitVector) -> EmbedResult:
    """Embed an ownership share, one bit per overflow-free LLL cube.

    Cubes are visited in raster order with z fastest; a cube whose modified
    4x4x4 footprint would leave the valid voxel range is marked and skipped
    without consuming a bit.
    """
    if any(dim % 4 for dim in v.dims):
        raise DimsNotAligned(f"dims {v.dims} must be multiples of 4")
    grid = _cube_grid_dims(v.dims)
    total_cubes = grid[0] * grid[1] * grid[2]
    if len(os_bits) > total_cubes:
        raise InsufficientCapacity(f"{len(os_bits)} bits > {total_cubes} cubes")

    bands = forward_iwt3(v)
    lll = bands.lll
    max_value = v.max_value
    a, b, c, d = _designated(lll)

    # Candidate coefficients and exact footprint checks for both bit values.
    ok = {}
    primed = {}
    for bit in (0, 1):
        a1, b1, c1, d1 = _embed_all(a, b, c, d, bit)
        mod = lll.copy()
        am, bm, cm, dm = _designated(mod)
        am[...], bm[...], cm[...], dm[...] = a1, b1, c1, d1
        tiles = _invert_tiles(_stack_blocks(bands, lll_override=mod))
        ok[bit] = (tiles.min(axis=(3, 4, 5)) >= 0) & (
            tiles.max(axis=(3, 4, 5)) <= max_value
        )
        primed[bit] = (a1, b1, c1, d1)

    ok0 = ok[0].ravel()
    ok1 = ok[1].ravel()
    payload = os_bits.bits
    marked = np.zeros(total_cubes, dtype=bool)
    chosen = np.full(total_cubes, -1, dtype=np.int8)
    i = 0
    for cube in range(total_cubes):
        if i == len(payload):
            break
        bit = int(payload[i])
        if (ok1 if bit else ok0)[cube]:
            chosen[cube] = bit
            i += 1
        else:
            marked[cube] = True
    if i < len(payload):
        raise InsufficientCapacity(
            f"only {i} of {len(payload)} bits fit; the rest overflow everywhere"
        )

    chosen = chosen.reshape(grid)
    lll_wm = lll.copy()
    aw, bw, cw, dw = _designated(lll_wm)
    for bit in (0, 1):
        mask = chosen == bit
        a1, b1, c1, d1 = primed[bit]
        aw[mask] = a1[mask]
        bw[mask] = b1[mask]
        cw[mask] = c1[mask]
        dw[mask] = d1[mask]
    bands.lll = lll_wm

    watermarked = inverse_iwt3(bands)
    watermarked.original_dims = v.original_dims
    watermarked.metadata = dict(v.metadata)
    watermarked.validate()

    lmap = LocationMap(
        grid_dims=grid,
        marked=marked.reshape(grid),
        bits_embedded=len(os_bits),
        source_dims=v.dims,
        bit_depth=v.bit_depth,
        original_dims=v.original_dims,
    )
    return EmbedResult(volume=watermarked, location_map=lmap)


def extract(v_wm: Volume, lmap: LocationMap) -> tuple[BitVector, Volume]:
    """Recover the ownership share and restore the original volume exactly."""
    if lmap.version != VMLOC_VERSION:
        raise MapVersionUnsupported(f"location map version {lmap.version}")
    if tuple(v_wm.dims) != tuple(lmap.source_dims):
        raise DimsMismatch(f"volume dims {v_wm.dims} != map dims {lmap.source_dims}")
    grid = _cube_grid_dims(v_wm.dims)
    if tuple(grid) != tuple(lmap.grid_dims):
        raise DimsMismatch(f"cube grid {grid} != map grid {lmap.grid_dims}")

    bands = forward_iwt3(v_wm)
    lll = bands.lll.copy()
    a1, b1, c1, d1 = _designated(lll)

    e_ab, e_ac, e_ad = a1 - b1, a1 - c1, a1 - d1
    odd = (e_ab % 2 != 0).astype(np.int8) + (e_ac % 2 != 0) + (e_ad % 2 != 0)
    bit = (odd >= 2).astype(np.int64)
    d_ab, d_ac, d_ad = (e_ab - bit) // 2, (e_ac - bit) // 2, (e_ad - bit) // 2
    total = d_ab + d_ac + d_ad
    a0 = (a1 + b1 + c1 + d1 + total + 2) // 4

    marked_flat = lmap.marked.ravel()
    unmarked_rank = np.cumsum(~marked_flat)  # 1-based rank among unmarked cubes
    selected = (~marked_flat) & (unmarked_rank <= lmap.bits_embedded)
    sel = selected.reshape(grid)

    out_bits = bit.ravel()[selected].astype(np.uint8)

    a1[sel] = a0[sel]
    b1[sel] = (a0 - d_ab)[sel]
    c1[sel] = (a0 - d_ac)[sel]
    d1[sel] = (a0 - d_ad)[sel]
    bands.lll = lll

    restored = inverse_iwt3(bands)
    restored.metadata = dict(v_wm.metadata)
    if lmap.original_dims is not None:
        restored.original_dims = lmap.original_dims
        restored = crop_to_original(restored)
    return BitVector(out_bits), restored


def write_location_map(lmap: LocationMap, path) -> None:
    bitmap = np.packbits(
        lmap.marked.ravel().astype(np.uint8), bitorder="little"
    ).tobytes()
    orig = lmap.original_dims or (0, 0, 0)
    blob = (
        VMLOC_MAGIC
        + struct.pack("<B", lmap.version)
        + struct.pack("<3I", *lmap.source_dims)
        + struct.pack("<B", lmap.bit_depth)
        + struct.pack("<3I", *orig)
        + struct.pack("<I", lmap.bits_embedded)
        + struct.pack("<3I", *lmap.grid_dims)
        + bitmap
        + struct.pack("<I", zlib.crc32(bitmap) & 0xFFFFFFFF)
    )
    Path(path).write_bytes(blob)


def read_location_map(path) -> LocationMap:
    blob = Path(path).read_bytes()
    if len(blob) < 50 or blob[:4] != VMLOC_MAGIC:
        raise CorruptFile(f"{path}: not a .vmloc file")
    version = blob[4]
    if version != VMLOC_VERSION:
        raise MapVersionUnsupported(f"{path}: version {version}")
    source_dims = struct.unpack_from("<3I", blob, 5)
    bit_depth = blob[17]
    orig = struct.unpack_from("<3I", blob, 18)
    (bits_embedded,) = struct.unpack_from("<I", blob, 30)
    grid_dims = struct.unpack_from("<3I", blob, 34)
    total = grid_dims[0] * grid_dims[1] * grid_dims[2]
    nbytes = (total + 7) // 8
    if len(blob) != 46 + nbytes + 4:
        raise CorruptFile(f"{path}: bitmap size mismatch")
    bitmap = blob[46 : 46 + nbytes]
    (crc,) = struct.unpack_from("<I", blob, 46 + nbytes)
    if crc != (zlib.crc32(bitmap) & 0xFFFFFFFF):
        raise CorruptFile(f"{path}: CRC mismatch")
    marked = np.unpackbits(
        np.frombuffer(bitmap, dtype=np.uint8), bitorder="little"
    )[:total].astype(bool)
    return LocationMap(
        grid_dims=grid_dims,
        marked=marked.reshape(grid_dims),
        bits_embedded=bits_embedded,
        source_dims=source_dims,
        bit_depth=bit_depth,
        original_dims=orig if any(orig) else None,
        version=version,
    )
