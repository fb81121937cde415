"""Volume data model and bit-exact container I/O.

In memory a volume is an int64 array indexed [x, y, z] with shape
(M, N, O). The native container is a raw little-endian payload
(`<name>.vmvol`, x-fastest raster order) plus a JSON sidecar
(`<name>.vmvol.json`) carrying the header. NIfTI-1 is supported for
ingestion only: uncompressed, integer datatypes, no intensity scaling.
Ingestion never rescales or quantizes voxel values.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    CorruptHeader,
    IoFailure,
    MissingComponentIndex,
    MissingOriginalDims,
    UnknownFormat,
    ValueOutOfRange,
)

Dims = tuple[int, int, int]


@dataclass(eq=False)
class Volume:
    dims: Dims
    bit_depth: int
    voxels: np.ndarray  # int64, shape == dims, index order [x, y, z]
    original_dims: Optional[Dims] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if self.original_dims is not None:
            self.original_dims = tuple(int(d) for d in self.original_dims)
        self.voxels = np.asarray(self.voxels, dtype=np.int64)
        if self.voxels.shape != self.dims:
            raise ValueError(f"voxel shape {self.voxels.shape} != dims {self.dims}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Volume)
            and self.dims == other.dims
            and self.bit_depth == other.bit_depth
            and self.original_dims == other.original_dims
            and np.array_equal(self.voxels, other.voxels)
        )

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    def validate(self) -> "Volume":
        """Check the value-range and metadata invariants; return self."""
        if not 8 <= self.bit_depth <= 16:
            raise ValueOutOfRange(f"bit depth {self.bit_depth} outside [8, 16]")
        if any(d < 1 for d in self.dims):
            raise ValueOutOfRange(f"non-positive dims {self.dims}")
        if self.voxels.size:
            lo = int(self.voxels.min())
            hi = int(self.voxels.max())
            if lo < 0 or hi > self.max_value:
                raise ValueOutOfRange(
                    f"voxel range [{lo}, {hi}] outside [0, {self.max_value}]"
                )
        if self.original_dims is not None:
            if any(o > d for o, d in zip(self.original_dims, self.dims)):
                raise ValueOutOfRange(
                    f"original dims {self.original_dims} exceed dims {self.dims}"
                )
        return self


def _dtype_for_depth(bit_depth: int) -> str:
    return "u8" if bit_depth <= 8 else "u16"


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_volume(v: Volume, path) -> None:
    """Write the raw container; read_volume(path) restores v bit-exactly."""
    v.validate()
    dtype = _dtype_for_depth(v.bit_depth)
    np_dtype = np.dtype("u1") if dtype == "u8" else np.dtype("<u2")
    header = {
        "dims": list(v.dims),
        "bit_depth": v.bit_depth,
        "dtype": dtype,
        "byte_order": "little",
        "original_dims": list(v.original_dims) if v.original_dims else None,
        "metadata": v.metadata,
    }
    payload = v.voxels.astype(np_dtype).ravel(order="F").tobytes()
    try:
        Path(path).write_bytes(payload)
        _sidecar_path(path).write_text(json.dumps(header, sort_keys=True) + "\n")
    except OSError as e:
        raise IoFailure(str(e)) from e


def _read_raw(path) -> Volume:
    sidecar = _sidecar_path(path)
    try:
        header = json.loads(sidecar.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CorruptHeader(f"{sidecar}: {e}") from e
    try:
        dims = tuple(int(d) for d in header["dims"])
        bit_depth = int(header["bit_depth"])
        dtype = header["dtype"]
        byte_order = header.get("byte_order", "little")
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptHeader(f"{sidecar}: missing or malformed field: {e}") from e
    if len(dims) != 3:
        raise CorruptHeader(f"{sidecar}: dims must have 3 entries")
    if dtype not in ("u8", "u16"):
        raise CorruptHeader(f"{sidecar}: unknown dtype {dtype!r}")
    if dtype == "u8" and bit_depth > 8:
        raise CorruptHeader(f"{sidecar}: dtype u8 too narrow for depth {bit_depth}")
    if byte_order != "little":
        raise CorruptHeader(f"{sidecar}: unsupported byte order {byte_order!r}")

    np_dtype = np.dtype("u1") if dtype == "u8" else np.dtype("<u2")
    data = Path(path).read_bytes()
    count = dims[0] * dims[1] * dims[2]
    if len(data) != count * np_dtype.itemsize:
        raise CorruptHeader(
            f"{path}: payload is {len(data)} bytes, header implies "
            f"{count * np_dtype.itemsize}"
        )
    flat = np.frombuffer(data, dtype=np_dtype).astype(np.int64)
    voxels = flat.reshape(dims, order="F")
    original = header.get("original_dims")
    v = Volume(
        dims=dims,
        bit_depth=bit_depth,
        voxels=voxels,
        original_dims=tuple(original) if original else None,
        metadata=header.get("metadata") or {},
    )
    return v.validate()


# NIfTI-1 field offsets (fixed 348-byte header).
_NIFTI_DATATYPES = {2: ("u1", 8), 4: ("i2", 16), 512: ("u2", 16)}


def _read_nifti(path, component_index: Optional[int]) -> Volume:
    data = Path(path).read_bytes()
    if len(data) < 352:
        raise CorruptHeader(f"{path}: shorter than a NIfTI-1 header")
    for order in ("<", ">"):
        (sizeof_hdr,) = struct.unpack_from(order + "i", data, 0)
        if sizeof_hdr == 348:
            break
    else:
        raise CorruptHeader(f"{path}: header size is not 348")
    magic = data[344:348]
    if magic[:3] != b"n+1":
        raise UnknownFormat(f"{path}: magic {magic!r} is not a single-file NIfTI-1")

    dim = struct.unpack_from(order + "8h", data, 40)
    (datatype,) = struct.unpack_from(order + "h", data, 70)
    (vox_offset,) = struct.unpack_from(order + "f", data, 108)
    (scl_slope,) = struct.unpack_from(order + "f", data, 112)
    (scl_inter,) = struct.unpack_from(order + "f", data, 116)

    if datatype not in _NIFTI_DATATYPES:
        raise UnknownFormat(f"{path}: unsupported NIfTI datatype {datatype}")
    if scl_slope not in (0.0, 1.0) or scl_inter != 0.0:
        raise UnknownFormat(
            f"{path}: scaled intensities (slope={scl_slope}, inter={scl_inter}) "
            "are rejected rather than quantized"
        )

    ndim = dim[0]
    if ndim < 3 or ndim > 4:
        raise UnknownFormat(f"{path}: {ndim}-dimensional image is not a volume")
    dims = tuple(int(d) for d in dim[1:4])
    if any(d < 1 for d in dims):
        raise CorruptHeader(f"{path}: non-positive dims {dims}")
    ncomp = int(dim[4]) if ndim == 4 else 1
    if ncomp > 1 and component_index is None:
        raise MissingComponentIndex(
            f"{path}: {ncomp} components along the 4th axis; pass component_index"
        )
    if component_index is not None and not 0 <= component_index < max(ncomp, 1):
        raise CorruptHeader(
            f"{path}: component_index {component_index} outside [0, {ncomp})"
        )

    code, bit_depth = _NIFTI_DATATYPES[datatype]
    np_dtype = np.dtype(order + code)
    count = dims[0] * dims[1] * dims[2]
    offset = int(vox_offset)
    if offset < 348:
        raise CorruptHeader(f"{path}: vox_offset {offset} overlaps the header")
    start = offset + (component_index or 0) * count * np_dtype.itemsize
    end = start + count * np_dtype.itemsize
    if end > len(data):
        raise CorruptHeader(f"{path}: payload truncated")
    flat = np.frombuffer(data[start:end], dtype=np_dtype).astype(np.int64)
    if flat.size and flat.min() < 0:
        raise ValueOutOfRange(f"{path}: negative intensities in integer volume")
    # NIfTI stores i fastest, matching the x-fastest raster of Volume.
    voxels = flat.reshape(dims, order="F")
    return Volume(dims=dims, bit_depth=bit_depth, voxels=voxels).validate()


def read_volume(path, component_index: Optional[int] = None) -> Volume:
    """Read a volume from the raw container or an uncompressed NIfTI-1 file."""
    p = Path(path)
    if not p.exists():
        raise UnknownFormat(f"{path}: no such file")
    if _sidecar_path(p).exists():
        if component_index not in (None, 0):
            raise CorruptHeader(f"{path}: raw container has no components")
        return _read_raw(p)
    head = p.read_bytes()[:4] if p.stat().st_size >= 4 else b""
    if len(head) == 4:
        for order in ("<i", ">i"):
            if struct.unpack(order, head)[0] == 348:
                return _read_nifti(p, component_index)
    raise UnknownFormat(f"{path}: neither a raw container nor a NIfTI-1 file")


def pad_to_multiple(v: Volume, m: int) -> Volume:
    """Round every dimension up to a multiple of m by edge replication."""
    if m not in (2, 4):
        raise ValueError(f"pad multiple must be 2 or 4, got {m}")
    target = tuple(-(-d // m) * m for d in v.dims)
    if target == v.dims:
        return v
    pad = [(0, t - d) for t, d in zip(target, v.dims)]
    return Volume(
        dims=target,
        bit_depth=v.bit_depth,
        voxels=np.pad(v.voxels, pad, mode="edge"),
        original_dims=v.original_dims or v.dims,
        metadata=dict(v.metadata),
    )


def crop_to_original(v: Volume) -> Volume:
    """Return the leading original_dims sub-volume and clear original_dims."""
    if v.original_dims is None:
        raise MissingOriginalDims("volume records no original dims")
    m, n, o = v.original_dims
    return Volume(
        dims=v.original_dims,
        bit_depth=v.bit_depth,
        voxels=v.voxels[:m, :n, :o].copy(),
        original_dims=None,
        metadata=dict(v.metadata),
    )
