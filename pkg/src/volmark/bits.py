"""Packed bit vectors and the .vmbits container.

A BitVector holds an ordered bit sequence (index 0 first) and backs the
watermark w, the keystream c^b, binarized features f^b, and the ownership
share OS. The on-disk format is:

    magic "VMBV" | version u8 | length u32 LE | packed payload | CRC32 u32 LE

Payload packing is little-bit-endian: bit 0 of the vector is the LSB of
payload byte 0. The CRC covers the payload bytes only.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptFile, LengthMismatch

VMBITS_MAGIC = b"VMBV"
VMBITS_VERSION = 1


@dataclass
class BitVector:
    bits: np.ndarray  # uint8 array of 0/1 values

    def __post_init__(self):
        self.bits = np.ascontiguousarray(np.asarray(self.bits, dtype=np.uint8))
        if self.bits.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if self.bits.size and self.bits.max() > 1:
            raise ValueError("bits must be 0/1 valued")

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitVector) and np.array_equal(self.bits, other.bits)

    def __xor__(self, other: "BitVector") -> "BitVector":
        if len(self) != len(other):
            raise LengthMismatch(f"xor of lengths {len(self)} and {len(other)}")
        return BitVector(np.bitwise_xor(self.bits, other.bits))

    def hamming(self, other: "BitVector") -> int:
        if len(self) != len(other):
            raise LengthMismatch(f"hamming of lengths {len(self)} and {len(other)}")
        return int(np.count_nonzero(self.bits != other.bits))

    def count_ones(self) -> int:
        return int(np.count_nonzero(self.bits))

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_bits(cls, seq) -> "BitVector":
        return cls(np.fromiter((int(b) for b in seq), dtype=np.uint8))

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        return cls.from_bits(int(c) for c in s)

    @classmethod
    def random(cls, n: int, seed: int) -> "BitVector":
        rng = np.random.Generator(np.random.Philox(key=seed))
        return cls(rng.integers(0, 2, size=n, dtype=np.uint8))

    def packed(self) -> bytes:
        return np.packbits(self.bits, bitorder="little").tobytes()

    @classmethod
    def from_packed(cls, data: bytes, n: int) -> "BitVector":
        raw = np.frombuffer(data, dtype=np.uint8)
        if raw.size * 8 < n:
            raise LengthMismatch(f"{raw.size} bytes cannot hold {n} bits")
        return cls(np.unpackbits(raw, bitorder="little")[:n])


def write_bits(vec: BitVector, path) -> None:
    payload = vec.packed()
    blob = (
        VMBITS_MAGIC
        + struct.pack("<B", VMBITS_VERSION)
        + struct.pack("<I", len(vec))
        + payload
        + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)
    )
    Path(path).write_bytes(blob)


def read_bits(path) -> BitVector:
    blob = Path(path).read_bytes()
    if len(blob) < 13 or blob[:4] != VMBITS_MAGIC:
        raise CorruptFile(f"{path}: not a .vmbits file")
    version = blob[4]
    if version != VMBITS_VERSION:
        raise CorruptFile(f"{path}: unsupported .vmbits version {version}")
    (n,) = struct.unpack_from("<I", blob, 5)
    nbytes = (n + 7) // 8
    if len(blob) != 9 + nbytes + 4:
        raise CorruptFile(f"{path}: payload size mismatch")
    payload = blob[9 : 9 + nbytes]
    (crc,) = struct.unpack_from("<I", blob, 9 + nbytes)
    if crc != (zlib.crc32(payload) & 0xFFFFFFFF):
        raise CorruptFile(f"{path}: CRC mismatch")
    return BitVector.from_packed(payload, n)
