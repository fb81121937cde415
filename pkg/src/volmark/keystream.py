"""Keyed chaotic bit sequences from the Henon map.

The recurrence x' = 1 - a*x^2 + y, y' = b*x runs in strict 64-bit floats
with a fixed evaluation order, because extraction must regenerate the
exact same bits on every platform. Each emitted x is shifted into [0, 1)
by u = (x + 1.5)/3 and quantized to k bits by i = floor(2^k * u), most
significant bit first.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .bits import BitVector
from .errors import Diverged, EmptyKey, InsufficientValues

DEFAULT_A = 1.4
DEFAULT_B = 0.3
DEFAULT_BURN_IN = 1000
DEFAULT_BITS_PER_VALUE = 8

# Largest representable u strictly below 1 after clamping.
_U_MAX = 1.0 - 2.0**-52


@dataclass
class HenonState:
    x: float
    y: float
    a: float = DEFAULT_A
    b: float = DEFAULT_B
    n: int = 0


def derive_initial_state(key: bytes) -> HenonState:
    """Map key material into the attractor basin, deterministically.

    Two 20-bit integers from a SHA-256 digest give
    x0 = 0.05 + h0/2^24 and y0 = 0.05 + h1/2^24, both in [0.05, 0.1125).
    """
    if isinstance(key, str):
        key = key.encode("utf-8")
    if not key:
        raise EmptyKey("key must be non-empty")
    digest = int.from_bytes(hashlib.sha256(key).digest(), "big")
    h0 = (digest >> (256 - 20)) & 0xFFFFF
    h1 = (digest >> (256 - 40)) & 0xFFFFF
    return HenonState(x=0.05 + h0 / 2.0**24, y=0.05 + h1 / 2.0**24)


def henon_sequence(s0: HenonState, count: int, burn_in: int = DEFAULT_BURN_IN) -> list[float]:
    """Iterate the map, discard burn_in states, return the next count x values."""
    if count < 0:
        raise ValueError("count must be non-negative")
    x, y, a, b = s0.x, s0.y, s0.a, s0.b
    out = []
    for i in range(burn_in + count):
        t = x * x
        t = a * t
        t = 1.0 - t
        xn = t + y
        yn = b * x
        x, y = xn, yn
        if abs(x) > 2.0:
            raise Diverged(f"|x| = {abs(x):.3f} > 2 at step {i + 1}; key out of basin")
        if i >= burn_in:
            out.append(x)
    return out


def binarize_chaotic(xs, k: int, n: int) -> BitVector:
    """Quantize each value to k bits (MSB first) and truncate to n bits total."""
    if not 1 <= k <= 16:
        raise ValueError(f"k must be in [1, 16], got {k}")
    needed = -(-n // k) if n else 0
    xs = np.asarray(list(xs), dtype=np.float64)
    if xs.size < needed:
        raise InsufficientValues(f"need {needed} values for {n} bits, got {xs.size}")
    if n == 0:
        return BitVector.zeros(0)
    u = np.clip((xs[:needed] + 1.5) / 3.0, 0.0, _U_MAX)
    idx = np.floor(np.ldexp(u, k)).astype(np.int64)
    shifts = np.arange(k - 1, -1, -1)
    bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    return BitVector(bits[:n])


def keystream(key: bytes, n: int) -> BitVector:
    """Deterministic n-bit keystream: derive, iterate, binarize with k = 8."""
    state = derive_initial_state(key)
    count = -(-n // DEFAULT_BITS_PER_VALUE) if n else 0
    xs = henon_sequence(state, count, DEFAULT_BURN_IN)
    return binarize_chaotic(xs, DEFAULT_BITS_PER_VALUE, n)
