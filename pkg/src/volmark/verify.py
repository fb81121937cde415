"""Watermark metrics and the two-stage verification protocol.

Integrity is checked first: a zero BER against the watermark recovered
from the embedded share proves the data untampered. Otherwise the report
falls back to the zero-watermark path (pre-stored share). Ownership is a
right-tailed binomial test on the matched-bit count at significance
alpha = 1e-6; the tail sum is computed exactly with big integers and
reported in log10, so p-values far below double underflow stay usable.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .bits import BitVector
from .errors import (
    DegenerateReference,
    DimsMismatch,
    EmptyVector,
    LengthMismatch,
    OutOfRange,
)
from .volume import Volume

DEFAULT_ALPHA = 1e-6
_MAX_TEST_N = 8192


def ber(w: BitVector, w_hat: BitVector) -> float:
    """Fraction of mismatched bits."""
    if len(w) != len(w_hat):
        raise LengthMismatch(f"lengths {len(w)} and {len(w_hat)}")
    if len(w) == 0:
        raise EmptyVector("BER undefined on empty vectors")
    return w.hamming(w_hat) / len(w)


def nc(w: BitVector, w_hat: BitVector) -> float:
    """Normalized correlation of binary vectors; 0 when w_hat is all-zero."""
    if len(w) != len(w_hat):
        raise LengthMismatch(f"lengths {len(w)} and {len(w_hat)}")
    ones_w = w.count_ones()
    if ones_w == 0:
        raise DegenerateReference("reference watermark is all-zero")
    ones_h = w_hat.count_ones()
    if ones_h == 0:
        return 0.0
    inner = int(np.count_nonzero(w.bits & w_hat.bits))
    return inner / (math.sqrt(ones_w) * math.sqrt(ones_h))


def psnr(v: Volume, v_hat: Volume) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical volumes."""
    if v.dims != v_hat.dims:
        raise DimsMismatch(f"dims {v.dims} != {v_hat.dims}")
    diff = v.voxels.astype(np.int64) - v_hat.voxels.astype(np.int64)
    sse = float(np.sum(diff.astype(np.float64) ** 2))
    if sse == 0.0:
        return math.inf
    mse = sse / diff.size
    return 10.0 * math.log10(v.max_value**2 / mse)


def binomial_p(n: int, k: int) -> float:
    """log10 of the exact right tail P[X >= k], X ~ Binomial(n, 1/2).

    Exact big-integer tail sum; the log is accurate to well over 12
    significant digits.
    """
    if not (0 <= k <= n <= _MAX_TEST_N):
        raise OutOfRange(f"need 0 <= k <= n <= {_MAX_TEST_N}, got n={n}, k={k}")
    if k == 0:
        return 0.0
    term = math.comb(n, k)
    total = term
    for i in range(k + 1, n + 1):
        term = term * (n - i + 1) // i
        total += term
    return math.log10(total) - n * math.log10(2)


@dataclass
class VerificationReport:
    n: int
    matched_bits: int
    ber: float
    nc: float
    log10_p: float
    alpha: float
    integrity_intact: bool
    ownership_detected: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls(**json.loads(text))


def verify(
    w: BitVector,
    w_hat_embedded: Optional[BitVector],
    w_hat_zero: BitVector,
    alpha: float = DEFAULT_ALPHA,
) -> VerificationReport:
    """Two-stage verification against the stored watermark.

    Metrics come from the embedded-path watermark when it matches w exactly
    (integrity intact), otherwise from the zero-watermark path.
    """
    if len(w) != len(w_hat_zero):
        raise LengthMismatch(f"lengths {len(w)} and {len(w_hat_zero)}")
    if w_hat_embedded is not None and len(w_hat_embedded) != len(w):
        raise LengthMismatch(f"lengths {len(w)} and {len(w_hat_embedded)}")
    intact = w_hat_embedded is not None and ber(w, w_hat_embedded) == 0.0
    w_hat = w_hat_embedded if intact else w_hat_zero
    n = len(w)
    matched = n - w.hamming(w_hat)
    log10_p = binomial_p(n, matched)
    return VerificationReport(
        n=n,
        matched_bits=matched,
        ber=1.0 - matched / n,
        nc=nc(w, w_hat),
        log10_p=log10_p,
        alpha=alpha,
        integrity_intact=intact,
        ownership_detected=log10_p <= math.log10(alpha),
    )
