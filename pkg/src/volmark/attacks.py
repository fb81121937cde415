"""Seeded, reproducible attack simulations for the robustness harness.

Every stochastic kind draws from a counter-based generator (Philox) keyed
by the spec's 64-bit seed, so the same spec yields the same voxels
regardless of traversal. Noise scales are relative to full-scale
intensity. JPEG goes through a real codec per z-slice and is therefore
codec-dependent; every other kind is an exact integer pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import cv2
import numpy as np
from scipy import ndimage

from .bits import BitVector
from .errors import BadParameter, EmptyRoi
from .features import extract_features_baseline, recover_watermark
from .keystream import keystream
from .verify import ber, binomial_p, nc, psnr
from .volume import Volume

FILTER_WINDOWS = (3, 5, 7)
ROTATE_PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
AXES = {"x": 0, "y": 1, "z": 2}


@dataclass
class AttackSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    steps: Optional[list["AttackSpec"]] = None  # hybrid only

    @classmethod
    def from_dict(cls, d: dict) -> "AttackSpec":
        d = dict(d)
        kind = d.pop("kind")
        seed = int(d.pop("seed", 0))
        steps = d.pop("steps", None)
        if steps is not None:
            steps = [cls.from_dict(s) for s in steps]
        return cls(kind=kind, params=d, seed=seed, steps=steps)

    def describe(self) -> str:
        if self.kind == "hybrid":
            return "+".join(s.describe() for s in self.steps or [])
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.kind}({inner})"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF))


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.int64)


def _clamp(x: np.ndarray, max_value: int) -> np.ndarray:
    return np.clip(x, 0, max_value)


def _param(spec: AttackSpec, name: str, lo: float, hi: float) -> float:
    try:
        value = float(spec.params[name])
    except KeyError:
        raise BadParameter(f"{spec.kind}: missing parameter {name!r}") from None
    if not lo <= value <= hi:
        raise BadParameter(f"{spec.kind}: {name}={value} outside [{lo}, {hi}]")
    return value


def _gaussian(v: Volume, spec: AttackSpec) -> Volume:
    p = _param(spec, "p", 0.0, 0.5)
    if p == 0.0:
        return v
    sigma = p * v.max_value
    noise = _rng(spec.seed).normal(0.0, sigma, size=v.dims)
    out = _clamp(_round_half_up(v.voxels + noise), v.max_value)
    return Volume(v.dims, v.bit_depth, out)


def _saltpepper(v: Volume, spec: AttackSpec) -> Volume:
    p = _param(spec, "p", 0.0, 0.5)
    if p == 0.0:
        return v
    u = _rng(spec.seed).random(size=v.dims)
    out = v.voxels.copy()
    out[u < p / 2] = 0
    out[(u >= p / 2) & (u < p)] = v.max_value
    return Volume(v.dims, v.bit_depth, out)


def _jpeg(v: Volume, spec: AttackSpec) -> Volume:
    q = _param(spec, "q", 10, 100)
    max_value = v.max_value
    out = np.empty(v.dims, dtype=np.int64)
    for k in range(v.dims[2]):
        plane = v.voxels[:, :, k]
        img8 = ((2 * 255 * plane + max_value) // (2 * max_value)).astype(np.uint8)
        ok, buf = cv2.imencode(".jpg", img8, [cv2.IMWRITE_JPEG_QUALITY, int(q)])
        if not ok:
            raise BadParameter(f"jpeg: encoder failed at quality {q}")
        dec = cv2.imdecode(buf, cv2.IMREAD_GRAYSCALE).astype(np.int64)
        out[:, :, k] = (2 * max_value * dec + 255) // (2 * 255)
    return Volume(v.dims, v.bit_depth, _clamp(out, max_value))


def _rank_filter(v: Volume, spec: AttackSpec) -> Volume:
    w = int(_param(spec, "w", 3, 7))
    if w not in FILTER_WINDOWS:
        raise BadParameter(f"{spec.kind}: window {w} not in {FILTER_WINDOWS}")
    if spec.kind == "median":
        out = ndimage.median_filter(v.voxels, size=w, mode="nearest")
    else:
        sums = ndimage.correlate(
            v.voxels, np.ones((w, w, w), dtype=np.int64), mode="nearest"
        )
        count = w**3
        out = (2 * sums + count) // (2 * count)
    return Volume(v.dims, v.bit_depth, out.astype(np.int64))


def _scale(v: Volume, spec: AttackSpec) -> Volume:
    f = _param(spec, "f", 0.25, 2.0)
    new_dims = tuple(max(1, int(np.floor(d * f + 0.5))) for d in v.dims)
    grids = [
        np.clip((np.arange(nd) + 0.5) * d / nd - 0.5, 0, d - 1)
        for nd, d in zip(new_dims, v.dims)
    ]
    coords = np.meshgrid(*grids, indexing="ij")
    sampled = ndimage.map_coordinates(
        v.voxels.astype(np.float64), coords, order=1, mode="nearest"
    )
    out = _clamp(_round_half_up(sampled), v.max_value)
    return Volume(new_dims, v.bit_depth, out)


def _crop_z(v: Volume, spec: AttackSpec) -> Volume:
    p = _param(spec, "p", 0.0, 0.5)
    removed = int(np.floor(p * v.dims[2] + 0.5))
    keep = max(1, v.dims[2] - removed)
    return Volume(
        (v.dims[0], v.dims[1], keep), v.bit_depth, v.voxels[:, :, :keep].copy()
    )


def _rotate(v: Volume, spec: AttackSpec) -> Volume:
    theta = _param(spec, "theta", -30.0, 30.0)
    plane = str(spec.params.get("plane", "yz")).lower()
    if plane not in ROTATE_PLANES:
        raise BadParameter(f"rotate: plane {plane!r} not in {sorted(ROTATE_PLANES)}")
    rotated = ndimage.rotate(
        v.voxels.astype(np.float64),
        angle=theta,
        axes=ROTATE_PLANES[plane],
        reshape=False,
        order=1,
        mode="constant",
        cval=0.0,
        prefilter=False,
    )
    out = _clamp(_round_half_up(rotated), v.max_value)
    return Volume(v.dims, v.bit_depth, out)


def _translate(v: Volume, spec: AttackSpec) -> Volume:
    p = _param(spec, "p", 0.0, 0.5)
    axis_name = str(spec.params.get("axis", "z")).lower()
    if axis_name not in AXES:
        raise BadParameter(f"translate: axis {axis_name!r} not in x/y/z")
    axis = AXES[axis_name]
    shift = int(np.floor(p * v.dims[axis] + 0.5))
    out = np.zeros_like(v.voxels)
    if shift < v.dims[axis]:
        src = [slice(None)] * 3
        dst = [slice(None)] * 3
        src[axis] = slice(0, v.dims[axis] - shift)
        dst[axis] = slice(shift, v.dims[axis])
        out[tuple(dst)] = v.voxels[tuple(src)]
    return Volume(v.dims, v.bit_depth, out)


def _random_crop(v: Volume, spec: AttackSpec) -> Volume:
    p = _param(spec, "p", 0.0, 0.25)
    if p == 0.0:
        return v
    nz = np.nonzero(v.voxels > 0)
    if nz[0].size == 0:
        raise EmptyRoi("random_crop: volume has no voxels above zero")
    lo = [int(idx.min()) for idx in nz]
    hi = [int(idx.max()) for idx in nz]
    side = max(1, int(np.floor((p * v.voxels.size) ** (1.0 / 3.0) + 0.5)))
    rng = _rng(spec.seed)
    start = []
    for axis in range(3):
        top = hi[axis] - side + 1
        start.append(int(rng.integers(lo[axis], top + 1)) if top > lo[axis] else lo[axis])
    out = v.voxels.copy()
    sl = tuple(
        slice(start[axis], min(start[axis] + side, v.dims[axis])) for axis in range(3)
    )
    out[sl] = 0
    return Volume(v.dims, v.bit_depth, out)


_KINDS = {
    "gaussian": _gaussian,
    "saltpepper": _saltpepper,
    "jpeg": _jpeg,
    "median": _rank_filter,
    "average": _rank_filter,
    "scale": _scale,
    "crop_z": _crop_z,
    "rotate": _rotate,
    "translate": _translate,
    "random_crop": _random_crop,
}


def apply_attack(v: Volume, spec: AttackSpec) -> Volume:
    """Apply one attack (or a hybrid chain) to a volume, deterministically."""
    if spec.kind == "hybrid":
        if not spec.steps:
            raise BadParameter("hybrid: empty step list")
        out = v
        for step in spec.steps:
            out = apply_attack(out, step)
        return out
    try:
        fn = _KINDS[spec.kind]
    except KeyError:
        raise BadParameter(f"unknown attack kind {spec.kind!r}") from None
    return fn(v, spec)


@dataclass
class WatermarkedItem:
    """One registered volume with everything the verifier stores for it."""

    volume_id: str
    volume: Volume        # watermarked
    watermark: BitVector  # w
    key: bytes
    share: BitVector      # pre-stored OS


@dataclass
class GridRow:
    volume_id: str
    attack: str
    params: str
    seed: int
    psnr_db: Optional[float]  # None when dims changed
    ber: Optional[float]
    nc: Optional[float]
    log10_p: Optional[float]
    error: Optional[str] = None


def evaluate_grid(
    items: list[WatermarkedItem],
    grid: list[AttackSpec],
    n_bits: int = 1024,
) -> list[GridRow]:
    """Attack each item with each spec and verify through the zero path.

    A failing row is recorded with its error message and the grid continues.
    """
    rows = []
    for item in items:
        c = keystream(item.key, n_bits)
        for spec in grid:
            params = ",".join(f"{k}={spec.params[k]}" for k in sorted(spec.params))
            if spec.kind == "hybrid":
                params = spec.describe()
            try:
                attacked = apply_attack(item.volume, spec)
                f_hat = extract_features_baseline(attacked, n_bits)
                w_hat = recover_watermark(item.share, c, f_hat)
                row_psnr = (
                    psnr(item.volume, attacked)
                    if attacked.dims == item.volume.dims
                    else None
                )
                matched = n_bits - item.watermark.hamming(w_hat)
                rows.append(
                    GridRow(
                        volume_id=item.volume_id,
                        attack=spec.kind,
                        params=params,
                        seed=spec.seed,
                        psnr_db=row_psnr,
                        ber=ber(item.watermark, w_hat),
                        nc=nc(item.watermark, w_hat),
                        log10_p=binomial_p(n_bits, matched),
                    )
                )
            except Exception as e:  # record the row, keep the grid running
                rows.append(
                    GridRow(
                        volume_id=item.volume_id,
                        attack=spec.kind,
                        params=params,
                        seed=spec.seed,
                        psnr_db=None,
                        ber=None,
                        nc=None,
                        log10_p=None,
                        error=f"{type(e).__name__}: {e}",
                    )
                )
    return rows


def write_rows_csv(rows: list[GridRow], path) -> None:
    """Write the harness CSV; '/' stands for unavailable PSNR (size changes)."""
    import csv

    def fmt(x, digits):
        return "/" if x is None else f"{x:.{digits}f}"

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["volume", "attack", "params", "seed", "psnr_db", "ber", "nc", "log10_p"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.volume_id,
                    row.attack,
                    row.params,
                    row.seed,
                    fmt(row.psnr_db, 2),
                    fmt(row.ber, 6),
                    fmt(row.nc, 6),
                    fmt(row.log10_p, 4),
                ]
            )
