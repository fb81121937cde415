"""Integer lifting: perfect reconstruction, locality, band semantics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volmark.errors import InconsistentBands, OddDimension, OutOfBounds
from volmark.lifting import (
    _lift_axis,
    _unlift_axis,
    forward_iwt3,
    inverse_iwt3,
    local_inverse_block,
)
from volmark.volume import Volume

from conftest import random_volume, rng_for


def test_constant_volume_bands():
    v = Volume((8, 8, 8), 8, np.full((8, 8, 8), 77, dtype=np.int64))
    bands = forward_iwt3(v)
    assert np.all(bands.lll == 77)
    for name in ("hll", "lhl", "hhl", "llh", "hlh", "lhh", "hhh"):
        assert np.all(bands.band(name) == 0)


def test_pair_lifting_example():
    pair = np.array([5, 2], dtype=np.int64)
    out = _lift_axis(pair, 0)
    assert list(out) == [3, 3]  # l = floor(7/2), h = 5 - 2
    assert list(_unlift_axis(out, 0)) == [5, 2]


def test_zero_detail_pair():
    assert list(_unlift_axis(np.array([7, 0], dtype=np.int64), 0)) == [7, 7]


def test_exhaustive_pair_round_trip():
    a, b = np.meshgrid(np.arange(256), np.arange(256), indexing="ij")
    pairs = np.stack([a.ravel(), b.ravel()], axis=1).astype(np.int64)
    back = _unlift_axis(_lift_axis(pairs, 1), 1)
    assert np.array_equal(back, pairs)


def test_band_orientation():
    # a lone step along x shows up in the x-high bands only
    vox = np.zeros((4, 4, 4), dtype=np.int64)
    vox[0, :, :] = 10  # pairs (10, 0) along x at x-block 0
    v = Volume((4, 4, 4), 8, vox)
    bands = forward_iwt3(v)
    assert np.all(bands.hll[0] == 10)  # h = 10 - 0 for every (y, z) low pair
    assert np.all(bands.lll[0] == 5)  # l = floor(10/2) through y and z passes
    assert np.all(bands.llh == 0)
    assert np.all(bands.lhl == 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), depth=st.sampled_from([8, 12, 16]))
def test_reconstruction_property(seed, depth):
    v = random_volume((8, 8, 8), bit_depth=depth, seed=seed)
    assert inverse_iwt3(forward_iwt3(v)) == v


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_lll_stays_in_range(seed):
    v = random_volume((8, 8, 8), bit_depth=12, seed=seed)
    lll = forward_iwt3(v).lll
    assert lll.min() >= 0 and lll.max() <= v.max_value


def test_odd_dimension_rejected():
    v = random_volume((7, 8, 8), seed=1)
    with pytest.raises(OddDimension):
        forward_iwt3(v)


def test_inconsistent_bands_rejected():
    bands = forward_iwt3(random_volume((8, 8, 8), seed=2))
    bands.hhh = bands.hhh[:2]
    with pytest.raises(InconsistentBands):
        inverse_iwt3(bands)


def test_local_block_constant():
    v = Volume((8, 8, 8), 8, np.full((8, 8, 8), 9, dtype=np.int64))
    block = local_inverse_block(forward_iwt3(v), (1, 1, 1))
    assert block.shape == (4, 4, 4)
    assert np.all(block == 9)


def test_local_block_out_of_bounds():
    bands = forward_iwt3(random_volume((8, 8, 8), seed=3))
    with pytest.raises(OutOfBounds):
        local_inverse_block(bands, (2, 0, 0))


def test_local_block_matches_full_inverse():
    rng = rng_for(11)
    checked = 0
    for trial in range(20):
        dims = tuple(int(d) * 4 for d in rng.integers(2, 5, size=3))
        v = random_volume(dims, bit_depth=12, seed=1000 + trial)
        bands = forward_iwt3(v)
        full = inverse_iwt3(bands).voxels
        for _ in range(10):
            bx, by, bz = (int(rng.integers(0, d // 4)) for d in dims)
            block = local_inverse_block(bands, (bx, by, bz))
            sliced = full[
                4 * bx : 4 * bx + 4, 4 * by : 4 * by + 4, 4 * bz : 4 * bz + 4
            ]
            assert np.array_equal(block, sliced)
            checked += 1
    assert checked == 200


def test_local_block_agrees_after_band_modification():
    # locality must hold for modified coefficients too (the overflow check)
    v = random_volume((8, 8, 8), bit_depth=8, seed=5)
    bands = forward_iwt3(v)
    bands.lll[0, 0, 0] += 3
    bands.lll[1, 1, 1] -= 2
    full = inverse_iwt3(bands).voxels
    block = local_inverse_block(bands, (0, 0, 0))
    assert np.array_equal(block, full[:4, :4, :4])
