"""Cubic difference expansion: cube arithmetic, embedding, reversibility."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volmark.bits import BitVector
from volmark.cde import (
    LocationMap,
    embed,
    embed_cube,
    extract,
    extract_cube,
    read_location_map,
    write_location_map,
)
from volmark.errors import (
    CorruptFile,
    DimsMismatch,
    DimsNotAligned,
    InsufficientCapacity,
    MapVersionUnsupported,
)
from volmark.volume import Volume

from conftest import random_volume, rng_for

coeff = st.integers(-(2**20), 2**20)


def test_embed_cube_constant_bit0():
    assert embed_cube(9, 9, 9, 9, 0) == (9, 9, 9, 9)


def test_embed_cube_constant_bit1():
    assert embed_cube(9, 9, 9, 9, 1) == (10, 9, 9, 9)


def test_embed_cube_worked_example():
    assert embed_cube(10, 8, 7, 9, 1) == (12, 7, 5, 9)


def test_extract_cube_worked_examples():
    assert extract_cube(12, 7, 5, 9) == (1, (10, 8, 7, 9))
    assert extract_cube(7, 5, 5, 5) == (0, (6, 5, 5, 5))


@settings(max_examples=300, deadline=None)
@given(a=coeff, b=coeff, c=coeff, d=coeff, bit=st.integers(0, 1))
def test_cube_round_trip_property(a, b, c, d, bit):
    got_bit, got = extract_cube(*embed_cube(a, b, c, d, bit))
    assert got_bit == bit
    assert got == (a, b, c, d)


@settings(max_examples=300, deadline=None)
@given(a=coeff, b=coeff, c=coeff, d=coeff, bit=st.integers(0, 1))
def test_majority_vote_survives_single_perturbation(a, b, c, d, bit):
    a1, b1, c1, d1 = embed_cube(a, b, c, d, bit)
    for which, delta in ((1, 1), (1, -1), (2, 1), (2, -1), (3, 1), (3, -1)):
        cube = [a1, b1, c1, d1]
        cube[which] += delta
        assert extract_cube(*cube)[0] == bit


def test_capacity_arithmetic():
    # 64x64x32 volume: LLL is 32x32x16, cube grid 16x16x8 = 2048 >= 1024 bits
    v = random_volume((64, 64, 32), seed=8)
    result = embed(v, BitVector.random(1024, seed=1))
    assert result.location_map.marked.shape == (16, 16, 8)
    assert result.location_map.bits_embedded == 1024


def test_empty_share_is_identity():
    v = random_volume((16, 16, 16), seed=9)
    result = embed(v, BitVector.zeros(0))
    assert result.volume == v
    assert result.location_map.bits_embedded == 0
    assert not result.location_map.marked.any()
    bits, restored = extract(result.volume, result.location_map)
    assert len(bits) == 0
    assert restored == v


def test_constant_midrange_round_trip():
    v = Volume((32, 32, 32), 8, np.full((32, 32, 32), 128, dtype=np.int64))
    share = BitVector.random(512, seed=2)
    result = embed(v, share)
    bits, restored = extract(result.volume, result.location_map)
    assert bits == share
    assert restored == v


def test_dims_alignment_required():
    v = random_volume((10, 16, 16), seed=10)
    with pytest.raises(DimsNotAligned):
        embed(v, BitVector.random(4, seed=0))


def test_insufficient_capacity():
    v = random_volume((8, 8, 8), seed=11)  # 8 cubes
    with pytest.raises(InsufficientCapacity):
        embed(v, BitVector.random(9, seed=0))


def test_watermarked_range_safe_on_adversarial_volume():
    # blocks pinned to both rails force overflow marking; nothing may clip
    rng = rng_for(12)
    vox = rng.integers(0, 256, size=(32, 32, 32), dtype=np.int64)
    vox[:8, :8, :8] = 255
    vox[8:16, :8, :8] = 0
    vox[:8, 8:16, :8] = 254
    vox[:8, :8, 8:16] = 1
    v = Volume((32, 32, 32), 8, vox)
    share = BitVector.random(400, seed=3)
    result = embed(v, share)
    assert result.volume.voxels.min() >= 0
    assert result.volume.voxels.max() <= 255
    bits, restored = extract(result.volume, result.location_map)
    assert bits == share
    assert restored == v


def test_skipped_cubes_keep_bit_alignment():
    # random volumes mark plenty of cubes; the share must still come back
    for seed in range(5):
        v = random_volume((24, 24, 24), bit_depth=8, seed=100 + seed)
        share = BitVector.random(64, seed=seed)
        result = embed(v, share)
        bits, restored = extract(result.volume, result.location_map)
        assert bits == share
        assert restored == v


def test_untouched_trailing_region_identical():
    v = random_volume((32, 32, 32), bit_depth=16, seed=13)
    share = BitVector.random(16, seed=4)
    result = embed(v, share)
    marked = result.location_map.marked.ravel()
    # index one past the cube that consumed the 16th bit
    consumed = 0
    stop = 0
    for i, m in enumerate(marked):
        if consumed == 16:
            stop = i
            break
        if not m:
            consumed += 1
    else:
        stop = marked.size
    diff_blocks = (
        (result.volume.voxels != v.voxels)
        .reshape(8, 4, 8, 4, 8, 4)
        .any(axis=(1, 3, 5))
        .ravel()
    )
    assert not diff_blocks[stop:].any()


def test_extract_with_all_marked_map():
    v = random_volume((16, 16, 16), seed=14)
    lm = LocationMap(
        grid_dims=(4, 4, 4),
        marked=np.ones((4, 4, 4), dtype=bool),
        bits_embedded=0,
        source_dims=(16, 16, 16),
        bit_depth=8,
    )
    bits, restored = extract(v, lm)
    assert len(bits) == 0
    assert restored == v


def test_extract_dims_mismatch():
    v = random_volume((16, 16, 16), seed=15)
    result = embed(v, BitVector.random(8, seed=5))
    other = random_volume((32, 32, 32), seed=16)
    with pytest.raises(DimsMismatch):
        extract(other, result.location_map)


def test_extract_version_check():
    v = random_volume((16, 16, 16), seed=17)
    result = embed(v, BitVector.random(8, seed=6))
    result.location_map.version = 9
    with pytest.raises(MapVersionUnsupported):
        extract(result.volume, result.location_map)


def test_location_map_file_round_trip(tmp_path):
    v = random_volume((32, 32, 32), seed=18)
    v.original_dims = (30, 31, 29)
    result = embed(v, BitVector.random(100, seed=7))
    path = tmp_path / "m.vmloc"
    write_location_map(result.location_map, path)
    lm = read_location_map(path)
    assert lm.grid_dims == result.location_map.grid_dims
    assert lm.bits_embedded == 100
    assert lm.source_dims == (32, 32, 32)
    assert lm.original_dims == (30, 31, 29)
    assert lm.bit_depth == 8
    assert np.array_equal(lm.marked, result.location_map.marked)


def test_location_map_crc(tmp_path):
    v = random_volume((16, 16, 16), seed=19)
    result = embed(v, BitVector.random(8, seed=8))
    path = tmp_path / "m.vmloc"
    write_location_map(result.location_map, path)
    data = bytearray(path.read_bytes())
    data[-5] ^= 0x01  # corrupt the bitmap
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptFile):
        read_location_map(path)


def test_location_map_version_file(tmp_path):
    v = random_volume((16, 16, 16), seed=20)
    result = embed(v, BitVector.random(8, seed=9))
    path = tmp_path / "m.vmloc"
    write_location_map(result.location_map, path)
    data = bytearray(path.read_bytes())
    data[4] = 9
    path.write_bytes(bytes(data))
    with pytest.raises(MapVersionUnsupported):
        read_location_map(path)


def test_padded_volume_round_trip_with_crop():
    from volmark.volume import pad_to_multiple

    v = random_volume((30, 31, 29), bit_depth=8, seed=21)
    padded = pad_to_multiple(v, 4)
    share = BitVector.random(200, seed=10)
    result = embed(padded, share)
    bits, restored = extract(result.volume, result.location_map)
    assert bits == share
    assert restored == v  # cropped back to the original dims


def test_distortion_is_local_to_consumed_footprints():
    v = random_volume((32, 32, 32), bit_depth=12, seed=22)
    share = BitVector.random(300, seed=11)
    result = embed(v, share)
    delta = result.volume.voxels != v.voxels
    blocks = delta.reshape(8, 4, 8, 4, 8, 4).any(axis=(1, 3, 5))
    flat_changed = blocks.ravel()  # raster order z fastest matches cube order
    marked = result.location_map.marked.ravel()
    # marked cubes must be untouched
    assert not flat_changed[marked].any()
