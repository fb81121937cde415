"""Henon keystream: determinism, basin behavior, binarization, balance."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volmark.bits import BitVector, read_bits, write_bits
from volmark.errors import CorruptFile, Diverged, EmptyKey, InsufficientValues
from volmark.keystream import (
    HenonState,
    binarize_chaotic,
    derive_initial_state,
    henon_sequence,
    keystream,
)


def test_derive_is_deterministic():
    a = derive_initial_state(b"patient-42")
    b = derive_initial_state(b"patient-42")
    assert (a.x, a.y) == (b.x, b.y)


def test_derive_rejects_empty_key():
    with pytest.raises(EmptyKey):
        derive_initial_state(b"")


def test_one_byte_change_moves_state():
    a = derive_initial_state(b"keyA")
    b = derive_initial_state(b"keyB")
    assert (a.x, a.y) != (b.x, b.y)


@settings(max_examples=50, deadline=None)
@given(key=st.binary(min_size=1, max_size=64))
def test_derived_state_in_basin(key):
    s = derive_initial_state(key)
    assert 0.05 <= s.x < 0.1125
    assert 0.05 <= s.y < 0.1125


def test_henon_hand_example():
    xs = henon_sequence(HenonState(x=0.1, y=0.1), 2, burn_in=0)
    # x1 = 1 - 1.4*0.01 + 0.1
    assert xs[0] == pytest.approx(1.086, abs=1e-12)
    # y1 = 0.3 * 0.1 = 0.03 feeds the next step
    assert xs[1] == pytest.approx(1.0 - 1.4 * 1.086**2 + 0.03, abs=1e-12)


def test_degenerate_parameters_fix_point():
    xs = henon_sequence(HenonState(x=0.3, y=0.0, a=0.0, b=0.0), 5, burn_in=0)
    assert all(x == 1.0 for x in xs)


def test_divergence_detected():
    with pytest.raises(Diverged):
        henon_sequence(HenonState(x=1.9, y=0.4), 10, burn_in=0)


def test_long_run_stays_in_basin():
    s = derive_initial_state(b"basin-check")
    xs = henon_sequence(s, 200_000, burn_in=0)  # no divergence raised
    assert max(abs(x) for x in xs) < 1.5


def test_binarize_boundaries():
    # u = 0 maps to index 0
    assert list(binarize_chaotic([-1.5], 4, 4).bits) == [0, 0, 0, 0]
    # u = 0.5 maps to index 8 = 1000b
    assert list(binarize_chaotic([0.0], 4, 4).bits) == [1, 0, 0, 0]
    # u just below 1 maps to index 15
    assert list(binarize_chaotic([1.6], 4, 4).bits) == [1, 1, 1, 1]


def test_binarize_needs_enough_values():
    with pytest.raises(InsufficientValues):
        binarize_chaotic([0.1], 4, 8)


def test_binarize_truncates():
    vec = binarize_chaotic([0.0, 0.0], 4, 6)
    assert len(vec) == 6


def test_keystream_deterministic():
    assert keystream(b"key", 4096) == keystream(b"key", 4096)


def test_keystream_empty():
    assert len(keystream(b"key", 0)) == 0


def test_keystream_pairwise_distance():
    # Hamming distance between independent keystreams concentrates at N/2:
    # every pair within 4 binomial standard deviations.
    n = 1024
    sigma = math.sqrt(n) / 2
    for i in range(100):
        a = keystream(f"left-{i}".encode(), n)
        b = keystream(f"right-{i}".encode(), n)
        assert abs(a.hamming(b) - n / 2) <= 4 * sigma


def test_keystream_key_sensitivity():
    n = 4096
    a = keystream(b"sensitive-key-0", n)
    b = keystream(b"sensitive-key-1", n)
    assert 0.45 <= a.hamming(b) / n <= 0.55


def test_keystream_balance():
    n = 100_000
    ok = 0
    keys = 20
    for i in range(keys):
        ones = keystream(f"balance-{i}".encode(), n).count_ones()
        if 0.45 <= ones / n <= 0.55:
            ok += 1
    assert ok >= 0.95 * keys


def test_vmbits_round_trip(tmp_path):
    vec = keystream(b"file-key", 777)
    write_bits(vec, tmp_path / "k.vmbits")
    assert read_bits(tmp_path / "k.vmbits") == vec


def test_vmbits_crc_detects_corruption(tmp_path):
    write_bits(BitVector.random(64, seed=1), tmp_path / "k.vmbits")
    data = bytearray((tmp_path / "k.vmbits").read_bytes())
    data[10] ^= 0xFF  # flip one payload byte
    (tmp_path / "k.vmbits").write_bytes(bytes(data))
    with pytest.raises(CorruptFile):
        read_bits(tmp_path / "k.vmbits")


def test_vmbits_bad_magic(tmp_path):
    (tmp_path / "k.vmbits").write_bytes(b"XXXX" + bytes(20))
    with pytest.raises(CorruptFile):
        read_bits(tmp_path / "k.vmbits")
