import numpy as np
import pytest

from volmark.volume import Volume


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def random_volume(dims, bit_depth=8, seed=0) -> Volume:
    rng = rng_for(seed)
    voxels = rng.integers(0, 1 << bit_depth, size=tuple(dims), dtype=np.int64)
    return Volume(dims=tuple(dims), bit_depth=bit_depth, voxels=voxels)


@pytest.fixture
def tiny_volume():
    return random_volume((8, 8, 8), bit_depth=8, seed=42)
