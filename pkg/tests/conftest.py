import numpy as np
import pytest

from nlvc import transformer_core
from nlvc.frame_io import FramePlane, FrameYUV420


def make_plane(width, height, rng=None, value=None):
    if value is not None:
        samples = np.full((height, width), value, dtype=np.uint8)
    else:
        samples = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    return FramePlane(width, height, samples)


def make_frame(width, height, rng):
    return FrameYUV420(
        y=make_plane(width, height, rng),
        u=make_plane((width + 1) // 2, (height + 1) // 2, rng),
        v=make_plane((width + 1) // 2, (height + 1) // 2, rng),
    )


def frames_equal(a, b):
    if len(a) != len(b):
        return False
    for fa, fb in zip(a, b):
        for pa, pb in zip(fa.planes, fb.planes):
            if not np.array_equal(pa.samples, pb.samples):
                return False
    return True


@pytest.fixture(scope="session")
def tiny_config():
    return transformer_core.ModelConfig(layers=1, dim=8, heads=1,
                                        has_reference_embedding=True)


@pytest.fixture(scope="session")
def tiny_weights(tiny_config):
    return transformer_core.random_weights(tiny_config, seed=7)


@pytest.fixture(scope="session")
def tiny_weights_noref():
    config = transformer_core.ModelConfig(layers=1, dim=8, heads=1)
    return transformer_core.random_weights(config, seed=11)
