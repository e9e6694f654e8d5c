import numpy as np
import pytest

from labelforge.mask import MaskRaster


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_mask(rng, width, height, density=0.5) -> MaskRaster:
    return MaskRaster(rng.random((height, width)) < density)
