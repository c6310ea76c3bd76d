import numpy as np
import pytest
from scipy import ndimage


def make_truth(size: int, seed: int) -> np.ndarray:
    """Synthetic ground-truth image with smooth shading, stripes and speckles."""
    rng = np.random.default_rng(seed)
    img = ndimage.gaussian_filter(rng.random((size, size)), 3)
    img += 0.3 * (np.arange(size)[None, :] % 16 < 8)
    img += 0.2 * (rng.random((size, size)) < 0.02)
    return (img - img.min()) / (img.max() - img.min())


@pytest.fixture
def truth32():
    return make_truth(32, 9)
