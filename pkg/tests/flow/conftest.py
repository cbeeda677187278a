import numpy as np
import pytest
from scipy import ndimage


@pytest.fixture
def texture():
    """A smooth random 64x64 RGB texture with unique local patterns."""
    rng = np.random.default_rng(11)
    noise = rng.random((64, 64, 3))
    smooth = ndimage.gaussian_filter(noise, sigma=(1.5, 1.5, 0))
    lo, hi = smooth.min(), smooth.max()
    return (smooth - lo) / (hi - lo)
