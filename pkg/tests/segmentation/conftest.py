import numpy as np
import pytest

RED = (0.9, 0.1, 0.1)
WHITE = (1.0, 1.0, 1.0)


@pytest.fixture
def red_square_frame():
    """Create a 24x24 white frame with a red 10x10 square.

    Returns:
        Tuple of (frame, square_mask).
    """
    frame = np.ones((24, 24, 3))
    mask = np.zeros((24, 24), dtype=bool)
    mask[6:16, 8:18] = True
    frame[mask] = RED
    return frame, mask


@pytest.fixture
def two_squares_frame():
    """Create a 30x30 white frame with a 5x5 and a 7x7 disjoint red square.

    Returns:
        Tuple of (frame, small_mask, big_mask).
    """
    frame = np.ones((30, 30, 3))
    small = np.zeros((30, 30), dtype=bool)
    small[2:7, 2:7] = True
    big = np.zeros((30, 30), dtype=bool)
    big[15:22, 18:25] = True
    frame[small | big] = RED
    return frame, small, big
