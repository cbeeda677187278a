import numpy as np

RED = (0.9, 0.1, 0.1)
BLUE = (0.1, 0.1, 0.9)


def solid(color, size=4, height=None):
    """An opaque RGBA block of one color."""
    height = size if height is None else height
    img = np.ones((height, size, 4))
    img[..., :3] = color
    return img
