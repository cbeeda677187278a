"""Source elements and placement sets."""
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..exceptions import EmptyMaskError, UnknownElementError
from .affine import AffineParams, image_center

__all__ = ["SourceElement", "PlacementSet", "depth_order"]


@dataclass
class SourceElement:
    """An RGBA source image with a placement and a continuous depth.

    Attributes:
        element_id: Identifier, unique within a placement set.
        image: (h, w, 4) straight-alpha RGBA in [0, 1].
        params: Placement of the image anchor relative to the canvas anchor.
        z: Depth; higher values are in front.
        anchor: Source anchor; defaults to the image center.
    """
    element_id: int
    image: NDArray[np.float64]
    params: AffineParams = field(default_factory=AffineParams)
    z: float = 0.0
    anchor: NDArray[np.float64] | None = None

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float64)
        if self.image.ndim != 3 or self.image.shape[2] != 4:
            raise ValueError(f"Source {self.element_id} must be RGBA, "
                             f"got shape {self.image.shape}")
        if not np.any(self.image[..., 3] > 0):
            raise EmptyMaskError(f"Source {self.element_id} has no opaque pixels")
        if self.anchor is None:
            self.anchor = image_center(self.image.shape)
        else:
            self.anchor = np.asarray(self.anchor, dtype=np.float64)


@dataclass
class PlacementSet:
    """Elements placed on a canvas of the given (width, height).

    Raises:
        ValueError: If element ids repeat or the canvas is empty.
    """
    elements: list[SourceElement]
    canvas: tuple[int, int]

    def __post_init__(self):
        ids = [e.element_id for e in self.elements]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Element ids must be unique, got {ids}")
        width, height = self.canvas
        if width <= 0 or height <= 0:
            raise ValueError(f"Canvas must be positive, got {self.canvas}")
        self.canvas = (int(width), int(height))

    @property
    def width(self) -> int:
        return self.canvas[0]

    @property
    def height(self) -> int:
        return self.canvas[1]

    @property
    def canvas_anchor(self) -> NDArray[np.float64]:
        return np.array([(self.width - 1) / 2.0, (self.height - 1) / 2.0])

    def index_of(self, element_id: int) -> int:
        for i, e in enumerate(self.elements):
            if e.element_id == element_id:
                return i
        raise UnknownElementError(f"No element with id {element_id}")

    def get(self, element_id: int) -> SourceElement:
        return self.elements[self.index_of(element_id)]

    def matrix_of(self, element_id: int) -> NDArray[np.float64]:
        """Source-to-canvas matrix of one element."""
        e = self.get(element_id)
        return e.params.matrix(e.anchor, self.canvas_anchor)


def depth_order(elements: list[SourceElement]) -> list[int]:
    """Indices back to front: by rounded z, then by position in the list."""
    return sorted(range(len(elements)),
                  key=lambda i: (round(elements[i].z), i))
