"""Optical flow, mask advection and affine motion initialization."""
from .field import *
from .block_matching import *
from .coarse import *
from .estimation import *
