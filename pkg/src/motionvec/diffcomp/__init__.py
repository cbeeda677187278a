"""Affine placements, hard rendering and differentiable compositing."""
from .affine import *
from .placement import *
from .render import *
from .soft import *
