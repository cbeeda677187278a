"""Mapping graphs, candidate selection and ID propagation."""
from .objects import *
from .mapping import *
from .graph import *
from .propagation import *
from .tracker import *
