"""Synthetic motion-graphics scenes with known programs, for validation."""
from .script import *
from .scene import *
from .compare import *
from .profiles import *
