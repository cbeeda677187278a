"""Querying and editing motion programs as scene graphs."""
from .easing import *
from .ranges import *
from .queries import *
from .operators import *
from .effects import *
from .opsfile import *
