"""Motion programs, their files and their rendering."""
from .model import *
from .svg import *
from .io import *
from .render import *
from .refactor import *
