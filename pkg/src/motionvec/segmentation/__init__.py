"""Background model and per-frame foreground regions."""
from .background import *
from .regions import *
from .video import *
