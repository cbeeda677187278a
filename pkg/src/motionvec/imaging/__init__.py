from .raster import *
from .color import *
from .edges import *
from .shape import *
from .pyramid import *
