from .json_processor import *
from .parameterizable_mixin import *
from .single_writer_mixin import *
from .module_configs import *
from .pipeline_config import *
