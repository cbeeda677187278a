from ._cli_entry_points import *
