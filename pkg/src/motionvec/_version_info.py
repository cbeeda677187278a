"""Version information for the motionvec package."""

from importlib import metadata as _md

try:
    __version__ = _md.version("motionvec")
except _md.PackageNotFoundError:
    __version__ = "unknown"
