"""Basic infrastructure for parameterizable classes.

Parameterizable classes have (hyper)parameters that define an object's
configuration or identity, but not its internal data. Such parameters are
passed to ``__init__`` as keyword arguments with documented defaults.

The module provides an API for reading parameter values from an object,
rebuilding an object from a (possibly partial) mapping of overrides, and
converting parameters to portable JSON.
"""
import inspect
from collections.abc import Mapping
from typing import Any

from ..exceptions import ConfigError
from .json_processor import dumpjs, JsonSerializedObject

__all__ = ["ParameterizableMixin"]


def _by_key(d: dict[str, Any]) -> dict[str, Any]:
    return {k: d[k] for k in sorted(d)}


class ParameterizableMixin:
    """Base class for parameterizable classes.

    Subclasses implement get_params to return the keyword arguments that
    would rebuild an equal instance. Config classes, affine parameter sets
    and program records all derive from it, which is what lets the JSON
    processor serialize them.

    Note:
        The default implementation of get_params returns an empty mapping.
    """

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.get_params()})"

    def get_params(self) -> dict[str, Any]:
        """Return this instance's configuration parameters.

        Returns:
            A mapping of parameter names to values.
        """
        return dict()

    def get_jsparams(self) -> JsonSerializedObject:
        """Return this instance's parameters encoded as JSON.

        Returns:
            JSON string produced by dumpjs.
        """
        return dumpjs(_by_key(self.get_params()))

    @classmethod
    def get_default_params(cls) -> dict[str, Any]:
        """Get the default parameters of the class as a dictionary.

        Default values are taken from keyword parameters of __init__ and
        returned as a key-sorted dictionary.

        Returns:
            The class's default parameters sorted by key.
        """
        signature = inspect.signature(cls.__init__)
        # Skip the first parameter (self)
        params_to_consider = list(signature.parameters.values())[1:]
        params = {
            p.name: p.default
            for p in params_to_consider
            if p.default is not inspect.Parameter.empty
        }
        return _by_key(params)

    @classmethod
    def from_params(cls, params: Mapping[str, Any], *, section: str | None = None):
        """Build an instance from a mapping of keyword overrides.

        Args:
            params: Parameter names and values; missing names keep defaults.
            section: Name used in error messages (e.g. a config-file section).

        Returns:
            A new instance.

        Raises:
            ConfigError: If params names an unknown parameter.
        """
        known = set(inspect.signature(cls.__init__).parameters) - {"self"}
        where = section or cls.__name__
        for key in params:
            if key not in known:
                raise ConfigError(f"Unknown key '{key}' in {where}; "
                                  f"expected one of {sorted(known)}")
        return cls(**dict(params))

    def with_updates(self, **overrides: Any):
        """Return a copy of this instance with some parameters replaced.

        Args:
            **overrides: Parameter names and their new values.

        Returns:
            A new instance of the same class.

        Raises:
            ConfigError: If an override names an unknown parameter.
        """
        return type(self).from_params({**self.get_params(), **overrides})

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self.get_jsparams() == other.get_jsparams()

    __hash__ = None
