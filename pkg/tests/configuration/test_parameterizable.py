from typing import Any

import pytest

from motionvec.configuration.json_processor import loadjs
from motionvec.configuration.parameterizable_mixin import ParameterizableMixin
from motionvec.exceptions import ConfigError


class MyParam(ParameterizableMixin):
    def __init__(self, a: int = 1, b: int = 2, c: str = "x") -> None:
        self.a = a
        self.b = b
        self.c = c

    def get_params(self) -> dict[str, Any]:
        return {"c": self.c, "a": self.a, "b": self.b}


class ParentParam(ParameterizableMixin):
    def __init__(self, x: int = 1, y: int = 2) -> None:
        self.x = x
        self.y = y

    def get_params(self) -> dict[str, Any]:
        return {"x": self.x, "y": self.y}


class ChildParam(ParentParam):
    def __init__(self, x: int = 1, y: int = 2, z: int = 3) -> None:
        super().__init__(x=x, y=y)
        self.z = z

    def get_params(self) -> dict[str, Any]:
        params = super().get_params()
        params["z"] = self.z
        return params


def test_default_get_params_is_empty():
    """The base implementation reports no parameters."""
    assert ParameterizableMixin().get_params() == {}


def test_get_default_params_sorted():
    """Defaults come from __init__ keyword defaults, sorted by name."""
    defaults = MyParam.get_default_params()
    assert list(defaults) == ["a", "b", "c"]
    assert defaults == {"a": 1, "b": 2, "c": "x"}


def test_get_default_params_inheritance():
    """A subclass reports its own constructor defaults."""
    assert ChildParam.get_default_params() == {"x": 1, "y": 2, "z": 3}


def test_get_jsparams_round_trip():
    """get_jsparams serializes key-sorted params that loadjs reads back."""
    p = MyParam(a=5, c="hello")
    assert loadjs(p.get_jsparams()) == {"a": 5, "b": 2, "c": "hello"}


def test_from_params_partial():
    """Missing names keep their defaults."""
    p = MyParam.from_params({"b": 9})
    assert (p.a, p.b, p.c) == (1, 9, "x")


def test_from_params_unknown_key_names_section():
    """An unknown key raises ConfigError naming the section and the key."""
    with pytest.raises(ConfigError, match="Unknown key 'q' in segmentation"):
        MyParam.from_params({"q": 1}, section="segmentation")


def test_with_updates_returns_new_instance():
    """with_updates leaves the original untouched."""
    p = ChildParam(z=4)
    q = p.with_updates(x=10)
    assert (q.x, q.y, q.z) == (10, 2, 4)
    assert p.x == 1


def test_equality_by_params():
    """Instances with the same params compare equal; other types do not."""
    assert MyParam(a=3) == MyParam(a=3)
    assert MyParam(a=3) != MyParam(a=4)
    assert MyParam() != ParentParam()


def test_not_hashable():
    """Parameterizable objects are mutable containers of settings."""
    with pytest.raises(TypeError):
        hash(MyParam())


def test_repr_shows_params():
    """repr includes class name and params."""
    assert repr(ParentParam(x=7)) == "ParentParam({'x': 7, 'y': 2})"
