"""Bundled example models and schemas."""

from __future__ import annotations

from importlib import resources

from ..dsl import ModelSource, parse_model, parse_schema
from ..model import MZIA
from ..zschema import ZSchema

__all__ = ["fixture_path", "fixture_text", "load_fixture", "boiler_p", "boiler_q", "parity_schemas"]

_NAMES = {"P": "boiler_p.mzia", "Q": "boiler_q.mzia"}


def fixture_path(name: str):
    return resources.files(__name__).joinpath(_NAMES.get(name, name))


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def load_fixture(name: str, validate: bool = True) -> MZIA:
    fname = _NAMES.get(name, name)
    return parse_model(ModelSource(fixture_text(fname), fname), validate=validate)


def boiler_p() -> MZIA:
    return load_fixture("P")


def boiler_q() -> MZIA:
    return load_fixture("Q")


def parity_schemas(bound: int = 100, z_bound: int = 3) -> tuple[ZSchema, ZSchema]:
    """The pair A, B where B doubles the even part of x? and adds an unrelated output.

    ``A = [x? ; y! | even(x?); y! = pi*x?]`` and
    ``B = [x? ; u? ; y! ; v! ; z | y! = 2*pi*(x? div 2); v! = z*u?]``.
    ``bound`` caps x?, which is a natural number in the original; ``z_bound``
    caps the internal z and does not affect any verdict.
    """
    a = parse_schema(f"[x? : 0..{bound}; y! : real | even(x?); y! = pi * x?]")
    b = parse_schema(
        f"[x? : 0..{bound}; u? : real; y! : real; v! : real; z : 0..{z_bound}"
        " | y! = 2 * pi * (x? div 2); v! = z * u?]"
    )
    return a, b
