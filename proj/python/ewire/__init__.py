"""Python bindings for the EWire circuit language."""

import json

from . import _ewire
from ._ewire import (
    EvalError,
    Error,
    ParseError,
    ResourceError,
    SuperOp,
    TypeError,
    check,
    denote,
    equiv,
    max_dim,
    normalize,
    set_max_dim,
)

__all__ = [
    "Error",
    "ParseError",
    "TypeError",
    "EvalError",
    "ResourceError",
    "SuperOp",
    "check",
    "run",
    "denote",
    "normalize",
    "equiv",
    "max_dim",
    "set_max_dim",
]


def run(source, entry=None, mode="cpu", fuel=10000, shots=0, seed=0):
    """Exact output distribution of `entry` as a dict.

    Keys are "outcomes" (value -> weight), "diverge_mass" and, with shots,
    "counts".
    """
    return json.loads(_ewire.run(source, entry, mode, fuel, shots, seed))
