"""Text descriptors for test functions, e.g. ``holder:beta=1,d=1`` or ``frolov:n=8,r=1``.

Values accept integers, decimals, fractions such as ``1/2``, and ``inf``.
Unknown keys are rejected.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from . import testfn
from .errors import ParameterError

__all__ = ["parse_function", "FUNCTION_KINDS"]


def _number(text: str) -> float:
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ParameterError(f"not a number: {text!r}") from None


def _integer(text: str) -> int:
    x = _number(text)
    if not float(x).is_integer():
        raise ParameterError(f"not an integer: {text!r}")
    return int(x)


def _fields(body: str, allowed: dict, required=()) -> dict:
    out = {}
    for part in filter(None, (s.strip() for s in body.split(","))):
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep:
            raise ParameterError(f"expected key=value, got {part!r}")
        if key not in allowed:
            raise ParameterError(f"unknown key {key!r}; allowed: {sorted(allowed)}")
        out[key] = allowed[key](value)
    missing = [k for k in required if k not in out]
    if missing:
        raise ParameterError(f"missing keys: {missing}")
    return out


def _signs(text: str) -> str:
    if text not in ("plus", "alt"):
        raise ParameterError("signs must be 'plus' or 'alt'")
    return text


def _holder(body):
    kw = _fields(body, {"beta": _number, "d": _integer}, ("beta",))
    return testfn.make_holder_bump(kw["beta"], kw.get("d", 1))


def _sobolev(body):
    kw = _fields(body, {"r": _integer, "p": _number, "d": _integer}, ("r", "p"))
    return testfn.make_sobolev_poly_bump(kw["r"], kw["p"], kw.get("d", 1))


def _frolov(body):
    kw = _fields(body, {"n": _integer, "r": _integer}, ("n",))
    return testfn.make_frolov_counterexample(kw["n"], kw.get("r", 1))


def _const(body):
    kw = _fields(body, {"c": _number, "d": _integer}, ("c",))
    return testfn.make_constant(kw["c"], kw.get("d", 1))


def _affine(body):
    kw = _fields(body, {"a": lambda s: [_number(x) for x in s.split(";")], "b": _number}, ("a",))
    return testfn.make_affine(kw["a"], kw.get("b", 0.0))


def _fooling(body):
    kw = _fields(
        body,
        {
            "class": str.strip,
            "beta": _number,
            "r": _integer,
            "p": _number,
            "d": _integer,
            "m": _integer,
            "M": _integer,
            "signs": _signs,
        },
        ("class", "m"),
    )
    d = kw.get("d", 1)
    if kw["class"] == "holder":
        cls = testfn.holder(kw["beta"], d)
        bump = testfn.make_holder_bump(kw["beta"], d)
    elif kw["class"] == "sobolev":
        cls = testfn.sobolev(kw["r"], kw["p"], d)
        bump = testfn.make_sobolev_poly_bump(kw["r"], kw["p"], d)
    else:
        raise ParameterError("class must be 'holder' or 'sobolev'")
    m = kw["m"]
    cells = list(itertools.product(range(m), repeat=d))[: kw.get("M", m**d)]
    if kw.get("signs", "plus") == "alt":
        signs = [(-1) ** i for i in range(len(cells))]
    else:
        signs = [1] * len(cells)
    spec = testfn.FoolingSpec.for_class(cls, m, cells, signs)
    return testfn.make_fooling_sum(bump, spec, cls)


FUNCTION_KINDS = {
    "holder": _holder,
    "sobolev": _sobolev,
    "frolov": _frolov,
    "const": _const,
    "affine": _affine,
    "fooling": _fooling,
}


def parse_function(descriptor: str) -> testfn.TestFunction:
    kind, _, body = descriptor.partition(":")
    kind = kind.strip()
    if kind not in FUNCTION_KINDS:
        raise ParameterError(f"unknown function kind {kind!r}; choose from {sorted(FUNCTION_KINDS)}")
    return FUNCTION_KINDS[kind](body)
