"""Text form of a Hénon map: ``"p = z^2 - 6; a = 0.5"``.

Polynomials are parsed with sympy; ``i``, ``I`` and ``j`` all denote the
imaginary unit, ``^`` is exponentiation.
"""

from __future__ import annotations

import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .henon import HenonMap, Polynomial

_Z = sympy.Symbol("z")
_LOCALS = {"z": _Z, "i": sympy.I, "I": sympy.I, "j": sympy.I}
_TRANSFORMS = standard_transformations + (convert_xor, implicit_multiplication_application)


class MapSpecError(ValueError):
    pass


def _parse(text: str):
    try:
        return parse_expr(text, local_dict=_LOCALS, transformations=_TRANSFORMS)
    except Exception as exc:  # sympy raises a zoo of types on bad input
        raise MapSpecError(f"cannot parse {text!r}: {exc}") from None


def parse_complex(text: str) -> complex:
    expr = _parse(text.strip())
    if expr.free_symbols:
        raise MapSpecError(f"{text!r} is not a constant")
    return complex(sympy.N(expr))


def parse_polynomial(text: str) -> Polynomial:
    expr = _parse(text)
    extra = expr.free_symbols - {_Z}
    if extra:
        raise MapSpecError(f"unexpected symbols {sorted(map(str, extra))} in p")
    try:
        poly = sympy.Poly(sympy.expand(expr), _Z)
    except sympy.PolynomialError as exc:
        raise MapSpecError(f"p is not a polynomial in z: {exc}") from None
    coeffs = [complex(sympy.N(c)) for c in reversed(poly.all_coeffs())]
    if len(coeffs) < 3:
        raise MapSpecError("p must have degree at least 2")
    if coeffs[-1] != 1:
        raise MapSpecError(f"p must be monic, leading coefficient is {coeffs[-1]}")
    return Polynomial(tuple(coeffs))


def parse_map(text: str) -> HenonMap:
    fields = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise MapSpecError(f"expected key = value, got {part.strip()!r}")
        key = key.strip()
        if key not in ("p", "a"):
            raise MapSpecError(f"unknown map field {key!r}")
        fields[key] = value.strip()
    missing = {"p", "a"} - fields.keys()
    if missing:
        raise MapSpecError(f"missing map fields: {', '.join(sorted(missing))}")
    p = parse_polynomial(fields["p"])
    a = parse_complex(fields["a"])
    if a == 0:
        raise MapSpecError("a is a non-zero constant")
    return HenonMap(p, a)
