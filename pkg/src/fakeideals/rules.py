"""Rule strings for the command line: ``"poly n^3"``, ``"exp 2"``, ``"pow 3/2"``.

Grammar (whitespace separated, one constructor per string)::

    poly <c0 + c1 n + c2 n^2 ...>   e.g. "poly n^3", "poly 2n^2+1"
    exp <base>                      k -> base^k
    pow <p/q>                       k -> floor(k^(p/q))
    log <2|e>                       k -> floor(log k)
    fact <a> [<b>]                  k -> (a k + b)!
    const <c>
    table <v0,v1,...> [| <rule>]    explicit values, optional tail rule

Sets for antichain pairs: ``evens``, ``odds`` or ``mod <m> <r1,r2,...>``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import PreconditionError
from .param import ParamFunction, SetRule

_TERM = re.compile(r"^(\d*)(n(?:\^(\d+))?)?$")


def _poly(text: str) -> ParamFunction:
    coeffs: dict[int, int] = {}
    for term in text.replace(" ", "").split("+"):
        m = _TERM.match(term)
        if not term or not m or (not m.group(1) and not m.group(2)):
            raise PreconditionError(f"bad polynomial term {term!r}")
        c = int(m.group(1)) if m.group(1) else 1
        deg = 0 if not m.group(2) else int(m.group(3) or 1)
        coeffs[deg] = coeffs.get(deg, 0) + c
    top = max(coeffs)
    return ParamFunction.poly(*(coeffs.get(i, 0) for i in range(top + 1)))


def parse_rule(text: str) -> ParamFunction:
    text = text.strip()
    head, _, rest = text.partition(" ")
    rest = rest.strip()
    try:
        if head == "poly":
            return _poly(rest)
        if head == "exp":
            return ParamFunction.exp(int(rest or 2))
        if head == "pow":
            return ParamFunction.floorpow(Fraction(rest))
        if head == "log":
            return ParamFunction.floorlog(rest or "2")
        if head == "fact":
            parts = rest.split()
            return ParamFunction.factorial(int(parts[0]), int(parts[1]) if len(parts) > 1 else 0)
        if head == "const":
            return ParamFunction.const(int(rest))
        if head == "table":
            vals, _, tail = rest.partition("|")
            values = [int(v) for v in vals.replace(" ", "").split(",") if v]
            return ParamFunction.table(values, parse_rule(tail) if tail.strip() else None)
    except (ValueError, IndexError, ZeroDivisionError) as e:
        raise PreconditionError(f"cannot parse rule {text!r}: {e}") from None
    raise PreconditionError(f"unknown rule {text!r}")


def parse_set(text: str) -> SetRule:
    text = text.strip()
    if text == "evens":
        return SetRule.evens()
    if text == "odds":
        return SetRule.odds()
    parts = text.split()
    if len(parts) == 3 and parts[0] == "mod":
        try:
            return SetRule(int(parts[1]), tuple(int(r) for r in parts[2].split(",")))
        except ValueError:
            pass
    raise PreconditionError(f"cannot parse set {text!r}")
