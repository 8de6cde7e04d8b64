"""Finitely presented parameter functions and exact weight ledgers.

A :class:`ParamFunction` is a closed-form rule ``k -> h(k)`` built from a small
set of constructors.  Every value is an exact Python integer, and every sum is
an exact :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .errors import DivisionByZeroWeight, PreconditionError, SearchCeilingExceeded

DEFAULT_CEILING = 1_000_000


def iroot(x: int, q: int) -> int:
    """Largest r with r**q <= x."""
    if x < 0 or q < 1:
        raise ValueError("iroot needs x >= 0 and q >= 1")
    if x < 2 or q == 1:
        return x
    if q == 2:
        return math.isqrt(x)
    r = 1 << ((x.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * r + x // r ** (q - 1)) // q
        if y >= r:
            break
        r = y
    while r ** q > x:
        r -= 1
    while (r + 1) ** q <= x:
        r += 1
    return r


def floor_ln(k: int) -> int:
    # ln k is irrational for k >= 2, so a wide-enough decimal never straddles an integer
    if k < 2:
        return 0
    with localcontext() as ctx:
        ctx.prec = len(str(k)) + 40
        return int(Decimal(k).ln())


def triangular(n: int) -> int:
    return n * (n + 1) // 2


def triangular_index(k: int) -> int:
    """Index n with k in [n(n+1)/2, (n+1)(n+2)/2)."""
    n = (math.isqrt(8 * k + 1) - 1) // 2
    return n


@dataclass(frozen=True)
class SetRule:
    """Infinite subset of omega given as a union of residue classes."""

    modulus: int
    residues: tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise PreconditionError("modulus must be positive")
        res = tuple(sorted({r % self.modulus for r in self.residues}))
        if not res:
            raise PreconditionError("a residue set must be nonempty")
        object.__setattr__(self, "residues", res)

    @classmethod
    def evens(cls):
        return cls(2, (0,))

    @classmethod
    def odds(cls):
        return cls(2, (1,))

    def __contains__(self, n: int) -> bool:
        return n % self.modulus in self.residues

    def elements(self, start: int = 0) -> Iterator[int]:
        base = start - start % self.modulus
        while True:
            for r in self.residues:
                if base + r >= start:
                    yield base + r
            base += self.modulus

    def intersection_is_finite(self, other: "SetRule") -> bool:
        m = math.lcm(self.modulus, other.modulus)
        return not any(n in self and n in other for n in range(m))

    def difference_is_infinite(self, other: "SetRule") -> bool:
        m = math.lcm(self.modulus, other.modulus)
        return any(n in self and n not in other for n in range(m))

    def to_dict(self):
        return {"modulus": self.modulus, "residues": list(self.residues)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["modulus"], tuple(d["residues"]))

    def __str__(self):
        return f"{{n : n mod {self.modulus} in {set(self.residues)}}}"


_MONOTONE_KINDS = {"poly", "exp", "floorpow", "floorlog", "const", "prefix_max"}


@dataclass(frozen=True)
class ParamFunction:
    """A rule ``k -> h(k)`` chosen from a closed constructor set.

    Use the classmethod constructors rather than building ``kind``/``args``
    by hand.  Instances are callable and hashable.
    """

    kind: str
    args: tuple
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def poly(cls, *coeffs: int) -> "ParamFunction":
        """Polynomial ``c0 + c1 k + c2 k^2 + ...`` with nonnegative coefficients."""
        if any(c < 0 for c in coeffs):
            raise PreconditionError("polynomial coefficients must be nonnegative")
        coeffs = tuple(coeffs) or (0,)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        return cls("poly", coeffs)

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1) -> "ParamFunction":
        return cls.poly(*([0] * degree + [coeff]))

    @classmethod
    def exp(cls, base: int = 2) -> "ParamFunction":
        if base < 2:
            raise PreconditionError("exponential base must be >= 2")
        return cls("exp", (base,))

    @classmethod
    def floorpow(cls, alpha) -> "ParamFunction":
        alpha = Fraction(alpha)
        if alpha <= 0:
            raise PreconditionError("floor-power exponent must be positive")
        return cls("floorpow", (alpha.numerator, alpha.denominator))

    @classmethod
    def floorlog(cls, base="2") -> "ParamFunction":
        base = str(base)
        if base not in ("2", "e"):
            raise PreconditionError("floor-log base must be 2 or e")
        return cls("floorlog", (base,))

    @classmethod
    def factorial(cls, a: int = 1, b: int = 0) -> "ParamFunction":
        """``k -> (a k + b)!``, and 0 where ``a k + b < 0``."""
        if a < 0:
            raise PreconditionError("factorial slope must be nonnegative")
        return cls("factorial", (a, b))

    @classmethod
    def const(cls, c: int) -> "ParamFunction":
        return cls("const", (c,))

    @classmethod
    def indicator(cls, where: SetRule, heavy: "ParamFunction",
                  base: "ParamFunction | int" = 1) -> "ParamFunction":
        if isinstance(base, int):
            base = cls.const(base)
        return cls("indicator", (where, base, heavy))

    @classmethod
    def table(cls, values: Sequence[int], tail: "ParamFunction | None" = None) -> "ParamFunction":
        """Explicit values on ``[0, len(values))``; ``tail(k)`` (or 0) beyond."""
        values = tuple(int(v) for v in values)
        if any(v < 0 for v in values):
            raise PreconditionError("table values must be nonnegative")
        return cls("table", (values, tail))

    @classmethod
    def mul(cls, f: "ParamFunction", g: "ParamFunction") -> "ParamFunction":
        return cls("mul", (f, g))

    @classmethod
    def shift(cls, f: "ParamFunction", d: int) -> "ParamFunction":
        """``k -> f(k - d)`` for ``k >= d`` and 0 below."""
        return cls("shift", (f, d))

    @classmethod
    def minus(cls, f: "ParamFunction", c: int = 1) -> "ParamFunction":
        """``k -> max(f(k) - c, 0)``."""
        return cls("minus", (f, c))

    @classmethod
    def tri_max(cls, f: "ParamFunction") -> "ParamFunction":
        """``n -> max{f(k) : k in I_n}`` over the triangular partition."""
        return cls("tri_max", (f,))

    @classmethod
    def tri_refit(cls, f: "ParamFunction") -> "ParamFunction":
        """``k -> f(n)`` for ``k in I_n`` of the triangular partition."""
        return cls("tri_refit", (f,))

    @classmethod
    def prefix_max(cls, f: "ParamFunction") -> "ParamFunction":
        return cls("prefix_max", (f,))

    # -- evaluation ---------------------------------------------------------

    def __call__(self, k: int) -> int:
        if k < 0:
            raise ValueError("parameter functions are defined on naturals")
        cache = self._cache
        if k in cache:
            return cache[k]
        v = self._eval(k)
        if len(cache) < 200_000:
            cache[k] = v
        return v

    def _eval(self, k: int) -> int:
        kind, a = self.kind, self.args
        if kind == "poly":
            v = 0
            for c in reversed(a):
                v = v * k + c
            return v
        if kind == "exp":
            return a[0] ** k
        if kind == "floorpow":
            p, q = a
            return iroot(k ** p, q)
        if kind == "floorlog":
            if k < 2:
                return 0
            return k.bit_length() - 1 if a[0] == "2" else floor_ln(k)
        if kind == "factorial":
            m = a[0] * k + a[1]
            return math.factorial(m) if m >= 0 else 0
        if kind == "const":
            return a[0]
        if kind == "indicator":
            where, base, heavy = a
            return heavy(k) if k in where else base(k)
        if kind == "table":
            values, tail = a
            if k < len(values):
                return values[k]
            return tail(k) if tail is not None else 0
        if kind == "mul":
            return a[0](k) * a[1](k)
        if kind == "shift":
            f, d = a
            return f(k - d) if k >= d else 0
        if kind == "minus":
            return max(a[0](k) - a[1], 0)
        if kind == "tri_max":
            f = a[0]
            lo, hi = triangular(k), triangular(k + 1)
            if f.is_monotone:
                return f(hi - 1)
            return max(f(j) for j in range(lo, hi))
        if kind == "tri_refit":
            return a[0](triangular_index(k))
        if kind == "prefix_max":
            f = a[0]
            if f.is_monotone:
                return f(k)
            return max(f(j) for j in range(k + 1))
        raise ValueError(f"unknown rule kind {kind!r}")

    def values(self, n: int) -> list[int]:
        return [self(k) for k in range(n)]

    # -- structural facts ---------------------------------------------------

    @property
    def is_monotone(self) -> bool:
        """True when the rule is nondecreasing by construction."""
        kind, a = self.kind, self.args
        if kind in _MONOTONE_KINDS:
            return True
        if kind == "factorial":
            return True
        if kind in ("mul",):
            return a[0].is_monotone and a[1].is_monotone
        if kind in ("shift", "minus", "tri_max", "tri_refit"):
            return a[0].is_monotone
        return False

    @property
    def has_limsup(self) -> bool:
        """True when the constructor guarantees ``limsup h = infinity``."""
        kind, a = self.kind, self.args
        if kind == "poly":
            return any(c > 0 for c in a[1:])
        if kind in ("exp", "floorpow", "floorlog"):
            return True
        if kind == "factorial":
            return a[0] >= 1
        if kind == "const":
            return False
        if kind == "indicator":
            return a[2].has_limsup
        if kind == "table":
            return a[1] is not None and a[1].has_limsup
        if kind == "mul":
            f, g = a
            if f.has_limsup and g.has_limsup and f.is_monotone and g.is_monotone:
                return True
            return (f.has_limsup and g.is_monotone and g(1) > 0) or \
                   (g.has_limsup and f.is_monotone and f(1) > 0)
        if kind in ("shift", "minus", "tri_max", "tri_refit", "prefix_max"):
            return a[0].has_limsup
        return False

    def require_limsup(self) -> None:
        if not self.has_limsup:
            raise PreconditionError(f"{self} carries no limsup certificate")

    def next_at_least(self, v: int, start: int = 0, ceiling: int | None = None) -> int:
        """Least ``k >= start`` with ``h(k) >= v``.

        Monotone rules use a galloping search and ignore ``ceiling``; other
        rules scan linearly and raise :class:`SearchCeilingExceeded`.
        """
        self.require_limsup()
        if self.is_monotone:
            if self(start) >= v:
                return start
            lo, step = start, 1
            hi = start + step
            while self(hi) < v:
                lo = hi
                step *= 2
                hi = start + step
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if self(mid) >= v:
                    hi = mid
                else:
                    lo = mid
            return hi
        ceiling = DEFAULT_CEILING if ceiling is None else ceiling
        if self.kind == "indicator":
            where, base, heavy = self.args
            for k in where.elements(start):
                if k > ceiling:
                    break
                if self(k) >= v:
                    return k
            raise SearchCeilingExceeded(f"no k <= {ceiling} with {self}(k) >= {v}")
        for k in range(start, ceiling + 1):
            if self(k) >= v:
                return k
        raise SearchCeilingExceeded(f"no k <= {ceiling} with {self}(k) >= {v}")

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        def enc(x):
            if isinstance(x, ParamFunction):
                return {"rule": x.to_dict()}
            if isinstance(x, SetRule):
                return {"set": x.to_dict()}
            if isinstance(x, tuple):
                return {"tuple": [enc(y) for y in x]}
            return x
        return {"kind": self.kind, "args": [enc(x) for x in self.args]}

    @classmethod
    def from_dict(cls, d):
        def dec(x):
            if isinstance(x, dict):
                if "rule" in x:
                    return cls.from_dict(x["rule"])
                if "set" in x:
                    return SetRule.from_dict(x["set"])
                if "tuple" in x:
                    return tuple(dec(y) for y in x["tuple"])
            return x
        return cls(d["kind"], tuple(dec(x) for x in d["args"]))

    def __str__(self):
        kind, a = self.kind, self.args
        if kind == "poly":
            terms = []
            for i, c in enumerate(a):
                if c == 0:
                    continue
                if i == 0:
                    terms.append(str(c))
                else:
                    mono = "n" if i == 1 else f"n^{i}"
                    terms.append(mono if c == 1 else f"{c}{mono}")
            return "+".join(reversed(terms)) or "0"
        if kind == "exp":
            return f"{a[0]}^n"
        if kind == "floorpow":
            return f"floor(n^({a[0]}/{a[1]}))"
        if kind == "floorlog":
            return "floor(log2 n)" if a[0] == "2" else "floor(ln n)"
        if kind == "factorial":
            return f"({a[0]}n{a[1]:+d})!" if a[1] else f"({a[0]}n)!"
        if kind == "const":
            return str(a[0])
        if kind == "indicator":
            return f"[{a[2]} on {a[0]}, {a[1]} elsewhere]"
        if kind == "table":
            return f"table(len={len(a[0])}, tail={a[1]})"
        if kind == "mul":
            return f"({a[0]})*({a[1]})"
        if kind == "shift":
            return f"({a[0]})(n-{a[1]})"
        if kind == "minus":
            return f"({a[0]})-{a[1]}"
        return f"{kind}({', '.join(map(str, a))})"


# A size profile uses the same constructors; zero values are allowed and no
# limsup certificate is required.
SizeProfile = ParamFunction


def evaluate(h: ParamFunction, n: int) -> int:
    return h(n)


# ---------------------------------------------------------------------------
# supermultiplicativity

@dataclass(frozen=True)
class SupermultiplicativeResult:
    status: str  # "certificate" | "counterexample" | "unfalsified"
    pair: tuple[int, int] | None = None
    detail: str = ""

    @property
    def certified(self) -> bool:
        return self.status == "certificate"


def _analytic_supermultiplicative(h: ParamFunction) -> str | None:
    if h.kind == "exp":
        return "equality: b^(a+c) = b^a * b^c"
    if h.kind == "factorial" and h.args[1] == 0 and h.args[0] >= 1:
        return "binomial integrality: (m+n)!/(m!n!) >= 1"
    return None


def scan_supermultiplicative(h: ParamFunction, bound: int) -> tuple[int, int] | None:
    """First pair (a, b), lexicographically, with h(a+b) < h(a)h(b)."""
    for a in range(bound + 1):
        for b in range(bound + 1):
            if h(a + b) < h(a) * h(b):
                return (a, b)
    return None


def check_supermultiplicative(h: ParamFunction, range_bound: int) -> SupermultiplicativeResult:
    if range_bound < 2:
        raise PreconditionError("range_bound must be at least 2")
    reason = _analytic_supermultiplicative(h)
    if reason is not None:
        return SupermultiplicativeResult("certificate", None, reason)
    pair = scan_supermultiplicative(h, range_bound)
    if pair is not None:
        a, b = pair
        return SupermultiplicativeResult(
            "counterexample", pair, f"h({a + b})={h(a + b)} < h({a})h({b})={h(a) * h(b)}")
    return SupermultiplicativeResult("unfalsified", None, f"no violation with a, b <= {range_bound}")


# ---------------------------------------------------------------------------
# weight ledgers

@dataclass(frozen=True)
class WeightLedger:
    """Exact partial sums of ``|S_n|/h(n)`` style terms.

    ``tail_bound`` is an upper bound on every term not listed, justified by
    ``tail_tag``.  It is absent when only a partial sum is known.
    """

    terms: tuple[Fraction, ...]
    partial_sum: Fraction
    tail_bound: Fraction | None = None
    tail_tag: str | None = None
    start: int = 0

    def __post_init__(self):
        if any(t < 0 for t in self.terms):
            raise PreconditionError("ledger terms must be nonnegative")
        if sum(self.terms, Fraction(0)) != self.partial_sum:
            raise PreconditionError("ledger partial sum does not match its terms")

    @classmethod
    def of(cls, terms, tail_bound=None, tail_tag=None, start=0) -> "WeightLedger":
        terms = tuple(Fraction(t) for t in terms)
        return cls(terms, sum(terms, Fraction(0)), tail_bound, tail_tag, start)

    @property
    def certified_total(self) -> Fraction | None:
        if self.tail_bound is None:
            return None
        return self.partial_sum + self.tail_bound

    def to_dict(self):
        return {
            "start": self.start,
            "terms": [frac_pair(t) for t in self.terms],
            "partial_sum": frac_pair(self.partial_sum),
            "tail_bound": None if self.tail_bound is None else frac_pair(self.tail_bound),
            "tail_tag": self.tail_tag,
        }


def frac_pair(x) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def weight_term(size: int, weight: int) -> Fraction:
    if size == 0:
        return Fraction(0)
    if weight <= 0:
        raise DivisionByZeroWeight(f"nonempty level of size {size} has weight {weight}")
    return Fraction(size, weight)


def partial_weight(sizes: Sequence[int] | Callable[[int], int], h: ParamFunction, N: int,
                   start: int = 1) -> WeightLedger:
    """Exact ``sum_{start <= n <= N} sizes(n)/h(n)``.

    Levels start at 1 by default: level 0 never matters for an
    infinitely-often condition.
    """
    get = sizes if callable(sizes) else sizes.__getitem__
    terms = [weight_term(get(n), h(n)) for n in range(start, N + 1)]
    return WeightLedger.of(terms, start=start)


# ---------------------------------------------------------------------------
# sparse levels

@dataclass(frozen=True)
class SparseLevels:
    """Indices ``k_0 < k_1 < ...`` with ``h(k_{n+1}) >= 2 h(k_n)``.

    Only a prefix is stored; the tail follows the same greedy rule and is
    bounded geometrically by ``1/h(k_last)``.
    """

    h: ParamFunction
    budget: Fraction
    ks: tuple[int, ...]
    truncated: bool = False

    rule = "k_0 = least k >= 1 with h(k) >= 2/budget; k_{n+1} = least k > k_n with h(k) >= 2 h(k_n)"

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(self.h(k) for k in self.ks)

    @property
    def ledger(self) -> WeightLedger:
        vals = self.values
        tail = Fraction(1, vals[-1]) if vals else None
        return WeightLedger.of([Fraction(1, v) for v in vals], tail_bound=tail,
                               tail_tag="geometric: h(k_{n+1}) >= 2 h(k_n)")

    @property
    def certified_sum_bound(self) -> Fraction:
        """``2/h(k_0)``: the whole infinite sum is at most this."""
        return Fraction(2, self.values[0])


def select_sparse_levels(h: ParamFunction, budget, count: int = 16,
                         ceiling: int = DEFAULT_CEILING, truncate: bool = False) -> SparseLevels:
    budget = Fraction(budget)
    if budget <= 0:
        raise PreconditionError("budget must be positive")
    h.require_limsup()
    target = math.ceil(2 / budget)
    ks: list[int] = []
    k = 1
    truncated = False
    while len(ks) < count:
        try:
            k = h.next_at_least(target, start=k, ceiling=ceiling)
        except SearchCeilingExceeded:
            if truncate and ks:
                truncated = True
                break
            raise
        if k > ceiling:
            if truncate and ks:
                truncated = True
                break
            raise SearchCeilingExceeded(f"k_{len(ks)} = {k} exceeds ceiling {ceiling}")
        ks.append(k)
        target = 2 * h(k)
        k += 1
    return SparseLevels(h, budget, tuple(ks), truncated)
