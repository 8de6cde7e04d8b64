"""Points, interval partitions, covering systems and finite-depth membership."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .errors import OutOfRange, PreconditionError
from .param import ParamFunction, WeightLedger, triangular, triangular_index, weight_term

Word = tuple  # a finite sequence of naturals; length n means domain {0, ..., n-1}


def compatible(u: Word, v: Word) -> bool:
    """True when one word extends the other."""
    m = min(len(u), len(v))
    return u[:m] == v[:m]


# ---------------------------------------------------------------------------
# points

@dataclass(frozen=True)
class Point:
    """A finitely presented element of the Baire space.

    ``kind`` is one of ``eventually_zero`` (args: head), ``periodic``
    (args: head, period), ``rule`` (args: name, callable) or ``stream``
    (args: prefix, source tag).  A stream is only defined on its prefix.
    """

    kind: str
    args: tuple

    @classmethod
    def zeros(cls) -> "Point":
        return cls("eventually_zero", ((),))

    @classmethod
    def eventually_zero(cls, head: Iterable[int]) -> "Point":
        return cls("eventually_zero", (tuple(head),))

    @classmethod
    def constant(cls, c: int) -> "Point":
        return cls.periodic((), (c,))

    @classmethod
    def periodic(cls, head: Iterable[int], period: Iterable[int]) -> "Point":
        period = tuple(period)
        if not period:
            raise PreconditionError("period must be nonempty")
        return cls("periodic", (tuple(head), period))

    @classmethod
    def identity(cls) -> "Point":
        return cls.rule("identity", lambda n: n)

    @classmethod
    def rule(cls, name: str, fn: Callable[[int], int]) -> "Point":
        return cls("rule", (name, fn))

    @classmethod
    def stream(cls, prefix: Iterable[int], source: str = "") -> "Point":
        return cls("stream", (tuple(prefix), source))

    def __call__(self, n: int) -> int:
        kind, a = self.kind, self.args
        if kind == "eventually_zero":
            head = a[0]
            return head[n] if n < len(head) else 0
        if kind == "periodic":
            head, period = a
            if n < len(head):
                return head[n]
            return period[(n - len(head)) % len(period)]
        if kind == "rule":
            return a[1](n)
        if kind == "stream":
            prefix = a[0]
            if n >= len(prefix):
                raise OutOfRange(f"stream point is only defined below {len(prefix)}")
            return prefix[n]
        raise ValueError(f"unknown point kind {kind!r}")

    def prefix(self, n: int) -> Word:
        if self.kind == "eventually_zero":
            head = self.args[0]
            return head[:n] + (0,) * max(0, n - len(head))
        if self.kind == "stream":
            if n > len(self.args[0]):
                raise OutOfRange(f"stream point is only defined below {len(self.args[0])}")
            return self.args[0][:n]
        return tuple(self(i) for i in range(n))

    def restrict(self, a: int, b: int) -> Word:
        if self.kind in ("eventually_zero", "stream"):
            return self.prefix(b)[a:]
        return tuple(self(i) for i in range(a, b))

    @property
    def defined_up_to(self) -> int | None:
        return len(self.args[0]) if self.kind == "stream" else None

    def to_dict(self, depth: int | None = None):
        kind, a = self.kind, self.args
        if kind == "eventually_zero":
            return {"kind": kind, "head": list(a[0])}
        if kind == "periodic":
            return {"kind": kind, "head": list(a[0]), "period": list(a[1])}
        if kind == "stream":
            return {"kind": kind, "prefix": list(a[0]), "source": a[1]}
        if depth is None:
            raise PreconditionError("rule points serialize only as a finite prefix")
        return {"kind": "stream", "prefix": list(self.prefix(depth)), "source": a[0]}

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        if kind == "eventually_zero":
            return cls.eventually_zero(d["head"])
        if kind == "periodic":
            return cls.periodic(d["head"], d["period"])
        if kind == "stream":
            return cls.stream(d["prefix"], d.get("source", ""))
        raise PreconditionError(f"cannot decode point kind {kind!r}")


def word_restrict(x: "Point | Word", a: int, b: int) -> Word:
    """``x`` restricted to ``[a, b)``, re-indexed from 0."""
    if a < 0 or b < a:
        raise OutOfRange(f"bad interval [{a}, {b})")
    if isinstance(x, Point):
        return x.restrict(a, b)
    if b > len(x):
        raise OutOfRange(f"word of length {len(x)} has no coordinate {b - 1}")
    return tuple(x[a:b])


# ---------------------------------------------------------------------------
# interval partitions

@dataclass(frozen=True)
class IntervalPartition:
    """Partition of omega into consecutive intervals ``I_n = [b_n, b_{n+1})``.

    Kinds: ``triangular``; ``constant`` (args: length); ``explicit``
    (args: breakpoints with b_0 = 0, tail length used past the list).
    """

    kind: str
    args: tuple = ()

    @classmethod
    def triangular(cls) -> "IntervalPartition":
        return cls("triangular")

    @classmethod
    def unit(cls) -> "IntervalPartition":
        return cls("constant", (1,))

    @classmethod
    def constant(cls, length: int) -> "IntervalPartition":
        if length < 1:
            raise PreconditionError("interval length must be positive")
        return cls("constant", (length,))

    @classmethod
    def explicit(cls, breakpoints: Iterable[int], tail_length: int = 1) -> "IntervalPartition":
        bps = tuple(breakpoints)
        if not bps or bps[0] != 0:
            raise PreconditionError("breakpoints must start at 0")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise PreconditionError("breakpoints must be strictly increasing")
        if tail_length < 1:
            raise PreconditionError("tail length must be positive")
        return cls("explicit", (bps, tail_length))

    @classmethod
    def from_lengths(cls, lengths: Iterable[int], tail_length: int = 1) -> "IntervalPartition":
        bps = [0]
        for n in lengths:
            bps.append(bps[-1] + n)
        return cls.explicit(bps, tail_length)

    def breakpoint(self, n: int) -> int:
        if self.kind == "triangular":
            return triangular(n)
        if self.kind == "constant":
            return n * self.args[0]
        bps, tail = self.args
        if n < len(bps):
            return bps[n]
        return bps[-1] + (n - len(bps) + 1) * tail

    def interval(self, n: int) -> tuple[int, int]:
        return self.breakpoint(n), self.breakpoint(n + 1)

    def length(self, n: int) -> int:
        a, b = self.interval(n)
        return b - a

    def block_of(self, k: int) -> int:
        """Index of the interval containing ``k``."""
        if self.kind == "triangular":
            return triangular_index(k)
        if self.kind == "constant":
            return k // self.args[0]
        bps, tail = self.args
        if k < bps[-1]:
            lo, hi = 0, len(bps) - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if bps[mid] <= k:
                    lo = mid
                else:
                    hi = mid
            return lo
        return len(bps) - 1 + (k - bps[-1]) // tail

    def blocks_within(self, depth: int) -> Iterator[int]:
        """Indices of the intervals contained in ``[0, depth)``."""
        n = 0
        while self.breakpoint(n + 1) <= depth:
            yield n
            n += 1

    def to_dict(self):
        if self.kind == "explicit":
            return {"kind": "explicit", "breakpoints": list(self.args[0]), "tail_length": self.args[1]}
        return {"kind": self.kind, "args": list(self.args)}

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "explicit":
            return cls.explicit(d["breakpoints"], d["tail_length"])
        return cls(d["kind"], tuple(d["args"]))


# ---------------------------------------------------------------------------
# covering systems

def _frozen_words(words) -> frozenset:
    return frozenset(tuple(w) for w in words)


@dataclass(frozen=True)
class PrefixSystem:
    """Levels ``S_n`` of words of length ``n``.

    ``h`` is the weight rule, or ``None`` for the finiteness variant.
    ``level_fn`` generates a level on demand; ``member`` is an optional fast
    membership test for levels too large to list.  ``tail`` optionally maps
    ``N`` to a certified bound on ``sum_{n > N} |S_n|/h(n)``.
    """

    level_fn: Callable[[int], frozenset]
    h: ParamFunction | None = None
    name: str = ""
    member: Callable[[int, Word], bool] | None = None
    size_fn: Callable[[int], int] | None = None
    support: Callable[[int], Iterable[int]] | None = None
    tail: Callable[[int], Fraction] | None = None
    tail_tag: str | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @classmethod
    def explicit(cls, levels: dict, h: ParamFunction | None = None, name: str = "explicit",
                 certify_tail: bool = True) -> "PrefixSystem":
        """Finitely many nonempty levels; everything past them is empty."""
        table = {int(n): _frozen_words(ws) for n, ws in levels.items() if ws}
        for n, ws in table.items():
            if any(len(w) != n for w in ws):
                raise PreconditionError(f"level {n} holds a word of the wrong length")
        top = max(table, default=0)

        def tail(N):
            return sum((weight_term(len(table[n]), h(n)) for n in table if n > N), Fraction(0))

        return cls(
            level_fn=lambda n: table.get(n, frozenset()),
            h=h,
            name=name,
            support=lambda depth: sorted(n for n in table if n <= depth),
            tail=tail if (h is not None and certify_tail) else None,
            tail_tag=f"finite support (empty past level {top})" if certify_tail else None,
        )

    @classmethod
    def empty(cls, h: ParamFunction | None = None) -> "PrefixSystem":
        return cls.explicit({}, h, name="empty")

    @classmethod
    def from_rule(cls, fn: Callable[[int], Iterable[Word]], h: ParamFunction | None = None,
                  name: str = "rule", **kw) -> "PrefixSystem":
        return cls(level_fn=lambda n: _frozen_words(fn(n)), h=h, name=name, **kw)

    @property
    def is_fin(self) -> bool:
        return self.h is None

    def level(self, n: int) -> frozenset:
        cache = self._cache
        if n not in cache:
            words = self.level_fn(n)
            if any(len(w) != n for w in words):
                raise PreconditionError(f"level {n} of {self.name} holds a word of the wrong length")
            cache[n] = words
        return cache[n]

    def size(self, n: int) -> int:
        if self.size_fn is not None:
            return self.size_fn(n)
        return len(self.level(n))

    def contains(self, n: int, w: Word) -> bool:
        if len(w) != n:
            return False
        if self.member is not None:
            return self.member(n, w)
        return tuple(w) in self.level(n)

    def nonempty_levels(self, depth: int) -> Iterable[int]:
        if self.support is not None:
            return self.support(depth)
        return (n for n in range(depth + 1) if self.size(n))

    def ledger(self, N: int, start: int = 1) -> WeightLedger:
        if self.h is None:
            raise PreconditionError("a finiteness system has no weight ledger")
        terms = [weight_term(self.size(n), self.h(n)) for n in range(start, N + 1)]
        tail = self.tail(N) if self.tail is not None else None
        return WeightLedger.of(terms, tail_bound=tail, tail_tag=self.tail_tag if tail is not None else None,
                               start=start)

    def materialize(self, depth: int) -> dict[int, list]:
        return {n: sorted(self.level(n)) for n in self.nonempty_levels(depth) if self.level(n)}


@dataclass(frozen=True)
class BlockSystem:
    """Interval partition with pattern sets ``J_n`` over ``I_n``.

    Patterns are stored as words of length ``|I_n|`` (re-indexed from 0).
    ``quantifier`` is ``"exists"`` (small-style) or ``"forall"`` (E-style).
    """

    partition: IntervalPartition
    block_fn: Callable[[int], frozenset]
    quantifier: str = "exists"
    h: ParamFunction | None = None
    name: str = ""
    tail: Callable[[int], Fraction] | None = None
    member: Callable[[int, Word], bool] | None = None
    size_fn: Callable[[int], int] | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.quantifier not in ("exists", "forall"):
            raise PreconditionError("quantifier must be 'exists' or 'forall'")

    @classmethod
    def explicit(cls, partition: IntervalPartition, blocks: dict, quantifier="exists",
                 h: ParamFunction | None = None, name: str = "explicit") -> "BlockSystem":
        table = {int(n): _frozen_words(ws) for n, ws in blocks.items() if ws}

        def tail(N):
            return sum((weight_term(len(table[n]), h(partition.length(n))) for n in table if n > N),
                       Fraction(0))

        return cls(partition, lambda n: table.get(n, frozenset()), quantifier, h, name,
                   tail if h is not None else None)

    @classmethod
    def from_rule(cls, partition, fn, quantifier="exists", h=None, name="rule", **kw) -> "BlockSystem":
        return cls(partition, lambda n: _frozen_words(fn(n)), quantifier, h, name, **kw)

    def block(self, n: int) -> frozenset:
        cache = self._cache
        if n not in cache:
            words = self.block_fn(n)
            ln = self.partition.length(n)
            if any(len(w) != ln for w in words):
                raise PreconditionError(f"pattern in block {n} of {self.name} has the wrong length")
            cache[n] = words
        return cache[n]

    def size(self, n: int) -> int:
        return self.size_fn(n) if self.size_fn is not None else len(self.block(n))

    def contains(self, n: int, w: Word) -> bool:
        if self.member is not None:
            return self.member(n, tuple(w))
        return tuple(w) in self.block(n)

    def ratio(self, n: int) -> Fraction:
        if self.h is None:
            raise PreconditionError("a finiteness system has no weights")
        return weight_term(self.size(n), self.h(self.partition.length(n)))

    def ledger(self, N: int) -> WeightLedger:
        return WeightLedger.of([self.ratio(n) for n in range(N + 1)], start=0)

    def materialize(self, nblocks: int) -> dict[int, list]:
        return {n: sorted(self.block(n)) for n in range(nblocks) if self.block(n)}


@dataclass(frozen=True)
class MinusWitness:
    """Denotes ``{x : for all but finitely many n, x|I_n != pattern|I_n}``."""

    pattern: Point
    partition: IntervalPartition


@dataclass(frozen=True)
class TreeMap:
    """A total map on words, to naturals or to words."""

    name: str
    fn: Callable[[Word], object]

    def __call__(self, sigma: Word):
        return self.fn(tuple(sigma))

    @classmethod
    def const_word(cls, w: Word) -> "TreeMap":
        w = tuple(w)
        return cls(f"const{list(w)}", lambda s: w)

    @classmethod
    def const_value(cls, c: int) -> "TreeMap":
        return cls(f"const {c}", lambda s: c)

    @classmethod
    def length(cls) -> "TreeMap":
        return cls("length", lambda s: len(s))


# ---------------------------------------------------------------------------
# finite-depth membership

@dataclass(frozen=True)
class MembershipReport:
    depth: int
    burn_in: int
    hits: tuple[int, ...]
    misses: int
    verdict: str
    source: str = "truncation"

    @property
    def stages(self) -> int:
        return len(self.hits) + self.misses

    def to_dict(self):
        return {"depth": self.depth, "burn_in": self.burn_in, "hits": list(self.hits),
                "misses": self.misses, "verdict": self.verdict, "source": self.source}


def _report(depth, burn_in, hits, total) -> MembershipReport:
    return MembershipReport(depth, burn_in, tuple(hits), total - len(hits),
                            f"hits={len(hits)} at depth {depth}")


def membership_report(system, x: Point, depth: int, burn_in: int = 0) -> MembershipReport:
    """Hit stages of ``x`` against ``system`` up to ``depth``.

    Prefix systems check levels ``burn_in..depth``; block systems and
    minus-witnesses check blocks lying inside ``[0, depth)``.  A hit for a
    :class:`MinusWitness` is a block where ``x`` agrees with the pattern.
    Truncation alone never certifies a tail quantifier.
    """
    if depth < burn_in:
        raise PreconditionError("depth must be at least the burn-in")
    if isinstance(system, PrefixSystem):
        xs = x.prefix(depth)
        hits = [n for n in range(burn_in, depth + 1) if system.contains(n, xs[:n])]
        return _report(depth, burn_in, hits, depth + 1 - burn_in)
    if isinstance(system, (BlockSystem, MinusWitness)):
        part = system.partition
        blocks = [n for n in part.blocks_within(depth) if n >= burn_in]
        xs = x.prefix(depth)
        hits = []
        for n in blocks:
            a, b = part.interval(n)
            seg = xs[a:b]
            if isinstance(system, BlockSystem):
                if system.contains(n, seg):
                    hits.append(n)
            elif seg == system.pattern.restrict(a, b):
                hits.append(n)
        return _report(depth, burn_in, hits, len(blocks))
    raise PreconditionError(f"cannot report membership in {type(system).__name__}")


def cylinder_meets_union(system: PrefixSystem, sigma: Word, depth: int) -> bool:
    """True iff some word of some ``S_n`` with ``n <= depth`` is compatible with ``sigma``."""
    sigma = tuple(sigma)
    if len(sigma) > depth:
        raise PreconditionError("sigma is longer than the depth")
    for n in system.nonempty_levels(depth):
        for w in system.level(n):
            if compatible(w, sigma):
                return True
    return False
