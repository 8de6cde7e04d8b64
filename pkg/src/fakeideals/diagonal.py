"""Diagonal system builder, pigeonhole escape engine and separation drivers.

A plan assigns every level past the base level to a *window*
``(a_{i-1}, a_i]`` owned by one word ``sigma`` (stage ``k``, slot ``i``).  Words
in a window look like ``sigma + (p,) + zeros`` and the payloads ``p`` of the
window's levels tile ``[0, sum of s over the window)``.  Levels are implicit:
nothing is listed unless asked for, so factorial-size levels are fine.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .errors import (
    DepthExhausted,
    HypothesisViolated,
    NotAlmostDisjoint,
    PreconditionError,
    RatioDecayTooSlow,
    SearchCeilingExceeded,
)
from .param import DEFAULT_CEILING, ParamFunction, SetRule, WeightLedger, weight_term
from .systems import Point, PrefixSystem, Word

Profile = Callable[[int], int]

ENUM_LIMIT = 100_000


class _Cumulative:
    """Running sums ``F(n) = sum_{j=from_}^{n} f(j)``, extended on demand."""

    def __init__(self, f: Profile, from_: int = 1):
        self.f = f
        self.from_ = from_
        self.sums: list[int] = []

    def __call__(self, n: int) -> int:
        if n < 0:
            return 0
        sums = self.sums
        while len(sums) <= n:
            k = len(sums)
            prev = sums[-1] if sums else 0
            sums.append(prev + (self.f(k) if k >= self.from_ else 0))
        return self.sums[n]


# ---------------------------------------------------------------------------
# the lemma's hypothesis

def check_hypothesis(s: Profile, t: Profile, k_max: int, ceiling: int = DEFAULT_CEILING,
                     k_min: int = 0) -> list[tuple[int, int]]:
    """Least ``N`` with ``sum_{i=k}^N s(i) > sum_{i=1}^N t(i)`` for each ``k_min <= k <= k_max``."""
    S = _Cumulative(s, 0)
    T = _Cumulative(t, 1)
    out = []
    N = 0
    for k in range(k_min, k_max + 1):
        N = max(N, k)
        while not S(N) - S(k - 1) > T(N):
            N += 1
            if N > ceiling:
                err = SearchCeilingExceeded(f"hypothesis fails for k={k} up to N={ceiling}")
                err.k = k
                raise err
        out.append((k, N))
    return out


def corollary_N(s: Profile, k: int) -> int:
    """The sufficient bound ``N = sum_{i=1}^k s(i) + 1`` for ``t = s - 1``."""
    return sum(s(i) for i in range(1, k + 1)) + 1


def hypothesis_holds(s: Profile, t: Profile, k: int, N: int) -> bool:
    return sum(s(i) for i in range(k, N + 1)) > sum(t(i) for i in range(1, N + 1))


# ---------------------------------------------------------------------------
# plans

@dataclass(frozen=True)
class Window:
    stage: int
    slot: int  # 1-based
    lo: int  # a_{i-1}, exclusive
    hi: int  # a_i, inclusive
    offsets: tuple[int, ...]  # offsets[j - lo - 1] = payload start of level j

    @property
    def total(self) -> int:
        return self.offsets[-1]

    def payload_range(self, j: int) -> tuple[int, int]:
        return self.offsets[j - self.lo - 1], self.offsets[j - self.lo]

    def level_of_payload(self, p: int) -> int:
        return self.lo + bisect.bisect_right(self.offsets, p)


class DiagonalPlan:
    """Implicit levels ``S_n`` with ``|S_n| = s(n)`` built to ``depth``.

    Stage ``k``'s slots are placed strictly after every level assigned so far,
    so the base level is never re-addressed.
    """

    def __init__(self, s: Profile, t: Profile, depth: int, ceiling: int = DEFAULT_CEILING,
                 offset: int = 0, name: str = "diagonal"):
        self.s, self.t = s, t
        self.depth, self.ceiling, self.offset, self.name = depth, ceiling, offset, name
        self._T = _Cumulative(t, 1)
        self.windows: list[Window] = []
        self._starts: list[int] = []
        self._by_slot: dict[tuple[int, int], Window] = {}
        self._words: dict[tuple[int, int], Word] = {}
        self.base_level = self._find_base()
        self.frontier = self.base_level or 0
        self.stages_started: list[int] = []
        if self.base_level is not None:
            self._build()

    def _find_base(self) -> int | None:
        for n in range(1, self.depth + 1):
            if self.s(n) > 0:
                return n
        return None

    def _next_window(self, stage: int, slot: int, lo: int) -> Window:
        acc = 0
        offsets = [0]
        a = lo
        while True:
            a += 1
            if a > self.ceiling:
                raise SearchCeilingExceeded(
                    f"no breakpoint for stage {stage}, slot {slot} below level {self.ceiling}")
            acc += self.s(a)
            offsets.append(acc)
            if acc > self._T(a):
                return Window(stage, slot, lo, a, tuple(offsets))

    def _build(self) -> None:
        k = self.base_level
        while k <= self.frontier and self.frontier < self.depth:
            size = self.s(k)
            if size:
                self.stages_started.append(k)
            i = 1
            while i <= size and self.frontier < self.depth:
                w = self._next_window(k, i, self.frontier)
                self.windows.append(w)
                self._starts.append(w.lo)
                self._by_slot[(k, i)] = w
                self.frontier = w.hi
                i += 1
            k += 1

    # -- lookups ------------------------------------------------------------

    def window_of_level(self, j: int) -> Window | None:
        idx = bisect.bisect_left(self._starts, j) - 1
        if idx < 0:
            return None
        w = self.windows[idx]
        return w if w.lo < j <= w.hi else None

    def window_of_slot(self, stage: int, slot: int) -> Window | None:
        return self._by_slot.get((stage, slot))

    def size(self, j: int) -> int:
        if j == self.base_level or self.window_of_level(j) is not None:
            return self.s(j)
        return 0

    def covered(self, j: int) -> bool:
        return j == self.base_level or self.window_of_level(j) is not None or \
            (self.base_level is not None and j < self.base_level) or self.base_level is None

    def word(self, j: int, i: int) -> Word:
        """``sigma^j_i``: the ``i``-th word (1-based) of ``S_j``."""
        key = (j, i)
        if key in self._words:
            return self._words[key]
        if not 1 <= i <= self.size(j):
            raise PreconditionError(f"level {j} has no slot {i}")
        if j == self.base_level:
            w = (0,) * (j - 1) + (i - 1,)
        else:
            win = self.window_of_level(j)
            p = win.payload_range(j)[0] + i - 1
            w = self.word(win.stage, win.slot) + (p,) + (0,) * (j - win.stage - 1)
        if len(self._words) < 500_000:
            self._words[key] = w
        return w

    def words(self, j: int) -> Iterator[Word]:
        for i in range(1, self.size(j) + 1):
            yield self.word(j, i)

    def level(self, j: int) -> frozenset:
        if self.size(j) > ENUM_LIMIT:
            raise SearchCeilingExceeded(f"level {j} holds {self.size(j)} words; use member()")
        return frozenset(self.words(j))

    def tag(self, j: int, w: Word) -> tuple[int, int, int] | None:
        """``(stage, slot, payload)`` provenance of ``w`` in ``S_j``, or None."""
        if len(w) != j:
            return None
        if j == self.base_level:
            ok = all(c == 0 for c in w[:-1]) and 0 <= w[-1] < self.s(j)
            return (0, 0, w[-1]) if ok else None
        win = self.window_of_level(j)
        if win is None:
            return None
        k = win.stage
        lo, hi = win.payload_range(j)
        if not lo <= w[k] < hi or any(w[k + 1:]):
            return None
        if w[:k] != self.word(k, win.slot):
            return None
        return (k, win.slot, w[k])

    def member(self, j: int, w: Word) -> bool:
        return self.tag(j, tuple(w)) is not None

    def slot_of(self, j: int, w: Word) -> int:
        if j == self.base_level:
            return w[-1] + 1
        win = self.window_of_level(j)
        return w[win.stage] - win.payload_range(j)[0] + 1

    def system(self, h: ParamFunction | None = None) -> PrefixSystem:
        return PrefixSystem(level_fn=self.level, h=h, name=self.name, member=self.member,
                            size_fn=self.size,
                            support=lambda d: [j for j in range(1, d + 1) if self.size(j)])

    # -- invariants ---------------------------------------------------------

    def check_sizes(self, depth: int | None = None, enum_limit: int = ENUM_LIMIT) -> list[str]:
        """Count every level; levels above ``enum_limit`` are counted by payload arithmetic."""
        depth = self.depth if depth is None else depth
        bad = []
        for j in range(1, depth + 1):
            if not self.covered(j):
                bad.append(f"level {j} unassigned")
                continue
            want = self.s(j) if (self.base_level is not None and j >= self.base_level) else 0
            if want <= enum_limit:
                got = len(set(self.words(j))) if want else 0
            else:
                win = self.window_of_level(j)
                lo, hi = win.payload_range(j) if win else (0, want)
                got = hi - lo
            if got != want:
                bad.append(f"level {j}: |S|={got} but s={want}")
        return bad

    def check_extension(self, depth: int | None = None, enum_limit: int = ENUM_LIMIT) -> list[str]:
        """Every payload of every window inside ``depth`` is realised exactly once."""
        depth = self.depth if depth is None else depth
        bad = []
        for w in self.windows:
            if w.hi > depth or w.total > enum_limit:
                continue
            sigma = self.word(w.stage, w.slot)
            seen: dict[int, int] = {}
            for j in range(w.lo + 1, w.hi + 1):
                for tau in self.words(j):
                    if tau[: w.stage] != sigma or any(tau[w.stage + 1:]):
                        bad.append(f"slot {(w.stage, w.slot)}: level {j} word off pattern")
                        continue
                    seen[tau[w.stage]] = seen.get(tau[w.stage], 0) + 1
            if sorted(seen) != list(range(w.total)) or any(c != 1 for c in seen.values()):
                bad.append(f"slot {(w.stage, w.slot)}: payloads not an exact tiling of [0,{w.total})")
        return bad

    def check_breakpoints(self) -> list[str]:
        bad = []
        for w in self.windows:
            if not w.total > self._T(w.hi):
                bad.append(f"slot {(w.stage, w.slot)}: {w.total} <= {self._T(w.hi)}")
            if w.hi - 1 > w.lo and w.offsets[-2] > self._T(w.hi - 1):
                bad.append(f"slot {(w.stage, w.slot)}: breakpoint {w.hi} not minimal")
        return bad

    def summary(self) -> dict:
        return {
            "name": self.name,
            "depth": self.depth,
            "offset": self.offset,
            "base_level": self.base_level,
            "frontier": self.frontier,
            "stages": list(self.stages_started),
            "windows": [[w.stage, w.slot, w.lo, w.hi, w.total] for w in self.windows],
        }


def build_diagonal(s: Profile, t: Profile, depth: int, ceiling: int = DEFAULT_CEILING,
                   name: str = "diagonal") -> DiagonalPlan:
    offset = 0
    if s(0) > 0:
        s0, t0 = s, t
        if isinstance(s, ParamFunction) and isinstance(t, ParamFunction):
            s, t = ParamFunction.shift(s, 1), ParamFunction.shift(t, 1)
        else:
            s = lambda n, f=s0: f(n - 1) if n >= 1 else 0  # noqa: E731
            t = lambda n, f=t0: f(n - 1) if n >= 1 else 0  # noqa: E731
        offset = 1
    return DiagonalPlan(s, t, depth, ceiling, offset, name)


# ---------------------------------------------------------------------------
# escape

@dataclass(frozen=True)
class StageRecord:
    level: int  # n_{m+1}
    slot: int
    payload: int
    coordinate: int  # n_m, where the payload sits
    window: tuple[int, int]
    excluded: tuple[int, ...]
    opponent_count: int  # sum of |T_i| for n_0 <= i <= window end
    t_budget: int  # sum of t(i) for 1 <= i <= window end

    def to_dict(self):
        return {"level": self.level, "slot": self.slot, "payload": self.payload,
                "coordinate": self.coordinate, "window": list(self.window),
                "excluded": list(self.excluded), "opponent_count": self.opponent_count,
                "t_budget": self.t_budget}


@dataclass(frozen=True)
class EscapeCertificate:
    n0: int
    slot0: int
    stages: tuple[StageRecord, ...]
    prefix: Word
    checked_depth: int
    requested: int
    exhausted: bool = False

    @property
    def hit_levels(self) -> list[int]:
        return [self.n0] + [r.level for r in self.stages]

    @property
    def point(self) -> Point:
        return Point.eventually_zero(self.prefix)

    def to_dict(self):
        return {"n0": self.n0, "slot0": self.slot0, "stages": [r.to_dict() for r in self.stages],
                "prefix": list(self.prefix), "checked_depth": self.checked_depth,
                "requested": self.requested, "exhausted": self.exhausted}


def _opp_level(opponent, k: int) -> frozenset:
    return opponent.level(k) if isinstance(opponent, PrefixSystem) else frozenset(opponent(k))


def escape(plan: DiagonalPlan, opponent, stages: int, burn_in: int = 0,
           allow_partial: bool = False) -> tuple[Point, EscapeCertificate]:
    """Pigeonhole escape: a branch through the plan that the opponent never catches past ``n_0``.

    ``opponent`` is a PrefixSystem (or ``k -> words``); its levels are read one
    window at a time.  Ties are broken by the least free payload.
    """
    if plan.base_level is None:
        raise DepthExhausted("plan has no levels")
    n0 = T0 = None
    blocked = []
    for n in range(max(burn_in, plan.base_level), plan.frontier + 1):
        if plan.size(n) > plan.t(n):
            T0 = _opp_level(opponent, n)
            if len(T0) <= plan.t(n):
                n0 = n
                break
            blocked.append(n)
    if n0 is None:
        if blocked:
            raise HypothesisViolated(f"|T_n| > t(n) at every candidate n_0 in {blocked[:5]}...")
        raise DepthExhausted(f"no level in [{burn_in}, {plan.frontier}] with s(n) > t(n)")
    slot0 = next(i for i in range(1, len(T0) + 2) if plan.word(n0, i) not in T0)
    xi = plan.word(n0, slot0)
    n, slot = n0, slot0
    count = len(T0)
    records = []
    checked = n0
    exhausted = False
    for m in range(stages):
        win = plan.window_of_slot(n, slot)
        if win is None:
            if allow_partial:
                exhausted = True
                break
            raise DepthExhausted(f"stage {m + 1}: window of slot ({n}, {slot}) lies past depth {plan.depth}")
        excluded = set()
        for k in range(checked + 1, win.hi + 1):
            Tk = _opp_level(opponent, k)
            count += len(Tk)
            excluded.update(tau[n] for tau in Tk)
        excluded |= {tau[n] for k in range(n + 1, checked + 1) for tau in _opp_level(opponent, k)}
        p = next((q for q in range(min(win.total, len(excluded) + 1)) if q not in excluded), None)
        if p is None:
            raise HypothesisViolated(
                f"stage {m + 1}: all {win.total} payloads at coordinate {n} are blocked")
        j = win.level_of_payload(p)
        new_slot = p - win.payload_range(j)[0] + 1
        xi = xi + (p,) + (0,) * (j - n - 1)
        records.append(StageRecord(j, new_slot, p, n, (win.lo, win.hi), tuple(sorted(excluded)),
                                   count, plan._T(win.hi)))
        checked = max(checked, win.hi)
        n, slot = j, new_slot
    prefix = xi + (0,) * (checked - len(xi))
    cert = EscapeCertificate(n0, slot0, tuple(records), prefix, checked, stages, exhausted)
    return cert.point, cert


def verify_escape(plan: DiagonalPlan, opponent, cert: EscapeCertificate) -> list[str]:
    """Re-check every certificate claim from scratch; returns the failures."""
    bad = []
    x = cert.prefix
    if len(x) != cert.checked_depth:
        bad.append("prefix length differs from checked depth")
    for lvl in cert.hit_levels:
        if not plan.member(lvl, x[:lvl]):
            bad.append(f"x|{lvl} not in S_{lvl}")
    for k in range(cert.n0 + 1, cert.checked_depth + 1):
        if x[:k] in _opp_level(opponent, k):
            bad.append(f"x|{k} in T_{k}")
    prev = cert.n0
    for r in cert.stages:
        if r.coordinate != prev:
            bad.append(f"stage at {r.level}: coordinate {r.coordinate} != previous level {prev}")
        if x[r.coordinate] != r.payload or r.payload in r.excluded:
            bad.append(f"stage at {r.level}: payload {r.payload} not a free value")
        prev = r.level
    return bad


# ---------------------------------------------------------------------------
# growth certificates

_ORDER = {"const": 0, "log": 1, "poly": 2, "exp": 3, "fact": 4}


def _growth(h: ParamFunction):
    k, a = h.kind, h.args
    if k == "poly":
        return ("poly", Fraction(len(a) - 1)) if len(a) > 1 else ("const", Fraction(0))
    if k == "floorpow":
        return ("poly", Fraction(a[0], a[1]))
    if k == "floorlog":
        return ("log", Fraction(1))
    if k == "exp":
        return ("exp", Fraction(a[0]))
    if k == "factorial":
        return ("fact", Fraction(a[0])) if a[0] else ("const", Fraction(0))
    if k == "const":
        return ("const", Fraction(0))
    return None


def limit_zero_certificate(f: ParamFunction, g: ParamFunction) -> str | None:
    """A reason why ``f(n)/g(n) -> 0``, or None when the rules do not certify it."""
    cf, cg = _growth(f), _growth(g)
    if cf is None or cg is None:
        return None
    if _ORDER[cf[0]] < _ORDER[cg[0]]:
        return f"{cf[0]} growth is dominated by {cg[0]} growth"
    if cf[0] == cg[0] and cf[0] != "const" and cf[0] != "log" and cf[1] < cg[1]:
        return f"{cf[0]} parameter {cf[1]} < {cg[1]}"
    return None


def summable_certificate(f: ParamFunction, g: ParamFunction) -> str | None:
    """A reason why ``sum f(n)/g(n) < infinity``, or None."""
    cf, cg = _growth(f), _growth(g)
    if cf is None or cg is None:
        return None
    if cg[0] in ("exp", "fact") and _ORDER[cf[0]] < _ORDER[cg[0]]:
        return f"{cf[0]} over {cg[0]}: terms decay faster than geometrically"
    if cg[0] in ("exp", "fact") and cf[0] == cg[0] and cf[1] < cg[1]:
        return f"{cf[0]} parameter {cf[1]} < {cg[1]}"
    if cg[0] == "poly":
        gap = cg[1] - (cf[1] if cf[0] == "poly" else Fraction(0))
        if cf[0] in ("const", "log", "poly") and gap > 1:
            return f"polynomial degree gap {gap} > 1"
    return None


# ---------------------------------------------------------------------------
# separation drivers

@dataclass
class Separation:
    f: ParamFunction
    g: ParamFunction
    plan: DiagonalPlan
    ledger: WeightLedger
    reason: str
    extra: dict = field(default_factory=dict)

    def system(self) -> PrefixSystem:
        return self.plan.system(self.g)

    def escape(self, opponent, stages: int, burn_in: int = 0, allow_partial: bool = False):
        return escape(self.plan, opponent, stages, burn_in, allow_partial)


def _ledger(sizes: Profile, g: Profile, depth: int, start: int = 1) -> WeightLedger:
    terms = []
    for n in range(start, depth + 1):
        sz = sizes(n)
        terms.append(weight_term(sz, g(n)) if sz else Fraction(0))
    return WeightLedger.of(terms, start=start)


def separate_summable(f: ParamFunction, g: ParamFunction, depth: int,
                      ceiling: int = DEFAULT_CEILING) -> Separation:
    """Levels of size ``f`` (small for ``g``) that no ``f``-small system covers."""
    reason = summable_certificate(f, g)
    if reason is None:
        raise PreconditionError(f"no certificate that sum {f}/{g} converges")
    plan = build_diagonal(f, ParamFunction.minus(f, 1), depth, ceiling, name=f"separate[{f}|{g}]")
    ledger = _ledger(plan.size, g, depth)
    return Separation(f, g, plan, ledger, reason)


class _StepProfile:
    """``h(c_k) = k * max{f(j) : j <= c_k}`` on the chosen indices, 0 elsewhere."""

    def __init__(self, f: ParamFunction, g: ParamFunction, thin: bool, ceiling: int):
        self.f, self.g, self.thin, self.ceiling = f, g, thin, ceiling
        self.base = [0]  # n_k
        self.chosen = [0]  # c_k (thinned indices into levels)
        self._M = ParamFunction.prefix_max(f)
        self._pos = 0  # index into base of the last chosen

    def M(self, n: int) -> int:
        return self._M(n)

    def _next_base(self) -> int:
        last = self.base[-1]
        g_last = self.g(last)
        j = last + 1
        while not self.g(j) > g_last:
            j += 1
            if j > self.ceiling:
                raise SearchCeilingExceeded(f"g never exceeds g({last}) below {self.ceiling}")
        self.base.append(j)
        return j

    def _extend(self) -> int:
        k = len(self.chosen)
        while True:
            self._pos += 1
            while len(self.base) <= self._pos:
                self._next_base()
            n = self.base[self._pos]
            if not self.thin or self.M(n) * k * 2 ** k < self.g(n):
                self.chosen.append(n)
                return n
            if n > self.ceiling:
                raise RatioDecayTooSlow(f"no n_k below {self.ceiling} with ratio < 1/({k}*2^{k})")

    def chosen_upto(self, n: int) -> list[int]:
        while self.chosen[-1] < n:
            self._extend()
        return [c for c in self.chosen if c <= n]

    def __call__(self, m: int) -> int:
        self.chosen_upto(m)
        idx = bisect.bisect_left(self.chosen, m)
        if idx < len(self.chosen) and self.chosen[idx] == m:
            return idx * self.M(m)
        return 0


class _MaxIncrements:
    """``t`` with ``sum_{n=1}^N t(n) = B * max{f(j) : j <= N}``."""

    def __init__(self, M: Callable[[int], int], budget: int):
        self.M, self.B = M, budget

    def __call__(self, n: int) -> int:
        if n <= 0:
            return 0
        if n == 1:
            return self.B * self.M(1)
        return self.B * (self.M(n) - self.M(n - 1))


def strict_inclusion(f: ParamFunction, g: ParamFunction, depth: int, thin: bool = True,
                     budget: int = 1, ceiling: int = DEFAULT_CEILING) -> Separation:
    """Step weight ``h`` on the record indices of ``g``; the plan has ``|S_n| = h(n)``.

    Opponents ``T`` with ``sum |T_n|/f(n) <= budget`` satisfy
    ``sum_{n<=N} |T_n| <= budget * max_{j<=N} f(j)``, which is the ``t`` used.
    """
    reason = limit_zero_certificate(f, g)
    if reason is None:
        raise PreconditionError(f"no certificate that {f}/{g} tends to 0")
    if budget < 1:
        raise PreconditionError("budget must be a positive integer")
    h = _StepProfile(f, g, thin, ceiling)
    chosen = h.chosen_upto(depth)
    base = [n for n in h.base if n <= depth]
    t = _MaxIncrements(h.M, budget)
    plan = build_diagonal(h, t, depth, ceiling, name=f"strict[{f}|{g}]")
    ledger = _ledger(h, g, depth, start=0) if g(0) else _ledger(h, g, depth)
    ineqs = []
    for k, c in enumerate(chosen):
        if k >= 1:
            ineqs.append((f"h({c})/g({c}) <= 2^-{k}", weight_term(h(c), g(c)), Fraction(1, 2 ** k)))
        if k >= budget:
            ineqs.append((f"sum t up to {c} <= h({c})", budget * h.M(c), h(c)))
    partial = ledger.partial_sum
    geo = sum((Fraction(1, 2 ** k) for k in range(1, len(chosen))), Fraction(0))
    if thin:
        ineqs.append(("sum h/g <= sum 2^-k", partial, geo))
    extra = {"base": base, "chosen": chosen, "h_values": {c: h(c) for c in chosen},
             "inequalities": ineqs, "thin": thin, "budget": budget}
    return Separation(f, g, plan, ledger, reason, extra)


def chain_member(alpha) -> ParamFunction:
    alpha = Fraction(alpha)
    if alpha <= 1:
        raise PreconditionError("chain exponents must exceed 1")
    return ParamFunction.floorpow(alpha)


def chain_certificate(alpha, beta) -> str:
    fa, fb = chain_member(alpha), chain_member(beta)
    if not Fraction(alpha) < Fraction(beta):
        raise PreconditionError("need alpha < beta")
    return limit_zero_certificate(fa, fb)


@dataclass(frozen=True)
class FactorialCheck:
    n: int
    t_sum: int
    factorial_sum: int
    middle: int  # (3n-3)! (n-1)
    s_n: int

    @property
    def links(self) -> list[tuple[str, bool]]:
        return [
            ("sum t <= sum (3i)!", self.t_sum <= self.factorial_sum),
            ("sum (3i)! <= (3n-3)!(n-1)", self.factorial_sum <= self.middle),
            ("sum (3i)! < (3n-3)!(n-1) (strict form, informational)", self.factorial_sum < self.middle),
            ("(3n-3)!(n-1) < (3n-2)!", self.middle < self.s_n),
            ("sum t < s(n)", self.t_sum < self.s_n),
        ]

    @property
    def holds(self) -> bool:
        return all(ok for label, ok in self.links if "informational" not in label)


def antichain_profiles(A: SetRule, B: SetRule):
    fA = ParamFunction.indicator(A, ParamFunction.factorial(3, 0), 1)
    s = ParamFunction.indicator(A, ParamFunction.factorial(3, -2), 0)
    t = ParamFunction.indicator(B, ParamFunction.factorial(3, 0), 0)
    return fA, s, t


def antichain_pair(A: SetRule, B: SetRule, depth: int, check_upto: int = 8,
                   ceiling: int = DEFAULT_CEILING) -> Separation:
    """Weights ``f_A``, ``f_B`` with ``fN(f_A)`` not inside ``fN(f_B)``."""
    if A == B or not A.difference_is_infinite(B):
        raise PreconditionError("A \\ B must be infinite")
    if not A.intersection_is_finite(B):
        raise NotAlmostDisjoint(f"{A} and {B} meet infinitely often")
    fA, s, t = antichain_profiles(A, B)
    fB = antichain_profiles(B, A)[0]
    checks = []
    for n in range(1, check_upto + 1):
        if n in A and n not in B:
            fsum = sum(ParamFunction.factorial(3, 0)(i) for i in range(1, n))
            middle = ParamFunction.factorial(3, -3)(n) * (n - 1)
            checks.append(FactorialCheck(n, sum(t(i) for i in range(1, n + 1)), fsum, middle, s(n)))
    plan = build_diagonal(s, t, depth, ceiling, name=f"antichain[{A}|{B}]")
    ledger = _ledger(s, fA, depth)
    # (3n-2)!/(3n)! = 1/((3n-1)3n) <= 1/(6n^2), whose tail past N is below 1/(6N)
    bound_terms = [Fraction(1, (3 * n - 1) * 3 * n) if n in A else Fraction(0)
                   for n in range(1, depth + 1)]
    ineqs = [(f"s({n})/f_A({n}) <= 1/((3n-1)3n)", ledger.terms[n - 1], bound_terms[n - 1])
             for n in range(1, depth + 1)]
    extra = {"f_A": fA, "f_B": fB, "s": s, "t": t, "checks": checks, "inequalities": ineqs,
             "tail_bound": Fraction(1, 6 * depth) if depth else None}
    return Separation(fA, fB, plan, ledger, "disjoint support of s and t on A \\ B", extra)
