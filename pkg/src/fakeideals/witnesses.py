"""Theorem-specific constructions, each returned as a :class:`WitnessBundle`.

Every bundle keeps the constructed objects and a table of named checks.  A
check is a zero-argument callable returning ``(passed, detail)``; details are
exact (ints, Fractions, reports), never floats.

Two conventions for maxima of empty sets: a maximum of *positions* (the
non-ideal construction) is -1, a maximum of *values* is 0.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import (
    CaseNotApplicable,
    CounterexampleSearchFailed,
    NotIncreasing,
    PreconditionError,
    SearchCeilingExceeded,
)
from .param import (
    DEFAULT_CEILING,
    ParamFunction,
    WeightLedger,
    select_sparse_levels,
    triangular,
    weight_term,
)
from .systems import (
    BlockSystem,
    IntervalPartition,
    MembershipReport,
    MinusWitness,
    Point,
    PrefixSystem,
    TreeMap,
    Word,
    membership_report,
)

Check = Callable[[], tuple]


@dataclass
class WitnessBundle:
    tag: str
    objects: dict
    checks: dict[str, Check] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def run_checks(self) -> dict[str, tuple]:
        return {name: fn() for name, fn in self.checks.items()}

    def failures(self) -> list[str]:
        return [name for name, (ok, _) in self.run_checks().items() if not ok]

    @property
    def ok(self) -> bool:
        return not self.failures()


def _vmax(values) -> int:
    """Maximum of a set of values, 0 when empty."""
    return max(values, default=0)


def _levels(system, n: int) -> frozenset:
    return system.level(n) if isinstance(system, PrefixSystem) else frozenset(system(n))


# ---------------------------------------------------------------------------
# enumeration of finitely supported sequences

class RationalEnumeration:
    """Bijection ``n -> q_n`` onto eventually-zero sequences, in shells.

    Shell ``m`` holds the sequences supported in ``[0, m)`` with entries
    ``<= m`` that are not in an earlier shell, ordered lexicographically.
    Shells ``0..m-1`` together hold exactly ``m^(m-1)`` sequences, so any
    word of length ``<= L`` with entries ``<= E`` appears (zero-padded) at an
    index below ``(m+1)^m`` with ``m = max(L, E)``.
    """

    @staticmethod
    def shell_of(word: Word) -> int:
        w = list(word)
        while w and w[-1] == 0:
            w.pop()
        return max(len(w), max(w, default=0))

    @staticmethod
    def _start(m: int) -> int:
        return 0 if m == 0 else m ** (m - 1)

    @staticmethod
    def _prev_below(digits: Sequence[int], m: int) -> int:
        """Words of shells < m (as length-m words, last digit 0) lexicographically below ``digits``."""
        count = 0
        for i in range(m - 1):
            d = digits[i]
            count += min(d, m) * m ** (m - 2 - i)
            if d > m - 1:
                return count
        if digits[m - 1] > 0:
            count += 1
        return count

    def index(self, word: Word) -> int:
        m = self.shell_of(word)
        if m == 0:
            return 0
        digits = list(word[:m]) + [0] * (m - len(word[:m]))
        lex = 0
        for d in digits:
            lex = lex * (m + 1) + d
        return self._start(m) + lex - self._prev_below(digits, m)

    def __call__(self, n: int) -> Word:
        """``q_n`` as its shortest zero-free-tail word."""
        if n < 0:
            raise ValueError("index must be natural")
        if n == 0:
            return ()
        m = 1
        while (m + 1) ** m <= n:
            m += 1
        r = n - self._start(m)
        lo, hi = 0, (m + 1) ** m - 1  # find the lex value v with rank r

        def rank(v):
            digits = self._digits(v, m)
            return v - self._prev_below(digits, m)

        while lo < hi:
            mid = (lo + hi) // 2
            if rank(mid + 1) <= r:
                lo = mid + 1
            else:
                hi = mid
        w = list(self._digits(lo, m))
        while w and w[-1] == 0:
            w.pop()
        return tuple(w)

    @staticmethod
    def _digits(v: int, m: int) -> list[int]:
        out = []
        for _ in range(m):
            v, d = divmod(v, m + 1)
            out.append(d)
        return out[::-1]

    def point(self, n: int) -> Point:
        return Point.eventually_zero(self(n))

    @staticmethod
    def shell(m: int):
        """The words of shell ``m`` in enumeration order, trailing zeros stripped."""
        if m == 0:
            yield ()
            return
        for w in itertools.product(range(m + 1), repeat=m):
            if w[-1] == 0 and max(w) < m:
                continue
            w = list(w)
            while w[-1] == 0:
                w.pop()
            yield tuple(w)


# ---------------------------------------------------------------------------
# fN(h) is orthogonal to the meager ideal

def comeager_fakenull(h: ParamFunction, budget=1, count: int = 8,
                      ceiling: int = DEFAULT_CEILING) -> WitnessBundle:
    """Levels ``S_{h(k_n)} = {q_n | h(k_n)}``; the hit set is comeager."""
    budget = Fraction(budget)
    sparse = select_sparse_levels(h, budget, count=count, ceiling=ceiling, truncate=True)
    enum = RationalEnumeration()
    lengths = sparse.values
    table = {L: {tuple(enum(n)[:L]) + (0,) * max(0, L - len(enum(n)))} for n, L in enumerate(lengths)}

    def member(j, w, lengths=lengths):
        if j not in lengths:
            return False
        n = lengths.index(j)
        q = enum(n)
        return tuple(w) == tuple(q[:j]) + (0,) * max(0, j - len(q))

    system = PrefixSystem(level_fn=lambda j: frozenset(table.get(j, ())), h=h, name="comeager",
                          member=member, size_fn=lambda j: 1 if j in lengths else 0,
                          support=lambda d: [L for L in lengths if L <= d])
    bound = sparse.certified_sum_bound
    partial = sum((Fraction(1, h(k)) for k in sparse.ks), Fraction(0))

    def ledger_check():
        return (partial <= bound <= budget, {"partial": partial, "certified_bound": bound,
                                             "budget": budget})

    def density(max_len: int = 6, max_entry: int = 6, k: int = 0):
        return density_check(lengths, max_len, max_entry, k)

    b = WitnessBundle("fN(h) orthogonal to M", {"h": h, "sparse": sparse, "system": system,
                                                  "enumeration": enum})
    b.checks["ledger"] = ledger_check
    b.checks["density"] = density
    b.summary = {"ks": list(sparse.ks), "levels": list(lengths), "certified_bound": bound}
    b.notes.append("levels past the listed prefix have strictly larger lengths, so each index "
                   "n >= number of listed levels has h(k_n) > n")
    return b


def density_check(lengths: Sequence[int], max_len: int, max_entry: int, k: int = 0,
                  shell_limit: int = 8):
    """Every word with bounded length and entries meets some ``[q_n | h(k_n)]``, ``n >= k``.

    The enumeration is walked in order; each ``q_n`` with ``n >= k`` marks its
    zero-padded prefixes of length ``<= max_len`` as met.  A prefix of ``q_n``
    is compatible with ``q_n | h(k_n)`` whatever that length is, so only the
    enumeration matters.  Lengths ``h(k_n)`` increase strictly past the
    listed prefix, which the note on the bundle records.
    """
    enum = RationalEnumeration()
    wanted = sum((max_entry + 1) ** L for L in range(max_len + 1))
    met: set = set()
    n = 0
    for m in range(shell_limit + 1):
        for q in enum.shell(m):
            if n >= k:
                padded = q + (0,) * max(0, max_len - len(q))
                for L in range(max_len + 1):
                    w = padded[:L]
                    if not w or max(w) <= max_entry:
                        met.add(w)
            n += 1
        if len(met) == wanted:
            break
    return (len(met) == wanted, {"checked": wanted, "met": len(met), "enumerated": n})


# ---------------------------------------------------------------------------
# M_- : a nowhere dense positive set disjoint from a meager set

def b_from_a(a: TreeMap) -> TreeMap:
    @functools.lru_cache(maxsize=None)
    def b(sigma):
        top = max(len(a(sigma[:k])) for k in range(len(sigma) + 1))
        return (0,) * (top + _vmax(sigma) + 1)

    return TreeMap(f"b[{a.name}]", b)


def compose_a(a: TreeMap, b: TreeMap) -> TreeMap:
    """``a'(s) = a(s) + b(s + a(s))``: avoiding ``a'`` eventually covers both meager sets."""
    @functools.lru_cache(maxsize=None)
    def fn(sigma):
        head = tuple(a(sigma))
        return head + tuple(b(tuple(sigma) + head))

    return TreeMap(f"{a.name}*{b.name}", fn)


@dataclass(frozen=True)
class NwdTrace:
    xis: tuple[Word, ...]
    m: tuple[int, ...]
    i: tuple[int, ...]


def _nwd_escape(a: TreeMap, F: MinusWitness, stages: int, ceiling: int) -> NwdTrace:
    part = F.partition
    xi: Word = ()
    xis, ms, iis = [()], [], []
    for _ in range(stages):
        head = xi + tuple(a(xi))
        L = len(head)
        m = 0
        while not part.interval(m)[0] > L + 1:
            m += 1
            if m > ceiling:
                raise SearchCeilingExceeded("no interval starts far enough out")
        lo, hi = part.interval(m)
        i_n = hi  # max I_m + 1
        word = list(head) + [i_n] + [1] * (lo - L - 1)
        word += [F.pattern(j) for j in range(lo, hi)] + [1]
        xi = tuple(word)
        xis.append(xi)
        ms.append(m)
        iis.append(i_n)
    return NwdTrace(tuple(xis), tuple(ms), tuple(iis))


def _extension_inside(x: Word, k: int, ext: Word) -> bool | None:
    """Whether ``x|k + ext`` is a prefix of ``x``; None if undecided inside ``x``."""
    end = k + len(ext)
    for j, v in enumerate(ext):
        if k + j >= len(x):
            return None
        if x[k + j] != v:
            return False
    return end <= len(x)


def minus_positive_nwd(a: TreeMap, witnesses: Sequence[MinusWitness] = (), stages: int = 5,
                       ceiling: int = DEFAULT_CEILING) -> WitnessBundle:
    """``b`` from ``a`` and escape points in ``B \\ F`` for each supplied ``F``."""
    b = b_from_a(a)
    bundle = WitnessBundle("nowhere dense M_- positive set", {"a": a, "b": b, "points": {}, "traces": {}})
    if not witnesses:
        witnesses = [MinusWitness(Point.zeros(), IntervalPartition.unit())]
    for idx, F in enumerate(witnesses):
        trace = _nwd_escape(a, F, stages, ceiling)
        x = trace.xis[-1]
        bundle.objects["traces"][idx] = trace
        bundle.objects["points"][idx] = Point.eventually_zero(x)
        bundle.checks[f"F{idx}:not in A"] = _check_hits_a(a, trace)
        bundle.checks[f"F{idx}:matches pattern"] = _check_matches(F, trace)
        bundle.checks[f"F{idx}:in B"] = _check_avoids(b, x)
    bundle.summary = {idx: {"i": list(t.i), "m": list(t.m), "depth": len(t.xis[-1])}
                      for idx, t in bundle.objects["traces"].items()}
    bundle.notes.append("b uses the maximum of |a(s|k)| over k <= |s|; max of an empty word is 0")
    return bundle


def _check_hits_a(a: TreeMap, trace: NwdTrace) -> Check:
    def run():
        x = trace.xis[-1]
        bad = [n for n, xi in enumerate(trace.xis[:-1])
               if _extension_inside(x, len(xi), tuple(a(xi))) is not True]
        return (not bad, {"stages": len(trace.xis) - 1, "missing": bad})
    return run


def _check_matches(F: MinusWitness, trace: NwdTrace) -> Check:
    def run():
        x = trace.xis[-1]
        bad = []
        for m in trace.m:
            lo, hi = F.partition.interval(m)
            if x[lo:hi] != F.pattern.restrict(lo, hi):
                bad.append(m)
        return (not bad, {"blocks": list(trace.m), "mismatched": bad})
    return run


def _check_avoids(b: TreeMap, x: Word) -> Check:
    def run():
        caught, undecided = [], 0
        for k in range(len(x)):
            r = _extension_inside(x, k, tuple(b(x[:k])))
            if r is None:
                undecided += 1
            elif r:
                caught.append(k)
        return (not caught, {"checked": len(x), "caught": caught, "undecided": undecided})
    return run


def disjoint_positive_family(count: int, base_a: TreeMap,
                             witnesses: Sequence[MinusWitness] = (), stages: int = 4,
                             ceiling: int = DEFAULT_CEILING) -> WitnessBundle:
    """Pairwise disjoint nowhere dense ``M_-``-positive sets, each avoiding the ones before."""
    if count < 1:
        raise PreconditionError("count must be at least 1")
    members = []
    a = base_a
    for _ in range(count):
        nb = minus_positive_nwd(a, witnesses, stages, ceiling)
        members.append(nb)
        a = compose_a(a, nb.objects["b"])
    bundle = WitnessBundle("M_- is not add(M)-cc", {"members": members})
    for j, m in enumerate(members):
        for name, fn in m.checks.items():
            bundle.checks[f"member{j}:{name}"] = fn

    def cross():
        bad = []
        for j, mj in enumerate(members):
            xj = mj.objects["traces"][0].xis[-1]
            for i, mi in enumerate(members):
                if i == j:
                    continue
                if i < j:
                    # some s with s + b_i(s) inside x_j, so x_j misses B_i
                    bi = mi.objects["b"]
                    if not any(_extension_inside(xj, k, tuple(bi(xj[:k]))) for k in range(len(xj))):
                        bad.append((j, i, "no b_i extension found"))
                else:
                    # x_j avoids every s + a_i(s): it sits in the meager set B_i avoids
                    ai = mi.objects["a"]
                    if any(_extension_inside(xj, k, tuple(ai(xj[:k]))) for k in range(len(xj))):
                        bad.append((j, i, "a_i extension inside x_j"))
        return (not bad, {"pairs": count * (count - 1), "violations": bad})

    bundle.checks["cross-membership"] = cross
    bundle.summary = {"count": count, "depths": [len(m.objects["traces"][0].xis[-1]) for m in members]}
    return bundle


# ---------------------------------------------------------------------------
# fN(Fin) is not c-cc

def parity_escape(parity: Point, opponent, depth: int) -> WitnessBundle:
    """``y(n) = 2 max{s(n) : s in S_{n+1}} + 2 - parity(n)``."""
    ys = []
    for n in range(depth + 1):
        top = _vmax(w[n] for w in _levels(opponent, n + 1))
        ys.append(2 * top + 2 - parity(n))
    y = tuple(ys)
    bundle = WitnessBundle("fN(Fin) is not c-cc", {"y": Point.eventually_zero(y), "prefix": y})

    def parity_ok():
        bad = [n for n in range(depth + 1) if (y[n] + parity(n)) % 2]
        return (not bad, {"checked": depth + 1, "bad": bad})

    def avoids():
        bad = [n for n in range(1, depth + 1) if y[:n] in _levels(opponent, n)]
        return (not bad, {"checked": depth, "caught": bad})

    bundle.checks["parity"] = parity_ok
    bundle.checks["avoids opponent"] = avoids
    bundle.notes.append("the maximum is taken over S_{n+1}, whose words have a coordinate n")
    return bundle


# ---------------------------------------------------------------------------
# M_- is not inside D_omega

def minus_not_domega(f: TreeMap, depth: int) -> WitnessBundle:
    F = MinusWitness(Point.zeros(), IntervalPartition.constant(2))
    x: list[int] = []
    while len(x) < depth + 2:
        v = f(tuple(x))
        x += [v, v + 1]
    x = tuple(x[: depth + 2 - (depth % 2)])
    bundle = WitnessBundle("M_- not inside D_omega", {"F": F, "x": Point.eventually_zero(x), "prefix": x})

    def pairs():
        bad = [n for n in range(len(x) // 2) if x[2 * n] == x[2 * n + 1]]
        return (not bad, {"pairs": len(x) // 2, "equal": bad})

    def hits_f():
        bad = [n for n in range(0, len(x), 2) if x[n] != f(x[:n])]
        return (not bad, {"even stages": len(x) // 2, "misses": bad})

    def in_witness():
        rep = membership_report(F, Point.eventually_zero(x), len(x))
        return (not rep.hits, rep)

    bundle.checks["x in F"] = pairs
    bundle.checks["x(2n) = f(x|2n)"] = hits_f
    bundle.checks["F inside its M_- witness"] = in_witness
    return bundle


# ---------------------------------------------------------------------------
# fE(h) is not an ideal

@dataclass(frozen=True)
class RecursionState:
    a: tuple[int, ...]
    b: tuple[int, ...]
    Ea: tuple[int, ...]
    Eb: tuple[int, ...]
    steps: int

    def to_dict(self):
        return {"a": list(self.a), "b": list(self.b), "Ea": [str(v) for v in self.Ea],
                "Eb": [str(v) for v in self.Eb], "steps": self.steps}


def _min_l(h: ParamFunction, E: int, base: int, n: int, ceiling: int) -> int:
    """``min{l : E/h(l - base) < 2^-n}``, i.e. ``h(l - base) > E 2^n``."""
    d = h.next_at_least(E * 2 ** n + 1, 0, ceiling)
    return base + d


def _require_increasing(h: ParamFunction, scan: int = 64) -> None:
    if not h.is_monotone or any(h(k + 1) <= h(k) for k in range(scan)):
        raise NotIncreasing(f"{h} is not strictly increasing")


def recursion(h: ParamFunction, steps: int, ceiling: int = DEFAULT_CEILING) -> RecursionState:
    _require_increasing(h)
    a, b = [0], [0, 1]
    Ea = [h(1)]
    a.append(_min_l(h, Ea[0], 0, 1, ceiling))
    Eb = [h(0), h(a[1])]
    for n in range(2, steps + 1):
        b.append(_min_l(h, Eb[n - 1], b[n - 1], n, ceiling))
        Ea.append(h(b[n]))
        a.append(_min_l(h, Ea[n - 1], a[n - 1], n, ceiling))
        Eb.append(h(a[n]))
    return RecursionState(tuple(a), tuple(b), tuple(Ea), tuple(Eb), steps)


def rescan(h: ParamFunction, state: RecursionState, brute_limit: int = 4096) -> list[str]:
    """Recompute every min-search; brute linear scans below ``brute_limit``, boundary checks above."""
    bad = []

    def check(label, E, base, n, got):
        ok = lambda l: l > base and Fraction(E, h(l - base)) < Fraction(1, 2 ** n)  # noqa: E731
        if got <= brute_limit:
            want = next(l for l in range(base + 1, got + 2) if ok(l))
            if want != got:
                bad.append(f"{label}: stored {got}, brute scan {want}")
        elif not ok(got) or ok(got - 1):
            bad.append(f"{label}: {got} is not the least solution")

    check("a_1", state.Ea[0], 0, 1, state.a[1])
    for n in range(2, state.steps + 1):
        check(f"b_{n}", state.Eb[n - 1], state.b[n - 1], n, state.b[n])
        check(f"a_{n}", state.Ea[n - 1], state.a[n - 1], n, state.a[n])
    for n in range(1, state.steps):
        if state.Ea[n] != h(state.b[n + 1]) or state.Eb[n] != h(state.a[n]):
            bad.append(f"E values at step {n} drifted")
    return bad


def _free_coordinate_system(points: Sequence[int], E: Sequence[int], h: ParamFunction,
                            name: str, skip_first: bool = False) -> BlockSystem:
    part = IntervalPartition.explicit(points, 1)
    nblocks = len(points) - 1

    def size(n):
        if n >= nblocks or (skip_first and n == 0):
            return 0
        return E[n]

    def member(n, w):
        return n < nblocks and not (skip_first and n == 0) and w[0] < E[n] and not any(w[1:])

    def block(n):
        if size(n) > 10_000:
            raise SearchCeilingExceeded(f"block {n} of {name} holds {size(n)} patterns")
        ln = part.length(n)
        return frozenset((e,) + (0,) * (ln - 1) for e in range(size(n)))

    return BlockSystem(part, block, "forall", h, name, member=member, size_fn=size)


def e_not_ideal(h: ParamFunction, steps: int, ceiling: int = DEFAULT_CEILING) -> WitnessBundle:
    """``A, B`` in ``fE(h)`` whose union is in no ``fE(h)`` set."""
    st = recursion(h, steps, ceiling)
    A = _free_coordinate_system(st.a, st.Ea, h, "A")
    B = _free_coordinate_system(st.b, st.Eb, h, "B", skip_first=True)
    bundle = WitnessBundle("fE(h) is not an ideal", {"h": h, "state": st, "A": A, "B": B})

    def ledgers():
        out = {}
        ok = True
        for label, S, pts in (("A", A, st.a), ("B", B, st.b)):
            running = Fraction(0)
            for n in range(len(pts) - 1):
                running += S.ratio(n)
                bound = 1 - Fraction(1, 2 ** (n + 1))
                ok &= running <= bound
            out[label] = running
        return (ok, out)

    bundle.checks["recursion rescan"] = lambda: _rescan_check(h, st)
    bundle.checks["ledgers"] = ledgers
    bundle.summary = {"a": list(st.a), "b": list(st.b), "Ea_0": st.Ea[0], "Eb_1": st.Eb[1]}
    bundle.notes.append("B's first block [0, 1) carries no patterns; E(b_0) is never defined")
    return bundle


def _rescan_check(h, st):
    r = rescan(h, st)
    return (not r, r)


def _positions_max(points: set, lo: int, hi: int) -> int:
    return max((p for p in points if lo <= p < hi), default=-1)


def e_not_ideal_escape(bundle: WitnessBundle, C: BlockSystem, depth: int) -> tuple[Point, dict]:
    """A point of ``A \\ C`` (or ``B \\ C``, whichever branch applies in range)."""
    st: RecursionState = bundle.objects["state"]
    h = bundle.objects["h"]
    E = {"A": dict(zip(st.a, st.Ea)), "B": dict(zip(st.b, st.Eb))}
    pts = {"A": set(st.a[:-1]), "B": set(st.b[1:-1])}
    part = C.partition
    blocks = [n for n in part.blocks_within(depth)]
    for side, other in (("A", "B"), ("B", "A")):
        chosen = {}
        dropped = []
        for n in blocks:
            lo, hi = part.interval(n)
            top = _positions_max(pts[side], lo, hi)
            if top < 0 or top <= _positions_max(pts[other] | ({0} if other == "B" else set()), lo, hi):
                continue
            words = C.block(n)
            if not len(words) < h(part.length(n)) or not len(words) < E[side][top]:
                dropped.append(n)
                continue
            used = {w[top - lo] for w in words}
            chosen[n] = (top, next(e for e in range(len(used) + 1) if e not in used))
        if chosen:
            limit = max(part.interval(n)[1] for n in blocks) if blocks else 0
            x = [0] * limit
            for top, e in chosen.values():
                x[top] = e
            x = tuple(x)
            S = bundle.objects[side]
            bad_in = [k for k in range(len(getattr(st, side.lower())) - 1)
                      if S.partition.interval(k)[1] <= limit and
                      not S.contains(k, x[slice(*S.partition.interval(k))]) and
                      not (side == "B" and k == 0)]
            escaped = [n for n in chosen if not C.contains(n, x[slice(*part.interval(n))])]
            report = {"branch": side, "blocks": sorted(chosen), "dropped": dropped,
                      "in_side_failures": bad_in, "escaped": sorted(escaped),
                      "ok": not bad_in and len(escaped) == len(chosen)}
            return Point.eventually_zero(x), report
    raise CaseNotApplicable("no block in range separates A from B, in either direction")


# ---------------------------------------------------------------------------
# fE(n^2) is not inside fN(p)

def m_k(k: int) -> int:
    return triangular(triangular(k))


def e_square_vs_poly(p: ParamFunction, depth_blocks: int, ceiling: int = 400) -> WitnessBundle:
    if p.kind != "poly":
        raise PreconditionError("p must be a polynomial rule")
    part = IntervalPartition.triangular()
    A = BlockSystem.from_rule(part, lambda n: [(0,) * (n + 1), (1,) * (n + 1)], "forall",
                              ParamFunction.monomial(2), "A")

    def r(k):
        N = m_k(k + 2)
        return N * p(N)

    K = None
    for k in range(ceiling):
        if all(r(j) < 2 ** (j + 1) for j in range(k, k + depth_blocks + 2)):
            K = k
            break
    if K is None:
        raise SearchCeilingExceeded(f"no K below {ceiling} with r(k) < 2^(k+1) in range")
    bundle = WitnessBundle("fE(n^2) not inside fN(p)", {"p": p, "A": A, "K": K})
    bundle.summary = {"K": K, "m_K": m_k(K), "r_K": r(K)}
    bundle.notes.append("r(k) = m_{k+2} p(m_{k+2}) bounds sum_{j <= m_{k+2}} p(j) for monotone p")
    return bundle


def e_square_escape(bundle: WitnessBundle, opponent: PrefixSystem, depth_blocks: int):
    K = bundle.objects["K"]
    part = IntervalPartition.triangular()
    x = [0] * m_k(K)
    sigmas = []
    for k in range(K, K + depth_blocks):
        lo, hi = m_k(k), m_k(k + 1)
        blocks = list(range(triangular(k), triangular(k + 1)))
        forbidden = set()
        levels = [j for j in (opponent.support(m_k(k + 2)) if opponent.support else
                              range(m_k(k + 1) + 1, m_k(k + 2) + 1)) if j > m_k(k + 1)]
        for j in levels:
            for tau in opponent.level(j):
                seg = tau[lo:hi]
                bits = 0
                ok = True
                for bi, bn in enumerate(blocks):
                    a, b = part.interval(bn)
                    piece = seg[a - lo:b - lo]
                    if piece == (0,) * len(piece):
                        v = 0
                    elif piece == (1,) * len(piece):
                        v = 1
                    else:
                        ok = False
                        break
                    bits |= v << bi
                if ok:
                    forbidden.add(bits)
        choice = next((c for c in range(min(2 ** len(blocks), len(forbidden) + 1))
                       if c not in forbidden), None)
        if choice is None:
            raise CounterexampleSearchFailed(f"every 0/1 block choice on [{lo}, {hi}) is hit")
        sigmas.append(choice)
        for bi, bn in enumerate(blocks):
            a, b = part.interval(bn)
            x += [(choice >> bi) & 1] * (b - a)
    end = m_k(K + depth_blocks + 1)
    xs = tuple(x) + (0,) * (end - len(x))
    point = Point.eventually_zero(xs)

    def hits_a():
        first = triangular(K)
        blocks = [n for n in part.blocks_within(len(x)) if n >= first]
        bad = [n for n in blocks if xs[slice(*part.interval(n))] not in A_patterns(part, n)]
        return (not bad, {"blocks": len(blocks), "misses": bad})

    def avoids():
        lo = m_k(K + 1) + 1
        levels = opponent.support(end) if opponent.support else range(lo, end + 1)
        bad = [j for j in levels if lo <= j <= end and opponent.contains(j, xs[:j])]
        return (not bad, {"window": (lo, end), "caught": bad})

    return point, {"sigmas": sigmas, "x in A past K": hits_a(), "avoids opponent": avoids()}


def A_patterns(part, n):
    ln = part.length(n)
    return {(0,) * ln, (1,) * ln}


# ---------------------------------------------------------------------------
# fS(h) is not inside fN(Fin)

def _interleaved_partition(ks: Sequence[int]) -> IntervalPartition:
    lengths = []
    for k in ks:
        lengths += [1, k]
    return IntervalPartition.from_lengths(lengths, 1)


def s_not_in_fin(h: ParamFunction, depth: int, budget=1, ceiling: int = DEFAULT_CEILING) -> WitnessBundle:
    h.require_limsup()
    count = 4
    while True:
        sparse = select_sparse_levels(h, Fraction(budget), count=count, ceiling=ceiling, truncate=True)
        total = sum(k + 1 for k in sparse.ks)
        if total > depth or sparse.truncated or count > 4 * depth + 8:
            break
        count *= 2
    part = _interleaved_partition(sparse.ks)
    nblocks = 2 * len(sparse.ks)

    def block(n):
        if n % 2 == 0 or n >= nblocks:
            return ()
        return [(0,) * part.length(n)]

    A = BlockSystem.from_rule(part, block, "exists", h, "A")
    bundle = WitnessBundle("fS(h) not inside fN(Fin)", {"h": h, "A": A, "sparse": sparse,
                                                        "nblocks": nblocks})
    bundle.checks["ledger"] = lambda: (A.ledger(nblocks - 1).partial_sum <= sparse.certified_sum_bound,
                                       A.ledger(nblocks - 1).partial_sum)
    bundle.summary = {"ks": list(sparse.ks), "odd lengths": [part.length(2 * i + 1) for i in range(len(sparse.ks))]}
    bundle.notes.append("the singleton coordinate a looks ahead at levels a+1 .. max I_{2n+1}+1")
    return bundle


def s_not_in_fin_escape(bundle: WitnessBundle, opponent, depth: int):
    A: BlockSystem = bundle.objects["A"]
    part = A.partition
    y: list[int] = []
    n = 0
    while len(y) < depth:
        a, _ = part.interval(2 * n)
        _, end = part.interval(2 * n + 1)
        top = _vmax(t[a] for j in range(a + 1, end + 2) for t in _levels(opponent, j))
        y.append(top + 1)
        y += [0] * (end - a - 1)
        n += 1
    y = tuple(y)
    point = Point.eventually_zero(y)

    def odd_hits():
        blocks = [b for b in part.blocks_within(len(y)) if b % 2 == 1]
        rep = membership_report(A, point, len(y))
        return (set(blocks) <= set(rep.hits), rep)

    def avoids():
        bad = [k for k in range(1, min(depth, len(y)) + 1) if y[:k] in _levels(opponent, k)]
        return (not bad, {"checked": min(depth, len(y)), "caught": bad})

    return point, {"odd blocks hit": odd_hits(), "avoids opponent": avoids()}


# ---------------------------------------------------------------------------
# union of fS(h) is strictly inside fS(Fin)

def s_fin_strict_escape(opponent: BlockSystem, depth: int):
    """A point with infinitely many zeros that misses the opponent's blocks in range."""
    part = opponent.partition
    blocks = list(part.blocks_within(depth))
    x: list[int] = []
    zeros_in = []
    for n in blocks:
        lo, hi = part.interval(n)
        words = opponent.block(n)
        seg = [0] * (hi - lo)
        if tuple(seg) in words:
            pos = 1 if hi - lo > 1 else 0
            seg[pos] = _vmax(w[pos] for w in words) + 1
        if 0 in seg:
            zeros_in.append(n)
        x += seg
    x = tuple(x)
    branch = "nontrivial" if any(part.length(n) > 1 for n in blocks) else "degenerate"
    point = Point.eventually_zero(x)
    caught = [n for n in blocks if opponent.contains(n, x[slice(*part.interval(n))])]
    multi = [n for n in blocks if part.length(n) > 1]
    report = {"branch": branch, "caught": caught, "zero blocks": zeros_in,
              "long blocks without zero": [n for n in multi if n not in zeros_in],
              "zeros": [k for k, v in enumerate(x) if v == 0]}
    report["ok"] = not caught and not report["long blocks without zero"]
    return point, report


# ---------------------------------------------------------------------------
# fS(h) is orthogonal to M_-

def s_orth_minus(h: ParamFunction, budget=1, count: int = 12,
                 ceiling: int = DEFAULT_CEILING) -> WitnessBundle:
    h.require_limsup()
    sparse = select_sparse_levels(h, Fraction(budget), count=count, ceiling=ceiling, truncate=True)
    part = IntervalPartition.from_lengths(sparse.ks, sparse.ks[-1])
    n_listed = len(sparse.ks)
    A = BlockSystem.from_rule(part, lambda n: [(0,) * part.length(n)] if n < n_listed else [],
                              "exists", h, "A")
    comp = MinusWitness(Point.zeros(), part)
    bundle = WitnessBundle("fS(h) orthogonal to M_-", {"h": h, "A": A, "complement": comp,
                                                       "sparse": sparse})

    def ledger():
        total = A.ledger(n_listed - 1).partial_sum
        return (total <= sparse.certified_sum_bound <= Fraction(budget), total)

    bundle.checks["ledger"] = ledger
    bundle.summary = {"lengths": list(sparse.ks)}
    return bundle


def split_check(bundle: WitnessBundle, x: Point, depth: int) -> tuple[bool, dict]:
    """Block hits of ``A`` and avoidance blocks of the complement partition the range."""
    A, comp = bundle.objects["A"], bundle.objects["complement"]
    n_listed = len(bundle.objects["sparse"].ks)
    blocks = [n for n in A.partition.blocks_within(depth) if n < n_listed]
    hits = set(membership_report(A, x, depth).hits)
    matches = set(membership_report(comp, x, depth).hits) & set(blocks)
    avoid = set(blocks) - matches
    ok = hits | avoid == set(blocks) and not hits & avoid
    return ok, {"hits": sorted(hits), "avoid": sorted(avoid)}


# ---------------------------------------------------------------------------
# fN(Fin) is not orthogonal to M_-

def n_fin_not_orth_escape(F: MinusWitness, opponent, depth: int):
    if any(F.pattern(k) for k in range(depth + 1)):
        raise PreconditionError("the pattern must be all zeros")
    part = F.partition
    y: dict[int, int] = {}
    m = 0
    prev_b = -1
    while prev_b < depth:
        lo, hi = part.interval(2 * m + 1)
        a, b = lo - 1, hi - 1
        for k in range(prev_b + 1, a):
            y[k] = _vmax(s[k] for s in _levels(opponent, k + 1)) + 1
        y[a] = _vmax(s[a] for i in range(a + 1, b + 2) for s in _levels(opponent, i)) + 1
        for k in range(a + 1, b + 1):
            y[k] = 0
        prev_b = b
        m += 1
    ys = tuple(y[k] for k in range(prev_b + 1))
    point = Point.eventually_zero(ys)

    def matches():
        odd = [n for n in part.blocks_within(len(ys)) if n % 2 == 1]
        bad = [n for n in odd if any(ys[slice(*part.interval(n))])]
        return (not bad, {"odd blocks": odd, "mismatched": bad})

    def avoids():
        bad = [n for n in range(1, depth + 1) if ys[:n] in _levels(opponent, n)]
        return (not bad, {"checked": depth, "caught": bad})

    return point, {"matches pattern on odd blocks": matches(), "avoids opponent": avoids()}


# ---------------------------------------------------------------------------
# cof(fN(Fin)) <= d and add(fN(Fin)) >= b, on finite families

def dominating_envelope(f: ParamFunction) -> PrefixSystem:
    def member(n, w):
        return len(w) == n and all(0 <= w[i] <= f(i) for i in range(n))

    def size(n):
        return math.prod(f(i) + 1 for i in range(n))

    def level(n):
        if size(n) > 100_000:
            raise SearchCeilingExceeded(f"box at level {n} holds {size(n)} words")
        return frozenset(itertools.product(*(range(f(i) + 1) for i in range(n))))

    return PrefixSystem(level, None, f"envelope[{f}]", member=member, size_fn=size)


@dataclass(frozen=True)
class EnvelopeResult:
    threshold: int | None
    violations: tuple  # (level, coordinate, value, bound)

    @property
    def ok(self) -> bool:
        return self.threshold is not None


def envelope_contains(opponent, f: ParamFunction, depth: int) -> EnvelopeResult:
    """Least ``N`` with ``T_n`` inside the box of ``f`` for ``N <= n <= depth``."""
    violations = []
    last_bad = -1
    for n in range(depth + 1):
        for w in sorted(_levels(opponent, n)):
            bad = next(((i, w[i]) for i in range(n) if w[i] > f(i)), None)
            if bad:
                violations.append((n, bad[0], bad[1], f(bad[0])))
                last_bad = n
                break
    if last_bad == depth:
        return EnvelopeResult(None, tuple(violations))
    return EnvelopeResult(last_bad + 1, tuple(violations))


def bounding_merge(opponents: Sequence, depth: int) -> WitnessBundle:
    """``f`` bounding every ``f_alpha``; ``T_n`` holds words with entries ``< f(n)``."""
    fa = []
    for S in opponents:
        fa.append([_vmax(x[k] for x in _levels(S, n + 1) for k in range(n + 1)) for n in range(depth + 1)])
    values = []
    running = 0
    for n in range(depth + 1):
        running = max([running] + [row[n] for row in fa])
        values.append(running + 1)
    f = ParamFunction.table(values, ParamFunction.const(values[-1]))

    def member(n, w):
        return len(w) == n and all(0 <= v < f(n) for v in w)

    def size(n):
        return f(n) ** n

    def level(n):
        if size(n) > 100_000:
            raise SearchCeilingExceeded(f"merged level {n} holds {size(n)} words")
        return frozenset(itertools.product(range(f(n)), repeat=n))

    merged = PrefixSystem(level, None, "merged", member=member, size_fn=size)
    thresholds = []
    for S in opponents:
        last_bad = -1
        for n in range(depth + 1):
            if any(not member(n, w) for w in _levels(S, n)):
                last_bad = n
        thresholds.append(last_bad + 1 if last_bad < depth else None)
    bundle = WitnessBundle("add(fN(Fin)) >= b", {"f": f, "f_alpha": fa, "merged": merged,
                                                 "thresholds": thresholds})

    def inclusion():
        bad = []
        for idx, (S, thr) in enumerate(zip(opponents, thresholds)):
            if thr is None:
                bad.append(idx)
                continue
            for n in range(thr, depth + 1):
                if any(not merged.contains(n, w) for w in _levels(S, n)):
                    bad.append(idx)
                    break
        return (not bad, {"thresholds": thresholds, "failed": bad})

    bundle.checks["inclusion"] = inclusion
    bundle.summary = {"f": values, "thresholds": thresholds}
    bundle.notes.append("f is the running maximum of max_alpha f_alpha, plus 1")
    return bundle
