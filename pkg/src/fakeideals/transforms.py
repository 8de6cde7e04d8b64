"""Conversions between covering systems.

Each transform returns a :class:`TransformResult`: the target system plus a
:class:`CoverageCertificate` carrying the stage map and every weight
inequality, checked with exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from .errors import (
    LedgerOverflowCeiling,
    MissingSupermultiplicativeCertificate,
    NoCertifiedTail,
    PreconditionError,
    RatioNotBelowC,
)
from .param import (
    DEFAULT_CEILING,
    ParamFunction,
    WeightLedger,
    check_supermultiplicative,
    triangular,
    triangular_index,
    weight_term,
)
from .systems import BlockSystem, IntervalPartition, MinusWitness, Point, PrefixSystem, Word


@dataclass(frozen=True)
class CoverageCertificate:
    kind: str
    stage_map: Callable[[int], int | None]
    stage_map_doc: str
    inequalities: tuple = ()  # (label, lhs, rhs) meaning lhs <= rhs
    notes: tuple = ()

    @property
    def holds(self) -> bool:
        return all(lhs <= rhs for _, lhs, rhs in self.inequalities)

    def failures(self):
        return [(label, lhs, rhs) for label, lhs, rhs in self.inequalities if not lhs <= rhs]


@dataclass(frozen=True)
class TransformResult:
    target: object
    certificate: CoverageCertificate
    extra: dict = field(default_factory=dict)


def _require_certified(h: ParamFunction) -> None:
    if h is None or not check_supermultiplicative(h, 2).certified:
        raise MissingSupermultiplicativeCertificate(f"no supermultiplicativity certificate for {h}")


# ---------------------------------------------------------------------------
# cylinder lists and levels

def cover_to_levels(sigmas: Sequence[Word], h: ParamFunction) -> TransformResult:
    levels: dict[int, set] = {}
    for s in sigmas:
        levels.setdefault(len(s), set()).add(tuple(s))
    input_sum = sum((weight_term(1, h(len(s))) for s in sigmas), Fraction(0))
    system = PrefixSystem.explicit(levels, h, name="cover_to_levels")
    top = max(levels, default=0)
    ledger = system.ledger(top, start=0)
    cert = CoverageCertificate(
        "cover_to_levels",
        stage_map=lambda i: len(sigmas[i]),
        stage_map_doc="cylinder i -> level |sigma_i|",
        inequalities=(("level ledger <= cylinder sum", ledger.partial_sum, input_sum),),
    )
    return TransformResult(system, cert, {"input_sum": input_sum, "ledger": ledger})


@dataclass(frozen=True)
class CoverResult:
    cut: int
    words: tuple
    tail_bound: Fraction
    depth: int


def levels_to_cover(system: PrefixSystem, eps, depth: int) -> CoverResult:
    """All words of levels past the least cut ``N`` whose certified tail is ``< eps``.

    Words are listed up to ``depth``; the certified tail covers the rest.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    if system.tail is None:
        raise NoCertifiedTail(f"system {system.name!r} only has partial sums")
    for N in range(depth + 1):
        t = system.tail(N)
        if t < eps:
            words = tuple(w for n in system.nonempty_levels(depth) if n > N
                          for w in sorted(system.level(n)))
            return CoverResult(N, words, t, depth)
    raise NoCertifiedTail(f"no cut N <= {depth} has tail below {eps}")


# ---------------------------------------------------------------------------
# E-style normalisation

def normalize_c(system: BlockSystem, mode: str, c, nblocks: int,
                ceiling: int = DEFAULT_CEILING) -> TransformResult:
    """Switch between the summable and the ratio-below-``c`` presentations."""
    c = Fraction(c)
    if system.quantifier != "forall":
        raise PreconditionError("normalize_c works on forall-style block systems")
    if not 0 < c < 1:
        raise PreconditionError("c must lie strictly between 0 and 1")
    h = system.h
    if mode == "to-c":
        if system.tail is None:
            raise NoCertifiedTail("to-c needs a certified tail")

        def bound(N):
            head = sum((system.ratio(n) for n in range(N + 1, nblocks)), Fraction(0))
            return head + system.tail(nblocks - 1)

        N = next((N for N in range(-1, nblocks) if bound(N) < c), None)
        if N is None:
            raise NoCertifiedTail(f"tail never drops below {c} within {nblocks} blocks")
        while N >= 0 and system.ratio(N) < c:
            N -= 1
        cut = N
        target = BlockSystem(system.partition,
                             lambda n, s=system, cut=cut: frozenset() if n <= cut else s.block(n),
                             "forall", h, f"{system.name}|emptied<= {cut}")
        ineqs = tuple((f"ratio {n} < c", target.ratio(n), c) for n in range(cut + 1, nblocks)
                      if target.ratio(n) >= c)
        cert = CoverageCertificate(
            "normalize_c:to-c", lambda n: n, "block n -> block n (blocks <= cut emptied)",
            tuple((f"ratio {n} <= c", target.ratio(n), c) for n in range(nblocks)),
            notes=(f"cut={cut}",) + tuple(f"strict failure {lbl}" for lbl, *_ in ineqs),
        )
        return TransformResult(target, cert, {"cut": cut})
    if mode != "to-summable":
        raise PreconditionError(f"unknown mode {mode!r}")
    _require_certified(h)
    # merged block k is the union of blocks n_k .. n_{k+1}-1 with n_k = k(k+1)/2
    K = 0
    while triangular(K + 1) <= nblocks:
        K += 1
    for n in range(triangular(K)):
        if system.ratio(n) > c:
            raise RatioNotBelowC(f"block {n} has ratio {system.ratio(n)} > {c}")
    part = system.partition
    bps = [part.breakpoint(triangular(k)) for k in range(K + 1)]
    merged: dict[int, set] = {}
    ineqs = []
    for k in range(K):
        members = range(triangular(k), triangular(k + 1))
        size = math.prod(len(system.block(j)) for j in members)
        if size > ceiling:
            raise LedgerOverflowCeiling(f"merged block {k} would hold {size} patterns")
        merged[k] = {sum(ws, ()) for ws in product(*(sorted(system.block(j)) for j in members))}
        ratio = weight_term(len(merged[k]), h(bps[k + 1] - bps[k]))
        prod_r = math.prod((system.ratio(j) for j in members), start=Fraction(1))
        ineqs.append((f"merged {k}: ratio <= product", ratio, prod_r))
        ineqs.append((f"merged {k}: product <= c^{k + 1}", prod_r, c ** (k + 1)))
        ineqs.append((f"merged {k}: ratio <= c^k", ratio, c ** k))
    mpart = IntervalPartition.explicit(bps, 1) if K else IntervalPartition.unit()
    target = BlockSystem.explicit(mpart, merged, "forall", h, name=f"{system.name}|merged")
    ledger = target.ledger(K - 1) if K else WeightLedger.of([])
    geo = sum((c ** k for k in range(K)), Fraction(0))
    ineqs.append(("merged ledger <= sum c^k", ledger.partial_sum, geo))
    cert = CoverageCertificate(
        "normalize_c:to-summable",
        lambda n: triangular_index(n),
        "block n -> merged block k with n in [k(k+1)/2, (k+1)(k+2)/2)",
        tuple(ineqs),
    )
    return TransformResult(target, cert, {"merged_blocks": K, "ledger": ledger})


# ---------------------------------------------------------------------------
# E to N

def _cumulative_products(system: BlockSystem, nblocks: int, ceiling: int):
    part = system.partition
    levels: dict[int, frozenset] = {}
    current = {()}
    last = 0
    for k in range(nblocks):
        L = part.breakpoint(k + 1)
        if L <= last:
            raise PreconditionError("cumulative lengths must strictly increase")
        last = L
        block = sorted(system.block(k))
        if len(current) * len(block) > ceiling:
            raise LedgerOverflowCeiling(f"level {L} would hold {len(current) * len(block)} words")
        current = {w + p for w in current for p in block}
        levels[L] = frozenset(current)
    return levels


def e_to_n(system: BlockSystem, nblocks: int, ceiling: int = DEFAULT_CEILING) -> TransformResult:
    """Concatenate block patterns into levels at cumulative lengths."""
    h = system.h
    _require_certified(h)
    levels = _cumulative_products(system, nblocks, ceiling)
    target = PrefixSystem.explicit(levels, h, name=f"{system.name}|e_to_n")
    ratios = [system.ratio(k) for k in range(nblocks)]
    C = math.prod((r for r in ratios if r > 1), start=Fraction(1))
    ineqs = []
    running = Fraction(1)
    part = system.partition
    for k in range(nblocks):
        L = part.breakpoint(k + 1)
        running *= ratios[k]
        term = weight_term(len(levels[L]), h(L))
        ineqs.append((f"level {L}: |S|/h <= product of ratios", term, running))
        ineqs.append((f"level {L}: product <= C * ratio_{k}", running, C * ratios[k]))
    total = sum((weight_term(len(ws), h(L)) for L, ws in levels.items()), Fraction(0))
    ineqs.append(("sum |S_n|/h(n) <= C * sum ratios", total, C * sum(ratios, Fraction(0))))
    cert = CoverageCertificate(
        "e_to_n",
        lambda k, part=part: part.breakpoint(k + 1),
        "x|I_i in J_i for all i <= k  =>  x|L_k in S_{L_k}, L_k = b_{k+1}",
        tuple(ineqs),
    )
    return TransformResult(target, cert, {"C": C, "ledger_total": total})


def fin_e_to_fin_n(system: BlockSystem, nblocks: int, ceiling: int = DEFAULT_CEILING) -> TransformResult:
    levels = _cumulative_products(system, nblocks, ceiling)
    part = system.partition
    target = PrefixSystem.explicit(levels, None, name=f"{system.name}|fin_e_to_fin_n")
    cert = CoverageCertificate(
        "fin_e_to_fin_n",
        lambda k, part=part: part.breakpoint(k + 1),
        "x|I_i in J_i for all i <= k  =>  x|L_k in S_{L_k}",
        notes=tuple(f"|S_{L}|={len(ws)}" for L, ws in sorted(levels.items())),
    )
    return TransformResult(target, cert)


# ---------------------------------------------------------------------------
# finiteness variants

def fin_n_to_fin_s(system: PrefixSystem) -> TransformResult:
    """Unit intervals; ``J_n`` holds the last entries of the words of ``S_{n+1}``."""
    def block(n, s=system):
        return frozenset((w[n],) for w in s.level(n + 1))

    target = BlockSystem(IntervalPartition.unit(), block, "exists", None, f"{system.name}|fin_n_to_fin_s")
    cert = CoverageCertificate("fin_n_to_fin_s", lambda n: n - 1 if n > 0 else None,
                               "level n+1 -> block n")
    return TransformResult(target, cert)


def fin_sigma_merge(systems: Sequence, flavor: str) -> TransformResult:
    """Merge finitely many finiteness systems; input k contributes from index k on."""
    systems = list(systems)
    if flavor == "N":
        if any(not isinstance(s, PrefixSystem) for s in systems):
            raise PreconditionError("N-style merge takes prefix systems")

        def level(n):
            out = set()
            for k, s in enumerate(systems[: n + 1]):
                out |= s.level(n)
            return frozenset(out)

        target = PrefixSystem(level, None, "merge[N]")
    elif flavor == "S":
        for s in systems:
            if not isinstance(s, BlockSystem) or s.partition != IntervalPartition.unit():
                raise PreconditionError("S-style merge needs unit-interval block systems")

        def block(n):
            out = set()
            for s in systems[: n + 1]:
                out |= s.block(n)
            return frozenset(out)

        target = BlockSystem(IntervalPartition.unit(), block, "exists", None, "merge[S]")
    else:
        raise PreconditionError("flavor must be 'N' or 'S'")
    cert = CoverageCertificate("fin_sigma_merge", lambda n: n,
                               "stage n of input k (n >= k) -> stage n")
    return TransformResult(target, cert, {"inputs": len(systems)})


def fin_to_param(system: PrefixSystem, depth: int) -> TransformResult:
    """Weight ``h(n) = |S_n| 2^n`` (``2^n`` on empty levels), tabulated to ``depth``."""
    sizes = [system.size(n) for n in range(depth + 1)]
    h = ParamFunction.table([(sz or 1) * 2 ** n for n, sz in enumerate(sizes)], ParamFunction.exp(2))
    levels = {n: system.level(n) for n in range(depth + 1) if sizes[n]}
    target = PrefixSystem.explicit(levels, h, name=f"{system.name}|fin_to_param")
    ledger = target.ledger(depth)
    ineqs = tuple((f"term {n} = 2^-n", t, Fraction(1, 2 ** n))
                  for n, t in enumerate(ledger.terms, start=ledger.start) if t)
    cert = CoverageCertificate(
        "fin_to_param", lambda n: n, "level n -> level n",
        ineqs + (("ledger <= 1", ledger.partial_sum, Fraction(1)),),
    )
    return TransformResult(target, cert, {"h": h, "ledger": ledger})


# ---------------------------------------------------------------------------
# regrouping into triangular blocks

def _regroup_blocks(system: PrefixSystem):
    part = IntervalPartition.triangular()

    def block(n, s=system):
        a, b = part.interval(n)
        lo, hi = part.interval(n + 1)
        return frozenset(w[a:b] for k in range(lo, hi) for w in s.level(k))

    return part, block


def regroup_n_to_s(system: PrefixSystem, h: ParamFunction, nblocks: int) -> TransformResult:
    """Triangular blocks with weight ``h'(n) = max{h(k) : k in I_n}``."""
    h_prime = ParamFunction.tri_max(h)
    part, block = _regroup_blocks(system)
    target = BlockSystem(part, block, "exists", h_prime, f"{system.name}|regroup")
    ineqs = []
    for n in range(nblocks):
        lo, hi = part.interval(n + 1)
        rhs = sum((weight_term(system.size(k), h(k)) for k in range(lo, hi)), Fraction(0))
        ineqs.append((f"block {n}", target.ratio(n), rhs))
    total_src = sum((weight_term(system.size(k), h(k)) for k in range(1, triangular(nblocks + 1))),
                    Fraction(0))
    ineqs.append(("block ledger <= level ledger", target.ledger(nblocks - 1).partial_sum, total_src))
    cert = CoverageCertificate(
        "regroup_n_to_s",
        lambda k: triangular_index(k) - 1 if k >= 1 else None,
        "level k in I_{n+1} -> block n",
        tuple(ineqs),
    )
    return TransformResult(target, cert, {"h_prime": h_prime})


def refit_param(h: ParamFunction, system: PrefixSystem | None = None, nblocks: int = 0) -> TransformResult:
    """``h'(k) = h(n)`` on ``I_n``; a system weighted by ``h'`` regroups into blocks weighted by ``h``."""
    h.require_limsup()
    h_prime = ParamFunction.tri_refit(h)
    if system is None:
        system = PrefixSystem.empty(h_prime)
    part, block = _regroup_blocks(system)
    target = BlockSystem(part, block, "exists", h, f"{system.name}|refit")
    ineqs = []
    for n in range(nblocks):
        lo, hi = part.interval(n + 1)
        rhs = sum((weight_term(system.size(k), h_prime(k)) for k in range(lo, hi)), Fraction(0))
        ineqs.append((f"block {n}", target.ratio(n), rhs))
    cert = CoverageCertificate(
        "refit_param",
        lambda k: triangular_index(k) - 1 if k >= 1 else None,
        "level k in I_{n+1} -> block n",
        tuple(ineqs),
    )
    return TransformResult(target, cert, {"h_prime": h_prime})


def ioe_to_minus(x: Point) -> MinusWitness:
    return MinusWitness(x, IntervalPartition.unit())


# ---------------------------------------------------------------------------
# the logarithmic regrouping bound

@dataclass(frozen=True)
class LogRemarkCheck:
    limit: int
    bound_failures: tuple[int, ...]  # n with (n+1)(n+2)/2 > n^2
    floored_failures: tuple[int, ...]  # n with floor(log2 max I_n) > 2 log2 n
    holds_from: int

    @property
    def notes(self) -> tuple[str, ...]:
        return (
            f"log2((n+1)(n+2)/2) <= 2 log2 n fails at n in {list(self.bound_failures)} "
            f"and holds for {self.holds_from} <= n <= {self.limit}",
            "the floored weight max{floor(log2 k) : k in I_n} <= 2 log2 n fails at "
            f"n in {list(self.floored_failures)} within 2 <= n <= {self.limit}",
        )


def log_remark_check(limit: int = 1_000_000, start: int = 2) -> LogRemarkCheck:
    """Exact desk check of ``h'(n) <= 2 log2 n`` for ``h = log2`` on triangular blocks."""
    bound_failures = []
    floored_failures = []
    for n in range(start, limit + 1):
        sq = n * n
        if (n + 1) * (n + 2) // 2 > sq:
            bound_failures.append(n)
        top = (n + 1) * (n + 2) // 2 - 1
        if 1 << (top.bit_length() - 1) > sq:  # 2^h'(n) > n^2
            floored_failures.append(n)
    holds_from = (max(bound_failures) + 1) if bound_failures else start
    return LogRemarkCheck(limit, tuple(bound_failures), tuple(floored_failures), holds_from)
