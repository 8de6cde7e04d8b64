"""transforms: exact ledgers and the stage-wise coverage oracle."""

import itertools
import math
from fractions import Fraction

import pytest

from fakeideals import transforms as tf
from fakeideals.errors import (
    MissingSupermultiplicativeCertificate,
    NoCertifiedTail,
    PreconditionError,
    RatioNotBelowC,
)
from fakeideals.param import ParamFunction as P, triangular_index
from fakeideals.systems import BlockSystem, IntervalPartition, Point, PrefixSystem

ALPHABET, DEPTH = 3, 6
POINTS = [tuple(w) for w in itertools.product(range(ALPHABET), repeat=DEPTH)]


def in_levels(S, x, n):
    return tuple(x[:n]) in S.level(n)


# -- cover_to_levels / levels_to_cover -------------------------------------------

def test_cover_to_levels():
    r = tf.cover_to_levels([(0,), (1, 1)], P.exp(2))
    assert r.target.level(1) == {(0,)} and r.target.level(2) == {(1, 1)}
    assert r.extra["ledger"].partial_sum == Fraction(3, 4)
    assert tf.cover_to_levels([], P.exp(2)).extra["ledger"].partial_sum == 0
    r = tf.cover_to_levels([(0, 0, 0), (1, 0, 0)], P.exp(2))
    assert len(r.target.level(3)) == 2 and r.extra["ledger"].partial_sum == Fraction(2, 8)
    assert r.certificate.holds


def test_levels_to_cover_geometric_tail():
    S = PrefixSystem.from_rule(lambda n: [(0,) * n], P.exp(2), tail=lambda N: Fraction(1, 2 ** N))
    c = tf.levels_to_cover(S, Fraction(1, 4), 10)
    # [DERIVED] tail past N is 2^-N; least N with 2^-N < 1/4 is 3
    assert c.cut == 3 and c.tail_bound == Fraction(1, 8)
    assert c.words == tuple((0,) * n for n in range(4, 11))


def test_levels_to_cover_small_cases():
    assert tf.levels_to_cover(PrefixSystem.empty(P.exp(2)), Fraction(1, 2), 5).words == ()
    one = PrefixSystem.explicit({5: [(1, 2, 3, 4, 5)]}, P.exp(2))
    c = tf.levels_to_cover(one, Fraction(1, 16), 8)
    assert c.cut < 5 and c.words == ((1, 2, 3, 4, 5),) and c.tail_bound == Fraction(1, 32)
    with pytest.raises(NoCertifiedTail):
        tf.levels_to_cover(PrefixSystem.from_rule(lambda n: [], P.exp(2)), Fraction(1, 2), 3)


# -- normalize_c ---------------------------------------------------------------

def test_to_summable_ratio_bound():
    B = BlockSystem.from_rule(IntervalPartition.unit(), lambda n: [(0,)], "forall", P.exp(2))
    r = tf.normalize_c(B, "to-summable", Fraction(1, 2), 15)
    tgt = r.target
    for k in range(1, 5):
        assert tgt.ratio(k) <= Fraction(1, 2) ** k  # [PAPER] c^k bound, exact
    assert r.certificate.holds


def test_to_c_empties_prefix():
    part = IntervalPartition.explicit([0, 1, 3, 6], 1)
    B = BlockSystem.explicit(part, {0: [(0,)], 1: [(0, 0)], 2: [(0, 0, 0)]}, "forall", P.exp(2))
    assert B.ledger(2).partial_sum == Fraction(7, 8)
    r = tf.normalize_c(B, "to-c", Fraction(1, 3), 3)
    assert r.extra["cut"] == 0
    assert [r.target.ratio(n) for n in range(3)] == [0, Fraction(1, 4), Fraction(1, 8)]


def test_normalize_preconditions():
    B = BlockSystem.from_rule(IntervalPartition.unit(), lambda n: [(0,), (1,)], "forall", P.exp(2))
    with pytest.raises(RatioNotBelowC):
        tf.normalize_c(B, "to-summable", Fraction(1, 2), 6)
    Bsq = BlockSystem.from_rule(IntervalPartition.unit(), lambda n: [], "forall", P.monomial(2))
    with pytest.raises(MissingSupermultiplicativeCertificate):
        tf.normalize_c(Bsq, "to-summable", Fraction(1, 2), 6)
    with pytest.raises(PreconditionError):
        tf.normalize_c(B, "to-c", Fraction(3, 2), 6)


def test_normalize_empty_system_unchanged():
    E = BlockSystem.explicit(IntervalPartition.unit(), {}, "forall", P.exp(2))
    for mode in ("to-c", "to-summable"):
        r = tf.normalize_c(E, mode, Fraction(1, 2), 6)
        assert all(not r.target.block(n) for n in range(3))


# -- e_to_n ---------------------------------------------------------------------

def _two_blocks(h=P.exp(2)):
    part = IntervalPartition.explicit([0, 2, 4], 1)
    return BlockSystem.explicit(part, {0: [(0, 0), (0, 1)], 1: [(0, 0)]}, "forall", h)


def test_e_to_n_example():
    r = tf.e_to_n(_two_blocks(), 2)
    assert len(r.target.level(2)) == 2
    assert r.target.level(4) == {(0, 0, 0, 0), (0, 1, 0, 0)}
    assert r.extra["ledger_total"] == Fraction(5, 8)  # [DERIVED] 2/4 + 2/16
    assert r.certificate.holds


def test_e_to_n_small_cases():
    one = BlockSystem.explicit(IntervalPartition.explicit([0, 3], 1), {0: [(1, 1, 1)]}, "forall", P.exp(2))
    assert tf.e_to_n(one, 1).extra["ledger_total"] == Fraction(1, 8)
    empty = BlockSystem.explicit(IntervalPartition.constant(2), {}, "forall", P.exp(2))
    assert all(not tf.e_to_n(empty, 3).target.level(n) for n in range(8))
    with pytest.raises(MissingSupermultiplicativeCertificate):
        tf.e_to_n(_two_blocks(P.monomial(2)), 2)


def test_e_to_n_weight_bound_random():
    import random
    rng = random.Random(7)
    for _ in range(50):
        lengths = [rng.randint(1, 3) for _ in range(rng.randint(1, 5))]
        part = IntervalPartition.from_lengths(lengths, 1)
        blocks = {n: {tuple(rng.randint(0, 2) for _ in range(L)) for _ in range(rng.randint(0, 4))}
                  for n, L in enumerate(lengths)}
        B = BlockSystem.explicit(part, blocks, "forall", P.exp(2))
        r = tf.e_to_n(B, len(lengths))
        ratios = [B.ratio(n) for n in range(len(lengths))]
        C = math.prod((x for x in ratios if x > 1), start=Fraction(1))
        assert r.extra["ledger_total"] <= C * sum(ratios)


# -- stage-wise coverage oracle --------------------------------------------------

def test_coverage_e_to_n_and_fin_variant():
    B = BlockSystem.explicit(IntervalPartition.constant(2),
                             {0: [(0, 0), (0, 1)], 1: [(0, 0), (1, 2)], 2: [(2, 2), (0, 1)]},
                             "forall", P.exp(2))
    for transform in (tf.e_to_n, tf.fin_e_to_fin_n):
        r = transform(B, 3)
        for x in POINTS:
            for k in range(3):
                if all(x[2 * i:2 * i + 2] in B.block(i) for i in range(k + 1)):
                    assert in_levels(r.target, x, r.certificate.stage_map(k))


def test_coverage_fin_n_to_fin_s():
    S = PrefixSystem.explicit({1: [(2,)], 2: [(3, 5), (0, 1)], 4: [(1, 1, 2, 0)], 6: [(0,) * 6]})
    r = tf.fin_n_to_fin_s(S)
    for x in POINTS:
        for n in range(1, DEPTH + 1):
            if in_levels(S, x, n):
                assert r.target.contains(r.certificate.stage_map(n), x[n - 1:n])


def test_fin_n_to_fin_s_examples():
    r = tf.fin_n_to_fin_s(PrefixSystem.explicit({2: [(3, 5), (3, 6)]}))
    assert r.target.block(1) == {(5,), (6,)}
    assert tf.fin_n_to_fin_s(PrefixSystem.explicit({1: [(9,)]})).target.block(0) == {(9,)}
    assert not any(tf.fin_n_to_fin_s(PrefixSystem.empty()).target.block(n) for n in range(5))


def test_coverage_sigma_merge():
    systems = [PrefixSystem.explicit({n: [tuple((n + k) % 3 for _ in range(n))] for n in range(1, 7)})
               for k in range(3)]
    r = tf.fin_sigma_merge(systems, "N")
    for x in POINTS:
        for k, S in enumerate(systems):
            for n in range(k, DEPTH + 1):
                if in_levels(S, x, n):
                    assert in_levels(r.target, x, n)
    assert r.target.level(5) == systems[0].level(5) | systems[1].level(5) | systems[2].level(5)


def test_sigma_merge_s_style():
    u = IntervalPartition.unit()
    A = BlockSystem.explicit(u, {n: [(n % 3,)] for n in range(6)})
    B = BlockSystem.explicit(u, {n: [(1,)] for n in range(6)})
    r = tf.fin_sigma_merge([A, B], "S")
    for n in range(1, 6):
        assert len(r.target.block(n)) <= len(A.block(n)) + len(B.block(n))
    one = tf.fin_sigma_merge([A], "S")
    assert all(one.target.block(n) == A.block(n) for n in range(6))
    with pytest.raises(PreconditionError):
        tf.fin_sigma_merge([A], "Q")


def _levels_system(h):
    return PrefixSystem.explicit({1: [(0,)], 3: [(1, 0, 2)], 4: [(0, 1, 1, 0)], 6: [(2,) * 6]}, h)


@pytest.mark.parametrize("name", ["regroup", "refit"])
def test_coverage_regrouping(name):
    if name == "regroup":
        S = _levels_system(P.exp(2))
        r = tf.regroup_n_to_s(S, P.exp(2), 3)
    else:
        S = _levels_system(P.tri_refit(P.exp(2)))
        r = tf.refit_param(P.exp(2), S, 3)
    assert r.certificate.holds
    for x in POINTS:
        for k in range(1, DEPTH + 1):
            if in_levels(S, x, k):
                n = r.certificate.stage_map(k)
                assert n == triangular_index(k) - 1
                a, b = r.target.partition.interval(n)
                assert r.target.contains(n, x[a:b])


def test_coverage_ioe_to_minus():
    pattern = Point.periodic((), (1, 2, 0))
    w = tf.ioe_to_minus(pattern)
    for x in POINTS:
        for n in range(DEPTH):
            agrees = x[n] == pattern(n)
            a, b = w.partition.interval(n)
            assert agrees == (x[a:b] == pattern.restrict(a, b))


def test_regroup_single_word():
    S = PrefixSystem.explicit({4: [(5, 6, 7, 8)]}, P.exp(2))
    r = tf.regroup_n_to_s(S, P.exp(2), 3)
    assert r.target.block(1) == {(6, 7)}  # [DERIVED] 4 lies in I_2, restrict to I_1 = [1, 3)
    assert not tf.regroup_n_to_s(PrefixSystem.empty(P.exp(2)), P.exp(2), 3).target.block(1)


def test_refit_examples():
    r = tf.refit_param(P.exp(2))
    assert r.extra["h_prime"](4) == 4
    with pytest.raises(PreconditionError):
        tf.refit_param(P.const(2))
    assert tf.refit_param(P.factorial(1, 0)).extra["h_prime"].has_limsup


def test_ioe_patterns():
    for x in (Point.zeros(), Point.periodic((), (1, 2)), Point.identity()):
        w = tf.ioe_to_minus(x)
        assert w.pattern == x and w.partition == IntervalPartition.unit()


# -- fin_to_param -----------------------------------------------------------------

def test_fin_to_param_examples():
    r = tf.fin_to_param(PrefixSystem.explicit({3: [(i, 0, 0) for i in range(5)]}), 6)
    assert r.extra["h"](3) == 40 and r.extra["ledger"].partial_sum == Fraction(1, 8)
    ones = PrefixSystem.from_rule(lambda n: [(0,) * n])
    r = tf.fin_to_param(ones, 6)
    assert [r.extra["h"](n) for n in range(7)] == [2 ** n for n in range(7)]
    r = tf.fin_to_param(PrefixSystem.empty(), 5)
    assert r.extra["h"](4) == 16 and r.extra["ledger"].partial_sum == 0


def test_log_remark_small():
    r = tf.log_remark_check(10 ** 4)
    assert r.bound_failures == (2, 3) and r.holds_from == 4
    # [DERIVED] independent oracle for the bound, exact integers
    assert [n for n in range(2, 200) if (n + 1) * (n + 2) // 2 > n * n] == [2, 3]
