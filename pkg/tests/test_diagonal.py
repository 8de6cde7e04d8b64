"""diagonal: hypothesis scans, plan invariants, escapes and separation drivers."""

from fractions import Fraction

import pytest

from fakeideals import diagonal as dg
from fakeideals.errors import DepthExhausted, HypothesisViolated, PreconditionError, SearchCeilingExceeded
from fakeideals.param import ParamFunction as P, SetRule
from fakeideals.systems import PrefixSystem, membership_report

TWOS = P.table([0], P.const(2))
ONES = P.const(1)


def test_check_hypothesis_example():
    # [DERIVED] 2(N-3+1) > N first at N = 5
    assert dg.check_hypothesis(TWOS, ONES, 3, k_min=3) == [(3, 5)]
    oracle = next(N for N in range(3, 100) if 2 * (N - 2) > N)
    assert oracle == 5


def test_check_hypothesis_least_n_oracle():
    s, t = P.table([0, 3, 1, 4, 1, 5], P.const(2)), P.table([0, 1, 0, 2], P.const(1))
    for k, N in dg.check_hypothesis(s, t, 8):
        lhs = lambda M: sum(s(i) for i in range(k, M + 1))  # noqa: E731
        rhs = lambda M: sum(t(i) for i in range(1, M + 1))  # noqa: E731
        assert lhs(N) > rhs(N) and all(lhs(M) <= rhs(M) for M in range(k, N))


def test_corollary_bound():
    s = P.table([0, 3, 1, 4, 1, 5, 9, 2, 6], P.const(1))
    t = P.minus(s, 1)
    for k in range(1, 8):
        N = dg.corollary_N(s, k)
        assert N == sum(s(i) for i in range(1, k + 1)) + 1  # [PAPER] sufficient N
        assert dg.hypothesis_holds(s, t, k, N)


def test_check_hypothesis_failure():
    with pytest.raises(SearchCeilingExceeded):
        dg.check_hypothesis(P.const(0), ONES, 1, ceiling=200)


def test_plan_invariants_depth_40():
    plan = dg.build_diagonal(TWOS, ONES, 40)
    assert all(plan.size(n) == 2 == len(plan.level(n)) for n in range(1, 41))
    assert plan.check_sizes() == [] and plan.check_extension() == [] and plan.check_breakpoints() == []


def test_plan_unit_sizes_breakpoints():
    plan = dg.build_diagonal(P.table([0], P.const(1)), P.const(0), 20)
    assert plan.check_breakpoints() == []
    assert all(w.hi == w.lo + 1 for w in plan.windows)  # next level already gives sum s > 0


def test_plan_empty():
    plan = dg.build_diagonal(P.const(0), ONES, 30)
    assert plan.base_level is None and plan.windows == []
    with pytest.raises(DepthExhausted):
        dg.escape(plan, PrefixSystem.empty(), 1)


def test_plan_shift_when_s0_positive():
    plan = dg.build_diagonal(P.const(2), ONES, 20)
    assert plan.offset == 1 and plan.check_sizes() == []


def test_escape_zero_opponent():
    plan = dg.build_diagonal(TWOS, ONES, 2000)
    T = PrefixSystem.from_rule(lambda n: [(0,) * n])
    x, cert = dg.escape(plan, T, 2)
    assert cert.hit_levels == [1, 4, 256]
    assert dg.verify_escape(plan, T, cert) == []
    rep = membership_report(plan.system(), x, cert.checked_depth)
    assert list(rep.hits) == cert.hit_levels
    assert membership_report(T, x, cert.checked_depth, cert.n0 + 1).hits == ()


def test_escape_empty_opponent():
    plan = dg.build_diagonal(TWOS, ONES, 300)
    x, cert = dg.escape(plan, PrefixSystem.empty(), 2)
    assert len(cert.stages) == 2 and dg.verify_escape(plan, PrefixSystem.empty(), cert) == []


def test_escape_against_own_levels():
    plan = dg.build_diagonal(TWOS, ONES, 100)
    with pytest.raises(HypothesisViolated):
        dg.escape(plan, plan.system(), 2)


def test_escape_ten_stages_exhausts_depth():
    # hit levels grow tower-like, so ten stages never fit a desk-scale plan
    plan = dg.build_diagonal(TWOS, ONES, 2000)
    T = PrefixSystem.from_rule(lambda n: [(0,) * n])
    with pytest.raises(DepthExhausted):
        dg.escape(plan, T, 10)
    _, cert = dg.escape(plan, T, 10, allow_partial=True)
    assert cert.exhausted and len(cert.stages) < 10


def test_escape_deterministic():
    plan = dg.build_diagonal(TWOS, ONES, 500)
    T = PrefixSystem.from_rule(lambda n: [(1,) * n])
    assert dg.escape(plan, T, 2)[1] == dg.escape(plan, T, 2)[1]


def test_separate_summable():
    sep = dg.separate_summable(P.monomial(1), P.monomial(3), 60)
    assert sep.reason and sep.plan.check_sizes() == []
    assert sep.ledger.terms[1] == Fraction(2, 8)  # |S_2| / 2^3
    assert dg.separate_summable(P.exp(2), P.exp(4), 10).reason
    with pytest.raises(PreconditionError):
        dg.separate_summable(P.monomial(1), P.monomial(1), 20)


def test_strict_inclusion_examples():
    sep = dg.strict_inclusion(dg.chain_member(Fraction(3, 2)), dg.chain_member(2), 60)
    assert sep.extra["base"][:6] == [0, 1, 2, 3, 4, 5]
    assert all(lhs <= rhs for _, lhs, rhs in sep.extra["inequalities"])
    raw = dg.strict_inclusion(P.monomial(1), P.exp(2), 12, thin=False)
    assert raw.extra["chosen"][1:] == list(range(1, 13))
    assert all(raw.extra["h_values"][k] == k * k for k in range(1, 13))  # [DERIVED] k * max f
    with pytest.raises(PreconditionError):
        dg.strict_inclusion(P.monomial(2), P.monomial(2), 10)


def test_chain_member():
    assert [dg.chain_member(Fraction(3, 2))(n) for n in range(5)] == [0, 1, 2, 5, 8]
    assert dg.chain_member(2)(7) == 49
    assert dg.chain_certificate(Fraction(3, 2), 2)
    with pytest.raises(PreconditionError):
        dg.chain_member(1)


def test_antichain_examples():
    sep = dg.antichain_pair(SetRule.evens(), SetRule.odds(), 6)
    c2 = next(c for c in sep.extra["checks"] if c.n == 2)
    assert c2.t_sum == 6 and c2.s_n == 24 and c2.holds
    assert all(c.holds for c in sep.extra["checks"])
    sep = dg.antichain_pair(SetRule(3, (0,)), SetRule(3, (1,)), 4, check_upto=3)
    c3 = next(c for c in sep.extra["checks"] if c.n == 3)
    assert c3.t_sum == 6 and c3.s_n == 5040
    with pytest.raises(PreconditionError):
        dg.antichain_pair(SetRule.evens(), SetRule.evens(), 4)


def test_antichain_ledger_bound():
    sep = dg.antichain_pair(SetRule.evens(), SetRule.odds(), 10)
    assert all(lhs <= rhs for _, lhs, rhs in sep.extra["inequalities"])
