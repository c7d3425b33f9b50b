# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import math

import numpy as np
import pytest

from fisher_lab import metrics as me
from fisher_lab.buyer import optimal_bundle
from fisher_lab.distributions import (
    DiscreteDistribution,
    RngStream,
    counterexample_spec,
    sample_market,
)
from fisher_lab.market import BuyerProfile, MarketInstance
from fisher_lab.policies import RevealedPreferencePolicy
from fisher_lab.solver import solve_eg_primal
from fisher_lab.utils import geometric_mean

TYPE_A = BuyerProfile(1, [1, 0], 0)
TYPE_B = BuyerProfile(1, [0, 1], 1)


def static_trace(n, prices=(0.5, 0.5)):
    trace = me.SimulationTrace(n, 2)
    for t, buyer in enumerate([TYPE_A, TYPE_B] * (n // 2), 1):
        trace.record(t, prices, optimal_bundle(buyer, prices), buyer)
    trace.final_prices = np.array(prices)
    return trace


def test_trace():
    trace = static_trace(4)
    assert len(trace) == 4
    assert trace.complete
    assert repr(trace) == "<SimulationTrace: 4/4 steps>"
    np.testing.assert_allclose(trace.cumulative, [4, 4])
    np.testing.assert_allclose(trace.realized_utilities(), [2, 2, 2, 2])

    data = trace.to_json()
    assert data["kinds"] == [0, 1, 0, 1]
    assert data["final_prices"] == [0.5, 0.5]
    assert data["tau"] is None

    trace = me.SimulationTrace(10, 2)
    trace.record(1, [1, 1], [1, 0], TYPE_A)
    assert not trace.complete
    assert trace.realized_utilities().shape == (1,)


def test_online_objective():
    trace = static_trace(100)
    assert me.online_objective(trace) == pytest.approx(100 * math.log(2))
    assert not trace.events

    # Buyers without any valued good don't count
    trace = me.SimulationTrace(2, 2)
    trace.record(1, [1, 1], [1, 0], TYPE_A)
    trace.record(2, [1, 1], [0, 0], BuyerProfile(1, [0, 0]))
    assert me.online_objective(trace) == pytest.approx(0)


def test_online_objective_starved():
    trace = me.SimulationTrace(3, 2)
    trace.record(1, [1, 1], [1, 0], TYPE_A)
    trace.record(2, [1, 1], [1, 0], TYPE_B)
    trace.record(3, [1, 1], [0, 0], TYPE_A)
    assert me.online_objective(trace) == -math.inf
    assert trace.events[0].kind == me.ZeroUtilityEvent
    assert trace.events[0].to_json() == {"t": 2, "kind": "zero-utility", "buyers": [2, 3]}


def test_regret():
    trace = static_trace(10)
    online = 10 * math.log(2)
    assert me.regret(trace, 12.0) == pytest.approx(12 - online)
    assert me.regret(trace, online) == pytest.approx(0, abs=1e-12)

    class Solution:
        primal_value = 7.0

    assert me.regret(trace, Solution()) == pytest.approx(7 - online)


def test_metrics_report():
    report = me.MetricsReport(u_online=1.0, u_star=3.0, n=2)
    assert report.regret == 2
    assert report.nsw_ratio == pytest.approx(math.e)

    report = me.MetricsReport()
    assert report.regret is None
    assert report.nsw_ratio is None
    assert list(report.to_json()) == list(me.MetricsReport.Columns)


def test_constraint_violation():
    trace = me.SimulationTrace(1, 2)
    trace.record(1, [1, 1], [3, 0], BuyerProfile(3, [1, 1]))
    l2, linf, excess = me.constraint_violation(trace, [0, 4])
    assert l2 == 3
    assert linf == 3
    np.testing.assert_array_equal(excess, [3, 0])

    l2, linf, excess = me.constraint_violation(static_trace(4), [4, 4])
    assert l2 == linf == 0


def test_nsw():
    assert me.nsw_ratio(5.0, 5.0, 10) == 1
    assert me.nsw_ratio(3.0, 1.0, 2) == pytest.approx(math.e)
    assert me.nsw_ratio(1e6, 0.0, 1) == math.inf

    trace = static_trace(4)
    assert me.nash_social_welfare(trace) == pytest.approx(2)

    # With unit budgets NSW is exp(U / n)
    trace = me.SimulationTrace(3, 2)
    for t, x in enumerate(([1, 0], [0, 3], [0.5, 0]), 1):
        trace.record(t, [1, 1], x, TYPE_A if x[0] else TYPE_B)
    assert me.nash_social_welfare(trace) == pytest.approx(
        math.exp(me.online_objective(trace) / 3)
    )


def test_nsw_ratio_matches_geometric_means():
    gen = np.random.default_rng(5)
    for _ in range(20):
        n, m = int(gen.integers(2, 8)), int(gen.integers(1, 4))
        utilities = gen.uniform(0.1, 1, size=(n, m))
        buyers = [BuyerProfile(1, u) for u in utilities]
        solution = solve_eg_primal(MarketInstance(gen.uniform(1, 3, size=m), buyers))

        # Any feasible allocation with positive utility will do online
        online = solution.allocations * gen.uniform(0.2, 1, size=(n, m))
        oracle_values = np.einsum("ij,ij->i", utilities, solution.allocations)
        online_values = np.einsum("ij,ij->i", utilities, online)
        expected = geometric_mean(oracle_values) / geometric_mean(online_values)

        ratio = me.nsw_ratio(solution.primal_value, np.log(online_values).sum(), n)
        assert ratio == pytest.approx(expected, rel=1e-10)
        assert ratio >= 1

        a, b = gen.uniform(-5, 5, size=2)
        product = me.nsw_ratio(a, b, n) * me.nsw_ratio(b, a, n)
        assert product == pytest.approx(1, rel=1e-12)


def test_violation_norms():
    gen = np.random.default_rng(6)
    for _ in range(50):
        n, m = int(gen.integers(1, 20)), int(gen.integers(1, 6))
        trace = me.SimulationTrace(n, m)
        for t in range(1, n + 1):
            x = gen.uniform(0, 2, size=m)
            trace.record(t, np.ones(m), x, BuyerProfile(1, np.ones(m)))

        l2, linf, excess = me.constraint_violation(trace, gen.uniform(0, n, size=m))
        assert np.all(excess >= 0)
        assert linf <= l2 + 1e-12
        assert l2 <= math.sqrt(m) * linf + 1e-12


def test_potential():
    trace = static_trace(4)
    np.testing.assert_allclose(me.potential_series(trace, [1, 2]), [1.5] * 5)

    trace.final_prices = None
    assert len(me.potential_series(trace, [1, 2])) == 4

    with pytest.raises(ValueError):
        me.potential_series(trace, [1, 0])

    assert me.potential_threshold(1, [1, 1]) == pytest.approx(0.5)
    assert me.potential_threshold(2, [1, 2]) == pytest.approx(0.4)


def random_discrete_spec(gen):
    K = int(gen.integers(1, 5))
    m = int(gen.integers(1, 5))
    utilities = gen.uniform(0, 1, size=(K, m)) * (gen.uniform(size=(K, m)) < 0.7)
    # Every type values at least one good
    utilities[np.arange(K), gen.integers(0, m, size=K)] += gen.uniform(0.1, 1, size=K)
    budgets = gen.uniform(0.5, 2, size=K)
    types = [BuyerProfile(w, u) for w, u in zip(budgets, utilities)]
    probs = gen.dirichlet(np.ones(K))
    return DiscreteDistribution(types, probs, gen.uniform(0.5, 2, size=m))


def test_potential_monotone():
    """Below the threshold price the additive update never lowers p . d"""
    gen = np.random.default_rng(17)
    n = 100
    steps = checked = 0
    for stream in range(120):
        spec = random_discrete_spec(gen)
        d = spec.d
        threshold = me.potential_threshold(spec.budgets.min(), d)
        gamma = 10 ** gen.uniform(-4, -1) * threshold**2 / spec.budgets.max()
        p1 = 0.5 * threshold * np.ones(spec.m)
        policy = RevealedPreferencePolicy(d, n, p1=p1, gamma=gamma)

        trace = me.SimulationTrace(n, spec.m)
        for t, buyer in enumerate(sample_market(spec, n, RngStream(3, stream)), 1):
            prices = policy.next_price(t)
            x = optimal_bundle(buyer, prices)
            trace.record(t, prices, x, buyer)
            policy.observe(t, x, buyer)
            if policy.breached:
                break
        trace.final_prices = policy.next_price(trace.length + 1)

        potential = me.potential_series(trace, d)
        prices = np.vstack([trace.prices[: trace.length], trace.final_prices])
        for t in range(trace.length):
            steps += 1
            if prices[t].max() < threshold:
                checked += 1
                assert potential[t + 1] >= potential[t] - 1e-12
    assert steps >= 10000
    assert checked >= 1000


def test_slopes():
    n = np.array([100, 200, 500, 1000, 2000, 5000])
    slope, intercept, r2 = me.fit_loglog_slope(zip(n, 2 * np.sqrt(n)))
    assert slope == pytest.approx(0.5)
    assert intercept == pytest.approx(math.log(2))
    assert r2 == pytest.approx(1)

    slope, _, _ = me.fit_loglog_slope(zip(n, 0.3 * n))
    assert slope == pytest.approx(1)

    slope, intercept, _ = me.fit_loglog_slope(zip(n, [4.0] * len(n)))
    assert slope == pytest.approx(0, abs=1e-12)
    assert intercept == pytest.approx(math.log(4))

    slope, intercept, r2 = me.fit_semilog_slope(zip(n, 3 * np.log(n) - 1))
    assert slope == pytest.approx(3)
    assert intercept == pytest.approx(-1)

    with pytest.raises(ValueError):
        me.fit_loglog_slope([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        me.fit_loglog_slope([(1, 1), (2, 0), (3, 1)])
    with pytest.raises(ValueError):
        me.fit_semilog_slope([(0, 1), (2, 0), (3, 1)])
    # Semilog fits accept nonpositive values
    me.fit_semilog_slope([(1, -1), (2, 0), (3, 1)])


def test_lipschitz():
    n = 10
    trace = me.SimulationTrace(n, 2)
    for t in range(1, n + 1):
        # Steps of size 1 / (n - t)
        p = 1 + sum(1 / (n - s) for s in range(1, t))
        trace.record(t, [p, 1], [0, 0], TYPE_A)

    ratios = me.price_step_ratios(trace, n)
    assert len(ratios) == n - 1
    np.testing.assert_allclose(ratios, np.ones(n - 1))
    assert me.lipschitz_constant(ratios) == pytest.approx(1)

    trace.tau = 5
    assert len(me.price_step_ratios(trace, n)) == 3

    assert me.lipschitz_constant([]) == 0
    assert me.lipschitz_constant([1, 5, 2], warmup=1) == 1


def test_telescoping():
    spec = counterexample_spec(0.3)
    n = 50
    c = n * spec.d
    policy = RevealedPreferencePolicy(spec.d, n, p1=[1, 1], gamma=0.05)

    trace = me.SimulationTrace(n, 2)
    for t, buyer in enumerate(sample_market(spec, n, RngStream(4)), 1):
        prices = policy.next_price(t)
        x = optimal_bundle(buyer, prices)
        trace.record(t, prices, x, buyer)
        policy.observe(t, x, buyer)
    trace.final_prices = policy.next_price(n + 1)

    assert me.telescoping_residual(trace, c, policy.gamma) <= 1e-9 * n

    with pytest.raises(ValueError):
        me.telescoping_residual(me.SimulationTrace(2, 2), [1, 1], 0.1)
