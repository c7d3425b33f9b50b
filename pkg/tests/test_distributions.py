# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import math

import numpy as np
import pytest

from fisher_lab import distributions as ds
from fisher_lab.exceptions import ConfigError
from fisher_lab.market import BuyerProfile, MarketInstance
from fisher_lab.solver import solve_eg_primal


def test_rng_stream():
    a = ds.sample_market(ds.f2_benchmark_spec(), 20, ds.RngStream(3, 1))
    b = ds.sample_market(ds.f2_benchmark_spec(), 20, ds.RngStream(3, 1))
    c = ds.sample_market(ds.f2_benchmark_spec(), 20, ds.RngStream(3, 2))
    d = ds.sample_market(ds.f2_benchmark_spec(), 20, ds.RngStream(3, 1, namespace=5))
    assert a == b
    assert a != c
    assert a != d
    assert repr(ds.RngStream(3, 1)) == "<RngStream: 3/0/1>"

    # A plain numpy generator works as well
    gen = np.random.default_rng(0)
    assert isinstance(ds.sample_user(ds.counterexample_spec(), gen), BuyerProfile)
    with pytest.raises(TypeError):
        ds.sample_user(ds.counterexample_spec(), 42)


def test_sample_user_replay():
    spec = ds.counterexample_spec()
    rng_a, rng_b = ds.RngStream(9, 4), ds.RngStream(9, 4)
    first = [ds.sample_user(spec, rng_a) for _ in range(10)]
    second = [ds.sample_user(spec, rng_b) for _ in range(10)]
    assert first == second


def test_counterexample_marginals():
    spec = ds.counterexample_spec()
    buyers = ds.sample_market(spec, 100000, ds.RngStream(1))
    share = sum(1 for b in buyers if b.key == (1.0, (1.0, 0.0))) / len(buyers)
    # 3 sigma band of a fair coin at 1e5 draws
    assert abs(share - 0.5) <= 3 * math.sqrt(0.25 / len(buyers))
    assert abs(share - 0.5) <= 0.01
    assert all(b.kind in (0, 1) for b in buyers)


def test_counterexample_spec():
    spec = ds.counterexample_spec()
    assert spec.K == 2
    assert [t.key for t in spec.types] == [(1.0, (1.0, 0.0)), (1.0, (0.0, 1.0))]
    np.testing.assert_array_equal(spec.probs, [0.5, 0.5])
    np.testing.assert_array_equal(spec.d, [1, 1])
    assert spec.is_counterexample()
    assert spec.expected_budget == 1

    report = ds.check_assumptions(spec)
    assert report.goods_supported == (True, True)
    assert ("nonpositive-buyer", 0) in report.violations
    assert not any(v[0] == "unsupported-good" for v in report.violations)

    spec = ds.counterexample_spec(0.1)
    assert [t.key for t in spec.types] == [(1.0, (1.0, 0.1)), (1.0, (0.1, 1.0))]
    assert not spec.is_counterexample()
    assert ds.check_assumptions(spec).ok

    with pytest.raises(ValueError):
        ds.counterexample_spec(-1)


def test_f2_benchmark_spec():
    spec = ds.f2_benchmark_spec()
    assert spec.m == 5
    np.testing.assert_array_equal(spec.d, [10] * 5)
    assert spec.expected_budget == pytest.approx(17 / 3)
    assert ds.check_assumptions(spec).ok
    assert not spec.is_counterexample()

    buyers = ds.sample_market(spec, 2000, ds.RngStream(2))
    assert {b.budget for b in buyers} == {2, 5, 10}
    utilities = np.vstack([b.utilities for b in buyers])
    assert utilities.min() >= 5
    assert utilities.max() <= 10


def test_single_type_unsupported():
    spec = ds.DiscreteDistribution([(1, (1, 0))], [1], [1, 1])
    report = ds.check_assumptions(spec)
    assert report.goods_supported == (True, False)
    assert ("unsupported-good", 1) in report.violations

    # Types without probability don't support a good
    spec = ds.DiscreteDistribution([(1, (1, 0)), (1, (0, 1))], [1, 0], [1, 1])
    assert ("unsupported-good", 1) in ds.check_assumptions(spec).violations


def test_closed_form():
    assert ds.closed_form_optimum_counterexample(4, 2) == pytest.approx(4 * math.log(2))
    assert ds.closed_form_optimum_counterexample(2, 1) == pytest.approx(2 * math.log(2))
    assert ds.closed_form_optimum_counterexample(5, 0) == 0
    assert ds.closed_form_optimum_counterexample(5, 5) == 0

    assert ds.closed_form_optimum_counterexample(
        7, 3
    ) == ds.closed_form_optimum_counterexample(7, 4)
    for n in (1, 7, 100, 1001):
        for s in range(n + 1):
            assert ds.closed_form_optimum_counterexample(
                n, s
            ) == ds.closed_form_optimum_counterexample(n, n - s)

    with pytest.raises(ValueError):
        ds.closed_form_optimum_counterexample(3, 4)


def test_closed_form_matches_solver():
    spec = ds.counterexample_spec()
    for stream in range(5):
        n = 60
        buyers = ds.sample_market(spec, n, ds.RngStream(8, stream))
        s = sum(1 for b in buyers if b.kind == 0)
        value = solve_eg_primal(MarketInstance([n, n], buyers)).primal_value
        assert value == pytest.approx(
            ds.closed_form_optimum_counterexample(n, s), abs=1e-6 * n
        )


def test_spec_json():
    for spec in (ds.counterexample_spec(), ds.f2_benchmark_spec()):
        data = spec.to_json()
        assert ds.DistributionSpec.from_json(data).to_json() == data

    data = ds.counterexample_spec().to_json()
    with pytest.raises(ConfigError) as e:
        ds.DistributionSpec.from_json({**data, "probs": [0.5, 0.4]})
    assert e.value.field == "probs"
    assert "probs" in str(e.value)

    with pytest.raises(ConfigError) as e:
        ds.DistributionSpec.from_json({**data, "probs": [1.5, -0.5]})
    assert e.value.field == "probs"

    with pytest.raises(ConfigError) as e:
        ds.DistributionSpec.from_json({**data, "variant": "gaussian"})
    assert e.value.field == "variant"

    with pytest.raises(ConfigError):
        ds.DistributionSpec.from_json({**data, "seed": 1})

    with pytest.raises(ConfigError) as e:
        ds.DistributionSpec.from_json({**data, "d": [1, 0]})
    assert e.value.field == "d"

    data = ds.f2_benchmark_spec().to_json()
    with pytest.raises(ConfigError) as e:
        ds.DistributionSpec.from_json({**data, "utility_low": [1, 2]})
    assert e.value.field == "utility_low"

    del data["budget_probs"]
    with pytest.raises(ConfigError) as e:
        ds.DistributionSpec.from_json(data)
    assert e.value.field == "budget_probs"

    with pytest.raises(ConfigError):
        ds.DistributionSpec.from_json([])


def test_ce_input():
    ce = ds.counterexample_spec().to_ce_input()
    assert ce.K == 2
    np.testing.assert_array_equal(ce.d, [1, 1])
    np.testing.assert_array_equal(ds.counterexample_spec().to_ce_input([2, 3]).d, [2, 3])
