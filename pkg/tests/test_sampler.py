import math

import numpy as np
import pytest

from bethe_permanent.errors import DomainError
from bethe_permanent.exact import ryser_permanent
from bethe_permanent.matrix import RngSpec
from bethe_permanent.sampler import sample_permanent


def test_singleton_is_exact():
    for budget in (dict(samples=1), dict(samples=1000), dict(seconds=1e-4)):
        r = sample_permanent([[4.5]], rng=RngSpec(1), **budget)
        assert r.log_estimate == pytest.approx(math.log(4.5), abs=1e-15)


def test_identity_hit_frequency():
    s = 60000
    r = sample_permanent(np.eye(3), samples=s, rng=RngSpec(2))
    hits = round(math.exp(r.log_estimate) * s / 6)
    assert math.exp(r.log_estimate) == pytest.approx(6 * hits / s, rel=1e-12)
    assert math.exp(r.log_estimate) == pytest.approx(1.0, abs=0.05)


def test_zero_matrix_gives_minus_inf():
    r = sample_permanent(np.zeros((3, 3)), samples=100, rng=RngSpec(0))
    assert r.log_estimate == -math.inf


def test_deterministic_under_seed():
    m = np.random.default_rng(0).uniform(0, 50, (6, 6))
    a = sample_permanent(m, samples=20000, rng=RngSpec(5))
    b = sample_permanent(m, samples=20000, rng=RngSpec(5))
    assert a.log_estimate == b.log_estimate and a.samples == b.samples == 20000


def test_wall_time_budget_stops_on_batch_boundary():
    m = np.random.default_rng(0).uniform(0, 50, (8, 8))
    r = sample_permanent(m, seconds=0.01, rng=RngSpec(5))
    assert r.elapsed >= 0.01
    assert r.samples % 256 == 0 and r.samples >= 256


def test_budget_validation():
    with pytest.raises(DomainError):
        sample_permanent(np.eye(2))
    with pytest.raises(DomainError):
        sample_permanent(np.eye(2), samples=10, seconds=1.0)
    with pytest.raises(DomainError):
        sample_permanent(np.eye(2), samples=0)


def test_trace():
    r = sample_permanent(np.ones((4, 4)), samples=20000, rng=RngSpec(1), trace=True)
    assert len(r.running_mean_trace) == math.ceil(20000 / 8192)
    np.testing.assert_allclose(r.running_mean_trace, math.log(24), atol=1e-12)


def test_unbiased_small():
    rng = np.random.default_rng(42)
    m = rng.uniform(0, 50, (5, 5))
    true = ryser_permanent(m).value
    runs = [math.exp(sample_permanent(m, samples=2000, rng=spec).log_estimate)
            for spec in RngSpec(7).spawn(200)]
    se = np.std(runs, ddof=1) / math.sqrt(len(runs))
    assert abs(np.mean(runs) - true) < 3 * se


def test_standard_error_shrinks_like_inverse_sqrt():
    m = np.random.default_rng(9).uniform(0, 50, (7, 7))
    sds = []
    for s in (10**3, 10**4, 10**5):
        runs = [math.exp(sample_permanent(m, samples=s, rng=spec).log_estimate)
                for spec in RngSpec(s).spawn(40)]
        sds.append(np.std(runs, ddof=1))
    for hi, lo in zip(sds, sds[1:]):
        ratio = hi / lo
        assert math.sqrt(10) / 2 <= ratio <= 2 * math.sqrt(10)
