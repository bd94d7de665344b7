import numpy as np
import pytest
from scipy import stats

from momc_uq.sampling import (SampleHierarchy, allocate_samples, derive_seed,
                              sample, uniform)


def hierarchy(seed=42, a=-1.0, b=1.0, d=1, counts=(1000,)):
    return SampleHierarchy(seed, uniform(a, b, d), tuple(counts))


def test_same_seed_and_index_reproduce():
    h = hierarchy()
    assert np.array_equal(sample(h, 17), sample(h, 17))


def test_index_out_of_range():
    h = hierarchy(counts=(10,))
    with pytest.raises(IndexError):
        sample(h, 10)


def test_prefix_nesting_invariant_under_counts():
    base = hierarchy(counts=(50,))
    bigger = hierarchy(counts=(5000,))
    for k in (0, 7, 49):
        assert np.array_equal(base.sample(k), bigger.sample(k))


def test_block_matches_single_samples():
    h = hierarchy(d=3, counts=(64,))
    block = h.block(0, 64)
    for k in (0, 31, 63):
        assert np.array_equal(block[k], h.sample(k))


def test_empirical_mean_uniform_symmetric():
    h = hierarchy(seed=2024, a=-1.0, b=1.0, counts=(100_000,))
    z = h.block(0, 100_000)[:, 0]
    assert abs(z.mean()) < 0.01


def test_empirical_variance_uniform01():
    h = hierarchy(seed=7, a=0.0, b=1.0, counts=(100_000,))
    z = h.block(0, 100_000)[:, 0]
    assert abs(z.var() - 1.0 / 12.0) < 0.002


def test_kolmogorov_smirnov_uniform():
    h = hierarchy(seed=31337, a=0.0, b=1.0, counts=(10_000,))
    z = h.block(0, 10_000)[:, 0]
    stat = stats.kstest(z, "uniform").statistic
    critical_1pct = 1.628 / np.sqrt(10_000)
    assert stat < critical_1pct


def test_dimensions_mutually_distinct():
    h = hierarchy(d=2, counts=(10_000,))
    z = h.block(0, 10_000)
    corr = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
    assert abs(corr) < 0.05


def test_derive_seed_decorrelates():
    s1 = derive_seed(42, 1)
    s2 = derive_seed(42, 2)
    assert s1 != s2 != 42
    z1 = SampleHierarchy(s1, uniform(0, 1)).block(0, 1000)[:, 0]
    z2 = SampleHierarchy(s2, uniform(0, 1)).block(0, 1000)[:, 0]
    assert abs(np.corrcoef(z1, z2)[0, 1]) < 0.1


# sample schedules -----------------------------------------------------------

def test_allocate_burgers_cost_table():
    assert allocate_samples(100, [1, 4, 9]) == [1200, 300, 100]


def test_allocate_swe_cost_table():
    assert allocate_samples(50, [3, 12, 60]) == [1000, 250, 50]


def test_allocate_equal_costs_floor():
    assert allocate_samples(10, [2, 2]) == [20, 10]


def test_allocate_rejects_decreasing_costs():
    with pytest.raises(ValueError):
        allocate_samples(10, [4, 1])


def test_allocate_requires_two_samples():
    with pytest.raises(ValueError):
        allocate_samples(1, [1, 4])
