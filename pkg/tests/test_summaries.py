import numpy as np
import pytest

from pivotal.rng import RngStream
from pivotal.summaries import empirical_cdf, ks_two_sample, mc_summary, smoothed_density


def test_mc_summary_against_numpy():
    rng = np.random.default_rng(3)
    x = rng.normal(size=500)
    s = mc_summary(x)
    assert s.mean == pytest.approx(np.mean(x))
    assert s.stderr == pytest.approx(np.std(x, ddof=1) / np.sqrt(500))
    assert s.ci95[0] < s.mean < s.ci95[1]


def test_constant_samples_zero_stderr():
    s = mc_summary([2.0] * 10)
    assert s.stderr == 0.0
    assert s.mean == 2.0


def test_too_few_samples():
    with pytest.raises(ValueError):
        mc_summary([1.0])


def test_empirical_cdf_steps():
    cdf = empirical_cdf([1.0, 2.0, 2.0, 4.0])
    assert cdf(0.5) == 0.0
    assert cdf(1.0) == 0.25
    assert cdf(2.0) == 0.75
    assert cdf(10.0) == 1.0
    np.testing.assert_allclose(cdf(np.array([1.5, 3.0])), [0.25, 0.75])


def test_smoothed_density_uniform():
    rng = np.random.default_rng(9)
    x = rng.random(200_000)
    val = smoothed_density(x, 0.5, bandwidth=0.05)
    assert val == pytest.approx(1.0, abs=0.05)


def test_ks_identical_sets():
    x = np.arange(100, dtype=float)
    stat, p = ks_two_sample(x, x.copy())
    assert stat == 0.0
    assert p == 1.0


def test_ks_detects_shift():
    rng = np.random.default_rng(11)
    a = rng.normal(size=4000)
    b = rng.normal(loc=0.5, size=4000)
    _, p = ks_two_sample(a, b)
    assert p < 1e-6


def test_ks_calibration_uniform():
    # null p-values exceed 0.01 in at least 98 of 100 seeded trials
    hits = 0
    for i in range(100):
        gen = RngStream(555, i).generator()
        a = gen.random(10_000)
        b = gen.random(10_000)
        _, p = ks_two_sample(a, b)
        hits += p > 0.01
    assert hits >= 98
