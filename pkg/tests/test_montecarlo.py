import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solitoncrb.bogoliubov import CountModel, bogoliubov_count_model, bogoliubov_factory, poisson_count_model
from solitoncrb.errors import DomainError, ModelValidityError
from solitoncrb.estimator import custom_gain, meanfield_optimal_gain
from solitoncrb.fisher import fisher_poisson_pixelated
from solitoncrb.montecarlo import TrialConfig, run_trials, sample_batch, sample_counts, summarize
from solitoncrb.physics import PhysicalParams, PixelGrid, SolitonModel


@pytest.fixture(scope="module")
def setup():
    p = PhysicalParams.from_density(135.0)
    grid = PixelGrid.covering(2.0, 10.0)
    return p, grid, poisson_count_model(SolitonModel(p), grid)


@given(seed=st.integers(0, 2**64 - 1), i=st.integers(0, 2**40))
def test_streams_reproducible(seed, i):
    cm = CountModel(mean=np.array([3.0, 2e3]), cov=np.diag([3.0, 2e3]), tag="poisson")
    a = sample_counts(cm, seed, i)
    assert np.array_equal(a, sample_counts(cm, seed, i))
    assert np.all(a == np.round(a)) and np.all(a >= 0)


def test_streams_differ_between_trials(setup):
    _, _, cm = setup
    assert not np.array_equal(sample_counts(cm, 1, 0), sample_counts(cm, 1, 1))
    assert not np.array_equal(sample_counts(cm, 1, 0), sample_counts(cm, 2, 0))


def test_batch_independent_of_threads_and_split(setup):
    _, _, cm = setup
    one = sample_batch(cm, 7, 0, 5000, threads=1, block=1000)
    many = sample_batch(cm, 7, 0, 5000, threads=4, block=700)
    assert np.array_equal(one, many)
    assert np.array_equal(one[1234], sample_counts(cm, 7, 1234))


def test_poisson_moments(setup):
    _, _, cm = setup
    n = 100000
    x = sample_batch(cm, 3, 0, n, threads=4)
    m = cm.mean
    se_mean = np.sqrt(m / n)
    se_var = np.sqrt((m + 2 * m * m) / n)  # Poisson fourth central moment m + 3 m^2
    assert np.all(np.abs(x.mean(0) - m) < 5 * se_mean)
    assert np.all(np.abs(x.var(0, ddof=1) - m) < 5 * se_var)


def test_gaussian_covariance():
    p = PhysicalParams.from_density(50.0)
    grid = PixelGrid.covering(1.0, 8.0)
    cm = bogoliubov_count_model(p, 0.0, grid)
    assert grid.m_px == 16
    n = 100000
    x = sample_batch(cm, 11, 0, n, threads=4)
    C = cm.cov
    emp = np.cov(x, rowvar=False)
    se = np.sqrt((C * C + np.outer(np.diag(C), np.diag(C))) / n)
    assert np.all(np.abs(emp - C) < 5 * se)
    # samples are used raw, not rounded
    assert np.any(x != np.round(x))


def test_indefinite_gaussian_fails():
    cm = CountModel(mean=np.ones(2), cov=np.array([[1.0, 2.0], [2.0, 1.0]]), tag="bogoliubov")
    with pytest.raises(ModelValidityError):
        sample_counts(cm, 0, 0)


def test_summary_statistics():
    rng = np.random.default_rng(0)
    q = rng.normal(0.3, 2.0, 200000)
    r = summarize(q, 0.3, 0.25)
    assert r.variance == pytest.approx(4.0, rel=0.02)
    assert r.stderr_variance == pytest.approx(4.0 * np.sqrt(2 / q.size), rel=0.05)
    assert r.ratio == pytest.approx(1.0, rel=0.02) and r.crb == 4.0
    assert abs(r.bias) < 3 * r.stderr_mean
    assert r.as_dict()["ratio"] == r.ratio


def test_trial_config_validation():
    with pytest.raises(DomainError):
        TrialConfig(n_trials=0, seed=1)
    with pytest.raises(DomainError):
        TrialConfig(n_trials=10, seed=2**64)


@pytest.mark.parametrize("q", [0.05, 0.1])
def test_unbiased_at_small_displacement(setup, q):
    p, grid, ref = setup
    cm = poisson_count_model(SolitonModel(p, q), grid)
    g = meanfield_optimal_gain(p, grid)
    F = fisher_poisson_pixelated(SolitonModel(p, q), grid).F
    rep = run_trials(TrialConfig(100000, seed=5, q_true=q), cm, g, ref.mean, F, threads=2)
    assert abs(rep.bias) < 2 * rep.stderr_mean + 2e-3 * q
    assert rep.bound_respected


def test_suboptimal_gain_respects_bound(setup):
    p, grid, cm = setup
    g = custom_gain(p, grid, np.sign(grid.centers))
    F = fisher_poisson_pixelated(SolitonModel(p), grid).F
    rep = run_trials(TrialConfig(20000, seed=9), cm, g, cm.mean, F)
    assert rep.ratio > 1.5 and rep.bound_respected


def test_bogoliubov_beats_poisson():
    """Each model's optimal linear estimator; variance referred to that model's own slope."""
    p = PhysicalParams.from_density(50.0)
    grid = PixelGrid.covering(1.0, 8.0)
    h = 0.01
    bog_at = bogoliubov_factory(p, grid)
    bog = bog_at(0.0)
    d_bog = (bog_at(h).mean - bog_at(-h).mean) / (2 * h)
    g_bog = custom_gain(p, grid, np.linalg.solve(bog.cov, d_bog))
    poi = poisson_count_model(SolitonModel(p), grid)
    g_poi = meanfield_optimal_gain(p, grid)
    a = run_trials(TrialConfig(100000, seed=1, model_tag="bogoliubov"), bog, g_bog, bog.mean, 1.0, threads=4)
    b = run_trials(TrialConfig(100000, seed=2), poi, g_poi, poi.mean, 1.0, threads=4)
    s2 = (g_bog.weights @ d_bog) ** 2
    assert (a.variance + 3 * a.stderr_variance) / s2 < b.variance - 3 * b.stderr_variance


def test_grid_mismatch(setup):
    p, grid, cm = setup
    g = meanfield_optimal_gain(p, PixelGrid.covering(1.0, 10.0))
    with pytest.raises(DomainError):
        run_trials(TrialConfig(10, seed=0), cm, g, cm.mean, 1.0)
