"""Monte-Carlo check that linear estimators reach the Cramer-Rao bound.

Every trial draws from its own counter-based Philox stream keyed by
``(seed, trial_index)``, so results do not depend on trial order or on how
trials are split across threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .estimator import estimate

POISSON_GAUSSIAN_THRESHOLD = 1e3


@dataclass(frozen=True)
class TrialConfig:
    n_trials: int
    seed: int
    q_true: float = 0.0
    model_tag: str = "poisson"
    gain_kind: str = "meanfield-optimal"
    poisson_gaussian_threshold: float = POISSON_GAUSSIAN_THRESHOLD

    def __post_init__(self):
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise DomainError("n_trials must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in 64 bits")


@dataclass(frozen=True)
class TrialReport:
    n_trials: int
    q_true: float
    mean: float
    variance: float
    stderr_mean: float
    stderr_variance: float
    fisher: float

    @property
    def crb(self):
        return 1.0 / self.fisher

    @property
    def bias(self):
        return self.mean - self.q_true

    @property
    def ratio(self):
        """``Var(q_hat) * F``; at least 1 for an unbiased estimator."""
        return self.variance * self.fisher

    @property
    def ratio_stderr(self):
        return self.stderr_variance * self.fisher

    @property
    def bound_respected(self):
        return self.ratio >= 1.0 - 3.0 * self.ratio_stderr

    def as_dict(self):
        return {
            "n_trials": self.n_trials,
            "q_true": self.q_true,
            "mean": self.mean,
            "bias": self.bias,
            "variance": self.variance,
            "stderr_mean": self.stderr_mean,
            "stderr_variance": self.stderr_variance,
            "fisher": self.fisher,
            "crb": self.crb,
            "ratio": self.ratio,
            "ratio_stderr": self.ratio_stderr,
        }


def trial_generator(seed, trial_index):
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(trial_index) << 64)))


def sample_counts(count_model, seed, trial_index, threshold=POISSON_GAUSSIAN_THRESHOLD, factor=None):
    """One pixel-count vector.

    Poisson models draw independent counts (normal approximation, rounded,
    above ``threshold``); Gaussian models return ``mean + L z`` with the
    Cholesky factor ``L``, unrounded and possibly negative.
    """
    rng = trial_generator(seed, trial_index)
    mean = count_model.mean
    if count_model.tag == "poisson":
        z = rng.standard_normal(mean.size)
        big = mean > threshold
        out = np.empty(mean.size)
        out[~big] = rng.poisson(mean[~big])
        out[big] = np.maximum(np.rint(mean[big] + np.sqrt(mean[big]) * z[big]), 0.0)
        return out
    if factor is None:
        factor = count_model.cholesky()
    return mean + factor @ rng.standard_normal(mean.size)


def _sample_block(count_model, seed, indices, threshold, factor):
    return np.stack([sample_counts(count_model, seed, i, threshold, factor) for i in indices])


def sample_batch(count_model, seed, start, stop, threshold=POISSON_GAUSSIAN_THRESHOLD, threads=1, block=2048):
    """Counts for trials ``start .. stop - 1`` as rows, independent of ``threads``."""
    factor = None if count_model.tag == "poisson" else count_model.cholesky()
    blocks = [range(a, min(stop, a + block)) for a in range(start, stop, block)]
    if threads <= 1 or len(blocks) == 1:
        parts = [_sample_block(count_model, seed, b, threshold, factor) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _sample_block(count_model, seed, b, threshold, factor), blocks))
    return np.concatenate(parts, axis=0)


def run_trials(config, count_model, gain, reference_means, fisher, threads=1):
    """Apply ``estimate`` to ``config.n_trials`` simulated images.

    ``count_model`` is the model at the true position, ``reference_means``
    the mean counts at ``q = 0`` and ``fisher`` the information the
    variance is compared against.
    """
    if count_model.mean.size != gain.weights.size:
        raise DomainError("count model and gain are on different grids")
    counts = sample_batch(count_model, config.seed, 0, config.n_trials,
                          config.poisson_gaussian_threshold, threads)
    qhat = estimate(counts, gain, reference_means)
    return summarize(qhat, config.q_true, fisher)


def summarize(qhat, q_true, fisher):
    """Moments of ``qhat`` with standard errors (fixed-order reductions)."""
    qhat = np.ascontiguousarray(qhat, dtype=float)
    N = qhat.size
    mean = float(np.mean(qhat))
    dev = qhat - mean
    m2 = float(np.mean(dev * dev))
    var = m2 * N / (N - 1) if N > 1 else 0.0
    m4 = float(np.mean(dev**4))
    se_var = float(np.sqrt(max(m4 - m2 * m2 * (N - 3) / (N - 1), 0.0) / N)) if N > 3 else float("nan")
    return TrialReport(n_trials=N, q_true=float(q_true), mean=mean, variance=var,
                       stderr_mean=float(np.sqrt(var / N)), stderr_variance=se_var, fisher=float(fisher))
