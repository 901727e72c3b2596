"""Linear position estimators built from weighted pixel counts.

An estimator here is ``q_hat = sum_s w_s (n_s - nbar_s(0))`` with weights
normalised so that ``sum_s w_s d nbar_s / dq = 1``, i.e. unbiased to first
order in the displacement.
"""

from dataclasses import dataclass

import numpy as np
import scipy.optimize as so

from .errors import DegenerateModelError, DomainError
from .fisher import EMPTY_PIXEL_FLOOR
from .physics import SolitonModel, pixel_mean_derivative, pixel_means

GAIN_CLAMP = 1e3
GAIN_KINDS = ("meanfield-optimal", "paper-empirical", "custom")
DISCRETIZATIONS = ("pixel-average", "midpoint")


def linear_expansion_f(params, x):
    """First-order coefficient ``f`` in ``sqrt(rho(x; q)) ~ sqrt(rho(x; 0)) + q f(x)``.

    Returns ``(f, degenerate)``; at ``x == 0`` the derivative of ``|tanh|`` is
    undefined and the symmetric-limit value 0 is returned with the flag set.
    """
    x = np.asarray(x, dtype=float)
    kappa = params.kappa
    f = -np.sqrt(params.n) * kappa * np.sign(x) / np.cosh(kappa * x) ** 2
    return f, x == 0


def beta_correction(n_xi):
    """Empirical correction ``tanh(0.014 n xi - 0.84)`` to the mean-field weights."""
    return np.tanh(0.014 * n_xi - 0.84)


def paper_gain(params, x, clamp=GAIN_CLAMP):
    """``g(x, n) = {1 - tanh^2(kappa x) (1 + beta) / 2} / tanh(kappa x)``, clamped to ``|g| <= clamp``."""
    x = np.asarray(x, dtype=float)
    beta = beta_correction(params.n_xi)
    t = np.tanh(params.kappa * x)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = (1.0 - t * t * (1.0 + beta) / 2.0) / t
    g = np.where(x == 0, 0.0, g)
    return np.clip(g, -clamp, clamp)


def _log_sinh(y):
    y = np.abs(y)
    return y + np.log1p(-np.exp(-2.0 * y)) - np.log(2.0)


def _log_cosh(y):
    y = np.abs(y)
    return y + np.log1p(np.exp(-2.0 * y)) - np.log(2.0)


def _paper_gain_antiderivative(params, x):
    """Antiderivative of the unclamped gain on ``x > 0``."""
    kappa = params.kappa
    beta = beta_correction(params.n_xi)
    y = kappa * np.asarray(x, dtype=float)
    return (_log_sinh(y) - 0.5 * (1.0 + beta) * _log_cosh(y)) / kappa


def _clamp_radius(params, clamp):
    """``x_c > 0`` with ``g(x_c) = clamp``; ``g`` decreases from +inf on ``(0, x_c]``."""
    kappa = params.kappa
    beta = beta_correction(params.n_xi)

    def h(x):
        t = np.tanh(kappa * x)
        return (1.0 - t * t * (1.0 + beta) / 2.0) / t - clamp

    hi = 10.0 / (kappa * clamp)
    while h(hi) > 0:
        hi *= 2
    return so.brentq(h, 1e-300, hi, xtol=1e-300, rtol=1e-15)


def _positive_integral(params, a, b, xc, clamp):
    """Integral of the clamped gain over ``0 <= a <= x <= b``."""
    total = 0.0
    lo = min(b, xc)
    if a < lo:
        total += clamp * (lo - a)
    a2 = max(a, xc)
    if a2 < b:
        total += _paper_gain_antiderivative(params, b) - _paper_gain_antiderivative(params, a2)
    return total


def paper_gain_pixel_average(params, edges, clamp=GAIN_CLAMP):
    """Exact pixel averages of the clamped empirical gain (odd in x)."""
    edges = np.asarray(edges, dtype=float)
    xc = _clamp_radius(params, clamp)
    out = np.empty(len(edges) - 1)
    for s, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        pos = _positive_integral(params, max(a, 0.0), b, xc, clamp) if b > 0 else 0.0
        neg = _positive_integral(params, max(-b, 0.0), -a, xc, clamp) if a < 0 else 0.0
        out[s] = (pos - neg) / (b - a)
    return out


@dataclass(frozen=True)
class GainFunction:
    """Normalised per-pixel weights for a linear position estimator.

    ``weights`` satisfy ``weights @ dmean_ref == 1`` where ``dmean_ref`` is the
    mean-count slope at the reference position ``q = 0``.
    """

    kind: str
    weights: np.ndarray
    grid: object
    raw: np.ndarray
    norm: float

    def __post_init__(self):
        if self.kind not in GAIN_KINDS:
            raise DomainError(f"gain kind must be one of {GAIN_KINDS}")
        if not np.all(np.isfinite(self.weights)):
            raise DegenerateModelError("non-finite gain weights")

    @classmethod
    def from_raw(cls, kind, raw, grid, dmean_ref):
        raw = np.asarray(raw, dtype=float)
        norm = float(raw @ dmean_ref)
        if norm == 0 or not np.isfinite(norm):
            raise DegenerateModelError("gain carries no first-order signal (zero normalisation)")
        return cls(kind=kind, weights=raw / norm, grid=grid, raw=raw, norm=norm)


def reference_slope(params, grid):
    return pixel_mean_derivative(SolitonModel(params, 0.0), grid)


def meanfield_optimal_gain(params, grid, dmean_ref=None):
    """Matched filter ``w_s ~ (d nbar_s / dq) / nbar_s``; attains the Poisson bound."""
    sol = SolitonModel(params, 0.0)
    mean = pixel_means(sol, grid)
    dmean = pixel_mean_derivative(sol, grid)
    keep = mean >= EMPTY_PIXEL_FLOOR * params.n * grid.dx
    raw = np.zeros_like(mean)
    raw[keep] = dmean[keep] / mean[keep]
    return GainFunction.from_raw("meanfield-optimal", raw, grid, dmean if dmean_ref is None else dmean_ref)


def paper_empirical_gain(params, grid, discretization="pixel-average", clamp=GAIN_CLAMP, dmean_ref=None):
    if discretization == "pixel-average":
        raw = paper_gain_pixel_average(params, grid.edges, clamp)
    elif discretization == "midpoint":
        raw = paper_gain(params, grid.centers, clamp)
    else:
        raise DomainError(f"discretization must be one of {DISCRETIZATIONS}")
    if dmean_ref is None:
        dmean_ref = reference_slope(params, grid)
    return GainFunction.from_raw("paper-empirical", raw, grid, dmean_ref)


def custom_gain(params, grid, table):
    table = np.asarray(table, dtype=float)
    if table.shape != (grid.m_px,):
        raise DomainError(f"custom gain needs {grid.m_px} weights, got shape {table.shape}")
    return GainFunction.from_raw("custom", table, grid, reference_slope(params, grid))


def make_gain(kind, params, grid, **kw):
    if kind == "meanfield-optimal":
        return meanfield_optimal_gain(params, grid)
    if kind == "paper-empirical":
        return paper_empirical_gain(params, grid, **kw)
    if kind == "custom":
        return custom_gain(params, grid, kw["table"])
    raise DomainError(f"gain kind must be one of {GAIN_KINDS}")


def estimate(counts, gain, reference_means):
    """``q_hat`` for one count vector or a batch (rows)."""
    counts = np.asarray(counts, dtype=float)
    reference_means = np.asarray(reference_means, dtype=float)
    m = gain.weights.size
    if counts.shape[-1] != m or reference_means.shape != (m,):
        raise DomainError(
            f"counts ({counts.shape[-1]}), reference ({reference_means.shape}) and gain ({m}) "
            "are on different grids"
        )
    return (counts - reference_means) @ gain.weights


@dataclass(frozen=True)
class SNRResult:
    """Signal per unit displacement and the split of the signal variance.

    ``goldstone`` is the signed Goldstone contribution; the positive
    ``goldstone_reduction = -goldstone`` is the term subtracted in
    ``total = meanfield + phonon - goldstone_reduction``.
    """

    signal_per_q: float
    total: float
    meanfield: float
    phonon: float
    goldstone: float
    quadratic_form: float

    @property
    def goldstone_reduction(self):
        return -self.goldstone

    @property
    def information(self):
        return self.signal_per_q**2 / self.total


def snr_analysis(gain, count_model, dmean=None):
    """Signal-to-noise split of a linear estimator on a count model.

    ``dmean`` defaults to the mean-field slope at ``q = 0``. Parts come from
    ``count_model.parts`` when present; a model without parts is pure shot noise.
    """
    w = gain.weights
    if count_model.mean.size != w.size:
        raise DomainError("gain and count model are on different grids")
    # weights are normalised against the mean-field slope, so its signal is 1
    signal = 1.0 if dmean is None else float(w @ dmean)
    parts = count_model.parts or {"shot": count_model.cov}
    shot = float(w @ parts["shot"] @ w)
    ph = float(w @ parts["phonon"] @ w) if "phonon" in parts else 0.0
    gs = float(w @ parts["goldstone"] @ w) if "goldstone" in parts else 0.0
    quad = float(w @ count_model.cov @ w)
    return SNRResult(signal_per_q=signal, total=shot + ph + gs, meanfield=shot, phonon=ph,
                     goldstone=gs, quadratic_form=quad)
