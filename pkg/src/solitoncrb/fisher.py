"""Fisher information and Cramer-Rao bounds for the soliton position."""

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate as si
import scipy.linalg as sla

from .errors import DegenerateModelError, ModelValidityError, NumericalPrecisionError
from .physics import SolitonModel, pixel_mean_derivative, pixel_means

EMPTY_PIXEL_FLOOR = 1e-12
RICHARDSON_RTOL = 1e-3


@dataclass(frozen=True)
class FisherResult:
    F: float
    tag: str
    breakdown: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.F) and self.F > 0):
            raise DegenerateModelError(f"Fisher information must be positive, got {self.F!r}")

    @property
    def crb_sigma(self):
        return self.F ** -0.5

    def rescaled(self, xi):
        """Dimensionless ``F * xi^2``."""
        return self.F * xi**2


def fisher_poisson_closed(params):
    """Continuum-limit Poisson information ``16 sqrt(m g) n^(3/2) / (3 hbar)``."""
    F = 16.0 * np.sqrt(params.m * params.g) * params.n**1.5 / (3.0 * params.hbar)
    return FisherResult(F=F, tag="poisson-closed")


def fisher_poisson_quadrature(params, q=0.0):
    """``4 int (d sqrt(rho) / dq)^2 dx`` by adaptive quadrature; reference for the closed form."""
    n, kappa = params.n, params.kappa

    def integrand(x):
        # d/dq of sqrt(n) |tanh(kappa (x - q))|, with sech^2 written to avoid overflow
        e = np.exp(-2.0 * abs(kappa * (x - q)))
        return 4.0 * (np.sqrt(n) * kappa * 4.0 * e / (1.0 + e) ** 2) ** 2

    left, _ = si.quad(integrand, -np.inf, q, epsabs=0.0, epsrel=1e-13, limit=200)
    right, _ = si.quad(integrand, q, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return FisherResult(F=left + right, tag="poisson-quadrature")


def _usable(mean, floor):
    keep = mean >= floor
    if not np.any(keep):
        raise DegenerateModelError("every pixel is empty")
    return keep


def fisher_poisson_pixelated(model, grid):
    """``sum_s (dn_s/dq)^2 / n_s`` over non-empty pixels."""
    mean = pixel_means(model, grid)
    dmean = pixel_mean_derivative(model, grid)
    keep = _usable(mean, EMPTY_PIXEL_FLOOR * model.params.n * grid.dx)
    F = float(np.sum(dmean[keep] ** 2 / mean[keep]))
    return FisherResult(F=F, tag="poisson", breakdown={"mean": F})


def fisher_gaussian_diag(model, grid):
    """Gaussian model with Poisson variances: the Poisson sum plus ``(1/2) sum (dn_s/dq)^2 / n_s^2``."""
    mean = pixel_means(model, grid)
    dmean = pixel_mean_derivative(model, grid)
    keep = _usable(mean, EMPTY_PIXEL_FLOOR * model.params.n * grid.dx)
    first = float(np.sum(dmean[keep] ** 2 / mean[keep]))
    second = float(0.5 * np.sum(dmean[keep] ** 2 / mean[keep] ** 2))
    return FisherResult(F=first + second, tag="gaussian-diagonal",
                        breakdown={"mean": first, "covariance": second})


def gaussian_fisher_terms(dmean, cov, dcov):
    """Mean and covariance terms of the Gaussian Fisher information, trace form."""
    try:
        cf = sla.cho_factor(cov, lower=True)
    except sla.LinAlgError as exc:
        raise ModelValidityError("covariance is not positive definite") from exc
    mean_term = float(dmean @ sla.cho_solve(cf, dmean))
    A = sla.cho_solve(cf, dcov)
    cov_term = float(0.5 * np.sum(A * A.T))
    return mean_term, cov_term


def _central(fun, q, h):
    plus, minus = fun(q + h), fun(q - h)
    return (plus.mean - minus.mean) / (2 * h), (plus.cov - minus.cov) / (2 * h)


def fisher_gaussian_general(count_model_at, q, h):
    """Gaussian Fisher information ``dn' C^-1 dn + (1/2) tr[(C^-1 dC)^2]``.

    ``count_model_at(q)`` returns a :class:`CountModel`. Derivatives are
    central differences; the value from steps ``h`` and ``h/2`` must agree to
    ``RICHARDSON_RTOL``, and the Richardson-extrapolated derivatives are used.
    """
    centre = count_model_at(q)
    dm1, dc1 = _central(count_model_at, q, h)
    dm2, dc2 = _central(count_model_at, q, h / 2)
    F1 = sum(gaussian_fisher_terms(dm1, centre.cov, dc1))
    F2 = sum(gaussian_fisher_terms(dm2, centre.cov, dc2))
    dm = (4 * dm2 - dm1) / 3
    dc = (4 * dc2 - dc1) / 3
    mean_term, cov_term = gaussian_fisher_terms(dm, centre.cov, dc)
    F = mean_term + cov_term
    rel = abs(F1 - F2) / abs(F) if F != 0 else abs(F1 - F2)
    if rel > RICHARDSON_RTOL:
        raise NumericalPrecisionError(
            f"finite-difference Fisher information not converged: steps h and h/2 differ by {rel:.2e}"
        )
    return FisherResult(F=F, tag=centre.tag,
                        breakdown={"mean": mean_term, "covariance": cov_term, "richardson_rel": rel})


def fisher_gaussian_determinant(count_model_at, q, h):
    """Literal determinant form of the Gaussian Fisher information (reference only).

    Evaluates ``1/2 { det''/det - (det'/det)^2 + sum_sj [ (C^-1)''_sj C_sj
    + 2 (C^-1)_sj dn_s dn_j ] }`` with five-point stencils. Determinants
    enter as ratios to ``det C(q)`` so that large pixel counts do not overflow.
    """
    offsets = (-2, -1, 0, 1, 2)
    models = {o: count_model_at(q + o * h) for o in offsets}
    _, logdet0 = np.linalg.slogdet(models[0].cov)
    ratio = {}
    inv = {}
    for o, cm in models.items():
        sign, logdet = np.linalg.slogdet(cm.cov)
        if sign <= 0:
            raise ModelValidityError("covariance is not positive definite")
        ratio[o] = np.exp(logdet - logdet0)
        inv[o] = np.linalg.inv(cm.cov)

    def d1(f):
        return (f[-2] - 8 * f[-1] + 8 * f[1] - f[2]) / (12 * h)

    def d2(f):
        return (-f[-2] + 16 * f[-1] - 30 * f[0] + 16 * f[1] - f[2]) / (12 * h * h)

    mean = {o: cm.mean for o, cm in models.items()}
    det_ratio_1 = d1(ratio)
    det_ratio_2 = d2(ratio)
    inv_2 = d2(inv)
    dn = d1(mean)
    C = models[0].cov
    F = 0.5 * (det_ratio_2 - det_ratio_1**2 + np.sum(inv_2 * C) + 2.0 * dn @ inv[0] @ dn)
    return FisherResult(F=float(F), tag=models[0].tag, breakdown={"literal": True})


def poisson_factory(params, grid):
    """``q -> CountModel`` for the Poisson-covariance Gaussian model."""
    from .bogoliubov import gaussian_diag_count_model

    return lambda q: gaussian_diag_count_model(SolitonModel(params, q), grid)
