"""Mean-field dark soliton, physical scales and pixel geometry.

Lengths are in whatever unit ``hbar``, ``m`` and ``g`` imply. The convenience
constructor :meth:`PhysicalParams.from_density` works in soliton units
(hbar = m = 1, healing length = 1) where the only free number is the
dimensionless density ``n * xi``.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError

MIN_BOX_OVER_XI = 50.0


class Scales(NamedTuple):
    xi: float
    kappa: float
    mu: float
    c: float


def derive_scales(params):
    """Healing length, inverse soliton width, chemical potential, sound speed."""
    hbar, m, g, n = params.hbar, params.m, params.g, params.n
    for name, val in (("hbar", hbar), ("m", m), ("g", g), ("n", n)):
        if not (np.isfinite(val) and val > 0):
            raise DomainError(f"{name} must be positive and finite, got {val!r}")
    xi = hbar / np.sqrt(2.0 * m * g * n)
    kappa = 1.0 / (np.sqrt(2.0) * xi)
    return Scales(xi=xi, kappa=kappa, mu=g * n, c=np.sqrt(g * n / m))


@dataclass(frozen=True)
class PhysicalParams:
    g: float
    n: float
    box_length: float
    hbar: float = 1.0
    m: float = 1.0
    scales: Scales = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sc = derive_scales(self)
        object.__setattr__(self, "scales", sc)
        if not self.box_length >= MIN_BOX_OVER_XI * sc.xi * (1 - 1e-12):
            raise DomainError(
                f"box_length={self.box_length!r} must be at least "
                f"{MIN_BOX_OVER_XI:g} healing lengths ({MIN_BOX_OVER_XI * sc.xi:.6g})"
            )

    @classmethod
    def from_density(cls, n_xi, box_over_xi=60.0, xi=1.0):
        """Soliton units: hbar = m = 1 and the healing length fixed to ``xi``."""
        if not n_xi > 0:
            raise DomainError(f"n_xi must be positive, got {n_xi!r}")
        n = n_xi / xi
        g = 1.0 / (2.0 * n * xi**2)
        return cls(g=g, n=n, box_length=box_over_xi * xi)

    @property
    def xi(self):
        return self.scales.xi

    @property
    def kappa(self):
        return self.scales.kappa

    @property
    def mu(self):
        return self.scales.mu

    @property
    def c(self):
        return self.scales.c

    @property
    def n_xi(self):
        return self.n * self.scales.xi


@dataclass(frozen=True)
class SolitonModel:
    params: PhysicalParams
    q: float = 0.0

    def __post_init__(self):
        if not abs(self.q) < self.params.box_length / 4:
            raise DomainError(f"soliton position q={self.q!r} must satisfy |q| < L/4")

    @property
    def kappa(self):
        return self.params.kappa

    @property
    def xi(self):
        return self.params.xi

    def shifted(self, q):
        return SolitonModel(self.params, q)


def order_parameter(model, x):
    p = model.params
    return np.sqrt(p.n) * np.tanh(p.kappa * (np.asarray(x, dtype=float) - model.q))


def order_parameter_d2(model, x):
    """Analytic second derivative of the order parameter in x."""
    p = model.params
    t = np.tanh(p.kappa * (np.asarray(x, dtype=float) - model.q))
    return -2.0 * np.sqrt(p.n) * p.kappa**2 * t * (1.0 - t * t)


def density(model, x):
    p = model.params
    return p.n * np.tanh(p.kappa * (np.asarray(x, dtype=float) - model.q)) ** 2


def gpe_residual(model, x, fd_step=None):
    """Residual of the stationary GPE at ``x``.

    With ``fd_step=None`` the analytic second derivative is used, otherwise a
    central second difference with that step (an independent check).
    """
    p = model.params
    x = np.asarray(x, dtype=float)
    phi = order_parameter(model, x)
    if fd_step is None:
        d2 = order_parameter_d2(model, x)
    else:
        h = fd_step
        d2 = (order_parameter(model, x + h) - 2 * phi + order_parameter(model, x - h)) / h**2
    return -(p.hbar**2 / (2 * p.m)) * d2 + p.g * phi**3 - p.mu * phi


def density_antiderivative(model, x):
    p = model.params
    x = np.asarray(x, dtype=float)
    return p.n * (x - np.tanh(p.kappa * (x - model.q)) / p.kappa)


def condensate_number(model):
    """Atoms in the mean-field condensate over the box ``[-L/2, L/2]``."""
    p = model.params
    half = p.box_length / 2
    k = p.kappa
    return p.n * (p.box_length - (np.tanh(k * (half - model.q)) + np.tanh(k * (half + model.q))) / k)


@dataclass(frozen=True)
class PixelGrid:
    """Contiguous pixels; pixel ``s`` covers ``[x0 + s*dx, x0 + (s+1)*dx)``."""

    x0: float
    dx: float
    m_px: int

    def __post_init__(self):
        if not self.dx > 0:
            raise DomainError(f"pixel width must be positive, got {self.dx!r}")
        if int(self.m_px) != self.m_px or self.m_px < 2:
            raise DomainError(f"need at least 2 pixels, got {self.m_px!r}")

    @classmethod
    def centered(cls, dx, m_px, offset=0.0):
        """Grid symmetric about ``offset``.

        With an even pixel count the centre falls on the border between the
        two central pixels, which is where a soliton at ``q = offset`` sits.
        """
        return cls(x0=offset - 0.5 * m_px * dx, dx=dx, m_px=int(m_px))

    @classmethod
    def covering(cls, dx, half_width, offset=0.0):
        """Even-count centred grid spanning at least ``[-half_width, half_width]``."""
        m = 2 * max(1, int(np.ceil(half_width / dx - 1e-9)))
        return cls.centered(dx, m, offset)

    @property
    def edges(self):
        return self.x0 + self.dx * np.arange(self.m_px + 1)

    @property
    def centers(self):
        return self.x0 + self.dx * (np.arange(self.m_px) + 0.5)

    @property
    def span(self):
        return self.m_px * self.dx

    def shifted(self, delta):
        return PixelGrid(self.x0 + delta, self.dx, self.m_px)

    def refined(self):
        """Each pixel split in two."""
        return PixelGrid(self.x0, self.dx / 2, 2 * self.m_px)

    def check_inside(self, params):
        half = params.box_length / 2
        tol = 1e-12 * params.box_length
        lo, hi = self.edges[0], self.edges[-1]
        if lo < -half - tol or hi > half + tol:
            raise DomainError(
                f"pixel grid [{lo:.6g}, {hi:.6g}] extends outside the box [{-half:.6g}, {half:.6g}]"
            )


def pixel_means(model, grid):
    """Expected atom count per pixel, from the exact antiderivative."""
    grid.check_inside(model.params)
    p = model.params
    e = grid.edges
    # difference of tanh taken separately to avoid cancellation against x
    t = np.tanh(p.kappa * (e - model.q))
    out = p.n * (np.diff(e) - np.diff(t) / p.kappa)
    return np.maximum(out, 0.0)


def pixel_mean_derivative(model, grid):
    """d(pixel_means)/dq, i.e. density at the left edge minus at the right edge."""
    grid.check_inside(model.params)
    rho = density(model, grid.edges)
    return rho[:-1] - rho[1:]
