"""Bogoliubov fluctuations around the dark soliton.

Phonon modes are the analytic Bogoliubov-de Gennes solutions on the soliton
background, the Goldstone sector holds the translation (``q``) and phase
(``theta``) zero modes together with their adjoints, and the pixel covariance
is assembled from the resulting density-density correlations.

The density correlation of the linearised theory contains a
``delta(x - y) * rho(x)`` shot-noise piece hidden in the phonon sum. Using the
completeness of the mode set it is split off exactly, leaving a smooth kernel
whose k-sum converges fast::

    sum_k f_k(x) f_k(y)* = delta(x - y) + 2 Re sum_k f_k(x) v_k(y)*
        - 2 sum_a [Im u_a(x) Im uad_a(y) + Re uad_a(x) Re u_a(y)]

with ``f_k = u_k + v_k`` and ``a`` running over the two zero modes. The shot-noise piece is then replaced by the pixel
mean on the diagonal of the count covariance.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, ModelValidityError
from .physics import (
    PhysicalParams,
    SolitonModel,
    condensate_number,
    density,
    order_parameter,
    pixel_means,
)
from .quadrature import panel_rule, panels_for

QUANTIZATIONS = ("phase_shifted", "periodic")
SHOT_DIAGONALS = ("bogoliubov", "meanfield")
ADJOINT_ORIGINS = ("box", "soliton")


@dataclass(frozen=True)
class BogoliubovConfig:
    """Numerical and modelling switches for the Bogoliubov count model.

    quantization: ``phase_shifted`` solves ``k L - 2 arctan(k / 2 kappa) = 2 pi j``,
        the exact condition for the analytic modes in a box with a soliton;
        ``periodic`` uses ``k = 2 pi j / L``.
    shot_diagonal: which pixel mean sits on the covariance diagonal.
    adjoint_origin: coordinate origin in the phase-mode adjoint; ``box`` measures
        x from the box centre, ``soliton`` from the soliton (translation covariant).
    """

    k_max_over_kappa: float = 30.0
    j_max: int | None = None
    quantization: str = "phase_shifted"
    quad_order: int = 16
    shot_diagonal: str = "bogoliubov"
    adjoint_origin: str = "box"
    include_phonons: bool = True
    include_goldstone: bool = True

    def __post_init__(self):
        if self.quantization not in QUANTIZATIONS:
            raise DomainError(f"quantization must be one of {QUANTIZATIONS}")
        if self.shot_diagonal not in SHOT_DIAGONALS:
            raise DomainError(f"shot_diagonal must be one of {SHOT_DIAGONALS}")
        if self.adjoint_origin not in ADJOINT_ORIGINS:
            raise DomainError(f"adjoint_origin must be one of {ADJOINT_ORIGINS}")
        if self.quad_order < 2:
            raise DomainError("quad_order must be >= 2")


def dispersion(params, k):
    """Bogoliubov energy ``hbar c |k| sqrt(1 + k^2 / 4 kappa^2)``."""
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise DomainError("dispersion is undefined at k = 0 (Goldstone sector)")
    return params.hbar * params.c * np.abs(k) * np.sqrt(1.0 + k**2 / (4.0 * params.kappa**2))


def quantized_wavenumbers(params, j, quantization="phase_shifted"):
    """Wavenumbers for integer labels ``j != 0``."""
    j = np.asarray(j)
    if np.any(j == 0):
        raise DomainError("j = 0 is not a phonon label")
    L = params.box_length
    k0 = 2.0 * np.pi * j / L
    if quantization == "periodic":
        return k0
    kappa = params.kappa
    # Newton on k L - 2 arctan(k / 2 kappa) - 2 pi j, monotone for L > 1/kappa
    k = 2.0 * np.pi * j / (L - 1.0 / kappa)
    for _ in range(60):
        f = k * L - 2.0 * np.arctan(k / (2.0 * kappa)) - 2.0 * np.pi * j
        df = L - (1.0 / kappa) / (1.0 + (k / (2.0 * kappa)) ** 2)
        step = f / df
        k = k - step
        if np.all(np.abs(step) <= 1e-15 * np.abs(k)):
            break
    return k


def default_j_max(params, k_max_over_kappa=30.0):
    return max(1, int(np.ceil(k_max_over_kappa * params.kappa * params.box_length / (2 * np.pi))))


def _sech2_box_integral(params, q):
    L, kappa = params.box_length, params.kappa
    return (np.tanh(kappa * (L / 2 - q)) + np.tanh(kappa * (L / 2 + q))) / kappa


class ModeSet:
    """Phonon modes on a discrete k-grid, soliton at ``q``.

    Normalisation constants come from the exact box integral of
    ``|u_k|^2 - |v_k|^2``; :meth:`normalization_residuals` re-checks them by
    quadrature.
    """

    def __init__(self, params, q=0.0, j_max=None, k_max_over_kappa=30.0, quantization="phase_shifted"):
        if quantization not in QUANTIZATIONS:
            raise DomainError(f"quantization must be one of {QUANTIZATIONS}")
        self.params = params
        self.q = float(q)
        self.quantization = quantization
        if j_max is None:
            j_max = default_j_max(params, k_max_over_kappa)
        self.j_max = int(j_max)
        jj = np.arange(1, self.j_max + 1)
        self.j = np.concatenate([-jj[::-1], jj])
        self.k = quantized_wavenumbers(params, self.j, quantization)
        self.eps = dispersion(params, self.k)
        gn = params.g * params.n
        kappa = params.kappa
        self.beta_plus = (self.k / kappa) ** 2 + 2.0 * self.eps / gn
        self.beta_minus = (self.k / kappa) ** 2 - 2.0 * self.eps / gn
        S = _sech2_box_integral(params, self.q)
        L = params.box_length
        k2 = self.k**2
        bracket = k2 * S + (self.beta_plus + self.beta_minus) * (k2 * L / 4 + kappa**2 * (L - S))
        self.norm = kappa / np.sqrt((self.beta_plus - self.beta_minus) * bracket)
        for a in (self.k, self.eps, self.beta_plus, self.beta_minus, self.norm):
            a.setflags(write=False)

    @classmethod
    def from_config(cls, params, q, config):
        return cls(params, q, j_max=config.j_max, k_max_over_kappa=config.k_max_over_kappa,
                   quantization=config.quantization)

    @property
    def k_max(self):
        return float(np.max(np.abs(self.k)))

    def __len__(self):
        return len(self.k)

    def _index(self, k):
        hit = np.flatnonzero(np.isclose(self.k, k, rtol=1e-12, atol=0.0))
        if hit.size == 0:
            raise DomainError(f"k={k!r} is not on the mode grid")
        return int(hit[0])

    def modes(self, x, index=None):
        """``(u, v)`` with shape ``(n_modes, len(x))`` (or a subset via ``index``)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        sl = slice(None) if index is None else index
        k = np.atleast_1d(self.k[sl])[:, None]
        bp = np.atleast_1d(self.beta_plus[sl])[:, None]
        bm = np.atleast_1d(self.beta_minus[sl])[:, None]
        pref = (np.atleast_1d(self.norm[sl]) / self.params.kappa)[:, None] * np.exp(1j * k * x[None, :])
        t = np.tanh(self.params.kappa * (x - self.q))[None, :]
        s2 = 1.0 - t * t
        B = k / 2 + 1j * self.params.kappa * t
        A = k * s2
        return pref * (A + bp * B), pref * (A + bm * B)

    def phonon_mode(self, k, x):
        i = self._index(k)
        u, v = self.modes(x, index=slice(i, i + 1))
        return u[0], v[0]

    def depletion(self, x):
        """Non-condensed density ``sum_k |v_k(x)|^2``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape)
        for chunk in _chunks(len(self.k), max(1, 2_000_000 // max(1, x.size))):
            _, v = self.modes(x, index=chunk)
            out += np.sum(v.real**2 + v.imag**2, axis=0)
        return out

    def normalization_residuals(self, order=16):
        """``int (|u|^2 - |v|^2) dx - 1`` per mode by composite Gauss-Legendre quadrature."""
        L = self.params.box_length
        # panels fine enough for the soliton core and for the largest k
        width = min(self.params.xi / 2, np.pi / self.k_max)
        n_pan = int(np.ceil(L / width))
        x, w = panel_rule(np.linspace(-L / 2, L / 2, n_pan + 1), order=order)
        x, w = x.ravel(), w.ravel()
        res = np.empty(len(self.k))
        for chunk in _chunks(len(self.k), max(1, 2_000_000 // x.size)):
            u, v = self.modes(x, index=chunk)
            res[chunk] = (np.abs(u) ** 2 - np.abs(v) ** 2) @ w - 1.0
        return res


def _chunks(n, size):
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))


def minimizing_state(params, adjoint_scale=1.0):
    """Gaussian zero-mode state minimising the mean density at the dip.

    Minimises ``<P_q^2> |uad_q(q)|^2 + |u_q(q)|^2 <theta_q^2>`` on the
    minimum-uncertainty line ``<P_q^2><theta_q^2> = 1/4`` with no
    ``P_q``-``theta_q`` correlation. ``adjoint_scale`` is ``|uad_q(q)|`` in units
    of ``1/(4 sqrt(n))`` (1 for an infinite box). Returns
    ``(<P_q^2>, <theta_q^2>)``; for unit scale these are ``2 n kappa`` and
    ``1/(8 n kappa)``.
    """
    n, kappa = params.n, params.kappa
    return 2.0 * n * kappa / adjoint_scale, adjoint_scale / (8.0 * n * kappa)


@dataclass(frozen=True)
class ZeroModeSector:
    """Goldstone modes and the second moments of their quantum state.

    Moments left as ``None`` take their defaults: ``<P_theta^2> = N0``, the
    density-minimising ``(<P_q^2>, <theta_q^2>)``, and the minimum-uncertainty
    phase spread ``<theta_theta^2> = 1 / (4 <P_theta^2>)``.

    ``q_adjoint="box"`` uses the translation adjoint of the finite box, the
    constant ``-i/(4 sqrt(n))`` tapered by ``1 - 2 x tanh(kappa (x - q)) / L``
    and renormalised; this keeps the mode set complete, which the bare
    constant (``q_adjoint="infinite"``) does not at box scale. ``x`` in both
    adjoints is measured from the box centre or from the soliton according to
    ``adjoint_origin``.
    """

    params: PhysicalParams
    q: float = 0.0
    P_theta2: float | None = None
    P_q2: float | None = None
    theta_q2: float | None = None
    theta_theta2: float | None = None
    Pq_thetaq_sym: float = 0.0
    Ptheta_thetatheta_sym: float = 0.0
    adjoint_origin: str = "box"
    q_adjoint: str = "box"
    N0: float = field(init=False)
    taper_norm: float = field(init=False)

    def __post_init__(self):
        if self.adjoint_origin not in ADJOINT_ORIGINS:
            raise DomainError(f"adjoint_origin must be one of {ADJOINT_ORIGINS}")
        if self.q_adjoint not in ("box", "infinite"):
            raise DomainError("q_adjoint must be 'box' or 'infinite'")
        N0 = condensate_number(SolitonModel(self.params, self.q))
        object.__setattr__(self, "N0", N0)
        object.__setattr__(self, "taper_norm", self._taper_norm())
        if self.P_theta2 is None:
            object.__setattr__(self, "P_theta2", N0)
        pq2, tq2 = minimizing_state(self.params, self.taper(self.q))
        if self.P_q2 is None:
            object.__setattr__(self, "P_q2", pq2)
        if self.theta_q2 is None:
            object.__setattr__(self, "theta_q2", tq2)
        if self.theta_theta2 is None:
            tt = 0.0 if self.P_theta2 == 0 else 1.0 / (4.0 * self.P_theta2)
            object.__setattr__(self, "theta_theta2", tt)

    def with_moments(self, **kw):
        return replace(self, **kw)

    def _sol(self):
        return SolitonModel(self.params, self.q)

    def _s2(self, x):
        return 1.0 / np.cosh(self.params.kappa * (np.asarray(x, dtype=float) - self.q)) ** 2

    def _origin(self, x):
        x = np.asarray(x, dtype=float)
        return x if self.adjoint_origin == "box" else x - self.q

    def _raw_taper(self, x):
        if self.q_adjoint == "infinite":
            return np.ones(np.shape(x))
        L, kappa = self.params.box_length, self.params.kappa
        return 1.0 - 2.0 * self._origin(x) * np.tanh(kappa * (np.asarray(x, dtype=float) - self.q)) / L

    def _taper_norm(self):
        if self.q_adjoint == "infinite":
            return 1.0
        # biorthogonality: int (kappa/2) sech^2 * taper dx = 1 over the box
        L = self.params.box_length
        xi = self.params.xi
        edges = np.linspace(-L / 2, L / 2, int(np.ceil(L / (0.25 * xi))) + 1)
        x, w = panel_rule(edges, order=16)
        return float(np.sum(w * 0.5 * self.params.kappa * self._s2(x) * self._raw_taper(x)))

    def taper(self, x):
        return self._raw_taper(x) / self.taper_norm

    def u_q(self, x):
        p = self.params
        return -1j * p.kappa * np.sqrt(p.n) * self._s2(x)

    def u_theta(self, x):
        return order_parameter(self._sol(), x) + 0j

    def u_q_ad(self, x):
        return -1j / (4.0 * np.sqrt(self.params.n)) * self.taper(x)

    def u_theta_ad(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        return (order_parameter(self._sol(), x) + 1j * self._origin(x) * self.u_q(x)) / (
            2.0 * (self.N0 + p.n / p.kappa))

    def v_q(self, x):
        return -np.conj(self.u_q(x))

    def v_theta(self, x):
        return -np.conj(self.u_theta(x))

    def v_q_ad(self, x):
        return np.conj(self.u_q_ad(x))

    def v_theta_ad(self, x):
        return np.conj(self.u_theta_ad(x))

    def density(self, x):
        """Zero-mode contribution ``Z(x)`` to the mean density (general four-term form)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        sectors = (
            (self.u_theta(x), self.u_theta_ad(x), self.P_theta2, self.theta_theta2, self.Ptheta_thetatheta_sym),
            (self.u_q(x), self.u_q_ad(x), self.P_q2, self.theta_q2, self.Pq_thetaq_sym),
        )
        for u, uad, P2, th2, corr in sectors:
            cross = np.conj(u) * uad
            out += np.abs(uad) ** 2 * P2 + np.abs(u) ** 2 * th2 - cross.real - 2.0 * cross.imag * corr
        return out


def zero_mode_density(sector, x):
    return sector.density(x)


def zero_mode_density_at_dip(params, q, N0, P_theta2, P_q2, theta_q2):
    """Closed-form ``Z`` evaluated at the soliton position (box-origin adjoint)."""
    n, kappa = params.n, params.kappa
    return (n * q**2 * kappa**2 / (4.0 * (N0 + n / kappa) ** 2) * P_theta2
            + P_q2 / (16.0 * n) + n * kappa**2 * theta_q2 - kappa / 4.0)


def mean_density_bdg(modeset, sector, x, tol=1e-10):
    """Mean density: condensate + depletion + zero-mode term. Either sector may be ``None``."""
    if modeset is not None:
        params, q = modeset.params, modeset.q
    elif sector is not None:
        params, q = sector.params, sector.q
    else:
        raise DomainError("need a mode set or a zero-mode sector to fix the soliton")
    if modeset is not None and sector is not None:
        _check_consistent(modeset, sector)
    x = np.asarray(x, dtype=float)
    out = density(SolitonModel(params, q), x)
    if modeset is not None:
        out = out + modeset.depletion(x.ravel()).reshape(x.shape)
    if sector is not None:
        out = out + sector.density(x)
    if np.any(out < -tol * params.n):
        raise ModelValidityError(
            f"negative Bogoliubov density (min {out.min():.3g}); the density is too low for Bogoliubov theory"
        )
    return out


def _check_consistent(modeset, sector):
    if modeset.params != sector.params or modeset.q != sector.q:
        raise DomainError("mode set and zero-mode sector describe different solitons")


def _goldstone_vectors(sector, x):
    """Real functions entering the Goldstone kernel: ``Phi``, ``uad_theta``, ``Im u_q``, ``Im uad_q``."""
    phi = sector.u_theta(x).real
    uad = sector.u_theta_ad(x).real
    imuq = sector.u_q(x).imag
    imuqad = sector.u_q_ad(x).imag
    return phi, uad, imuq, imuqad


def _goldstone_inner(sector, x, y, outer):
    """Bracket of the Goldstone kernel; ``outer(f, g)`` builds ``f(x) g(y)``."""
    px, ax, ix, rx = x
    py, ay, iy, ry = y
    return (
        # completeness of the mode set: what remains of the delta after the phonon sum
        -(outer(ax, py) + outer(px, ay))
        - (outer(ix, ry) + outer(rx, iy))
        + 4.0 * sector.P_theta2 * outer(ax, ay)
        + 4.0 * sector.theta_q2 * outer(ix, iy)
    )


def _goldstone_kernel(sector, x, y):
    vx = _goldstone_vectors(sector, x)
    vy = _goldstone_vectors(sector, y)
    return np.outer(vx[0], vy[0]) * _goldstone_inner(sector, vx, vy, np.outer)


def _phonon_kernel(modeset, x, y):
    ux, vx = modeset.modes(x)
    uy, vy = modeset.modes(y)
    fx, fy = ux + vx, uy + vy
    s = fx.T @ np.conj(vy) + vx.T @ np.conj(fy)
    phi = order_parameter(SolitonModel(modeset.params, modeset.q), x), order_parameter(
        SolitonModel(modeset.params, modeset.q), y)
    return np.outer(phi[0], phi[1]) * s.real


def density_correlation(modeset, sector, x, y, parts=False):
    """Smooth density covariance ``C(x, y)`` with the shot-noise delta removed.

    Returns the matrix over ``x`` by ``y``; with ``parts=True`` returns
    ``(phonon, goldstone)`` separately.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ph = _phonon_kernel(modeset, x, y) if modeset is not None else np.zeros((x.size, y.size))
    gs = _goldstone_kernel(sector, x, y) if sector is not None else np.zeros((x.size, y.size))
    if modeset is not None and sector is not None:
        _check_consistent(modeset, sector)
    if parts:
        return ph, gs
    return ph + gs


def literal_density_correlation(modeset, sector, x, y):
    """Truncated phonon sum plus Goldstone term exactly as in the Bogoliubov result.

    Still contains the (truncated) shot-noise delta; used as a reference only.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ux, vx = modeset.modes(x)
    uy, vy = modeset.modes(y)
    ph = ((ux + vx).T @ np.conj(uy + vy)).real
    _, ax, ix, _ = _goldstone_vectors(sector, x)
    _, ay, iy, _ = _goldstone_vectors(sector, y)
    gs = 4.0 * (sector.P_theta2 * np.outer(ax, ay) + sector.theta_q2 * np.outer(ix, iy))
    sol = SolitonModel(modeset.params, modeset.q)
    return np.outer(order_parameter(sol, x), order_parameter(sol, y)) * (ph + gs)


@dataclass(frozen=True)
class CountModel:
    """Mean counts and covariance for one measurement model.

    ``parts`` optionally splits the covariance into ``shot``, ``phonon`` and
    ``goldstone`` matrices that sum to ``cov``.
    """

    mean: np.ndarray
    cov: np.ndarray
    tag: str
    grid: object = None
    parts: dict | None = None

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise DomainError("covariance shape does not match the mean vector")
        if self.tag not in ("poisson", "gaussian-diagonal", "bogoliubov"):
            raise DomainError(f"unknown model tag {self.tag!r}")
        if np.any(mean < 0):
            raise ModelValidityError("negative mean count")
        if not np.array_equal(cov, cov.T):
            raise ModelValidityError("covariance is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def m_px(self):
        return self.mean.size

    def cholesky(self):
        """Lower Cholesky factor; raises :class:`ModelValidityError` if not positive definite."""
        try:
            return sla.cholesky(self.cov, lower=True)
        except sla.LinAlgError as exc:
            raise ModelValidityError(f"{self.tag} covariance is not positive definite") from exc


def poisson_count_model(model, grid, tag="poisson"):
    mean = pixel_means(model, grid)
    return CountModel(mean=mean, cov=np.diag(mean), tag=tag, grid=grid)


def gaussian_diag_count_model(model, grid):
    return poisson_count_model(model, grid, tag="gaussian-diagonal")


def _pixel_rule(grid, k_max, order):
    panels = panels_for(grid.dx, k_max, order) if k_max > 0 else 1
    return panel_rule(grid.edges, order=order, panels=panels)


def pixel_projections(modeset, sector, grid, order=16):
    """Pixel integrals of every function the covariance needs."""
    params = modeset.params if modeset is not None else sector.params
    q = modeset.q if modeset is not None else sector.q
    k_max = modeset.k_max if modeset is not None else 0.0
    nodes, weights = _pixel_rule(grid, max(k_max, 4 * params.kappa), order)
    flat = nodes.ravel()
    sol = SolitonModel(params, q)
    phi = order_parameter(sol, flat)
    out = {}

    def integrate(vals):
        return np.sum((vals.reshape(nodes.shape)) * weights, axis=-1)

    if modeset is not None:
        n_k = len(modeset)
        F = np.empty((n_k, grid.m_px), dtype=complex)
        Q = np.empty((n_k, grid.m_px), dtype=complex)
        dep = np.zeros(flat.size)
        for chunk in _chunks(n_k, max(1, 2_000_000 // flat.size)):
            u, v = modeset.modes(flat, index=chunk)
            F[chunk] = np.sum((phi * (u + v)).reshape(-1, *nodes.shape) * weights, axis=-1)
            Q[chunk] = np.sum((phi * v).reshape(-1, *nodes.shape) * weights, axis=-1)
            dep += np.sum(v.real**2 + v.imag**2, axis=0)
        out["phonon_F"] = F
        out["phonon_Q"] = Q
        out["depletion"] = integrate(dep)
    if sector is not None:
        # pixel integrals of Phi times each Goldstone function
        out["goldstone"] = tuple(integrate(phi * f) for f in _goldstone_vectors(sector, flat))
        out["zero_mode"] = integrate(sector.density(flat))
    return out


def covariance_matrix(modeset, sector, grid, order=16, shot_diagonal="bogoliubov"):
    """Bogoliubov count model on ``grid``.

    ``C = diag(shot) + phonon + goldstone`` where the shot diagonal uses the
    Bogoliubov or mean-field pixel means. With both sectors ``None`` this is
    the Poisson covariance.
    """
    if modeset is None and sector is None:
        raise DomainError("need a mode set or a zero-mode sector")
    if modeset is not None and sector is not None:
        _check_consistent(modeset, sector)
    if shot_diagonal not in SHOT_DIAGONALS:
        raise DomainError(f"shot_diagonal must be one of {SHOT_DIAGONALS}")
    params = modeset.params if modeset is not None else sector.params
    q = modeset.q if modeset is not None else sector.q
    grid.check_inside(params)
    sol = SolitonModel(params, q)
    mf_mean = pixel_means(sol, grid)
    proj = pixel_projections(modeset, sector, grid, order)
    m = grid.m_px
    phonon = np.zeros((m, m))
    goldstone = np.zeros((m, m))
    mean = mf_mean.copy()
    if modeset is not None:
        F, Q = proj["phonon_F"], proj["phonon_Q"]
        phonon = (F.T @ np.conj(Q)).real
        phonon = phonon + phonon.T
        mean = mean + proj["depletion"]
    if sector is not None:
        gv = proj["goldstone"]
        goldstone = _goldstone_inner(sector, gv, gv, np.outer)
        goldstone = 0.5 * (goldstone + goldstone.T)
        mean = mean + proj["zero_mode"]
    if np.any(mean < -1e-10 * params.n * grid.dx):
        raise ModelValidityError(f"negative Bogoliubov pixel mean (min {mean.min():.3g})")
    mean = np.maximum(mean, 0.0)
    shot = np.diag(mean if shot_diagonal == "bogoliubov" else mf_mean)
    cov = shot + phonon + goldstone
    cov = 0.5 * (cov + cov.T)
    cm = CountModel(mean=mean, cov=cov, tag="bogoliubov", grid=grid,
                    parts={"shot": shot, "phonon": phonon, "goldstone": goldstone})
    cm.cholesky()
    return cm


def bogoliubov_count_model(params, q, grid, config=None):
    config = config or BogoliubovConfig()
    ms = ModeSet.from_config(params, q, config) if config.include_phonons else None
    zs = ZeroModeSector(params, q, adjoint_origin=config.adjoint_origin) if config.include_goldstone else None
    if ms is None and zs is None:
        return poisson_count_model(SolitonModel(params, q), grid)
    return covariance_matrix(ms, zs, grid, order=config.quad_order, shot_diagonal=config.shot_diagonal)


def bogoliubov_factory(params, grid, config=None):
    """``q -> CountModel`` for derivative stencils."""
    config = config or BogoliubovConfig()
    return lambda q: bogoliubov_count_model(params, q, grid, config)


def finite_difference_spectrum(params, step=None, q=0.0, zero_cut=0.02):
    """Positive BdG energies from dense finite differences of the linearised GPE.

    Oracle for the analytic modes. The box is closed antiperiodically (the
    soliton carries a phase jump of pi) and the spectrum follows from
    ``eps^2 = eig[(H - G)(H + G)]`` with ``H = -hbar^2 d^2/2m + 2 g |Phi|^2 - mu``
    and ``G = g |Phi|^2``. Energies below ``zero_cut * hbar c kappa`` are the
    discretised Goldstone pair and are dropped.
    """
    h = params.xi / 20 if step is None else step
    L = params.box_length
    N = int(round(L / h))
    h = L / N
    x = -L / 2 + h * (np.arange(N) + 0.5)
    rho = density(SolitonModel(params, q), x)
    lap = (np.diag(np.full(N, -2.0)) + np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1))
    lap[0, -1] = lap[-1, 0] = -1.0
    kin = -(params.hbar**2 / (2 * params.m)) * lap / h**2
    g_rho = params.g * rho
    H = kin + np.diag(2 * g_rho - params.mu)
    G = np.diag(g_rho)
    e2 = sla.eigvals((H - G) @ (H + G)).real
    eps = np.sqrt(np.sort(e2[e2 > 0]))
    return eps[eps > zero_cut * params.hbar * params.c * params.kappa]
