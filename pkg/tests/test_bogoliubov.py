import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solitoncrb.bogoliubov import (
    BogoliubovConfig,
    CountModel,
    ModeSet,
    ZeroModeSector,
    bogoliubov_count_model,
    covariance_matrix,
    density_correlation,
    dispersion,
    finite_difference_spectrum,
    mean_density_bdg,
    minimizing_state,
    pixel_projections,
    quantized_wavenumbers,
    zero_mode_density_at_dip,
)
from solitoncrb.errors import DomainError, ModelValidityError
from solitoncrb.physics import PhysicalParams, PixelGrid, SolitonModel, order_parameter, pixel_means

# mpmath root of k L - 2 arctan(k / 2 kappa) = 2 pi at L = 50 xi, and the
# normalisation of that mode by direct 30-digit integration over the box
ORACLE_K1 = 0.129311032321959178020
ORACLE_EPS1_OVER_MU = 0.183636296724657125802
ORACLE_M1 = 0.644481119313299784633


@pytest.fixture(scope="module")
def p50box():
    return PhysicalParams.from_density(50.0, box_over_xi=50.0)


@pytest.fixture(scope="module")
def modes50(p50box):
    return ModeSet(p50box)


def test_dispersion_limits(p50box):
    k = np.array([1e-4, -1e-4, 50.0])
    e = dispersion(p50box, k)
    assert e[0] == e[1]
    assert e[0] == pytest.approx(p50box.c * 1e-4, rel=1e-8)
    assert e[2] == pytest.approx(k[2] ** 2 / 2, rel=1e-3)  # free particle
    with pytest.raises(DomainError):
        dispersion(p50box, 0.0)


def test_lowest_mode_matches_oracle(p50box, modes50):
    i = int(np.flatnonzero(modes50.j == 1)[0])
    assert modes50.k[i] == pytest.approx(ORACLE_K1, rel=1e-13)
    assert modes50.eps[i] / p50box.mu == pytest.approx(ORACLE_EPS1_OVER_MU, rel=1e-13)
    assert modes50.norm[i] == pytest.approx(ORACLE_M1, rel=1e-12)


@given(j=st.integers(1, 500))
def test_quantization_condition(j):
    p = PhysicalParams.from_density(10.0)
    k = quantized_wavenumbers(p, np.array([j, -j]))
    L, kappa = p.box_length, p.kappa
    assert k[0] == -k[1]
    assert k[0] * L - 2 * np.arctan(k[0] / (2 * kappa)) == pytest.approx(2 * np.pi * j, rel=1e-14)
    assert quantized_wavenumbers(p, j, "periodic") == pytest.approx(2 * np.pi * j / L)


def test_modes_normalized(modes50):
    assert np.max(np.abs(modes50.normalization_residuals())) < 1e-6


def test_arrays_read_only(modes50):
    with pytest.raises(ValueError):
        modes50.k[0] = 1.0


@given(idx=st.integers(0, 99), q=st.floats(-2.0, 2.0))
def test_modes_solve_linearised_gpe(idx, q):
    p = PhysicalParams.from_density(20.0)
    ms = ModeSet(p, q, j_max=50)
    x = np.linspace(-8, 8, 401)
    h = 1e-3
    xs = np.concatenate([x - h, x, x + h])
    u, v = ms.modes(xs, index=slice(idx, idx + 1))
    u, v = u[0].reshape(3, -1), v[0].reshape(3, -1)
    lap_u = (u[0] - 2 * u[1] + u[2]) / h**2
    lap_v = (v[0] - 2 * v[1] + v[2]) / h**2
    phi = order_parameter(SolitonModel(p, q), x)
    g, mu, eps = p.g, p.mu, ms.eps[idx]
    Hu = -0.5 * lap_u + (2 * g * phi**2 - mu) * u[1] + g * phi**2 * v[1]
    Hv = -0.5 * lap_v + (2 * g * phi**2 - mu) * v[1] + g * phi**2 * u[1]
    scale = np.max(np.abs(u[1])) * (eps + mu)
    assert np.max(np.abs(Hu - eps * u[1])) < 1e-4 * scale
    assert np.max(np.abs(Hv + eps * v[1])) < 1e-4 * scale


def test_spectrum_against_finite_differences(p50box, modes50):
    fd = finite_difference_spectrum(p50box)
    analytic = np.sort(modes50.eps)[:10]
    assert np.max(np.abs(fd[:10] / analytic - 1)) < 1e-2
    # eigenvalues come in (+k, -k) pairs
    assert np.allclose(fd[:10:2], fd[1:10:2], rtol=1e-4)


def test_minimizing_state_is_minimum_uncertainty():
    p = PhysicalParams.from_density(37.0)
    for scale in (1.0, 0.97, 1.3):
        P2, t2 = minimizing_state(p, scale)
        assert P2 * t2 == 0.25
    P2, t2 = minimizing_state(p)
    assert (P2, t2) == (2 * p.n * p.kappa, 1 / (8 * p.n * p.kappa))
    assert zero_mode_density_at_dip(p, 0.0, 1.0, 1.0, P2, t2) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("q_adjoint", ["box", "infinite"])
@pytest.mark.parametrize("origin", ["box", "soliton"])
def test_zero_mode_density_vanishes_at_dip(q_adjoint, origin):
    p = PhysicalParams.from_density(50.0)
    z = ZeroModeSector(p, 0.0, q_adjoint=q_adjoint, adjoint_origin=origin)
    assert z.P_q2 * z.theta_q2 == pytest.approx(0.25, rel=1e-15)
    assert abs(z.density(np.array([0.0]))[0]) < 1e-8 * p.n


@given(q=st.floats(-3.0, 3.0), P2=st.floats(10.0, 1e4), Pq=st.floats(1.0, 100.0), tq=st.floats(1e-4, 1.0))
def test_closed_form_dip_density(q, P2, Pq, tq):
    p = PhysicalParams.from_density(50.0)
    z = ZeroModeSector(p, q, P_theta2=P2, P_q2=Pq, theta_q2=tq, q_adjoint="infinite")
    closed = zero_mode_density_at_dip(p, q, z.N0, P2, Pq, tq)
    assert z.density(np.array([q]))[0] == pytest.approx(closed, rel=1e-10, abs=1e-12)


def test_goldstone_biorthogonality(p50box):
    z = ZeroModeSector(p50box, 0.7)
    L = p50box.box_length
    x = np.linspace(-L / 2, L / 2, 200001)
    # normalisation of the translation adjoint over the box
    pair_q = np.trapezoid((np.conj(z.u_q(x)) * z.u_q_ad(x)).real, x)
    assert pair_q == pytest.approx(0.5, rel=1e-6)


def test_mean_density_positive_and_dip_filled(p50box, modes50):
    z = ZeroModeSector(p50box, 0.0)
    x = np.linspace(-5, 5, 101)
    rho = mean_density_bdg(modes50, z, x)
    assert np.all(rho >= 0)
    # quantum depletion fills the dip
    assert rho[50] > 0


def test_mismatched_sectors_rejected(p50box, modes50):
    with pytest.raises(DomainError):
        mean_density_bdg(modes50, ZeroModeSector(p50box, 0.5), np.zeros(1))


def test_correlation_symmetric(p50box, modes50):
    z = ZeroModeSector(p50box, 0.0)
    x = np.linspace(-4, 4, 17)
    C = density_correlation(modes50, z, x, x)
    assert np.allclose(C, C.T, atol=1e-12 * np.abs(C).max())


def _literal_pixel_covariance(ms, z, grid):
    """Pixel double integral of the truncated literal mode sum (contains a smeared delta)."""
    pr = pixel_projections(ms, z, grid)
    F = pr["phonon_F"]
    lit = (F.T @ np.conj(F)).real
    _, a, e, _ = pr["goldstone"]
    return lit + 4 * (z.P_theta2 * np.outer(a, a) + z.theta_q2 * np.outer(e, e))


def test_completeness_split_against_literal_sum():
    p = PhysicalParams.from_density(20.0, box_over_xi=50.0)
    grid = PixelGrid.covering(2.0, 4.0)
    z = ZeroModeSector(p, 0.0)
    ref = None
    errs = []
    for K in (30.0, 300.0):
        ms = ModeSet(p, 0.0, k_max_over_kappa=K)
        cm = covariance_matrix(ms, z, grid, shot_diagonal="meanfield")
        prod = cm.cov
        ref = prod if ref is None else ref
        errs.append(np.abs(_literal_pixel_covariance(ms, z, grid) - prod).max() / np.abs(prod).max())
    # the split kernel is cutoff-independent; the literal sum converges to it like 1/K
    assert np.abs(prod - ref).max() < 1e-4 * np.abs(ref).max()
    assert errs[1] < 5e-3 and errs[0] / errs[1] == pytest.approx(10, rel=0.2)


def test_count_model_parts_sum_to_covariance(p50box):
    grid = PixelGrid.covering(0.5, 6.0)
    cm = bogoliubov_count_model(p50box, 0.0, grid)
    total = cm.parts["shot"] + cm.parts["phonon"] + cm.parts["goldstone"]
    assert np.allclose(total, cm.cov, rtol=0, atol=1e-12 * np.abs(cm.cov).max())
    assert np.all(np.linalg.eigvalsh(cm.cov) > 0)


def test_k_cutoff_converged():
    p = PhysicalParams.from_density(50.0)
    grid = PixelGrid.covering(0.5, 10.0)
    a = bogoliubov_count_model(p, 0.0, grid, BogoliubovConfig(k_max_over_kappa=30.0)).cov
    b = bogoliubov_count_model(p, 0.0, grid, BogoliubovConfig(k_max_over_kappa=60.0)).cov
    d = np.sqrt(np.outer(np.diag(a), np.diag(a)))
    assert np.max(np.abs(a - b) / d) < 1e-4


def test_sectors_can_be_switched_off(params50, grid_half):
    cfg = BogoliubovConfig(include_phonons=False, include_goldstone=False)
    cm = bogoliubov_count_model(params50, 0.0, grid_half, cfg)
    assert cm.tag == "poisson"
    assert np.array_equal(cm.mean, pixel_means(SolitonModel(params50), grid_half))


def test_count_model_validation():
    with pytest.raises(ModelValidityError):
        CountModel(mean=np.array([1.0, -1.0]), cov=np.eye(2), tag="poisson")
    with pytest.raises(ModelValidityError):
        CountModel(mean=np.ones(2), cov=np.array([[1.0, 0.1], [0.0, 1.0]]), tag="poisson")
    with pytest.raises(DomainError):
        CountModel(mean=np.ones(2), cov=np.eye(3), tag="poisson")
    with pytest.raises(ModelValidityError):
        CountModel(mean=np.ones(2), cov=-np.eye(2), tag="bogoliubov").cholesky()


def test_bad_config_rejected():
    with pytest.raises(DomainError):
        BogoliubovConfig(quantization="dirichlet")


@given(q=st.floats(-3.0, 3.0))
def test_translation_covariance(q):
    p = PhysicalParams.from_density(50.0)
    grid = PixelGrid.covering(0.5, 5.0)
    cfg = BogoliubovConfig(adjoint_origin="soliton")
    a = bogoliubov_count_model(p, 0.0, grid, cfg)
    b = bogoliubov_count_model(p, q, grid.shifted(q), cfg)
    assert np.max(np.abs(a.cov - b.cov)) < 1e-8 * np.max(np.abs(a.cov))
    assert np.allclose(a.mean, b.mean, rtol=1e-8)


def test_box_origin_depends_on_position():
    # with x measured from the box centre the phase adjoint carries a q^2 term at the dip
    p = PhysicalParams.from_density(50.0)
    z0 = ZeroModeSector(p, 0.0, q_adjoint="infinite")
    z1 = ZeroModeSector(p, 2.0, q_adjoint="infinite")
    extra = p.n * 4.0 * p.kappa**2 / (4 * (z1.N0 + p.n / p.kappa) ** 2) * z1.P_theta2
    assert z1.density(np.array([2.0]))[0] - z0.density(np.array([0.0]))[0] == pytest.approx(extra, rel=1e-10)
