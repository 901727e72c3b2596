"""Command-line front end: Fisher-information sweeps, Monte-Carlo runs and mode diagnostics.

Each subcommand builds a :class:`Table` (pure computation) and then writes it
as CSV or JSON with a provenance header. Sweep points run on a thread pool and
rows are kept in input order.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bogoliubov import (
    BogoliubovConfig,
    ModeSet,
    bogoliubov_count_model,
    bogoliubov_factory,
    finite_difference_spectrum,
    gaussian_diag_count_model,
    poisson_count_model,
)
from .config import load_config
from .errors import SolitonCRBError
from .estimator import make_gain, paper_empirical_gain, snr_analysis
from .fisher import (
    fisher_gaussian_determinant,
    fisher_gaussian_diag,
    fisher_gaussian_general,
    fisher_poisson_closed,
    fisher_poisson_pixelated,
)
from .montecarlo import TrialConfig, run_trials
from .physics import PhysicalParams, PixelGrid, SolitonModel

UNITS = "lengths in healing lengths xi (hbar = m = 1); F_xi2 = F * xi^2; energies in mu = g n"


@dataclass
class Table:
    command: str
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)


def _pmap(fun, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fun(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fun, items))


def _bog_config(cfg):
    return BogoliubovConfig(k_max_over_kappa=cfg.k_max_over_kappa, quantization=cfg.quantization,
                            quad_order=cfg.quad_order, shot_diagonal=cfg.shot_diagonal,
                            adjoint_origin=cfg.adjoint_origin)


def _slope_through_origin(x, y):
    x, y = np.asarray(x), np.asarray(y)
    return float(x @ y / (x @ x))


def pixel_sweep(cfg):
    """Poisson and Gaussian-diagonal ``F xi^2`` against pixel size, dip on a pixel border."""
    p = PhysicalParams.from_density(cfg.pixel_sweep_n_xi, cfg.box_over_xi)
    sol = SolitonModel(p, 0.0)

    def point(dx):
        grid = PixelGrid.covering(dx * p.xi, cfg.half_width_over_xi * p.xi, offset=-cfg.dip_offset_over_xi * p.xi)
        return [dx, grid.m_px,
                fisher_poisson_pixelated(sol, grid).rescaled(p.xi),
                fisher_gaussian_diag(sol, grid).rescaled(p.xi)]

    rows = _pmap(point, cfg.dx_over_xi, cfg.threads)
    summary = {"n_xi": cfg.pixel_sweep_n_xi, "F_xi2_closed_form": fisher_poisson_closed(p).rescaled(p.xi)}
    return Table("pixel-sweep", ["dx_over_xi", "m_px", "F_xi2_poisson", "F_xi2_gauss_diag"], rows, summary)


def density_point(cfg, n_xi, oracle=False):
    """One row of the density sweep (see :func:`density_sweep` for the columns)."""
    p = PhysicalParams.from_density(n_xi, cfg.box_over_xi)
    xi = p.xi
    sol = SolitonModel(p, 0.0)
    half = cfg.half_width_over_xi * xi
    fine = PixelGrid.covering(cfg.poisson_dx_over_xi * xi, half)
    grid = PixelGrid.covering(cfg.density_dx_over_xi * xi, half)
    bcfg = _bog_config(cfg)
    factory = bogoliubov_factory(p, grid, bcfg)
    h = cfg.fd_step_over_xi * xi
    F_bog = fisher_gaussian_general(factory, 0.0, h)
    cm = factory(0.0)
    # true slope of the Bogoliubov mean, so the SNR information is a genuine lower bound
    dmean = (factory(h).mean - factory(-h).mean) / (2 * h)
    gain = paper_empirical_gain(p, grid, discretization=cfg.gain_discretization, clamp=cfg.gain_clamp)
    snr = snr_analysis(gain, cm, dmean=dmean)
    row = [n_xi,
           fisher_poisson_pixelated(sol, fine).rescaled(xi),
           fisher_poisson_pixelated(sol, grid).rescaled(xi),
           fisher_gaussian_diag(sol, grid).rescaled(xi),
           F_bog.rescaled(xi),
           snr.information * xi**2,
           fisher_poisson_closed(p).rescaled(xi),
           snr.meanfield, snr.phonon, snr.goldstone]
    if oracle:
        # the determinant form cancels large terms; its stencil needs a finer step
        row.append(fisher_gaussian_determinant(factory, 0.0, h / 8).rescaled(xi))
    return row


def density_sweep(cfg, oracle=False):
    """``F xi^2`` against ``n xi`` for the Poisson and Bogoliubov models plus the empirical-gain SNR."""
    columns = ["n_xi", "F_xi2_poisson", "F_xi2_poisson_grid", "F_xi2_gauss_diag_grid", "F_xi2_bogoliubov",
               "snr_info_paper_gain", "F_xi2_closed_form", "dS2_meanfield", "dS2_phonon", "dS2_goldstone"]
    if oracle:
        columns.append("F_xi2_bogoliubov_determinant")
    rows = _pmap(lambda n: density_point(cfg, n, oracle), cfg.n_xi, cfg.threads)
    x = [r[0] for r in rows]
    summary = {f"slope_{c}": _slope_through_origin(x, [r[i] for r in rows])
               for i, c in enumerate(columns) if c.startswith(("F_xi2", "snr"))}
    summary["min_bogoliubov_minus_poisson"] = min(r[4] - r[2] for r in rows)
    summary["slope_reference"] = 16.0 / (3.0 * np.sqrt(2.0))
    return Table("density-sweep", columns, rows, summary)


def _count_model_at(cfg, p, grid, q):
    if cfg.model == "poisson":
        return poisson_count_model(SolitonModel(p, q), grid)
    if cfg.model == "gaussian-diagonal":
        return gaussian_diag_count_model(SolitonModel(p, q), grid)
    return bogoliubov_count_model(p, q, grid, _bog_config(cfg))


def _fisher(cfg, p, grid, q):
    if cfg.model == "poisson":
        return fisher_poisson_pixelated(SolitonModel(p, q), grid).F
    if cfg.model == "gaussian-diagonal":
        return fisher_gaussian_diag(SolitonModel(p, q), grid).F
    factory = bogoliubov_factory(p, grid, _bog_config(cfg))
    return fisher_gaussian_general(factory, q, cfg.fd_step_over_xi * p.xi).F


def simulate(cfg):
    """Monte-Carlo runs of the linear estimator, one row per true position.

    Row ``i`` uses seed ``cfg.seed + i`` (mod 2^64) so rows are independent.
    """
    p = PhysicalParams.from_density(cfg.sim_n_xi, cfg.box_over_xi)
    grid = PixelGrid.covering(cfg.sim_dx_over_xi * p.xi, cfg.sim_half_width_over_xi * p.xi)
    gain_kw = {"discretization": cfg.gain_discretization, "clamp": cfg.gain_clamp} if cfg.gain == "paper-empirical" else {}
    gain = make_gain(cfg.gain, p, grid, **gain_kw)
    reference = _count_model_at(cfg, p, grid, 0.0).mean
    columns = ["q_over_xi", "n_trials", "mean_over_xi", "bias_over_xi", "stderr_mean_over_xi",
               "variance_over_xi2", "stderr_variance_over_xi2", "crb_over_xi2", "var_times_F", "var_times_F_stderr",
               "min_mean_count"]
    rows = []
    for i, q in enumerate(cfg.q_over_xi):
        qx = q * p.xi
        cm = _count_model_at(cfg, p, grid, qx)
        tc = TrialConfig(n_trials=cfg.n_trials, seed=(cfg.seed + i) % 2**64, q_true=qx, model_tag=cfg.model,
                         gain_kind=cfg.gain, poisson_gaussian_threshold=cfg.poisson_gaussian_threshold)
        rep = run_trials(tc, cm, gain, reference, _fisher(cfg, p, grid, qx), threads=cfg.threads)
        xi = p.xi
        rows.append([q, rep.n_trials, rep.mean / xi, rep.bias / xi, rep.stderr_mean / xi, rep.variance / xi**2,
                     rep.stderr_variance / xi**2, rep.crb / xi**2, rep.ratio, rep.ratio_stderr,
                     float(cm.mean.min())])
    summary = {"n_xi": cfg.sim_n_xi, "dx_over_xi": cfg.sim_dx_over_xi, "m_px": grid.m_px,
               "model": cfg.model, "gain": cfg.gain}
    return Table("simulate", columns, rows, summary)


def modes(cfg, oracle=False):
    """Lowest phonon modes: wavenumber, energy and normalisation residual."""
    p = PhysicalParams.from_density(cfg.modes_n_xi, cfg.modes_box_over_xi)
    ms = ModeSet(p, 0.0, k_max_over_kappa=cfg.k_max_over_kappa, quantization=cfg.quantization)
    res = ms.normalization_residuals(cfg.quad_order)
    order = np.lexsort((ms.j, ms.eps))[: cfg.modes_count]
    columns = ["j", "k_over_kappa", "eps_over_mu", "norm_residual"]
    rows = [[int(ms.j[i]), ms.k[i] / p.kappa, ms.eps[i] / p.mu, res[i]] for i in order]
    summary = {"n_xi": cfg.modes_n_xi, "box_over_xi": cfg.modes_box_over_xi, "n_modes": len(ms),
               "max_abs_norm_residual": float(np.max(np.abs(res)))}
    if oracle:
        fd = finite_difference_spectrum(p, cfg.oracle_step_over_xi * p.xi)
        columns += ["eps_fd_over_mu", "rel_diff"]
        for r, e in zip(rows, fd):
            r += [e / p.mu, (r[2] * p.mu - e) / e]
        summary["max_abs_rel_diff"] = max(abs(r[-1]) for r in rows)
    return Table("modes", columns, rows, summary)


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % v


def _json_value(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def render(table, cfg, fmt):
    prov = {"program": "solitoncrb", "version": __version__, "command": table.command,
            "config_hash": cfg.config_hash(), "seed": cfg.seed, "units": UNITS}
    if fmt == "json":
        doc = {"provenance": prov, "columns": table.columns,
               "rows": [dict(zip(table.columns, map(_json_value, r))) for r in table.rows],
               "summary": {k: _json_value(v) for k, v in table.summary.items()}}
        return json.dumps(doc, indent=2) + "\n"
    lines = [f"# {k}: {v}" for k, v in prov.items()]
    lines.append("# columns: " + ", ".join(table.columns))
    lines.append(",".join(table.columns))
    lines += [",".join(_fmt(v) for v in r) for r in table.rows]
    lines += [f"# summary {k} = {_fmt(v)}" for k, v in table.summary.items()]
    return "\n".join(lines) + "\n"


COMMANDS = {
    "pixel-sweep": lambda cfg, oracle: pixel_sweep(cfg),
    "density-sweep": density_sweep,
    "simulate": lambda cfg, oracle: simulate(cfg),
    "modes": modes,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="solitoncrb", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "pixel-sweep": "rescaled Fisher information against pixel size",
        "density-sweep": "rescaled Fisher information against density (Poisson, Bogoliubov, SNR)",
        "simulate": "Monte-Carlo check of the Cramer-Rao bound",
        "modes": "phonon mode energies and normalisation residuals",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="flat key = value configuration file")
        sp.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--seed", type=int, help="unsigned 64-bit seed, overrides the config")
        sp.add_argument("--threads", type=int, help="worker threads")
        sp.add_argument("--oracle", action="store_true", help="add brute-force validation columns")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(format=args.format, out=args.out, seed=args.seed,
                                                      threads=args.threads)
        table = COMMANDS[args.command](cfg, args.oracle)
        text = render(table, cfg, cfg.format)
    except SolitonCRBError as exc:
        print(f"solitoncrb: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
