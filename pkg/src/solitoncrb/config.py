"""Run configuration read from a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored. List values are comma separated.
Every key has a default; unknown keys are rejected with the offending line.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace

from .errors import ConfigError

# not part of the physics; left out of the config hash
NON_HASHED = ("threads", "out", "format")


def _floats(*vals):
    return field(default_factory=lambda: list(vals))


@dataclass(frozen=True)
class RunConfig:
    # physical parameters, soliton units (hbar = m = xi = 1)
    n_xi: list = _floats(10.0, 20.0, 50.0, 100.0)
    box_over_xi: float = 60.0

    # pixel sweep
    pixel_sweep_n_xi: float = 50.0
    dx_over_xi: list = _floats(0.05, 0.1, 0.2, 0.25, 0.5, 1.0, 2.0, 2.5, 5.0)
    half_width_over_xi: float = 10.0
    dip_offset_over_xi: float = 0.0

    # density sweep
    density_dx_over_xi: float = 0.5
    poisson_dx_over_xi: float = 0.01
    fd_step_over_xi: float = 0.01

    # Bogoliubov model
    k_max_over_kappa: float = 30.0
    quantization: str = "phase_shifted"
    quad_order: int = 16
    shot_diagonal: str = "bogoliubov"
    adjoint_origin: str = "box"

    # estimator
    gain: str = "meanfield-optimal"
    gain_discretization: str = "pixel-average"
    gain_clamp: float = 1e3

    # Monte Carlo
    model: str = "poisson"
    n_trials: int = 100000
    seed: int = 0
    q_over_xi: list = _floats(0.0)
    sim_n_xi: float = 135.0
    sim_dx_over_xi: float = 2.0
    sim_half_width_over_xi: float = 10.0
    poisson_gaussian_threshold: float = 1e3

    # mode diagnostics
    modes_n_xi: float = 50.0
    modes_box_over_xi: float = 50.0
    modes_count: int = 20
    oracle_step_over_xi: float = 0.05

    # execution and output
    threads: int = 1
    out: str = ""
    format: str = "csv"

    def __post_init__(self):
        checks = (
            (self.format in ("csv", "json"), "format must be csv or json"),
            (self.model in ("poisson", "gaussian-diagonal", "bogoliubov"),
             "model must be poisson, gaussian-diagonal or bogoliubov"),
            (self.gain in ("meanfield-optimal", "paper-empirical"), "gain must be meanfield-optimal or paper-empirical"),
            (self.gain_discretization in ("pixel-average", "midpoint"),
             "gain_discretization must be pixel-average or midpoint"),
            (self.quantization in ("phase_shifted", "periodic"), "quantization must be phase_shifted or periodic"),
            (self.shot_diagonal in ("bogoliubov", "meanfield"), "shot_diagonal must be bogoliubov or meanfield"),
            (self.adjoint_origin in ("box", "soliton"), "adjoint_origin must be box or soliton"),
            (self.threads >= 1, "threads must be >= 1"),
            (self.n_trials >= 1, "n_trials must be >= 1"),
            (0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer"),
            (self.quad_order >= 2, "quad_order must be >= 2"),
            (self.modes_count >= 1, "modes_count must be >= 1"),
            (len(self.n_xi) > 0 and len(self.dx_over_xi) > 0 and len(self.q_over_xi) > 0,
             "list values must not be empty"),
        )
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def hashed_dict(self):
        return {k: v for k, v in asdict(self).items() if k not in NON_HASHED}

    def config_hash(self):
        blob = json.dumps(self.hashed_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _convert(name, raw, default):
    if isinstance(default, list):
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    if isinstance(default, bool):
        if raw.lower() not in ("true", "false"):
            raise ValueError("expected true or false")
        return raw.lower() == "true"
    if isinstance(default, int):
        return int(raw, 0)
    if isinstance(default, float):
        return float(raw)
    return raw


def _default(name):
    f = _FIELDS[name]
    return f.default_factory() if callable(f.default_factory) else f.default


def parse_config(text, source="<config>"):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw, _default(key))
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path):
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
