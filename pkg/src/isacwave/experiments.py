"""Seeded Monte-Carlo experiment drivers with CSV output.

Four experiment kinds are supported:

* ``papr-convergence``: per-iteration PAPR traces for a set of PAPR caps,
* ``sumrate-vs-snr``: achievable sum rate over a transmit-SNR sweep, with
  and without the reflecting surface,
* ``beampattern``: desired vs achieved spatial power profiles,
* ``mse-vs-rho``: beampattern matching error across the trade-off weight.

Experiment specs are flat ``key = value`` text files. Every CSV starts with
comment lines recording the complete configuration and seed; bodies are
written with 17-significant-digit floats so reruns are byte-identical and
downstream plotting is exact. The no-surface baseline always reuses the same
pipeline with the surface size set to zero, never a separate code path.

Trials are independent: each draws its channels, symbols, and initial phase
seed from a dedicated seed-sequence branch, so results do not depend on the
number of worker processes, and paired variants share their randomness
(common random numbers).
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import ConfigError
from .model import (
    SystemConfig,
    effective_channel,
    generate_channels,
    generate_symbols,
    sum_rate,
)
from .pipeline import solve
from .radar import (
    DEFAULT_BEAM_WIDTH,
    DEFAULT_TARGETS,
    AngleGrid,
    beampattern,
    desired_beampattern,
    synthesize_desired_covariance,
)

KINDS = ("papr-convergence", "sumrate-vs-snr", "beampattern", "mse-vs-rho")

# Which sweep key each kind reads from its spec file.
_SWEEP_KEYS = {
    "papr-convergence": "eta_values",
    "sumrate-vs-snr": "snr_db_values",
    "mse-vs-rho": "rho_values",
}

_DEFAULT_SWEEPS = {
    "papr-convergence": (1.5, 2.0, 3.0),
    "sumrate-vs-snr": (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
    "mse-vs-rho": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
}

_DEFAULT_TRIALS = {
    "papr-convergence": 5,
    "sumrate-vs-snr": 50,
    "beampattern": 20,
    "mse-vs-rho": 50,
}

_DEFAULT_OUTPUTS = {
    "papr-convergence": "papr_convergence.csv",
    "sumrate-vs-snr": "sumrate_vs_snr.csv",
    "beampattern": "beampattern.csv",
    "mse-vs-rho": "mse_vs_rho.csv",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: kind, base system parameters, sweep, and trial count."""

    kind: str
    base: SystemConfig
    sweep_values: tuple
    n_trials: int
    seed: int
    output_name: str
    targets: tuple = DEFAULT_TARGETS
    beam_width: float = DEFAULT_BEAM_WIDTH
    grid_step: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.kind == "beampattern":
            if self.sweep_values:
                raise ConfigError("beampattern experiments take no sweep values")
        else:
            if not self.sweep_values:
                raise ConfigError(f"{self.kind} needs a non-empty sweep")
            if not np.all(np.isfinite(self.sweep_values)):
                raise ConfigError("sweep values must be finite")
        if self.n_trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.n_trials}")
        if not self.targets:
            raise ConfigError("at least one radar target angle is required")


def default_spec(kind: str) -> ExperimentSpec:
    """Spec with the standard simulation parameters for the given kind."""
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    return ExperimentSpec(
        kind=kind,
        base=SystemConfig(),
        sweep_values=_DEFAULT_SWEEPS.get(kind, ()),
        n_trials=_DEFAULT_TRIALS[kind],
        seed=0,
        output_name=_DEFAULT_OUTPUTS[kind],
    )


# ---------------------------------------------------------------------------
# Spec file parsing and serialization

_INT_KEYS = {
    "seed", "trials", "n_antennas", "n_users", "n_ris", "frame_len",
    "outer_iters", "inner_iters", "manifold_iters",
}
_FLOAT_KEYS = {
    "total_power", "total_power_dbm", "noise_power", "snr_db", "rho", "eta",
    "mu", "obj_tol", "inner_tol", "manifold_tol", "beam_width", "grid_step",
}
_LIST_KEYS = {"eta_values", "snr_db_values", "rho_values", "targets"}
_STR_KEYS = {"kind", "output"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _LIST_KEYS | _STR_KEYS

# spec-file key -> SystemConfig field
_CONFIG_FIELDS = {
    "n_antennas": "n_antennas",
    "n_users": "n_users",
    "n_ris": "n_ris",
    "frame_len": "frame_len",
    "total_power": "total_power",
    "noise_power": "noise_power",
    "rho": "weight_rho",
    "eta": "papr_limit",
    "mu": "penalty_mu",
    "outer_iters": "outer_iters",
    "inner_iters": "inner_iters",
    "manifold_iters": "manifold_iters",
    "obj_tol": "obj_tol",
    "inner_tol": "inner_tol",
    "manifold_tol": "manifold_tol",
}


def _parse_scalar(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        value = float(raw)
    except ValueError:
        expected = "an integer" if key in _INT_KEYS else "a number"
        raise ConfigError(f"value for {key!r} must be {expected}, got {raw!r}")
    if not np.isfinite(value):
        raise ConfigError(f"value for {key!r} must be finite, got {raw!r}")
    return value


def parse_config(text: str) -> ExperimentSpec:
    """Parse a flat key=value experiment spec (# starts a comment)."""
    entries: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key in _STR_KEYS:
            entries[key] = raw
        elif key in _LIST_KEYS:
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if not parts:
                raise ConfigError(f"line {lineno}: empty list for {key!r}")
            entries[key] = tuple(_parse_scalar(f"{key} entry", p) for p in parts)
        else:
            entries[key] = _parse_scalar(key, raw)

    kind = entries.pop("kind", None)
    if kind is None:
        raise ConfigError("spec is missing the required 'kind' key")
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")

    # Power can be given in watts or dBm, noise in watts or as transmit SNR.
    if "total_power" in entries and "total_power_dbm" in entries:
        raise ConfigError("give either total_power or total_power_dbm, not both")
    if "total_power_dbm" in entries:
        entries["total_power"] = 10.0 ** ((entries.pop("total_power_dbm") - 30.0) / 10.0)
    if "noise_power" in entries and "snr_db" in entries:
        raise ConfigError("give either noise_power or snr_db, not both")
    if "snr_db" in entries:
        pt = entries.get("total_power", SystemConfig().total_power)
        entries["noise_power"] = pt * 10.0 ** (-entries.pop("snr_db") / 10.0)

    cfg_kwargs = {
        field: entries.pop(key)
        for key, field in _CONFIG_FIELDS.items()
        if key in entries
    }
    seed = entries.pop("seed", 0)
    cfg_kwargs.setdefault("rng_seed", seed)
    try:
        base = SystemConfig(**cfg_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sweep_key = _SWEEP_KEYS.get(kind)
    for key in _SWEEP_KEYS.values():
        if key in entries and key != sweep_key:
            raise ConfigError(f"key {key!r} is not valid for kind {kind!r}")
    sweep = entries.pop(sweep_key, _DEFAULT_SWEEPS[kind]) if sweep_key else ()

    return ExperimentSpec(
        kind=kind,
        base=base,
        sweep_values=tuple(float(v) for v in sweep),
        n_trials=entries.pop("trials", _DEFAULT_TRIALS[kind]),
        seed=seed,
        output_name=entries.pop("output", _DEFAULT_OUTPUTS[kind]),
        targets=tuple(float(t) for t in entries.pop("targets", DEFAULT_TARGETS)),
        beam_width=float(entries.pop("beam_width", DEFAULT_BEAM_WIDTH)),
        grid_step=float(entries.pop("grid_step", 1.0)),
    )


def write_config(spec: ExperimentSpec) -> str:
    """Serialize a spec to the flat key=value format (parse round-trips)."""
    base = spec.base
    lines = [
        f"kind = {spec.kind}",
        f"seed = {spec.seed}",
        f"trials = {spec.n_trials}",
        f"output = {spec.output_name}",
        f"n_antennas = {base.n_antennas}",
        f"n_users = {base.n_users}",
        f"n_ris = {base.n_ris}",
        f"frame_len = {base.frame_len}",
        f"total_power = {base.total_power!r}",
        f"noise_power = {base.noise_power!r}",
        f"rho = {base.weight_rho!r}",
        f"eta = {base.papr_limit!r}",
        f"mu = {base.penalty_mu!r}",
        f"outer_iters = {base.outer_iters}",
        f"inner_iters = {base.inner_iters}",
        f"manifold_iters = {base.manifold_iters}",
        f"obj_tol = {base.obj_tol!r}",
        f"inner_tol = {base.inner_tol!r}",
        f"manifold_tol = {base.manifold_tol!r}",
        f"targets = {', '.join(repr(t) for t in spec.targets)}",
        f"beam_width = {spec.beam_width!r}",
        f"grid_step = {spec.grid_step!r}",
    ]
    sweep_key = _SWEEP_KEYS.get(spec.kind)
    if sweep_key:
        lines.append(f"{sweep_key} = {', '.join(repr(v) for v in spec.sweep_values)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Shared driver plumbing


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, spec: ExperimentSpec, header, rows) -> None:
    meta = {
        "kind": spec.kind,
        "seed": spec.seed,
        "trials": spec.n_trials,
        "n_antennas": spec.base.n_antennas,
        "n_users": spec.base.n_users,
        "n_ris": spec.base.n_ris,
        "frame_len": spec.base.frame_len,
        "total_power": repr(spec.base.total_power),
        "noise_power": repr(spec.base.noise_power),
        "rho": repr(spec.base.weight_rho),
        "eta": repr(spec.base.papr_limit),
        "mu": repr(spec.base.penalty_mu),
        "outer_iters": spec.base.outer_iters,
        "inner_iters": spec.base.inner_iters,
        "manifold_iters": spec.base.manifold_iters,
        "obj_tol": repr(spec.base.obj_tol),
        "inner_tol": repr(spec.base.inner_tol),
        "manifold_tol": repr(spec.base.manifold_tol),
        "targets": ", ".join(repr(t) for t in spec.targets),
        "beam_width": repr(spec.beam_width),
        "grid_step": repr(spec.grid_step),
    }
    sweep_key = _SWEEP_KEYS.get(spec.kind)
    if sweep_key:
        meta[sweep_key] = ", ".join(repr(v) for v in spec.sweep_values)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        for key, value in meta.items():
            f.write(f"# {key} = {value}\r\n")
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _synthesize_covariance(spec: ExperimentSpec):
    grid = AngleGrid.uniform(spec.grid_step)
    pattern = desired_beampattern(spec.targets, spec.beam_width, grid)
    return grid, pattern, synthesize_desired_covariance(
        pattern, grid, spec.base.total_power, spec.base.n_antennas
    )


def _trial_inputs(spec: ExperimentSpec, trial: int):
    """Channels, symbols, and the phase-init seed for one trial."""
    ch = generate_channels(spec.base, np.random.SeedSequence([spec.seed, trial, 0]))
    s = generate_symbols(spec.base, np.random.SeedSequence([spec.seed, trial, 1]))
    theta_seed = int(np.random.SeedSequence([spec.seed, trial, 2]).generate_state(1)[0])
    return ch, s, theta_seed


def _map_trials(worker, spec: ExperimentSpec, cov, threads: int):
    """Run the per-trial worker for every trial, in trial order."""
    trials = range(spec.n_trials)
    if threads <= 1:
        return [worker(spec, cov, t) for t in trials]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, spec, cov, t) for t in trials]
        return [f.result() for f in futures]


def _normalize_pattern(pattern: np.ndarray, angles: np.ndarray, pt: float) -> np.ndarray:
    area = float(np.trapezoid(pattern, angles))
    if area <= 0.0:
        raise ConfigError("cannot normalize an all-zero beampattern")
    return pattern * (pt / area)


def iterations_within_band(trace, target: float, frac: float = 0.05):
    """First trace index whose value lies within frac*target of target."""
    arr = np.asarray(trace)
    hits = np.flatnonzero(np.abs(arr - target) <= frac * target)
    return int(hits[0]) if hits.size else None


# ---------------------------------------------------------------------------
# papr-convergence


@dataclass(frozen=True)
class PaprConvergenceResult:
    spec: ExperimentSpec
    csv_path: Path
    traces: dict  # (eta, trial) -> tuple of PAPR values per outer iteration


def _papr_trial(spec, cov, trial):
    ch, s, theta_seed = _trial_inputs(spec, trial)
    traces = {}
    for eta in spec.sweep_values:
        cfg = replace(spec.base, papr_limit=eta, rng_seed=theta_seed)
        traces[eta] = solve(cfg, ch, s, cov).papr_trace
    return trial, traces


def run_papr_convergence(spec: ExperimentSpec, out_dir, threads: int = 1):
    if spec.kind != "papr-convergence":
        raise ConfigError(f"expected kind papr-convergence, got {spec.kind!r}")
    _, _, cov = _synthesize_covariance(spec)
    results = _map_trials(_papr_trial, spec, cov, threads)
    traces = {}
    rows = []
    for trial, per_eta in results:
        for eta in spec.sweep_values:
            traces[(eta, trial)] = per_eta[eta]
    for eta in spec.sweep_values:
        for trial in range(spec.n_trials):
            for iteration, value in enumerate(traces[(eta, trial)]):
                rows.append((eta, trial, iteration, value))
    path = Path(out_dir) / spec.output_name
    _write_csv(path, spec, ["eta", "trial", "outer_iteration", "papr"], rows)
    return PaprConvergenceResult(spec=spec, csv_path=path, traces=traces)


# ---------------------------------------------------------------------------
# sumrate-vs-snr


@dataclass(frozen=True)
class SumRateResult:
    spec: ExperimentSpec
    csv_path: Path
    snr_db: tuple
    rates: dict  # variant -> (trials, n_snr) array


def _sumrate_trial(spec, cov, trial):
    ch, s, theta_seed = _trial_inputs(spec, trial)
    pt = spec.base.total_power
    noises = [pt * 10.0 ** (-snr / 10.0) for snr in spec.sweep_values]

    cfg_ris = replace(spec.base, rng_seed=theta_seed)
    res_ris = solve(cfg_ris, ch, s, cov)
    h_ris = effective_channel(ch, res_ris.theta)

    cfg_bare = replace(spec.base, n_ris=0, rng_seed=theta_seed)
    res_bare = solve(cfg_bare, ch.without_ris(), s, cov)

    with_ris = [sum_rate(h_ris, res_ris.x, s, n) for n in noises]
    without = [sum_rate(ch.h_bu, res_bare.x, s, n) for n in noises]
    return with_ris, without


def run_sumrate_vs_snr(spec: ExperimentSpec, out_dir, threads: int = 1):
    if spec.kind != "sumrate-vs-snr":
        raise ConfigError(f"expected kind sumrate-vs-snr, got {spec.kind!r}")
    _, _, cov = _synthesize_covariance(spec)
    results = _map_trials(_sumrate_trial, spec, cov, threads)
    rates = {
        "with_ris": np.array([r[0] for r in results]),
        "without_ris": np.array([r[1] for r in results]),
    }
    rows = []
    for j, snr in enumerate(spec.sweep_values):
        for variant in ("with_ris", "without_ris"):
            col = rates[variant][:, j]
            stderr = col.std(ddof=1) / np.sqrt(len(col)) if len(col) > 1 else 0.0
            rows.append((snr, variant, col.mean(), stderr))
    path = Path(out_dir) / spec.output_name
    _write_csv(path, spec, ["snr_db", "variant", "mean_sum_rate", "stderr"], rows)
    return SumRateResult(spec=spec, csv_path=path, snr_db=spec.sweep_values,
                         rates=rates)


# ---------------------------------------------------------------------------
# beampattern


@dataclass(frozen=True)
class BeampatternResult:
    spec: ExperimentSpec
    csv_path: Path
    angles: np.ndarray
    desired: np.ndarray
    patterns: dict  # variant -> mean normalized pattern over trials
    mse: dict       # variant -> per-trial mean-squared error (linear)


def _pattern_of(x, grid):
    m = x.shape[1]
    return beampattern(x @ x.conj().T / m, grid)


def _beampattern_trial(spec, cov, trial):
    ch, s, theta_seed = _trial_inputs(spec, trial)
    grid = AngleGrid.uniform(spec.grid_step)
    pt = spec.base.total_power

    cfg_ris = replace(spec.base, rng_seed=theta_seed)
    res_ris = solve(cfg_ris, ch, s, cov)
    cfg_bare = replace(spec.base, n_ris=0, rng_seed=theta_seed)
    res_bare = solve(cfg_bare, ch.without_ris(), s, cov)

    with_ris = _normalize_pattern(_pattern_of(res_ris.x, grid), grid.angles, pt)
    without = _normalize_pattern(_pattern_of(res_bare.x, grid), grid.angles, pt)
    return with_ris, without


def run_beampattern(spec: ExperimentSpec, out_dir, threads: int = 1):
    if spec.kind != "beampattern":
        raise ConfigError(f"expected kind beampattern, got {spec.kind!r}")
    grid, pattern, cov = _synthesize_covariance(spec)
    pt = spec.base.total_power
    desired = _normalize_pattern(pattern, grid.angles, pt)
    results = _map_trials(_beampattern_trial, spec, cov, threads)

    stacks = {
        "with_ris": np.array([r[0] for r in results]),
        "without_ris": np.array([r[1] for r in results]),
    }
    patterns = {k: v.mean(axis=0) for k, v in stacks.items()}
    mse = {k: np.mean((v - desired) ** 2, axis=1) for k, v in stacks.items()}

    rows = [
        (angle, desired[i], patterns["with_ris"][i], patterns["without_ris"][i])
        for i, angle in enumerate(grid.angles)
    ]
    path = Path(out_dir) / spec.output_name
    _write_csv(path, spec, ["angle_deg", "desired", "with_ris", "without_ris"], rows)
    return BeampatternResult(spec=spec, csv_path=path, angles=grid.angles,
                             desired=desired, patterns=patterns, mse=mse)


# ---------------------------------------------------------------------------
# mse-vs-rho


@dataclass(frozen=True)
class MseVsRhoResult:
    spec: ExperimentSpec
    csv_path: Path
    rho_values: tuple
    mse: dict  # variant -> (trials, n_rho) array of linear MSE values


def _mse_trial(spec, cov, trial):
    ch, s, theta_seed = _trial_inputs(spec, trial)
    grid = AngleGrid.uniform(spec.grid_step)
    pt = spec.base.total_power
    desired = _normalize_pattern(
        desired_beampattern(spec.targets, spec.beam_width, grid), grid.angles, pt
    )
    with_ris = []
    without = []
    for rho in spec.sweep_values:
        cfg_ris = replace(spec.base, weight_rho=rho, rng_seed=theta_seed)
        res_ris = solve(cfg_ris, ch, s, cov)
        cfg_bare = replace(spec.base, weight_rho=rho, n_ris=0, rng_seed=theta_seed)
        res_bare = solve(cfg_bare, ch.without_ris(), s, cov)
        p_ris = _normalize_pattern(_pattern_of(res_ris.x, grid), grid.angles, pt)
        p_bare = _normalize_pattern(_pattern_of(res_bare.x, grid), grid.angles, pt)
        with_ris.append(float(np.mean((p_ris - desired) ** 2)))
        without.append(float(np.mean((p_bare - desired) ** 2)))
    return with_ris, without


def run_mse_vs_rho(spec: ExperimentSpec, out_dir, threads: int = 1):
    if spec.kind != "mse-vs-rho":
        raise ConfigError(f"expected kind mse-vs-rho, got {spec.kind!r}")
    _, _, cov = _synthesize_covariance(spec)
    results = _map_trials(_mse_trial, spec, cov, threads)
    mse = {
        "with_ris": np.array([r[0] for r in results]),
        "without_ris": np.array([r[1] for r in results]),
    }
    rows = []
    for j, rho in enumerate(spec.sweep_values):
        for variant in ("with_ris", "without_ris"):
            rows.append((rho, variant, 10.0 * np.log10(mse[variant][:, j].mean())))
    path = Path(out_dir) / spec.output_name
    _write_csv(path, spec, ["rho", "variant", "mean_mse_db"], rows)
    return MseVsRhoResult(spec=spec, csv_path=path, rho_values=spec.sweep_values,
                          mse=mse)


# ---------------------------------------------------------------------------

_RUNNERS = {
    "papr-convergence": run_papr_convergence,
    "sumrate-vs-snr": run_sumrate_vs_snr,
    "beampattern": run_beampattern,
    "mse-vs-rho": run_mse_vs_rho,
}


def run_experiment(spec: ExperimentSpec, out_dir, threads: int = 1):
    """Dispatch to the driver for the spec's kind."""
    return _RUNNERS[spec.kind](spec, out_dir, threads)
