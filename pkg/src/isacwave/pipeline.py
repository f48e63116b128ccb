"""Outer alternating solver: waveform ADMM, template projection, phase
descent, with convergence bookkeeping.

Each outer iteration updates the three blocks in order (X, then T, then
theta). The template step is an exact minimizer and the phase step is a
descent method, so neither may increase the trade-off objective; the
waveform step is an inexact inner ADMM and is allowed transient increases.
Convergence requires both a small relative objective change and a feasible
iterate (power equality, PAPR within the cap, inner solver converged).
"""

from __future__ import annotations

from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .admm import build_stacked, initial_state, solve_inner
from .manifold import build_ris_quadratic, theta_update
from .model import (
    ChannelSet,
    SystemConfig,
    effective_channel,
    generate_channels,
    generate_symbols,
    initial_waveform,
    mui_power,
    papr,
    random_phases,
)
from .radar import (
    DEFAULT_BEAM_WIDTH,
    DEFAULT_TARGETS,
    AngleGrid,
    DesiredCovariance,
    desired_beampattern,
    synthesize_desired_covariance,
)
from .template import t_update


@dataclass(frozen=True)
class SolveResult:
    """Final iterates plus per-outer-iteration traces.

    Trace entry 0 describes the initialization; entry i >= 1 describes the
    state after outer iteration i. ``objective_steps`` holds the objective
    after each block update (waveform, template, phases) of one iteration,
    for monotonicity checks on the two exact blocks.
    """

    x: np.ndarray
    theta: np.ndarray
    t: np.ndarray
    objective_trace: tuple
    papr_trace: tuple
    mui_trace: tuple
    objective_steps: tuple
    iterations_used: int
    converged: bool
    theta_updates: int
    stage_seconds: dict


def objective(cfg: SystemConfig, h_eff, x, t, s) -> float:
    """Weighted trade-off rho*||H X - S||^2 + (1-rho)*||X - T||^2."""
    rho = cfg.weight_rho
    return rho * mui_power(h_eff, x, s) + (1.0 - rho) * float(
        np.linalg.norm(x - t) ** 2
    )


def solve(
    cfg: SystemConfig,
    ch: ChannelSet,
    s: np.ndarray,
    cov: DesiredCovariance,
    theta0: np.ndarray | None = None,
) -> SolveResult:
    """Run the alternating design loop to convergence or the iteration cap.

    The only randomness is the initial phase vector, drawn from
    cfg.rng_seed (or passed explicitly via theta0); everything downstream
    is deterministic, so identical inputs give identical results.
    """
    n, k, l, m = cfg.n_antennas, cfg.n_users, cfg.n_ris, cfg.frame_len
    if (ch.n_users, ch.n_antennas, ch.n_ris) != (k, n, l):
        raise ValueError(
            f"channel dimensions {(ch.n_users, ch.n_antennas, ch.n_ris)} "
            f"do not match config {(k, n, l)}"
        )
    if s.shape != (k, m):
        raise ValueError(f"symbol matrix must be {k} x {m}, got {s.shape}")
    if cov.matrix.shape != (n, n):
        raise ValueError(f"covariance must be {n} x {n}, got {cov.matrix.shape}")
    if abs(cov.total_power - cfg.total_power) > 1e-6 * cfg.total_power:
        raise ValueError(
            f"covariance power {cov.total_power} does not match "
            f"cfg.total_power {cfg.total_power}"
        )

    if theta0 is None:
        theta = random_phases(l, np.random.default_rng(cfg.rng_seed))
    else:
        if theta0.shape != (l,):
            raise ValueError(f"theta0 must have shape ({l},), got {theta0.shape}")
        theta = theta0.copy()

    h_eff = effective_channel(ch, theta)
    x = initial_waveform(h_eff, s, cfg.total_power)
    t = t_update(x, cov.factor)
    sys = build_stacked(h_eff, s, t, cfg.weight_rho, cfg.penalty_mu,
                        cfg.total_power, cfg.papr_limit)
    st = initial_state(x, sys)

    obj = objective(cfg, h_eff, x, t, s)
    objective_trace = [obj]
    papr_trace = [papr(x)]
    mui_trace = [mui_power(h_eff, x, s)]
    objective_steps = []
    stage_seconds = {"waveform": 0.0, "template": 0.0, "phases": 0.0}
    theta_updates = 0
    iterations = 0
    converged = False

    for _ in range(cfg.outer_iters):
        tick = perf_counter()
        x, inner = solve_inner(sys, st, cfg.inner_iters, cfg.inner_tol)
        after_x = objective(cfg, h_eff, x, t, s)
        stage_seconds["waveform"] += perf_counter() - tick

        tick = perf_counter()
        t = t_update(x, cov.factor)
        after_t = objective(cfg, h_eff, x, t, s)
        stage_seconds["template"] += perf_counter() - tick

        tick = perf_counter()
        if l > 0:
            quad = build_ris_quadratic(ch, x, s)
            theta, _ = theta_update(quad, theta, cfg.manifold_iters,
                                    cfg.manifold_tol)
            theta_updates += 1
            h_eff = effective_channel(ch, theta)
            sys = build_stacked(h_eff, s, t, cfg.weight_rho, cfg.penalty_mu,
                                cfg.total_power, cfg.papr_limit)
        else:
            sys = sys.with_template(t)  # channel unchanged, factor reused
        after_theta = objective(cfg, h_eff, x, t, s)
        stage_seconds["phases"] += perf_counter() - tick

        iterations += 1
        objective_steps.append((after_x, after_t, after_theta))
        prev_obj, obj = obj, after_theta
        objective_trace.append(obj)
        current_papr = papr(x)
        papr_trace.append(current_papr)
        mui_trace.append(mui_power(h_eff, x, s))

        feasible = (
            current_papr <= cfg.papr_limit * (1.0 + 1e-3) and inner.converged
        )
        rel_change = abs(prev_obj - obj) / max(abs(prev_obj), 1e-300)
        if feasible and rel_change < cfg.obj_tol:
            converged = True
            break

    return SolveResult(
        x=x,
        theta=theta,
        t=t,
        objective_trace=tuple(objective_trace),
        papr_trace=tuple(papr_trace),
        mui_trace=tuple(mui_trace),
        objective_steps=tuple(objective_steps),
        iterations_used=iterations,
        converged=converged,
        theta_updates=theta_updates,
        stage_seconds=stage_seconds,
    )


def default_covariance(cfg: SystemConfig, targets=DEFAULT_TARGETS,
                       beam_width: float = DEFAULT_BEAM_WIDTH,
                       grid_step: float = 1.0) -> DesiredCovariance:
    """Desired covariance for the standard three-beam illumination."""
    grid = AngleGrid.uniform(grid_step)
    pattern = desired_beampattern(targets, beam_width, grid)
    return synthesize_desired_covariance(pattern, grid, cfg.total_power,
                                         cfg.n_antennas)


def complexity_probe(cfgs, seed: int = 0) -> list:
    """Time one solve per config and report per-iteration and per-stage cost.

    Intended for offline scaling inspection when varying one dimension
    across the list; no assertions are made here.
    """
    rows = []
    for i, cfg in enumerate(cfgs):
        ch = generate_channels(cfg, np.random.SeedSequence([seed, i, 0]))
        s = generate_symbols(cfg, np.random.SeedSequence([seed, i, 1]))
        cov = default_covariance(cfg)
        start = perf_counter()
        res = solve(cfg, ch, s, cov)
        total = perf_counter() - start
        rows.append(
            {
                "n_antennas": cfg.n_antennas,
                "n_users": cfg.n_users,
                "n_ris": cfg.n_ris,
                "frame_len": cfg.frame_len,
                "iterations": res.iterations_used,
                "total_seconds": total,
                "seconds_per_iteration": total / max(res.iterations_used, 1),
                "waveform_seconds": res.stage_seconds["waveform"],
                "template_seconds": res.stage_seconds["template"],
                "phases_seconds": res.stage_seconds["phases"],
            }
        )
    return rows
