"""Problem data types, random channel/symbol generation, and link metrics.

Conventions used throughout the package:

* waveforms ``X`` are N x M complex arrays (antennas x symbols in a frame),
* channel matrices are row-per-user,
* all powers are linear watts,
* vectorization is column-major (``order="F"``), i.e. symbol by symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Scalar problem parameters shared by every stage of the designer.

    Defaults follow the reference simulation setup: a 16-antenna base
    station serving 4 users through a 20-element reflecting surface, frames
    of 20 symbols, 20 dBm total transmit power.
    """

    n_antennas: int = 16          # N
    n_users: int = 4              # K
    n_ris: int = 20               # L, 0 disables the reflected path entirely
    frame_len: int = 20           # M
    total_power: float = 0.1      # Pt, linear watts (0.1 W = 20 dBm)
    noise_power: float = 1e-3     # sigma^2, linear watts
    weight_rho: float = 0.1       # 0 = radar matching only, 1 = communication only
    papr_limit: float = 2.0       # eta, must lie in [1, N*M]
    penalty_mu: float = 1.0       # ADMM penalty factor
    outer_iters: int = 100
    inner_iters: int = 30
    manifold_iters: int = 50
    obj_tol: float = 1e-5         # relative objective change, outer loop
    inner_tol: float = 1e-5       # primal residual scale, inner ADMM
    manifold_tol: float = 1e-6    # Riemannian gradient norm scale
    rng_seed: int = 0

    def __post_init__(self):
        n, k, l, m = self.n_antennas, self.n_users, self.n_ris, self.frame_len
        if not n >= k >= 1:
            raise ValueError(f"need n_antennas >= n_users >= 1, got N={n}, K={k}")
        if l < 0:
            raise ValueError(f"n_ris must be >= 0, got {l}")
        # The template update needs M >= N, so gate it here once.
        if m < n:
            raise ValueError(f"need frame_len >= n_antennas, got M={m}, N={n}")
        if not 1.0 <= self.papr_limit <= n * m:
            raise ValueError(f"papr_limit must lie in [1, N*M={n * m}], got {self.papr_limit}")
        if not 0.0 <= self.weight_rho <= 1.0:
            raise ValueError(f"weight_rho must lie in [0, 1], got {self.weight_rho}")
        if self.penalty_mu <= 0.0:
            raise ValueError(f"penalty_mu must be > 0, got {self.penalty_mu}")
        if self.total_power <= 0.0:
            raise ValueError(f"total_power must be > 0, got {self.total_power}")
        if self.noise_power <= 0.0:
            raise ValueError(f"noise_power must be > 0, got {self.noise_power}")
        for name in ("outer_iters", "inner_iters", "manifold_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("obj_tol", "inner_tol", "manifold_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")

    @property
    def snr_db(self) -> float:
        """Transmit SNR Pt/sigma^2 in dB."""
        return 10.0 * np.log10(self.total_power / self.noise_power)


@dataclass(frozen=True)
class ChannelSet:
    """Baseband channels: BS->users (K x N), RIS->users (K x L), BS->RIS (L x N)."""

    h_bu: np.ndarray
    h_ru: np.ndarray
    h_br: np.ndarray

    def __post_init__(self):
        k, n = self.h_bu.shape
        l = self.h_br.shape[0]
        if self.h_ru.shape != (k, l) or self.h_br.shape != (l, n):
            raise ValueError(
                "inconsistent channel shapes: "
                f"h_bu={self.h_bu.shape}, h_ru={self.h_ru.shape}, h_br={self.h_br.shape}"
            )
        for name in ("h_bu", "h_ru", "h_br"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def n_users(self) -> int:
        return self.h_bu.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.h_bu.shape[1]

    @property
    def n_ris(self) -> int:
        return self.h_br.shape[0]

    def without_ris(self) -> "ChannelSet":
        """Same direct channel with the reflected path removed (L = 0)."""
        k, n = self.h_bu.shape
        empty_ru = np.zeros((k, 0), dtype=complex)
        empty_br = np.zeros((0, n), dtype=complex)
        return ChannelSet(self.h_bu, empty_ru, empty_br)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. CN(0, 1) entries: real/imaginary parts N(0, 1/2) each."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_channels(cfg: SystemConfig, seed) -> ChannelSet:
    """Draw all three channel matrices with i.i.d. CN(0, 1) entries.

    Deterministic for a fixed seed; `seed` may be an int, a SeedSequence, or
    a Generator.
    """
    rng = np.random.default_rng(seed)
    k, n, l = cfg.n_users, cfg.n_antennas, cfg.n_ris
    return ChannelSet(
        h_bu=complex_gaussian(rng, (k, n)),
        h_ru=complex_gaussian(rng, (k, l)),
        h_br=complex_gaussian(rng, (l, n)),
    )


def generate_symbols(cfg: SystemConfig, seed) -> np.ndarray:
    """K x M frame of i.i.d. unit-modulus QPSK symbols (+-1 +-1j)/sqrt(2)."""
    rng = np.random.default_rng(seed)
    quadrant = rng.integers(0, 4, size=(cfg.n_users, cfg.frame_len))
    return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * quadrant))


def random_phases(n_elements: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus vector with i.i.d. uniform phases."""
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n_elements))


def effective_channel(ch: ChannelSet, theta: np.ndarray) -> np.ndarray:
    """Direct-plus-reflected downlink channel H_bu + H_ru diag(theta) H_br."""
    theta = np.asarray(theta)
    if theta.shape != (ch.n_ris,):
        raise ValueError(f"theta must have shape ({ch.n_ris},), got {theta.shape}")
    return ch.h_bu + (ch.h_ru * theta) @ ch.h_br


def mui_power(h_eff: np.ndarray, x: np.ndarray, s: np.ndarray) -> float:
    """Total multi-user interference power ||H X - S||_F^2."""
    if h_eff.shape[1] != x.shape[0] or (h_eff.shape[0], x.shape[1]) != s.shape:
        raise ValueError(
            f"inconsistent shapes: H={h_eff.shape}, X={x.shape}, S={s.shape}"
        )
    err = h_eff @ x - s
    return float(np.sum(np.abs(err) ** 2))


def sum_rate(h_eff: np.ndarray, x: np.ndarray, s: np.ndarray, noise_power: float) -> float:
    """Achievable sum rate in bit/s/Hz for a unit-energy constellation.

    Per-user interference is averaged over the frame's M symbols; the user
    SINR is then 1 / (interference + noise).
    """
    if noise_power <= 0.0:
        raise ValueError(f"noise_power must be > 0, got {noise_power}")
    m = s.shape[1]
    err = h_eff @ x - s
    mui_per_user = np.sum(np.abs(err) ** 2, axis=1) / m
    sinr = 1.0 / (mui_per_user + noise_power)
    return float(np.sum(np.log2(1.0 + sinr)))


def papr(x: np.ndarray) -> float:
    """Peak-to-average power ratio of the space-time block, in [1, N*M]."""
    power = np.abs(np.ravel(x, order="F")) ** 2
    total = power.sum()
    if total == 0.0:
        raise ValueError("PAPR is undefined for an all-zero waveform")
    return float(power.max() * power.size / total)


def initial_waveform(h_eff: np.ndarray, s: np.ndarray, total_power: float) -> np.ndarray:
    """Minimum-norm least-squares precoder scaled to ||X||^2 = M * Pt."""
    m = s.shape[1]
    x_ls = np.linalg.pinv(h_eff) @ s
    norm = np.linalg.norm(x_ls)
    if norm < 1e-12 * np.linalg.norm(s):
        # Degenerate (e.g. zero channel): fall back to a flat feasible waveform.
        x_ls = np.ones((h_eff.shape[1], m), dtype=complex)
        norm = np.linalg.norm(x_ls)
    return x_ls * (np.sqrt(m * total_power) / norm)
