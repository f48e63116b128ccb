"""Closed-form update of the radar template under an exact covariance tie.

The template T must satisfy (1/M) T T^H = R_d exactly while sitting as close
to the current waveform X as possible. Writing T = sqrt(M) F W with F the
(ridged) Cholesky factor of R_d turns the constraint into "W has orthonormal
rows", and minimizing ||T - X|| becomes an orthogonal Procrustes problem
solved by the SVD of F^H X.
"""

from __future__ import annotations

import numpy as np

from .exceptions import SolverAbort
from .model import initial_waveform


def t_update(x: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """Nearest template to x with (1/M) T T^H = factor @ factor^H.

    Requires M >= N so the row-orthonormal parametrization exists.
    """
    n, m = x.shape
    if m < n:
        raise ValueError(f"template update needs M >= N, got N={n}, M={m}")
    if factor.shape != (n, n):
        raise ValueError(f"factor must be {n} x {n}, got {factor.shape}")
    if not np.all(np.isfinite(x)):
        raise SolverAbort("template update received a non-finite waveform")
    try:
        u, _, vh = np.linalg.svd(factor.conj().T @ x, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SolverAbort(f"SVD failed in template update: {exc}") from exc
    return np.sqrt(m) * factor @ u @ vh


def t_initialize(
    h_eff: np.ndarray,
    s: np.ndarray,
    factor: np.ndarray,
    total_power: float,
) -> np.ndarray:
    """Starting template: project the scaled least-squares precoder."""
    return t_update(initial_waveform(h_eff, s, total_power), factor)
