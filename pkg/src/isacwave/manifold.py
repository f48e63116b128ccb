"""RIS phase-shift subproblem: quadratic surrogate assembly and minimization
over the product-of-circles manifold {theta : |theta_l| = 1}.

For fixed waveform X the interference power is an exact quadratic in theta:

    ||H(theta) X - S||^2 = theta^H Q theta + 2 Re(d^T theta) + const

with Q Hermitian PSD (a Schur product of two PSD matrices). The minimizer is
sought by Riemannian gradient descent: project the Euclidean gradient onto
the circle tangent spaces, take an Armijo-backtracked step, and renormalize
each entry back to unit modulus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SolverAbort
from .model import ChannelSet


@dataclass(frozen=True)
class RisQuadratic:
    """Exact quadratic form of the interference power in theta."""

    q: np.ndarray        # L x L Hermitian PSD
    d: np.ndarray        # length L
    const_term: float

    def __post_init__(self):
        l = self.q.shape[0]
        if self.q.shape != (l, l) or self.d.shape != (l,):
            raise ValueError(
                f"inconsistent shapes: Q={self.q.shape}, d={self.d.shape}"
            )
        if l:
            scale = np.linalg.norm(self.q)
            if not np.allclose(self.q, self.q.conj().T, atol=1e-10 * max(scale, 1.0)):
                raise ValueError("Q must be Hermitian")
            if np.linalg.eigvalsh(self.q).min() < -1e-8 * scale:
                raise ValueError("Q must be positive semidefinite")

    @property
    def n_ris(self) -> int:
        return self.d.size


def build_ris_quadratic(ch: ChannelSet, x: np.ndarray, s: np.ndarray) -> RisQuadratic:
    """Assemble (Q, d, const) so the quadratic equals ||H(theta) X - S||^2."""
    err = ch.h_bu @ x - s               # K x M, theta-independent residual
    reflected = ch.h_br @ x             # L x M
    b = ch.h_ru.conj().T @ ch.h_ru
    c = reflected @ reflected.conj().T
    d = np.einsum("lm,km,kl->l", reflected, err.conj(), ch.h_ru)
    return RisQuadratic(
        q=b * c.T,
        d=d,
        const_term=float(np.linalg.norm(err) ** 2),
    )


def quadratic_objective(q: RisQuadratic, theta: np.ndarray) -> float:
    return float(
        (theta.conj() @ q.q @ theta).real
        + 2.0 * (q.d @ theta).real
        + q.const_term
    )


def riemannian_gradient(q: RisQuadratic, theta: np.ndarray) -> np.ndarray:
    """Euclidean gradient 2Q theta + 2 conj(d), projected onto the tangent
    space of the circle manifold at theta."""
    g = 2.0 * q.q @ theta + 2.0 * np.conj(q.d)
    return g - (g * theta.conj()).real * theta


def retract(theta: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Move to theta + v and renormalize each entry to the unit circle.

    Entries whose displaced value lands (numerically) on the origin keep
    their previous phase.
    """
    out = theta + v
    mags = np.abs(out)
    degenerate = mags < 1e-14
    safe = np.where(degenerate, 1.0, mags)
    out = out / safe
    if np.any(degenerate):
        out = np.where(degenerate, theta, out)
    return out


def theta_update(
    q: RisQuadratic,
    theta0: np.ndarray,
    max_iters: int,
    tol: float,
) -> tuple[np.ndarray, tuple]:
    """Riemannian gradient descent with Armijo backtracking.

    Stops when the Riemannian gradient norm falls below tol*(1 + |f(theta0)|)
    or after max_iters accepted steps. Returns the final point and the
    objective trace (non-increasing by construction).
    """
    f = quadratic_objective(q, theta0)
    if not np.isfinite(f):
        raise SolverAbort("non-finite objective entering the phase update")
    theta = theta0.copy()
    trace = [f]
    threshold = tol * (1.0 + abs(f))
    base_step = 1.0 / (2.0 * np.linalg.norm(q.q) + 1e-12)
    for _ in range(max_iters):
        r = riemannian_gradient(q, theta)
        r_sq = float(np.linalg.norm(r) ** 2)
        if np.sqrt(r_sq) < threshold:
            break
        step = base_step
        accepted = None
        for _ in range(60):
            cand = retract(theta, -step * r)
            f_cand = quadratic_objective(q, cand)
            if f_cand <= f - 1e-4 * step * r_sq:
                accepted = (cand, f_cand)
                break
            step *= 0.5
        if accepted is None:
            break  # no progress possible at float resolution
        theta, f = accepted
        if not np.isfinite(f):
            raise SolverAbort("phase update produced a non-finite objective")
        trace.append(f)
    return theta, tuple(trace)
