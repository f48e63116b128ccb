"""Inner ADMM solver for the power- and PAPR-constrained waveform subproblem.

The subproblem is a least-squares fit ||A X - B||_F^2 with two coupling
constraints on the vectorized waveform x: a total-power sphere ||x||^2 = M*Pt
and a per-sample disk |x_n|^2 <= Pt*eta/N. ADMM splits these into auxiliary
variables alpha (sphere) and gamma (disk) with scaled-by-mu dual ascent.

Everything is kept in complex N x M form. The stacked objective matrix is
block-diagonal over symbols, so the x-update reduces to M independent N x N
Hermitian solves sharing one Cholesky factor; this is algebraically identical
to the dense solve on the stacked real/imaginary embedding (covered by an
oracle test).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import SolverAbort


@dataclass(frozen=True)
class StackedSystem:
    """Immutable data of one waveform subproblem instance.

    ``a`` stacks the weighted channel over an identity block, so that
    ||a X - b||^2 = rho*||H X - S||^2 + (1-rho)*||X - T||^2. The Cholesky
    factor of the x-update matrix (2 a^H a + 2 mu I) is precomputed; it
    depends only on the channel, rho, and mu, so swapping the template via
    :meth:`with_template` reuses it.
    """

    a: np.ndarray           # (K+N) x N
    b: np.ndarray           # (K+N) x M
    rho: float
    mu: float
    total_power: float
    papr_limit: float
    factor: tuple           # cho_factor handle of (2 a^H a + 2 mu I)
    atb2: np.ndarray        # 2 a^H b, N x M

    @property
    def n_antennas(self) -> int:
        return self.a.shape[1]

    @property
    def frame_len(self) -> int:
        return self.b.shape[1]

    def with_template(self, t: np.ndarray) -> "StackedSystem":
        """Replace the template block of b, keeping the factorization."""
        n = self.n_antennas
        k = self.a.shape[0] - n
        if t.shape != (n, self.frame_len):
            raise ValueError(f"template must be {n} x {self.frame_len}, got {t.shape}")
        b = self.b.copy()
        b[k:] = np.sqrt(1.0 - self.rho) * t
        return replace(self, b=b, atb2=2.0 * self.a.conj().T @ b)


@dataclass
class AdmmState:
    """Primal, auxiliary, and dual iterates, all complex N x M."""

    x: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    u: np.ndarray
    w: np.ndarray
    residuals: list


@dataclass(frozen=True)
class InnerDiagnostics:
    iterations: int
    converged: bool
    residuals: tuple


def build_stacked(
    h_eff: np.ndarray,
    s: np.ndarray,
    t: np.ndarray,
    rho: float,
    mu: float,
    total_power: float,
    papr_limit: float,
) -> StackedSystem:
    """Assemble the stacked least-squares system and its x-update factor."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if mu <= 0.0:
        raise ValueError(f"mu must be > 0, got {mu}")
    k, n = h_eff.shape
    m = s.shape[1]
    if s.shape != (k, m) or t.shape != (n, m):
        raise ValueError(
            f"inconsistent shapes: H={h_eff.shape}, S={s.shape}, T={t.shape}"
        )
    a = np.vstack([np.sqrt(rho) * h_eff, np.sqrt(1.0 - rho) * np.eye(n)])
    b = np.vstack([np.sqrt(rho) * s, np.sqrt(1.0 - rho) * t])
    gram = 2.0 * a.conj().T @ a + 2.0 * mu * np.eye(n)
    try:
        factor = cho_factor(gram)
    except (np.linalg.LinAlgError, ValueError) as exc:
        # Non-finite or non-positive-definite gram: the penalty weight has
        # pushed the normal matrix outside what the factorization can take.
        raise SolverAbort(f"waveform update factorization failed: {exc}") from exc
    return StackedSystem(
        a=a,
        b=b,
        rho=float(rho),
        mu=float(mu),
        total_power=float(total_power),
        papr_limit=float(papr_limit),
        factor=factor,
        atb2=2.0 * a.conj().T @ b,
    )


def x_update(sys: StackedSystem, st: AdmmState) -> np.ndarray:
    """Minimize the augmented Lagrangian over x: one Hermitian solve per symbol."""
    rhs = sys.atb2 - st.u - st.w + sys.mu * (st.alpha + st.gamma)
    # Skip the finiteness scan in the hot loop; solve_inner checks the
    # residual each iteration and aborts on non-finite values.
    return cho_solve(sys.factor, rhs, check_finite=False)


def alpha_update(
    x: np.ndarray,
    u: np.ndarray,
    mu: float,
    frame_len: int,
    total_power: float,
    prev: np.ndarray | None = None,
) -> np.ndarray:
    """Project x + u/mu onto the total-power sphere ||alpha||^2 = M*Pt."""
    v = x + u / mu
    norm = np.linalg.norm(v)
    if norm < 1e-300:
        if prev is None:
            raise ValueError("zero direction vector and no previous alpha")
        return prev.copy()
    return v * (np.sqrt(frame_len * total_power) / norm)


def gamma_update(
    x: np.ndarray,
    w: np.ndarray,
    mu: float,
    total_power: float,
    papr_limit: float,
    n_antennas: int,
) -> np.ndarray:
    """Project each sample of x + w/mu onto the disk |gamma_n|^2 <= Pt*eta/N."""
    cap = np.sqrt(total_power * papr_limit / n_antennas)
    v = x + w / mu
    mags = np.abs(v)
    scale = np.ones_like(mags)
    over = mags > cap
    scale[over] = cap / mags[over]
    return v * scale


def dual_update(x, alpha, gamma, u, w, mu):
    """Gradient-ascent step on both dual blocks."""
    return u + mu * (x - alpha), w + mu * (x - gamma)


def initial_state(x0: np.ndarray, sys: StackedSystem) -> AdmmState:
    """Feasible auxiliaries from a starting waveform, zero duals."""
    m = sys.frame_len
    zero = np.zeros_like(x0)
    return AdmmState(
        x=x0.copy(),
        alpha=alpha_update(x0, zero, sys.mu, m, sys.total_power),
        gamma=gamma_update(x0, zero, sys.mu, sys.total_power, sys.papr_limit,
                           sys.n_antennas),
        u=zero.copy(),
        w=zero.copy(),
        residuals=[],
    )


def solve_inner(
    sys: StackedSystem,
    st: AdmmState,
    inner_iters: int,
    tol: float,
) -> tuple[np.ndarray, InnerDiagnostics]:
    """Run x -> alpha -> gamma -> dual cycles until the primal residual
    max(||x - alpha||, max_n |x_n - gamma_n|) drops below tol*sqrt(M*Pt).

    The state is advanced in place (callers warm-start the next call with
    it). The returned waveform is the final x projected onto the power
    sphere, so the power equality holds exactly; PAPR is scale-invariant,
    so the projection does not disturb it.
    """
    m, pt = sys.frame_len, sys.total_power
    threshold = tol * np.sqrt(m * pt)
    iters = 0
    converged = False
    start = len(st.residuals)
    for _ in range(inner_iters):
        st.x = x_update(sys, st)
        st.alpha = alpha_update(st.x, st.u, sys.mu, m, pt, prev=st.alpha)
        st.gamma = gamma_update(st.x, st.w, sys.mu, pt, sys.papr_limit,
                                sys.n_antennas)
        st.u, st.w = dual_update(st.x, st.alpha, st.gamma, st.u, st.w, sys.mu)
        res = max(
            float(np.linalg.norm(st.x - st.alpha)),
            float(np.abs(st.x - st.gamma).max()),
        )
        if not np.isfinite(res):
            raise SolverAbort(f"non-finite ADMM residual at inner iteration {iters}")
        st.residuals.append(res)
        iters += 1
        if res < threshold:
            converged = True
            break
    norm = np.linalg.norm(st.x)
    if norm < 1e-300 or not np.isfinite(norm):
        raise SolverAbort("ADMM waveform iterate collapsed or diverged")
    x_out = st.x * (np.sqrt(m * pt) / norm)
    return x_out, InnerDiagnostics(
        iterations=iters,
        converged=converged,
        residuals=tuple(st.residuals[start:]),
    )
