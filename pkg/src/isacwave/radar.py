"""Spatial beampattern tools: steering vectors, desired-pattern construction
from known target angles, and synthesis of the matching covariance matrix.

The covariance synthesizer is a projected-gradient least-squares fit: it is
given a nonnegative angular power profile and returns the closest Hermitian
PSD matrix with a uniform diagonal (equal per-antenna power), together with
a ridged Cholesky factor ready for downstream template construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TARGETS = (-45.0, 0.0, 45.0)
DEFAULT_BEAM_WIDTH = 10.0  # degrees


@dataclass(frozen=True)
class AngleGrid:
    """Uniform angular grid over [-90, 90] degrees, endpoints included."""

    angles: np.ndarray
    step: float

    def __post_init__(self):
        a = self.angles
        if a.ndim != 1 or a.size < 2:
            raise ValueError("grid needs at least two angles")
        if not (np.isclose(a[0], -90.0) and np.isclose(a[-1], 90.0)):
            raise ValueError("grid must span [-90, 90] degrees inclusive")
        d = np.diff(a)
        if np.any(d <= 0) or not np.allclose(d, self.step, rtol=1e-9, atol=1e-9):
            raise ValueError("grid angles must increase uniformly by `step`")

    @classmethod
    def uniform(cls, step: float = 1.0) -> "AngleGrid":
        n_steps = round(180.0 / step)
        if n_steps < 1 or abs(n_steps * step - 180.0) > 1e-9:
            raise ValueError(f"step must divide 180 degrees, got {step}")
        return cls(np.linspace(-90.0, 90.0, n_steps + 1), float(step))

    @property
    def size(self) -> int:
        return self.angles.size


def steering_vector(angle_deg: float, n_antennas: int) -> np.ndarray:
    """Half-wavelength ULA response [1, e^{j pi sin(phi)}, ...] of length N."""
    if not -90.0 <= angle_deg <= 90.0:
        raise ValueError(f"angle must lie in [-90, 90] degrees, got {angle_deg}")
    phase = np.pi * np.sin(np.deg2rad(angle_deg))
    return np.exp(1j * phase * np.arange(n_antennas))


def steering_matrix(n_antennas: int, grid: AngleGrid) -> np.ndarray:
    """N x G matrix whose columns are the steering vectors of the grid angles."""
    phases = np.pi * np.sin(np.deg2rad(grid.angles))
    return np.exp(1j * np.outer(np.arange(n_antennas), phases))


def beampattern(r: np.ndarray, grid: AngleGrid) -> np.ndarray:
    """Spatial power profile a^H(phi) R a(phi) on the grid (real vector)."""
    a = steering_matrix(r.shape[0], grid)
    return np.einsum("ig,ij,jg->g", a.conj(), r, a).real


def desired_beampattern(targets, beam_width: float, grid: AngleGrid) -> np.ndarray:
    """Indicator profile: 1 within beam_width/2 of any target, else 0.

    Beam intervals are closed, so a grid point sitting exactly on an edge is
    inside; overlapping beams simply merge.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.size and (targets.min() < -90.0 or targets.max() > 90.0):
        raise ValueError("targets must lie within [-90, 90] degrees")
    pattern = np.zeros(grid.size)
    half = beam_width / 2.0 + 1e-9  # closed interval, guard roundoff
    for t in targets:
        pattern[np.abs(grid.angles - t) <= half] = 1.0
    return pattern


@dataclass(frozen=True)
class DesiredCovariance:
    """Synthesized target covariance: the matrix, its ridged lower-triangular
    factor, and the loss trace of the accepted fitting iterations."""

    matrix: np.ndarray
    factor: np.ndarray
    loss_trace: tuple

    def __post_init__(self):
        r = self.matrix
        n = r.shape[0]
        pt = self.total_power
        if pt <= 0.0:
            raise ValueError("covariance trace (total power) must be > 0")
        if not np.allclose(r, r.conj().T, atol=1e-12 * max(pt, 1.0)):
            raise ValueError("covariance must be Hermitian")
        if np.linalg.eigvalsh(r).min() < -1e-10 * pt:
            raise ValueError("covariance has a significantly negative eigenvalue")
        if not np.allclose(r.diagonal().real, pt / n, rtol=1e-8):
            raise ValueError("covariance diagonal must equal Pt/N")
        if not np.allclose(self.factor, np.tril(self.factor)):
            raise ValueError("factor must be lower triangular")
        ridge = 1e-10 * pt
        recon = self.factor @ self.factor.conj().T
        err = np.linalg.norm(recon - (r + ridge * np.eye(n)))
        if err > 1e-8 * np.linalg.norm(r):
            raise ValueError("factor does not reproduce the ridged covariance")

    @property
    def total_power(self) -> float:
        return float(np.trace(self.matrix).real)


def cholesky_with_ridge(r: np.ndarray) -> np.ndarray:
    """Lower-triangular F with F F^H = R + eps*I, eps = 1e-10 * trace(R).

    The ridge keeps near-singular beampattern-matched covariances
    factorizable. Raises if R is meaningfully non-PSD.
    """
    pt = float(np.trace(r).real)
    if pt <= 0.0:
        raise ValueError("covariance trace must be > 0")
    eigvals = np.linalg.eigvalsh(r)
    if eigvals.min() < -1e-6 * pt:
        raise ValueError(
            f"matrix is not PSD: min eigenvalue {eigvals.min():.3e} < {-1e-6 * pt:.3e}"
        )
    ridge = 1e-10 * pt * np.eye(r.shape[0])
    try:
        return np.linalg.cholesky(r + ridge)
    except np.linalg.LinAlgError:
        # Tiny negative eigenvalues: clip to the PSD cone, then factor.
        vals, vecs = np.linalg.eigh((r + r.conj().T) / 2.0)
        clipped = (vecs * np.maximum(vals, 0.0)) @ vecs.conj().T
        return np.linalg.cholesky(clipped + ridge)


def _psd_clip(r: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((r + r.conj().T) / 2.0)
    return (vecs * np.maximum(vals, 0.0)) @ vecs.conj().T


def synthesize_desired_covariance(
    pattern: np.ndarray,
    grid: AngleGrid,
    total_power: float,
    n_antennas: int,
) -> DesiredCovariance:
    """Fit a Hermitian PSD covariance with uniform diagonal to a power profile.

    Minimizes sum_i (a_i^H R a_i - c * pattern_i)^2 over R, with the profile
    scale c refit in closed form every iteration. Each gradient step is
    followed by projection onto the PSD cone (eigenvalue clipping) and a
    diagonal reset to Pt/N; a step is accepted only if the loss does not
    increase, so the recorded trace is monotone.
    """
    pattern = np.asarray(pattern, dtype=float)
    if pattern.shape != grid.angles.shape:
        raise ValueError("pattern and grid sizes differ")
    if np.any(pattern < 0):
        raise ValueError("pattern must be nonnegative")
    a = steering_matrix(n_antennas, grid)
    per_antenna = total_power / n_antennas
    pattern_energy = float(pattern @ pattern)

    def project(r):
        r = _psd_clip(r)
        np.fill_diagonal(r, per_antenna)
        return r

    def evaluate(r):
        y = np.einsum("ig,ij,jg->g", a.conj(), r, a).real
        c = float(y @ pattern / pattern_energy) if pattern_energy > 0 else 0.0
        e = y - c * pattern
        return float(e @ e), e

    r = per_antenna * np.eye(n_antennas, dtype=complex)
    loss, e = evaluate(r)
    trace = [loss]
    for _ in range(500):
        grad = 2.0 * (a * e) @ a.conj().T
        slope = np.einsum("ig,ij,jg->g", a.conj(), grad, a).real
        denom = float(slope @ slope)
        if denom <= 0.0:
            break
        step = float(e @ slope) / denom
        accepted = None
        for _ in range(30):
            cand = project(r - step * grad)
            cand_loss, cand_e = evaluate(cand)
            if cand_loss <= loss:
                accepted = (cand, cand_loss, cand_e)
                break
            step *= 0.5
        if accepted is None:
            break
        prev = loss
        r, loss, e = accepted
        trace.append(loss)
        if prev <= 0.0 or (prev - loss) / prev < 1e-6:
            break

    # The diagonal reset after each clip can leave eigenvalues a hair below
    # zero; alternate the two projections until they agree.
    floor = -1e-12 * total_power
    for _ in range(200):
        if np.linalg.eigvalsh(r).min() >= floor:
            break
        r = project(r)
    r = (r + r.conj().T) / 2.0
    return DesiredCovariance(
        matrix=r,
        factor=cholesky_with_ridge(r),
        loss_trace=tuple(trace),
    )
