"""Tests for the covariance-constrained template update."""

import numpy as np
import pytest

from isacwave.exceptions import SolverAbort
from isacwave.model import complex_gaussian, initial_waveform
from isacwave.radar import AngleGrid, cholesky_with_ridge, desired_beampattern, \
    synthesize_desired_covariance
from isacwave.template import t_initialize, t_update


def random_unitary(rng, n):
    q, r = np.linalg.qr(complex_gaussian(rng, (n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def identity_factor(n):
    return cholesky_with_ridge(np.eye(n, dtype=complex))


def test_already_feasible_waveform_is_fixed_point():
    # With R_d = I (Pt = N) and X = sqrt(M) * unitary, X is itself feasible.
    rng = np.random.default_rng(70)
    n = m = 4
    x = np.sqrt(m) * random_unitary(rng, n)
    t = t_update(x, identity_factor(n))
    np.testing.assert_allclose(t, x, rtol=1e-6)


def test_covariance_feasibility():
    rng = np.random.default_rng(71)
    n, m, pt = 4, 7, 0.1
    grid = AngleGrid.uniform(1.0)
    p = desired_beampattern([-30.0, 20.0], 10.0, grid)
    cov = synthesize_desired_covariance(p, grid, pt, n)
    x = complex_gaussian(rng, (n, m))
    t = t_update(x, cov.factor)
    lhs = t @ t.conj().T / m
    rhs = cov.factor @ cov.factor.conj().T
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)
    assert np.trace(lhs).real == pytest.approx(pt, rel=1e-6)


def test_optimality_against_random_feasible_templates():
    rng = np.random.default_rng(72)
    n, m = 2, 3
    f = cholesky_with_ridge(np.array([[0.06, 0.02 - 0.01j], [0.02 + 0.01j, 0.06]]))
    x = complex_gaussian(rng, (n, m))
    t = t_update(x, f)
    best = np.linalg.norm(t - x)
    for _ in range(1000):
        q, _ = np.linalg.qr(complex_gaussian(rng, (m, n)))
        candidate = np.sqrt(m) * f @ q.conj().T  # rows orthonormal
        assert best <= np.linalg.norm(candidate - x) + 1e-12


def test_update_improves_on_previous_feasible_template():
    rng = np.random.default_rng(73)
    n, m = 3, 5
    f = identity_factor(n)
    x = complex_gaussian(rng, (n, m))
    q, _ = np.linalg.qr(complex_gaussian(rng, (m, n)))
    t_old = np.sqrt(m) * f @ q.conj().T
    t_new = t_update(x, f)
    assert np.linalg.norm(t_new - x) <= np.linalg.norm(t_old - x) + 1e-12


def test_rejects_short_frames_and_bad_factor():
    rng = np.random.default_rng(74)
    with pytest.raises(ValueError):
        t_update(complex_gaussian(rng, (4, 3)), identity_factor(4))
    with pytest.raises(ValueError):
        t_update(complex_gaussian(rng, (3, 4)), identity_factor(2))


def test_aborts_on_nonfinite_waveform():
    x = np.ones((2, 3), dtype=complex)
    x[0, 0] = np.nan
    with pytest.raises(SolverAbort):
        t_update(x, identity_factor(2))


def test_initialize_feasible_and_deterministic():
    rng = np.random.default_rng(75)
    n, k, m, pt = 4, 2, 6, 0.1
    h = complex_gaussian(rng, (k, n))
    s = complex_gaussian(rng, (k, m))
    grid = AngleGrid.uniform(1.0)
    cov = synthesize_desired_covariance(
        desired_beampattern([0.0], 10.0, grid), grid, pt, n
    )
    t0_a = t_initialize(h, s, cov.factor, pt)
    t0_b = t_initialize(h, s, cov.factor, pt)
    np.testing.assert_array_equal(t0_a, t0_b)
    lhs = t0_a @ t0_a.conj().T / m
    rhs = cov.factor @ cov.factor.conj().T
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)


def test_initial_waveform_interpolates_before_scaling():
    # The precoder feeding t_initialize hits S exactly up to the power scale.
    rng = np.random.default_rng(76)
    h = complex_gaussian(rng, (2, 4))
    s = complex_gaussian(rng, (2, 6))
    x0 = initial_waveform(h, s, 0.1)
    product = h @ x0
    ratio = product / s
    np.testing.assert_allclose(ratio, ratio.flat[0], rtol=1e-9)
