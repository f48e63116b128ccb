"""Tests for the inner ADMM solver.

The load-bearing oracle here is the dense real-embedding solve: the
production x-update works column by column in complex arithmetic, and the
test rebuilds the full stacked real system (block matrix of real/imaginary
parts) and solves it densely. Both must agree to near machine precision.
"""

import numpy as np
import pytest

from isacwave.admm import (
    AdmmState,
    alpha_update,
    build_stacked,
    dual_update,
    gamma_update,
    initial_state,
    solve_inner,
    x_update,
)
from isacwave.exceptions import SolverAbort
from isacwave.model import complex_gaussian, mui_power, papr


def to_real(z):
    return np.concatenate([z.real, z.imag])


def embed(m):
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def vec(z):
    return np.ravel(z, order="F")


def random_system(rng, n, k, m, rho=0.3, mu=1.0, total_power=0.1, papr_limit=None):
    h = complex_gaussian(rng, (k, n))
    s = complex_gaussian(rng, (k, m))
    t = complex_gaussian(rng, (n, m))
    if papr_limit is None:
        papr_limit = float(n * m)
    return build_stacked(h, s, t, rho, mu, total_power, papr_limit), (h, s, t)


def random_state(rng, sys):
    n, m = sys.n_antennas, sys.frame_len
    st = initial_state(complex_gaussian(rng, (n, m)), sys)
    st.u = complex_gaussian(rng, (n, m))
    st.w = complex_gaussian(rng, (n, m))
    return st


def dense_x_update(sys, st):
    """Oracle: solve the stacked 2NM x 2NM real normal equations directly."""
    n, m = sys.n_antennas, sys.frame_len
    a_bar = embed(np.kron(np.eye(m), sys.a))
    b_bar = to_real(vec(sys.b))
    lhs = 2.0 * a_bar.T @ a_bar + 2.0 * sys.mu * np.eye(2 * n * m)
    rhs = (
        2.0 * a_bar.T @ b_bar
        - to_real(vec(st.u))
        - to_real(vec(st.w))
        + sys.mu * (to_real(vec(st.alpha)) + to_real(vec(st.gamma)))
    )
    x_bar = np.linalg.solve(lhs, rhs)
    return (x_bar[: n * m] + 1j * x_bar[n * m :]).reshape(n, m, order="F")


# ---------------------------------------------------------------------------
# Stacked system assembly


@pytest.mark.parametrize("rho", [0.0, 0.3, 1.0])
def test_stacked_objective_identity(rho):
    rng = np.random.default_rng(100)
    sys, (h, s, t) = random_system(rng, n=4, k=2, m=5, rho=rho)
    x = complex_gaussian(rng, (4, 5))
    stacked = np.linalg.norm(sys.a @ x - sys.b) ** 2
    split = rho * mui_power(h, x, s) + (1.0 - rho) * np.linalg.norm(x - t) ** 2
    assert stacked == pytest.approx(split, rel=1e-10)


def test_stacked_factor_solves_gram():
    from scipy.linalg import cho_solve

    rng = np.random.default_rng(101)
    sys, _ = random_system(rng, n=4, k=2, m=3, rho=0.4, mu=0.7)
    gram = 2.0 * sys.a.conj().T @ sys.a + 2.0 * sys.mu * np.eye(4)
    probe = complex_gaussian(rng, (4, 6))
    np.testing.assert_allclose(cho_solve(sys.factor, gram @ probe), probe, atol=1e-8)


def test_with_template_matches_fresh_build():
    rng = np.random.default_rng(102)
    sys, (h, s, _) = random_system(rng, n=3, k=2, m=4, rho=0.25)
    t_new = complex_gaussian(rng, (3, 4))
    swapped = sys.with_template(t_new)
    fresh = build_stacked(h, s, t_new, sys.rho, sys.mu, sys.total_power,
                          sys.papr_limit)
    np.testing.assert_allclose(swapped.b, fresh.b, atol=1e-14)
    np.testing.assert_allclose(swapped.atb2, fresh.atb2, atol=1e-13)
    assert swapped.factor is sys.factor  # reused, not recomputed
    np.testing.assert_array_equal(swapped.a, sys.a)


def test_with_template_rejects_wrong_shape():
    rng = np.random.default_rng(103)
    sys, _ = random_system(rng, n=3, k=2, m=4)
    with pytest.raises(ValueError):
        sys.with_template(np.zeros((3, 5), dtype=complex))


def test_build_stacked_rejects_bad_weights():
    rng = np.random.default_rng(104)
    h = complex_gaussian(rng, (2, 3))
    s = complex_gaussian(rng, (2, 4))
    t = complex_gaussian(rng, (3, 4))
    with pytest.raises(ValueError):
        build_stacked(h, s, t, 1.2, 1.0, 0.1, 12.0)
    with pytest.raises(ValueError):
        build_stacked(h, s, t, 0.5, 0.0, 0.1, 12.0)


# ---------------------------------------------------------------------------
# Coordinate selectors of the real embedding


def test_entry_selectors_partition_identity():
    # The per-sample disk constraint acts on 2-vectors (Re x_n, Im x_n).
    # Build the corresponding 2NM x 2NM projector for each n and check the
    # expected algebra: symmetric, idempotent, and summing to the identity.
    nm = 6
    selectors = []
    for n in range(nm):
        e = np.zeros((2 * nm, 2 * nm))
        e[n, n] = 1.0
        e[nm + n, nm + n] = 1.0
        selectors.append(e)
    total = np.zeros((2 * nm, 2 * nm))
    for e in selectors:
        np.testing.assert_array_equal(e, e.T)
        np.testing.assert_array_equal(e @ e, e)
        total += e
    np.testing.assert_array_equal(total, np.eye(2 * nm))


def test_gamma_update_matches_per_entry_projection():
    rng = np.random.default_rng(105)
    n, m, mu, pt, eta = 3, 2, 0.8, 0.1, 1.5
    x = complex_gaussian(rng, (n, m))
    w = complex_gaussian(rng, (n, m))
    out = gamma_update(x, w, mu, pt, eta, n)
    cap_sq = pt * eta / n
    v = vec(x + w / mu)
    for i, vn in enumerate(v):
        two = np.array([vn.real, vn.imag])
        if two @ two > cap_sq:
            two = two * np.sqrt(cap_sq) / np.linalg.norm(two)
        got = vec(out)[i]
        np.testing.assert_allclose([got.real, got.imag], two, atol=1e-14)


# ---------------------------------------------------------------------------
# x-update


@pytest.mark.parametrize(
    "n,k,m,rho",
    [(2, 1, 2, 0.3), (3, 2, 3, 0.5), (2, 2, 3, 0.0), (3, 1, 2, 1.0)],
)
def test_x_update_matches_dense_real_solve(n, k, m, rho):
    rng = np.random.default_rng(200 + n + 10 * k + 100 * m)
    sys, _ = random_system(rng, n, k, m, rho=rho, mu=0.9)
    st = random_state(rng, sys)
    fast = x_update(sys, st)
    dense = dense_x_update(sys, st)
    np.testing.assert_allclose(fast, dense, rtol=1e-9, atol=1e-12)


def test_x_update_stationarity():
    rng = np.random.default_rng(210)
    sys, _ = random_system(rng, n=4, k=2, m=5, rho=0.6, mu=1.3)
    st = random_state(rng, sys)
    x = x_update(sys, st)
    grad = (
        2.0 * sys.a.conj().T @ (sys.a @ x - sys.b)
        + st.u
        + st.w
        + sys.mu * (x - st.alpha)
        + sys.mu * (x - st.gamma)
    )
    assert np.linalg.norm(grad) <= 1e-8 * (1.0 + np.linalg.norm(sys.b))


def test_x_update_scalar_hand_case():
    # N = M = K = 1 with rho = 0: stationarity reads (2 + 2mu) x = 2t + mu(a+g).
    mu, t, a, g = 0.7, 1.0 - 2.0j, 0.5 + 0.5j, -0.3 + 0.1j
    sys = build_stacked(
        np.array([[1.0 + 0j]]), np.array([[0j]]), np.array([[t]]),
        rho=0.0, mu=mu, total_power=0.1, papr_limit=1.0,
    )
    st = AdmmState(
        x=np.zeros((1, 1), complex),
        alpha=np.array([[a]]),
        gamma=np.array([[g]]),
        u=np.zeros((1, 1), complex),
        w=np.zeros((1, 1), complex),
        residuals=[],
    )
    expected = (2.0 * t + mu * a + mu * g) / (2.0 + 2.0 * mu)
    np.testing.assert_allclose(x_update(sys, st)[0, 0], expected, rtol=1e-12)


# ---------------------------------------------------------------------------
# alpha-update


def test_alpha_norm_and_parallel():
    rng = np.random.default_rng(300)
    x = complex_gaussian(rng, (3, 4))
    m, pt, mu = 4, 0.1, 1.0
    a = alpha_update(x, np.zeros_like(x), mu, m, pt)
    assert np.linalg.norm(a) ** 2 == pytest.approx(m * pt, rel=1e-12)
    np.testing.assert_allclose(
        a, x * (np.sqrt(m * pt) / np.linalg.norm(x)), atol=1e-14
    )


def test_alpha_beats_random_sphere_samples():
    rng = np.random.default_rng(301)
    x = complex_gaussian(rng, (2, 2))
    u = complex_gaussian(rng, (2, 2))
    m, pt, mu = 2, 0.5, 0.9
    a = alpha_update(x, u, mu, m, pt)

    def lagrangian_terms(alpha):
        diff = x - alpha
        return float(np.sum(u.conj() * diff).real + 0.5 * mu * np.linalg.norm(diff) ** 2)

    best = min(
        lagrangian_terms(
            (z := complex_gaussian(rng, (2, 2))) * (np.sqrt(m * pt) / np.linalg.norm(z))
        )
        for _ in range(1000)
    )
    f_a = lagrangian_terms(a)
    assert f_a <= best + 1e-9 * (1.0 + abs(f_a))


def test_alpha_zero_direction_keeps_previous():
    prev = np.array([[1.0 + 1.0j]])
    out = alpha_update(np.zeros((1, 1), complex), np.zeros((1, 1), complex),
                       1.0, 1, 0.1, prev=prev)
    np.testing.assert_array_equal(out, prev)
    with pytest.raises(ValueError):
        alpha_update(np.zeros((1, 1), complex), np.zeros((1, 1), complex),
                     1.0, 1, 0.1)


# ---------------------------------------------------------------------------
# gamma-update


def test_gamma_inside_unchanged():
    rng = np.random.default_rng(400)
    n, pt, eta = 4, 0.1, 8.0
    cap = np.sqrt(pt * eta / n)
    x = 0.1 * cap * complex_gaussian(rng, (n, 3))
    out = gamma_update(x, np.zeros_like(x), 1.0, pt, eta, n)
    np.testing.assert_array_equal(out, x)


def test_gamma_boundary_scaling():
    n, pt, eta = 2, 0.1, 2.0
    cap_sq = pt * eta / n
    v = np.full((n, 2), 2.0 * np.sqrt(cap_sq) * np.exp(0.3j))
    out = gamma_update(v, np.zeros_like(v), 1.0, pt, eta, n)
    np.testing.assert_allclose(np.abs(out) ** 2, cap_sq, rtol=1e-12)
    # Direction preserved.
    np.testing.assert_allclose(out / np.abs(out), v / np.abs(v), atol=1e-14)


def test_gamma_nearest_point_oracle():
    rng = np.random.default_rng(401)
    n, pt, eta, mu = 1, 0.3, 1.2, 0.7
    radius = np.sqrt(pt * eta / n)
    x = np.array([[3.0 - 4.0j]])
    w = np.array([[0.5 + 0.2j]])
    out = gamma_update(x, w, mu, pt, eta, n)[0, 0]
    v = (x + w / mu)[0, 0]
    d_out = abs(v - out)
    r = radius * np.sqrt(rng.uniform(size=1000))
    ang = rng.uniform(0, 2 * np.pi, size=1000)
    samples = r * np.exp(1j * ang)
    assert d_out <= np.abs(v - samples).min() + 1e-12


def test_gamma_caps_every_entry():
    rng = np.random.default_rng(402)
    n, pt, eta = 3, 0.1, 1.0
    x = 10.0 * complex_gaussian(rng, (n, 5))
    w = complex_gaussian(rng, (n, 5))
    out = gamma_update(x, w, 0.5, pt, eta, n)
    assert np.all(np.abs(out) ** 2 <= pt * eta / n + 1e-12)


# ---------------------------------------------------------------------------
# dual-update


def test_dual_fixed_point_unchanged():
    rng = np.random.default_rng(500)
    x = complex_gaussian(rng, (2, 3))
    u = complex_gaussian(rng, (2, 3))
    w = complex_gaussian(rng, (2, 3))
    u2, w2 = dual_update(x, x, x, u, w, 2.0)
    np.testing.assert_array_equal(u2, u)
    np.testing.assert_array_equal(w2, w)
    u3, w3 = dual_update(x, 2 * x, 0 * x, u, w, 0.0)  # mu = 0 boundary
    np.testing.assert_array_equal(u3, u)
    np.testing.assert_array_equal(w3, w)


def test_dual_matches_scalar_loop():
    rng = np.random.default_rng(501)
    shape = (2, 2)
    x, a, g, u, w = (complex_gaussian(rng, shape) for _ in range(5))
    mu = 1.7
    u2, w2 = dual_update(x, a, g, u, w, mu)
    for i in range(shape[0]):
        for j in range(shape[1]):
            assert u2[i, j] == pytest.approx(u[i, j] + mu * (x[i, j] - a[i, j]))
            assert w2[i, j] == pytest.approx(w[i, j] + mu * (x[i, j] - g[i, j]))


# ---------------------------------------------------------------------------
# Inner solve


def test_initial_state_feasible():
    rng = np.random.default_rng(600)
    sys, _ = random_system(rng, n=3, k=2, m=4, total_power=0.2, papr_limit=2.0)
    st = initial_state(complex_gaussian(rng, (3, 4)), sys)
    assert np.linalg.norm(st.alpha) ** 2 == pytest.approx(4 * 0.2, rel=1e-12)
    assert np.all(np.abs(st.gamma) ** 2 <= 0.2 * 2.0 / 3 + 1e-12)
    assert not st.u.any() and not st.w.any()


def test_solve_inner_power_equality_and_residuals():
    rng = np.random.default_rng(601)
    sys, _ = random_system(rng, n=4, k=2, m=6, rho=0.4, total_power=0.1,
                           papr_limit=2.0)
    st = initial_state(complex_gaussian(rng, (4, 6)), sys)
    x, diag = solve_inner(sys, st, inner_iters=400, tol=1e-6)
    assert np.linalg.norm(x) ** 2 == pytest.approx(6 * 0.1, rel=1e-10)
    assert diag.iterations == len(diag.residuals)
    running_min = np.minimum.accumulate(diag.residuals)
    assert np.all(np.diff(running_min) <= 0.0)
    assert diag.converged


def test_solve_inner_papr_feasible():
    rng = np.random.default_rng(602)
    eta = 2.0
    sys, _ = random_system(rng, n=4, k=2, m=8, rho=0.5, total_power=0.1,
                           papr_limit=eta)
    st = initial_state(complex_gaussian(rng, (4, 8)), sys)
    x, diag = solve_inner(sys, st, inner_iters=3000, tol=1e-7)
    assert diag.converged
    assert papr(x) <= eta * (1.0 + 1e-3)


def sphere_constrained_mui(h, s, m_pt):
    """Exact minimum of ||h x - s||^2 on the sphere ||x||^2 = m_pt, found by
    bisection on the regularization path (requires the unconstrained solution
    to carry more power than the sphere allows)."""
    hh = h.conj().T @ h
    hs = h.conj().T @ s
    eye = np.eye(h.shape[1])

    def solution(lam):
        return np.linalg.solve(hh + lam * eye, hs)

    assert np.linalg.norm(solution(0.0)) ** 2 > m_pt
    lo, hi = 0.0, 1.0
    while np.linalg.norm(solution(hi)) ** 2 > m_pt:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(solution(mid)) ** 2 > m_pt:
            lo = mid
        else:
            hi = mid
    x = solution(0.5 * (lo + hi))
    x *= np.sqrt(m_pt) / np.linalg.norm(x)
    return mui_power(h, x, s)


def test_solve_inner_unconstrained_papr_reaches_ls_quality():
    # With the PAPR cap inert (eta = N*M) and rho = 1 the subproblem is
    # least squares on the power sphere; compare against the exact
    # regularization-path optimum and the power-scaled pseudo-inverse point.
    rng = np.random.default_rng(603)
    n = k = 3
    m, pt = 4, 0.1
    h = complex_gaussian(rng, (k, n))
    s = 3.0 * complex_gaussian(rng, (k, m))  # force the sphere to bind
    t = complex_gaussian(rng, (n, m))
    sys = build_stacked(h, s, t, rho=1.0, mu=1.0, total_power=pt,
                        papr_limit=float(n * m))
    st = initial_state(complex_gaussian(rng, (n, m)), sys)
    x, _ = solve_inner(sys, st, inner_iters=5000, tol=1e-9)
    achieved = mui_power(h, x, s)

    optimal = sphere_constrained_mui(h, s, m * pt)
    x_pinv = np.linalg.pinv(h) @ s
    x_pinv *= np.sqrt(m * pt) / np.linalg.norm(x_pinv)
    scaled_ls = mui_power(h, x_pinv, s)

    assert achieved >= optimal - 1e-9 * (1.0 + optimal)
    assert achieved <= 1.05 * optimal
    assert achieved <= 1.05 * scaled_ls


def test_solve_inner_aborts_on_nonfinite():
    rng = np.random.default_rng(604)
    sys, _ = random_system(rng, n=3, k=2, m=4)
    st = initial_state(complex_gaussian(rng, (3, 4)), sys)
    st.u[0, 0] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises(SolverAbort):
        solve_inner(sys, st, inner_iters=5, tol=1e-6)
