import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gradsat import grad as G
from gradsat.cnf import count_satisfied_clauses, parse_dimacs, verify_model
from gradsat.encoding import encode_problem, spmm_forward
from gradsat.generate import random_ksat

# 50-digit mpmath evaluations of the smooth-min formula, frozen
SMOOTH_MIN_123_TAU1 = 1.424789617395558568469004
FOUR_VAR_LOSS_TAU1 = -2.042626814057839271104768


def central_diff(f, x, h=1e-5):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
    return g


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


# -- initialization ------------------------------------------------------------

def test_init_deterministic():
    a, b = G.init_assignments(20, 8, seed=5), G.init_assignments(20, 8, seed=5)
    np.testing.assert_array_equal(a.theta, b.theta)
    assert a.step == 0 and not a.m.any() and not a.v.any()


def test_init_balanced_and_centered():
    t = G.init_assignments(1000, 64, seed=0)
    frac = (t.theta > 0).mean()
    assert 0.45 <= frac <= 0.55
    assert abs(t.theta.mean()) < 4 / np.sqrt(1000 * 64)


# -- normalization ---------------------------------------------------------------

def test_normalize_examples():
    np.testing.assert_allclose(G.normalize_rows(np.array([[2.0, 2, 2, 2]])), [[1, 1, 1, 1]])
    np.testing.assert_allclose(G.normalize_rows(np.array([[1.0, 3.0]])), [[0.5, 1.5]])


def test_normalize_zero_mean_guarded():
    out = G.normalize_rows(np.array([[1.0, -1.0], [0.0, 0.0]]))
    assert np.isfinite(out).all()
    np.testing.assert_allclose(out[0], [1e8, -1e8])
    np.testing.assert_array_equal(out[1], [0.0, 0.0])
    g = np.array([[0.3, -0.2], [1.0, 1.0]])
    assert np.isfinite(G.normalize_rows_vjp(np.array([[1.0, -1.0], [0.0, 0.0]]), g)).all()


@pytest.mark.parametrize("shift", [0.0, 1e-3])
def test_normalize_vjp_finite_difference(shift):
    rng = np.random.default_rng(1)
    theta = rng.standard_normal((5, 6)) + 2.0
    # a row close to, but not at, the zero-mean singularity
    theta[0] = [1.0, -1.0, 0.5, -0.5, 0.2, -0.2 + 6 * 0.05 + shift]
    g = rng.standard_normal(theta.shape)
    num = central_diff(lambda t: np.sum(g * G.normalize_rows(t)), theta)
    assert rel_err(G.normalize_rows_vjp(theta, g), num) < 1e-4


# -- binarization --------------------------------------------------------------

@pytest.mark.parametrize("x,pos", [(2.5, 1), (-0.3, 0), (0.0, 0)])
def test_binarize_examples(x, pos):
    A = G.binarize(np.array([[x]]))
    assert A[0, 0] == pos and A[1, 0] == 1 - pos


def test_binarize_complementary_rows():
    A = G.binarize(np.random.default_rng(0).standard_normal((30, 11)))
    assert A.shape == (60, 11)
    np.testing.assert_array_equal(A[0::2] + A[1::2], 1)


# -- smooth min and loss -------------------------------------------------------

def test_smooth_min_constant_column():
    for tau in (0.1, 1.0, 50.0):
        assert G.smooth_min([3.0] * 7, tau) == pytest.approx(3.0, abs=1e-12)


def test_smooth_min_sharp_limit():
    assert abs(G.smooth_min([0.0, 5.0], 100.0)) < 1e-10


def test_smooth_min_matches_high_precision_oracle():
    assert abs(G.smooth_min([1.0, 2.0, 3.0], 1.0) - SMOOTH_MIN_123_TAU1) < 1e-12


def test_smooth_min_live_mpmath_oracle():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    r = np.random.default_rng(4).uniform(0, 10, size=17)
    for tau in (0.3, 2.0, 9.0):
        num = mp.fsum(mp.mpf(x) * mp.exp(-tau * mp.mpf(x)) for x in r)
        den = mp.fsum(mp.exp(-tau * mp.mpf(x)) for x in r)
        assert abs(G.smooth_min(r, tau) - float(num / den)) < 1e-12


def test_smooth_min_rejects_bad_input():
    with pytest.raises(ValueError):
        G.smooth_min([], 1.0)
    with pytest.raises(ValueError):
        G.smooth_min([1.0], 0.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1000), min_size=1, max_size=40), st.floats(1e-3, 1e4))
def test_smooth_min_bounded_and_finite(r, tau):
    s = G.smooth_min(r, tau)
    assert np.isfinite(s)
    assert min(r) - 1e-9 * max(1, max(r)) <= s <= max(r) + 1e-9 * max(1, max(r))


def test_smooth_min_monotone_in_tau():
    rng = np.random.default_rng(8)
    for _ in range(20):
        r = rng.uniform(0, 10, size=30)
        gaps = [G.smooth_min(r, t) - r.min() for t in (0.5, 1, 2, 5, 10, 100)]
        assert all(a >= b - 1e-15 for a, b in zip(gaps, gaps[1:]))


def test_loss_constant():
    R = np.full((6, 4), 2)
    assert G.loss(R, 1.0) == pytest.approx(-8.0)


def test_loss_sharp_single_column():
    assert abs(G.loss(np.array([[0], [5]]), 100.0)) < 1e-10


def test_loss_four_var_columns(four_var, four_var_A):
    R = spmm_forward(encode_problem(four_var), four_var_A)
    assert G.loss(R, 1.0) == pytest.approx(FOUR_VAR_LOSS_TAU1, abs=1e-12)


def test_loss_permutation_invariance():
    rng = np.random.default_rng(2)
    R = rng.integers(0, 4, size=(25, 6))
    base = G.loss(R, 1.3)
    assert G.loss(R[rng.permutation(25)], 1.3) == pytest.approx(base, rel=1e-13)
    S, _ = G.kernels.smooth_min_grad(R, 1.3)
    perm = rng.permutation(6)
    S_perm, _ = G.kernels.smooth_min_grad(R[:, perm], 1.3)
    np.testing.assert_allclose(S_perm, S[perm], rtol=1e-14)


# -- gradients -----------------------------------------------------------------

@pytest.mark.parametrize("tau", [0.5, 1.0, 5.0])
def test_loss_grad_R_finite_difference(tau):
    rng = np.random.default_rng(int(tau * 10))
    R = rng.uniform(0, 3, size=(9, 3))
    _, dR = G.loss_grad_R(R, tau)
    assert rel_err(dR, central_diff(lambda x: G.loss(x, tau), R)) < 1e-4


def _ste_surrogate(P, theta0, normalize):
    """Loss as a function of theta whose derivative at theta0 is the straight-through one."""
    Z0 = G.normalize_rows(theta0) if normalize else theta0
    pos0 = (Z0 > 0).astype(float)

    def f(theta):
        Z = G.normalize_rows(theta) if normalize else theta
        pos = pos0 + (Z - Z0)
        A = np.empty((2 * theta.shape[0], theta.shape[1]))
        A[0::2], A[1::2] = pos, 1 - pos
        return G.loss(P.to_dense() @ A, 1.0)
    return f


@pytest.mark.parametrize("normalize", [False, True])
@pytest.mark.parametrize("seed", range(4))
def test_backward_full_chain_finite_difference(seed, normalize):
    rng = np.random.default_rng(seed)
    f = random_ksat(6, 10, seed=seed)
    P = encode_problem(f)
    theta = rng.standard_normal((6, 4))
    if normalize:
        # keep row means away from zero but the columns distinct; identical
        # columns make the normalized gradient vanish exactly
        theta = np.abs(theta) + 0.5
        theta[:, 0] *= -1
    analytic = G.backward(P, theta, 1.0, normalize=normalize)
    numeric = central_diff(_ste_surrogate(P, theta, normalize), theta)
    assert np.linalg.norm(analytic) > 1e-3
    assert rel_err(analytic, numeric) < 1e-4


def test_gradient_points_toward_satisfying_polarity():
    P = encode_problem(parse_dimacs("p cnf 1 1\n1 0\n"))
    theta = np.array([[-0.4]])
    g = G.backward(P, theta, 0.1)
    assert g[0, 0] < 0
    before = G.loss(spmm_forward(P, G.binarize(theta)), 0.1)
    t = G.init_assignments(1, 1)
    t.theta[:] = theta
    for i in range(10):
        t = G.adamw_step(t, G.backward(P, t.theta, 0.1), 0.1)
    after = G.loss(spmm_forward(P, G.binarize(t.theta)), 0.1)
    assert after < before


def test_satisfied_margin_has_smaller_gradient():
    P = encode_problem(parse_dimacs("p cnf 6 2\n1 2 3 0\n4 5 6 0\n"))
    sat = np.ones((6, 1))
    unsat = sat.copy()
    unsat[:3] = -1
    g_sat = G.backward(P, sat, 5.0)
    g_unsat = G.backward(P, unsat, 5.0)
    assert np.linalg.norm(g_sat) < np.linalg.norm(g_unsat)


# -- optimizer ---------------------------------------------------------------------

def test_adamw_zero_gradient():
    t = G.init_assignments(3, 2, seed=0)
    out = G.adamw_step(t, np.zeros((3, 2)), 0.1)
    np.testing.assert_array_equal(out.theta, t.theta)
    assert out.step == 1


def test_adamw_unit_step_under_constant_gradient():
    t = G.init_assignments(4, 3, seed=0)
    g = np.random.default_rng(1).uniform(0.5, 2.0, size=(4, 3)) * np.array([1, -1, 1])
    for _ in range(200):
        prev = t.theta
        t = G.adamw_step(t, g, 1e-2)
    np.testing.assert_allclose(np.abs(t.theta - prev), 1e-2, rtol=1e-6)
    assert np.all(np.sign(prev - t.theta) == np.sign(g))


def test_adamw_weight_decay_is_decoupled():
    cfg = G.OptimizerConfig(weight_decay=0.5)
    t = G.AssignmentTensor(np.full((1, 1), 2.0), np.zeros((1, 1)), np.zeros((1, 1)))
    out = G.adamw_step(t, np.zeros((1, 1)), 0.1, cfg)
    assert out.theta[0, 0] == pytest.approx(2.0 * (1 - 0.05))


def test_adamw_deterministic():
    def run():
        t = G.init_assignments(5, 4, seed=3)
        rng = np.random.default_rng(0)
        for _ in range(20):
            t = G.adamw_step(t, rng.standard_normal((5, 4)), 0.05)
        return t.theta
    np.testing.assert_array_equal(run(), run())


@pytest.mark.parametrize("it,lr", [(0, 1e-1), (29, 1e-1), (30, 1e-2), (59, 1e-2),
                                   (60, 1e-3), (359, 1e-12), (360, 1e-1), (390, 1e-2)])
def test_lr_schedule_examples(it, lr):
    assert G.lr_at(it) == pytest.approx(lr, rel=1e-12)


def test_lr_schedule_floor():
    cfg = G.OptimizerConfig(restart_every=3600)
    assert G.lr_at(3599, cfg) == 1e-15


def test_config_validation():
    with pytest.raises(ValueError):
        G.OptimizerConfig(lr_final=1.0)
    with pytest.raises(ValueError):
        G.OptimizerConfig(tau=0)
    with pytest.raises(ValueError):
        G.OptimizerConfig(convergence_fraction=1.5)
    with pytest.warns(UserWarning):
        G.OptimizerConfig(restart_every=100)


# -- hard evaluation and the loop ----------------------------------------------

def test_hard_evaluate_four_var_columns(four_var, four_var_A):
    counts, is_sat = G.hard_evaluate(encode_problem(four_var), four_var_A)
    assert list(is_sat) == [True, False, False]
    assert counts[0] == 5


@pytest.mark.parametrize("seed", range(3))
def test_hard_evaluate_matches_model_count(seed):
    f = random_ksat(25, 100, seed=seed)
    theta = np.random.default_rng(seed).standard_normal((25, 16))
    A = G.binarize(theta)
    counts, is_sat = G.hard_evaluate(encode_problem(f), A)
    for i in range(16):
        model = G.decode_column(A, i)
        assert counts[i] == count_satisfied_clauses(f, model)
        assert is_sat[i] == verify_model(f, model)


def test_gradient_phase_four_var(four_var):
    snap = G.run_gradient_phase(encode_problem(four_var), G.OptimizerConfig(), 8)
    assert snap.stop_reason == "sat"
    assert snap.best_fraction == 1.0
    assert verify_model(four_var, snap.model)


def test_gradient_phase_complementary_units():
    P = encode_problem(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"))
    snap = G.run_gradient_phase(P, G.OptimizerConfig(), 16)
    assert snap.stop_reason == "max_iterations"
    assert snap.iterations == 3600
    assert snap.best_fraction == 0.5
    assert snap.model is None


def test_gradient_phase_snapshot_consistent():
    f = random_ksat(30, 140, seed=2)
    P = encode_problem(f)
    snap = G.run_gradient_phase(P, G.OptimizerConfig(max_iterations=37, convergence_fraction=1.0), 12)
    assert snap.grad_theta.shape == (30, 12)
    np.testing.assert_array_equal(snap.assignment[0::2] + snap.assignment[1::2], 1)
    counts, _ = G.hard_evaluate(P, snap.assignment)
    np.testing.assert_array_equal(snap.hard_sat_counts, counts)
    assert snap.best_column == int(np.argmax(counts))
    assert len(snap.loss_history) == snap.iterations == len(snap.trace)
    assert np.isfinite(snap.grad_theta).all()


def test_gradient_phase_deterministic():
    P = encode_problem(random_ksat(20, 90, seed=1))
    cfg = G.OptimizerConfig(max_iterations=200, convergence_fraction=1.0, rng_seed=9)
    a, b = G.run_gradient_phase(P, cfg, 32), G.run_gradient_phase(P, cfg, 32)
    assert a.loss_history == b.loss_history
    np.testing.assert_array_equal(a.grad_theta, b.grad_theta)


def test_gradient_phase_time_limit():
    P = encode_problem(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"))
    snap = G.run_gradient_phase(P, G.OptimizerConfig(max_iterations=10**7), 4, time_limit=0.05)
    assert snap.stop_reason == "timeout"


def test_gradient_phase_normalized_runs():
    P = encode_problem(random_ksat(15, 60, seed=3))
    snap = G.run_gradient_phase(P, G.OptimizerConfig(normalize=True, max_iterations=100), 16)
    assert np.isfinite(snap.grad_theta).all()


def test_write_trace(tmp_path, four_var):
    snap = G.run_gradient_phase(encode_problem(four_var), G.OptimizerConfig(), 2)
    path = tmp_path / "trace.csv"
    G.write_trace(snap, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,lr,loss,best_fraction"
    assert len(lines) == snap.iterations + 1


@pytest.mark.slow
def test_calibration_random_satisfiable_n50():
    from gradsat.cdcl import Status, solve

    instances, seed = [], 0
    while len(instances) < 50:
        f = random_ksat(50, 200, seed=seed)
        if solve(f).status is Status.SAT:
            instances.append((seed, f))
        seed += 1
    cfg = G.OptimizerConfig()
    hits = sum(G.run_gradient_phase(encode_problem(f), cfg.replace(rng_seed=s), 256).best_fraction
               > 0.99 for s, f in instances)
    assert hits >= 40
