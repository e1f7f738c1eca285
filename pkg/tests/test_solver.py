"""Primal/dual solver: oracles, duality invariants, zero threshold."""

import numpy as np
import pytest
import scipy.optimize

from mfskit import norms, solver
from mfskit.errors import NonConvergence


def _gramdata(rng, n, cond=1e3):
    """Random SPD Gram with controlled conditioning, wrapped like norms.gram."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.geomspace(1.0, 1.0 / cond, n)
    g = (q * s) @ q.T
    g = 0.5 * (g + g.T)
    shift = norms.GRAM_SHIFT_FACTOR * float(np.trace(g))
    chol = np.linalg.cholesky(g + shift * np.eye(n))
    return norms.GramData(g, chol, shift)


def _instance(rng, m=6, n=4, cond=1e3):
    a = rng.standard_normal((m, n))
    g = _gramdata(rng, n, cond)
    h0 = rng.standard_normal(m)
    return a, g, h0


def test_f_value_and_grad():
    fspec = solver.DataFunctionalSpec(2.0, np.array([1.0, -1.0]))
    g = np.array([2.0, 0.0])
    assert solver.f_value(fspec, g) == pytest.approx(1.0)
    np.testing.assert_allclose(solver.f_grad(fspec, g), [1.0, 1.0])
    # numeric gradient check for a generic q
    fspec = solver.DataFunctionalSpec(1.7, np.array([0.3, -0.4, 1.1]))
    x = np.array([1.0, 0.5, -0.2])
    eps = 1e-7
    num = np.array([
        (solver.f_value(fspec, x + eps * e) - solver.f_value(fspec, x - eps * e))
        / (2 * eps) for e in np.eye(3)])
    np.testing.assert_allclose(solver.f_grad(fspec, x), num, rtol=1e-5)


def test_spec_validation():
    with pytest.raises(ValueError):
        solver.DataFunctionalSpec(0.5, np.zeros(2))
    with pytest.raises(ValueError):
        solver.SolveConfig(b=0.0)
    with pytest.raises(ValueError):
        solver.SolveConfig(b=1.0, tol_rel=0.5)


def test_secular_matches_general_purpose_minimizer():
    # independent oracle: multi-start Powell on the (smooth away from 0)
    # whitened objective must not beat the secular solution
    rng = np.random.default_rng(0)
    for trial in range(10):
        a, g, h0 = _instance(rng, m=5, n=3)
        b = 10.0 ** rng.uniform(-3, 0)
        fspec = solver.DataFunctionalSpec(2.0, h0)
        sol = solver.solve_primal_matrix(a, g, fspec, solver.SolveConfig(b))
        atil = a @ np.linalg.inv(g.chol.T)

        def obj(d):
            r = atil @ d - h0
            return 0.5 * float(r @ r) + b * float(np.linalg.norm(d))

        best = min(
            scipy.optimize.minimize(obj, x0, method="Powell",
                                    options={"xtol": 1e-12, "ftol": 1e-14,
                                             "maxiter": 20000}).fun
            for x0 in [np.zeros(3), rng.standard_normal(3),
                       rng.standard_normal(3)])
        assert sol.objective <= best + 1e-9 * (1 + abs(best))
        assert sol.objective >= best - 1e-7 * (1 + abs(best))


def test_q2_duality_invariants_random_instances():
    rng = np.random.default_rng(1)
    for trial in range(40):
        a, g, h0 = _instance(rng, m=rng.integers(3, 10), n=rng.integers(2, 8),
                             cond=10.0 ** rng.uniform(0, 8))
        b = 10.0 ** rng.uniform(-4, 1)
        fspec = solver.DataFunctionalSpec(2.0, h0)
        cfg = solver.SolveConfig(b)
        primal = solver.solve_primal_matrix(a, g, fspec, cfg)
        dual = solver.solve_dual_matrix(a, g, fspec, cfg)
        diag = solver.check_optimality(primal, dual, a, g, b)
        assert diag.duality_gap <= 1e-6 * (1 + primal.objective)
        assert diag.duality_gap >= -1e-8
        assert diag.optimality_residual <= 1e-6 * (1 + b * primal.norm_value)
        # roundoff in ||A~^T h|| scales with the data, not with b
        assert dual.feasibility_residual <= 1e-9 * (b + np.linalg.norm(h0))


def test_prox_path_agrees_with_secular():
    rng = np.random.default_rng(2)
    for trial in range(5):
        a, g, h0 = _instance(rng, m=6, n=4, cond=1e2)
        b = 0.1
        fspec = solver.DataFunctionalSpec(2.0, h0)
        exact = solver.solve_primal_matrix(
            a, g, fspec, solver.SolveConfig(b, method="secular"))
        prox = solver.solve_primal_matrix(
            a, g, fspec, solver.SolveConfig(b, method="prox"))
        assert prox.objective <= exact.objective + 1e-9 * (1 + exact.objective)


def test_general_q_weak_duality():
    rng = np.random.default_rng(3)
    for q in (1.5, 3.0):
        a, g, h0 = _instance(rng, m=6, n=4, cond=1e2)
        b = 0.05
        fspec = solver.DataFunctionalSpec(q, h0)
        cfg = solver.SolveConfig(b, max_iter=50000, tol_rel=1e-10)
        primal = solver.solve_primal_matrix(a, g, fspec, cfg)
        dual = solver.solve_dual_matrix(a, g, fspec, cfg)
        gap = solver.duality_gap(primal, dual)
        assert gap >= -1e-8
        assert gap <= 1e-3 * (1 + primal.objective)


def test_zero_threshold_iff():
    # c = 0 is optimal iff dual_norm(A^T grad F(0)) <= b; brute force the
    # primal objective near zero on 1- and 2-atom instances
    rng = np.random.default_rng(4)
    for n in (1, 2):
        for trial in range(25):
            a, g, h0 = _instance(rng, m=4, n=n, cond=10.0)
            fspec = solver.DataFunctionalSpec(2.0, h0)
            thresh = norms.dual_norm_vec(g, a.T @ solver.f_grad(fspec, np.zeros(4)))
            for b in (0.5 * thresh, 2.0 * thresh):
                if b <= 0:
                    continue
                claims_zero = solver.zero_is_optimal(a, g, fspec, b)
                sol = solver.solve_primal_matrix(a, g, fspec, solver.SolveConfig(b))
                solver_zero = np.linalg.norm(sol.coefficients) <= 1e-10
                assert claims_zero == solver_zero
                # brute-force confirmation on a coefficient grid
                obj0 = solver.f_value(fspec, np.zeros(4))
                grid = np.linspace(-1, 1, 9)
                mesh = np.meshgrid(*([grid] * n))
                pts = np.column_stack([mm.ravel() for mm in mesh])
                objs = [solver.f_value(fspec, a @ c) + b * norms.gram_norm(g, c)
                        for c in pts]
                beats_zero = min(objs) < obj0 - 1e-12
                if claims_zero:
                    assert not beats_zero


def test_zero_data_gives_zero_solution():
    rng = np.random.default_rng(5)
    a, g, _ = _instance(rng)
    fspec = solver.DataFunctionalSpec(2.0, np.zeros(a.shape[0]))
    sol = solver.solve_primal_matrix(a, g, fspec, solver.SolveConfig(1e-3))
    np.testing.assert_allclose(sol.coefficients, 0.0, atol=1e-14)
    assert sol.objective == 0.0


def test_nonconvergence_carries_last_iterate():
    rng = np.random.default_rng(6)
    a, g, h0 = _instance(rng)
    fspec = solver.DataFunctionalSpec(1.5, h0)
    cfg = solver.SolveConfig(1e-6, max_iter=2, tol_rel=1e-12, method="prox")
    with pytest.raises(NonConvergence) as exc:
        solver.solve_primal_matrix(a, g, fspec, cfg)
    assert exc.value.last is not None
    assert exc.value.last.coefficients.shape == (a.shape[1],)


def test_uniqueness_probe_small_spread():
    rng = np.random.default_rng(7)
    a, g, h0 = _instance(rng, m=8, n=4, cond=10.0)
    fspec = solver.DataFunctionalSpec(2.0, h0)
    cfg = solver.SolveConfig(0.1, max_iter=50000, tol_rel=1e-12, restarts=3)
    spread = solver.uniqueness_probe_matrix(a, g, fspec, cfg)
    assert spread <= 1e-4


def test_objective_recomputes():
    rng = np.random.default_rng(8)
    a, g, h0 = _instance(rng)
    fspec = solver.DataFunctionalSpec(2.0, h0)
    b = 0.2
    sol = solver.solve_primal_matrix(a, g, fspec, solver.SolveConfig(b))
    recomputed = solver.f_value(fspec, a @ sol.coefficients) \
        + b * norms.gram_norm(g, sol.coefficients)
    assert sol.objective == pytest.approx(recomputed, rel=1e-10)
    assert sol.misfit == pytest.approx(solver.f_value(fspec, a @ sol.coefficients),
                                       rel=1e-12)
