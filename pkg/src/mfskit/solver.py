"""Norm-regularized data fitting over a trial dictionary, with its dual.

Primal problem: min_c F(A c) + b * sqrt(c^T G c), where A realizes the
measurement operator on the dictionary, G is the Gram matrix of the p = 2
regularizer norm, and F is a q-norm misfit against a target vector.

All solves run in the Cholesky coordinate d = L^T c (G = L L^T), where the
regularizer is the Euclidean norm and its prox is block soft thresholding.
For q = 2 the first-order method is polished (or replaced, method="secular")
by an essentially exact solve of the secular equation
(A~^T A~ + lambda I) d = A~^T h0, lambda = b / ||d||.  The dual problem
maximizes <h, h0> - (1/q') ||h||_q'^q' over the feasible set
{ ||A~^T h|| <= b }; for q = 2 the optimal dual vector is the primal
residual h0 - A~ d.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from . import measurement, norms
from .errors import NonConvergence, NotAHilbertNorm


@dataclass(frozen=True)
class DataFunctionalSpec:
    """Misfit F(g) = (1/q) ||g - target||_q^q (q < inf) or ||g - target||_inf."""

    q: float
    target: np.ndarray

    def __post_init__(self):
        if not (self.q == np.inf or self.q >= 1.0):
            raise ValueError("q must lie in [1, inf]")
        object.__setattr__(self, "target",
                           np.asarray(self.target, dtype=np.float64).ravel())


def f_value(fspec, g):
    r = np.asarray(g, dtype=np.float64) - fspec.target
    if fspec.q == np.inf:
        return float(np.max(np.abs(r))) if r.size else 0.0
    return float(np.sum(np.abs(r) ** fspec.q) / fspec.q)


def f_grad(fspec, g):
    if not 1.0 < fspec.q < np.inf:
        raise ValueError("gradient defined for q in (1, inf) only")
    r = np.asarray(g, dtype=np.float64) - fspec.target
    return np.sign(r) * np.abs(r) ** (fspec.q - 1.0)


def f_subgrad(fspec, g):
    r = np.asarray(g, dtype=np.float64) - fspec.target
    if fspec.q == 1.0:
        return np.sign(r)
    if fspec.q == np.inf:
        out = np.zeros_like(r)
        i = int(np.argmax(np.abs(r)))
        out[i] = np.sign(r[i])
        return out
    return f_grad(fspec, g)


def dual_objective(fspec, h):
    """-F*(-h) = <h, target> - (1/q') ||h||_q'^q', for q in (1, inf)."""
    if not 1.0 < fspec.q < np.inf:
        raise ValueError("dual objective defined for q in (1, inf) only")
    h = np.asarray(h, dtype=np.float64)
    qc = fspec.q / (fspec.q - 1.0)
    return float(h @ fspec.target - np.sum(np.abs(h) ** qc) / qc)


@dataclass(frozen=True)
class SolveConfig:
    b: float
    max_iter: int = 20000
    tol_rel: float = 1e-9
    step_init: float = 1.0
    backtrack: float = 0.5
    restarts: int = 5
    seed: int = 0
    method: str = "auto"   # auto | prox | secular | subgrad

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("regularization weight b must be positive")
        if not 0.0 < self.tol_rel < 1e-2:
            raise ValueError("tol_rel must lie in (0, 1e-2)")


@dataclass
class PrimalSolution:
    coefficients: np.ndarray
    objective: float
    norm_value: float
    misfit: float
    iterations: int
    converged: bool
    method: str


@dataclass
class DualSolution:
    h: np.ndarray
    objective: float
    feasibility_residual: float
    iterations: int
    converged: bool


@dataclass
class Diagnostics:
    duality_gap: float
    optimality_residual: float
    primal_iterations: int
    dual_iterations: int
    gram_shift: float
    dictionary_size: int = 0


def _whiten(a, gramdata):
    """A~ = A L^{-T}, so that F(A c) = F(A~ d) with d = L^T c."""
    return sla.solve_triangular(gramdata.chol, a.T, lower=True).T


def _unwhiten(gramdata, d):
    return sla.solve_triangular(gramdata.chol.T, d, lower=False)


def _bst(z, tau):
    nz = np.linalg.norm(z)
    if nz <= tau:
        return np.zeros_like(z)
    return (1.0 - tau / nz) * z


def _secular_q2(atil, h0, b):
    """Exact (to root-finder precision) minimizer of 0.5||A~d - h0||^2 + b||d||."""
    v = atil.T @ h0
    nv = np.linalg.norm(v)
    if nv <= b:
        return np.zeros(atil.shape[1]), 0
    _, s, vt = sla.svd(atil, full_matrices=False)
    # v = V S U^T h0, so (V^T v)_i = s_i (u_i . h0); avoids forming U @ h0
    sb = vt @ v
    def lam_norm(lam):
        return lam * math.sqrt(float(np.sum((sb / (s**2 + lam)) ** 2)))
    lo = max(float(np.max(s)) ** 2 * 1e-30, 1e-300)
    while lam_norm(lo) >= b and lo > 1e-290:
        lo *= 0.1
    hi = max(float(np.max(s)) ** 2, 1.0)
    it = 0
    while lam_norm(hi) <= b:
        hi *= 10.0
        it += 1
        if it > 400:
            raise NonConvergence("secular bracket expansion failed")
    lam = brentq(lambda t: lam_norm(t) - b, lo, hi, rtol=8.9e-16, maxiter=400)
    d = vt.T @ (sb / (s**2 + lam))
    return d, 1


def _prox_gradient(atil, fspec, b, config, d0):
    """Monotone FISTA with backtracking; block soft-thresholding prox."""
    d = np.array(d0, dtype=np.float64)
    y = d.copy()
    t_mom = 1.0
    step = config.step_init
    def smooth(dd):
        return f_value(fspec, atil @ dd)
    def obj(dd):
        return smooth(dd) + b * np.linalg.norm(dd)
    cur = obj(d)
    n_stall = 0
    for it in range(1, config.max_iter + 1):
        g = atil.T @ f_grad(fspec, atil @ y)
        fy = smooth(y)
        while True:
            cand = _bst(y - step * g, step * b)
            diff = cand - y
            if smooth(cand) <= fy + g @ diff + diff @ diff / (2 * step) + 1e-15:
                break
            step *= config.backtrack
            if step < 1e-18:
                break
        new = obj(cand)
        if new <= cur:
            t_next = 0.5 * (1 + math.sqrt(1 + 4 * t_mom**2))
            y = cand + ((t_mom - 1) / t_next) * (cand - d)
            d, t_mom = cand, t_next
        else:  # momentum restart, plain forward-backward step from d
            cand = _bst(d - step * (atil.T @ f_grad(fspec, atil @ d)), step * b)
            new = obj(cand)
            if new > cur:
                n_stall += 1
                y = d.copy()
                t_mom = 1.0
                if n_stall > 50:
                    return d, it, True
                continue
            d = cand
            y = d.copy()
            t_mom = 1.0
        if cur - new <= config.tol_rel * max(1.0, abs(cur)):
            n_stall += 1
            if n_stall >= 5:
                return d, it, True
        else:
            n_stall = 0
        cur = min(cur, new)
        step /= config.backtrack  # allow the step to grow back
    return d, config.max_iter, False


def _subgradient(atil, fspec, b, config, d0):
    """Diminishing-step subgradient descent (q = 1 or q = inf), best iterate."""
    d = np.array(d0, dtype=np.float64)
    def obj(dd):
        return f_value(fspec, atil @ dd) + b * np.linalg.norm(dd)
    best, best_obj = d.copy(), obj(d)
    for it in range(1, config.max_iter + 1):
        g = atil.T @ f_subgrad(fspec, atil @ d)
        nd = np.linalg.norm(d)
        if nd > 0:
            g = g + b * d / nd
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        d = d - (config.step_init / math.sqrt(it)) * g / gn
        o = obj(d)
        if o < best_obj:
            best, best_obj = d.copy(), o
    return best, config.max_iter, True


def solve_primal_matrix(a, gramdata, fspec, config, d0=None):
    """Primal solve on an explicit (A, Gram) realization."""
    atil = _whiten(a, gramdata)
    natoms = a.shape[1]
    d0 = np.zeros(natoms) if d0 is None else np.asarray(d0, dtype=np.float64)
    method = config.method
    if method == "auto":
        method = "secular" if fspec.q == 2.0 else (
            "prox" if 1.0 < fspec.q < np.inf else "subgrad")
    if method == "secular":
        if fspec.q != 2.0:
            raise ValueError("secular path requires q = 2")
        d, iters = _secular_q2(atil, fspec.target, config.b)
        converged = True
    elif method == "prox":
        if not 1.0 < fspec.q < np.inf:
            raise ValueError("prox path requires q in (1, inf)")
        d, iters, converged = _prox_gradient(atil, fspec, config.b, config, d0)
        if fspec.q == 2.0:  # polish: the secular solve is exact for q = 2
            d_exact, _ = _secular_q2(atil, fspec.target, config.b)
            if (f_value(fspec, atil @ d_exact) + config.b * np.linalg.norm(d_exact)
                    <= f_value(fspec, atil @ d) + config.b * np.linalg.norm(d)):
                d = d_exact
                converged = True
    else:
        d, iters, converged = _subgradient(atil, fspec, config.b, config, d0)
    c = _unwhiten(gramdata, d)
    misfit = f_value(fspec, a @ c)
    nrm = norms.gram_norm(gramdata, c)
    sol = PrimalSolution(c, misfit + config.b * nrm, nrm, misfit,
                         iters, converged, method)
    if not converged:
        raise NonConvergence("primal solve hit max_iter", last=sol)
    return sol


def _project_feasible(atil_svd, h, b):
    """Euclidean projection onto { h : ||A~^T h||_2 <= b }."""
    u, s = atil_svd
    coeffs = u.T @ h
    def cons(mu):
        return float(np.sum((s * coeffs / (1.0 + mu * s**2)) ** 2)) - b**2
    if cons(0.0) <= 0:
        return h
    hi = 1.0
    while cons(hi) > 0:
        hi *= 10.0
    mu = brentq(cons, 0.0, hi, rtol=8.9e-16, maxiter=400)
    scale = 1.0 / (1.0 + mu * s**2) - 1.0
    return h + u @ (scale * coeffs)


def solve_dual_matrix(a, gramdata, fspec, config):
    """Dual solve: max <h,h0> - (1/q')||h||_q'^q' s.t. ||A~^T h|| <= b."""
    if not 1.0 < fspec.q < np.inf:
        raise ValueError("dual machinery restricted to q in (1, inf)")
    atil = _whiten(a, gramdata)
    if fspec.q == 2.0 and config.method in ("auto", "secular"):
        d, _ = _secular_q2(atil, fspec.target, config.b)
        h = fspec.target - atil @ d
        res = max(0.0, float(np.linalg.norm(atil.T @ h)) - config.b)
        return DualSolution(h, dual_objective(fspec, h), res, 1, True)
    u, s, _ = sla.svd(atil, full_matrices=False)
    svd = (u, s)
    h = _project_feasible(svd, np.zeros(a.shape[0]), config.b)
    step = config.step_init
    cur = dual_objective(fspec, h)
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        qc = fspec.q / (fspec.q - 1.0)
        grad = fspec.target - np.sign(h) * np.abs(h) ** (qc - 1.0)
        while True:
            cand = _project_feasible(svd, h + step * grad, config.b)
            new = dual_objective(fspec, cand)
            if new >= cur - 1e-15 or step < 1e-18:
                break
            step *= config.backtrack
        if new - cur <= config.tol_rel * max(1.0, abs(cur)) and it > 1:
            h, cur = cand, max(new, cur)
            converged = True
            break
        if new > cur:
            h, cur = cand, new
        step /= config.backtrack
    sol = DualSolution(h, cur, max(0.0, float(np.linalg.norm(atil.T @ h)) - config.b),
                       it, converged or it < config.max_iter)
    if not sol.converged:
        raise NonConvergence("dual solve hit max_iter", last=sol)
    return sol


def duality_gap(primal, dual):
    """Primal objective minus dual objective (>= 0 up to arithmetic slack)."""
    return primal.objective - dual.objective


def check_optimality(primal, dual, a, gramdata, b):
    """Fenchel optimality residual |<h, A c> - b ||c||_G| and the gap."""
    r = abs(float(dual.h @ (a @ primal.coefficients)) - b * primal.norm_value)
    return Diagnostics(
        duality_gap=duality_gap(primal, dual),
        optimality_residual=r,
        primal_iterations=primal.iterations,
        dual_iterations=dual.iterations,
        gram_shift=gramdata.shift,
        dictionary_size=a.shape[1],
    )


def zero_is_optimal(a, gramdata, fspec, b, rel_tol=1e-8):
    """Subgradient test at 0: dual_norm(A^T grad F(0)) <= b (1 + rel_tol)."""
    g0 = f_grad(fspec, np.zeros(a.shape[0]))
    return norms.dual_norm_vec(gramdata, a.T @ g0) <= b * (1.0 + rel_tol)


def _realize(fspec, m, dictionary, norm_spec, config):
    if not norm_spec.is_hilbert:
        raise NotAHilbertNorm("solver requires a p = 2 regularizer norm")
    a = measurement.assemble_matrix(m, dictionary)
    gramdata = norms.gram(norm_spec, dictionary, m.domain, m.kernel)
    return a, gramdata


def minimize_primal(fspec, m, dictionary, norm_spec, config):
    a, gramdata = _realize(fspec, m, dictionary, norm_spec, config)
    return solve_primal_matrix(a, gramdata, fspec, config)


def solve_dual(fspec, m, dictionary, norm_spec, config):
    a, gramdata = _realize(fspec, m, dictionary, norm_spec, config)
    return solve_dual_matrix(a, gramdata, fspec, config)


def uniqueness_probe(fspec, m, dictionary, norm_spec, config):
    """Max pairwise G-distance between restarts from random initial points."""
    a, gramdata = _realize(fspec, m, dictionary, norm_spec, config)
    return uniqueness_probe_matrix(a, gramdata, fspec, config)


def uniqueness_probe_matrix(a, gramdata, fspec, config):
    rng = np.random.default_rng(config.seed)
    cfg = SolveConfig(config.b, config.max_iter, config.tol_rel,
                      config.step_init, config.backtrack, config.restarts,
                      config.seed, "prox" if 1.0 < fspec.q < np.inf else "subgrad")
    sols = []
    for _ in range(max(2, config.restarts)):
        d0 = rng.standard_normal(a.shape[1])
        try:
            sols.append(solve_primal_matrix(a, gramdata, fspec, cfg, d0=d0).coefficients)
        except NonConvergence as exc:
            sols.append(exc.last.coefficients)
    spread = 0.0
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            spread = max(spread, norms.gram_norm(gramdata, sols[i] - sols[j]))
    return spread
