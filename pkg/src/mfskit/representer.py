"""Square interpolation matrix W, degeneracy probes and sparse construction.

W has entry (i, j) = functional i applied to kernel column j (sources
ordered, k columns each); for symmetric kernels this is the transpose of
the usual display, with identical invertibility and zero set, and makes
``M u_sharp = W C`` literal.  The sparse minimizer interpolates the measured
vector g = M u0: C = W^{-1} g, arranged into R^k blocks per source.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels, measurement, norms, solver
from .errors import ConditioningWarning, InsufficientCandidates, SingularW

EPS_COND = 1e-12


@dataclass(frozen=True)
class WMatrix:
    matrix: np.ndarray    # (kN, kN)
    sources: np.ndarray   # (N, ndim)
    ncomp: int
    cond: float
    sign: float           # sign of det
    logabsdet: float      # log |det|, -inf for exactly singular

    @property
    def absdet(self):
        with np.errstate(over="ignore"):
            return float(np.exp(self.logabsdet))

    @property
    def scale(self):
        """Hadamard bound: product of row norms (natural det scale)."""
        with np.errstate(over="ignore"):
            return float(np.prod(np.linalg.norm(self.matrix, axis=1)))


def _wrap_matrix(w, sources, ncomp):
    sign, logdet = np.linalg.slogdet(w)
    sv = np.linalg.svd(w, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    return WMatrix(w, np.asarray(sources, dtype=np.float64), ncomp,
                   cond, float(sign), float(logdet))


def assemble_W(m, kernel, sources):
    """Square matrix of the functionals against kernel columns at sources."""
    sources = np.atleast_2d(np.asarray(sources, dtype=np.float64))
    k = kernel.ncomp
    if len(sources) * k != m.size:
        raise ValueError(
            f"need {m.size} atoms (k={k}) but got {len(sources)} sources")
    if len(np.unique(sources, axis=0)) != len(sources):
        raise ValueError("sources must be pairwise distinct")
    w = measurement.assemble_matrix(m, measurement.Dictionary(sources, k))
    return _wrap_matrix(w, sources, k)


@dataclass(frozen=True)
class DegeneracyField:
    candidates: np.ndarray
    absdet: np.ndarray
    sign: np.ndarray
    cond: np.ndarray

    def zero_crossings(self):
        """Indices i where sign flips between consecutive candidates."""
        s = self.sign
        return np.nonzero(s[:-1] * s[1:] < 0)[0]


def degeneracy_scan(m, kernel, fixed_sources, candidates):
    """|det W|, sign and cond over candidate positions of the last source."""
    fixed = np.atleast_2d(np.asarray(fixed_sources, dtype=np.float64))
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    absdet = np.empty(len(candidates))
    sign = np.empty(len(candidates))
    cond = np.empty(len(candidates))
    for i, y in enumerate(candidates):
        wm = assemble_W(m, kernel, np.vstack([fixed, y[None, :]]))
        absdet[i] = wm.absdet
        sign[i] = wm.sign
        cond[i] = wm.cond
    return DegeneracyField(candidates, absdet, sign, cond)


def select_sources(m, kernel, candidates, n, eps_cond=EPS_COND):
    """Greedy selection of n sources maximizing the smallest singular value.

    Grows the column set one source (k columns) at a time, picking the
    candidate whose columns maximize sigma_min of the partial matrix.
    Warns with ConditioningWarning when the final square matrix has
    cond >= 1/eps_cond.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if len(candidates) < n:
        raise InsufficientCandidates(f"{len(candidates)} candidates < {n}")
    k = kernel.ncomp
    if n * k != m.size:
        raise ValueError(f"selection size {n} inconsistent with {m.size} functionals")
    all_cols = measurement.assemble_matrix(
        m, measurement.Dictionary(candidates, k))   # (kN, ncand*k)
    chosen = []
    cols = np.empty((m.size, 0))
    for _ in range(n):
        best, best_sv = -1, -1.0
        for j in range(len(candidates)):
            if j in chosen:
                continue
            trial = np.hstack([cols, all_cols[:, j * k:(j + 1) * k]])
            sv = np.linalg.svd(trial, compute_uv=False)[-1]
            if sv > best_sv:
                best, best_sv = j, sv
        chosen.append(best)
        cols = np.hstack([cols, all_cols[:, best * k:(best + 1) * k]])
    selected = candidates[chosen]
    wm = assemble_W(m, kernel, selected)
    if not np.isfinite(wm.cond) or wm.cond >= 1.0 / eps_cond:
        warnings.warn(f"selected W has cond {wm.cond:.3e}", ConditioningWarning)
    return selected


@dataclass(frozen=True)
class SparseSolution:
    expansion: kernels.KernelExpansion
    provenance: np.ndarray  # the measured vector g = M u0 it interpolates

    @property
    def nsources(self):
        return self.expansion.nsources


def build_sparse(wm, g, kernel=None):
    """Solve W C = g and arrange C into R^k coefficient blocks."""
    g = np.asarray(g, dtype=np.float64).ravel()
    if len(g) != len(wm.matrix):
        raise ValueError("measured vector length must equal the W dimension")
    if not np.any(g):
        coeff = np.zeros((len(wm.sources), wm.ncomp))
        return SparseSolution(kernels.KernelExpansion(wm.sources, coeff), g)
    try:
        c = sla.solve(wm.matrix, g)
    except sla.LinAlgError as exc:
        raise SingularW(str(exc)) from None
    if not np.all(np.isfinite(c)):
        raise SingularW("solve produced non-finite coefficients")
    coeff = c.reshape(len(wm.sources), wm.ncomp)
    return SparseSolution(kernels.KernelExpansion(wm.sources, coeff), g)


def verify_representer(sparse, m, g, fspec, norm_spec, primal, b,
                       dictionary=None):
    """Report the representer relations; thresholds are the caller's business.

    Keys: interp_residual (||M u_sharp - g||_inf), f_match
    (|F(M u_sharp) - F(g)|), norm ratio ||u_sharp|| / ||u0|| (1 when both
    vanish), and the two objective values.
    """
    g = np.asarray(g, dtype=np.float64).ravel()
    mu = measurement.apply(m, sparse.expansion)
    interp = float(np.max(np.abs(mu - g))) if len(g) else 0.0
    f_sharp = solver.f_value(fspec, mu)
    f_zero = solver.f_value(fspec, g)
    sharp_norm = norms.norm(norm_spec, sparse.expansion, m.domain, m.kernel)
    primal_norm = primal.norm_value
    if sharp_norm == 0.0 and primal_norm == 0.0:
        ratio = 1.0
    elif primal_norm == 0.0:
        ratio = np.inf
    else:
        ratio = sharp_norm / primal_norm
    return {
        "interp_residual": interp,
        "f_match": abs(f_sharp - f_zero),
        "norm_ratio": float(ratio),
        "sparse_norm": sharp_norm,
        "primal_norm": primal_norm,
        "sparse_objective": f_sharp + b * sharp_norm,
        "primal_objective": primal.objective,
    }
