"""Discretized regularizer norms on kernel expansions and their Gram data.

Four concrete norms stand in for the abstract Sobolev regularizer:
interior L2, interior H1, interior Lp (p in (1, inf)) and a boundary-trace
surrogate (weighted p-sum of the Dirichlet-system values on the boundary
rule).  The p = 2 kinds expose a Gram matrix over a trial dictionary so the
solver can work in a Euclidean coordinate where the norm is plain ||.||_2.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import geometry, kernels, measurement
from .errors import NotAHilbertNorm, SingularEvaluation, SingularGram

GRAM_SHIFT_FACTOR = 1e-12

HILBERT_KINDS = ("l2-interior", "h1-interior", "boundary-trace")
KINDS = ("l2-interior", "h1-interior", "lp-interior", "boundary-trace")


@dataclass(frozen=True)
class NormSpec:
    kind: str = "l2-interior"
    p: float = 2.0
    radial: int = 64
    angular: int = 64
    boundary_nodes: int = 256

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if not 1.0 < self.p < np.inf:
            raise ValueError("p must lie in (1, inf)")
        if self.radial < 4 or self.angular < 8 or self.boundary_nodes < 8:
            raise ValueError("quadrature resolution below minimum")

    @property
    def is_hilbert(self):
        return self.p == 2.0 and self.kind in HILBERT_KINDS


def spec_from_config(cfg):
    return NormSpec(
        kind=cfg.get("kind", "l2-interior"),
        p=float(cfg.get("p", 2.0)),
        radial=int(cfg.get("radial", 64)),
        angular=int(cfg.get("angular", 64)),
        boundary_nodes=int(cfg.get("boundary_nodes", 256)),
    )


def _check_clearance(spec, u, domain):
    if u.nsources == 0:
        return
    clear = geometry.min_source_clearance(domain)
    for y in u.sources:
        if geometry.contains(domain, y) or geometry.distance_to_boundary(domain, y) < clear:
            raise SingularEvaluation(
                "expansion source inside or too close to the closed domain")


def _pointwise_samples(spec, kernel, domain, u):
    """Stacked sample rows of the norm's quadrature: (values, weights).

    values has shape (n_rows, k): each row is one quadrature node of one
    contributing term (field value, gradient component, or boundary op).
    """
    rows = []
    wts = []
    if spec.kind in ("l2-interior", "h1-interior", "lp-interior"):
        nodes, w = geometry.interior_quadrature(domain, spec.radial, spec.angular)
        rows.append(kernels.expansion_values(kernel, u, nodes))
        wts.append(w)
        if spec.kind == "h1-interior":
            grads = kernels.expansion_gradients(kernel, u, nodes)
            for d in range(kernel.ndim):
                rows.append(grads[:, d, :])
                wts.append(w)
    else:
        bq = geometry.build_boundary_quadrature(domain, spec.boundary_nodes)
        rows.append(kernels.expansion_values(kernel, u, bq.nodes))
        wts.append(bq.weights)
        if kernel.order > 1:
            grads = kernels.expansion_gradients(kernel, u, bq.nodes)
            rows.append(np.einsum("qd,qdk->qk", bq.normals, grads))
            wts.append(bq.weights)
    return np.vstack(rows), np.concatenate(wts)


def norm(spec, u, domain, kernel=None):
    """Quadrature value of the chosen norm of a kernel expansion."""
    if u.nsources == 0:
        return 0.0
    if kernel is None:
        raise ValueError("kernel descriptor required for a non-empty expansion")
    _check_clearance(spec, u, domain)
    vals, w = _pointwise_samples(spec, kernel, domain, u)
    p = spec.p
    return float(np.sum(w @ np.abs(vals) ** p) ** (1.0 / p))


def _feature_matrix(spec, dictionary, domain, kernel):
    """E with G = E^T E: weighted per-node atom samples (p = 2 kinds)."""
    rows = []
    if spec.kind in ("l2-interior", "h1-interior"):
        nodes, w = geometry.interior_quadrature(domain, spec.radial, spec.angular)
        vb = kernels.value_block(kernel, nodes, dictionary.sources)
        sw = np.sqrt(w)
        k = kernel.ncomp
        flat = vb.transpose(0, 2, 1, 3).reshape(len(nodes) * k, dictionary.natoms)
        rows.append(np.repeat(sw, k)[:, None] * flat)
        if spec.kind == "h1-interior":
            gb = kernels.grad_block(kernel, nodes, dictionary.sources)
            for d in range(kernel.ndim):
                flat = gb[:, :, d].transpose(0, 2, 1, 3).reshape(
                    len(nodes) * k, dictionary.natoms)
                rows.append(np.repeat(sw, k)[:, None] * flat)
    else:
        bq = geometry.build_boundary_quadrature(domain, spec.boundary_nodes)
        sw = np.sqrt(bq.weights)
        k = kernel.ncomp
        for op in range(kernel.order):
            blocks = kernels.boundary_block(kernel, op, bq.nodes, bq.normals,
                                            dictionary.sources)
            flat = blocks.transpose(0, 2, 1, 3).reshape(
                len(bq.nodes) * k, dictionary.natoms)
            rows.append(np.repeat(sw, k)[:, None] * flat)
    return np.vstack(rows)


@dataclass(frozen=True)
class GramData:
    matrix: np.ndarray   # symmetric PSD Gram over dictionary atoms
    chol: np.ndarray     # lower Cholesky factor of matrix + shift*I
    shift: float


def gram(spec, dictionary, domain, kernel):
    """Gram matrix of the dictionary atoms in the p = 2 norm."""
    if not spec.is_hilbert:
        raise NotAHilbertNorm(f"gram needs p = 2, got kind={spec.kind} p={spec.p}")
    e = _feature_matrix(spec, dictionary, domain, kernel)
    g = e.T @ e
    g = 0.5 * (g + g.T)
    shift = GRAM_SHIFT_FACTOR * float(np.trace(g))
    try:
        chol = sla.cholesky(g + shift * np.eye(len(g)), lower=True)
    except sla.LinAlgError as exc:
        raise SingularGram(f"regularized Cholesky failed: {exc}") from None
    return GramData(g, chol, shift)


def gram_norm(gramdata, c):
    """sqrt(c^T (G + shift I) c) via the regularized factor.

    The shift is part of the discretized norm (and reported), so every
    consumer (primal objective, dual feasibility, optimality residual)
    sees one and the same Hilbert norm.
    """
    c = np.asarray(c, dtype=np.float64)
    return float(np.linalg.norm(gramdata.chol.T @ c))


def dual_norm_vec(gramdata, v):
    """G^{-1/2} norm of a dual vector over the dictionary span."""
    v = np.asarray(v, dtype=np.float64)
    try:
        z = sla.solve_triangular(gramdata.chol, v, lower=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise SingularGram(str(exc)) from None
    return float(np.linalg.norm(z))


def dual_norm(spec, h, m, dictionary, gramdata):
    """sup of <h, Mu> over dictionary expansions with norm(u) <= 1."""
    a = measurement.assemble_matrix(m, dictionary)
    return dual_norm_vec(gramdata, a.T @ np.asarray(h, dtype=np.float64))


def fenchel_conjugate_of_norm(gramdata, v, b, rel_tol=1e-9):
    """Conjugate of c -> b*sqrt(c^T G c): indicator of the dual-norm ball.

    Returns 0.0 when dual_norm(v) <= b (plus rel_tol*b slack), inf otherwise.
    """
    if b <= 0:
        raise ValueError("radius b must be positive")
    return 0.0 if dual_norm_vec(gramdata, v) <= b * (1.0 + rel_tol) else np.inf
