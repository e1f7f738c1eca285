"""Fundamental solutions and their boundary-operator derivatives.

Supported operators: the Laplacian in 2D/3D (k = 1, order 2, Dirichlet
system ``(1, d/dnu)``) and the decomplexified Cauchy-Riemann operator
(k = 2, order 1, Dirichlet system ``(1,)``).  Complex CR values are stored
as the real 2x2 rotation-matrix embedding ``[[a, -b], [b, a]]``.

Sign conventions: the Laplace kernels are ``(1/2pi) ln r`` in 2D and
``-1/(4 pi r)`` in 3D (the ``r^(2-n)/((2-n) sigma_n)`` family); the CR
kernel is ``1/(pi (z_x - z_y))`` with ``z = x1 + i x2``.
"""

from dataclasses import dataclass

import numpy as np

from .backend import core
from .errors import SingularEvaluation, UnsupportedOperator

EPS_SING = 1e-12

OPERATOR_IDS = ("laplace2d", "laplace3d", "cauchy-riemann")


@dataclass(frozen=True)
class Kernel:
    """Immutable descriptor of one supported elliptic operator."""

    operator_id: str
    ndim: int
    ncomp: int   # system size k
    order: int   # operator order m
    eps_sing: float = EPS_SING


def make_kernel(operator_id, eps_sing=EPS_SING):
    if operator_id == "laplace2d":
        return Kernel("laplace2d", 2, 1, 2, eps_sing)
    if operator_id == "laplace3d":
        return Kernel("laplace3d", 3, 1, 2, eps_sing)
    if operator_id == "cauchy-riemann":
        return Kernel("cauchy-riemann", 2, 2, 1, eps_sing)
    raise UnsupportedOperator(f"unknown operator id {operator_id!r}")


def _pts(a, ndim):
    a = np.ascontiguousarray(np.atleast_2d(np.asarray(a, dtype=np.float64)))
    if a.shape[1] != ndim:
        raise ValueError(f"expected points of dimension {ndim}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("points must have finite coordinates")
    return a


def _complex_to_blocks(z):
    """Embed a complex array (...,) as real 2x2 blocks (..., 2, 2)."""
    out = np.empty(z.shape + (2, 2))
    out[..., 0, 0] = z.real
    out[..., 1, 1] = z.real
    out[..., 1, 0] = z.imag
    out[..., 0, 1] = -z.imag
    return out


def value_block(kernel, x, y):
    """Pairwise kernel values, shape (nx, ny, k, k)."""
    x = _pts(x, kernel.ndim)
    y = _pts(y, kernel.ndim)
    eps2 = kernel.eps_sing**2
    try:
        if kernel.operator_id == "laplace2d":
            return core.lap2_val(x, y, eps2)[:, :, None, None]
        if kernel.operator_id == "laplace3d":
            return core.lap3_val(x, y, eps2)[:, :, None, None]
        return _complex_to_blocks(core.cr_val(x, y, eps2))
    except ValueError as exc:
        raise SingularEvaluation(str(exc)) from None


def normal_block(kernel, x, normals, y):
    """Pairwise normal-derivative values d Phi / d nu_x, shape (nx, ny, k, k)."""
    x = _pts(x, kernel.ndim)
    y = _pts(y, kernel.ndim)
    normals = _pts(normals, kernel.ndim)
    eps2 = kernel.eps_sing**2
    try:
        if kernel.operator_id == "laplace2d":
            return core.lap2_dn(x, normals, y, eps2)[:, :, None, None]
        if kernel.operator_id == "laplace3d":
            return core.lap3_dn(x, normals, y, eps2)[:, :, None, None]
    except ValueError as exc:
        raise SingularEvaluation(str(exc)) from None
    raise UnsupportedOperator(
        "normal derivative is op index 1 of the Laplace Dirichlet system only")


def grad_block(kernel, x, y):
    """Pairwise x-gradients, shape (nx, ny, ndim, k, k)."""
    x = _pts(x, kernel.ndim)
    y = _pts(y, kernel.ndim)
    eps2 = kernel.eps_sing**2
    try:
        if kernel.operator_id == "laplace2d":
            return core.lap2_grad(x, y, eps2)[:, :, :, None, None]
        if kernel.operator_id == "laplace3d":
            return core.lap3_grad(x, y, eps2)[:, :, :, None, None]
        dz = core.cr_dz(x, y, eps2)
    except ValueError as exc:
        raise SingularEvaluation(str(exc)) from None
    out = np.empty(dz.shape + (2, 2, 2))
    out[:, :, 0] = _complex_to_blocks(dz)
    out[:, :, 1] = _complex_to_blocks(1j * dz)
    return out


def boundary_block(kernel, op_index, x, normals, y):
    """Pairwise B_j Phi values for op index j of the Dirichlet system."""
    if not 0 <= op_index < kernel.order:
        raise UnsupportedOperator(
            f"op index {op_index} out of range for order-{kernel.order} operator")
    if op_index == 0:
        return value_block(kernel, x, y)
    return normal_block(kernel, x, normals, y)


def eval_kernel(kernel, x, y):
    """Kernel matrix Phi(x, y), shape (k, k)."""
    return value_block(kernel, x, y)[0, 0]


def eval_boundary_op(kernel, op_index, x, y, normal_at_x=None):
    """Boundary operator B_j applied to Phi(., y) at x, shape (k, k)."""
    if op_index == 0:
        return eval_kernel(kernel, x, y)
    if normal_at_x is None:
        raise ValueError("normal_at_x is required for op index >= 1")
    return boundary_block(kernel, op_index, x, normal_at_x, y)[0, 0]


def pde_residual(kernel, x, y, h):
    """Centered finite-difference residual of the operator on Phi(., y) at x.

    For the Laplace kernels this is the discrete Laplacian (a signed scalar);
    for Cauchy-Riemann it is the magnitude of the discrete d-bar derivative
    0.5*(d/dx1 + i d/dx2) of the complex kernel.
    """
    x = _pts(x, kernel.ndim)[0]
    y = _pts(y, kernel.ndim)[0]
    r = np.linalg.norm(x - y)
    if r < 10.0 * h:
        raise SingularEvaluation(
            f"FD stencil too close to the source (|x-y|={r:.3g} < 10h)")
    if kernel.operator_id == "cauchy-riemann":
        eps2 = kernel.eps_sing**2
        pts = np.array([x + [h, 0], x - [h, 0], x + [0, h], x - [0, h]])
        f = core.cr_val(np.ascontiguousarray(pts), y[None, :], eps2)[:, 0]
        dbar = 0.5 * ((f[0] - f[1]) / (2 * h) + 1j * (f[2] - f[3]) / (2 * h))
        return abs(dbar)
    stencil = [x]
    for d in range(kernel.ndim):
        e = np.zeros(kernel.ndim)
        e[d] = h
        stencil.extend([x + e, x - e])
    vals = value_block(kernel, np.array(stencil), y[None, :])[:, 0, 0, 0]
    return float(np.sum(vals[1:] - vals[0]) / h**2)


@dataclass(frozen=True)
class KernelExpansion:
    """u(x) = sum_j Phi(x, y_j) C_j with sources y_j and C_j in R^k."""

    sources: np.ndarray       # (N, ndim)
    coefficients: np.ndarray  # (N, k)

    def __post_init__(self):
        object.__setattr__(self, "sources",
                           np.ascontiguousarray(self.sources, dtype=np.float64))
        object.__setattr__(self, "coefficients",
                           np.atleast_2d(np.asarray(self.coefficients, dtype=np.float64)))
        if self.sources.ndim != 2 or len(self.sources) != len(self.coefficients):
            raise ValueError("sources and coefficients must have matching lengths")

    @property
    def nsources(self):
        return len(self.sources)


def zero_expansion(kernel):
    return KernelExpansion(np.zeros((0, kernel.ndim)), np.zeros((0, kernel.ncomp)))


def expansion_from_flat(kernel, sources, c):
    """Reshape a flat coefficient vector (atom-ordered, k per source)."""
    c = np.asarray(c, dtype=np.float64).reshape(len(sources), kernel.ncomp)
    return KernelExpansion(np.asarray(sources, dtype=np.float64), c)


def expansion_values(kernel, u, x):
    """Expansion values at points x, shape (nx, k)."""
    x = _pts(x, kernel.ndim)
    if u.nsources == 0:
        return np.zeros((len(x), kernel.ncomp))
    blocks = value_block(kernel, x, u.sources)
    return np.einsum("ijkr,jr->ik", blocks, u.coefficients)


def expansion_gradients(kernel, u, x):
    """Expansion gradients at points x, shape (nx, ndim, k)."""
    x = _pts(x, kernel.ndim)
    if u.nsources == 0:
        return np.zeros((len(x), kernel.ndim, kernel.ncomp))
    blocks = grad_block(kernel, x, u.sources)
    return np.einsum("ijdkr,jr->idk", blocks, u.coefficients)
