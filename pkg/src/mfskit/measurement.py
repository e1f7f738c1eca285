"""Finite-rank measurement operators over kernel expansions.

A ``MeasurementOperator`` is an ordered list of continuous linear
functionals (interior point evaluations, boundary-trace evaluations, or
quadrature-weighted pairings against a boundary density) together with the
domain and kernel they act on.  ``assemble_matrix`` realizes the operator on
a finite trial dictionary of kernel columns; ``apply`` evaluates it on any
kernel expansion.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry, kernels
from .errors import UnsupportedOperator


@dataclass(frozen=True)
class PointEval:
    """u -> u_component(x) at a point x in the closed domain."""

    x: tuple
    component: int = 0


@dataclass(frozen=True)
class TraceEval:
    """u -> (B_j u)_component(x) at a boundary point x."""

    op_index: int
    x: tuple
    component: int = 0


@dataclass(frozen=True)
class WeakPairing:
    """u -> sum_i w_i density_i (B_j u)_component(node_i) over the boundary rule.

    The density is sampled at the quadrature nodes of the operator's
    boundary rule and must vanish outside the intended arc.
    """

    op_index: int
    density: tuple
    component: int = 0


@dataclass(frozen=True)
class MeasurementOperator:
    functionals: tuple
    domain: object
    kernel: kernels.Kernel
    boundary: geometry.BoundaryQuadrature = None  # required for WeakPairing

    def __post_init__(self):
        if len(self.functionals) < 1:
            raise ValueError("measurement operator needs at least one functional")
        object.__setattr__(self, "functionals", tuple(self.functionals))
        for f in self.functionals:
            if isinstance(f, WeakPairing):
                if self.boundary is None:
                    raise ValueError("WeakPairing functionals need a boundary rule")
                if len(f.density) != len(self.boundary.nodes):
                    raise ValueError("density length must match the boundary rule")
            if not 0 <= f.component < self.kernel.ncomp:
                raise ValueError(f"component out of range for k={self.kernel.ncomp}")
            if isinstance(f, (TraceEval, WeakPairing)) and not (
                    0 <= f.op_index < self.kernel.order):
                raise UnsupportedOperator(
                    f"op index {f.op_index} out of range (order {self.kernel.order})")

    @property
    def size(self):
        return len(self.functionals)


@dataclass(frozen=True)
class Dictionary:
    """Trial family: every kernel column Phi_r(., y) of the listed sources.

    Atom a = j*k + r is column r of the kernel matrix at source j.
    """

    sources: np.ndarray
    ncomp: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sources",
                           np.ascontiguousarray(self.sources, dtype=np.float64))
        if self.sources.ndim != 2 or len(self.sources) == 0:
            raise ValueError("dictionary needs a non-empty (N, ndim) source array")

    @property
    def natoms(self):
        return len(self.sources) * self.ncomp

    def expansion(self, c, kernel):
        return kernels.expansion_from_flat(kernel, self.sources, c)


def make_dictionary(kernel, sources):
    return Dictionary(np.asarray(sources, dtype=np.float64), kernel.ncomp)


def _row_blocks(m, sources):
    """Rows of the realized operator against kernel columns at ``sources``.

    Returns (n_funcs, nsrc, k): entry (i, j, r) is functional i applied to
    column r of Phi(., y_j).  Entries are grouped by functional variant so
    each pairwise block is assembled in one backend call.
    """
    kern = m.kernel
    k = kern.ncomp
    out = np.empty((m.size, len(sources), k))
    group_pts = {}   # (type, op_index) -> (indices, points, components)
    weak = []
    for i, f in enumerate(m.functionals):
        if isinstance(f, PointEval):
            group_pts.setdefault(("p", 0), []).append((i, f.x, f.component))
        elif isinstance(f, TraceEval):
            group_pts.setdefault(("t", f.op_index), []).append((i, f.x, f.component))
        else:
            weak.append((i, f))
    for (tag, op), items in group_pts.items():
        idx = [i for i, _, _ in items]
        pts = np.array([x for _, x, _ in items], dtype=np.float64)
        comps = np.array([c for _, _, c in items])
        if tag == "p" or op == 0:
            blocks = kernels.value_block(kern, pts, sources)
        else:
            normals = np.array([geometry.boundary_normal_at(m.domain, x)
                                for x in pts])
            blocks = kernels.normal_block(kern, pts, normals, sources)
        out[idx] = blocks[np.arange(len(idx)), :, comps, :]
    for i, f in weak:
        bq = m.boundary
        blocks = kernels.boundary_block(kern, f.op_index, bq.nodes, bq.normals, sources)
        dens = np.asarray(f.density, dtype=np.float64)
        out[i] = np.einsum("q,qjr->jr", bq.weights * dens, blocks[:, :, f.component, :])
    return out


def assemble_matrix(m, dictionary):
    """Matrix A with A[i, a] = functional i applied to dictionary atom a."""
    rows = _row_blocks(m, dictionary.sources)
    return rows.reshape(m.size, dictionary.natoms)


def apply(m, u):
    """Apply the measurement operator to a kernel expansion."""
    if u.nsources == 0:
        return np.zeros(m.size)
    rows = _row_blocks(m, u.sources)
    return np.einsum("ijr,jr->i", rows, u.coefficients)


def functionals_from_config(cfg, domain=None, boundary=None):
    """Parse a JSON functional list.

    Entries: {"type": "point", "x": [...], "component": 0},
    {"type": "trace", "op": j, "x": [...]}, or
    {"type": "weak", "op": j, "density": [...]}.
    """
    out = []
    for item in cfg:
        t = item["type"]
        comp = int(item.get("component", 0))
        if t == "point":
            out.append(PointEval(tuple(item["x"]), comp))
        elif t == "trace":
            out.append(TraceEval(int(item.get("op", 0)), tuple(item["x"]), comp))
        elif t == "weak":
            out.append(WeakPairing(int(item.get("op", 0)),
                                   tuple(item["density"]), comp))
        else:
            raise ValueError(f"unknown functional type {t!r}")
    return tuple(out)
