"""Numerical verification of the boundary reproducing identity.

For a solution u of the operator in D, the boundary integral of its
Dirichlet-system data against the kernel's dual system reproduces u(x)
inside D and 0 outside the closure.  For the Laplacian this is the
classical double-layer-minus-single-layer identity; for Cauchy-Riemann it
is the Cauchy integral formula.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geometry, kernels
from .errors import NearBoundary

GUARD_FACTOR = 1e-2  # minimum distance to the boundary, times diameter


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet-system traces sampled at the nodes of one boundary rule."""

    quadrature: geometry.BoundaryQuadrature
    values: tuple   # per op j: (nq,) scalar or (nq, k) array

    def __post_init__(self):
        for v in self.values:
            if len(v) != len(self.quadrature.nodes):
                raise ValueError("trace values must match the quadrature nodes")


def sample_boundary_data(kernel, quadrature, field):
    """Exact traces of a closed-form field on a boundary rule."""
    vals = [np.asarray(field.value(quadrature.nodes), dtype=np.float64)]
    if kernel.order > 1:
        g = field.gradient(quadrature.nodes)
        vals.append(np.einsum("qd,qd->q", quadrature.normals, g))
    return BoundaryData(quadrature, tuple(vals))


def green_reproduce(kernel, domain, bdata, x):
    """Boundary-integral reproduction of the field at x, shape (k,)."""
    x = np.asarray(x, dtype=np.float64)
    if geometry.distance_to_boundary(domain, x) < GUARD_FACTOR * geometry.diameter(domain):
        raise NearBoundary("evaluation point within the quadrature accuracy guard")
    bq = bdata.quadrature
    if kernel.operator_id == "cauchy-riemann":
        u = np.asarray(bdata.values[0], dtype=np.float64)
        uc = u[:, 0] + 1j * u[:, 1]
        zeta = bq.nodes[:, 0] + 1j * bq.nodes[:, 1]
        tau = -bq.normals[:, 1] + 1j * bq.normals[:, 0]  # CCW unit tangent
        z = x[0] + 1j * x[1]
        val = np.sum(bq.weights * uc * tau / (zeta - z)) / (2j * math.pi)
        return np.array([val.real, val.imag])
    u, dudn = bdata.values
    phi = kernels.value_block(kernel, x[None, :], bq.nodes)[0, :, 0, 0]
    # d Phi / d nu_y (x, y): normal derivative in the boundary variable
    dphi = kernels.normal_block(kernel, bq.nodes, bq.normals, x[None, :])[:, 0, 0, 0]
    return np.array([float(np.sum(bq.weights * (u * dphi - dudn * phi)))])


def reproduce_convergence(kernel, domain, field, x, node_counts):
    """Reproduction error against the closed-form truth over node counts.

    Returns (rows, fitted_order); each row has nodes / value / truth /
    error.  The fitted order is the log-log slope of error against node
    count (clipped at machine floor), large for spectral decay.
    """
    x = np.asarray(x, dtype=np.float64)
    inside = geometry.contains(domain, x)
    truth = field.value(x[None, :])[0] if inside else np.zeros(kernel.ncomp)
    truth = np.atleast_1d(truth)
    rows = []
    for n in node_counts:
        bq = geometry.build_boundary_quadrature(domain, int(n))
        bdata = sample_boundary_data(kernel, bq, field)
        val = green_reproduce(kernel, domain, bdata, x)
        rows.append({
            "nodes": int(n),
            "value": val,
            "truth": truth,
            "error": float(np.max(np.abs(val - truth))),
        })
    errs = np.array([max(r["error"], 1e-300) for r in rows])
    ns = np.array([r["nodes"] for r in rows], dtype=np.float64)
    if len(rows) >= 2 and np.all(errs > 0):
        order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    else:
        order = np.inf
    return rows, float(order)
