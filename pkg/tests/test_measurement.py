"""Measurement operators: functional values, matrix assembly, validation."""

import numpy as np
import pytest

from mfskit import geometry, kernels, measurement
from mfskit.errors import UnsupportedOperator

DISK = geometry.Disk((0.0, 0.0), 1.0)
LAP2 = kernels.make_kernel("laplace2d")
CR = kernels.make_kernel("cauchy-riemann")


def _random_expansion(rng, kern, n=5):
    src = geometry.place_sources(DISK, n, 2.5)
    return kernels.KernelExpansion(src, rng.standard_normal((n, kern.ncomp)))


def test_point_eval_matches_expansion_value():
    rng = np.random.default_rng(0)
    u = _random_expansion(rng, LAP2)
    pts = rng.uniform(-0.5, 0.5, (4, 2))
    m = measurement.MeasurementOperator(
        tuple(measurement.PointEval(tuple(x)) for x in pts), DISK, LAP2)
    got = measurement.apply(m, u)
    want = kernels.expansion_values(LAP2, u, pts)[:, 0]
    np.testing.assert_allclose(got, want, rtol=1e-13)


def test_trace_eval_normal_derivative():
    rng = np.random.default_rng(1)
    u = _random_expansion(rng, LAP2)
    th = rng.uniform(0, 2 * np.pi, 3)
    pts = np.column_stack([np.cos(th), np.sin(th)])
    m = measurement.MeasurementOperator(
        tuple(measurement.TraceEval(1, tuple(x)) for x in pts), DISK, LAP2)
    got = measurement.apply(m, u)
    grads = kernels.expansion_gradients(LAP2, u, pts)
    want = np.einsum("qd,qd->q", pts, grads[:, :, 0])  # normal = position
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_component_selection_cr():
    rng = np.random.default_rng(2)
    u = _random_expansion(rng, CR)
    x = (0.3, -0.1)
    m = measurement.MeasurementOperator(
        (measurement.PointEval(x, 0), measurement.PointEval(x, 1)), DISK, CR)
    got = measurement.apply(m, u)
    want = kernels.expansion_values(CR, u, np.array([x]))[0]
    np.testing.assert_allclose(got, want, rtol=1e-13)


def test_assemble_matrix_consistent_with_apply():
    rng = np.random.default_rng(3)
    for kern in (LAP2, CR):
        src = geometry.place_sources(DISK, 6, 2.0)
        dictionary = measurement.make_dictionary(kern, src)
        funcs = [measurement.PointEval(tuple(x), c)
                 for x in rng.uniform(-0.5, 0.5, (3, 2))
                 for c in range(kern.ncomp)]
        th = rng.uniform(0, 2 * np.pi, 2)
        bpts = np.column_stack([np.cos(th), np.sin(th)])
        for x in bpts:
            funcs.append(measurement.TraceEval(0, tuple(x)))
            if kern.order > 1:
                funcs.append(measurement.TraceEval(1, tuple(x)))
        m = measurement.MeasurementOperator(tuple(funcs), DISK, kern)
        a = measurement.assemble_matrix(m, dictionary)
        assert a.shape == (m.size, dictionary.natoms)
        c = rng.standard_normal(dictionary.natoms)
        u = dictionary.expansion(c, kern)
        np.testing.assert_allclose(a @ c, measurement.apply(m, u), rtol=1e-12)


def test_weak_pairing_matches_quadrature_sum():
    rng = np.random.default_rng(4)
    bq = geometry.build_boundary_quadrature(DISK, 64)
    dens = np.cos(np.arctan2(bq.nodes[:, 1], bq.nodes[:, 0]))
    f = measurement.WeakPairing(0, tuple(dens))
    m = measurement.MeasurementOperator((f,), DISK, LAP2, boundary=bq)
    u = _random_expansion(rng, LAP2)
    got = measurement.apply(m, u)[0]
    vals = kernels.expansion_values(LAP2, u, bq.nodes)[:, 0]
    assert got == pytest.approx(float(np.sum(bq.weights * dens * vals)),
                                rel=1e-12)


def test_validation_errors():
    with pytest.raises(ValueError):
        measurement.MeasurementOperator((), DISK, LAP2)
    with pytest.raises(UnsupportedOperator):
        measurement.MeasurementOperator(
            (measurement.TraceEval(1, (1.0, 0.0)),), DISK, CR)
    with pytest.raises(ValueError):
        measurement.MeasurementOperator(
            (measurement.PointEval((0.0, 0.0), 1),), DISK, LAP2)
    bq = geometry.build_boundary_quadrature(DISK, 16)
    with pytest.raises(ValueError):
        measurement.MeasurementOperator(
            (measurement.WeakPairing(0, (1.0, 2.0)),), DISK, LAP2, boundary=bq)
    with pytest.raises(ValueError):  # weak needs a boundary rule
        measurement.MeasurementOperator(
            (measurement.WeakPairing(0, tuple(np.ones(16))),), DISK, LAP2)


def test_functionals_from_config():
    cfg = [
        {"type": "point", "x": [0.1, 0.2]},
        {"type": "trace", "op": 1, "x": [1.0, 0.0], "component": 0},
        {"type": "weak", "op": 0, "density": [1.0, 0.0]},
    ]
    fs = measurement.functionals_from_config(cfg)
    assert isinstance(fs[0], measurement.PointEval)
    assert isinstance(fs[1], measurement.TraceEval) and fs[1].op_index == 1
    assert isinstance(fs[2], measurement.WeakPairing)
    with pytest.raises(ValueError):
        measurement.functionals_from_config([{"type": "spline"}])


def test_dictionary_atom_ordering():
    src = np.array([[3.0, 0.0], [0.0, 3.0]])
    d = measurement.make_dictionary(CR, src)
    assert d.natoms == 4
    c = np.array([1.0, 0.0, 0.0, 0.0])  # atom 0: column 0 at source 0
    u = d.expansion(c, CR)
    x = np.array([[0.2, 0.1]])
    want = kernels.eval_kernel(CR, x[0], src[0])[:, 0]
    np.testing.assert_allclose(kernels.expansion_values(CR, u, x)[0], want,
                               rtol=1e-13)
