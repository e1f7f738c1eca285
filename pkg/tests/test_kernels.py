"""Kernel evaluation: closed-form values, structure and PDE residuals."""

import math

import numpy as np
import pytest

from mfskit import kernels
from mfskit.errors import SingularEvaluation, UnsupportedOperator

LAP2 = kernels.make_kernel("laplace2d")
LAP3 = kernels.make_kernel("laplace3d")
CR = kernels.make_kernel("cauchy-riemann")


def test_make_kernel_descriptors():
    assert (LAP2.ndim, LAP2.ncomp, LAP2.order) == (2, 1, 2)
    assert (LAP3.ndim, LAP3.ncomp, LAP3.order) == (3, 1, 2)
    assert (CR.ndim, CR.ncomp, CR.order) == (2, 2, 1)
    with pytest.raises(UnsupportedOperator):
        kernels.make_kernel("helmholtz")


def test_laplace2d_unit_distance_is_zero():
    v = kernels.eval_kernel(LAP2, (1.0, 0.0), (0.0, 0.0))
    assert v.shape == (1, 1)
    assert v[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_laplace2d_log_form():
    # (1/2pi) ln r at a generic distance
    v = kernels.eval_kernel(LAP2, (3.0, 4.0), (0.0, 0.0))[0, 0]
    assert v == pytest.approx(math.log(5.0) / (2 * math.pi), rel=1e-14)


def test_laplace3d_unit_distance():
    v = kernels.eval_kernel(LAP3, (1.0, 0.0, 0.0), (0.0, 0.0, 0.0))[0, 0]
    assert v == pytest.approx(-1.0 / (4 * math.pi), rel=1e-14)


def test_cauchy_riemann_unit_distance():
    # zeta = 1, z = 0 -> 1/(pi (zeta - z)) = 1/pi, embedded as a scaled identity
    v = kernels.eval_kernel(CR, (0.0, 0.0), (1.0, 0.0))
    # value as a function of x at source y: 1/(pi (z - zeta)) with our
    # orientation; magnitude 1/pi either way, rotation structure below
    assert abs(abs(v[0, 0]) - 1 / math.pi) < 1e-14
    assert v[0, 1] == pytest.approx(0.0, abs=1e-15)


def test_cr_value_orientation():
    # our kernel column is Phi(x, y) = 1/(pi (z_x - z_y))
    z, zeta = 0.4 + 0.1j, 2.0 - 1.0j
    expect = 1.0 / (math.pi * (z - zeta))
    v = kernels.eval_kernel(CR, (z.real, z.imag), (zeta.real, zeta.imag))
    assert v[0, 0] == pytest.approx(expect.real, rel=1e-14)
    assert v[1, 0] == pytest.approx(expect.imag, rel=1e-14)


def test_cr_real_representation_structure():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.uniform(-2, 2, 2)
        y = rng.uniform(3, 5, 2)
        v = kernels.eval_kernel(CR, x, y)
        assert v[0, 0] == pytest.approx(v[1, 1], rel=1e-14)
        assert v[0, 1] == pytest.approx(-v[1, 0], rel=1e-14)


def test_laplace_symmetry():
    rng = np.random.default_rng(0)
    for kern in (LAP2, LAP3):
        for _ in range(20):
            x = rng.standard_normal(kern.ndim)
            y = x + rng.uniform(0.5, 3) * rng.standard_normal(kern.ndim)
            a = kernels.eval_kernel(kern, x, y)[0, 0]
            b = kernels.eval_kernel(kern, y, x)[0, 0]
            assert a == b


def test_laplace3d_homogeneity():
    # |x-y|^{-1} scaling: doubling the distance halves the value
    rng = np.random.default_rng(1)
    y = np.zeros(3)
    for _ in range(10):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        r = rng.uniform(0.3, 2.0)
        v1 = kernels.eval_kernel(LAP3, r * d, y)[0, 0]
        v2 = kernels.eval_kernel(LAP3, 2 * r * d, y)[0, 0]
        assert v2 == pytest.approx(0.5 * v1, rel=1e-12)


def test_singularity_guard():
    with pytest.raises(SingularEvaluation):
        kernels.eval_kernel(LAP2, (0.0, 0.0), (0.0, 0.0))
    with pytest.raises(SingularEvaluation):
        kernels.eval_kernel(LAP3, (1e-13, 0.0, 0.0), (0.0, 0.0, 0.0))
    with pytest.raises(SingularEvaluation):
        kernels.eval_kernel(CR, (0.0, 0.0), (1e-13, 0.0))


def test_normal_derivative_radial_2d():
    # d/dr of (1/2pi) ln r is 1/(2 pi r)
    v = kernels.eval_boundary_op(LAP2, 1, (1.0, 0.0), (0.0, 0.0), (1.0, 0.0))
    assert v[0, 0] == pytest.approx(1.0 / (2 * math.pi), rel=1e-14)


def test_normal_derivative_tangential_vanishes():
    v = kernels.eval_boundary_op(LAP3, 1, (1.0, 0.0, 0.0), (0.0, 0.0, 0.0),
                                 (0.0, 1.0, 0.0))
    assert v[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_boundary_op_index_0_matches_value():
    x, y = (0.3, -0.2, 0.1), (2.0, 1.0, -1.0)
    a = kernels.eval_boundary_op(LAP3, 0, x, y)
    b = kernels.eval_kernel(LAP3, x, y)
    assert np.array_equal(a, b)


def test_unsupported_boundary_op():
    with pytest.raises(UnsupportedOperator):
        kernels.boundary_block(CR, 1, np.zeros((1, 2)), np.ones((1, 2)),
                               np.full((2, 2), 3.0))


def test_normal_derivative_vs_gradient():
    rng = np.random.default_rng(7)
    for kern in (LAP2, LAP3):
        x = rng.standard_normal((5, kern.ndim))
        y = 4.0 + rng.standard_normal((3, kern.ndim))
        nu = rng.standard_normal((5, kern.ndim))
        nu /= np.linalg.norm(nu, axis=1)[:, None]
        dn = kernels.normal_block(kern, x, nu, y)
        gr = kernels.grad_block(kern, x, y)
        np.testing.assert_allclose(
            dn, np.einsum("id,ijdkr->ijkr", nu, gr), rtol=1e-13)


def test_gradient_matches_finite_difference():
    h = 1e-6
    rng = np.random.default_rng(9)
    for kern in (LAP2, LAP3, CR):
        x = rng.uniform(-0.5, 0.5, (3, kern.ndim))
        y = np.full((2, kern.ndim), 3.0) + rng.standard_normal((2, kern.ndim))
        gr = kernels.grad_block(kern, x, y)
        for d in range(kern.ndim):
            e = np.zeros(kern.ndim)
            e[d] = h
            fd = (kernels.value_block(kern, x + e, y)
                  - kernels.value_block(kern, x - e, y)) / (2 * h)
            np.testing.assert_allclose(gr[:, :, d], fd, rtol=1e-7, atol=1e-9)


@pytest.mark.parametrize("kern,dist", [(LAP2, 2.0), (LAP3, 1.0), (CR, 1.0)])
def test_pde_residual_small(kern, dist):
    x = np.zeros(kern.ndim)
    x[0] = dist
    y = np.zeros(kern.ndim)
    r = kern and kernels.pde_residual(kern, x, y, 1e-3)
    assert abs(r) <= 1e-4


@pytest.mark.parametrize("kern", [LAP2, LAP3, CR])
def test_pde_residual_order(kern):
    x = np.zeros(kern.ndim)
    x[0] = 1.5
    y = np.zeros(kern.ndim)
    hs = np.array([1e-2, 1e-3])
    res = np.array([abs(kernels.pde_residual(kern, x, y, h)) for h in hs])
    order = np.polyfit(np.log(hs), np.log(np.maximum(res, 1e-300)), 1)[0]
    assert order >= 1.8


def test_pde_residual_stencil_guard():
    with pytest.raises(SingularEvaluation):
        kernels.pde_residual(LAP2, (1e-3, 0.0), (0.0, 0.0), 1e-3)


def test_expansion_values_match_manual_sum():
    rng = np.random.default_rng(11)
    for kern in (LAP2, CR):
        src = 3.0 + rng.standard_normal((4, kern.ndim))
        coeff = rng.standard_normal((4, kern.ncomp))
        u = kernels.KernelExpansion(src, coeff)
        x = rng.uniform(-0.5, 0.5, (6, kern.ndim))
        got = kernels.expansion_values(kern, u, x)
        want = np.zeros((6, kern.ncomp))
        for i in range(6):
            for j in range(4):
                want[i] += kernels.eval_kernel(kern, x[i], src[j]) @ coeff[j]
        np.testing.assert_allclose(got, want, rtol=1e-13)


def test_zero_expansion_evaluates_to_zero():
    u = kernels.zero_expansion(LAP2)
    assert u.nsources == 0
    x = np.zeros((3, 2))
    assert np.array_equal(kernels.expansion_values(LAP2, u, x), np.zeros((3, 1)))
    assert np.array_equal(kernels.expansion_gradients(LAP2, u, x),
                          np.zeros((3, 2, 1)))
