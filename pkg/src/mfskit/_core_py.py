"""Pure-numpy fallback for the compiled pairwise kernel blocks.

Same call signatures and semantics as the Cython module ``mfskit._core``:
every function takes C-contiguous float64 point arrays, returns the full
pairwise block, and raises ``ValueError`` when any pair falls inside the
squared singularity guard ``eps2``.
"""

import numpy as np

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi


def _diffs(x, y):
    d = x[:, None, :] - y[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    return d, r2


def _guard(r2, eps2):
    if r2.size and np.min(r2) <= eps2:
        raise ValueError("kernel evaluated inside the singularity guard")


def lap2_val(x, y, eps2):
    _, r2 = _diffs(x, y)
    _guard(r2, eps2)
    return np.log(r2) / (2.0 * TWO_PI)


def lap3_val(x, y, eps2):
    _, r2 = _diffs(x, y)
    _guard(r2, eps2)
    return -1.0 / (FOUR_PI * np.sqrt(r2))


def lap2_dn(x, nx, y, eps2):
    d, r2 = _diffs(x, y)
    _guard(r2, eps2)
    return np.einsum("ik,ijk->ij", nx, d) / (TWO_PI * r2)


def lap3_dn(x, nx, y, eps2):
    d, r2 = _diffs(x, y)
    _guard(r2, eps2)
    return np.einsum("ik,ijk->ij", nx, d) / (FOUR_PI * r2 * np.sqrt(r2))


def lap2_grad(x, y, eps2):
    d, r2 = _diffs(x, y)
    _guard(r2, eps2)
    return d / (TWO_PI * r2)[:, :, None]


def lap3_grad(x, y, eps2):
    d, r2 = _diffs(x, y)
    _guard(r2, eps2)
    return d / (FOUR_PI * r2 * np.sqrt(r2))[:, :, None]


def _cdiff(x, y, eps2):
    zx = x[:, 0] + 1j * x[:, 1]
    zy = y[:, 0] + 1j * y[:, 1]
    dz = zx[:, None] - zy[None, :]
    if dz.size and np.min(dz.real**2 + dz.imag**2) <= eps2:
        raise ValueError("kernel evaluated inside the singularity guard")
    return dz


def cr_val(x, y, eps2):
    return 1.0 / (np.pi * _cdiff(x, y, eps2))


def cr_dz(x, y, eps2):
    return -1.0 / (np.pi * _cdiff(x, y, eps2) ** 2)
