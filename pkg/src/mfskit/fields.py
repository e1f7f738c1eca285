"""Closed-form reference solutions used as truth in verification drivers.

Scalar harmonic polynomials (valid in 2D and, where noted, 3D) plus
holomorphic fields for the Cauchy-Riemann system, each with an exact
gradient so boundary data (value, normal derivative) is exact.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TruthField:
    field_id: str
    ncomp: int            # 1 for scalar harmonics, 2 for holomorphic fields
    value: callable       # (n, ndim) -> (n,) or (n, 2)
    gradient: callable    # (n, ndim) -> (n, ndim); scalar fields only


def _pad(g, x):
    """Zero-pad a planar gradient to the ambient dimension of x."""
    out = np.zeros_like(x)
    out[:, :2] = g
    return out


def _scalar(field_id, value, grad2):
    return TruthField(
        field_id, 1,
        lambda x: value(np.atleast_2d(np.asarray(x, dtype=np.float64))),
        lambda x: _pad(grad2(np.atleast_2d(np.asarray(x, dtype=np.float64))),
                       np.atleast_2d(np.asarray(x, dtype=np.float64))),
    )


def _holomorphic(field_id, f, df):
    def value(x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        w = f(x[:, 0] + 1j * x[:, 1])
        return np.column_stack([w.real, w.imag])
    return TruthField(field_id, 2, value, df)


_REGISTRY = {
    "zero": _scalar(
        "zero",
        lambda x: np.zeros(len(x)),
        lambda x: np.zeros((len(x), 2))),
    "one": _scalar(
        "one",
        lambda x: np.ones(len(x)),
        lambda x: np.zeros((len(x), 2))),
    "x1": _scalar(
        "x1",
        lambda x: x[:, 0],
        lambda x: np.column_stack([np.ones(len(x)), np.zeros(len(x))])),
    # x1^2 - x2^2 = Re z^2; harmonic in any ambient dimension
    "saddle": _scalar(
        "saddle",
        lambda x: x[:, 0] ** 2 - x[:, 1] ** 2,
        lambda x: np.column_stack([2 * x[:, 0], -2 * x[:, 1]])),
    "im-z2": _scalar(
        "im-z2",
        lambda x: 2 * x[:, 0] * x[:, 1],
        lambda x: np.column_stack([2 * x[:, 1], 2 * x[:, 0]])),
    "re-z3": _scalar(
        "re-z3",
        lambda x: x[:, 0] ** 3 - 3 * x[:, 0] * x[:, 1] ** 2,
        lambda x: np.column_stack([3 * (x[:, 0] ** 2 - x[:, 1] ** 2),
                                   -6 * x[:, 0] * x[:, 1]])),
    "z2": _holomorphic("z2", lambda z: z**2, None),
    "z3": _holomorphic("z3", lambda z: z**3, None),
}


def get_field(field_id):
    try:
        return _REGISTRY[field_id]
    except KeyError:
        raise KeyError(f"unknown truth field {field_id!r}; "
                       f"known: {sorted(_REGISTRY)}") from None
