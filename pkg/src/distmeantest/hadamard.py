"""Normalized Walsh-Hadamard transform.

The transform matrix is defined recursively: H_1 = [1] and

    H_2d = (1/sqrt(2)) * [[H_d,  H_d],
                          [H_d, -H_d]]

so H_d is symmetric and orthogonal (its own inverse).  `fwht_inplace` runs the
usual butterfly in O(d log d) with a single 1/sqrt(d) scale at the end;
`naive_hadamard_apply` builds the dense matrix and is the oracle the fast
version is tested against.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

__all__ = ["fwht", "fwht_inplace", "naive_hadamard_apply", "hadamard_matrix"]


def _check_pow2(d: int, what: str = "dimension") -> int:
    if d < 1 or (d & (d - 1)) != 0:
        raise DimensionError(f"{what} must be a positive power of two, got {d}")
    return int(d).bit_length() - 1


def fwht_inplace(a: np.ndarray) -> np.ndarray:
    """Apply the normalized transform along the last axis of `a`, in place.

    Accepts any float array of shape (..., d); leading axes are treated as a
    batch.  Returns `a` for convenience.
    """
    d = a.shape[-1]
    _check_pow2(d)
    h = 1
    while h < d:
        # view as (..., pairs, 2, h): butterfly adds/subtracts h-strided halves
        v = a.reshape(a.shape[:-1] + (d // (2 * h), 2, h))
        x = v[..., 0, :].copy()
        y = v[..., 1, :]
        v[..., 0, :] = x + y
        v[..., 1, :] = x - y
        h *= 2
    if d > 1:
        a *= 1.0 / np.sqrt(d)
    return a


def fwht(v: np.ndarray) -> np.ndarray:
    """Out-of-place wrapper around `fwht_inplace`; input is not modified."""
    out = np.array(v, dtype=np.result_type(v, np.float64) if v.dtype.kind != "f" else v.dtype,
                   copy=True)
    return fwht_inplace(out)


def hadamard_matrix(d: int) -> np.ndarray:
    """Dense normalized Hadamard matrix, by the defining recursion."""
    _check_pow2(d)
    m = np.array([[1.0]])
    while m.shape[0] < d:
        m = np.block([[m, m], [m, -m]]) / np.sqrt(2.0)
    return m


def naive_hadamard_apply(v: np.ndarray) -> np.ndarray:
    """O(d^2) reference: materialize the matrix and multiply.

    Intended for d <= 1024; raises DimensionError beyond that so nobody leans
    on it for real workloads.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    k = _check_pow2(v.shape[0])
    if k > 10:
        raise DimensionError(f"naive apply capped at d=1024, got d={v.shape[0]}")
    return hadamard_matrix(v.shape[0]) @ v
