"""Gaussian radial kernel and dense least-squares machinery.

The kernel is parameterized as ``phi(r) = exp(-(eps * r)**2)`` with shape
parameter ``eps > 0``: small eps gives a flat, near-global kernel and large
eps a narrow spike.  (Beware that some libraries use the inverse convention
``exp(-(r / eps)**2)``; shape-parameter sweeps are meaningless if the two
are mixed.)  Matrices are plain row-major ``numpy.ndarray``; no sparse or
structured storage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NumericalError(RuntimeError):
    """A solve produced non-finite output; the caller may skip and move on."""


@dataclass(frozen=True)
class KernelParams:
    """Shape parameter for the Gaussian kernel; must be positive and finite."""

    shape: float

    def __post_init__(self):
        if not (np.isfinite(self.shape) and self.shape > 0):
            raise ValueError(f"shape must be positive and finite, got {self.shape}")


def kernel_value(r, params: KernelParams):
    """phi(r) = exp(-(eps*r)**2) for scalar or array r >= 0."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    return np.exp(-((params.shape * r) ** 2))


def kernel_gradient(x, centre, params: KernelParams) -> np.ndarray:
    """Spatial gradient of phi(||x - centre||) with respect to x.

    d/dx exp(-(eps*||x-c||)**2) = -2 eps^2 (x - c) phi(||x - c||).
    """
    x = np.asarray(x, dtype=np.float64)
    centre = np.asarray(centre, dtype=np.float64)
    if x.shape != centre.shape:
        raise ValueError(f"shape mismatch: x {x.shape} vs centre {centre.shape}")
    diff = x - centre
    r = np.sqrt((diff**2).sum())
    return -2.0 * params.shape**2 * diff * kernel_value(r, params)


def _pairwise(points: np.ndarray, centres: np.ndarray):
    points = np.asarray(points, dtype=np.float64)
    centres = np.asarray(centres, dtype=np.float64)
    if points.ndim != 2 or centres.ndim != 2:
        raise ValueError("points and centres must be 2-d arrays")
    if points.shape[1] != centres.shape[1]:
        raise ValueError(
            f"dimension mismatch: points are {points.shape[1]}-d, "
            f"centres are {centres.shape[1]}-d"
        )
    diff = points[:, None, :] - centres[None, :, :]  # (N, M, d)
    r = np.sqrt((diff**2).sum(axis=-1))  # (N, M)
    return diff, r


def assemble_value_matrix(points, centres, params: KernelParams) -> np.ndarray:
    """N x M matrix with entry (i, j) = phi(||points[i] - centres[j]||)."""
    _, r = _pairwise(points, centres)
    return kernel_value(r, params)


def assemble_gradient_matrix(points, centres, params: KernelParams) -> np.ndarray:
    """(N*d) x M matrix of kernel spatial gradients.

    Rows are point-major, coordinate-minor: rows d*i .. d*i+d-1 hold the d
    gradient components of every kernel column at points[i].
    """
    diff, r = _pairwise(points, centres)
    n, m = r.shape
    d = diff.shape[2]
    phi = kernel_value(r, params)
    g = -2.0 * params.shape**2 * diff * phi[:, :, None]  # (N, M, d)
    return g.transpose(0, 2, 1).reshape(n * d, m)


def solve_least_squares(a: np.ndarray, b: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    """Minimum-norm least-squares solution of a @ x = b.

    Rank-revealing SVD solve; singular values below rel_tol times the
    largest are treated as zero.  Non-finite inputs are rejected up front;
    a non-finite solution raises NumericalError so sweeps can skip the
    offending candidate.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("matrix must be 2-d")
    if b.ndim != 1 or b.shape[0] != a.shape[0]:
        raise ValueError(f"rhs shape {b.shape} does not match matrix rows {a.shape[0]}")
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise ValueError("matrix and rhs must be finite")
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=rel_tol)
    if not np.all(np.isfinite(x)):
        raise NumericalError("least-squares solution is not finite")
    return x
