"""Cyclic Jacobi diagonalisation of real symmetric matrices."""

from __future__ import annotations

import math

import numpy as np


class ConvergenceFailure(RuntimeError):
    """The rotation sweeps hit their cap before the off-diagonal norm vanished."""


def off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part."""
    off = a - np.diag(np.diag(a))
    return math.sqrt(float(np.sum(off * off)))


def jacobi_eigh(matrix, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Each sweep annihilates every off-diagonal pair (p, q) once with a plane
    rotation; iteration stops when the off-diagonal Frobenius norm drops
    below ``tol``. Each eigenvector is signed so that its largest-magnitude
    component is positive.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    n = a.shape[0]
    v = np.eye(n)
    sweeps = 0
    while off_norm(a) >= tol:
        if sweeps == max_sweeps:
            raise ConvergenceFailure(
                f"off-diagonal norm {off_norm(a):.3e} after {max_sweeps} sweeps (tolerance {tol:g})"
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(diff) > 1e150 * abs(apq):
                    t = apq / diff
                elif (theta := diff / (2.0 * apq)) >= 0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = v[:, order]
    for j in range(n):
        col = vectors[:, j]
        big = int(np.argmax(np.abs(col) > np.abs(col).max() - 1e-12))
        if col[big] < 0:
            vectors[:, j] = -col
    return values, vectors, sweeps
