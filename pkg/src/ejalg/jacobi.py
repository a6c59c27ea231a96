"""Cyclic Jacobi eigensolver for small dense symmetric matrices.

Kept as an independent route next to LAPACK: rotations act only on two
rows/columns at a time, so eigenvalues come out with high relative
accuracy on the small (order <= 8) matrices this package works with.
Tests cross-check it against ``numpy.linalg.eigh``.
"""

from __future__ import annotations

import numpy as np

# Sweep until the off-diagonal Frobenius mass falls below this multiple
# of the input Frobenius norm.
OFFDIAG_TOL = 1e-13
MAX_SWEEPS = 60


def _offdiag_mass(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off))


def jacobi_eigh(A: np.ndarray, tol: float = OFFDIAG_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (nonincreasing) and eigenvectors of a symmetric matrix.

    Returns ``(w, V)`` with ``A = V @ diag(w) @ V.T`` and the columns of
    ``V`` orthonormal.  Cyclic sweeps of Givens rotations, terminating
    when the off-diagonal Frobenius mass is at most ``tol * ||A||_F``.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("square matrix required")
    if np.max(np.abs(A - A.T)) > 1e-12 * (1.0 + np.max(np.abs(A))):
        raise ValueError("symmetric matrix required")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        return np.diag(A).copy(), V
    thresh = tol * scale
    for _ in range(MAX_SWEEPS):
        if _offdiag_mass(A) <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # stable rotation angle (Rutishauser)
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]
