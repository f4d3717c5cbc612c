"""Small linear-algebra kernels: Jacobi-preconditioned CG and a cyclic Jacobi
eigen-solver for symmetric 3x3 matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConvergenceError(RuntimeError):
    """Raised when CG does not reach the requested tolerance.

    Attributes
    ----------
    residual : float
        Relative residual at the last iterate.
    iterations : int
    """

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class CGInfo:
    iterations: int
    residual: float


def pcg(A, b, x0=None, tol=1e-10, max_iter=None, diag=None):
    """Solve ``A x = b`` for SPD ``A`` with diagonally preconditioned CG.

    Stops when ``||b - A x|| <= tol * ||b||``.  Returns ``(x, CGInfo)``.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if max_iter is None:
        max_iter = 10 * n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), CGInfo(0, 0.0)
    if diag is None:
        diag = A.diagonal()
    inv_diag = np.where(diag != 0, 1.0 / np.where(diag != 0, diag, 1.0), 1.0)

    r = b - A @ x
    res = np.linalg.norm(r) / bnorm
    if res <= tol:
        return x, CGInfo(0, res)
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            return x, CGInfo(it, res)
        z = inv_diag * r
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise ConvergenceError(
        f"CG did not converge in {max_iter} iterations (residual {res:.3e})", res, max_iter)


def jacobi_eigh(M, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues are returned in ascending order; each eigenvector is signed so
    that its largest-magnitude component is positive.

    Returns
    -------
    w : ndarray (n,)
    V : ndarray (n, n)
        Columns are eigenvectors.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    for k in range(n):
        j = np.argmax(np.abs(V[:, k]))
        if V[j, k] < 0:
            V[:, k] = -V[:, k]
    return w, V
