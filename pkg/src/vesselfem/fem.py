"""Q1 reference-element helpers shared by assembly, forcing and post-processing."""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np


@lru_cache(maxsize=None)
def gauss_1d(order):
    """Gauss-Legendre points and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def gauss_box(dim, order):
    """Tensor-product Gauss rule on the unit box, ``(npts, dim)`` and weights."""
    x, w = gauss_1d(order)
    pts = np.array(list(product(x, repeat=dim)))[:, ::-1]
    wts = np.prod(np.array(list(product(w, repeat=dim))), axis=1)
    return pts, wts


@lru_cache(maxsize=None)
def vertex_offsets(dim):
    return np.array([[(k >> a) & 1 for a in range(dim)] for k in range(2 ** dim)])


def shape_values(xi):
    """Q1 shape functions at reference points ``xi`` (n, dim) -> (n, 2**dim)."""
    xi = np.atleast_2d(xi)
    off = vertex_offsets(xi.shape[1])
    f = np.where(off[None, :, :] == 1, xi[:, None, :], 1.0 - xi[:, None, :])
    return np.prod(f, axis=2)


def shape_gradients(xi, size):
    """Physical gradients of the Q1 shape functions.

    Parameters
    ----------
    xi : ndarray (n, dim)
        Reference coordinates in [0, 1]^dim.
    size : ndarray (n, dim) or (dim,)
        Cell edge lengths.

    Returns
    -------
    ndarray (n, 2**dim, dim)
    """
    xi = np.atleast_2d(xi)
    n, dim = xi.shape
    size = np.broadcast_to(size, (n, dim))
    off = vertex_offsets(dim)
    f = np.where(off[None] == 1, xi[:, None, :], 1.0 - xi[:, None, :])
    df = np.where(off[None] == 1, 1.0, -1.0)
    grads = np.empty((n, off.shape[0], dim))
    for a in range(dim):
        others = np.prod(np.delete(f, a, axis=2), axis=2)
        grads[:, :, a] = df[:, :, a] * others / size[:, a:a + 1]
    return grads


def element_stiffness(size, mu, lam, order=2):
    """Q1 elasticity element matrix of an axis-aligned box.

    Rows and columns are ordered ``vertex * dim + component``.
    """
    size = np.asarray(size, dtype=float)
    dim = size.shape[0]
    pts, wts = gauss_box(dim, order)
    grads = shape_gradients(pts, size)          # (q, nv, d)
    jac = np.prod(size)
    nv = grads.shape[1]
    ke = np.zeros((nv, dim, nv, dim))
    for g, w in zip(grads, wts * jac):
        dot = g @ g.T                                       # grad phi_a . grad phi_b
        ke += w * mu * np.einsum("ab,ij->aibj", dot, np.eye(dim))
        ke += w * mu * np.einsum("aj,bi->aibj", g, g)
        ke += w * lam * np.einsum("ai,bj->aibj", g, g)
    return ke.reshape(nv * dim, nv * dim)


def reference_coords(mesh, cells, points):
    """Reference coordinates of ``points`` inside ``cells`` (clipped to [0, 1])."""
    lower = mesh.cell_lower(cells)
    size = mesh.cell_size(cells)
    return np.clip((points - lower) / size, 0.0, 1.0), size
