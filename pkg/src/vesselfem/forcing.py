"""Right-hand sides for pressurized vessels.

Variants
--------
``S``
    Singular: the wall traction ``(2mu+lambda)/mu p n`` integrated on the
    vessel circle, tested against point traces of the Q1 functions.
``RS``
    Regularized singular: the same wall integral spread by the mollified delta.
``RHs``
    Regularized hyper-singular: ``pi a^2 (2mu+lambda)/mu p`` times the
    mollified delta paired with ``div v`` (2D) or with the planar divergence
    plus a tangential line source (3D).
``Homogenized``
    Volumetric ``(2mu+lambda)/mu p tr(beta grad v)``.

The mollified delta is the tensor product of ``theta(y) = (1 + cos(pi y)) / 2``
on ``(-1, 1)``.  Because every cell is an axis-aligned box and Q1 functions
are tensor products of linear factors, kernel-weighted integrals over a cell
split into 1D integrals of ``theta`` against ``1`` and ``y``, which are
evaluated in closed form on the overlap of the cell and the kernel support.

All positive pressures dilate the surrounding matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .elasticity import Material
from .fem import gauss_box, reference_coords, shape_gradients, shape_values, vertex_offsets
from .mesh import MAX_LEVEL, Mesh, MeshError, locate_cell
from .vessel import CenterlineQuadrature, PointVessel2D, VesselNetwork, arclength_quadrature

VARIANTS = ("S", "RS", "RHs", "Homogenized")


class SupportError(MeshError):
    """A source (or its kernel support) leaves the mesh box."""


def theta(y):
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) < 1.0, 0.5 * (1.0 + np.cos(np.pi * y)), 0.0)


def dtheta(y):
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) < 1.0, -0.5 * np.pi * np.sin(np.pi * y), 0.0)


@dataclass(frozen=True)
class MollifiedDelta:
    """``delta_eps(x) = eps^-d prod_i theta(x_i / eps)``."""

    epsilon: float
    dim: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")

    def __call__(self, x):
        return delta_eval(self, x)

    def gradient(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = x / self.epsilon
        th, dth = theta(y), dtheta(y)
        g = np.empty_like(y)
        for a in range(self.dim):
            g[:, a] = dth[:, a] * np.prod(np.delete(th, a, axis=1), axis=1)
        return g / self.epsilon ** (self.dim + 1)


def delta_eval(kernel: MollifiedDelta, x):
    """Kernel value at ``x`` (single point or ``(n, d)`` array); zero outside
    the closed box of half-width ``epsilon``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    v = np.prod(theta(np.atleast_2d(x) / kernel.epsilon), axis=1) / kernel.epsilon ** kernel.dim
    return float(v[0]) if single else v


def delta_is_c1(kernel: MollifiedDelta, samples=64):
    """Check continuity of the kernel and its gradient at the support edge,
    where the inside branch must meet the zero outside branch."""
    eps = kernel.epsilon
    y = np.linspace(-1, 1, samples)
    ok = True
    for a in range(kernel.dim):
        for side in (-1.0, 1.0):
            pts = np.tile(y[:, None] * eps * 0.5, (1, kernel.dim))
            pts[:, a] = side * eps * (1.0 - 1e-9)
            ok &= np.abs(kernel(pts)).max() <= 1e-12 / eps ** kernel.dim
            ok &= np.abs(kernel.gradient(pts)).max() <= 1e-6 / eps ** (kernel.dim + 1)
    return bool(ok)


@dataclass(frozen=True)
class ForcingSpec:
    """Forcing variant and kernel width.

    ``epsilon`` is a length or ``"2h"`` (twice the smallest cell edge).
    ``spacing_factor`` scales ``h`` to give the spacing of boundary and
    centerline quadrature nodes.
    """

    variant: str = "RHs"
    epsilon: float | str = "2h"
    spacing_factor: float = 0.5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown forcing variant {self.variant!r}")
        if isinstance(self.epsilon, str):
            if self.epsilon != "2h":
                raise ValueError("epsilon must be a number or '2h'")
        elif not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.spacing_factor > 0:
            raise ValueError("spacing_factor must be > 0")

    def resolve_epsilon(self, mesh: Mesh):
        return 2.0 * mesh.h_min if self.epsilon == "2h" else float(self.epsilon)

    def kernel(self, mesh: Mesh):
        return MollifiedDelta(self.resolve_epsilon(mesh), mesh.dim)


# -- closed-form kernel moments --------------------------------------------

def _theta_integrals(t0, t1):
    """``int theta`` and ``int t theta`` over ``[t0, t1]`` inside ``[-1, 1]``."""
    def F0(t):
        return 0.5 * t + np.sin(np.pi * t) / (2.0 * np.pi)

    def F1(t):
        return 0.25 * t * t + t * np.sin(np.pi * t) / (2.0 * np.pi) + np.cos(np.pi * t) / (2.0 * np.pi ** 2)

    return F0(t1) - F0(t0), F1(t1) - F1(t0)


def _support_pairs(mesh: Mesh, centers, eps):
    """All (source, cell) pairs whose closed boxes overlap."""
    centers = np.atleast_2d(centers)
    d = mesh.dim
    lo = (centers - eps - mesh.origin) / mesh.extent
    hi = (centers + eps - mesh.origin) / mesh.extent
    src, cel = [], []
    for lev in mesh._lookup.by_level:
        n = 1 << lev
        i0 = np.maximum(np.ceil(lo * n).astype(np.int64) - 1, 0)
        i1 = np.minimum(np.floor(hi * n).astype(np.int64), n - 1)
        span = int(np.max(i1 - i0, initial=-1)) + 1
        if span <= 0:
            continue
        offs = np.array(list(product(range(span), repeat=d)), dtype=np.int64)
        chunk = max(1, 2_000_000 // offs.shape[0])
        for s0 in range(0, centers.shape[0], chunk):
            sl = slice(s0, s0 + chunk)
            idx = i0[sl, None, :] + offs[None]
            valid = np.all(idx <= i1[sl, None, :], axis=2)
            s_ids = np.broadcast_to(np.arange(s0, s0 + idx.shape[0])[:, None], valid.shape)[valid]
            ids = mesh._lookup.find(lev, idx[valid])
            hit = ids >= 0
            src.append(s_ids[hit])
            cel.append(ids[hit])
    if not src:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    s, c = np.concatenate(src), np.concatenate(cel)
    order = np.lexsort((c, s))
    return s[order], c[order]


def kernel_moments(mesh: Mesh, centers, eps):
    """Integrals of the mollified delta against Q1 shape functions.

    Returns ``(source, cell, I0, I1)`` with one row per overlapping
    (source, cell) pair::

        I0[r, a]    = int_cell delta_eps(x - c_s) phi_a(x) dx
        I1[r, a, k] = int_cell delta_eps(x - c_s) d_k phi_a(x) dx
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    d = mesh.dim
    s, c = _support_pairs(mesh, centers, eps)
    lower = mesh.cell_lower(c)
    size = mesh.cell_size(c)
    cen = centers[s]
    L = np.empty((s.shape[0], d, 2))
    D = np.empty((s.shape[0], d, 2))
    for a in range(d):
        x0, h = lower[:, a], size[:, a]
        t0 = np.clip((x0 - cen[:, a]) / eps, -1.0, 1.0)
        t1 = np.clip((x0 + h - cen[:, a]) / eps, -1.0, 1.0)
        m0, M1 = _theta_integrals(t0, t1)
        m1 = ((cen[:, a] - x0) * m0 + eps * M1) / h
        L[:, a, 0], L[:, a, 1] = m0 - m1, m1
        D[:, a, 0], D[:, a, 1] = -m0 / h, m0 / h
    off = vertex_offsets(d)
    nv = off.shape[0]
    I0 = np.ones((s.shape[0], nv))
    I1 = np.ones((s.shape[0], nv, d))
    for k in range(nv):
        for a in range(d):
            lf = L[:, a, off[k, a]]
            I0[:, k] *= lf
            for b in range(d):
                I1[:, k, b] *= D[:, a, off[k, a]] if a == b else lf
    return s, c, I0, I1


def _check_inside(mesh, lo, hi, what):
    tol = 1e-12 * np.max(mesh.extent)
    bad = np.any(lo < mesh.origin - tol, axis=-1) | np.any(hi > mesh.origin + mesh.extent + tol, axis=-1)
    if np.any(bad):
        raise SupportError(f"{what} leaves the domain (first offender #{int(np.flatnonzero(bad)[0])})")


def _scatter(mesh, node_ids, comp_values, owner=None):
    """Accumulate ``comp_values[..., j]`` into dof ``node * d + j``.

    With ``owner`` (non-decreasing, one entry per row) every owner is
    accumulated separately and the partial vectors are added in owner order,
    so the result is additive over vessels to the last bit.
    """
    d = mesh.dim
    n = mesh.n_nodes * d
    dofs = node_ids[..., None] * d + np.arange(d)
    vals = np.broadcast_to(np.asarray(comp_values), dofs.shape)
    if owner is None:
        return np.bincount(dofs.ravel(), weights=vals.ravel(), minlength=n)
    out = np.zeros(n)
    bounds = np.flatnonzero(np.diff(owner)) + 1
    for lo, hi in zip(np.r_[0, bounds], np.r_[bounds, len(owner)]):
        out += np.bincount(dofs[lo:hi].ravel(), weights=vals[lo:hi].ravel(), minlength=n)
    return out


def _vessel_arrays(vessels):
    C = np.array([v.center for v in vessels], dtype=float).reshape(-1, 2)
    a = np.array([v.radius for v in vessels], dtype=float)
    p = np.array([v.pressure for v in vessels], dtype=float)
    return C, a, p


def _circle_samples(mesh, vessels, n_quad, spacing_factor=0.5):
    C, a, p = _vessel_arrays(vessels)
    h = mesh.h_min
    pts, nrm, wts, owner = [], [], [], []
    for i, (c, r) in enumerate(zip(C, a)):
        n = n_quad or max(16, int(np.ceil(2.0 * np.pi * r / (spacing_factor * h))))
        phi = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        nn = np.column_stack([np.cos(phi), np.sin(phi)])
        pts.append(c + r * nn)
        nrm.append(nn)
        wts.append(np.full(n, 2.0 * np.pi * r / n))
        owner.append(np.full(n, i))
    return (np.concatenate(pts), np.concatenate(nrm), np.concatenate(wts),
            np.concatenate(owner), p)


def rhs_singular_2d(mesh: Mesh, material: Material, vessels, n_quad_per_circle=None):
    """Variant S: ``sum_i oint (2mu+lambda)/mu p_i (v . n) dGamma`` with ``n``
    pointing out of the vessel into the tissue.

    The circle is sampled at equispaced points, at least
    ``max(16, ceil(2 pi a / (h/2)))`` per vessel unless ``n_quad_per_circle``
    is given.
    """
    if mesh.dim != 2:
        raise ValueError("rhs_singular_2d needs a 2D mesh")
    if not vessels:
        return np.zeros(mesh.n_nodes * 2)
    C, a, _ = _vessel_arrays(vessels)
    _check_inside(mesh, C - a[:, None], C + a[:, None], "vessel circle")
    y, n, w, owner, p = _circle_samples(mesh, vessels, n_quad_per_circle)
    g = material.jump_factor * p[owner]
    cells = locate_cell(mesh, y)
    xi, _ = reference_coords(mesh, cells, y)
    phi = shape_values(xi)                                    # (m, nv)
    vals = phi[:, :, None] * (g * w)[:, None, None] * n[:, None, :]
    return _scatter(mesh, mesh.cells[cells], vals, owner)


def rhs_regularized_2d(mesh: Mesh, material: Material, vessels, kernel: MollifiedDelta,
                       n_quad_per_circle=None):
    """Variant RS: the wall traction of variant S spread by ``kernel``."""
    if mesh.dim != 2:
        raise ValueError("rhs_regularized_2d needs a 2D mesh")
    if not vessels:
        return np.zeros(mesh.n_nodes * 2)
    C, a, _ = _vessel_arrays(vessels)
    eps = kernel.epsilon
    _check_inside(mesh, C - a[:, None] - eps, C + a[:, None] + eps, "kernel support")
    y, n, w, owner, p = _circle_samples(mesh, vessels, n_quad_per_circle)
    g = material.jump_factor * p[owner]
    s, c, I0, _ = kernel_moments(mesh, y, eps)
    vals = I0[:, :, None] * ((g * w)[s, None] * n[s])[:, None, :]
    return _scatter(mesh, mesh.cells[c], vals, owner[s])


def rhs_hypersingular_2d(mesh: Mesh, material: Material, vessels, kernel: MollifiedDelta):
    """Variant RHs in 2D: ``sum_i pi a_i^2 (2mu+lambda)/mu p_i int delta_eps(x - x_i) div v``."""
    if mesh.dim != 2:
        raise ValueError("rhs_hypersingular_2d needs a 2D mesh")
    if not vessels:
        return np.zeros(mesh.n_nodes * 2)
    C, a, p = _vessel_arrays(vessels)
    eps = kernel.epsilon
    _check_inside(mesh, C - eps, C + eps, "kernel support")
    strength = np.pi * a ** 2 * material.jump_factor * p
    s, c, _, I1 = kernel_moments(mesh, C, eps)
    return _scatter(mesh, mesh.cells[c], strength[s, None, None] * I1, s)


def _as_quadrature(mesh, network, max_spacing):
    """Centerline nodes and the index of the segment owning each node."""
    if isinstance(network, CenterlineQuadrature):
        return network, np.zeros(network.weights.size, dtype=np.int64)
    spacing = 0.5 * mesh.h_min if max_spacing is None else max_spacing
    parts = [arclength_quadrature(seg, spacing) for seg in network.segments]
    if not parts:
        empty = np.zeros((0, 3))
        return CenterlineQuadrature(empty, empty, *(np.zeros(0) for _ in range(4))), np.zeros(0, dtype=np.int64)
    owner = np.repeat(np.arange(len(parts)), [q.weights.size for q in parts])
    return CenterlineQuadrature.concatenate(parts), owner


def rhs_hypersingular_3d(mesh: Mesh, material: Material, network, kernel: MollifiedDelta,
                         max_spacing=None, parts=False):
    """Variant RHs in 3D.

    Every centerline node ``s_q`` (midpoint rule, spacing ``max_spacing``,
    default ``h/2``) contributes

    * ``w_q g(s_q) int delta_eps(x - gamma(s_q)) (div v - tau . (grad v) tau)``
    * ``w_q g'(s_q) int delta_eps(x - gamma(s_q)) v . tau``

    with ``g = pi a^2 p (2mu+lambda)/mu``.  With ``parts=True`` the two
    contributions are returned separately.
    """
    if mesh.dim != 3:
        raise ValueError("rhs_hypersingular_3d needs a 3D mesh")
    q, owner = _as_quadrature(mesh, network, max_spacing)
    n_full = mesh.n_nodes * 3
    if q.weights.size == 0:
        z = np.zeros(n_full)
        return (z, z.copy()) if parts else z
    eps = kernel.epsilon
    _check_inside(mesh, q.points - eps, q.points + eps, "kernel support")
    g = q.weights * q.source_strength(material)
    dg = q.weights * q.source_derivative(material)
    s, c, I0, I1 = kernel_moments(mesh, q.points, eps)
    tau = q.tangents[s]                                         # (r, 3)
    axial = np.einsum("rak,rk->ra", I1, tau)                    # tau . grad phi_a
    planar = I1 - axial[:, :, None] * tau[:, None, :]
    hyper = _scatter(mesh, mesh.cells[c], g[s, None, None] * planar, owner[s])
    tangential = _scatter(mesh, mesh.cells[c], (dg[s, None] * I0)[:, :, None] * tau[:, None, :],
                          owner[s])
    return (hyper, tangential) if parts else hyper + tangential


def rhs_homogenized(mesh: Mesh, material: Material, beta, p):
    """Volumetric source ``int (2mu+lambda)/mu p tr(beta grad v)``.

    ``beta`` is a scalar (isotropic, pairs with ``div v``) or a symmetric
    ``dim x dim`` tensor.
    """
    d = mesh.dim
    B = np.asarray(beta, dtype=float)
    if B.ndim == 0:
        B = B * np.eye(d)
    if B.shape != (d, d):
        raise ValueError(f"beta must be a scalar or a {d}x{d} tensor")
    if not np.allclose(B, B.T, rtol=0, atol=1e-14 * max(1.0, np.abs(B).max())):
        raise ValueError("beta tensor must be symmetric")
    pts, wts = gauss_box(d, 2)
    out = np.zeros(mesh.n_nodes * d)
    for lev in np.unique(mesh.levels):
        cells = np.flatnonzero(mesh.levels == lev)
        size = mesh.extent / (1 << int(lev))
        grads = shape_gradients(pts, size)                       # (q, nv, d)
        integral = np.einsum("q,qak->ak", wts * np.prod(size), grads)
        local = material.jump_factor * p * integral @ B          # (nv, d): sum_k beta_kj d_k phi
        out += _scatter(mesh, mesh.cells[cells], np.broadcast_to(local, (cells.size,) + local.shape))
    return out


def assemble_rhs(mesh: Mesh, material: Material, vessels, spec: ForcingSpec,
                 beta=None, pressure=None):
    """Dispatch on ``spec.variant``.

    ``vessels`` is a list of :class:`PointVessel2D` in 2D or a
    :class:`VesselNetwork` in 3D; the homogenized variant needs ``beta`` and
    ``pressure`` instead.
    """
    if spec.variant == "Homogenized":
        if beta is None or pressure is None:
            raise ValueError("homogenized forcing needs beta and pressure")
        return rhs_homogenized(mesh, material, beta, pressure)
    if mesh.dim == 3:
        if spec.variant != "RHs":
            raise ValueError(f"variant {spec.variant} is not available in 3D")
        return rhs_hypersingular_3d(mesh, material, vessels, spec.kernel(mesh),
                                    max_spacing=spec.spacing_factor * mesh.h_min)
    if isinstance(vessels, VesselNetwork):
        vessels = vessels.segments
    if spec.variant == "S":
        return rhs_singular_2d(mesh, material, vessels)
    if spec.variant == "RS":
        return rhs_regularized_2d(mesh, material, vessels, spec.kernel(mesh))
    return rhs_hypersingular_2d(mesh, material, vessels, spec.kernel(mesh))
