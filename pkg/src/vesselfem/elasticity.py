"""Vector Q1 finite elements for isotropic linear elasticity.

Typical use::

    system = assemble_stiffness(mesh, material).with_rhs(b)
    system = apply_bc(system, BoundarySpec({f: ClampedZero() for f in range(4)}))
    u = solve(system)
    face_force(u, material, 1)
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .fem import element_stiffness, gauss_box, reference_coords, shape_gradients, shape_values
from .linalg import CGInfo, pcg
from .mesh import Mesh, MeshError, locate_cell


@dataclass(frozen=True)
class Material:
    """Lamé pair in Pa."""

    mu: float
    lam: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("shear modulus mu must be > 0")
        if not self.lam >= 0:
            raise ValueError("lambda must be >= 0")

    @property
    def jump_factor(self):
        """``(2 mu + lambda) / mu``, the small-vessel stress jump per unit pressure."""
        return (2.0 * self.mu + self.lam) / self.mu

    def stress(self, grad):
        """Cauchy stress from displacement gradients ``(..., d, d)``."""
        grad = np.asarray(grad)
        d = grad.shape[-1]
        sym = 0.5 * (grad + np.swapaxes(grad, -1, -2))
        tr = np.trace(grad, axis1=-2, axis2=-1)
        return 2.0 * self.mu * sym + self.lam * tr[..., None, None] * np.eye(d)


class ClampedZero:
    """``u = 0`` on the face."""

    def __repr__(self):
        return "ClampedZero()"


@dataclass(frozen=True)
class DirichletField:
    """``u = fn(x)`` on the face; ``fn`` maps ``(n, d)`` points to ``(n, d)``
    values (or to a ``(values, gradients)`` tuple)."""

    fn: Callable


class TractionFree:
    """Natural boundary condition."""

    def __repr__(self):
        return "TractionFree()"


@dataclass
class BoundarySpec:
    """Boundary condition per face id; missing faces are traction free.

    Set ``pure_neumann=True`` to allow a problem without Dirichlet faces; the
    solution is then returned with rigid-body motions removed.
    """

    faces: dict = field(default_factory=dict)
    pure_neumann: bool = False

    @classmethod
    def clamped(cls, dim):
        return cls({f: ClampedZero() for f in range(2 * dim)})


@dataclass
class DofMap:
    """Full dofs ``node * dim + comp`` and the reduced (constraint-free) space.

    ``P`` maps reduced coefficients to full ones; ``None`` means identity.
    """

    dim: int
    n_nodes: int
    free_nodes: np.ndarray
    P: sp.csr_matrix | None

    @property
    def n_full(self):
        return self.n_nodes * self.dim

    @property
    def n_reduced(self):
        return self.free_nodes.shape[0] * self.dim

    def expand(self, U):
        return U.copy() if self.P is None else self.P @ U

    def restrict(self, b):
        return np.array(b, dtype=float) if self.P is None else self.P.T @ b

    def reduced_index(self, nodes):
        """Reduced node index of free ``nodes`` (-1 for hanging ones)."""
        lookup = np.full(self.n_nodes, -1, dtype=np.int64)
        lookup[self.free_nodes] = np.arange(self.free_nodes.shape[0])
        return lookup[nodes]


def build_dofmap(mesh: Mesh) -> DofMap:
    d = mesh.dim
    hanging = np.array(sorted(mesh.hanging), dtype=np.int64)
    is_free = np.ones(mesh.n_nodes, dtype=bool)
    is_free[hanging] = False
    free = np.flatnonzero(is_free)
    if hanging.size == 0:
        return DofMap(d, mesh.n_nodes, free, None)
    red = np.full(mesh.n_nodes, -1, dtype=np.int64)
    red[free] = np.arange(free.shape[0])
    rows, cols, vals = [free], [red[free]], [np.ones(free.shape[0])]
    for h in hanging:
        for parent, w in mesh.hanging[int(h)]:
            rows.append(np.array([h]))
            cols.append(np.array([red[parent]]))
            vals.append(np.array([w]))
    r, c, v = (np.concatenate(a) for a in (rows, cols, vals))
    # expand node-level weights to node*dim+comp
    R = (r[:, None] * d + np.arange(d)).ravel()
    C = (c[:, None] * d + np.arange(d)).ravel()
    V = np.repeat(v, d)
    P = sp.csr_matrix((V, (R, C)), shape=(mesh.n_nodes * d, free.shape[0] * d))
    return DofMap(d, mesh.n_nodes, free, P)


@dataclass
class SparseSystem:
    """Reduced linear system ``K U = b`` on a mesh.

    ``matrix`` and ``rhs`` live in the constraint-free space of ``dofs``.
    ``fixed`` lists the reduced dofs eliminated by Dirichlet conditions.
    """

    mesh: Mesh
    material: Material
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofs: DofMap
    fixed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    fixed_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pure_neumann: bool = False
    constrained: bool = False

    def with_rhs(self, b_full):
        """Copy with the full-dof load vector ``b_full`` condensed onto the
        reduced space (must be called before :func:`apply_bc`)."""
        if self.constrained:
            raise ValueError("set the right-hand side before applying boundary conditions")
        b_full = np.asarray(b_full, dtype=float)
        if b_full.shape != (self.dofs.n_full,):
            raise ValueError(f"rhs must have length {self.dofs.n_full}")
        return replace(self, rhs=self.dofs.restrict(b_full))


def _element_dofs(mesh):
    d = mesh.dim
    return (mesh.cells[:, :, None] * d + np.arange(d)).reshape(mesh.n_cells, -1)


def assemble_full_stiffness(mesh: Mesh, material: Material, chunk=8192):
    """Stiffness on all node dofs (hanging nodes not yet condensed)."""
    n = mesh.n_nodes * mesh.dim
    edofs = _element_dofs(mesh)
    ke_by_level = {int(l): element_stiffness(mesh.extent / (1 << int(l)), material.mu, material.lam)
                   for l in np.unique(mesh.levels)}
    K = sp.csr_matrix((n, n))
    for start in range(0, mesh.n_cells, chunk):
        sl = slice(start, start + chunk)
        ed = edofs[sl]
        kes = np.stack([ke_by_level[int(l)] for l in mesh.levels[sl]]) \
            if len(ke_by_level) > 1 else np.broadcast_to(next(iter(ke_by_level.values())),
                                                         (ed.shape[0],) + ed.shape[1:] * 2)
        nl = ed.shape[1]
        rows = np.repeat(ed, nl, axis=1).ravel()
        cols = np.tile(ed, (1, nl)).ravel()
        K = K + sp.csr_matrix((np.asarray(kes).ravel(), (rows, cols)), shape=(n, n))
    K.sum_duplicates()
    return K


def assemble_stiffness(mesh: Mesh, material: Material) -> SparseSystem:
    """Assemble ``K_ij = 2 mu (e(v_j), e(v_i)) + lambda (div v_j, div v_i)``.

    Element matrices use 2-point Gauss quadrature per axis, exact for Q1 on
    axis-aligned cells.  Hanging nodes are condensed out.
    """
    dofs = build_dofmap(mesh)
    K = assemble_full_stiffness(mesh, material)
    if dofs.P is not None:
        K = (dofs.P.T @ K @ dofs.P).tocsr()
    return SparseSystem(mesh, material, K, np.zeros(dofs.n_reduced), dofs)


def _bc_values(bc, points, dim):
    if isinstance(bc, ClampedZero):
        return np.zeros((points.shape[0], dim))
    out = bc.fn(points)
    if isinstance(out, tuple):
        out = out[0]
    return np.asarray(out, dtype=float).reshape(points.shape[0], dim)


def apply_bc(system: SparseSystem, boundary: BoundarySpec) -> SparseSystem:
    """Eliminate Dirichlet dofs symmetrically.

    Rows and columns of constrained dofs are zeroed, their diagonal set to
    one and the right-hand side lifted by the prescribed values.  Nodes on
    several Dirichlet faces take the value of the lowest face id.
    """
    mesh, dofs, d = system.mesh, system.dofs, system.mesh.dim
    dirichlet = {f: bc for f, bc in boundary.faces.items() if not isinstance(bc, TractionFree)}
    for f in boundary.faces:
        if not 0 <= f < 2 * d:
            raise MeshError(f"unknown face id {f}")
    if not dirichlet and not boundary.pure_neumann:
        raise ValueError("singular system: no Dirichlet face and pure_neumann not requested")

    values = {}
    for f in sorted(dirichlet, reverse=True):
        nodes = mesh.boundary_nodes(f)
        red = dofs.reduced_index(nodes)
        keep = red >= 0
        vals = _bc_values(dirichlet[f], mesh.nodes[nodes[keep]], d)
        for rn, v in zip(red[keep], vals):
            values[int(rn)] = v
    red_nodes = np.array(sorted(values), dtype=np.int64)
    if red_nodes.size:
        fixed = (red_nodes[:, None] * d + np.arange(d)).ravel()
        fixed_values = np.concatenate([values[int(n)] for n in red_nodes])
    else:
        fixed = np.zeros(0, dtype=np.int64)
        fixed_values = np.zeros(0)

    K = system.matrix.tocsr()
    b = system.rhs.copy()
    if fixed.size:
        g = np.zeros(K.shape[0])
        g[fixed] = fixed_values
        b -= K @ g
        mask = np.ones(K.shape[0])
        mask[fixed] = 0.0
        D = sp.diags(mask)
        K = (D @ K @ D).tocsr()
        K = K + sp.diags(1.0 - mask)
        K = K.tocsr()
        K.eliminate_zeros()
        b[fixed] = fixed_values
    return replace(system, matrix=K, rhs=b, fixed=fixed, fixed_values=fixed_values,
                   pure_neumann=boundary.pure_neumann and not dirichlet, constrained=True)


@dataclass
class Field:
    """Q1 vector field: one coefficient per (node, component), node-major."""

    mesh: Mesh
    U: np.ndarray
    info: CGInfo | None = None
    #: solution in the reduced space of the system it came from
    reduced: np.ndarray | None = None

    @property
    def values(self):
        return self.U.reshape(self.mesh.n_nodes, self.mesh.dim)


def rigid_modes(mesh: Mesh):
    """Full-dof coefficient vectors of translations and infinitesimal rotations."""
    d = mesh.dim
    x = mesh.nodes - mesh.origin - 0.5 * mesh.extent
    modes = []
    for a in range(d):
        t = np.zeros((mesh.n_nodes, d))
        t[:, a] = 1.0
        modes.append(t.ravel())
    pairs = [(0, 1)] if d == 2 else [(0, 1), (1, 2), (0, 2)]
    for a, b in pairs:
        r = np.zeros((mesh.n_nodes, d))
        r[:, a] = -x[:, b]
        r[:, b] = x[:, a]
        modes.append(r.ravel())
    return np.array(modes)


def solve(system: SparseSystem, tol=1e-10, max_iter=None) -> Field:
    """Jacobi-preconditioned CG solve; returns the full-dof :class:`Field`.

    Raises :class:`~vesselfem.linalg.ConvergenceError` carrying the final
    residual when ``max_iter`` (default ``10 * ndofs``) is exceeded.
    """
    if not system.constrained:
        raise ValueError("apply boundary conditions before solving")
    x0 = np.zeros(system.rhs.shape[0])
    x0[system.fixed] = system.fixed_values
    if max_iter is None:
        max_iter = 10 * system.rhs.shape[0]
    U, info = pcg(system.matrix, system.rhs, x0=x0, tol=tol, max_iter=max_iter)
    full = system.dofs.expand(U)
    if system.pure_neumann:
        modes = rigid_modes(system.mesh)
        coef = np.linalg.lstsq(modes.T, full, rcond=None)[0]
        full = full - modes.T @ coef
    return Field(system.mesh, full, info, U)


def interpolate(mesh: Mesh, fn) -> Field:
    """Nodal Q1 interpolant of ``fn`` honouring hanging-node constraints."""
    vals = fn(mesh.nodes)
    if isinstance(vals, tuple):
        vals = vals[0]
    vals = np.asarray(vals, dtype=float).reshape(mesh.n_nodes, mesh.dim)
    dofs = build_dofmap(mesh)
    red = vals[dofs.free_nodes].ravel()
    return Field(mesh, dofs.expand(red) if dofs.P is not None else vals.ravel())


def _gather(field, cells):
    return field.values[field.mesh.cells[cells]]          # (n, nv, d)


def _field_at(field, cells, xi, size):
    nodal = _gather(field, cells)
    phi = shape_values(xi)
    grads = shape_gradients(xi, size)
    u = np.einsum("nk,nkd->nd", phi, nodal)
    gu = np.einsum("nkd,nke->nde", nodal, grads)          # d u_d / d x_e
    return u, gu


def evaluate(field: Field, point):
    """Displacement at ``point`` (single point or ``(n, d)`` array)."""
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    cells = np.atleast_1d(locate_cell(field.mesh, pts))
    xi, size = reference_coords(field.mesh, cells, pts)
    u, _ = _field_at(field, cells, xi, size)
    return u[0] if single else u


def evaluate_gradient(field: Field, point):
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    cells = np.atleast_1d(locate_cell(field.mesh, pts))
    xi, size = reference_coords(field.mesh, cells, pts)
    _, g = _field_at(field, cells, xi, size)
    return g[0] if single else g


def evaluate_stress(field: Field, material: Material, point):
    """Cauchy stress ``2 mu e(u) + lambda (div u) I`` at ``point``; on cell
    interfaces the gradient of the lowest-index incident cell is used."""
    return material.stress(evaluate_gradient(field, point))


def _facet_quadrature(mesh, face_id, order=2):
    """Quadrature on all boundary facets of ``face_id``.

    Returns ``(cells, xi, weights)`` with one row per quadrature point.
    """
    d = mesh.dim
    axis, side = divmod(face_id, 2)
    facets = mesh.boundary_facets[mesh.boundary_facets[:, 1] == face_id, 0]
    pts, wts = gauss_box(d - 1, order)
    xi = np.insert(pts, axis, float(side), axis=1)               # (q, d)
    size = mesh.cell_size(facets)
    area = np.prod(np.delete(size, axis, axis=1), axis=1)        # (f,)
    cells = np.repeat(facets, xi.shape[0])
    XI = np.tile(xi, (facets.shape[0], 1))
    W = (area[:, None] * wts[None, :]).ravel()
    return cells, XI, W


def face_normal(dim, face_id):
    n = np.zeros(dim)
    n[face_id // 2] = 1.0 if face_id % 2 else -1.0
    return n


def face_force(field: Field, material: Material, face_id: int):
    """Resultant ``int_A sigma(u_h) n dA`` over boundary face ``face_id``,
    with ``n`` the outward normal (N, or N/m in 2D)."""
    mesh = field.mesh
    if not 0 <= face_id < 2 * mesh.dim:
        raise MeshError(f"unknown face id {face_id}")
    cells, xi, w = _facet_quadrature(mesh, face_id)
    _, g = _field_at(field, cells, xi, mesh.cell_size(cells))
    sigma = material.stress(g)
    n = face_normal(mesh.dim, face_id)
    return np.einsum("q,qij,j->i", w, sigma, n)


def face_average(field: Field, face_id: int):
    """Mean displacement over boundary face ``face_id``."""
    mesh = field.mesh
    if not 0 <= face_id < 2 * mesh.dim:
        raise MeshError(f"unknown face id {face_id}")
    cells, xi, w = _facet_quadrature(mesh, face_id)
    u, _ = _field_at(field, cells, xi, mesh.cell_size(cells))
    return w @ u / w.sum()


def error_norms(field: Field, analytic_field, mask_radius=0.0, centers=(), order=3):
    """L2 norm and H1 seminorm of ``analytic - field``.

    ``analytic_field(points)`` must return ``(values, gradients)`` with
    gradients indexed ``[n, component, direction]``.  Cells whose centre is
    within ``mask_radius`` of any of ``centers`` are skipped.
    """
    mesh = field.mesh
    keep = np.ones(mesh.n_cells, dtype=bool)
    if mask_radius > 0 and len(centers):
        cc = mesh.cell_centers()
        for c in np.atleast_2d(np.asarray(centers, dtype=float)):
            keep &= np.linalg.norm(cc - c, axis=1) >= mask_radius
    cells = np.flatnonzero(keep)
    if cells.size == 0:
        return 0.0, 0.0
    pts, wts = gauss_box(mesh.dim, order)
    nq = pts.shape[0]
    l2 = h1 = 0.0
    for start in range(0, cells.shape[0], 20000):
        cs = cells[start:start + 20000]
        size = mesh.cell_size(cs)
        C = np.repeat(cs, nq)
        XI = np.tile(pts, (cs.shape[0], 1))
        S = np.repeat(size, nq, axis=0)
        X = mesh.cell_lower(C) + XI * S
        W = (np.prod(size, axis=1)[:, None] * wts[None, :]).ravel()
        u, g = _field_at(field, C, XI, S)
        ue, ge = analytic_field(X)
        l2 += W @ np.sum((ue - u) ** 2, axis=1)
        h1 += W @ np.sum((ge - g) ** 2, axis=(1, 2))
    return float(np.sqrt(l2)), float(np.sqrt(h1))
