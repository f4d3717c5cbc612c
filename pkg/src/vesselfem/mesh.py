"""Structured quadtree / octree meshes over axis-aligned boxes.

Cells are leaves of a 2:1 balanced tree over the root box.  Every cell is
stored by its refinement level and an integer anchor on a fixed lattice of
``2**MAX_LEVEL`` intervals per axis, so that vertex identification and
neighbour searches are exact integer operations.

Ordering conventions (both deterministic):

* cells are sorted by the lattice coordinates of their lower corner,
  ``x`` fastest, then ``y``, then ``z``;
* nodes are sorted the same way.

Local vertex ``k`` of a cell sits at offset ``((k >> 0) & 1, (k >> 1) & 1,
(k >> 2) & 1)`` in units of the cell size.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

MAX_LEVEL = 14

#: boundary face ids, in order: -x, +x, -y, +y, -z, +z
FACE_NAMES = ("-x", "+x", "-y", "+y", "-z", "+z")


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class RefinementSpec:
    """How to refine the root box.

    Parameters
    ----------
    base_level : int
        Number of uniform bisections of the root box.
    local_levels : int
        Extra refinement rounds applied to cells whose centre lies within
        ``attractor_radius`` of an attractor.
    attractor_points : array_like, optional
        ``(n, dim)`` points attracting refinement.
    attractor_polylines : sequence of array_like, optional
        Polylines ``(k, dim)`` attracting refinement.
    attractor_radius : float
        Distance threshold (m).
    """

    base_level: int
    local_levels: int = 0
    attractor_points: tuple = ()
    attractor_polylines: tuple = ()
    attractor_radius: float = 0.0

    def __post_init__(self):
        if self.base_level < 0 or self.local_levels < 0:
            raise MeshError("refinement levels must be non-negative")
        if self.base_level + self.local_levels > MAX_LEVEL:
            raise MeshError(
                f"refinement level {self.base_level + self.local_levels} exceeds "
                f"the cap of {MAX_LEVEL}")
        if self.attractor_radius < 0:
            raise MeshError("attractor_radius must be >= 0")


def _pack(coords, stride):
    """Lexicographic key with x fastest."""
    coords = np.asarray(coords, dtype=np.int64)
    key = np.zeros(coords.shape[0], dtype=np.int64)
    for axis in range(coords.shape[1] - 1, -1, -1):
        key = key * stride + coords[:, axis]
    return key


def _distance_to_polyline(points, polyline):
    points = np.atleast_2d(points)
    polyline = np.asarray(polyline, dtype=float)
    best = np.full(points.shape[0], np.inf)
    for a, b in zip(polyline[:-1], polyline[1:]):
        ab = b - a
        denom = ab @ ab
        t = np.clip((points - a) @ ab / denom, 0.0, 1.0) if denom > 0 else 0.0
        proj = a + np.multiply.outer(t, ab)
        best = np.minimum(best, np.linalg.norm(points - proj, axis=1))
    if polyline.shape[0] == 1:
        best = np.linalg.norm(points - polyline[0], axis=1)
    return best


class _LeafLookup:
    """Per-level sorted keys for exact leaf membership tests."""

    def __init__(self, levels, anchors, dim):
        self.dim = dim
        self.by_level = {}
        for lev in np.unique(levels):
            sel = np.flatnonzero(levels == lev)
            # index of the cell at its own level
            idx = anchors[sel] >> (MAX_LEVEL - lev)
            keys = _pack(idx, (1 << lev) + 2)
            order = np.argsort(keys)
            self.by_level[int(lev)] = (keys[order], sel[order])

    def find(self, lev, idx):
        """Leaf ids for level-``lev`` cell indices ``idx`` (-1 if absent)."""
        out = np.full(idx.shape[0], -1, dtype=np.int64)
        entry = self.by_level.get(int(lev))
        if entry is None or idx.shape[0] == 0:
            return out
        keys, ids = entry
        n = 1 << lev
        ok = np.all((idx >= 0) & (idx < n), axis=1)
        q = _pack(np.where(ok[:, None], idx, 0), n + 2)
        pos = np.searchsorted(keys, q)
        pos = np.minimum(pos, keys.shape[0] - 1)
        hit = ok & (keys[pos] == q)
        out[hit] = ids[pos[hit]]
        return out


@dataclass(eq=False)
class Mesh:
    """Leaf cells of a balanced quadtree/octree with Q1 vertex numbering.

    Attributes
    ----------
    dim : int
    origin, extent : ndarray
        Root box ``[origin, origin + extent]``.
    levels : ndarray of int
        Refinement level of every cell.
    anchors : ndarray of int, shape (ncells, dim)
        Lower corner of every cell on the integer lattice.
    nodes : ndarray, shape (nnodes, dim)
        Vertex coordinates (m).
    cells : ndarray of int, shape (ncells, 2**dim)
        Vertex ids per cell, in local vertex order.
    hanging : dict
        ``node -> ((parent, weight), ...)`` with parents resolved to
        non-hanging nodes.
    boundary_facets : ndarray of int, shape (nfacets, 2)
        ``(cell, face_id)`` for every cell facet on the root boundary.
    """

    dim: int
    origin: np.ndarray
    extent: np.ndarray
    levels: np.ndarray
    anchors: np.ndarray
    nodes: np.ndarray = field(init=False)
    node_lattice: np.ndarray = field(init=False)
    cells: np.ndarray = field(init=False)
    hanging: dict = field(init=False)
    boundary_facets: np.ndarray = field(init=False)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.extent = np.asarray(self.extent, dtype=float)
        order = np.argsort(_pack(self.anchors, (1 << MAX_LEVEL) + 1), kind="stable")
        self.levels = np.asarray(self.levels, dtype=np.int64)[order]
        self.anchors = np.asarray(self.anchors, dtype=np.int64)[order]
        self._lookup = _LeafLookup(self.levels, self.anchors, self.dim)
        self._build_nodes()
        self._build_hanging()
        self._build_boundary()

    # -- construction -----------------------------------------------------
    def _build_nodes(self):
        d = self.dim
        offsets = np.array([[(k >> a) & 1 for a in range(d)] for k in range(2 ** d)])
        size = (1 << (MAX_LEVEL - self.levels))[:, None, None]
        verts = self.anchors[:, None, :] + offsets[None] * size
        stride = (1 << MAX_LEVEL) + 1
        keys = _pack(verts.reshape(-1, d), stride)
        uniq, inverse = np.unique(keys, return_inverse=True)
        self._node_keys = uniq
        self.cells = inverse.reshape(-1, 2 ** d)
        lattice = np.empty((uniq.shape[0], d), dtype=np.int64)
        rest = uniq.copy()
        for a in range(d):
            lattice[:, a] = rest % stride
            rest //= stride
        self.node_lattice = lattice
        self.nodes = self.origin + lattice * (self.extent / (1 << MAX_LEVEL))

    def _node_ids(self, lattice_pts):
        keys = _pack(lattice_pts, (1 << MAX_LEVEL) + 1)
        pos = np.minimum(np.searchsorted(self._node_keys, keys), self._node_keys.shape[0] - 1)
        found = self._node_keys[pos] == keys
        return np.where(found, pos, -1)

    def _build_hanging(self):
        d = self.dim
        raw = {}
        size = 1 << (MAX_LEVEL - self.levels)
        coarse = size >= 2
        anchors = self.anchors[coarse]
        half = (size[coarse] // 2)[:, None]
        # edges: pairs of local vertices differing in one bit
        nv = 2 ** d
        edges = [(k, k | (1 << a)) for k in range(nv) for a in range(d) if not k & (1 << a)]
        cellverts = self.cells[coarse]
        offsets = np.array([[(k >> a) & 1 for a in range(d)] for k in range(nv)])
        for k0, k1 in edges:
            mid = anchors + (offsets[k0] + offsets[k1]) * half
            ids = self._node_ids(mid)
            for c in np.flatnonzero(ids >= 0):
                raw[int(ids[c])] = ((int(cellverts[c, k0]), 0.5), (int(cellverts[c, k1]), 0.5))
        if d == 3:
            for axis in range(3):
                for side in (0, 1):
                    face = [k for k in range(nv) if ((k >> axis) & 1) == side]
                    centre = anchors + (offsets[face[0]] + offsets[face[-1]]) * half
                    ids = self._node_ids(centre)
                    for c in np.flatnonzero(ids >= 0):
                        raw[int(ids[c])] = tuple((int(cellverts[c, k]), 0.25) for k in face)
        # resolve chains so that every parent is a free node
        resolved = {}

        def resolve(node, depth=0):
            if node in resolved:
                return resolved[node]
            if depth > 4 * MAX_LEVEL:
                raise MeshError("cyclic hanging-node constraints")
            acc = {}
            for parent, w in raw[node]:
                if parent in raw:
                    for pp, ww in resolve(parent, depth + 1):
                        acc[pp] = acc.get(pp, 0.0) + w * ww
                else:
                    acc[parent] = acc.get(parent, 0.0) + w
            resolved[node] = tuple(sorted(acc.items()))
            return resolved[node]

        for node in sorted(raw):
            resolve(node)
        self.hanging = resolved

    def _build_boundary(self):
        size = 1 << (MAX_LEVEL - self.levels)
        top = 1 << MAX_LEVEL
        facets = []
        for axis in range(self.dim):
            low = np.flatnonzero(self.anchors[:, axis] == 0)
            high = np.flatnonzero(self.anchors[:, axis] + size == top)
            facets.append(np.column_stack([low, np.full(low.shape, 2 * axis)]))
            facets.append(np.column_stack([high, np.full(high.shape, 2 * axis + 1)]))
        self.boundary_facets = np.concatenate(facets).astype(np.int64)

    # -- geometry ---------------------------------------------------------
    @property
    def n_cells(self):
        return self.levels.shape[0]

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    def cell_size(self, cells=None):
        """Edge lengths ``(ncells, dim)`` of the given cells."""
        lev = self.levels if cells is None else self.levels[cells]
        return self.extent[None, :] / (1 << lev)[:, None]

    def cell_lower(self, cells=None):
        anc = self.anchors if cells is None else self.anchors[cells]
        return self.origin + anc * (self.extent / (1 << MAX_LEVEL))

    def cell_centers(self, cells=None):
        return self.cell_lower(cells) + 0.5 * self.cell_size(cells)

    def cell_volumes(self):
        return np.prod(self.cell_size(), axis=1)

    @property
    def h_min(self):
        """Smallest cell edge length."""
        return float(np.min(self.cell_size()))

    @property
    def volume(self):
        return float(np.prod(self.extent))

    def boundary_nodes(self, face_id):
        """Ids of all nodes lying on boundary face ``face_id``."""
        if not 0 <= face_id < 2 * self.dim:
            raise MeshError(f"unknown face id {face_id}")
        axis, side = divmod(face_id, 2)
        target = (1 << MAX_LEVEL) if side else 0
        return np.flatnonzero(self.node_lattice[:, axis] == target)

    def contains(self, points, tol=0.0):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((p >= self.origin - tol) & (p <= self.origin + self.extent + tol), axis=1)

    # -- 2:1 balance check --------------------------------------------------
    def max_level_jump(self):
        """Largest level difference between cells sharing a vertex."""
        return _max_neighbor_jump(self.levels, self.anchors, self.dim, self._lookup)


def _neighbor_leaf_levels(levels, anchors, dim, lookup):
    """For every cell and every neighbour direction, level of the leaf covering
    the same-size neighbour region, or -1 when it is refined further or absent."""
    dirs = [np.array(d) for d in product((-1, 0, 1), repeat=dim) if any(d)]
    out = np.full((levels.shape[0], len(dirs)), -1, dtype=np.int64)
    for lev in np.unique(levels):
        sel = np.flatnonzero(levels == lev)
        idx = anchors[sel] >> (MAX_LEVEL - lev)
        for j, dvec in enumerate(dirs):
            nb = idx + dvec
            found = np.full(sel.shape[0], -1, dtype=np.int64)
            for anc_lev in range(int(lev), -1, -1):
                todo = found < 0
                if not todo.any():
                    break
                ids = lookup.find(anc_lev, nb[todo] >> (lev - anc_lev))
                hit = ids >= 0
                sub = np.flatnonzero(todo)[hit]
                found[sub] = levels[ids[hit]]
            out[sel, j] = found
    return out


def _max_neighbor_jump(levels, anchors, dim, lookup):
    nbl = _neighbor_leaf_levels(levels, anchors, dim, lookup)
    # neighbours covered by finer leaves are seen from the finer side
    jump = np.where(nbl >= 0, levels[:, None] - nbl, 0)
    return int(jump.max(initial=0))


def _refine(levels, anchors, mask, dim):
    if not mask.any():
        return levels, anchors
    keep_l, keep_a = levels[~mask], anchors[~mask]
    lev, anc = levels[mask], anchors[mask]
    half = (1 << (MAX_LEVEL - lev - 1))[:, None]
    kids_l, kids_a = [], []
    for k in range(2 ** dim):
        off = np.array([(k >> a) & 1 for a in range(dim)])
        kids_l.append(lev + 1)
        kids_a.append(anc + off * half)
    return (np.concatenate([keep_l] + kids_l),
            np.concatenate([keep_a] + kids_a))


def _balance(levels, anchors, dim):
    while True:
        lookup = _LeafLookup(levels, anchors, dim)
        nbl = _neighbor_leaf_levels(levels, anchors, dim, lookup)
        need = np.zeros(levels.shape[0], dtype=bool)
        too_coarse = (nbl >= 0) & (nbl < levels[:, None] - 1)
        if not too_coarse.any():
            return levels, anchors
        # locate the offending coarse leaves again and flag them
        dirs = np.array([d for d in product((-1, 0, 1), repeat=dim) if any(d)])
        rows, cols = np.nonzero(too_coarse)
        lev = levels[rows]
        target = nbl[rows, cols]
        nb = (anchors[rows] >> (MAX_LEVEL - lev)[:, None]) + dirs[cols]
        nb = nb >> (lev - target)[:, None]
        for t in np.unique(target):
            sel = target == t
            ids = lookup.find(int(t), nb[sel])
            need[ids[ids >= 0]] = True
        levels, anchors = _refine(levels, anchors, need, dim)


def build_grid(dim, origin, extent, spec: RefinementSpec) -> Mesh:
    """Build a balanced quadtree (2D) or octree (3D) mesh of a box.

    The root box is bisected ``spec.base_level`` times; then, for
    ``spec.local_levels`` rounds, every cell whose centre is within
    ``spec.attractor_radius`` of an attractor point or polyline is split.
    2:1 balance across faces, edges and vertices is restored at the end of
    every round.

    Examples
    --------
    >>> m = build_grid(2, (0, 0), (1, 1), RefinementSpec(base_level=3))
    >>> m.n_cells, m.h_min
    (64, 0.125)
    """
    if dim not in (2, 3):
        raise MeshError("dim must be 2 or 3")
    origin = np.asarray(origin, dtype=float)
    extent = np.asarray(extent, dtype=float)
    if origin.shape != (dim,) or extent.shape != (dim,):
        raise MeshError("origin and extent must have length dim")
    if np.any(extent <= 0):
        raise MeshError("extent must be strictly positive on every axis")

    n = 1 << spec.base_level
    grid = np.stack(np.meshgrid(*[np.arange(n)] * dim, indexing="ij"), -1).reshape(-1, dim)
    anchors = grid.astype(np.int64) << (MAX_LEVEL - spec.base_level)
    levels = np.full(anchors.shape[0], spec.base_level, dtype=np.int64)

    has_attractor = len(spec.attractor_points) > 0 or len(spec.attractor_polylines) > 0
    scale = extent / (1 << MAX_LEVEL)
    for _ in range(spec.local_levels if has_attractor else 0):
        centers = origin + (anchors + (1 << (MAX_LEVEL - levels))[:, None] / 2.0) * scale
        dist = np.full(levels.shape[0], np.inf)
        if len(spec.attractor_points):
            pts = np.atleast_2d(np.asarray(spec.attractor_points, dtype=float))
            for p in pts:
                dist = np.minimum(dist, np.linalg.norm(centers - p, axis=1))
        for line in spec.attractor_polylines:
            dist = np.minimum(dist, _distance_to_polyline(centers, line))
        mask = (dist <= spec.attractor_radius) & (levels < spec.base_level + spec.local_levels)
        levels, anchors = _refine(levels, anchors, mask, dim)
        levels, anchors = _balance(levels, anchors, dim)

    return Mesh(dim, origin, extent, levels, anchors)


def _candidate_indices(mesh, points, lev):
    """Level-``lev`` cell indices whose closed box contains each point; when a
    coordinate sits on a grid line both neighbours are candidates."""
    t = (points - mesh.origin) / mesh.extent * (1 << lev)
    base = np.floor(t).astype(np.int64)
    on_line = (t == base)
    cands = []
    for shift in product((0, 1), repeat=mesh.dim):
        shift = np.array(shift)
        idx = base - shift
        valid = np.all((shift == 0) | on_line, axis=1)
        cands.append((idx, valid))
    return cands


def locate_cell(mesh: Mesh, point):
    """Index of the leaf cell containing ``point``.

    Points on facets shared by several cells resolve to the lowest cell
    index.  Accepts a single point or an ``(n, dim)`` array.
    """
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if not np.all(mesh.contains(pts)):
        bad = pts[~mesh.contains(pts)][0]
        raise MeshError(f"point {bad} lies outside the mesh box")
    best = np.full(pts.shape[0], np.iinfo(np.int64).max)
    for lev in mesh._lookup.by_level:
        for idx, valid in _candidate_indices(mesh, pts, lev):
            ids = mesh._lookup.find(lev, idx)
            ok = valid & (ids >= 0)
            best[ok] = np.minimum(best[ok], ids[ok])
    return int(best[0]) if single else best


def cells_in_ball(mesh: Mesh, center, radius):
    """Cells whose closed box meets the closed box of half-width ``radius``.

    Returns sorted cell indices.
    """
    if radius < 0:
        raise MeshError("radius must be >= 0")
    c = np.asarray(center, dtype=float)
    lo = (c - radius - mesh.origin) / mesh.extent
    hi = (c + radius - mesh.origin) / mesh.extent
    found = []
    for lev in mesh._lookup.by_level:
        n = 1 << lev
        i0 = np.maximum(np.ceil(lo * n).astype(np.int64) - 1, 0)
        i1 = np.minimum(np.floor(hi * n).astype(np.int64), n - 1)
        if np.any(i1 < i0):
            continue
        ranges = [np.arange(a, b + 1) for a, b in zip(i0, i1)]
        idx = np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, mesh.dim)
        # drop candidates that do not actually touch (ceil - 1 is conservative)
        cell_lo = idx / n
        cell_hi = (idx + 1) / n
        touch = np.all((cell_lo <= hi) & (cell_hi >= lo), axis=1)
        ids = mesh._lookup.find(lev, idx[touch])
        found.append(ids[ids >= 0])
    if not found:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate(found))
