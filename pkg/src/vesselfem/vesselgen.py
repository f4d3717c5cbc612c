"""Synthetic vasculature: random point vessels, aligned straight vessels and
balancing-factor spanning trees.

Random numbers come from :class:`RngStream`, numpy's Philox-4x64 counter
generator keyed by ``(master_seed, stream_index)``.  Philox is a published,
counter-based bijection (Salmon et al., SC'11), so a stream is reproducible
in any implementation that follows the reference algorithm: the 128-bit key
is ``[master_seed, stream_index]`` and the counter starts at zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vessel import PointVessel2D, VesselNetwork, VesselSegment3D

MAX_REJECTIONS = 100_000


class PackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RngStream:
    """Independent random stream ``stream_index`` of ``master_seed``."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_index < 0:
            raise ValueError("seed and stream index must be non-negative")

    def generator(self) -> np.random.Generator:
        key = [self.master_seed & (2**64 - 1), self.stream_index & (2**64 - 1)]
        return np.random.Generator(np.random.Philox(key=key))


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng)).generator()


def _shrunk_box(origin, extent, margin):
    lo = np.asarray(origin, dtype=float) + margin
    hi = np.asarray(origin, dtype=float) + np.asarray(extent, dtype=float) - margin
    if np.any(hi <= lo):
        raise ValueError("margin leaves no room for vessels")
    return lo, hi


def _rejection_sample(lo, hi, n, min_dist, gen):
    pts = np.empty((n, lo.size))
    k = misses = 0
    while k < n:
        c = lo + (hi - lo) * gen.random(lo.size)
        if k and np.min(np.sum((pts[:k] - c) ** 2, axis=1)) < min_dist ** 2:
            misses += 1
            if misses >= MAX_REJECTIONS:
                raise PackingError(f"packing too dense: placed {k} of {n}")
            continue
        pts[k] = c
        k += 1
        misses = 0
    return pts


def sample_point_vessels(domain, n, radius, margin, rng, pressure=1.0):
    """Uniform non-overlapping vessel centres in the ``margin``-shrunk box.

    Parameters
    ----------
    domain : (origin, extent)
    rng : RngStream, numpy Generator or integer seed
    """
    origin, extent = (np.asarray(v, dtype=float) for v in domain)
    if margin < radius:
        raise ValueError("margin must be >= radius")
    if n * np.pi * radius ** 2 >= 0.5 * np.prod(extent):
        raise PackingError("packing too dense: n pi r^2 must stay below half the area")
    lo, hi = _shrunk_box(origin, extent, margin)
    C = _rejection_sample(lo, hi, n, 2.0 * radius, _generator(rng))
    return [PointVessel2D(tuple(float(x) for x in c), float(radius), float(pressure)) for c in C]


def sample_aligned_vessels(domain, n, radius, margin, rng, pressure=1.0, end_margin=0.0):
    """Straight z-aligned vessels through a 3D box.

    Cross-section centres are drawn as in :func:`sample_point_vessels` on
    the x-y face; each vessel runs from ``z0 + end_margin`` to
    ``z1 - end_margin``.
    """
    origin, extent = (np.asarray(v, dtype=float) for v in domain)
    if origin.size != 3:
        raise ValueError("aligned vessels need a 3D box")
    pv = sample_point_vessels((origin[:2], extent[:2]), n, radius, margin, rng, pressure)
    z0, z1 = origin[2] + end_margin, origin[2] + extent[2] - end_margin
    segs = [VesselSegment3D([[*v.center, z0], [*v.center, z1]], radius, pressure) for v in pv]
    return VesselNetwork(segs, meta={"kind": "aligned"})


def radius_for_beta(total_length, domain_volume, target_beta):
    """Radius giving volume fraction ``target_beta``: ``sqrt(beta V / (pi L))``."""
    if total_length <= 0 or domain_volume <= 0 or target_beta <= 0:
        raise ValueError("inputs must be > 0")
    return float(np.sqrt(target_beta * domain_volume / (np.pi * total_length)))


ROOT_PRESETS = ("LL", "C", "FC")


def root_point(preset, origin, extent):
    """``LL`` lower-left corner, ``C`` centre, ``FC`` centre of the ``-z`` face."""
    o, e = np.asarray(origin, dtype=float), np.asarray(extent, dtype=float)
    if preset == "LL":
        return o.copy()
    if preset == "C":
        return o + 0.5 * e
    if preset == "FC":
        r = o + 0.5 * e
        r[-1] = o[-1]
        return r
    raise ValueError(f"unknown root preset {preset!r}")


@dataclass(frozen=True)
class TreeConfig:
    """Tree-growth parameters.

    ``n_points`` random points are drawn in ``domain`` shrunk by ``margin``;
    with the root this gives ``n_points`` edges.  ``root`` is a point or a
    preset name, placed on the shrunk box.
    """

    n_points: int
    root: object = "LL"
    balancing_factor: float = 0.5
    target_beta: float = 0.05
    domain: tuple = ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    seed: int = 0
    margin: float = 0.0
    pressure: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.balancing_factor <= 1.0:
            raise ValueError("balancing_factor must lie in [0, 1]")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if not 0.0 < self.target_beta < 1.0:
            raise ValueError("target_beta must lie in (0, 1)")

    def shrunk_domain(self):
        o, e = (np.asarray(v, dtype=float) for v in self.domain)
        return o + self.margin, e - 2.0 * self.margin

    def root_point(self):
        if isinstance(self.root, str):
            return root_point(self.root, *self.shrunk_domain())
        return np.asarray(self.root, dtype=float)


def grow_tree(root, points, balancing_factor):
    """Greedy growth from ``root`` (node 0) over ``points`` (nodes 1..n).

    Each step attaches the unconnected node ``i`` to the connected node
    ``j`` minimizing ``dist(i, j) + bf * pathlen(root -> j)``, ties broken by
    smaller ``j`` and then smaller ``i``.

    Returns ``(parent, order)``: ``parent[i]`` for every node (``-1`` for the
    root) and the attachment order.
    """
    X = np.vstack([np.asarray(root, dtype=float)[None], np.asarray(points, dtype=float)])
    n = X.shape[0]
    bf = float(balancing_factor)
    parent = np.full(n, -1)
    path = np.zeros(n)
    connected = np.zeros(n, dtype=bool)
    connected[0] = True
    best = np.linalg.norm(X - X[0], axis=1)          # cost of attaching to node 0
    best_j = np.zeros(n, dtype=np.int64)
    order = []
    for _ in range(n - 1):
        cand = np.flatnonzero(~connected)
        c = best[cand]
        m = c.min()
        tied = cand[c == m]
        i = int(tied[np.lexsort((tied, best_j[tied]))[0]])
        j = int(best_j[i])
        parent[i] = j
        path[i] = path[j] + np.linalg.norm(X[i] - X[j])
        connected[i] = True
        order.append(i)
        # new connected node i may offer cheaper attachments; ties keep smaller j
        cost = np.linalg.norm(X - X[i], axis=1) + bf * path[i]
        better = ~connected & ((cost < best) | ((cost == best) & (i < best_j)))
        best[better] = cost[better]
        best_j[better] = i
    return parent, order


def build_tree(cfg: TreeConfig, rng=None) -> VesselNetwork:
    """Sample points and grow a tree; edges become constant-radius segments
    with the radius chosen for ``cfg.target_beta``."""
    gen = _generator(RngStream(cfg.seed) if rng is None else rng)
    o, e = cfg.shrunk_domain()
    if np.any(e <= 0):
        raise ValueError("margin leaves no room for the tree")
    pts = o + e * gen.random((cfg.n_points, o.size))
    root = cfg.root_point()
    parent, order = grow_tree(root, pts, cfg.balancing_factor)
    nodes = np.vstack([root[None], pts])
    lengths = np.linalg.norm(nodes[1:] - nodes[parent[1:]], axis=1)
    volume = float(np.prod(np.asarray(cfg.domain[1], dtype=float)))
    radius = radius_for_beta(lengths.sum(), volume, cfg.target_beta)
    segs, edges = [], []
    for i in order:
        edges.append((parent[i], i))
        segs.append(VesselSegment3D(nodes[[parent[i], i]], radius, cfg.pressure))
    return VesselNetwork(segs, nodes=nodes, parents=parent, edges=np.array(edges),
                         meta={"radius": radius, "balancing_factor": cfg.balancing_factor})


def _arc(center, radius, start_angle, stop_angle, n):
    t = np.linspace(start_angle, stop_angle, n)
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def y_junction(diameter=0.1, pressure=1.0, x0=0.5, y0=0.5, z_start=0.05, z_split=0.4,
               z_end=0.95, bend_radius=0.125, bend_angle=np.pi / 6, arc_points=9):
    """Mirror-symmetric Y-shaped vessel in the x-z plane at ``y = y0``.

    A trunk along ``z`` from ``z_start`` to ``z_split`` splits into two
    branches; each bends by ``bend_angle`` on an arc of ``bend_radius`` and
    then runs straight up to ``z_end``.  The left branch is the exact mirror
    image ``x -> 2 x0 - x`` of the right one.
    """
    a = 0.5 * diameter
    trunk = np.array([[x0, z_start], [x0, z_split]])
    arc = _arc((x0 + bend_radius, z_split), bend_radius, np.pi, np.pi - bend_angle, arc_points)
    end_x = arc[-1, 0] + (z_end - arc[-1, 1]) * np.tan(bend_angle)
    right = np.vstack([arc, [[end_x, z_end]]])
    left = right.copy()
    left[:, 0] = 2.0 * x0 - left[:, 0]

    def lift(xz):
        return np.column_stack([xz[:, 0], np.full(len(xz), y0), xz[:, 1]])

    segs = [VesselSegment3D(lift(p), a, pressure) for p in (trunk, right, left)]
    return VesselNetwork(segs, meta={"kind": "y_junction"})
