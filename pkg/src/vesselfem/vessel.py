"""Vessel geometry: 2D point vessels, 3D polyline centerlines, direction
statistics and the plain-text network interchange format.

Interchange format: one block per segment, ``SEGMENT n`` followed by ``n``
lines ``x y z radius pressure`` (SI units, ``%.17g``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import jacobi_eigh


@dataclass(frozen=True)
class PointVessel2D:
    center: tuple
    radius: float
    pressure: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("vessel radius must be > 0")


@dataclass(eq=False)
class VesselSegment3D:
    """Polyline centerline with per-vertex radius and pressure.

    Radius and pressure vary linearly in arclength between vertices.
    """

    points: np.ndarray
    radii: np.ndarray
    pressures: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        k = self.points.shape[0]
        self.radii = np.broadcast_to(np.asarray(self.radii, dtype=float), (k,)).copy()
        self.pressures = np.broadcast_to(np.asarray(self.pressures, dtype=float), (k,)).copy()
        if k < 2:
            raise ValueError("a segment needs at least two points")
        if np.any(self.edge_lengths == 0):
            raise ValueError("consecutive points must be distinct")
        if np.any(self.radii <= 0):
            raise ValueError("radii must be > 0")

    @property
    def edge_lengths(self):
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)

    @property
    def length(self):
        return float(self.edge_lengths.sum())

    @property
    def arclength(self):
        """Arclength at each vertex."""
        return np.concatenate([[0.0], np.cumsum(self.edge_lengths)])


@dataclass(eq=False)
class VesselNetwork:
    """Collection of 3D segments (or 2D point vessels) with optional tree links.

    ``parents[k]`` is the index of the node that segment ``k`` hangs from,
    in ``nodes`` (``-1`` for none).
    """

    segments: list
    nodes: np.ndarray | None = None
    parents: np.ndarray | None = None
    edges: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return 2 if self.segments and isinstance(self.segments[0], PointVessel2D) else 3

    @property
    def total_length(self):
        return float(sum(s.length for s in self.segments))


@dataclass
class CenterlineQuadrature:
    """Midpoint-rule nodes along a centerline.

    ``d_area_pressure`` holds ``d(a^2 p)/ds`` at each node, so that with
    ``k = (2 mu + lambda) / mu`` the line source strength is
    ``pi a^2 p k`` and its arclength derivative ``pi k d_area_pressure``.
    """

    points: np.ndarray
    tangents: np.ndarray
    weights: np.ndarray
    radius: np.ndarray
    pressure: np.ndarray
    d_area_pressure: np.ndarray

    def source_strength(self, material):
        return np.pi * self.radius ** 2 * self.pressure * material.jump_factor

    def source_derivative(self, material):
        return np.pi * self.d_area_pressure * material.jump_factor

    @classmethod
    def concatenate(cls, items):
        items = list(items)
        return cls(*(np.concatenate([getattr(q, f) for q in items])
                     for f in ("points", "tangents", "weights", "radius",
                               "pressure", "d_area_pressure")))


def arclength_quadrature(segment: VesselSegment3D, max_spacing) -> CenterlineQuadrature:
    """Midpoint nodes on every edge, spacing at most ``max_spacing``.

    The weights sum to the segment length; tangents are the unit edge
    directions.  ``d(a^2 p)/ds`` is the exact derivative of the
    piecewise-linear radius and pressure on the edge carrying the node.
    """
    if max_spacing <= 0:
        raise ValueError("max_spacing must be > 0")
    P, a, p = segment.points, segment.radii, segment.pressures
    lengths = segment.edge_lengths
    out = {k: [] for k in ("points", "tangents", "weights", "radius", "pressure", "dap")}
    for e, L in enumerate(lengths):
        n = max(1, int(np.ceil(L / max_spacing - 1e-12)))
        t = (np.arange(n) + 0.5) / n
        tau = (P[e + 1] - P[e]) / L
        out["points"].append(P[e] + np.outer(t, P[e + 1] - P[e]))
        out["tangents"].append(np.tile(tau, (n, 1)))
        out["weights"].append(np.full(n, L / n))
        ai = a[e] + t * (a[e + 1] - a[e])
        pi = p[e] + t * (p[e + 1] - p[e])
        da = (a[e + 1] - a[e]) / L
        dp = (p[e + 1] - p[e]) / L
        out["radius"].append(ai)
        out["pressure"].append(pi)
        out["dap"].append(2.0 * ai * da * pi + ai ** 2 * dp)
    cat = {k: np.concatenate(v) for k, v in out.items()}
    return CenterlineQuadrature(cat["points"], cat["tangents"], cat["weights"],
                                cat["radius"], cat["pressure"], cat["dap"])


def network_quadrature(network: VesselNetwork, max_spacing) -> CenterlineQuadrature:
    return CenterlineQuadrature.concatenate(
        arclength_quadrature(s, max_spacing) for s in network.segments)


def nearest_arclength(segment: VesselSegment3D, point):
    """Arclength of the polyline point closest to ``point`` (ties -> smaller s)."""
    x = np.asarray(point, dtype=float)
    P = segment.points
    s0 = segment.arclength
    best_d, best_s = np.inf, 0.0
    for e, L in enumerate(segment.edge_lengths):
        ab = P[e + 1] - P[e]
        t = np.clip((x - P[e]) @ ab / (L * L), 0.0, 1.0)
        d = np.linalg.norm(x - (P[e] + t * ab))
        if d < best_d:
            best_d, best_s = d, s0[e] + t * L
    return float(best_s)


def _edges(network):
    for seg in network.segments:
        P = seg.points
        L = seg.edge_lengths
        tau = np.diff(P, axis=0) / L[:, None]
        a0, a1 = seg.radii[:-1], seg.radii[1:]
        # exact integral of a(s)^2 over a linear edge
        area_len = np.pi * L * (a0 ** 2 + a0 * a1 + a1 ** 2) / 3.0
        yield tau, L, area_len


def beta_tensor(network: VesselNetwork, domain_volume):
    """Anisotropic volume-fraction tensor ``(1/|V|) int pi a^2 (I - tau tau) ds``."""
    if domain_volume == 0:
        raise ValueError("domain volume must be non-zero")
    B = np.zeros((3, 3))
    for tau, _, area_len in _edges(network):
        B += np.einsum("e,eij->ij", area_len, np.eye(3)[None] - np.einsum("ei,ej->eij", tau, tau))
    return B / domain_volume


def direction_matrix(network: VesselNetwork):
    """``int tau (x) tau ds`` over the whole network."""
    M = np.zeros((3, 3))
    for tau, L, _ in _edges(network):
        M += np.einsum("e,ei,ej->ij", L, tau, tau)
    return M


@dataclass
class DirectionTensor:
    """Direction matrix with its eigenpairs.

    ``eigenvalues`` are rescaled so that the largest is one and sorted
    ascending; ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    raw_eigenvalues: np.ndarray


def principal_directions(network: VesselNetwork) -> DirectionTensor:
    M = direction_matrix(network)
    if np.trace(M) <= 0:
        raise ValueError("network has zero length")
    w, V = jacobi_eigh(M)
    return DirectionTensor(M, w / w.max(), V, w)


def mean_cross_section(network: VesselNetwork):
    """Length-weighted mean of ``pi a^2``."""
    tot = sum(area_len.sum() for _, _, area_len in _edges(network))
    return tot / network.total_length


def beta_i(network: VesselNetwork, domain_volume):
    """Per-direction volume fractions ``L pi a^2 lambda_i / (V (l1 l2 l3)^(1/3))``.

    ``pi a^2`` is the length-weighted mean cross-section.
    """
    lam = principal_directions(network).eigenvalues
    return beta_i_from(network.total_length, mean_cross_section(network), lam, domain_volume)


def beta_i_from(total_length, cross_section, eigenvalues, domain_volume):
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("degenerate direction distribution")
    return total_length * cross_section * lam / (domain_volume * np.prod(lam) ** (1.0 / 3.0))


def write_network(network: VesselNetwork, path):
    with open(path, "w") as fh:
        fh.write(format_network(network))


def format_network(network: VesselNetwork) -> str:
    lines = []
    for seg in network.segments:
        lines.append(f"SEGMENT {seg.points.shape[0]}")
        for x, a, p in zip(seg.points, seg.radii, seg.pressures):
            lines.append(" ".join("%.17g" % v for v in (*x, a, p)))
    return "\n".join(lines) + "\n"


def parse_network(text) -> VesselNetwork:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    segments, i = [], 0
    while i < len(rows):
        if rows[i][0] != "SEGMENT" or len(rows[i]) != 2:
            raise ValueError(f"expected 'SEGMENT n' at block {len(segments)}")
        n = int(rows[i][1])
        data = np.array(rows[i + 1:i + 1 + n], dtype=float)
        if data.shape != (n, 5):
            raise ValueError(f"segment {len(segments)}: expected {n} rows of 5 numbers")
        segments.append(VesselSegment3D(data[:, :3], data[:, 3], data[:, 4]))
        i += n + 1
    return VesselNetwork(segments)


def read_network(path) -> VesselNetwork:
    with open(path) as fh:
        return parse_network(fh.read())
