"""Configuration-driven experiment runners and result serialization.

A configuration is a JSON object validated against :data:`CONFIG_SCHEMA`
(unknown keys are rejected) and completed with defaults by
:func:`load_config`.  Runners return a :class:`CsvTable`; some also return
the solved field for VTK output.
"""
from __future__ import annotations

import copy
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .analytic import (AxisymConfig, exact_axisym, extended_axisym, homog_2d, homog_3d_aligned,
                       jump_ga)
from .elasticity import (BoundarySpec, ClampedZero, DirichletField, Field, Material,
                         TractionFree, apply_bc, assemble_stiffness, error_norms,
                         face_average, face_force, face_normal, solve)
from .forcing import ForcingSpec, assemble_rhs
from .mesh import RefinementSpec, build_grid
from .vessel import (PointVessel2D, VesselNetwork, VesselSegment3D, beta_tensor,
                     format_network, mean_cross_section, principal_directions)
from .vesselgen import (RngStream, TreeConfig, build_tree, radius_for_beta,
                        sample_aligned_vessels, sample_point_vessels, y_junction)

EXPERIMENTS = ("converge", "solve", "stats", "tree", "homog")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": _num, "minItems": 2, "maxItems": 3}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


CONFIG_SCHEMA = _obj({
    "experiment": {"enum": list(EXPERIMENTS)},
    "dim": {"enum": [2, 3]},
    "domain": _obj({"origin": _vec, "extent": {**_vec, "items": _pos}}),
    "mesh": _obj({
        "base_level": {"type": "integer", "minimum": 0},
        "local_levels": {"type": "integer", "minimum": 0},
        "attractor_radius": {"type": "number", "minimum": 0},
    }),
    "material": _obj({"mu": _pos, "lambda": {"type": "number", "minimum": 0}}),
    "forcing": _obj({
        "variant": {"enum": ["S", "RS", "RHs", "Homogenized"]},
        "epsilon": {"oneOf": [_pos, {"const": "2h"}]},
        "spacing_factor": _pos,
    }),
    "vessels": {"oneOf": [
        {"type": "array", "items": {"oneOf": [
            _obj({"center": _vec, "radius": _pos, "pressure": _num},
                 ["center", "radius", "pressure"]),
            _obj({"points": {"type": "array", "items": _vec, "minItems": 2},
                  "radii": {"oneOf": [_pos, {"type": "array", "items": _pos}]},
                  "pressures": {"oneOf": [_num, {"type": "array", "items": _num}]}},
                 ["points", "radii", "pressures"]),
        ]}},
        _obj({
            "kind": {"enum": ["random", "aligned", "tree", "y_junction"]},
            "n": {"type": "integer", "minimum": 1},
            "radius": _pos,
            "target_beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "balancing_factor": {"type": "number", "minimum": 0, "maximum": 1},
            "root": {"oneOf": [{"enum": ["LL", "C", "FC"]}, _vec]},
            "margin": {"type": "number", "minimum": 0},
            "end_margin": {"type": "number", "minimum": 0},
            "pressure": _num,
            "diameter": _pos,
            "seed": {"type": "integer", "minimum": 0},
        }, ["kind"]),
    ]},
    "bcs": {"type": "object",
            "patternProperties": {"^[0-5]$": {"enum": ["clamped", "free", "exact"]}},
            "properties": {"pure_neumann": {"type": "boolean"}},
            "additionalProperties": False},
    "run": _obj({
        "realizations": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
    }),
    "converge": _obj({
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "R": _pos,
        "mask_radius": {"type": "number", "minimum": 0},
        "jump": {"enum": ["thin", "exact"]},
    }),
    "homog": _obj({
        "beta": {"oneOf": [{"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                           {"type": "array", "items": {"type": "array", "items": _num}}]},
        "pressure": _num,
        "tau": _vec,
    }),
    "output": _obj({"dir": {"type": "string"}, "vtk": {"type": "boolean"}}),
}, ["experiment"])

_DEFAULTS = {
    "dim": 2,
    "mesh": {"base_level": 5, "local_levels": 0, "attractor_radius": 0.0},
    "material": {"mu": 1.0, "lambda": 1.0},
    "forcing": {"variant": "RHs", "epsilon": "2h", "spacing_factor": 0.5},
    "vessels": [],
    "bcs": {},
    "run": {"realizations": 1, "master_seed": 0, "threads": 1},
    "output": {"dir": ".", "vtk": False},
}


class ConfigError(ValueError):
    pass


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(source) -> dict:
    """Validate a config (path, JSON text or dict) and fill defaults."""
    if isinstance(source, dict):
        raw = source
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source) as fh:
            raw = json.load(fh)
    else:
        raw = json.loads(source)
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {path}: {exc.message}") from None
    cfg = _merge(_DEFAULTS, raw)
    dim = cfg["dim"]
    cfg.setdefault("domain", {})
    cfg["domain"].setdefault("origin", [0.0] * dim)
    cfg["domain"].setdefault("extent", [1.0] * dim)
    for k in ("origin", "extent"):
        if len(cfg["domain"][k]) != dim:
            raise ConfigError(f"domain.{k} must have {dim} entries")
    for k in cfg["bcs"]:
        if k != "pure_neumann" and int(k) >= 2 * dim:
            raise ConfigError(f"face id {k} does not exist in {dim}D")
    return cfg


def dump_config(cfg) -> str:
    return json.dumps(cfg, sort_keys=True, indent=2) + "\n"


# -- tables -----------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


@dataclass
class CsvTable:
    """Header plus rows; floats are written with 17 significant digits."""

    header: list
    rows: list = field(default_factory=list)

    def append(self, row):
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} columns, expected {len(self.header)}")
        self.rows.append(list(row))

    def column(self, name):
        j = self.header.index(name)
        return [r[j] for r in self.rows]

    def to_text(self):
        lines = [",".join(self.header)]
        lines += [",".join(_fmt(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"


def write_csv(table: CsvTable, path):
    with open(path, "w", newline="") as fh:
        fh.write(table.to_text())


def read_csv(path) -> CsvTable:
    with open(path) as fh:
        lines = fh.read().splitlines()
    return CsvTable(lines[0].split(","), [ln.split(",") for ln in lines[1:]])


# -- VTK --------------------------------------------------------------------

_VTK_ORDER = {2: (0, 1, 3, 2), 3: (0, 1, 3, 2, 4, 5, 7, 6)}
_VTK_TYPE = {2: 9, 3: 12}


def write_vtk(mesh, field, path):
    """Legacy ASCII unstructured grid with a ``displacement`` point vector."""
    d = mesh.dim
    pts = np.zeros((mesh.n_nodes, 3))
    pts[:, :d] = mesh.nodes
    disp = np.zeros((mesh.n_nodes, 3))
    if field is not None:
        disp[:, :d] = field.values
    nv = 2 ** d
    cells = mesh.cells[:, _VTK_ORDER[d]]
    out = ["# vtk DataFile Version 3.0", "vesselfem displacement", "ASCII",
           "DATASET UNSTRUCTURED_GRID", f"POINTS {mesh.n_nodes} double"]
    out += [" ".join("%.17g" % v for v in p) for p in pts]
    out.append(f"CELLS {mesh.n_cells} {mesh.n_cells * (nv + 1)}")
    out += [f"{nv} " + " ".join(map(str, c)) for c in cells]
    out.append(f"CELL_TYPES {mesh.n_cells}")
    out += [str(_VTK_TYPE[d])] * mesh.n_cells
    out += [f"POINT_DATA {mesh.n_nodes}", "VECTORS displacement double"]
    out += [" ".join("%.17g" % v for v in u) for u in disp]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


# -- building blocks ---------------------------------------------------------

def material_of(cfg):
    return Material(cfg["material"]["mu"], cfg["material"]["lambda"])


def forcing_of(cfg):
    f = cfg["forcing"]
    return ForcingSpec(f["variant"], f["epsilon"], f["spacing_factor"])


def _domain(cfg):
    return (np.asarray(cfg["domain"]["origin"], dtype=float),
            np.asarray(cfg["domain"]["extent"], dtype=float))


def _base_h(cfg):
    """Smallest cell edge the mesh will have (attractors assumed active)."""
    m = cfg["mesh"]
    _, ext = _domain(cfg)
    levels = m["base_level"] + (m["local_levels"] if m["attractor_radius"] > 0 else 0)
    return float(np.min(ext)) / 2 ** levels


def _epsilon(cfg):
    eps = cfg["forcing"]["epsilon"]
    return 2.0 * _base_h(cfg) if eps == "2h" else float(eps)


def make_vessels(cfg, stream_index=0):
    """Vessels for realization ``stream_index``: a list of
    :class:`PointVessel2D` (2D) or a :class:`VesselNetwork` (3D)."""
    spec = cfg["vessels"]
    dim = cfg["dim"]
    if isinstance(spec, list):
        if dim == 2:
            return [PointVessel2D(tuple(v["center"]), v["radius"], v["pressure"]) for v in spec]
        return VesselNetwork([VesselSegment3D(v["points"], v["radii"], v["pressures"])
                              for v in spec])
    kind = spec["kind"]
    seed = spec.get("seed", cfg["run"]["master_seed"])
    rng = RngStream(seed, stream_index)
    origin, extent = _domain(cfg)
    eps = _epsilon(cfg)
    p = spec.get("pressure", 1.0)
    if kind == "y_junction":
        if dim != 3:
            raise ConfigError("y_junction needs dim 3")
        return y_junction(diameter=spec.get("diameter", 0.1), pressure=p)
    if kind == "tree":
        if dim != 3:
            raise ConfigError("tree vessels need dim 3")
        tc = TreeConfig(spec.get("n", 100), spec.get("root", "LL"),
                        spec.get("balancing_factor", 0.5), spec.get("target_beta", 0.05),
                        (tuple(origin), tuple(extent)), seed, spec.get("margin", eps), p)
        return build_tree(tc, rng)
    n = spec.get("n", 1)
    beta = spec.get("target_beta", 0.05)
    if kind == "random":
        if dim != 2:
            raise ConfigError("random point vessels need dim 2")
        r = spec.get("radius") or radius_for_beta(n, np.prod(extent), beta)
        return sample_point_vessels((origin, extent), n, r, spec.get("margin", r + eps), rng, p)
    if dim != 3:
        raise ConfigError("aligned vessels need dim 3")
    end = spec.get("end_margin", eps)
    length = extent[2] - 2.0 * end
    r = spec.get("radius") or radius_for_beta(n * length, np.prod(extent), beta)
    return sample_aligned_vessels((origin, extent), n, r, spec.get("margin", r + eps), rng,
                                  p, end_margin=end)


def make_mesh(cfg, vessels=None):
    m = cfg["mesh"]
    origin, extent = _domain(cfg)
    pts, lines = (), ()
    if m["local_levels"] and m["attractor_radius"] > 0 and vessels is not None:
        if isinstance(vessels, VesselNetwork):
            lines = tuple(s.points for s in vessels.segments)
        else:
            pts = tuple(tuple(v.center) for v in vessels)
    spec = RefinementSpec(m["base_level"], m["local_levels"], attractor_points=pts,
                          attractor_polylines=lines, attractor_radius=m["attractor_radius"])
    return build_grid(cfg["dim"], origin, extent, spec)


def _single_axisym(cfg, vessels, R):
    if len(vessels) != 1:
        raise ConfigError("the exact boundary field needs exactly one 2D vessel")
    v = vessels[0]
    c = np.asarray(v.center, dtype=float)
    ac = AxisymConfig(R, v.radius, v.pressure, material_of(cfg))
    return ac, c


def boundary_of(cfg, vessels=None, R=1.0):
    dim = cfg["dim"]
    bcs = cfg["bcs"]
    faces = {}
    for f in range(2 * dim):
        kind = bcs.get(str(f), "clamped")
        if kind == "clamped":
            faces[f] = ClampedZero()
        elif kind == "free":
            faces[f] = TractionFree()
        else:
            ac, c = _single_axisym(cfg, vessels, R)
            faces[f] = DirichletField(lambda x, ac=ac, c=c: exact_axisym(ac, x - c))
    return BoundarySpec(faces, pure_neumann=bcs.get("pure_neumann", False))


def _homog_beta(cfg):
    h = cfg.get("homog", {})
    if "beta" not in h:
        raise ConfigError("homogenized forcing needs homog.beta")
    return h["beta"], h.get("pressure", 1.0)


def solve_config(cfg, vessels, mesh=None, stiffness=None, boundary=None):
    """Assemble and solve one problem; returns ``(mesh, field)``."""
    mesh = make_mesh(cfg, vessels) if mesh is None else mesh
    mat = material_of(cfg)
    fs = forcing_of(cfg)
    K = assemble_stiffness(mesh, mat) if stiffness is None else stiffness
    beta = p = None
    if fs.variant == "Homogenized":
        beta, p = _homog_beta(cfg)
    b = assemble_rhs(mesh, mat, vessels, fs, beta=beta, pressure=p)
    boundary = boundary_of(cfg, vessels) if boundary is None else boundary
    system = apply_bc(K.with_rhs(b), boundary)
    return mesh, solve(system)


def wall_forces(field, material):
    """Per face: force exerted by the tissue on the boundary (minus the
    resultant of ``sigma n``), split into normal and tangential parts."""
    d = field.mesh.dim
    out = []
    for f in range(2 * d):
        F = -face_force(field, material, f)
        n = face_normal(d, f)
        tang = [F[a] for a in range(d) if a != f // 2]
        tang += [0.0] * (2 - len(tang))
        out.append((float(F @ n), *map(float, tang)))
    return out


# -- runners ------------------------------------------------------------------

def run_converge(cfg):
    """Errors of a single centred vessel against the exact axisymmetric field.

    Rows ``(level, dofs, h, l2_error, h1_error, l2_rate, h1_rate)``; rates
    compare consecutive rows, ``log2(e_prev / e)`` (empty on the first row).
    """
    cfg = _require(cfg, "converge", dim=2)
    conv = cfg.get("converge", {})
    levels = conv.get("levels", [4, 5, 6])
    R = conv.get("R", 1.0)
    mask = conv.get("mask_radius", 0.2)
    vessels = make_vessels(cfg)
    ac, c = _single_axisym(cfg, vessels, R)
    boundary = boundary_of(cfg, vessels, R)
    if conv.get("jump", "thin") == "exact":
        # scale the source so it carries the finite-R jump of the oracle
        mat = material_of(cfg)
        scale = jump_ga(ac) / (mat.jump_factor * ac.p) if ac.p else 1.0
        vessels = [PointVessel2D(v.center, v.radius, v.pressure * scale) for v in vessels]
    table = CsvTable(["level", "dofs", "h", "l2_error", "h1_error", "l2_rate", "h1_rate"])
    prev = None
    field = None
    for lev in levels:
        lcfg = _merge(cfg, {"mesh": {"base_level": lev}})
        mesh, field = solve_config(lcfg, vessels, boundary=boundary)
        err = error_norms(field, lambda x: extended_axisym(ac, x - c), mask, [c])
        rates = ["", ""] if prev is None else [_rate(prev[0], err[0]), _rate(prev[1], err[1])]
        table.append([lev, mesh.n_nodes * mesh.dim, mesh.h_min, err[0], err[1], *rates])
        prev = err
    return table, field


def _rate(e0, e1):
    if e0 == e1:
        return 0.0
    if e0 == 0 or e1 == 0:
        return float("nan")
    return float(np.log2(e0 / e1))


def run_solve(cfg):
    """Single solve; rows ``(face, f_normal, f_t1, f_t2, u_x, u_y, u_z)``
    with the wall force split as in :func:`wall_forces` and the face-averaged
    displacement."""
    cfg = _require(cfg, "solve")
    vessels = make_vessels(cfg)
    mesh, field = solve_config(cfg, vessels)
    mat = material_of(cfg)
    table = CsvTable(["face", "f_normal", "f_t1", "f_t2", "u_x", "u_y", "u_z"])
    for f, forces in enumerate(wall_forces(field, mat)):
        u = list(face_average(field, f)) + [0.0] * (3 - mesh.dim)
        table.append([f, *forces, *u])
    return table, field


# per-process cache so that workers assemble the stiffness once
_WORKER = {}


def _stats_setup(cfg):
    key = json.dumps(cfg, sort_keys=True)
    if _WORKER.get("key") != key:
        mesh = make_mesh(cfg) if cfg["mesh"]["local_levels"] == 0 else None
        K = assemble_stiffness(mesh, material_of(cfg)) if mesh is not None else None
        _WORKER.update(key=key, mesh=mesh, K=K)
    return _WORKER["mesh"], _WORKER["K"]


def _stats_one(args):
    cfg, r = args
    mesh, K = _stats_setup(cfg)
    vessels = make_vessels(cfg, r)
    mesh, field = solve_config(cfg, vessels, mesh, K)
    return wall_forces(field, material_of(cfg)), _volume_fraction(vessels, mesh.volume)


def _volume_fraction(vessels, volume):
    if isinstance(vessels, VesselNetwork):
        return float(np.trace(beta_tensor(vessels, volume)) / 2.0)
    return float(sum(np.pi * v.radius ** 2 for v in vessels) / volume)


def map_realizations(fn, cfg, n):
    """Run ``fn((cfg, r))`` for ``r = 0..n-1`` in order, on
    ``cfg['run']['threads']`` processes."""
    threads = cfg["run"]["threads"]
    jobs = [(cfg, r) for r in range(n)]
    if threads <= 1 or n <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, jobs))


def run_stats(cfg):
    """Monte-Carlo face forces over random vessel realizations.

    Per realization and face one ``face`` row; then ``mean``, ``std``
    (unbiased) and ``stderr`` rows per face and pooled over faces
    (``face = all``), and a ``prediction`` row with the homogenized traction
    times the face area for the mean realized volume fraction.
    """
    cfg = _require(cfg, "stats")
    n = cfg["run"]["realizations"]
    results = map_realizations(_stats_one, cfg, n)
    d = cfg["dim"]
    table = CsvTable(["row", "realization", "face", "f_normal", "f_t1", "f_t2"])
    F = np.array([forces for forces, _ in results])              # (n, faces, 3)
    for r in range(n):
        for f in range(2 * d):
            table.append(["face", r, f, *F[r, f]])
    groups = [(str(f), F[:, f]) for f in range(2 * d)] + [("all", F.reshape(-1, 3))]
    for name, reducer in (("mean", lambda x: x.mean(0)),
                          ("std", lambda x: x.std(0, ddof=1) if len(x) > 1 else 0 * x[0]),
                          ("stderr", lambda x: x.std(0, ddof=1) / np.sqrt(len(x)) if len(x) > 1 else 0 * x[0])):
        for face, X in groups:
            table.append([name, -1, face, *reducer(X)])
    beta = float(np.mean([b for _, b in results]))
    _, ext = _domain(cfg)
    area = float(np.prod(ext) / ext[0])
    p = _pressure_of(cfg)
    _, traction = homog_2d(material_of(cfg), beta, p)
    table.append(["prediction", -1, "all", traction * area, 0.0, 0.0])
    return table, None


def _pressure_of(cfg):
    spec = cfg["vessels"]
    if isinstance(spec, dict):
        return spec.get("pressure", 1.0)
    if spec:
        v = spec[0]
        return v["pressure"] if "pressure" in v else np.mean(np.atleast_1d(v["pressures"]))
    return 0.0


def run_tree(cfg):
    """Vessel tree statistics and the pressure-induced traction matrix.

    The network is a generated tree or an inline list of segments.  Rows
    ``(quantity, i, j, value)``: ``total_length``, ``radius``,
    ``eigenvalue`` (rescaled, ascending), ``eigenvector`` (component ``j`` of
    vector ``i``) and ``M`` with ``M_ij = F_{i+} . e_j - F_{i-} . e_j``, where
    ``F`` is the resultant of ``sigma n`` over a face.
    """
    cfg = _require(cfg, "tree", dim=3)
    if isinstance(cfg["vessels"], dict) and cfg["vessels"]["kind"] != "tree":
        raise ConfigError("tree experiment needs vessels.kind = 'tree' or an inline network")
    net = make_vessels(cfg)
    if not net.segments:
        raise ConfigError("tree experiment needs at least one vessel")
    mesh, field = solve_config(cfg, net)
    mat = material_of(cfg)
    F = np.array([face_force(field, mat, f) for f in range(6)])
    M = F[1::2] - F[0::2]
    dt = principal_directions(net)
    table = CsvTable(["quantity", "i", "j", "value"])
    table.append(["total_length", -1, -1, net.total_length])
    radius = net.meta.get("radius", np.sqrt(mean_cross_section(net) / np.pi))
    table.append(["radius", -1, -1, radius])
    for i in range(3):
        table.append(["eigenvalue", i, -1, dt.eigenvalues[i]])
    for i in range(3):
        for j in range(3):
            table.append(["eigenvector", i, j, dt.eigenvectors[j, i]])
    for i in range(3):
        for j in range(3):
            table.append(["M", i, j, M[i, j]])
    return table, field, net


def run_homog(cfg):
    """Homogenized predictions: 2D ``(c, traction)``; 3D aligned ``(M, sigma)``."""
    cfg = _require(cfg, "homog")
    h = cfg.get("homog", {})
    beta, p = h.get("beta", 0.05), h.get("pressure", 1.0)
    mat = material_of(cfg)
    table = CsvTable(["quantity", "i", "j", "value"])
    if cfg["dim"] == 2:
        c, t = homog_2d(mat, beta, p)
        table.append(["c", -1, -1, c])
        table.append(["traction", -1, -1, t])
        return table, None
    tau = np.asarray(h.get("tau", [0.0, 0.0, 1.0]), dtype=float)
    M, sigma = homog_3d_aligned(mat, beta, p, tau / np.linalg.norm(tau))
    for name, A in (("M", M), ("sigma", sigma)):
        for i in range(3):
            for j in range(3):
                table.append([name, i, j, A[i, j]])
    return table, None


def _require(cfg, experiment, dim=None):
    cfg = load_config(cfg) if not isinstance(cfg, dict) or "run" not in cfg else cfg
    if cfg["experiment"] != experiment:
        raise ConfigError(f"config is for '{cfg['experiment']}', not '{experiment}'")
    if dim is not None and cfg["dim"] != dim:
        raise ConfigError(f"{experiment} needs dim {dim}")
    return cfg


RUNNERS = {"converge": run_converge, "solve": run_solve, "stats": run_stats,
           "tree": run_tree, "homog": run_homog}


def run_experiment(cfg, out_dir=None):
    """Run ``cfg`` and write ``<experiment>.csv`` (plus VTK / network files)
    into ``out_dir`` (default ``cfg['output']['dir']``).  Returns the paths."""
    out_dir = cfg["output"]["dir"] if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    name = cfg["experiment"]
    res = RUNNERS[name](cfg)
    table, fld = res[0], res[1]
    paths = [os.path.join(out_dir, f"{name}.csv")]
    write_csv(table, paths[0])
    if name == "tree":
        paths.append(os.path.join(out_dir, "tree.txt"))
        with open(paths[-1], "w") as fh:
            fh.write(format_network(res[2]))
    if cfg["output"]["vtk"] and isinstance(fld, Field):
        paths.append(os.path.join(out_dir, f"{name}.vtk"))
        write_vtk(fld.mesh, fld, paths[-1])
    return paths
