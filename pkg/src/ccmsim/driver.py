"""Scale-coupled melting-probe simulation driver.

Each time step runs three stages: (A) solve one space-time slab for the
solid temperature with the melt interface held at the melting point,
(B) recover the solid-side heat flux at the tip and evaluate the melt
closure for the approach velocity U, and (C) slide the mesh band by
U*dt.  The velocity computed from a slab deforms the *next* slab
(explicit one-step lag), so a transient run starts from U = 0 and an
equilibrium run applies the closed-form velocity from the first step on.

Configuration is a flat INI file; every section and key is validated
against the schema documented in the README (unknown keys are errors).
Outputs: a per-step CSV, an optional sensor-trace CSV, and periodic VTK
snapshots of the deformed mesh with an element activity mask.
"""

from __future__ import annotations

import configparser
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import motion
from . import velocity as vel
from .cbf import recover_flux
from .errors import ConfigError, NumericalError
from .mesh import Mesh, PointLocator, load_mesh
from .stfem import SlabOperator, SlabProblem

__all__ = [
    "RunConfig",
    "RunReport",
    "StepRecord",
    "load_config",
    "run",
    "sample_sensors",
    "write_vtk",
]

log = logging.getLogger(__name__)

_SCHEMA = {
    "material.solid": {"rho", "cp", "kappa", "T_s"},
    "material.liquid": {"rho", "cp", "kappa", "mu"},
    "melting": {"h_m", "T_m"},
    "source": {"mode", "coupling", "T_w", "q_h", "F_ex", "mass", "gravity",
               "R", "tip_tags", "side_tags", "tip_area"},
    "time": {"dt", "n_steps"},
    "mesh": {"path", "direction", "h_row", "farfield_tags"},
    "numerics": {"solver_tol", "secant_tol", "flux_averaging"},
    "output": {"directory", "vtk_every", "csv", "sensors"},
}
_REQUIRED_SECTIONS = ["material.solid", "material.liquid", "melting", "source",
                      "time", "mesh", "output"]


@dataclass
class RunConfig:
    """Validated, fully-resolved configuration of one simulation run."""

    # solid
    rho_s: float
    cp_s: float
    kappa_s: float
    T_s: float
    # liquid
    rho_l: float
    cp_l: float
    kappa_l: float
    mu_l: float
    # melting
    h_m: float
    T_m: float
    # source
    mode: str                   # temperature | power
    coupling: str               # equilibrium | transient
    T_w: float | None
    q_h: float | None
    F_ex: float
    R: float
    tip_tags: tuple
    side_tags: tuple
    tip_area: float | None      # m^2 per unit depth; used to convert bulk watts
    # time
    dt: float
    n_steps: int
    # mesh
    mesh_path: str
    direction: tuple | None
    h_row_override: float | None
    farfield_tags: tuple | None  # None = every tag not in tip/side
    # numerics
    solver_tol: float = 1e-10
    secant_tol: float = 1e-12
    flux_averaging: str = "node_mean"
    # output
    out_dir: str = "out"
    vtk_every: int = 10
    csv_name: str = "run.csv"
    sensors: tuple = ()

    @property
    def ccm_params(self) -> vel.CcmParams:
        return vel.CcmParams(rho_s=self.rho_s, cp_s=self.cp_s, rho_l=self.rho_l,
                             cp_l=self.cp_l, kappa_l=self.kappa_l, mu_l=self.mu_l,
                             h_m=self.h_m, T_m=self.T_m, T_s=self.T_s, R=self.R,
                             F_ex=self.F_ex)

    @property
    def alpha_s(self) -> float:
        return self.kappa_s / (self.rho_s * self.cp_s)


@dataclass
class StepRecord:
    t: float
    U: float
    displacement: float
    q_s_avg: float
    slip_count: int
    clamped: bool
    stalled: bool
    iterations: int


@dataclass
class RunSummary:
    final_displacement: float
    mean_velocity_last_10pct: float


@dataclass
class RunReport:
    records: list
    sensor_times: np.ndarray
    sensor_values: np.ndarray       # (n_steps, n_sensors), NaN = gap
    summary: RunSummary
    warnings: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# configuration


def _cfg_float(cp, section, key, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            raise ConfigError(f"[{section}] {key}: required key missing")
        return default
    raw = cp.get(section, key)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from exc


def _cfg_int(cp, section, key, default=None, required=False):
    value = _cfg_float(cp, section, key, default=default, required=required)
    if value is None:
        return None
    if value != int(value):
        raise ConfigError(f"[{section}] {key}: not an integer: {value!r}")
    return int(value)


def _cfg_tags(cp, section, key, default=None):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    if not raw:
        return ()
    return tuple(t.strip() for t in raw.split(",") if t.strip())


def _parse_sensors(raw: str):
    sensors = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p for p in chunk.replace(",", " ").split() if p]
        if len(parts) != 2:
            raise ConfigError(f"[output] sensors: expected 'x,y; x,y; ...', got {chunk!r}")
        try:
            sensors.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"[output] sensors: not a coordinate pair: {chunk!r}") from exc
    return tuple(sensors)


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration, resolving all defaults."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (T_w vs t_w)
    try:
        with open(path, encoding="utf-8") as f:
            cp.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"[{section}]: unknown section")
        for key in cp.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"[{section}] {key}: unknown key")
    for section in _REQUIRED_SECTIONS:
        if not cp.has_section(section):
            raise ConfigError(f"[{section}]: required section missing")

    mode = cp.get("source", "mode", fallback=None)
    if mode not in ("temperature", "power"):
        raise ConfigError("[source] mode: must be 'temperature' or 'power'")
    coupling = cp.get("source", "coupling", fallback=None)
    if coupling not in ("equilibrium", "transient"):
        raise ConfigError("[source] coupling: must be 'equilibrium' or 'transient'")

    T_w = _cfg_float(cp, "source", "T_w")
    q_h = _cfg_float(cp, "source", "q_h")
    if T_w is not None and q_h is not None:
        raise ConfigError("[source] T_w, q_h: exactly one of the two may be set")
    if mode == "temperature" and T_w is None:
        raise ConfigError("[source] T_w: required in temperature mode")
    if mode == "power" and q_h is None:
        raise ConfigError("[source] q_h: required in power mode")

    F_ex = _cfg_float(cp, "source", "F_ex")
    mass = _cfg_float(cp, "source", "mass")
    gravity = _cfg_float(cp, "source", "gravity")
    if F_ex is not None and (mass is not None or gravity is not None):
        raise ConfigError("[source] F_ex, mass/gravity: set either F_ex or the pair, not both")
    if F_ex is None:
        if mass is None or gravity is None:
            raise ConfigError("[source] F_ex: set F_ex, or both mass and gravity")
        F_ex = vel.external_force(mass, gravity)

    tip_tags = _cfg_tags(cp, "source", "tip_tags")
    if not tip_tags:
        raise ConfigError("[source] tip_tags: required key missing")
    side_tags = _cfg_tags(cp, "source", "side_tags", default=())

    dt = _cfg_float(cp, "time", "dt", required=True)
    n_steps = _cfg_int(cp, "time", "n_steps", required=True)
    if not (dt > 0.0 and n_steps > 0):
        raise ConfigError("[time] dt, n_steps: dt * n_steps must be positive")

    mesh_path = cp.get("mesh", "path", fallback=None)
    if not mesh_path:
        raise ConfigError("[mesh] path: required key missing")
    if not os.path.isabs(mesh_path):
        # relative mesh paths are anchored at the config file, not the CWD,
        # so bundled fixture configs work from anywhere
        mesh_path = os.path.normpath(
            os.path.join(os.path.dirname(os.path.abspath(path)), mesh_path))
    direction = None
    if cp.has_option("mesh", "direction"):
        parts = [p for p in cp.get("mesh", "direction").replace(",", " ").split() if p]
        if len(parts) != 2:
            raise ConfigError("[mesh] direction: expected two components, e.g. '0,-1'")
        try:
            direction = (float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise ConfigError("[mesh] direction: not numeric") from exc
    farfield = _cfg_tags(cp, "mesh", "farfield_tags", default=None)

    averaging = cp.get("numerics", "flux_averaging", fallback="node_mean")
    if averaging not in ("node_mean", "length_weighted"):
        raise ConfigError("[numerics] flux_averaging: must be 'node_mean' or 'length_weighted'")
    vtk_every = _cfg_int(cp, "output", "vtk_every", default=10)
    if vtk_every < 0:
        raise ConfigError("[output] vtk_every: must be >= 0 (0 disables snapshots)")
    out_dir = cp.get("output", "directory", fallback=None)
    if not out_dir:
        raise ConfigError("[output] directory: required key missing")
    sensors = _parse_sensors(cp.get("output", "sensors", fallback=""))

    cfg = RunConfig(
        rho_s=_cfg_float(cp, "material.solid", "rho", required=True),
        cp_s=_cfg_float(cp, "material.solid", "cp", required=True),
        kappa_s=_cfg_float(cp, "material.solid", "kappa", required=True),
        T_s=_cfg_float(cp, "material.solid", "T_s", required=True),
        rho_l=_cfg_float(cp, "material.liquid", "rho", required=True),
        cp_l=_cfg_float(cp, "material.liquid", "cp", required=True),
        kappa_l=_cfg_float(cp, "material.liquid", "kappa", required=True),
        mu_l=_cfg_float(cp, "material.liquid", "mu", required=True),
        h_m=_cfg_float(cp, "melting", "h_m", required=True),
        T_m=_cfg_float(cp, "melting", "T_m", required=True),
        mode=mode, coupling=coupling, T_w=T_w, q_h=q_h, F_ex=F_ex,
        R=_cfg_float(cp, "source", "R", required=True),
        tip_tags=tip_tags, side_tags=side_tags,
        tip_area=_cfg_float(cp, "source", "tip_area"),
        dt=dt, n_steps=n_steps,
        mesh_path=mesh_path, direction=direction,
        h_row_override=_cfg_float(cp, "mesh", "h_row"),
        farfield_tags=farfield,
        solver_tol=_cfg_float(cp, "numerics", "solver_tol", default=1e-10),
        secant_tol=_cfg_float(cp, "numerics", "secant_tol", default=1e-12),
        flux_averaging=averaging,
        out_dir=out_dir, vtk_every=vtk_every,
        csv_name=cp.get("output", "csv", fallback="run.csv"),
        sensors=sensors,
    )
    if cfg.tip_area is not None and not cfg.tip_area > 0.0:
        raise ConfigError("[source] tip_area: must be positive")
    try:
        cfg.ccm_params  # triggers physical-parameter validation
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for name, value in vars(cfg).items():
        log.info("config %s = %r", name, value)
    return cfg


# ---------------------------------------------------------------------------
# outputs


def write_vtk(path, coords, conn, temperature, active_mask) -> None:
    """Legacy-ASCII VTK snapshot: points, triangles, nodal temperature,
    per-cell activity flag."""
    n = len(coords)
    m = len(conn)
    with open(path, "w", encoding="utf-8") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write("ccmsim snapshot\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {n} double\n")
        for x, y in coords:
            f.write(f"{x:.17g} {y:.17g} 0\n")
        f.write(f"CELLS {m} {4 * m}\n")
        for a, b, c in conn:
            f.write(f"3 {a} {b} {c}\n")
        f.write(f"CELL_TYPES {m}\n")
        for _ in range(m):
            f.write("5\n")
        f.write(f"POINT_DATA {n}\n")
        f.write("SCALARS temperature double\nLOOKUP_TABLE default\n")
        for v in temperature:
            f.write(f"{v:.17g}\n")
        f.write(f"CELL_DATA {m}\n")
        f.write("SCALARS active int\nLOOKUP_TABLE default\n")
        for a in active_mask:
            f.write(f"{int(a)}\n")


def sample_sensors(mesh: Mesh, state, T: np.ndarray, sensors) -> np.ndarray:
    """Interpolate T at fixed spatial points over the active elements.

    Points outside the active domain (inside the source hole, or in the
    deactivated part of the band) yield NaN — a data gap, not an error.
    """
    if not sensors:
        return np.empty(0)
    active = motion.active_elements(mesh, state) if state is not None else None
    loc = PointLocator(mesh.nodes, mesh.triangles, active)
    out = np.full(len(sensors), np.nan)
    for k, pt in enumerate(sensors):
        hit = loc.locate(pt)
        if hit is not None:
            tri_id, bary = hit
            out[k] = float(np.dot(T[mesh.triangles[tri_id]], bary))
    return out


class _CsvWriter:
    def __init__(self, path, header):
        self._f = open(path, "w", encoding="utf-8")
        self._f.write(header + "\n")

    def row(self, values) -> None:
        cells = []
        for v in values:
            if v is None or (isinstance(v, float) and math.isnan(v)):
                cells.append("")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(f"{v:.17g}")
        self._f.write(",".join(cells) + "\n")
        self._f.flush()

    def close(self) -> None:
        self._f.close()


# ---------------------------------------------------------------------------
# main loop


def _equilibrium_velocity(cfg: RunConfig) -> float:
    p = cfg.ccm_params
    if cfg.mode == "temperature":
        return vel.u_eq_temperature(p, cfg.T_w)
    return vel.u_eq_power(p, cfg.q_h, tol=cfg.secant_tol)


def run(config: RunConfig) -> RunReport:
    """Execute the configured run and return the full report."""
    cfg = config
    mesh = load_mesh(cfg.mesh_path)
    if cfg.h_row_override is not None:
        if mesh.strip is None:
            raise ConfigError("[mesh] h_row: mesh has no sliding band to override")
        mesh.strip.h_row = cfg.h_row_override
    state = None
    if mesh.strip is not None:
        if cfg.direction is None:
            raise ConfigError("[mesh] direction: required for a mesh with a sliding band")
        state = motion.init_motion(mesh, cfg.direction)

    p = cfg.ccm_params
    rho_cp = cfg.rho_s * cfg.cp_s
    U_eq = _equilibrium_velocity(cfg)
    log.info("equilibrium velocity U_eq = %.6e m/s", U_eq)

    tip_edges = mesh.tagged_edges(cfg.tip_tags)
    if tip_edges.shape[0] == 0:
        raise ConfigError(f"[source] tip_tags: no boundary edges tagged {cfg.tip_tags!r}")
    source_tags = set(cfg.tip_tags) | set(cfg.side_tags)
    dir_nodes = np.unique(mesh.tagged_edges(tuple(source_tags)))
    dir_vals = np.full(len(dir_nodes), cfg.T_m)

    if cfg.farfield_tags is None:
        far_tags = tuple(sorted(set(mesh.boundary_tags) - source_tags))
    else:
        far_tags = cfg.farfield_tags
    far_nodes = np.unique(mesh.tagged_edges(far_tags)) if far_tags else np.empty(0, np.int64)

    os.makedirs(cfg.out_dir, exist_ok=True)
    run_csv = _CsvWriter(os.path.join(cfg.out_dir, cfg.csv_name),
                         "time,velocity,displacement,flux_avg,flux_min,"
                         "flux_max,slip_count")
    sensor_csv = None
    if cfg.sensors:
        head = "time," + ",".join(f"sensor_{k}" for k in range(len(cfg.sensors)))
        sensor_csv = _CsvWriter(os.path.join(cfg.out_dir, "sensors.csv"), head)

    T = np.full(len(mesh.nodes), cfg.T_s)
    U = U_eq if cfg.coupling == "equilibrium" else 0.0
    displacement = 0.0
    records: list[StepRecord] = []
    sensor_rows = []
    sensor_times = []
    warnings: list[str] = []
    all_nodes = np.arange(len(mesh.nodes))

    step = -1
    try:
        for step in range(cfg.n_steps):
            t_n = step * cfg.dt
            coords_old = mesh.nodes.copy()
            act_old = (motion.active_elements(mesh, state) if state is not None
                       else np.ones(len(mesh.triangles), dtype=bool))

            d = U * cfg.dt
            slips_total = 0
            if state is not None and d > 0.0:
                res = motion.advance(mesh, state, d)
                if res.wrapped_nodes.size:
                    T[res.wrapped_nodes] = cfg.T_s     # recycled rows are virgin solid
                slips_total = state.n_slips
                displacement = state.displacement
                act_new = motion.active_elements(mesh, state)
                act = act_old & act_new
                if res.wrapped_nodes.size:
                    act &= ~np.isin(mesh.triangles, res.wrapped_nodes).any(axis=1)
            else:
                displacement += d
                slips_total = state.n_slips if state is not None else 0
                act_new = act_old
                act = act_old

            prob = SlabProblem(coords_old, mesh.nodes, mesh.triangles[act],
                               dt=cfg.dt, alpha=cfg.alpha_s, t_prev=T,
                               dirichlet_nodes=dir_nodes, dirichlet_values=dir_vals)
            op = SlabOperator(prob, solver_tol=cfg.solver_tol)
            sol = op.solve()

            q_s = 0.0
            q_min = 0.0
            q_max = 0.0
            clamped = False
            stalled = False
            if cfg.coupling == "transient":
                fr = recover_flux(op, sol, tip_edges, rho_cp,
                                  timestamp=t_n + 0.5 * cfg.dt,
                                  averaging=cfg.flux_averaging)
                q_raw = -fr.q_s_avg       # positive when heat enters the solid
                into_solid = -fr.nodal_flux
                q_min = float(into_solid.min())
                q_max = float(into_solid.max())
                clamped = q_raw < 0.0
                q_s = max(q_raw, 0.0)
                if cfg.mode == "temperature":
                    U_next = vel.u_transient_temperature(p, cfg.T_w, q_s,
                                                         tol=cfg.secant_tol)
                else:
                    U_next, stalled = vel.u_transient_power(p, cfg.q_h, q_s,
                                                            tol=cfg.secant_tol)
            else:
                U_next = U_eq

            T = sol.t_top.copy()
            outside = np.setdiff1d(all_nodes, np.unique(mesh.triangles[act_new]),
                                   assume_unique=True)
            T[outside] = cfg.T_s

            if far_nodes.size and np.any(np.abs(T[far_nodes] - cfg.T_s) > 0.1):
                msg = (f"step {step}: far-field boundary temperature strayed more "
                       f"than 0.1 K from T_s = {cfg.T_s} K")
                if not warnings:
                    log.warning(msg)
                    warnings.append(msg)

            records.append(StepRecord(t=t_n, U=U, displacement=displacement,
                                      q_s_avg=q_s, slip_count=slips_total,
                                      clamped=clamped, stalled=stalled,
                                      iterations=1))
            run_csv.row([t_n, U, displacement, q_s, q_min, q_max, slips_total])

            if cfg.sensors:
                values = sample_sensors(mesh, state, T, cfg.sensors)
                sensor_rows.append(values)
                sensor_times.append(t_n + cfg.dt)
                sensor_csv.row([t_n + cfg.dt, *values])

            if cfg.vtk_every and (step + 1) % cfg.vtk_every == 0:
                write_vtk(os.path.join(cfg.out_dir, f"state_{step + 1:06d}.vtk"),
                          mesh.nodes, mesh.triangles, T, act_new)

            U = U_next
    except (NumericalError, ConfigError):
        log.error("run aborted at step %d; writing state dump", step)
        try:
            write_vtk(os.path.join(cfg.out_dir, "abort_state.vtk"), mesh.nodes,
                      mesh.triangles, T,
                      motion.active_elements(mesh, state) if state is not None
                      else np.ones(len(mesh.triangles), dtype=bool))
        except OSError:  # pragma: no cover - best effort
            pass
        raise
    finally:
        run_csv.close()
        if sensor_csv is not None:
            sensor_csv.close()

    tail = max(1, cfg.n_steps // 10)
    mean_u = float(np.mean([r.U for r in records[-tail:]]))
    summary = RunSummary(final_displacement=displacement,
                         mean_velocity_last_10pct=mean_u)
    report = RunReport(records=records,
                       sensor_times=np.array(sensor_times),
                       sensor_values=(np.array(sensor_rows)
                                      if sensor_rows else np.empty((0, 0))),
                       summary=summary, warnings=warnings)
    log.info("run complete: displacement %.6f m, mean U (last 10%%) %.6e m/s",
             displacement, mean_u)
    return report
