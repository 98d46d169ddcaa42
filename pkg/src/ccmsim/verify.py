"""Analytical references and convergence harnesses.

Two self-contained benchmark problems exercise the solver stack end to end:

* a unit square, initially at temperature 1, whose right edge is clamped
  to 0 (left/top/bottom insulated) — the recovered right-edge flux is
  compared against the exact separation-of-variables series;
* a unit square carrying the stationary field T = x while an interior
  vertical band of the mesh slides downward through a recycling window —
  any error is purely a mesh-update artifact, and its decay under
  refinement measures the quality of the sliding-mesh machinery.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import meshgen, motion
from .cbf import recover_flux, series_flux_reference
from .errors import NumericalError
from .stfem import SlabProblem, solve_slab

__all__ = [
    "ErrorTable",
    "convergence_rate",
    "l2_error",
    "meshupdate_convergence",
    "run_cbf_case",
    "run_meshupdate_case",
    "series_temperature",
]

# degree-2 triangle quadrature (exact for quadratics)
_QP = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
_QW = np.array([1 / 3, 1 / 3, 1 / 3])  # fractions of the element area


@dataclass
class ErrorTable:
    """Rows of (h, dt, error, runtime-seconds) under a named error norm."""

    norm_kind: str  # L2_spatial_at_t | max_over_time_L2 | relative_scalar
    h: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    error: list = field(default_factory=list)
    runtime: list = field(default_factory=list)

    def add_row(self, h: float, dt: float, error: float, runtime: float) -> None:
        if not (math.isfinite(error) and error >= 0.0):
            raise ValueError(f"error norm must be finite and >= 0, got {error!r}")
        self.h.append(float(h))
        self.dt.append(float(dt))
        self.error.append(float(error))
        self.runtime.append(float(runtime))

    def validate(self) -> None:
        if any(self.h[i] < self.h[i + 1] for i in range(len(self.h) - 1)):
            raise ValueError("error table rows must be sorted by h descending")
        if any(not (math.isfinite(e) and e >= 0.0) for e in self.error):
            raise ValueError("error norms must be finite and >= 0")

    def to_csv(self, path) -> None:
        self.validate()
        with open(path, "w", encoding="utf-8") as f:
            f.write("h,dt,error,runtime\n")
            for h, dt, e, r in zip(self.h, self.dt, self.error, self.runtime):
                f.write(f"{h:.17g},{dt:.17g},{e:.17g},{r:.17g}\n")


def series_temperature(x: float, t: float, truncation: float = 1e-14, min_terms: int = 3) -> float:
    """Exact temperature of the unit-slab cooling problem.

    T_hat(x, t) = 2 sum_n (-1)^(n-1) cos(lam_n x) / lam_n * exp(-lam_n^2 t)
    with lam_n = (2n-1) pi / 2: initial value 1, insulated left end,
    right end clamped to 0, unit diffusivity.  Terms are added until one
    drops below ``truncation`` in magnitude (floor of ``min_terms``).
    """
    if t <= 0.0:
        raise ValueError("series temperature requires t > 0")
    if not (0.0 <= x <= 1.0):
        raise ValueError("series temperature requires 0 <= x <= 1")
    total = 0.0
    n = 1
    while True:
        lam = (2 * n - 1) * math.pi / 2.0
        amp = math.exp(-lam * lam * t) / lam
        total += (1.0 if n % 2 == 1 else -1.0) * math.cos(lam * x) * amp
        if n >= min_terms and amp < truncation:
            break
        if n > 200000:  # pragma: no cover
            raise NumericalError("temperature series failed to converge")
        n += 1
    return 2.0 * total


def l2_error(coords: np.ndarray, conn: np.ndarray, field_values: np.ndarray,
             exact, relative: bool = False) -> float:
    """L2 norm of (nodal field - exact) over the given triangles.

    ``exact`` maps an (k, 2) coordinate array to exact values.  A degree-2
    quadrature rule integrates the squared difference element-wise; the
    relative variant divides by the norm of the exact field.
    """
    conn = np.asarray(conn, dtype=np.int64).reshape(-1, 3)
    if conn.size == 0:
        return 0.0
    p = coords[conn]                                   # (ne, 3, 2)
    area = 0.5 * np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    fv = field_values[conn]                            # (ne, 3)
    acc = 0.0
    ref = 0.0
    for (xi, eta), wq in zip(_QP, _QW):
        nsh = np.array([1.0 - xi - eta, xi, eta])
        xq = np.einsum("a,eai->ei", nsh, p)
        fq = fv @ nsh
        eq = np.asarray(exact(xq), dtype=float)
        acc += wq * np.sum(area * (fq - eq) ** 2)
        ref += wq * np.sum(area * eq**2)
    if relative:
        return math.sqrt(acc) / math.sqrt(ref)
    return math.sqrt(acc)


def run_cbf_case(h: float = 0.02, dt: float = 0.05, n_steps: int = 20,
                 averaging: str = "node_mean") -> ErrorTable:
    """Flux-recovery benchmark on the unit square.

    Initial temperature 1 everywhere; the right edge is clamped to 0 and
    the remaining edges are insulated (natural).  Each step solves one
    slab on the static structured mesh of cell size ``h`` and recovers
    the right-edge flux; the row for step i holds the relative error of
    the recovered (slab-averaged) flux against the exact series evaluated
    at the slab midpoint t = (i + 1/2) dt.
    """
    n = round(1.0 / h)
    if abs(n * h - 1.0) > 1e-12:
        raise ValueError("grid size h must divide the unit square evenly")
    mesh = meshgen.make_unit_square(n)
    coords = mesh.nodes
    x = coords[:, 0]
    dir_nodes = np.where(np.isclose(x, 1.0))[0]
    dir_vals = np.zeros(len(dir_nodes))
    edges = mesh.tagged_edges("right")
    t_prev = np.ones(len(coords))

    table = ErrorTable(norm_kind="relative_scalar")
    for i in range(n_steps):
        tic = time.perf_counter()
        prob = SlabProblem(coords, coords, mesh.triangles, dt=dt, alpha=1.0,
                           t_prev=t_prev, dirichlet_nodes=dir_nodes,
                           dirichlet_values=dir_vals)
        from .stfem import SlabOperator

        op = SlabOperator(prob)
        sol = op.solve()
        t_mid = (i + 0.5) * dt
        fr = recover_flux(op, sol, edges, rho_cp=1.0, timestamp=t_mid,
                          averaging=averaging)
        q_ref = series_flux_reference(t_mid)
        err = abs(fr.q_s_avg - q_ref) / q_ref
        table.add_row(h, dt, err, time.perf_counter() - tic)
        t_prev = sol.t_top
    return table


def run_meshupdate_case(h: float, velocity: float = 0.005, dt: float = 1.0,
                        n_steps: int = 20, n_virt: int = 2) -> float:
    """Sliding-band benchmark: stationary field T = x under mesh motion.

    A vertical band of the unit-square mesh (0.3 < x < 0.7) slides
    downward with the given velocity through a recycling window while the
    temperature field T = x (imposed by Dirichlet values 0 and 1 on the
    left and right edges) should remain unchanged.  Returns the largest
    L2 error over all steps, computed on the active elements.
    """
    n = round(1.0 / h)
    if abs(n * h - 1.0) > 1e-12:
        raise ValueError("grid size h must divide the unit square evenly")
    mesh = meshgen.make_strip_square(n, n_virt=n_virt)
    state = motion.init_motion(mesh, (0.0, -1.0))

    def exact(xy: np.ndarray) -> np.ndarray:
        return xy[:, 0]

    coords0 = mesh.nodes
    T = coords0[:, 0].copy()
    left = np.unique(mesh.tagged_edges("left"))
    right = np.unique(mesh.tagged_edges("right"))
    dir_nodes = np.concatenate([left, right])
    dir_vals = np.concatenate([np.zeros(len(left)), np.ones(len(right))])

    max_err = 0.0
    for _ in range(n_steps):
        coords_old = mesh.nodes.copy()
        act_old = motion.active_elements(mesh, state)
        res = motion.advance(mesh, state, velocity * dt)
        act_new = motion.active_elements(mesh, state)
        act = act_old & act_new
        if res.wrapped_nodes.size:
            touched = np.isin(mesh.triangles, res.wrapped_nodes).any(axis=1)
            act &= ~touched
        prob = SlabProblem(coords_old, mesh.nodes, mesh.triangles[act], dt=dt,
                           alpha=1.0, t_prev=T, dirichlet_nodes=dir_nodes,
                           dirichlet_values=dir_vals)
        sol = solve_slab(prob)
        T = sol.t_top.copy()
        # nodes outside the new active domain carry the undisturbed field
        outside = np.setdiff1d(np.arange(len(T)), np.unique(mesh.triangles[act_new]))
        T[outside] = mesh.nodes[outside, 0]
        err = l2_error(mesh.nodes, mesh.triangles[act_new], T, exact)
        max_err = max(max_err, err)
    return max_err


def meshupdate_convergence(hs=(0.2, 0.1, 0.05, 0.025), velocity: float = 0.005,
                           dt: float = 1.0, n_steps: int = 20) -> ErrorTable:
    """Run the sliding-band benchmark over a family of grid sizes."""
    table = ErrorTable(norm_kind="max_over_time_L2")
    for h in sorted(hs, reverse=True):
        tic = time.perf_counter()
        err = run_meshupdate_case(h, velocity=velocity, dt=dt, n_steps=n_steps)
        table.add_row(h, dt, err, time.perf_counter() - tic)
    return table


def convergence_rate(table: ErrorTable) -> float:
    """Least-squares slope of log(error) against log(h)."""
    h = np.asarray(table.h, dtype=float)
    e = np.asarray(table.error, dtype=float)
    if len(h) < 2 or len(np.unique(h)) < 2:
        raise ValueError("convergence rate needs at least two rows with distinct h")
    if np.any(e <= 0.0):
        raise ValueError("convergence rate needs strictly positive errors")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])
