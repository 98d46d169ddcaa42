"""Rigid-strip mesh motion with row recycling and a shear zipper.

The moving part of a mesh is a structured strip of node rows that translate
rigidly along one axis.  The rows live on a ring: each strip node keeps a
constant *ring ordinate* (its as-generated coordinate along the motion
axis); the embedding into physical space shifts with the accumulated
displacement and wraps nodes that leave a one-row grace band past the
window's exit edge back around to the entry side.  Connectivity inside the
strip never changes — elements whose nodes straddle the wrap point (cyclic
span greater than half the ring circumference) are deactivated, as are
elements that have left the strip window.

The strip is stitched to each neighbouring static region by a fixed-width
zipper of shear triangles between a static boundary column and the strip's
edge column.  Whenever the accumulated offset reaches one row height the
zipper reconnects one notch (a *slip*): triangle ids and count stay fixed,
only their connectivity is rewritten, and every zipper triangle keeps the
constant area (seam gap x row height)/2 under arbitrary shear, so the
element quality of the coupling layer does not degrade over time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh, tri_areas

ROLE_CODE = {"static": 0, "strip": 1, "update": 2, "virtual": 3}


@dataclass
class Seam:
    static_nodes: np.ndarray   # ordered along the motion axis, n_phys+1 ids
    ring_nodes: np.ndarray     # all edge-column ids in ring order (n_lines,)
    tri_slots: np.ndarray      # 2*n_phys triangle ids, rewritten on slip
    flip: bool                 # winding choice that keeps areas positive


@dataclass
class MotionState:
    axis: int                  # 0 or 1: the coordinate that moves
    sign: int                  # +1 or -1: motion direction along that axis
    h_row: float
    w_lo: float                # strip window along the axis
    w_hi: float
    circumference: float       # n_lines * h_row
    n_lines: int
    n_phys: int                # window intervals
    ell0: int                  # ring index of the line at the window start
    grace: float               # exit overhang before a node wraps (= h_row)
    strip_nodes: np.ndarray    # all strip node ids
    c0: np.ndarray             # as-generated axis ordinate per strip node
    tri_code: np.ndarray       # role code per triangle (int8)
    seams: list[Seam] = field(default_factory=list)
    displacement: float = 0.0
    n_slips: int = 0

    @property
    def offset(self) -> float:
        """Displacement since the last slip, in [0, h_row)."""
        return self.displacement - self.n_slips * self.h_row


@dataclass
class AdvanceResult:
    slips: int
    wrapped_nodes: np.ndarray  # ids re-seeded on the entry side this advance


def zipper_triangles(static_nodes, ring_nodes, j0, flip):
    """Connectivity of one seam's zipper for ring shift ``j0``.

    Static interval k pairs with ring nodes j0+k and j0+k+1 (mod ring
    length); each interval carries two triangles.  Returns an
    (2*(len(static_nodes)-1), 3) int array.
    """
    static_nodes = np.asarray(static_nodes)
    ring_nodes = np.asarray(ring_nodes)
    L = len(ring_nodes)
    n_int = len(static_nodes) - 1
    k = np.arange(n_int)
    s0 = static_nodes[k]
    s1 = static_nodes[k + 1]
    m0 = ring_nodes[(j0 + k) % L]
    m1 = ring_nodes[(j0 + k + 1) % L]
    out = np.empty((2 * n_int, 3), dtype=np.int64)
    if flip:
        out[0::2] = np.column_stack([s0, m1, m0])
        out[1::2] = np.column_stack([s0, s1, m1])
    else:
        out[0::2] = np.column_stack([s0, m0, m1])
        out[1::2] = np.column_stack([s0, m1, s1])
    return out


def _embed(state: MotionState, c0: np.ndarray, displacement: float) -> np.ndarray:
    """Physical axis ordinates for ring ordinates ``c0`` at a displacement."""
    if state.sign < 0:
        base = state.w_lo - state.grace
        return base + np.mod(c0 - base - displacement, state.circumference)
    base = state.w_hi + state.grace
    return base - np.mod(base - c0 - displacement, state.circumference)


def init_motion(mesh: Mesh, direction) -> MotionState:
    """Build the motion state for a mesh in its as-generated position.

    ``direction`` is the axis-aligned unit vector of strip motion, e.g.
    (0, -1) for a strip that translates downward.  The mesh must contain a
    strip layout whose rows are listed in ring order (ascending along the
    axis) and at least two virtual row bands, which the zipper needs to
    stay clear of freshly wrapped nodes.
    """
    if mesh.strip is None:
        raise ValueError("mesh has no strip layout")
    d = np.asarray(direction, dtype=float)
    axis = int(np.argmax(np.abs(d)))
    if abs(abs(d[axis]) - 1.0) > 1e-12 or abs(d[1 - axis]) > 1e-12:
        raise ValueError("direction must be an axis-aligned unit vector")
    sign = 1 if d[axis] > 0 else -1

    s = mesh.strip
    h = s.h_row
    row_pos = np.array([mesh.nodes[r, axis][0] for r in s.rows])
    phys = ~s.virtual_rows
    w_lo = row_pos[phys].min()
    w_hi = row_pos[phys].max()
    n_phys = int(round((w_hi - w_lo) / h))
    L = s.n_rows
    n_virt = L - n_phys
    if n_virt < 2:
        raise ValueError("strip needs at least two virtual row bands")
    ell0 = int(np.argmin(np.abs(row_pos - w_lo)))

    strip_nodes = s.all_nodes()
    c0 = mesh.nodes[strip_nodes, axis].copy()

    codes = {rid: ROLE_CODE[role] for rid, role in mesh.region_roles.items()}
    tri_code = np.array([codes[int(r)] for r in mesh.tri_region], dtype=np.int8)

    state = MotionState(axis=axis, sign=sign, h_row=h, w_lo=w_lo, w_hi=w_hi,
                        circumference=L * h, n_lines=L, n_phys=n_phys,
                        ell0=ell0, grace=h, strip_nodes=strip_nodes, c0=c0,
                        tri_code=tri_code)
    state.seams = _discover_seams(mesh, state)
    _rebuild_zippers(mesh, state)   # normalize to the canonical pattern
    return state


def _discover_seams(mesh: Mesh, state: MotionState) -> list[Seam]:
    in_strip = np.zeros(mesh.n_nodes, dtype=bool)
    in_strip[state.strip_nodes] = True
    upd = np.where(state.tri_code == 2)[0]
    if upd.size == 0:
        return []
    tv = 1 - state.axis
    # group update triangles by the transverse position of their static nodes
    tri_static_v = np.full(upd.size, np.nan)
    for i, t in enumerate(upd):
        ns = [n for n in mesh.triangles[t] if not in_strip[n]]
        if not ns:
            raise ValueError("update triangle %d has no static node" % t)
        tri_static_v[i] = mesh.nodes[ns[0], tv]
    seams = []
    for v in np.unique(np.round(tri_static_v, 9)):
        sel = upd[np.abs(tri_static_v - v) < 1e-8]
        nodes = np.unique(mesh.triangles[sel])
        stat = nodes[~in_strip[nodes]]
        stat = stat[np.argsort(mesh.nodes[stat, state.axis])]
        if len(stat) != state.n_phys + 1:
            raise ValueError("seam at %g: %d static nodes, expected %d"
                             % (v, len(stat), state.n_phys + 1))
        mov = nodes[in_strip[nodes]]
        v_m = np.unique(np.round(mesh.nodes[mov, tv], 9))
        if len(v_m) != 1:
            raise ValueError("seam at %g: moving column is not a single line" % v)
        col = state.strip_nodes[
            np.abs(mesh.nodes[state.strip_nodes, tv] - v_m[0]) < 1e-8]
        col = col[np.argsort(mesh.nodes[col, state.axis])]
        if len(col) != state.n_lines:
            raise ValueError("seam at %g: edge column has %d nodes, expected %d"
                             % (v, len(col), state.n_lines))
        slots = np.sort(sel)
        if len(slots) != 2 * state.n_phys:
            raise ValueError("seam at %g: %d update triangles, expected %d"
                             % (v, len(slots), 2 * state.n_phys))
        # pick the winding that gives positive areas in the initial position
        trial = zipper_triangles(stat, col, state.ell0, flip=False)
        flip = bool(tri_areas(mesh.nodes, trial[:1])[0] <= 0)
        seams.append(Seam(stat, col, slots, flip))
    return seams


def _rebuild_zippers(mesh: Mesh, state: MotionState) -> None:
    j0 = state.ell0 - state.sign * state.n_slips
    for seam in state.seams:
        mesh.triangles[seam.tri_slots] = zipper_triangles(
            seam.static_nodes, seam.ring_nodes, j0 % state.n_lines, seam.flip)


def advance(mesh: Mesh, state: MotionState, distance: float) -> AdvanceResult:
    """Translate the strip by ``distance`` (>= 0) along the motion direction.

    Mutates the mesh coordinates and, on slips, the zipper connectivity.
    Coordinates are recomputed from the ring ordinates each call, so there
    is no incremental drift and a zero-distance advance is exactly a no-op.
    Returns the slip count and the nodes that wrapped to the entry side
    (their field values should be re-seeded by the caller).
    """
    if distance < 0:
        raise ValueError("distance must be non-negative")
    if distance == 0:
        return AdvanceResult(0, np.empty(0, dtype=np.int64))
    if distance >= state.circumference / 2:
        raise ValueError("advance distance exceeds half the ring circumference")
    c_old = mesh.nodes[state.strip_nodes, state.axis].copy()
    new_d = state.displacement + distance
    c_new = _embed(state, state.c0, new_d)
    mesh.nodes[state.strip_nodes, state.axis] = c_new
    predicted = c_old + state.sign * distance
    wrapped = state.strip_nodes[
        np.abs(c_new - predicted) > state.circumference / 2]
    state.displacement = new_d
    slip_tol = 1e-9 * state.h_row
    total_slips = int(np.floor((new_d + slip_tol) / state.h_row))
    slips = total_slips - state.n_slips
    if slips:
        state.n_slips = total_slips
        _rebuild_zippers(mesh, state)
    return AdvanceResult(slips, wrapped)


def active_elements(mesh: Mesh, state: MotionState) -> np.ndarray:
    """Boolean mask of triangles to assemble on, in the current position.

    Static and zipper triangles are always on.  Strip bands are on iff they
    are not torn across the ring wrap and strictly intersect the window
    interior; the role label records the initial state only, so both
    'strip' and 'virtual' bands are judged geometrically.
    """
    act = np.ones(mesh.n_triangles, dtype=bool)
    geo = (state.tri_code == 1) | (state.tri_code == 3)
    conn = mesh.triangles[geo]
    c = mesh.nodes[:, state.axis][conn]
    cmax = c.max(axis=1)
    cmin = c.min(axis=1)
    torn = (cmax - cmin) > state.circumference / 2
    eps = 1e-9 * state.h_row
    inside = (cmax > state.w_lo + eps) & (cmin < state.w_hi - eps)
    act[geo] = ~torn & inside
    return act
