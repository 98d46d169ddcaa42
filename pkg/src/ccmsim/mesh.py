"""Triangle meshes with an embedded moving strip.

Plain container types plus file I/O, validation and point location for the
two-region meshes used by the melting solver: a *static* part that never
moves, a *strip* whose node rows translate rigidly and recycle through a
virtual reservoir, and a one-cell-wide *update* band of shear triangles that
stitches the two together.

Mesh file format (version 1, plain text, whitespace separated)::

    CCMMESH 1
    NODES <count>
    <id> <x> <y>
    TRIANGLES <count>
    <id> <n1> <n2> <n3> <region_id>
    BOUNDARY <count>
    <n1> <n2> <tag>
    REGION_ROLE <count>
    <region_id> <role>
    STRIP h_row=<value> rows=<count>
    <row_index> [V] <node_id> <node_id> ...

Node and triangle ids are consecutive and zero based.  Roles are one of
``static``, ``strip``, ``update``, ``virtual``; the ``virtual`` label marks
element bands that start life outside the strip window (they rotate into use
as the strip recycles, so the label records the *initial* state only).  Rows
are listed in ascending order along the recycling axis; a leading ``V`` flags
rows whose nodes start outside the strip window.  Only tagged physical
boundaries appear in BOUNDARY — untagged exterior edges carry the natural
(insulated) condition implicitly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

ROLES = ("static", "strip", "update", "virtual")


class MeshFormatError(Exception):
    """Raised when a mesh file does not follow the version-1 layout."""


@dataclass
class StripLayout:
    """Row bookkeeping for the recycling strip.

    ``rows[k]`` holds the ids of all strip nodes whose ordinate sits on row
    line ``k`` (lines are spaced ``h_row`` apart along the recycling axis).
    ``virtual_rows[k]`` is True for rows that start outside the window.
    """

    h_row: float
    rows: list[np.ndarray]
    virtual_rows: np.ndarray  # bool, one entry per row

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def all_nodes(self) -> np.ndarray:
        return np.concatenate(self.rows) if self.rows else np.empty(0, dtype=np.int64)


@dataclass
class Mesh:
    nodes: np.ndarray                 # (n, 2) float64, mutated by mesh motion
    triangles: np.ndarray             # (m, 3) int64, update band rewired on slip
    tri_region: np.ndarray            # (m,) int64
    boundary_edges: np.ndarray        # (b, 2) int64 node pairs
    boundary_tags: list[str] = field(default_factory=list)
    region_roles: dict[int, str] = field(default_factory=dict)
    strip: StripLayout | None = None

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def tri_role(self) -> np.ndarray:
        """Role name per triangle (array of str)."""
        lut = {}
        for rid, role in self.region_roles.items():
            lut[rid] = role
        return np.array([lut[int(r)] for r in self.tri_region])

    def tagged_edges(self, tags) -> np.ndarray:
        """Node pairs (E, 2) of the boundary edges whose tag is in ``tags``."""
        if isinstance(tags, str):
            tags = (tags,)
        want = set(tags)
        idx = [i for i, t in enumerate(self.boundary_tags) if t in want]
        if not idx:
            return np.empty((0, 2), dtype=np.int64)
        return self.boundary_edges[np.array(idx, dtype=np.int64)]

    def copy(self) -> "Mesh":
        strip = None
        if self.strip is not None:
            strip = StripLayout(self.strip.h_row,
                                [r.copy() for r in self.strip.rows],
                                self.strip.virtual_rows.copy())
        return Mesh(self.nodes.copy(), self.triangles.copy(), self.tri_region.copy(),
                    self.boundary_edges.copy(), list(self.boundary_tags),
                    dict(self.region_roles), strip)


# ---------------------------------------------------------------------------
# geometry helpers

def tri_areas(coords: np.ndarray, conn: np.ndarray) -> np.ndarray:
    """Signed areas of the triangles ``conn`` over node coordinates ``coords``."""
    p0 = coords[conn[:, 0]]
    p1 = coords[conn[:, 1]]
    p2 = coords[conn[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


def edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


# ---------------------------------------------------------------------------
# file I/O

def save_mesh(mesh: Mesh, path) -> None:
    buf = io.StringIO()
    buf.write("CCMMESH 1\n")
    buf.write("NODES %d\n" % mesh.n_nodes)
    for i, (x, y) in enumerate(mesh.nodes):
        buf.write("%d %.17g %.17g\n" % (i, x, y))
    buf.write("TRIANGLES %d\n" % mesh.n_triangles)
    for i in range(mesh.n_triangles):
        a, b, c = mesh.triangles[i]
        buf.write("%d %d %d %d %d\n" % (i, a, b, c, mesh.tri_region[i]))
    buf.write("BOUNDARY %d\n" % len(mesh.boundary_edges))
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        buf.write("%d %d %s\n" % (a, b, tag))
    buf.write("REGION_ROLE %d\n" % len(mesh.region_roles))
    for rid in sorted(mesh.region_roles):
        buf.write("%d %s\n" % (rid, mesh.region_roles[rid]))
    if mesh.strip is not None:
        s = mesh.strip
        buf.write("STRIP h_row=%.17g rows=%d\n" % (s.h_row, s.n_rows))
        for k, row in enumerate(s.rows):
            flag = " V" if s.virtual_rows[k] else ""
            buf.write("%d%s %s\n" % (k, flag, " ".join(str(int(n)) for n in row)))
    with open(path, "w") as f:
        f.write(buf.getvalue())


def _expect(cond, msg):
    if not cond:
        raise MeshFormatError(msg)


def load_mesh(path) -> Mesh:
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    _expect(lines and lines[0] == "CCMMESH 1", "missing 'CCMMESH 1' header")
    pos = 1

    def header(name):
        nonlocal pos
        parts = lines[pos].split()
        _expect(len(parts) == 2 and parts[0] == name,
                "expected '%s <count>' at line %d" % (name, pos + 1))
        pos += 1
        return int(parts[1])

    n = header("NODES")
    nodes = np.empty((n, 2))
    for i in range(n):
        parts = lines[pos].split()
        _expect(len(parts) == 3 and int(parts[0]) == i,
                "nodes must be consecutive starting at 0 (line %d)" % (pos + 1))
        nodes[i] = (float(parts[1]), float(parts[2]))
        pos += 1

    m = header("TRIANGLES")
    tris = np.empty((m, 3), dtype=np.int64)
    region = np.empty(m, dtype=np.int64)
    for i in range(m):
        parts = lines[pos].split()
        _expect(len(parts) == 5 and int(parts[0]) == i,
                "triangles must be consecutive starting at 0 (line %d)" % (pos + 1))
        tris[i] = (int(parts[1]), int(parts[2]), int(parts[3]))
        region[i] = int(parts[4])
        pos += 1

    b = header("BOUNDARY")
    edges = np.empty((b, 2), dtype=np.int64)
    tags = []
    for i in range(b):
        parts = lines[pos].split()
        _expect(len(parts) == 3, "bad BOUNDARY line %d" % (pos + 1))
        edges[i] = (int(parts[0]), int(parts[1]))
        tags.append(parts[2])
        pos += 1

    r = header("REGION_ROLE")
    roles = {}
    for i in range(r):
        parts = lines[pos].split()
        _expect(len(parts) == 2, "bad REGION_ROLE line %d" % (pos + 1))
        _expect(parts[1] in ROLES, "unknown role %r" % parts[1])
        roles[int(parts[0])] = parts[1]
        pos += 1

    strip = None
    if pos < len(lines):
        parts = lines[pos].split()
        _expect(parts[0] == "STRIP", "expected STRIP section at line %d" % (pos + 1))
        kv = dict(p.split("=", 1) for p in parts[1:])
        _expect(set(kv) == {"h_row", "rows"}, "STRIP header needs h_row= and rows=")
        h_row = float(kv["h_row"])
        n_rows = int(kv["rows"])
        pos += 1
        rows = []
        virt = np.zeros(n_rows, dtype=bool)
        for k in range(n_rows):
            parts = lines[pos].split()
            _expect(int(parts[0]) == k, "rows must be consecutive (line %d)" % (pos + 1))
            rest = parts[1:]
            if rest and rest[0] == "V":
                virt[k] = True
                rest = rest[1:]
            rows.append(np.array([int(p) for p in rest], dtype=np.int64))
            pos += 1
        strip = StripLayout(h_row, rows, virt)
    _expect(pos == len(lines), "trailing content after line %d" % pos)

    mesh = Mesh(nodes, tris, region, edges, tags, roles, strip)
    validate_mesh(mesh)
    return mesh


# ---------------------------------------------------------------------------
# validation

def validate_mesh(mesh: Mesh, tol: float = 1e-12) -> None:
    """Structural checks; raises MeshFormatError on the first violation.

    Checks: index ranges, positive orientation of all non-virtual triangles,
    each listed boundary edge belongs to exactly one non-virtual triangle,
    known region roles, and strip rows that partition the strip nodes with
    uniform ``h_row`` spacing along exactly one axis.
    """
    n, m = mesh.n_nodes, mesh.n_triangles
    _expect(mesh.triangles.min(initial=0) >= 0 and mesh.triangles.max(initial=-1) < n,
            "triangle node index out of range")
    for rid in np.unique(mesh.tri_region):
        _expect(int(rid) in mesh.region_roles, "region %d has no role" % rid)

    role = mesh.tri_role()
    real = role != "virtual"
    areas = tri_areas(mesh.nodes, mesh.triangles)
    bad = np.where(real & (areas <= tol))[0]
    _expect(bad.size == 0,
            "non-virtual triangle %s has non-positive area" % (bad[:5].tolist(),))

    # each listed boundary edge must be an edge of exactly one non-virtual triangle
    count: dict[tuple[int, int], int] = {}
    for t in np.where(real)[0]:
        a, b, c = mesh.triangles[t]
        for e in (edge_key(a, b), edge_key(b, c), edge_key(c, a)):
            count[e] = count.get(e, 0) + 1
    for i, (a, b) in enumerate(mesh.boundary_edges):
        k = count.get(edge_key(int(a), int(b)), 0)
        _expect(k == 1, "boundary edge (%d,%d) tag %r belongs to %d non-virtual "
                "triangles, expected 1" % (a, b, mesh.boundary_tags[i], k))

    if mesh.strip is not None:
        s = mesh.strip
        _expect(s.n_rows >= 2, "strip needs at least two rows")
        all_ids = s.all_nodes()
        _expect(len(np.unique(all_ids)) == len(all_ids), "strip rows overlap")
        # row ordinates must advance by h_row along one axis
        ords = []
        axis = _strip_axis(mesh, s)
        for row in s.rows:
            c = mesh.nodes[row, axis]
            _expect(np.ptp(c) <= tol * max(1.0, abs(c[0])) + tol,
                    "strip row not aligned on a line")
            ords.append(c[0])
        d = np.diff(ords)
        _expect(np.allclose(d, s.h_row, rtol=1e-9, atol=1e-12),
                "strip rows are not spaced h_row apart")


def _strip_axis(mesh: Mesh, s: StripLayout) -> int:
    """Axis (0 or 1) along which the strip rows are stacked."""
    c0 = mesh.nodes[s.rows[0]]
    c1 = mesh.nodes[s.rows[-1]]
    span = np.abs(c1.mean(axis=0) - c0.mean(axis=0))
    return int(np.argmax(span))


# ---------------------------------------------------------------------------
# point location and interpolation

class PointLocator:
    """Locate points in the active part of a (possibly deformed) mesh.

    Builds a uniform background grid over the active triangles so repeated
    queries (sensor probes every step) stay cheap; falls back to a vectorized
    scan when the grid cell has no candidates.  Ties on shared edges resolve
    to the lowest triangle index, so results are deterministic.
    """

    def __init__(self, coords, conn, active=None, target_cells: int = 4096):
        self.coords = coords
        self.conn = conn
        if active is None:
            self.tri_ids = np.arange(len(conn), dtype=np.int64)
        else:
            active = np.asarray(active)
            if active.dtype == bool:
                self.tri_ids = np.where(active)[0].astype(np.int64)
            else:
                self.tri_ids = np.asarray(active, dtype=np.int64)
        if self.tri_ids.size == 0:                # empty active set: miss all
            self._buckets = {}
            self._gmin = np.zeros(2)
            self._cell = np.ones(2)
            self._nx = self._ny = 1
            return
        pts = coords[conn[self.tri_ids]]          # (m, 3, 2)
        self._lo = pts.min(axis=1)                # per-triangle bounding boxes
        self._hi = pts.max(axis=1)
        gmin = self._lo.min(axis=0)
        gmax = self._hi.max(axis=0)
        ext = np.maximum(gmax - gmin, 1e-300)
        self._nx = self._ny = max(1, int(np.sqrt(target_cells)))
        self._gmin = gmin
        self._cell = ext / (self._nx, self._ny)
        ix0 = np.clip(((self._lo[:, 0] - gmin[0]) / self._cell[0]).astype(int), 0, self._nx - 1)
        ix1 = np.clip(((self._hi[:, 0] - gmin[0]) / self._cell[0]).astype(int), 0, self._nx - 1)
        iy0 = np.clip(((self._lo[:, 1] - gmin[1]) / self._cell[1]).astype(int), 0, self._ny - 1)
        iy1 = np.clip(((self._hi[:, 1] - gmin[1]) / self._cell[1]).astype(int), 0, self._ny - 1)
        buckets: dict[tuple[int, int], list[int]] = {}
        for k in range(len(self.tri_ids)):
            for ix in range(ix0[k], ix1[k] + 1):
                for iy in range(iy0[k], iy1[k] + 1):
                    buckets.setdefault((ix, iy), []).append(k)
        self._buckets = {key: np.array(v, dtype=np.int64) for key, v in buckets.items()}

    def locate(self, point, tol: float = 1e-10):
        """Return (triangle_id, barycentric[3]) or None if outside."""
        p = np.asarray(point, dtype=float)
        ix = int(np.clip((p[0] - self._gmin[0]) / self._cell[0], 0, self._nx - 1))
        iy = int(np.clip((p[1] - self._gmin[1]) / self._cell[1], 0, self._ny - 1))
        cand = self._buckets.get((ix, iy))
        hit = self._scan(cand, p, tol) if cand is not None else None
        if hit is None:
            hit = self._scan(np.arange(len(self.tri_ids)), p, tol)
        return hit

    def _scan(self, local_ids, p, tol):
        tids = self.tri_ids[local_ids]
        tri = self.conn[tids]
        p0 = self.coords[tri[:, 0]]
        p1 = self.coords[tri[:, 1]]
        p2 = self.coords[tri[:, 2]]
        d = ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
             - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))
        with np.errstate(divide="ignore", invalid="ignore"):
            l1 = ((p2[:, 1] - p0[:, 1]) * (p[0] - p0[:, 0])
                  - (p2[:, 0] - p0[:, 0]) * (p[1] - p0[:, 1])) / d
            l2 = (-(p1[:, 1] - p0[:, 1]) * (p[0] - p0[:, 0])
                  + (p1[:, 0] - p0[:, 0]) * (p[1] - p0[:, 1])) / d
        l0 = 1.0 - l1 - l2
        ok = (d > 0) & (l0 >= -tol) & (l1 >= -tol) & (l2 >= -tol)
        idx = np.where(ok)[0]
        if idx.size == 0:
            return None
        k = idx[np.argmin(tids[idx])]
        lam = np.clip(np.array([l0[k], l1[k], l2[k]]), 0.0, 1.0)
        lam = lam / lam.sum()
        return int(tids[k]), lam


def locate_point(mesh: Mesh, point, active=None, tol: float = 1e-10):
    """One-shot point location (builds a throwaway locator)."""
    return PointLocator(mesh.nodes, mesh.triangles, active).locate(point, tol)


def interpolate(values: np.ndarray, conn_row: np.ndarray, bary: np.ndarray) -> float:
    """Linear interpolation of a nodal field at a located point."""
    return float(np.dot(values[conn_row], bary))
