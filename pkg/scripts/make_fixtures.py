#!/usr/bin/env python3
"""Generate the mesh files referenced by the bundled fixture configs.

Writes fixtures/probe.mesh, fixtures/ramp.mesh and fixtures/hotwire.mesh
(plus a small sliding-band square used by demos).  Regenerating is
deterministic; the .mesh files are derived artifacts and can always be
rebuilt from this script.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ccmsim import meshgen  # noqa: E402
from ccmsim.mesh import load_mesh, save_mesh  # noqa: E402

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))


def main() -> None:
    out = os.path.join(ROOT, "fixtures")
    os.makedirs(out, exist_ok=True)
    for name, builder in [
        ("probe.mesh", meshgen.make_probe_mesh),
        ("ramp.mesh", meshgen.make_ramp_mesh),
        ("hotwire.mesh", meshgen.make_hotwire_mesh),
        ("strip_square.mesh", lambda: meshgen.make_strip_square(20)),
    ]:
        path = os.path.join(out, name)
        mesh = builder()
        save_mesh(mesh, path)
        load_mesh(path)  # roundtrip sanity check (validates on load)
        print(f"wrote {path}: {len(mesh.nodes)} nodes, "
              f"{len(mesh.triangles)} triangles")


if __name__ == "__main__":
    main()
