import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))   # make `oracles` importable

from ccmsim import meshgen                      # noqa: E402
from ccmsim.mesh import save_mesh               # noqa: E402

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
FIXTURE_DIR = os.path.join(REPO_ROOT, "fixtures")

_BUILDERS = {
    "probe.mesh": meshgen.make_probe_mesh,
    "ramp.mesh": meshgen.make_ramp_mesh,
    "hotwire.mesh": meshgen.make_hotwire_mesh,
    "strip_square.mesh": lambda: meshgen.make_strip_square(20),
}


@pytest.fixture(scope="session")
def fixture_dir():
    """Path to fixtures/, regenerating any missing mesh file."""
    os.makedirs(FIXTURE_DIR, exist_ok=True)
    for name, builder in _BUILDERS.items():
        path = os.path.join(FIXTURE_DIR, name)
        if not os.path.exists(path):
            save_mesh(builder(), path)
    return FIXTURE_DIR
