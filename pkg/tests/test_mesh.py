import numpy as np
import numpy.testing as npt
import pytest

from ccmsim import meshgen
from ccmsim.mesh import (
    Mesh,
    MeshFormatError,
    load_mesh,
    locate_point,
    save_mesh,
    tri_areas,
    validate_mesh,
)


def test_unit_square_counts_and_tags():
    m = meshgen.make_unit_square(4)
    assert m.n_nodes == 25
    assert m.n_triangles == 32
    for tag in ("left", "right", "bottom", "top"):
        assert len(m.tagged_edges(tag)) == 4
    # every tagged edge has unit-square boundary coordinates
    for tag, axis, value in [("left", 0, 0.0), ("right", 0, 1.0),
                             ("bottom", 1, 0.0), ("top", 1, 1.0)]:
        nodes = np.unique(m.tagged_edges(tag))
        npt.assert_allclose(m.nodes[nodes, axis], value, atol=1e-15)


def test_all_triangles_positively_oriented():
    for m in (meshgen.make_unit_square(5), meshgen.make_strip_square(8)):
        role = m.tri_role()
        areas = tri_areas(m.nodes, m.triangles)
        assert np.all(areas[role != "virtual"] > 0)


def test_tagged_edges_returns_node_pairs():
    m = meshgen.make_unit_square(3)
    e = m.tagged_edges(("left", "right"))
    assert e.shape == (6, 2)
    assert e.dtype == np.int64
    assert m.tagged_edges("no-such-tag").shape == (0, 2)
    # string and tuple forms agree
    npt.assert_array_equal(m.tagged_edges("left"),
                           m.tagged_edges(("left",)))


def test_save_load_roundtrip(tmp_path):
    m = meshgen.make_strip_square(8, n_virt=3)
    path = tmp_path / "roundtrip.mesh"
    save_mesh(m, path)
    m2 = load_mesh(path)
    npt.assert_array_equal(m.nodes, m2.nodes)          # %.17g is lossless
    npt.assert_array_equal(m.triangles, m2.triangles)
    npt.assert_array_equal(m.tri_region, m2.tri_region)
    npt.assert_array_equal(m.boundary_edges, m2.boundary_edges)
    assert m.boundary_tags == m2.boundary_tags
    assert m.region_roles == m2.region_roles
    assert m2.strip is not None
    assert m2.strip.h_row == m.strip.h_row
    assert m2.strip.n_rows == m.strip.n_rows
    npt.assert_array_equal(m.strip.virtual_rows, m2.strip.virtual_rows)
    for a, b in zip(m.strip.rows, m2.strip.rows):
        npt.assert_array_equal(a, b)


def test_load_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.mesh"
    p.write_text("CCMMESH 2\nNODES 0\n")
    with pytest.raises(MeshFormatError, match="CCMMESH 1"):
        load_mesh(p)


def test_load_rejects_nonconsecutive_ids(tmp_path):
    p = tmp_path / "bad.mesh"
    p.write_text("CCMMESH 1\nNODES 2\n0 0 0\n2 1 0\n"
                 "TRIANGLES 0\nBOUNDARY 0\nREGION_ROLE 0\n")
    with pytest.raises(MeshFormatError, match="consecutive"):
        load_mesh(p)


def test_load_rejects_unknown_role(tmp_path):
    p = tmp_path / "bad.mesh"
    p.write_text("CCMMESH 1\nNODES 3\n0 0 0\n1 1 0\n2 0 1\n"
                 "TRIANGLES 1\n0 0 1 2 0\nBOUNDARY 0\n"
                 "REGION_ROLE 1\n0 plasma\n")
    with pytest.raises(MeshFormatError, match="plasma"):
        load_mesh(p)


def test_load_rejects_trailing_content(tmp_path):
    p = tmp_path / "bad.mesh"
    p.write_text("CCMMESH 1\nNODES 3\n0 0 0\n1 1 0\n2 0 1\n"
                 "TRIANGLES 1\n0 0 1 2 0\nBOUNDARY 0\n"
                 "REGION_ROLE 1\n0 static\nstray line\n")
    with pytest.raises(MeshFormatError):
        load_mesh(p)


def test_validate_rejects_inverted_triangle():
    m = meshgen.make_unit_square(2)
    m.triangles[0] = m.triangles[0][::-1]       # flip the winding
    with pytest.raises(MeshFormatError, match="non-positive area"):
        validate_mesh(m)


def test_validate_rejects_interior_edge_tagged():
    m = meshgen.make_unit_square(2)
    # tag an interior edge: shared by two triangles
    interior = None
    from collections import Counter
    cnt = Counter()
    for tri in m.triangles:
        a, b, c = sorted(tri)
        for e in ((a, b), (b, c), (a, c)):
            cnt[e] += 1
    for e, k in cnt.items():
        if k == 2:
            interior = e
            break
    m.boundary_edges = np.vstack([m.boundary_edges, interior])
    m.boundary_tags.append("oops")
    with pytest.raises(MeshFormatError, match="oops"):
        validate_mesh(m)


def test_validate_rejects_uneven_strip_rows():
    m = meshgen.make_strip_square(8)
    m.strip.h_row *= 1.5
    with pytest.raises(MeshFormatError, match="h_row"):
        validate_mesh(m)


def test_copy_is_deep():
    m = meshgen.make_strip_square(8)
    c = m.copy()
    c.nodes[0, 0] += 1.0
    c.triangles[0, 0] = 0
    c.strip.rows[0][0] = 999999
    assert m.nodes[0, 0] != c.nodes[0, 0]
    assert m.strip.rows[0][0] != 999999


def test_point_location_and_interpolation():
    m = meshgen.make_unit_square(4)
    T = 2.0 * m.nodes[:, 0] - 3.0 * m.nodes[:, 1] + 0.5
    hit = locate_point(m, (0.33, 0.61))
    assert hit is not None
    tri_id, bary = hit
    value = float(np.dot(T[m.triangles[tri_id]], bary))
    # linear fields interpolate exactly
    assert value == pytest.approx(2.0 * 0.33 - 3.0 * 0.61 + 0.5, abs=1e-13)
    assert locate_point(m, (1.7, 0.5)) is None          # outside
    assert locate_point(m, (0.5, -0.2)) is None


def test_point_location_respects_active_mask():
    m = meshgen.make_unit_square(4)
    active = np.zeros(m.n_triangles, dtype=bool)        # nothing active
    assert locate_point(m, (0.5, 0.5), active=active) is None


def test_fixture_meshes_validate(fixture_dir):
    import os
    for name in ("probe.mesh", "ramp.mesh", "hotwire.mesh"):
        m = load_mesh(os.path.join(fixture_dir, name))
        assert m.strip is not None
        assert "tip" in m.boundary_tags
