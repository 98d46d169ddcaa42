import numpy as np
import numpy.testing as npt
import pytest

from ccmsim import meshgen
from ccmsim.errors import NumericalError
from ccmsim.stfem import (
    SlabOperator,
    SlabProblem,
    integrate_nodal,
    solve_slab,
)

from oracles import prism_amplification


def square_problem(n=8, dt=0.1, alpha=1.0, t_prev=None, **kw):
    mesh = meshgen.make_unit_square(n)
    if t_prev is None:
        t_prev = np.zeros(mesh.n_nodes)
    prob = SlabProblem(mesh.nodes, mesh.nodes, mesh.triangles, dt=dt,
                       alpha=alpha, t_prev=t_prev, **kw)
    return mesh, prob


def test_integrate_nodal_linear_exact():
    mesh = meshgen.make_unit_square(6)
    v = 2.0 + 3.0 * mesh.nodes[:, 0] - 1.0 * mesh.nodes[:, 1]
    # integral of 2 + 3x - y over the unit square = 2 + 1.5 - 0.5
    assert integrate_nodal(mesh.nodes, mesh.triangles, v) == pytest.approx(3.0, abs=1e-13)


def test_conservation_insulated():
    # no Dirichlet rows, natural (insulated) boundary everywhere: the total
    # heat content of the new trace equals that of the previous trace
    rng = np.random.default_rng(42)
    mesh, prob = square_problem(n=8, dt=0.3)
    prob.t_prev = rng.uniform(0.0, 2.0, mesh.n_nodes)
    sol = solve_slab(prob)
    before = integrate_nodal(mesh.nodes, mesh.triangles, prob.t_prev)
    after = integrate_nodal(mesh.nodes, mesh.triangles, sol.t_top)
    assert abs(after - before) / abs(before) < 1e-10


def test_linear_exactness_static():
    mesh, prob = square_problem(n=6, dt=0.25, alpha=0.7)
    exact = 1.0 + 2.0 * mesh.nodes[:, 0] - 0.5 * mesh.nodes[:, 1]
    bnodes = np.unique(mesh.tagged_edges(("left", "right", "bottom", "top")))
    prob.t_prev = exact
    prob.dirichlet_nodes = bnodes
    prob.dirichlet_values = exact[bnodes]
    sol = solve_slab(prob)
    npt.assert_allclose(sol.t_top, exact, atol=5e-13)
    npt.assert_allclose(sol.t_bot, exact, atol=5e-13)       # zero jump


def test_linear_exactness_moving_mesh():
    # a steady linear field stays exact when interior nodes move between the
    # slab's bottom and top coordinate sets
    mesh = meshgen.make_unit_square(6)
    rng = np.random.default_rng(3)
    coords_old = mesh.nodes
    coords_new = mesh.nodes.copy()
    bnodes = np.unique(mesh.tagged_edges(("left", "right", "bottom", "top")))
    interior = np.setdiff1d(np.arange(mesh.n_nodes), bnodes)
    coords_new[interior] += rng.uniform(-0.03, 0.03, (interior.size, 2))

    def field(c):
        return 0.4 - 1.3 * c[:, 0] + 0.8 * c[:, 1]

    prob = SlabProblem(coords_old, coords_new, mesh.triangles, dt=0.2,
                       alpha=1.3, t_prev=field(coords_old),
                       dirichlet_nodes=bnodes,
                       dirichlet_values=field(coords_new[bnodes]))
    sol = solve_slab(prob)
    # the top trace is the linear field sampled at the NEW positions
    npt.assert_allclose(sol.t_top, field(coords_new), atol=5e-12)


def test_strong_damping_of_stiff_slabs():
    # a huge time step drives the solution to the steady state regardless of
    # the initial trace (the single-mode response tends to zero, not to a
    # ringing +/- pattern)
    mesh, prob = square_problem(n=8, dt=1e6)
    right = np.unique(mesh.tagged_edges("right"))
    prob.t_prev = np.ones(mesh.n_nodes)
    prob.dirichlet_nodes = right
    prob.dirichlet_values = np.zeros(right.size)
    sol = solve_slab(prob)
    assert np.max(np.abs(sol.t_top)) < 1e-4


def test_single_mode_amplification_matches_rational_function():
    # the slab reduction of u' = -lam*u has amplification
    # R(z) = (1 - z/3) / (1 + 2z/3 + z^2/6); checked against an
    # independently assembled 2x2 system
    for z in (0.05, 0.5, 1.0, 3.0, 7.0, 50.0, 1e4):
        r = (1.0 - z / 3.0) / (1.0 + 2.0 * z / 3.0 + z * z / 6.0)
        assert prism_amplification(z) == pytest.approx(r, rel=1e-12)
    assert prism_amplification(3.0) == pytest.approx(0.0, abs=1e-15)
    assert abs(prism_amplification(1e8)) < 1e-7              # R -> 0


def test_neumann_reproduces_linear_steady_state():
    # T = x is steady under: left edge clamped to 0, prescribed flux
    # alpha * dT/dn = alpha on the right edge, insulated top/bottom
    alpha = 0.7
    mesh, prob = square_problem(n=6, dt=0.5, alpha=alpha)
    left = np.unique(mesh.tagged_edges("left"))
    prob.t_prev = mesh.nodes[:, 0].copy()
    prob.dirichlet_nodes = left
    prob.dirichlet_values = np.zeros(left.size)
    prob.neumann = [(mesh.tagged_edges("right"), alpha)]
    sol = solve_slab(prob)
    npt.assert_allclose(sol.t_top, mesh.nodes[:, 0], atol=1e-11)


def test_boundary_residual_equals_weak_flux():
    # for the steady field T = x with full Dirichlet data, the summed
    # time-averaged residual over one edge equals the outgoing weak flux
    # alpha * dT/dn * |edge|
    alpha = 1.9
    mesh, prob = square_problem(n=5, dt=0.3, alpha=alpha)
    exact = mesh.nodes[:, 0]
    bnodes = np.unique(mesh.tagged_edges(("left", "right", "bottom", "top")))
    prob.t_prev = exact
    prob.dirichlet_nodes = bnodes
    prob.dirichlet_values = exact[bnodes]
    op = SlabOperator(prob)
    sol = op.solve()
    right = np.unique(mesh.tagged_edges("right"))
    left = np.unique(mesh.tagged_edges("left"))
    r_right = op.node_residual_time_avg(sol, right)
    r_left = op.node_residual_time_avg(sol, left)
    assert np.sum(r_right) == pytest.approx(alpha, rel=1e-10)
    assert np.sum(r_left) == pytest.approx(-alpha, rel=1e-10)


def test_residual_requested_at_inactive_node_raises():
    mesh, prob = square_problem(n=4)
    conn = mesh.triangles[:-4]                   # drop a few elements
    prob = SlabProblem(prob.coords_old, prob.coords_new, conn, dt=prob.dt,
                       alpha=1.0, t_prev=prob.t_prev)
    op = SlabOperator(prob)
    sol = op.solve()
    inactive = np.setdiff1d(np.arange(mesh.n_nodes), np.unique(conn))
    assert inactive.size > 0
    with pytest.raises(ValueError, match="inactive"):
        op.node_residual_time_avg(sol, inactive[:1])


def test_inverted_prism_raises():
    mesh = meshgen.make_unit_square(4)
    coords_new = mesh.nodes.copy()
    # collapse one interior node onto a neighbour hard enough to invert
    coords_new[12] = coords_new[13] + (coords_new[13] - coords_new[12])
    prob = SlabProblem(mesh.nodes, coords_new, mesh.triangles, dt=0.1,
                       alpha=1.0, t_prev=np.zeros(mesh.n_nodes))
    with pytest.raises(NumericalError, match="inverted"):
        SlabOperator(prob)


def test_unreachable_solver_tolerance_raises():
    mesh, prob = square_problem(n=6, dt=0.1)
    prob.t_prev = np.linspace(0.0, 1.0, mesh.n_nodes)
    with pytest.raises(NumericalError, match="residual"):
        solve_slab(prob, solver_tol=1e-30)
