import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from sfgrid.gridgen import (
    BoundaryLayerSpec,
    Grid1D,
    calibrate,
    generate_boundary_layer_grid,
    h_case2_linearized,
    h_case3,
    peclet,
    peclet_profile,
    step_between,
    step_field,
    step_profile,
    uniform_grid,
)
from sfgrid.kfield import EvolutionParams, GradientHistory, evolve_constant_m, k_case3_first_order

PAPER = dict(b=100.0, mu=1.0, h1=0.1, xi=0.8)


def replay_recursion(b, mu, h1, xi, hi, dps=50):
    """Refined nodes from xi onward, in extended precision."""
    mp.mp.dps = dps
    b, mu, h1, xi = (mp.mpf(str(v)) for v in (b, mu, h1, xi))
    log_arg = mp.log(b * h1 / (2 * mu))
    nodes = [xi]
    while nodes[-1] < hi:
        x = nodes[-1]
        nodes.append(x + h1 / mp.exp(x / xi * log_arg))
    return nodes


# -- Grid1D ----------------------------------------------------------------

@pytest.mark.parametrize(
    "nodes, msg",
    [([0.0], "at least 2"), ([0.0, 0.5, 0.5, 1.0], "nodes not strictly increasing"),
     ([0.0, 1.0, 0.5], "nodes not strictly increasing"), ([0.0, math.inf], "finite")],
)
def test_grid_invariants(nodes, msg):
    with pytest.raises(ValueError, match=msg):
        Grid1D(np.array(nodes))


def test_grid_equality_and_steps():
    g = Grid1D([0.0, 0.25, 1.0])
    assert g == Grid1D(np.array([0.0, 0.25, 1.0]))
    assert (g.lo, g.hi, len(g)) == (0.0, 1.0, 3)
    np.testing.assert_array_equal(g.steps, [0.25, 0.75])


# -- step laws -------------------------------------------------------------

def test_step_between_examples():
    assert step_between(5.0, 5.0, 1.0) == pytest.approx(0.2, rel=1e-15)
    assert step_between(2.0, 6.0, 1.0) == 0.25


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)])
def test_step_between_rejects_non_positive(args):
    with pytest.raises(ValueError):
        step_between(*args)


@given(
    st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.01, 10),
    st.floats(-3, 3), st.floats(0.5, 5), st.floats(0, 2),
)
def test_step_between_case2_factorization(ci, cj, A, m, S, t):
    ki, kj = evolve_constant_m([ci, cj], m, S, t)
    expected = 2 * A / (ci + cj) * math.exp(-m * t / S)
    assert step_between(ki, kj, A) == pytest.approx(expected, rel=1e-12)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_step_between_equal_fields_is_step_field(k, A):
    assert step_between(k, k, A) == pytest.approx(step_field(k, A), rel=1e-15)


def test_step_field_examples():
    c, h1 = 3.0, 0.1
    assert step_field(c, h1 * c) == pytest.approx(h1, rel=1e-15)
    assert step_field(2.0, 1.0) == 0.5
    assert step_field(4.0, 1.0) == step_field(2.0, 1.0) / 2


def test_step_field_rejects_non_positive():
    with pytest.raises(ValueError):
        step_field(0.0, 1.0)


def test_linearized_step():
    assert h_case2_linearized(2.0, 4.0, 0.5, 1.0, 0.0) == 2.0
    assert h_case2_linearized(1.0, 1.0, 0.5, 1.0, 2.0) == 0.0
    lin = h_case2_linearized(1.0, 1.0, 0.01, 1.0, 1.0)
    assert lin == pytest.approx(0.99, rel=1e-15)
    assert abs(lin - math.exp(-0.01)) < 5.1e-5


@pytest.mark.parametrize("t", [-0.1, 2.0001])
def test_linearized_window(t):
    with pytest.raises(ValueError, match="linearization window exceeded"):
        h_case2_linearized(1.0, 1.0, 0.5, 1.0, t)


def test_linearized_negative_rate_has_no_upper_window():
    assert h_case2_linearized(1.0, 1.0, -1.0, 1.0, 10.0) == 11.0


def test_h_case3_no_evolution():
    assert h_case3(2.0, 3.0, EvolutionParams(S=1.0), GradientHistory()) == 1.5


def test_h_case3_gradient_free_halving():
    params = EvolutionParams(m0=2.0, S=4.0)
    assert h_case3(1.0, 1.0, params, GradientHistory(t=2.0)) == pytest.approx(0.5, rel=1e-15)


def test_h_case3_viscosity_sweep():
    hist = GradientHistory(l2sq=1.0, t=1.0)
    # independent evaluation of mu^2 S A / (c (mu^2 S + m2 l2sq))
    expected = {1.0: 0.5, 0.1: 0.01 / 1.01, 0.01: 1e-4 / 1.0001}
    got = {mu: h_case3(1.0, 1.0, EvolutionParams(m2=1.0, S=1.0, mu=mu), hist) for mu in expected}
    for mu in expected:
        assert got[mu] == pytest.approx(expected[mu], rel=1e-14)
    assert got[1.0] > got[0.1] > got[0.01]


def test_h_case3_is_inverse_first_order_field():
    params = EvolutionParams(m0=0.2, m1=0.5, m2=0.3, S=2.0, mu=0.4)
    hist = GradientHistory(l1=0.6, l2sq=0.5, t=1.5)
    A, c = 0.7, 1.3
    assert h_case3(c, A, params, hist) == pytest.approx(A / k_case3_first_order(c, params, hist), rel=1e-14)


def test_h_case3_out_of_range():
    with pytest.raises(ValueError, match="step law out of range"):
        h_case3(1.0, 1.0, EvolutionParams(m0=-3.0, S=1.0), GradientHistory(t=1.0))


# -- calibration and profile -----------------------------------------------

def test_calibrate_paper_inputs():
    spec = calibrate(**PAPER)
    assert spec.rate == pytest.approx(float(mp.log(5) / mp.mpf("0.8")), abs=1e-12)
    assert spec.rate == pytest.approx(2.0117974, abs=1e-7)
    assert spec.log_argument == pytest.approx(5.0)


def test_calibrate_rate_inverse_in_xi():
    assert calibrate(100, 1, 0.1, 0.4).rate == pytest.approx(2 * calibrate(**PAPER).rate, rel=1e-15)


def test_calibrate_boundary_is_rejected():
    with pytest.raises(ValueError, match="log argument not greater than 1"):
        calibrate(100.0, 1.0, 0.02, 0.8)


@pytest.mark.parametrize("bad", ["b", "mu", "h1", "xi"])
def test_calibrate_rejects_non_positive(bad):
    args = dict(PAPER, **{bad: 0.0})
    with pytest.raises(ValueError):
        calibrate(**args)


def test_step_profile_paper_values():
    spec = calibrate(**PAPER)
    assert step_profile(spec, 0.8) == pytest.approx(0.02, abs=1e-12)
    assert step_profile(spec, 1.0) == pytest.approx(0.1 * 5**-1.25, rel=1e-13)
    assert step_profile(spec, 1.0) == pytest.approx(0.0133748, abs=1e-7)
    assert step_profile(spec, 0.0) == 0.1


@given(
    st.floats(10, 1000), st.floats(0.1, 10), st.floats(1.01, 50), st.floats(0.05, 0.95),
    st.floats(0, 1), st.floats(1e-3, 1),
)
def test_step_profile_properties(b, mu, factor, xi, x, dx):
    spec = calibrate(b, mu, factor * 2 * mu / b, xi)
    assert step_profile(spec, x + dx) < step_profile(spec, x)
    assert step_profile(spec, xi) * b / (2 * mu) == pytest.approx(1.0, abs=1e-12)


# -- grid generation -------------------------------------------------------

def test_boundary_layer_grid_matches_replay():
    spec = calibrate(**PAPER)
    grid = generate_boundary_layer_grid(spec, 0.0, 1.0)
    oracle = replay_recursion(hi=1.0, **PAPER)
    refined = grid.nodes[grid.nodes >= 0.8 - 1e-12]
    # all nodes except the clamped/merged tail follow the recursion
    for x, ref in zip(refined[:-1], oracle):
        assert abs(x - float(ref)) <= 1e-12
    assert refined[1] == pytest.approx(0.82, abs=1e-15)
    assert refined[2] == pytest.approx(0.8392112553945919, abs=1e-12)
    assert refined[3] == pytest.approx(0.8576941774255277, abs=1e-12)


def test_boundary_layer_grid_layout():
    spec = calibrate(**PAPER)
    grid = generate_boundary_layer_grid(spec, 0.0, 1.0)
    assert grid.lo == 0.0 and grid.hi == 1.0
    np.testing.assert_allclose(grid.nodes[:9], np.arange(9) * 0.1, atol=1e-15)
    assert grid.nodes[8] == 0.8
    # 9 coarse + 11 recursion + clamped endpoint (the 0.99854 node is merged away)
    assert len(grid) == 21
    assert len(grid) < len(uniform_grid(0.0, 1.0, 0.02)) == 51


def test_boundary_layer_gap_follows_profile():
    spec = calibrate(**PAPER)
    grid = generate_boundary_layer_grid(spec, 0.0, 1.0)
    x, h = grid.nodes, grid.steps
    for j in range(len(h) - 1):
        if x[j] >= spec.xi:
            assert h[j] == pytest.approx(step_profile(spec, x[j]), abs=1e-12)


def test_boundary_layer_peclet_audit():
    spec = calibrate(**PAPER)
    grid = generate_boundary_layer_grid(spec, 0.0, 1.0)
    pe = peclet_profile(grid, spec.b, spec.mu)
    refined = grid.nodes[:-1] >= spec.xi
    assert np.all(pe[refined] <= 1 + 1e-12)
    assert pe[refined][0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(pe[~refined], 5.0, rtol=1e-12)


@given(st.floats(20, 400), st.floats(1.5, 8), st.integers(2, 60))
def test_boundary_layer_peclet_audit_fuzz(b, factor, n_coarse):
    mu = 1.0
    h1 = factor * 2 * mu / b
    xi = n_coarse * h1
    assume(0.3 <= xi < 0.98)
    spec = calibrate(b, mu, h1, xi)
    grid = generate_boundary_layer_grid(spec, 0.0, 1.0)
    pe = peclet_profile(grid, b, mu)
    assert np.all(pe[grid.nodes[:-1] >= xi] <= 1 + 1e-12)


def test_merge_of_tiny_last_gap():
    spec = calibrate(**PAPER)
    oracle = [float(v) for v in replay_recursion(hi=1.0, **PAPER)]
    # the replay overshoots 1 by ~0.012 after 0.99854: last gap would be 0.0015
    assert 0.998 < oracle[-2] < 1.0 < oracle[-1]
    grid = generate_boundary_layer_grid(spec, 0.0, 1.0)
    assert oracle[-2] not in grid.nodes
    assert grid.nodes[-2] == pytest.approx(oracle[-3], abs=1e-12)


def test_no_merge_when_last_gap_is_large():
    spec = calibrate(**PAPER)
    grid = generate_boundary_layer_grid(spec, 0.0, 0.995)
    oracle = [float(v) for v in replay_recursion(hi=0.995, **PAPER)]
    assert grid.nodes[-1] == 0.995
    assert grid.nodes[-2] == pytest.approx(oracle[-2], abs=1e-12)


def test_collapsing_profile_is_rejected(monkeypatch):
    monkeypatch.setattr("sfgrid.gridgen.MAX_NODES", 1000)
    # rate = ln(5)/0.02 ~ 80: steps near x=1 are ~1e-36
    spec = calibrate(250.0, 1.0, 0.04, 0.04)
    with pytest.raises(ValueError, match="collapses"):
        generate_boundary_layer_grid(spec, 0.0, 1.0)


def test_zero_rate_gives_uniform_grid():
    spec = BoundaryLayerSpec(h1=0.1, b=1.0, mu=1.0, xi=0.5, rate=0.0)
    grid = generate_boundary_layer_grid(spec, 0.0, 1.0)
    np.testing.assert_allclose(grid.steps, 0.1, rtol=1e-12)
    assert len(grid) == 11


@pytest.mark.parametrize("lo, hi, xi", [(0.0, 1.0, 0.85), (0.0, 0.8, 0.8), (0.8, 1.0, 0.8)])
def test_boundary_layer_rejects_bad_xi(lo, hi, xi):
    spec = calibrate(100.0, 1.0, 0.1, xi)
    with pytest.raises(ValueError):
        generate_boundary_layer_grid(spec, lo, hi)


def test_boundary_layer_off_lattice_message():
    with pytest.raises(ValueError, match="xi must lie on the coarse lattice"):
        generate_boundary_layer_grid(calibrate(100.0, 1.0, 0.1, 0.85), 0.0, 1.0)


# -- uniform grid and Peclet -----------------------------------------------

@pytest.mark.parametrize(
    "h, nodes",
    [(1.0, [0.0, 1.0]), (0.3, [0.0, 0.3, 0.6, 0.9, 1.0]), (0.25, [0.0, 0.25, 0.5, 0.75, 1.0])],
)
def test_uniform_grid_nodes(h, nodes):
    np.testing.assert_allclose(uniform_grid(0.0, 1.0, h).nodes, nodes, atol=1e-15)


@pytest.mark.parametrize("h, count", [(0.02, 51), (0.005, 201), (0.1, 11), (0.3, 5)])
def test_uniform_grid_count(h, count):
    g = uniform_grid(0.0, 1.0, h)
    assert len(g) == count == math.ceil(round(1.0 / h, 9)) + 1
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0


@pytest.mark.parametrize("h", [0.0, -0.1, 1.5])
def test_uniform_grid_rejects(h):
    with pytest.raises(ValueError):
        uniform_grid(0.0, 1.0, h)


def test_peclet_examples():
    assert peclet(0.02, 100.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert peclet(0.1, 100.0, 1.0) == pytest.approx(5.0, rel=1e-15)
    assert peclet(0.1, 200.0, 2.0) == peclet(0.1, 100.0, 1.0)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, -1.0)])
def test_peclet_rejects(args):
    with pytest.raises(ValueError):
        peclet(*args)
