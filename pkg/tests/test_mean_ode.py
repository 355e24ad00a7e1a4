import math

import numpy as np
import pytest
from scipy.linalg import expm

from antithetic.controller import closed_loop
from antithetic.errors import DomainError
from antithetic.mean_ode import (
    LinearClosedLoop,
    integrate_mean,
    linear_closed_loop,
    pi_zero,
    settling_time_ode,
    steady_state,
)
from antithetic.presets import GENE, MATURATION, gene_expression, maturation
from antithetic.ssa import SeedPlan, TimeGrid, run_ensemble

MU, THETA = 10.0, 2.0


def gene_sys(k=3.0, beta=0.0, x0=None):
    return linear_closed_loop(gene_expression(GENE), 1, 0, MU, THETA, k, beta, x0)


def test_structure():
    sys = gene_sys(3.0, 2.0)
    assert sys.A[-1].tolist() == [0, -THETA, 0]
    assert sys.b.tolist() == [2.0 / THETA, 0.0, 1.0]
    assert np.array_equal(sys.offset, np.zeros(3))


@pytest.mark.parametrize("beta", [0.0, 1.0, 10.0])
def test_steady_output_is_set_point(beta):
    sys = gene_sys(3.0, beta)
    z = steady_state(sys)
    assert np.allclose(sys.A @ z + sys.b * MU, 0, atol=1e-12)
    assert z[1] == pytest.approx(5.0, rel=1e-9)
    traj = integrate_mean(sys, np.linspace(0, 80, 321))
    assert traj.output[-1] == pytest.approx(5.0, rel=1e-9)
    assert traj.error[-1] == pytest.approx(0.0, abs=5e-9)


def test_basal_production_offset():
    net = gene_expression(GENE, k_r=10.0)
    sys = linear_closed_loop(net, 1, 0, MU, THETA, 3.0, 0.5)
    assert sys.offset[0] == 10.0
    assert steady_state(sys)[1] == pytest.approx(5.0, rel=1e-9)


def test_maturation_steady_state():
    sys = linear_closed_loop(maturation(MATURATION), 2, 0, MU, THETA, 3.0, 5.0)
    traj = integrate_mean(sys, np.linspace(0, 200, 801))
    assert traj.output[-1] == pytest.approx(5.0, rel=1e-9)


def test_fixed_point_start_is_constant():
    sys = gene_sys(3.0, 1.0)
    sys = gene_sys(3.0, 1.0, x0=steady_state(sys))
    traj = integrate_mean(sys, np.linspace(0, 10, 21))
    assert np.allclose(traj.states, traj.states[0], atol=1e-12)
    assert settling_time_ode(sys) == 0.0


def test_rk4_against_matrix_exponential(rng):
    sys = gene_sys(3.0, 2.0, x0=[3.0, 1.0, -2.0])
    grid = np.linspace(0, 15, 301)
    traj = integrate_mean(sys, grid)
    zs = steady_state(sys)
    z0 = np.asarray(sys.x0, float)
    picks = rng.choice(np.arange(1, grid.size), size=5, replace=False)
    for t, z in zip(grid[picks], traj.states[picks]):
        exact = zs + expm(sys.A * t) @ (z0 - zs)
        assert np.max(np.abs(z - exact) / np.abs(exact)) <= 1e-6


def test_pi_zero():
    assert pi_zero(3.0, 6.0, 2.0) == -1.0
    assert pi_zero(3.0, 0.0, 2.0) is None
    assert -1e-6 < pi_zero(3.0, 1e7, 2.0) < 0
    for k, b, t in [(0.1, 0.1, 0.1), (10, 3, 7)]:
        assert pi_zero(k, b, t) < 0


def test_scalar_settling_time():
    sys = LinearClosedLoop(np.array([[-1.0]]), np.array([1.0]), 5.0, 1.0, 0)
    t = settling_time_ode(sys, 0.02, t_end=10.0, n_points=10001)
    assert abs(t - math.log(50)) <= 1e-3


def test_non_hurwitz_refused():
    with pytest.raises(DomainError) as info:
        settling_time_ode(gene_sys(40.0, 0.0))
    assert info.value.eigenvalue.real > 0


def test_settling_time_decreases_then_increases_in_beta():
    times = [settling_time_ode(gene_sys(3.0, b)) for b in (0.0, 1.0, 4.0, 16.0, 64.0)]
    i = int(np.argmin(times))
    assert 0 < i < len(times) - 1
    assert all(a > b for a, b in zip(times[:i], times[1:i + 1]))
    assert all(a < b for a, b in zip(times[i:], times[i + 1:]))


def test_matches_ssa_mean_after_transient(gene):
    net, cfg = gene
    closed = closed_loop(net, cfg)
    grid = TimeGrid.uniform(20.0, 81)
    stats = run_ensemble(closed, closed.initial_state(), grid, 4000, SeedPlan(21))
    traj = integrate_mean(gene_sys(3.0, 0.0), grid.points)
    after = grid.points >= 5.0
    ssa = stats.series("X2")[after]
    assert np.max(np.abs(ssa - traj.output[after])) / 5.0 < 0.10
