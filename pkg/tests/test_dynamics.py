import numpy as np
import pytest

from consensus_bounds.bounds import solve_bounds
from consensus_bounds.dynamics import (GammaSpec, NotConverged, check_assumption2,
                                       gamma_stubbornness, gamma_uniform_random, simulate, step)
from consensus_bounds.netgraph import Network, random_network

from conftest import pair


def one_neighbour(n=1):
    return pair() if n == 1 else None


def test_stubbornness_peak_and_zeros():
    net = pair()
    assert np.allclose(gamma_stubbornness([0.5, 0.5], net), 0.25)
    assert np.array_equal(gamma_stubbornness([0.0, 1.0], net), [0.0, 0.0])


def test_stubbornness_three_neighbours():
    a = np.ones((4, 4)) - np.eye(4)
    g = gamma_stubbornness(np.full(4, 0.3), Network(a))
    assert np.allclose(g, 0.07, atol=1e-15)


def test_spec_validation():
    for lo, hi in ((0.0, 0.2), (0.3, 0.2), (0.1, 1.5)):
        with pytest.raises(ValueError):
            GammaSpec(lo, hi)
    with pytest.raises(ValueError):
        GammaSpec(0.1, 0.2, model="linear")
    with pytest.raises(ValueError):
        GammaSpec(0.1, 0.2, model="constant")


def test_uniform_gains_degenerate_interval(rng):
    spec = GammaSpec(0.2, 0.2, "uniform")
    assert np.allclose(gamma_uniform_random(spec, pair(), rng), 0.2)


def test_uniform_gains_range_and_mean(rng):
    spec = GammaSpec(0.03, 0.25, "uniform")
    draws = np.array([gamma_uniform_random(spec, pair(), rng) for _ in range(5000)]).ravel()
    assert draws.min() >= 0.03 and draws.max() <= 0.25
    sigma = (0.22 / np.sqrt(12)) / np.sqrt(draws.size)
    assert abs(draws.mean() - 0.14) <= 3 * sigma


def test_step_consensus_fixed_point(net12):
    x = np.full(12, 0.37)
    assert np.array_equal(step(x, np.full(12, 0.1), net12), x)


def test_step_pair_arithmetic():
    assert np.allclose(step([0.0, 1.0], np.array([0.25, 0.25]), pair()), [0.25, 0.75])


def test_step_componentwise(rng):
    net = random_network(8, 2, 0.2, seed=4)
    x, g = rng.random(8), rng.uniform(0.01, 0.2, 8)
    a = net.adjacency
    loop = np.array([x[i] + g[i] * sum(a[i, j] * (x[j] - x[i]) for j in range(8))
                     for i in range(8)])
    assert np.allclose(step(x, g, net), loop, atol=1e-14, rtol=0)


def test_already_at_consensus(net12):
    rec = simulate(net12, np.full(12, 0.7), GammaSpec(0.09, 0.25))
    assert rec.steps == 0 and rec.alpha == 0.7 and rec.converged


def test_symmetric_pair_constant_gain():
    spec = GammaSpec(0.2, 0.2, "constant", gamma=np.array([0.2, 0.2]))
    rec = simulate(pair(), np.array([0.0, 1.0]), spec)
    assert abs(rec.alpha - 0.5) <= 1e-9


@pytest.mark.parametrize("seed", range(3))
def test_consensus_inside_initial_range(seed):
    rng = np.random.default_rng(seed)
    net = random_network(20, 2, 0.2, seed=seed)
    x0 = rng.uniform(0.1, 0.9, 20)
    rec = simulate(net, x0, GammaSpec(0.09, 0.25))
    assert x0.min() <= rec.alpha <= x0.max()
    assert rec.converged and rec.spread <= 1e-9


def test_constant_gain_consensus_is_weighted_average(net30, rng):
    from consensus_bounds.spectral import left_null_eigenvector, scaled_eigenvector
    lo, hi = GammaSpec(0.03, 0.25).bounds(net30)
    gamma = rng.uniform(lo, hi)
    x0 = rng.random(30)
    rec = simulate(net30, x0, GammaSpec(0.03, 0.25, "constant", gamma=gamma))
    expect = scaled_eigenvector(left_null_eigenvector(net30).nu, gamma) @ x0
    assert abs(rec.alpha - expect) <= 1e-8


def test_not_converged_carries_record(net12, rng):
    with pytest.raises(NotConverged) as info:
        simulate(net12, rng.random(12), GammaSpec(0.09, 0.25), max_steps=3)
    assert info.value.record.steps == 3
    rec = simulate(net12, rng.random(12), GammaSpec(0.09, 0.25), max_steps=3, raise_on_fail=False)
    assert not rec.converged


def test_assumption_flags_at_consensus(net12):
    v = np.full(12, 1 / 12)
    assert check_assumption2(v, v, np.full(12, 0.1), net12, np.full(12, 0.4)) == (True, True)


def test_assumption_flags_pair_construction():
    # L x = [-1, 1] for x = [0, 1]; with gamma = [0.1, 0.3] the drift is [-0.1, 0.3]
    gamma = np.array([0.1, 0.3])
    x = np.array([0.0, 1.0])
    under = np.array([0.25, 0.75])    # 0.25*-0.1 + 0.75*0.3 = +0.2 -> violated
    over = np.array([0.9, 0.1])       # 0.9*-0.1 + 0.1*0.3 = -0.06 -> violated
    assert check_assumption2(under, over, gamma, pair(), x) == (False, False)
    assert check_assumption2(over, under, gamma, pair(), x) == (True, True)


def test_theta_traces_and_flags_shape(net30, rng):
    x0 = rng.uniform(0.1, 0.9, 30)
    spec = GammaSpec(0.09, 0.25)
    res = solve_bounds(net30, x0, spec)
    rec = simulate(net30, x0, spec, res.nu_under, res.nu_over)
    assert rec.states.shape == (rec.steps + 1, 30)
    assert rec.flags.shape == (rec.steps, 2)
    assert rec.theta_under.shape == rec.theta_over.shape == (rec.steps + 1,)
    assert abs(rec.theta_under[0] - res.alpha_min) <= 1e-12
    assert abs(rec.theta_over[0] - res.alpha_max) <= 1e-12
    assert abs(rec.theta_under[-1] - rec.alpha) <= 1e-8
    if rec.assumption_held:
        assert np.all(np.diff(rec.theta_under) >= -1e-10)
        assert np.all(np.diff(rec.theta_over) <= 1e-10)


def test_sparse_path_matches_dense(rng):
    net = random_network(220, 2, 0.2, seed=1)
    x0 = rng.uniform(0.1, 0.9, 220)
    rec = simulate(net, x0, GammaSpec(0.09, 0.25), tol=1e-6, record_states=False)
    x = x0.copy()
    lap = net.laplacian
    n_i = net.neighbor_counts
    lo, hi = 0.09 / n_i, 0.25 / n_i
    for _ in range(rec.steps):
        x = x - np.clip(x * (1 - x) / n_i, lo, hi) * (lap @ x)
    assert np.allclose(x, rec.x_final, atol=1e-12)


def test_input_validation(net12):
    with pytest.raises(ValueError):
        simulate(net12, np.full(11, 0.5), GammaSpec(0.1, 0.2))
    with pytest.raises(ValueError):
        simulate(net12, np.full(12, 1.5), GammaSpec(0.1, 0.2))
    with pytest.raises(ValueError):
        simulate(net12, np.full(12, 0.5), GammaSpec(0.1, 0.2, "uniform"))
