import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockprop import evogame
from blockprop.abm import (
    Bpim,
    Feedback,
    Gossip,
    Greedy,
    MinerState,
    ProbabilisticFlooding,
    SimTrace,
    average_traces,
    build_network,
    compare_mechanisms,
    draw_block_timeline,
    empirical_aobi,
    make_rng,
    run_simulation,
    step,
    write_trace_csv,
)
from blockprop.aobi import communication_per_round, validation_per_round
from blockprop.params import NetworkParams, ParameterError, PayoffParams, PropagationProbabilities

PROBS = PropagationProbabilities(p_f=0.5, p_e=0.1, p_r=0.3, p_i=0.2)
NET = build_network(400, 3, seed=1)


@settings(max_examples=15, deadline=None)
@given(n=st.integers(10, 300), k=st.integers(2, 6), seed=st.integers(0, 2**32))
def test_graph_is_simple_and_regular(n, k, seed):
    if n * k % 2:
        with pytest.raises(ParameterError):
            build_network(n, k, seed)
        return
    net = build_network(n, k, seed)
    assert net.degree_histogram() == {k: n}
    adj = net.adjacency
    assert not np.any(adj == np.arange(n)[:, None])
    edges = {(a, int(b)) for a in range(n) for b in adj[a]}
    assert all((b, a) in edges for a, b in edges)


def test_graph_is_a_function_of_seed():
    assert np.array_equal(build_network(100, 4, 7).adjacency, build_network(100, 4, 7).adjacency)
    assert not np.array_equal(build_network(100, 4, 7).adjacency, build_network(100, 4, 8).adjacency)
    with pytest.raises(ParameterError):
        build_network(3, 3, 0)


def test_rng_stream_is_philox():
    assert make_rng(3).bit_generator.__class__.__name__ == "Philox"
    assert make_rng(3).random() == make_rng(3).random()


@pytest.mark.parametrize("mixing", ["graph", "annealed"])
@pytest.mark.parametrize("dt", [1.0, 0.25])
def test_step_conserves_miners(mixing, dt):
    rng = make_rng(0)
    states = rng.integers(0, 5, size=NET.n).astype(np.int8)
    res = step(NET, states, PROBS, rng, dt=dt, mixing=mixing)
    assert res.states.shape == states.shape
    assert set(np.unique(res.states)) <= set(range(5))
    # only ignorants can accept the block
    assert np.all(states[res.reached] == MinerState.IGNORANT)
    with pytest.raises(ValueError):
        step(NET, states, PROBS, rng, mixing="lattice")


def test_no_spreaders_means_no_transmissions():
    states = np.zeros(NET.n, dtype=np.int8)
    res = step(NET, states, PROBS.replace(p_e=0.0), make_rng(0))
    assert res.transmissions == 0 and res.reached.size == 0
    assert np.all(res.states == 0)


def test_run_is_deterministic():
    a = run_simulation(NET, PROBS, 20, seed=5)
    b = run_simulation(NET, PROBS, 20, seed=5)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.first_reached, b.first_reached)
    assert np.all(a.counts.sum(axis=1) == NET.n)
    assert a.counts[0, MinerState.SPREADER] == 1


def test_first_reached_counts_accepting_miners():
    t = run_simulation(NET, PROBS.replace(p_e=0.0, p_f=1.0), 40, seed=2, mixing="annealed")
    reached = int((t.first_reached >= 0).sum())
    # with p_e = 0 every miner that left the ignorant state accepted the block
    assert reached == NET.n - t.counts[-1, MinerState.IGNORANT]
    assert t.counts[:, MinerState.UNSPREADER].max() == 0
    assert t.counts[:, MinerState.EVILDOER].max() == 0


def test_stop_on_absorption():
    t = run_simulation(NET, PROBS, 500, seed=3, stop_on_absorption=True, mixing="annealed")
    assert t.complete and t.epochs < 500
    with pytest.raises(ValueError):
        run_simulation(NET, PROBS, 5, seed=0, substeps=0)
    with pytest.raises(ValueError):
        run_simulation(NET, PROBS, -1, seed=0)


def test_gossip_is_constant():
    pol = Gossip(0.3).start(NET, 5)
    pol.update(1, Feedback(np.ones(NET.n, bool), np.ones(NET.n, bool)))
    assert np.all(pol.p == 0.3)


def test_flooding_update():
    pol = ProbabilisticFlooding(0.5, 0.4).start(NET, 5)
    got = np.zeros(NET.n, bool)
    got[:10] = True
    wasted = np.zeros(NET.n, bool)
    wasted[5:20] = True
    pol.update(1, Feedback(got, wasted))
    assert np.allclose(pol.p[:5], 0.6)
    assert np.all(pol.p[5:10] == 0.4)
    assert np.allclose(pol.p[10:20], 0.4 / 1.5)
    assert np.all(pol.p[20:] == 0.4)


def test_greedy_best_response():
    pay = PayoffParams.from_deltas(0.3, 0.5, 0.2)
    pol = Greedy(pay, 0.2).start(NET, 5)
    # forwarding beats not forwarding here for any receiver share
    assert np.all(pol.p == 1.0)
    bad = PayoffParams.from_deltas(0.0, 0.2, -0.5)
    assert np.all(Greedy(bad, 0.5).start(NET, 5).p == 0.0)


def test_bpim_follows_receiver_share():
    pay = PayoffParams(0.6, 0.1, 0.5, 0.25, 0.05, 1.0, 0.1)
    mech = Bpim(pay, 0.2, 0.2)
    series = mech.forwarding_series(30)
    sol = evogame.solve_game(0.2, 0.2, pay, max_epochs=30, run_full=True)
    assert np.array_equal(series, np.clip(sol.y, 0, 1))
    t = run_simulation(NET, PROBS, 30, seed=0, mechanism=mech)
    assert np.allclose(t.p_f_effective, series[:31])


def test_compare_orders_by_label():
    out = compare_mechanisms(NET, [Gossip(0.2), Gossip(0.6, name="loud")], PROBS, 10, [0, 1])
    assert list(out) == ["gossip", "loud"]
    assert np.isclose(out["loud"].forwarding[-1], 0.6)
    assert out["gossip"].densities.shape == (11, 5)


def test_average_traces():
    traces = [run_simulation(NET, PROBS, 5, seed=s) for s in range(3)]
    avg = average_traces(traces)
    assert np.allclose(avg.densities, np.mean([t.densities for t in traces], axis=0))
    assert np.allclose(avg.densities.sum(axis=1), 1.0)


def test_trace_csv_is_reproducible(tmp_path):
    a = write_trace_csv(run_simulation(NET, PROBS, 10, seed=4), tmp_path / "a.csv").read_bytes()
    b = write_trace_csv(run_simulation(NET, PROBS, 10, seed=4), tmp_path / "b.csv").read_bytes()
    assert a == b


def _fixed_hop_trace(n, hops):
    counts = np.array([[n - 1, 1, 0, 0, 0], [0, 0, 0, n, 0]])
    first = np.full(n, hops)
    return SimTrace(counts, np.array([1.0, 1.0]), np.array([0, 0]), first, seed=0)


def test_empirical_aobi_matches_expectation():
    params = NetworkParams()
    trace = _fixed_hop_trace(50, 9)
    expected = 0.5 / params.lambda_rate + 9 * (validation_per_round(params) + communication_per_round(params))
    got = empirical_aobi(trace, params, make_rng(0), n_runs=4000)
    assert abs(got - expected) / expected < 0.01


def test_timeline_fields():
    params = NetworkParams()
    tl = draw_block_timeline(_fixed_hop_trace(20, 3), params, make_rng(1))
    assert np.all(tl.freshest_tx_time <= tl.mining_end)
    assert np.allclose(tl.availability, tl.mining_end + tl.validation + tl.communication)
    assert np.all(tl.aobi > 0)


def test_incomplete_trace_rejected():
    t = run_simulation(NET, PROBS, 1, seed=0)
    with pytest.raises(ValueError, match="consensus"):
        empirical_aobi(t, NetworkParams(), make_rng(0))
    with pytest.raises(ValueError):
        empirical_aobi(_fixed_hop_trace(5, 1), NetworkParams(), make_rng(0), n_runs=0)
