import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockprop import evogame
from blockprop.evogame import GameState, Stability
from blockprop.params import ParameterError, PayoffParams

from oracles import central_difference_jacobian

FIG3A = PayoffParams.from_deltas(0.3, 0.5, 0.2, epsilon=0.1, punishment_risk=1.0)
FIG3C = PayoffParams.from_deltas(0.1, 0.2, -0.5, epsilon=0.1, punishment_risk=1.0)

payoffs = st.builds(PayoffParams.from_deltas, st.floats(0, 1), st.floats(0.01, 1), st.floats(-1, 1),
                    st.floats(0.01, 1), st.floats(0, 2))
interior = st.floats(0.01, 0.99)


@given(pay=payoffs, x=st.floats(0, 1), y=st.floats(0, 1))
def test_rhs_is_share_times_revenue_gap(pay, x, y):
    rev = evogame.expected_revenues(GameState(x, y), pay)
    dx, dy = evogame.replicator_rhs(GameState(x, y), pay)
    assert np.isclose(dx, x * (1 - x) * (rev.g1y - rev.g1n), atol=1e-12)
    assert np.isclose(dy, y * (1 - y) * (rev.g2y - rev.g2n), atol=1e-12)
    assert np.isclose(rev.g1, x * rev.g1y + (1 - x) * rev.g1n)


@settings(max_examples=50)
@given(pay=payoffs, x=interior, y=interior)
def test_jacobian_matches_finite_differences(pay, x, y):
    num = np.array(central_difference_jacobian(lambda a, b: evogame._rhs_xy(a, b, pay), x, y))
    ana = evogame.jacobian(GameState(x, y), pay)
    assert np.allclose(ana, num, rtol=1e-6, atol=1e-8)


def test_vertices_are_fixed_points():
    for x, y in [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0.37)]:
        assert evogame.replicator_rhs(GameState(x, y), FIG3A) == (0.0, 0.0)


@pytest.mark.parametrize("det,tr,expected", [
    (1.0, -1.0, Stability.ESS), (1.0, 1.0, Stability.UNSTABLE), (-1.0, 0.5, Stability.SADDLE),
    (0.0, 1.0, Stability.SADDLE), (0.0, 0.0, Stability.DEGENERATE), (1.0, 0.0, Stability.DEGENERATE)])
def test_classify(det, tr, expected):
    assert evogame.classify(det, tr) is expected


@given(pay=payoffs)
def test_equilibrium_classification(pay):
    reps = {(r.point.x, r.point.y): r for r in evogame.classify_equilibria(pay)}
    assert reps[(0.0, 0.0)].classification is Stability.SADDLE or pay.delta_u == pay.eps_r
    assert reps[(1.0, 0.0)].classification is Stability.SADDLE
    b = pay.delta_i + pay.delta_u
    assert (reps[(1.0, 1.0)].classification is Stability.ESS) == (b > 0)


def test_closed_forms_at_one_one_match_jacobian():
    r = evogame.classify_equilibria(FIG3A)[2]
    assert np.isclose(r.det_j, np.linalg.det(r.jacobian))
    assert np.isclose(r.tr_j, np.trace(r.jacobian))
    assert r.classification is Stability.ESS


def test_one_zero_keeps_true_jacobian():
    r = evogame.classify_equilibria(FIG3A)[1]
    assert r.det_j == 0.0
    true_det = (FIG3A.eps_r - FIG3A.delta_u) * (FIG3A.delta_i + FIG3A.delta_u)
    assert np.isclose(np.linalg.det(r.jacobian), true_det)


def test_threshold():
    assert np.isclose(evogame.receiver_threshold(FIG3A), (-0.2 + 0.1) / 0.9)
    assert evogame.receiver_threshold(FIG3C) > 1


def test_fig3a_converges_to_full_forwarding():
    for s in evogame.start_grid(9):
        sol = evogame.solve_game(s.x, s.y, FIG3A, max_epochs=500)
        assert sol.converged and sol.steps <= 10_000
        assert abs(sol.x[-1] - 1) < 1e-3 and abs(sol.y[-1] - 1) < 1e-3


def test_fig3c_propagators_quit_and_receivers_freeze():
    sol = evogame.solve_game(0.5, 0.5, FIG3C, max_epochs=500)
    assert sol.x[-1] < 1e-3
    # x = 0 is a line of rest points, so y stops where it is when x dies out
    assert 0.3 < sol.y[-1] < 0.5


def test_run_full_and_cap():
    sol = evogame.solve_game(0.2, 0.2, FIG3A, max_epochs=7, run_full=True)
    assert list(sol.epochs) == list(range(8))
    assert sol.steps == 7 * evogame.STEPS_PER_EPOCH
    capped = evogame.solve_game(0.2, 0.2, FIG3A, max_epochs=2)
    assert not capped.converged
    with pytest.raises(ParameterError):
        evogame.solve_game(1.2, 0.2, FIG3A)


def test_start_grid():
    g = evogame.start_grid(9)
    assert len(g) == 81
    assert {s.x for s in g} == {j / 10 for j in range(1, 10)}


def test_writers(tmp_path):
    sol = evogame.solve_game(0.2, 0.2, FIG3A, max_epochs=3, run_full=True)
    text = evogame.write_solution_csv(sol, tmp_path / "g.csv").read_text().splitlines()
    assert text[0] == "epoch,x,y" and len(text) == 5
    data = json.loads(evogame.write_equilibria_json(evogame.classify_equilibria(FIG3A),
                                                     tmp_path / "e.json").read_text())
    assert [d["class"] for d in data] == ["Saddle", "Saddle", "ESS"]
