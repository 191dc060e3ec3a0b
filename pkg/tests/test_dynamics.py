import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfreeze.distances import BONA_FIDE, DistanceKind
from qfreeze.dynamics import (
    SURFACE_ROLES, RateTable, detect_freezing, freezing_surface_point, on_surface, run_trajectory,
    surface_point, threshold_time, trajectory_csv, verify_closest_classical, verify_theorem1,
)
from qfreeze.errors import DegenerateInput, InvalidParam, InvalidTriple
from qfreeze.geometry import OracleBudget, closest_classical_axis

from strategies import surface_points

K = DistanceKind
REF_STATE = (1.0, -0.6, 0.6)
T_STAR = 0.5 * math.log(1 / 0.6)


def test_threshold_time_values():
    assert threshold_time(1, 0.6, 1) == pytest.approx(0.255413, abs=1e-6)
    assert threshold_time(0.5, 0.5, 1) == 0.0
    assert threshold_time(0.8, 0.2, 0.5) == pytest.approx(1.386294, abs=1e-6)
    assert threshold_time(-0.8, 0.2, 0.5) == threshold_time(0.8, -0.2, 0.5)


def test_threshold_time_degenerate():
    with pytest.raises(DegenerateInput):
        threshold_time(0, 0.3, 1)
    with pytest.raises(DegenerateInput):
        threshold_time(0.3, 0, 1)
    with pytest.raises(InvalidParam):
        threshold_time(0.3, 0.2, 0)


@given(surface_points())
def test_surface_points_are_valid_states(pt):
    c, strict = freezing_surface_point(*pt)
    assert c.is_valid()
    assert strict == (abs(pt[0]) > abs(pt[1]))
    assert on_surface(c)


def test_freezing_surface_out_of_range():
    with pytest.raises(InvalidParam):
        freezing_surface_point(1.2, 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_surface_is_invariant_under_its_noise(k):
    from qfreeze.channels import DecoherenceParams, evolve_triple
    c = surface_point(k, 0.8, 0.5)
    for r in (0.9, 0.5, 0.1):
        assert on_surface(evolve_triple(c, DecoherenceParams(k, r)), k)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_freezing_on_every_axis(k):
    f, _ = SURFACE_ROLES[k]
    traj = run_trajectory(surface_point(k, 1.0, 0.6), 1.0, k=k, t_max=1.0, steps=41, kinds=[K.BURES2])
    rep = detect_freezing(traj, K.BURES2)
    assert rep.plateau_end == pytest.approx(T_STAR)
    assert rep.sudden_change_detected


@pytest.fixture(scope="module")
def ref_traj():
    return run_trajectory(REF_STATE, 1.0, k=3, t_max=2.5, steps=201)


def test_t_star_is_grid_point(ref_traj):
    assert ref_traj.t_star == pytest.approx(T_STAR)
    assert np.any(ref_traj.times == ref_traj.t_star)
    assert len(ref_traj.times) == 202


@pytest.mark.parametrize("kind", BONA_FIDE)
def test_ref_freezing(ref_traj, kind):
    rep = detect_freezing(ref_traj, kind)
    assert rep.plateau_end == pytest.approx(T_STAR)
    assert rep.max_plateau_deviation <= 1e-6
    assert rep.sudden_change_detected
    q = ref_traj.q_values[kind]
    assert q[-1] <= 0.05 * q[0]


def test_hs_does_not_freeze(ref_traj):
    rep = detect_freezing(ref_traj, K.HS2)
    assert rep.plateau_steps == 1
    assert not rep.sudden_change_detected
    half = closest_classical_axis((math.exp(-T_STAR), -0.6 * math.exp(-T_STAR), 0.6), K.HS2).value
    assert half == pytest.approx(0.144, abs=1e-9)


def test_concurrence_and_sudden_death(ref_traj):
    expect = np.maximum(0, 0.8 * np.exp(-2 * ref_traj.times) - 0.2)
    assert np.max(np.abs(ref_traj.concurrence - expect)) <= 1e-9
    first_zero = ref_traj.times[np.argmax(ref_traj.e_bures == 0)]
    step = ref_traj.times[1] - ref_traj.times[0]
    assert abs(first_zero - math.log(2)) <= step
    assert np.all(ref_traj.e_bures[ref_traj.times >= first_zero] == 0)


def test_regimes(ref_traj):
    reg = np.array(ref_traj.regimes)
    assert set(reg[ref_traj.times < T_STAR]) == {"frozen"}
    assert set(reg[ref_traj.times > T_STAR + 1e-9]) == {"decaying"}


def test_classical_trajectory():
    traj = run_trajectory((0, 0, 0), 1.0, steps=5, kinds=list(K))
    assert set(traj.regimes) == {"classical"}
    for kind in K:
        rep = detect_freezing(traj, kind)
        assert rep.classical and not rep.sudden_change_detected


def test_c3_zero_surface_state_is_classical():
    traj = run_trajectory((0.7, 0, 0), 1.0, steps=5, kinds=[K.TRACE])
    assert traj.t_star is None
    assert set(traj.regimes) == {"classical"}


def test_off_surface_state_decays_immediately():
    traj = run_trajectory((0.5, 0.2, 0.3), 1.0, t_max=1.0, steps=21, kinds=[K.TRACE])
    assert traj.t_star is None
    assert "frozen" not in traj.regimes


def test_invalid_initial_state():
    with pytest.raises(InvalidTriple):
        run_trajectory((2, 0, 0), 1.0)
    with pytest.raises(InvalidParam):
        run_trajectory(REF_STATE, -1.0)


def test_rate_table_linear_reproduces_markov():
    ts = np.linspace(0, 2, 11)
    rate = RateTable(ts, 2 * ts)
    a = run_trajectory(REF_STATE, 1.0, t_max=2, steps=41, kinds=[K.TRACE], rate=rate)
    b = run_trajectory(REF_STATE, 1.0, t_max=2, steps=41, kinds=[K.TRACE])
    assert np.allclose(a.times, b.times)
    assert np.allclose(a.q_values[K.TRACE], b.q_values[K.TRACE], atol=1e-12)


def test_rate_table_with_backflow():
    rate = RateTable([0, 1, 2, 3], [0, 1.0, 0.2, 2.0])
    assert rate(1.5) == pytest.approx(0.6)
    assert rate.inverse(0.5) == pytest.approx(0.5)
    assert rate.inverse(1.5) == pytest.approx(2.0 + 1.3 / 1.8)
    assert rate.inverse(5.0) is None


def test_rate_table_validation(tmp_path):
    with pytest.raises(InvalidParam):
        RateTable([0, 0], [0, 1])
    with pytest.raises(InvalidParam):
        RateTable([0, 1], [0, -1])
    path = tmp_path / "rate.csv"
    path.write_text("t,Gamma\n0,0\n1,0.5\n2,2\n")
    rate = RateTable.from_csv(path)
    assert rate(1.5) == pytest.approx(1.25)


def test_trajectory_csv_format():
    traj = run_trajectory(REF_STATE, 1.0, t_max=0.5, steps=3, kinds=[K.TRACE])
    text = trajectory_csv(traj)
    lines = text.split("\n")
    assert lines[0] == "t,c1,c2,c3,Q_trace,Q_bures2,Q_hellinger2,Q_relent,Q_hs2,E_bures2,regime"
    assert lines[1].startswith("0,1,-0.6,0.6,0.3,,,,,")
    assert "\r" not in text


@pytest.mark.parametrize("kind", BONA_FIDE)
def test_theorem1_holds(kind):
    rep = verify_theorem1(kind, 7)
    assert rep["max_dev_identity1"] <= 1e-9 and rep["max_dev_identity2"] <= 1e-9


def test_theorem1_hs_witness():
    rep = verify_theorem1(K.HS2, 11)
    assert rep["max_dev_identity1"] == pytest.approx(0.95 ** 4 / 4)
    assert rep["max_dev_identity1"] >= 0.08


@given(surface_points(lim=0.95))
@settings(max_examples=30)
def test_hs_deviation_is_analytic(pt):
    from qfreeze.distances import distance
    from qfreeze.states import bd_to_density
    c1, c3 = pt
    lhs = distance(K.HS2, bd_to_density((c1, -c1 * c3, c3)), bd_to_density((c1, 0, 0)))
    rhs = distance(K.HS2, bd_to_density((0, 0, c3)), bd_to_density((0, 0, 0)))
    assert lhs - rhs == pytest.approx(c1 ** 2 * c3 ** 2 / 4, abs=1e-12)


@pytest.mark.parametrize("kind", list(K))
def test_lemma_suite_without_oracle(kind):
    rep = verify_closest_classical(kind, 5, run_oracle=False)
    for name, check in rep["checks"].items():
        assert check["passed"], (name, check)
    assert rep["exempt"] == (kind is K.HS2)


def test_lemma_suite_with_small_oracle():
    rep = verify_closest_classical(K.TRACE, 2, OracleBudget(basis_grid=6), seed=3)
    assert rep["passed"]
    assert "oracle_agreement" in rep["checks"]
