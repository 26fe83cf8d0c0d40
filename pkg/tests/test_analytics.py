import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autoevent.analytics import (
    AnalyticsError, angle_bin, pass_angle_profile, possession_heatmap, wrap_angle,
)
from autoevent.events import EventRecord
from autoevent.geometry import build_pitch
from autoevent.ingest import FrameSeries
from autoevent.possession import PossessionConfig, run_possession

from conftest import run_script, simulate

PITCH = build_pitch(105, 68, {"A": "+x", "B": "-x"})


def series(ball, players, teams=("A", "B")):
    ball = np.asarray(ball, dtype=float)
    pos = np.asarray(players, dtype=float)
    n = len(ball)
    return FrameSeries(
        frame=np.arange(n), period=np.ones(n, int), timestamp=np.arange(n) / 25.0, ball=ball,
        in_play=np.ones(n, bool), player_ids=tuple(f"p{j}" for j in range(pos.shape[1])), teams=tuple(teams),
        roles=("outfield",) * pos.shape[1], positions=pos, tracked=np.isfinite(pos).all(axis=2), sample_rate=25.0,
    )


def test_stationary_holder_fills_one_cell():
    # p0 stands on the ball for 100 frames, p1 is far away
    f = series([[10.2, 3.1]] * 100, [[[10.5, 3.1], [-30, 0]]] * 100)
    tl = run_possession(f, PossessionConfig()).timeline
    h = possession_heatmap(tl, f, "p0", pitch=PITCH)
    assert h.counts.sum() == h.frames == 100
    assert h.counts.max() == 100
    pm = possession_heatmap(tl, f, "p0", pitch=PITCH, normalization="per-minute")
    assert pm.values().max() == pytest.approx(100 / (100 / 25 / 60))


def test_in_possession_is_subset_of_in_play():
    _, _, _, res = run_script("dribble")
    tl = res.possession.timeline
    for pid in ("A8", "A7", "B4"):
        a = possession_heatmap(tl, res.frames, pid, pitch=PITCH)
        b = possession_heatmap(tl, res.frames, pid, "all-in-play", pitch=PITCH)
        assert (a.counts <= b.counts).all()
        assert b.counts.sum() == b.frames == int(res.frames.in_play.sum())


def test_left_half_player_leaves_right_half_empty():
    _, _, _, res = run_script("interception")
    pid = "A2"
    assert (res.frames.positions[:, res.frames.player_index(pid), 0] < 0).all()
    h = possession_heatmap(res.possession.timeline, res.frames, pid, "all-in-play", grid=(20, 10), pitch=PITCH)
    assert h.counts[10:].sum() == 0 and h.counts[:10].sum() > 0


def test_off_pitch_positions_are_clipped():
    f = series([[0, 0]] * 5, [[[60.0, 40.0], [-70.0, -50.0]]] * 5)
    tl = run_possession(f, PossessionConfig()).timeline
    a = possession_heatmap(tl, f, "p0", "all-in-play", grid=(4, 3), pitch=PITCH)
    b = possession_heatmap(tl, f, "p1", "all-in-play", grid=(4, 3), pitch=PITCH)
    assert a.counts[3, 2] == 5 and b.counts[0, 0] == 5


def test_heatmap_argument_errors():
    _, _, _, res = run_script("dribble")
    tl = res.possession.timeline
    with pytest.raises(AnalyticsError, match="unknown player"):
        possession_heatmap(tl, res.frames, "Z9")
    with pytest.raises(AnalyticsError):
        possession_heatmap(tl, res.frames, "A8", mode="sometimes")
    with pytest.raises(AnalyticsError):
        possession_heatmap(tl, res.frames, "A8", grid=(0, 4))
    with pytest.raises(AnalyticsError, match="unknown player"):
        pass_angle_profile(res.events, res.frames, "Z9")


def test_heatmap_serialization():
    f = series([[0, 0]] * 5, [[[1.0, 1.0], [9.0, 9.0]]] * 5)
    h = possession_heatmap(run_possession(f, PossessionConfig()).timeline, f, "p0", "all-in-play", grid=(3, 2))
    d = h.to_dict()
    assert (d["nx"], d["ny"], d["frames"]) == (3, 2, 5)
    assert len(h.to_csv().splitlines()) == 1 + 6


def straight_pass(start, direction, n=30, speed=0.5, team="A"):
    """Ball leaves p0 from ``start`` along ``direction``; p1 (same team) receives at the end."""
    d = np.asarray(direction, float) / np.hypot(*direction)
    ball = np.asarray(start, float) + np.arange(n)[:, None] * speed * d
    players = np.repeat(np.asarray([[start, ball[-1]]], float), n, axis=0)
    f = series(ball, players, (team, team))
    rows = [EventRecord(0, 1, 0.0, "p0", team, "possession", "pass"),
            EventRecord(n - 1, 1, (n - 1) / 25, "p1", team, "possession", "reception")]
    return f, rows


def test_pass_toward_goal_has_zero_angle():
    f, rows = straight_pass((0, 0), (1, 0))
    r = pass_angle_profile(rows, f, "p0", PITCH).records[0]
    assert r.outgoing == pytest.approx(0.0) and r.outcome == "complete"
    assert r.distance == pytest.approx(29 * 0.5)
    assert r.progress == pytest.approx(0.5)


def test_progress_from_own_endline_is_zero():
    f, rows = straight_pass((-52.5, 0), (1, 0))
    assert pass_angle_profile(rows, f, "p0", PITCH).records[0].progress == 0.0
    # a team attacking -x has its own endline at +x
    f, rows = straight_pass((52.5, 0), (-1, 0), team="B")
    r = pass_angle_profile(rows, f, "p0", PITCH).records[0]
    assert r.progress == 0.0 and r.outgoing == pytest.approx(math.pi)


def test_pass_travel_distance_between_zone_edges():
    # A7 at (-20,-8) passes 22 m straight up to A8: the ball travels
    # between the two possession zones, 22 - 2 * r_pz, plus one frame step
    acts = [{"type": "set_piece", "kind": "kickoff", "executor": "A10"}, {"type": "pass", "to": "A7"},
            {"type": "move", "duration": 3.0, "moves": {"A8": [-20, 14]}},
            {"type": "pass", "to": "A8", "speed": 2}, {"type": "hold", "duration": 1.0}, {"type": "end"}]
    script, _, _, res = simulate(acts)
    (r,) = pass_angle_profile(res.events, res.frames, "A7", script.pitch()).records
    assert r.distance == pytest.approx(20.0, abs=0.1)
    assert r.outgoing == pytest.approx(math.pi / 2)
    # the kickoff pass arrived from the center spot
    assert r.incoming == pytest.approx(math.atan2(-8, -20), abs=1e-6)
    assert r.outcome == "complete"


def test_incomplete_when_opponent_gains():
    _, _, _, res = run_script("interception")
    recs = pass_angle_profile(res.events, res.frames, "A8", PITCH).records
    assert [r.outcome for r in recs] == ["incomplete"]


@settings(max_examples=80)
@given(st.floats(-math.pi, math.pi), st.floats(-20, 20), st.floats(-15, 15))
def test_mirror_in_y_negates_angles(a, x, y):
    f, rows = straight_pass((x, y), (math.cos(a), math.sin(a)))
    g, _ = straight_pass((x, -y), (math.cos(a), -math.sin(a)))
    ra = pass_angle_profile(rows, f, "p0", PITCH).records[0]
    rb = pass_angle_profile(rows, g, "p0", PITCH).records[0]
    assert abs(wrap_angle(ra.outgoing + rb.outgoing)) < 1e-9
    assert ra.progress == pytest.approx(rb.progress) and ra.distance == pytest.approx(rb.distance)


@given(st.floats(-50, 50))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
    assert 0 <= angle_bin(w) < 16
