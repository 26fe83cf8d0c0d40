import io
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autoevent.ingest import (
    FrameSeries, ParseError, SmoothingConfig, debounce_status, fill_ball_gaps, infer_ball_status,
    interpolate_player_gaps, parse_generic_csv, parse_jsonl_frames, parse_tracking, serialize_jsonl_frames, smooth_ball_positions,
    smooth_run, write_generic_csv,
)
from autoevent.synth import generate_match, load_bundled_script

HEADER = "frame,period,timestamp,ball_x,ball_y,player_id,team,role,x,y,player_id,team,role,x,y\n"


def csv_rows(n=5, ball="1.0,2.0", second="b1,B,goalkeeper,-50,0"):
    return HEADER + "".join(f"{i},1,{i / 25},{ball},a1,A,outfield,{i * 0.1},0,{second}\n" for i in range(n))


def test_generic_csv_basic():
    f = parse_generic_csv(io.StringIO(csv_rows()))
    assert len(f) == 5 and f.player_ids == ("a1", "b1") and f.teams == ("A", "B")
    assert f.roles == ("outfield", "goalkeeper")
    assert f.sample_rate == 25.0
    assert not f.status_given and f.in_play.all()
    np.testing.assert_allclose(f.positions[3, 0], [0.3, 0.0])


def test_units_header_scales_to_meters():
    f = parse_generic_csv(io.StringIO("# units=cm\n# sample_rate=10\n" + csv_rows(ball="100,200")))
    np.testing.assert_allclose(f.ball[0], [1.0, 2.0])
    assert f.sample_rate == 10.0


def test_wrong_units_rejected():
    with pytest.raises(ParseError, match="units"):
        parse_generic_csv(io.StringIO(csv_rows(ball="4000,100")))


def test_missing_ball_and_untracked_player():
    text = HEADER + "0,1,0.0,,,a1,A,outfield,,,b1,B,outfield,1,1\n1,1,0.04,0,0,a1,A,outfield,0,0,b1,B,outfield,1,1\n"
    f = parse_generic_csv(io.StringIO(text))
    assert not f.ball_present[0] and f.ball_present[1]
    assert not f.tracked[0, 0] and f.tracked[1, 0]


@pytest.mark.parametrize("text,column", [
    (HEADER + "0,1,0.0,1,,a1,A,outfield,0,0\n", "ball_y"),
    (HEADER + "0,1,0.0,1,1,a1,A,striker,0,0\n", None),
    (HEADER + "0,1,abc,1,1,a1,A,outfield,0,0\n", "timestamp"),
    (HEADER + "0,1,0.0,1,1,a1,A,outfield,0,0,a1,A,outfield,1,1\n", None),
])
def test_malformed_rows_name_frame(text, column):
    with pytest.raises(ParseError) as exc:
        parse_generic_csv(io.StringIO(text))
    assert exc.value.frame == 0
    if column:
        assert exc.value.column == column


def test_non_monotone_frames():
    text = HEADER + "1,1,0.04,0,0,a1,A,outfield,0,0\n0,1,0.0,0,0,a1,A,outfield,0,0\n"
    with pytest.raises(ParseError, match="strictly increasing"):
        parse_generic_csv(io.StringIO(text))


def test_team_change_rejected():
    text = HEADER + "0,1,0.0,0,0,a1,A,outfield,0,0\n1,1,0.04,0,0,a1,B,outfield,0,0\n"
    with pytest.raises(ParseError, match="changes team"):
        parse_generic_csv(io.StringIO(text))


def test_jsonl_meta_and_errors():
    text = ('{"meta": {"sample_rate": 25, "units": "m", "attack": {"A": 1, "B": -1}}}\n'
            '{"frame": 0, "period": 1, "timestamp": 0.0, "ball_x": 0, "ball_y": 0, "ball_status": "dead",'
            ' "players": [{"player_id": "a", "team": "A", "x": 1, "y": 2, "tracked": false}]}\n')
    f = parse_jsonl_frames(io.StringIO(text))
    assert f.meta["attack"] == {"A": 1, "B": -1}
    assert f.status_given and not f.in_play[0] and not f.tracked[0, 0]
    with pytest.raises(ParseError, match="line 2"):
        parse_jsonl_frames(io.StringIO(text.splitlines()[0] + "\n{oops\n"))
    with pytest.raises(ParseError, match="unknown format"):
        parse_tracking(io.StringIO(text), "xml")


def test_round_trip_both_formats():
    frames, _ = generate_match(load_bundled_script("two_periods"))
    a = parse_jsonl_frames(io.StringIO(serialize_jsonl_frames(frames)))
    buf = io.StringIO()
    write_generic_csv(frames, buf)
    b = parse_generic_csv(io.StringIO(buf.getvalue()))
    for g in (a, b):
        assert g.player_ids == frames.player_ids and g.roles == frames.roles
        np.testing.assert_allclose(g.positions, frames.positions, atol=5e-4)
        np.testing.assert_array_equal(g.in_play, frames.in_play)
        np.testing.assert_array_equal(g.period, frames.period)


def test_jsonl_serialization_is_stable():
    frames, _ = generate_match(load_bundled_script("penalty"))
    text = serialize_jsonl_frames(frames)
    assert serialize_jsonl_frames(parse_jsonl_frames(io.StringIO(text))) == text


@given(st.lists(st.booleans(), min_size=1, max_size=80), st.integers(0, 8))
def test_debounce_properties(status, k):
    out = debounce_status(np.array(status), k)
    assert out.shape == (len(status),)
    # idempotent, and no run shorter than k survives unless it is the only run
    np.testing.assert_array_equal(debounce_status(out, k), out)
    change = np.flatnonzero(np.diff(out.astype(int))) + 1
    lengths = np.diff(np.concatenate(([0], change, [len(out)])))
    if len(lengths) > 1 and k > 1:
        assert lengths.min() >= k


def test_debounce_shortest_run_first():
    # the single dead frame is merged before the 2-frame live run
    s = np.array([1] * 10 + [0] * 10 + [1] * 2 + [0] + [1] * 10, dtype=bool)
    out = debounce_status(s, 5)
    assert out[:10].all() and not out[10:20].any() and out[20:].all()
    # ties go to the earliest run
    np.testing.assert_array_equal(debounce_status(np.array([False, True]), 2), [True, True])


def test_status_inferred_from_ball_presence():
    ball = ["1,1"] * 10 + [","] * 10 + ["1,1"] * 2 + [","] * 10 + ["1,1"] * 10
    text = HEADER.replace(",player_id,team,role,x,y", "", 1) + "".join(
        f"{i},1,{i / 25},{b},a1,A,outfield,0,0\n" for i, b in enumerate(ball))
    f = infer_ball_status(parse_generic_csv(io.StringIO(text)), debounce=5)
    # the 2-frame flicker of presence inside the dead stretch merges into it
    assert f.in_play[:10].all() and not f.in_play[10:32].any() and f.in_play[32:].all()


def test_ball_gap_interpolation_inside_play_only():
    frames, _ = generate_match(load_bundled_script("penalty"))
    g = frames.ball.copy()
    live = np.flatnonzero(frames.in_play)
    g[live[40:43]] = np.nan
    holey = fill_ball_gaps(replace(frames, ball=g))
    assert np.isfinite(holey.ball[frames.in_play]).all()


def test_player_gap_limits():
    pos = np.zeros((30, 1, 2))
    pos[:, 0, 0] = np.arange(30)
    pos[5:8] = np.nan  # short gap: filled
    pos[12:25] = np.nan  # long gap: kept
    f = FrameSeries(frame=np.arange(30), period=np.ones(30, int), timestamp=np.arange(30) / 25,
                     ball=np.zeros((30, 2)), in_play=np.ones(30, bool), player_ids=("p",), teams=("A",),
                     roles=("outfield",), positions=pos, tracked=np.isfinite(pos).all(axis=2), sample_rate=25.0)
    out = interpolate_player_gaps(f, max_gap=10)
    np.testing.assert_allclose(out.positions[5:8, 0, 0], [5, 6, 7])
    assert np.isnan(out.positions[12:25]).all()
    assert not out.tracked[5:8].any()


@settings(max_examples=60)
@given(st.integers(7, 200), st.integers(0, 2), st.integers(0, 10_000))
def test_savgol_exact_on_quadratics(n, deg, seed):
    rng = np.random.default_rng(seed)
    t = np.arange(n) / 25.0
    track = np.stack([np.polyval(rng.uniform(-20, 20, deg + 1), t) for _ in range(2)], axis=1)
    out = smooth_run(track, SmoothingConfig())
    assert np.abs(out[3:n - 3] - track[3:n - 3]).max(initial=0.0) <= 1e-9


def test_smoothing_respects_run_boundaries():
    frames, _ = generate_match(load_bundled_script("penalty"))
    sm = smooth_ball_positions(frames)
    dead = ~frames.in_play
    np.testing.assert_array_equal(np.isnan(sm.ball[dead]), np.isnan(frames.ball[dead]))
    off = smooth_ball_positions(frames, SmoothingConfig(enabled=False))
    np.testing.assert_array_equal(off.ball, frames.ball)


@pytest.mark.parametrize("window,order", [(6, 2), (3, 3), (0, 0)])
def test_smoothing_config_validation(window, order):
    with pytest.raises(ValueError):
        SmoothingConfig(polynomial_order=order, window=window)
