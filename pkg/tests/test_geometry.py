import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from autoevent.geometry import (
    GOAL_HALF_WIDTH, PitchConfigError, Zone, ZONE_KINDS, build_pitch, ray_endline_crossing, ray_hits_goal,
    shooter_zone, zone_mask, zone_membership,
)

PITCH = build_pitch(105, 68, {"A": "+x", "B": "-x"})
coord = st.floats(-60, 60, allow_nan=False)


def test_landmarks():
    assert PITCH.center_mark == (0.0, 0.0)
    assert PITCH.penalty_marks == ((-41.5, 0.0), (41.5, 0.0))
    assert PITCH.active_goal_x(1) == 52.5
    assert len(PITCH.corner_marks) == 4


def test_attack_sign_flips_each_period():
    assert [PITCH.attack_sign("A", p) for p in (1, 2, 3, 4)] == [1, -1, 1, -1]
    assert PITCH.attack_sign("B", 1) == -1
    with pytest.raises(PitchConfigError):
        PITCH.attack_sign("C", 1)


@pytest.mark.parametrize("kw", [
    {"length": -1}, {"width": 0}, {"length": 20}, {"attack": {"A": "+x", "B": "+x"}},
    {"attack": {"A": "up"}}, {"attack": {"A": 1, "B": -1, "C": 1}},
])
def test_invalid_pitch(kw):
    with pytest.raises(PitchConfigError):
        build_pitch(**kw)


def test_zone_examples():
    assert zone_membership((0, 0), Zone("center-mark-disk", 1.0), PITCH)
    assert not zone_membership((1.1, 0), Zone("center-mark-disk", 1.0), PITCH)
    # a corner taker at the +x/+y corner, attacking +x
    assert zone_membership((52.3, 33.8), Zone("corner-disk", 2.0), PITCH, "A")
    assert not zone_membership((52.3, 33.8), Zone("corner-disk", 2.0), PITCH, "B")
    assert zone_membership((40, 0), Zone("penalty-area"), PITCH, "A")
    assert zone_membership((40, 0), Zone("penalty-area", side="own"), PITCH, "B")
    assert shooter_zone((45, 0), PITCH, 1) == "shot-zone"
    assert shooter_zone((45, 30), PITCH, 1) == "cross-zone"
    assert shooter_zone((0, 0), PITCH, 1) == "other"


def test_penalty_mark_box_offsets():
    z = Zone("penalty-mark-box", 2.0)
    mark = 41.5
    assert zone_membership((mark + 0.5, 0), z, PITCH, "A")  # t/4 towards goal
    assert not zone_membership((mark + 0.6, 0), z, PITCH, "A")
    assert zone_membership((mark - 1.5, 0), z, PITCH, "A")  # 3t/4 behind
    assert not zone_membership((mark - 1.6, 0), z, PITCH, "A")


def test_nan_never_member():
    pts = np.array([[np.nan, 0.0], [0.0, np.nan]])
    for kind in ZONE_KINDS:
        assert not zone_mask(pts, Zone(kind, 1.0), PITCH, 1).any()


@given(coord, coord, st.sampled_from(ZONE_KINDS), st.floats(0, 3))
def test_mirror_in_y(x, y, kind, tol):
    z = Zone(kind, tol)
    assert zone_mask(np.array([x, y]), z, PITCH, 1) == zone_mask(np.array([x, -y]), z, PITCH, 1)


@given(coord, coord, st.sampled_from(ZONE_KINDS), st.floats(0, 3))
def test_side_symmetry(x, y, kind, tol):
    # reflecting x and the attack sign leaves membership unchanged
    z = Zone(kind, tol)
    assert zone_mask(np.array([x, y]), z, PITCH, 1) == zone_mask(np.array([-x, y]), z, PITCH, -1)


@given(coord, coord, st.sampled_from(ZONE_KINDS), st.floats(0, 2), st.floats(0, 2))
def test_tolerance_monotone(x, y, kind, t1, t2):
    lo, hi = sorted((t1, t2))
    if kind == "penalty-exclusion":
        # exclusion shrinks the forbidden region as tolerance grows
        assert zone_mask(np.array([x, y]), Zone(kind, lo), PITCH, 1) <= zone_mask(np.array([x, y]), Zone(kind, hi), PITCH, 1)
    elif kind != "own-half":
        assert zone_mask(np.array([x, y]), Zone(kind, lo), PITCH, 1) <= zone_mask(np.array([x, y]), Zone(kind, hi), PITCH, 1)


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-60, 60, size=(500, 2))
    for kind in ZONE_KINDS:
        z = Zone(kind, 1.5)
        mask = zone_mask(pts, z, PITCH, -1)
        assert list(mask) == [bool(zone_mask(p, z, PITCH, -1)) for p in pts]


def test_ray_goal():
    assert ray_hits_goal((40, 0), (1, 0), PITCH, 1)
    assert not ray_hits_goal((40, 0), (-1, 0), PITCH, 1)
    assert not ray_hits_goal((40, 0), (0, 1), PITCH, 1)
    y = ray_endline_crossing((42.5, 0), (10, GOAL_HALF_WIDTH + 1), 52.5)
    assert math.isclose(y, GOAL_HALF_WIDTH + 1)
    assert not ray_hits_goal((42.5, 0), (10, GOAL_HALF_WIDTH + 1), PITCH, 1)
    assert ray_hits_goal((42.5, 0), (10, GOAL_HALF_WIDTH + 1), PITCH, 1, widen=2.0)


@given(st.floats(-50, 50), st.floats(-30, 30), st.floats(-math.pi, math.pi))
def test_ray_hits_goal_widen_monotone(x, y, a):
    d = (math.cos(a), math.sin(a))
    if ray_hits_goal((x, y), d, PITCH, 1, 0.0):
        assert ray_hits_goal((x, y), d, PITCH, 1, 2.0)
