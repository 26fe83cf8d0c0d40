"""Pitch coordinates, landmarks and zone membership.

Coordinates are meters with the origin at the center mark, ``x`` along the
length and ``y`` along the width. Each team attacks either ``+x`` or ``-x``;
the direction flips between consecutive periods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

GOAL_HALF_WIDTH = 3.66
PENALTY_AREA_DEPTH = 16.5
PENALTY_AREA_HALF_WIDTH = 20.16
GOAL_AREA_DEPTH = 5.5
GOAL_AREA_HALF_WIDTH = 9.16
PENALTY_MARK_DISTANCE = 11.0
PENALTY_ARC_RADIUS = 9.15
THROWIN_OUTER_MARGIN = 3.0
FINAL_THIRD_DEPTH = 26.0

ZONE_KINDS = (
    "own-half",
    "center-mark-disk",
    "goal-line-box",
    "penalty-mark-box",
    "penalty-exclusion",
    "goal-area-box",
    "corner-disk",
    "throwin-strip",
    "cross-zone",
    "shot-zone",
    "penalty-area",
    "goal-area",
)

# Zones whose default side is fixed by the rules of the game.
_DEFAULT_SIDE = {
    "own-half": "own",
    "goal-line-box": "own",
    "goal-area-box": "own",
    "penalty-mark-box": "active",
    "penalty-exclusion": "active",
    "corner-disk": "active",
    "cross-zone": "active",
    "shot-zone": "active",
    "penalty-area": "active",
    "goal-area": "active",
}


class PitchConfigError(ValueError):
    """Raised for inconsistent pitch dimensions or attack directions."""


@dataclass(frozen=True)
class PitchModel:
    """Immutable pitch description with derived landmarks.

    ``attack`` maps each team id to the sign of ``x`` it attacks in period 1.
    """

    length: float = 105.0
    width: float = 68.0
    attack: Mapping[str, int] = field(default_factory=dict)

    @property
    def half_length(self) -> float:
        return self.length / 2.0

    @property
    def half_width(self) -> float:
        return self.width / 2.0

    @property
    def center_mark(self) -> tuple[float, float]:
        return (0.0, 0.0)

    @property
    def penalty_marks(self) -> tuple[tuple[float, float], tuple[float, float]]:
        x = self.half_length - PENALTY_MARK_DISTANCE
        return ((-x, 0.0), (x, 0.0))

    @property
    def goalposts(self) -> tuple[tuple[float, float], ...]:
        hl = self.half_length
        g = GOAL_HALF_WIDTH
        return ((-hl, -g), (-hl, g), (hl, -g), (hl, g))

    @property
    def corner_marks(self) -> tuple[tuple[float, float], ...]:
        hl, hw = self.half_length, self.half_width
        return ((-hl, -hw), (-hl, hw), (hl, -hw), (hl, hw))

    def attack_sign(self, team: str, period: int) -> int:
        """Sign of ``x`` that ``team`` attacks during ``period``."""
        try:
            s = self.attack[team]
        except KeyError:
            raise PitchConfigError(f"no attack direction for team {team!r}") from None
        return s if period % 2 == 1 else -s

    def active_goal_x(self, sign: int) -> float:
        return sign * self.half_length

    def teams(self) -> tuple[str, ...]:
        return tuple(self.attack)

    def opponent(self, team: str) -> str:
        others = [t for t in self.attack if t != team]
        if len(others) != 1:
            raise PitchConfigError(f"cannot resolve opponent of {team!r}")
        return others[0]


def build_pitch(
    length: float = 105.0,
    width: float = 68.0,
    attack: Mapping[str, int | str] | None = None,
) -> PitchModel:
    """Validate a pitch configuration and return the model.

    ``attack`` values may be ``+1``/``-1`` or the strings ``"+x"``/``"-x"``.
    """
    if not (length > 0 and width > 0):
        raise PitchConfigError(f"pitch dimensions must be positive, got {length} x {width}")
    if length < 2 * PENALTY_AREA_DEPTH or width < 2 * PENALTY_AREA_HALF_WIDTH:
        raise PitchConfigError("pitch too small to hold the penalty areas")
    signs: dict[str, int] = {}
    for team, value in (attack or {}).items():
        signs[str(team)] = _parse_sign(value)
    if len(signs) > 2:
        raise PitchConfigError(f"expected at most two teams, got {sorted(signs)}")
    if len(signs) == 2 and len(set(signs.values())) == 1:
        raise PitchConfigError("both teams attack the same direction")
    return PitchModel(float(length), float(width), signs)


def _parse_sign(value: int | str) -> int:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("+x", "+", "+1", "1", "right"):
            return 1
        if v in ("-x", "-", "-1", "left"):
            return -1
        raise PitchConfigError(f"invalid attack direction {value!r}")
    if value in (1, -1):
        return int(value)
    raise PitchConfigError(f"invalid attack direction {value!r}")


@dataclass(frozen=True)
class Zone:
    """A closed pitch region.

    ``side`` selects the team-relative landmark (``"own"`` or ``"active"``)
    and defaults to the side the rules imply for ``kind``.
    """

    kind: str
    tolerance: float = 0.0
    side: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ZONE_KINDS:
            raise ValueError(f"unknown zone kind {self.kind!r}")
        if self.tolerance < 0:
            raise ValueError("zone tolerance must be non-negative")
        if self.side is None:
            object.__setattr__(self, "side", _DEFAULT_SIDE.get(self.kind))
        elif self.side not in ("own", "active"):
            raise ValueError(f"invalid zone side {self.side!r}")


def zone_mask(points: np.ndarray, zone: Zone, pitch: PitchModel, sign: int | np.ndarray = 1) -> np.ndarray:
    """Vectorized membership test.

    ``points`` has shape ``(..., 2)``; ``sign`` is the attack sign of the
    team the zone is relative to, broadcastable against ``points[..., 0]``.
    NaN points are never members.
    """
    p = np.asarray(points, dtype=float)
    x, y = p[..., 0], p[..., 1]
    sign = np.asarray(sign)
    t = zone.tolerance
    hl, hw = pitch.half_length, pitch.half_width
    # Direction of the goal the zone refers to.
    end = sign if zone.side != "own" else -sign
    depth = end * x  # distance measured towards that goal: hl on its endline
    ax = np.abs(y)
    kind = zone.kind

    with np.errstate(invalid="ignore"):
        if kind == "own-half":
            out = sign * x <= t
        elif kind == "center-mark-disk":
            out = np.hypot(x, y) <= t
        elif kind == "goal-line-box":
            out = (np.abs(depth - hl) <= t) & (ax <= GOAL_HALF_WIDTH + t)
        elif kind == "penalty-mark-box":
            # quarter of the box in front of the mark (towards goal), rest behind
            rel = depth - (hl - PENALTY_MARK_DISTANCE)
            out = (rel <= t / 4.0) & (rel >= -3.0 * t / 4.0) & (ax <= t / 2.0)
        elif kind == "penalty-exclusion":
            in_area = (depth >= hl - PENALTY_AREA_DEPTH + t) & (ax <= PENALTY_AREA_HALF_WIDTH - t)
            mark_dist = np.hypot(depth - (hl - PENALTY_MARK_DISTANCE), y)
            out = ~in_area & (mark_dist >= PENALTY_ARC_RADIUS - t) & np.isfinite(x) & np.isfinite(y)
        elif kind in ("goal-area-box", "goal-area"):
            out = (depth >= hl - GOAL_AREA_DEPTH - t) & (depth <= hl + t) & (ax <= GOAL_AREA_HALF_WIDTH + t)
        elif kind == "penalty-area":
            out = (depth >= hl - PENALTY_AREA_DEPTH - t) & (depth <= hl + t) & (ax <= PENALTY_AREA_HALF_WIDTH + t)
        elif kind == "corner-disk":
            out = np.hypot(depth - hl, ax - hw) <= t
        elif kind == "throwin-strip":
            out = (ax >= hw - t) & (ax <= hw + THROWIN_OUTER_MARGIN) & (np.abs(x) <= hl + t)
        elif kind == "shot-zone":
            out = (depth >= hl - FINAL_THIRD_DEPTH) & (depth <= hl + t) & (ax <= PENALTY_AREA_HALF_WIDTH)
        elif kind == "cross-zone":
            out = (depth >= hl - FINAL_THIRD_DEPTH) & (depth <= hl + t) & (ax > PENALTY_AREA_HALF_WIDTH) & (ax <= hw + t)
        else:  # pragma: no cover - guarded by Zone
            raise ValueError(kind)
    return np.asarray(out & np.isfinite(x) & np.isfinite(y), dtype=bool)


def zone_membership(point, zone: Zone, pitch: PitchModel, team: str | None = None, period: int = 1) -> bool:
    """True iff ``point`` lies in ``zone`` as seen by ``team`` in ``period``."""
    sign = pitch.attack_sign(team, period) if team is not None else 1
    return bool(zone_mask(np.asarray(point, dtype=float), zone, pitch, sign))


def shooter_zone(point, pitch: PitchModel, sign: int) -> str:
    """Classify a location as ``"cross-zone"``, ``"shot-zone"`` or ``"other"``."""
    if zone_mask(np.asarray(point, dtype=float), Zone("shot-zone"), pitch, sign):
        return "shot-zone"
    if zone_mask(np.asarray(point, dtype=float), Zone("cross-zone"), pitch, sign):
        return "cross-zone"
    return "other"


def ray_endline_crossing(origin, direction, end_x: float) -> float | None:
    """``y`` where the ray from ``origin`` along ``direction`` meets ``x = end_x``.

    Returns None when the ray is parallel to the endline or points away from it.
    """
    ox, oy = float(origin[0]), float(origin[1])
    dx, dy = float(direction[0]), float(direction[1])
    if not np.isfinite(dx) or abs(dx) < 1e-12:
        return None
    t = (end_x - ox) / dx
    if t < 0:
        return None
    return oy + t * dy


def ray_hits_goal(origin, direction, pitch: PitchModel, sign: int, widen: float = 0.0) -> bool:
    """Whether a ray crosses the goal mouth on the ``sign`` endline, widened per side."""
    y = ray_endline_crossing(origin, direction, pitch.active_goal_x(sign))
    return y is not None and abs(y) <= GOAL_HALF_WIDTH + widen
