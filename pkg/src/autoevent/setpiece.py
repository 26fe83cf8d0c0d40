"""Dead-ball intervals, set-piece triggers and their resolution."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import GOAL_HALF_WIDTH, PitchModel, Zone, ray_endline_crossing, zone_mask
from .ingest import FrameSeries, _runs, period_slices
from .possession import PossessionConfig, ball_distances, post_loss_direction

HIERARCHY = ("kickoff", "penalty", "corner", "goal-kick", "throw-in")

SET_PIECE_NAME = {
    "kickoff": "kickoff",
    "penalty": "penalty kick",
    "corner": "corner kick",
    "goal-kick": "goal kick",
    "throw-in": "throw-in",
}
DEAD_BALL_FOR = {
    "kickoff": "goal",
    "penalty kick": "penalty awarded",
    "corner kick": "out for corner kick",
    "goal kick": "out for goal kick",
    "throw-in": "out for throw-in",
    "free kick": "foul",
    "free kick?": "foul?",
    "incorrect kickoff": "goal",
}


@dataclass(frozen=True)
class TriggerTolerances:
    k1: float = 1.0
    k2: float = 2.0
    p1: float = 1.0
    p2: float = 2.0
    p3: float = 0.5
    g: float = 1.0
    c: float = 2.0
    t: float = 1.0
    min_frames: int = 10
    loose_restart_seconds: float = 0.5

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "p1", "p2", "p3", "g", "c", "t"):
            if getattr(self, name) < 0:
                raise ValueError(f"tolerance {name} must be non-negative")
        if self.min_frames < 1:
            raise ValueError("min_frames must be at least 1")


@dataclass(frozen=True)
class DeadInterval:
    start: int
    stop: int
    period: int
    first_in_play: int | None
    period_start: bool = False
    period_end: bool = False

    def __len__(self) -> int:
        return self.stop - self.start + 1


@dataclass(frozen=True)
class TriggerActivation:
    kind: str
    team: str
    players: tuple[int, ...]
    start: int | None  # first frame of the final holding stretch (d1)
    complete: bool
    confidence: str = "high"


@dataclass(frozen=True)
class SetPieceResolution:
    interval: DeadInterval
    dead_ball_event: str | None
    set_piece: str | None
    executor: int | None
    team: str | None
    confidence: str = "high"
    trigger: str | None = None
    period_end: bool = False


def segment_dead_intervals(frames: FrameSeries) -> list[DeadInterval]:
    """Maximal dead runs per period, in order."""
    out = []
    for period, s, e in period_slices(frames):
        for a, b in _runs(~frames.in_play[s:e]):
            start, stop = s + a, s + b
            nxt = stop + 1 if stop + 1 < e else None
            out.append(DeadInterval(start, stop, period, nxt, period_start=start == s, period_end=nxt is None))
    return out


def _team_signs(frames: FrameSeries, pitch: PitchModel, period: int) -> np.ndarray:
    signs = np.zeros(frames.n_players)
    for j, t in enumerate(frames.teams):
        if t in pitch.attack:
            signs[j] = pitch.attack_sign(t, period)
    return signs


def _trigger_masks(pos: np.ndarray, valid: np.ndarray, teams: np.ndarray, signs: np.ndarray,
                   pitch: PitchModel, tol: TriggerTolerances) -> dict:
    """Per-frame trigger conditions and triggering-player masks.

    Returns ``{(kind, team): (holds[m], players[m, P])}``.
    """
    out = {}
    team_ids = [t for t in pitch.attack]
    known = signs != 0
    own_half = zone_mask(pos, Zone("own-half", tol.k1), pitch, signs) | ~valid | ~known
    all_home = own_half.all(axis=1)
    center = zone_mask(pos, Zone("center-mark-disk", tol.k2), pitch) & valid
    for team in team_ids:
        mine = (teams == team) & valid
        sign_t = float(signs[teams == team][0]) if (teams == team).any() else 0.0
        if sign_t == 0:
            continue
        players = center & mine
        out[("kickoff", team)] = (all_home & players.any(axis=1), players)

        # penalty for `team`: one opponent on its goal line, one kicker in the mark box, everybody else clear
        gl = zone_mask(pos, Zone("goal-line-box", tol.p1, side="active"), pitch, sign_t) & valid
        mb = zone_mask(pos, Zone("penalty-mark-box", tol.p2), pitch, sign_t) & valid
        clear = zone_mask(pos, Zone("penalty-exclusion", tol.p3), pitch, sign_t) | ~valid
        opp = ~(teams == team) & valid & known
        keeper_ok = (gl.sum(axis=1) == 1) & (gl & opp).any(axis=1)
        kicker_ok = (mb.sum(axis=1) == 1) & (mb & mine).any(axis=1)
        others_ok = (clear | gl | mb).all(axis=1)
        out[("penalty", team)] = (keeper_ok & kicker_ok & others_ok, mb & mine)

        players = zone_mask(pos, Zone("corner-disk", tol.c), pitch, sign_t) & mine
        out[("corner", team)] = (players.any(axis=1), players)
        players = zone_mask(pos, Zone("goal-area-box", tol.g), pitch, sign_t) & mine
        out[("goal-kick", team)] = (players.any(axis=1), players)
        players = zone_mask(pos, Zone("throwin-strip", tol.t), pitch) & mine
        out[("throw-in", team)] = (players.any(axis=1), players)
    return out


def evaluate_triggers(frames: FrameSeries, interval: DeadInterval, pitch: PitchModel,
                      tol: TriggerTolerances | None = None) -> list[TriggerActivation]:
    """Evaluate every trigger over ``interval``; one activation per (kind, team) seen."""
    tol = tol or TriggerTolerances()
    sl = slice(interval.start, interval.stop + 1)
    pos = frames.positions[sl]
    valid = np.isfinite(pos).all(axis=2)
    teams = np.asarray(frames.teams, dtype=object)
    signs = _team_signs(frames, pitch, interval.period)
    masks = _trigger_masks(pos, valid, teams, signs, pitch, tol)
    seen = valid.any(axis=0)
    confidence = "high" if (valid[-1] | ~seen).all() else "low"
    need = min(tol.min_frames, len(interval))
    out = []
    for kind in HIERARCHY:
        for team in pitch.attack:
            if (kind, team) not in masks:
                continue
            holds, players = masks[(kind, team)]
            if not holds.any():
                continue
            complete, start = False, None
            if holds[-1]:
                k = len(holds) - 1
                while k > 0 and holds[k - 1]:
                    k -= 1
                start = interval.start + k
                complete = len(holds) - k >= need
            who = tuple(np.flatnonzero(players[-1]).tolist())
            out.append(TriggerActivation(kind, team, who, start, complete, confidence))
    return out


_PATTERN_ZONE = {
    "kickoff": lambda tol: (Zone("center-mark-disk", tol.k2), False),
    "penalty": lambda tol: (Zone("penalty-mark-box", tol.p2), True),
    "corner": lambda tol: (Zone("corner-disk", tol.c), True),
    "goal-kick": lambda tol: (Zone("goal-area-box", tol.g), True),
    "throw-in": lambda tol: (Zone("throwin-strip", tol.t), False),
}


def _pattern_players(frames: FrameSeries, f: int, kind: str, team: str, candidates, pitch: PitchModel,
                     tol: TriggerTolerances, cfg: PossessionConfig, dist: np.ndarray) -> list[int]:
    zone, relative = _PATTERN_ZONE[kind](tol)
    sign = pitch.attack_sign(team, int(frames.period[f])) if relative else 1
    pos = frames.positions[f]
    inside = zone_mask(pos, zone, pitch, sign)
    return [j for j in candidates if inside[j] and dist[j] <= cfg.r_pz]


def _closest(players, dist) -> int | None:
    if not players:
        return None
    return min(players, key=lambda j: (dist[j], j))


def resolve_set_piece(frames: FrameSeries, interval: DeadInterval, activations: list[TriggerActivation],
                      pitch: PitchModel, cfg: PossessionConfig, tol: TriggerTolerances | None = None) -> SetPieceResolution:
    """Pick the set piece that resumes play after ``interval``."""
    tol = tol or TriggerTolerances()
    f = interval.first_in_play
    if f is None:
        return SetPieceResolution(interval, None, None, None, None, period_end=True)
    dist = np.where(np.isfinite(frames.positions[f]).all(axis=1),
                    np.hypot(*(frames.positions[f] - frames.ball[f]).T), np.inf)
    conf = "low" if any(a.confidence == "low" for a in activations) else "high"

    def make(spe, executor, confidence, trigger=None):
        dbe = DEAD_BALL_FOR[spe]
        if interval.period_start and spe == "kickoff":
            dbe = None
        team = frames.teams[executor] if executor is not None else None
        return SetPieceResolution(interval, dbe, spe, executor, team, confidence, trigger)

    # complete triggers confirmed by their pattern, in hierarchy order
    for kind in HIERARCHY:
        confirmed = []
        for act in activations:
            if act.kind == kind and act.complete:
                confirmed += _pattern_players(frames, f, kind, act.team, act.players, pitch, tol, cfg, dist)
        ex = _closest(confirmed, dist)
        if ex is not None:
            return make(SET_PIECE_NAME[kind], ex, conf, kind)

    # a pattern without its completed trigger signals inconsistent tracking
    everyone = [j for j in range(frames.n_players) if frames.teams[j] in pitch.attack]
    for kind in HIERARCHY:
        hits = []
        for team in pitch.attack:
            mine = [j for j in everyone if frames.teams[j] == team]
            hits += _pattern_players(frames, f, kind, team, mine, pitch, tol, cfg, dist)
        ex = _closest(hits, dist)
        if ex is not None:
            return make("free kick?", ex, "low", kind)

    near = [j for j in everyone if dist[j] <= cfg.r_pz]
    ex = _closest(near, dist)
    if ex is not None:
        return make("free kick", ex, conf)

    # nobody on the ball at the restart: look ahead for the first touch
    limit = int(round(tol.loose_restart_seconds * frames.sample_rate))
    g = f
    n = len(frames)
    while g + 1 < n and frames.in_play[g + 1] and frames.period[g + 1] == frames.period[f]:
        g += 1
        d = np.hypot(*(frames.positions[g] - frames.ball[g]).T)
        with np.errstate(invalid="ignore"):
            near = [j for j in everyone if d[j] <= cfg.r_pz]
        if near:
            ex = min(near, key=lambda j: (d[j], j))
            if g - f < limit:
                return make("free kick", ex, conf)
            return make("free kick?", ex, "low")
    return make("free kick?", None, "low")


def _reaches_penalty_area(frames: FrameSeries, pitch: PitchModel, lo: int, hi: int) -> bool:
    if hi < lo:
        return False
    ball = frames.ball[lo:hi + 1]
    live = frames.in_play[lo:hi + 1]
    area = Zone("penalty-area")
    hit = zone_mask(ball, area, pitch, 1) | zone_mask(ball, area, pitch, -1)
    return bool((hit & live).any())


def audit_kickoffs(resolutions: list[SetPieceResolution], frames: FrameSeries, pitch: PitchModel,
                   changes=None) -> list[SetPieceResolution]:
    """Flag retaken kickoffs and uncertain last-second goals."""
    out = list(resolutions)
    by_period: dict[int, list[int]] = {}
    for k, r in enumerate(out):
        if r.set_piece == "kickoff":
            by_period.setdefault(r.interval.period, []).append(k)
    for idx in by_period.values():
        for prev, cur in zip(idx, idx[1:]):
            a, b = out[prev], out[cur]
            if not _reaches_penalty_area(frames, pitch, a.interval.first_in_play, b.interval.start - 1):
                out[prev] = replace(a, set_piece="incorrect kickoff")
                out[cur] = replace(b, dead_ball_event="referee interruption")
    if changes is not None:
        for k, r in enumerate(out):
            if r.period_end and not r.interval.period_start and _goal_line_crossed(frames, pitch, r.interval, changes):
                out[k] = replace(r, dead_ball_event="goal?", confidence="low")
    return out


def _goal_line_crossed(frames: FrameSeries, pitch: PitchModel, interval: DeadInterval, changes) -> bool:
    last = None
    for c in changes:
        if c.kind == "loss" and c.index < interval.start and frames.period[c.index] == interval.period:
            last = c
    if last is None or not last.released:
        return False
    direction = post_loss_direction(frames, last.index, interval.start - 1)
    if direction is None:
        return False
    origin = frames.ball[last.index]
    for end in (pitch.half_length, -pitch.half_length):
        y = ray_endline_crossing(origin, direction, end)
        if y is not None and abs(y) <= GOAL_HALF_WIDTH:
            return True
    return False


def resolve_all(frames: FrameSeries, pitch: PitchModel, cfg: PossessionConfig,
                tol: TriggerTolerances | None = None, changes=None):
    """Segment, evaluate, resolve and audit every dead interval."""
    tol = tol or TriggerTolerances()
    intervals = segment_dead_intervals(frames)
    resolutions = []
    for iv in intervals:
        acts = evaluate_triggers(frames, iv, pitch, tol)
        resolutions.append(resolve_set_piece(frames, iv, acts, pitch, cfg, tol))
    return audit_kickoffs(resolutions, frames, pitch, changes)
