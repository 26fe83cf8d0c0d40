"""Event labelling on top of control changes and set-piece resolutions."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .geometry import PitchModel, Zone, ray_hits_goal, shooter_zone, zone_mask
from .ingest import FrameSeries
from .possession import BALL_CONTROL_LABELS, ControlChange, PossessionResult, post_loss_direction
from .setpiece import SetPieceResolution

EVENT_NAMES = (
    "pass", "cross", "shot on target", "shot off target", "reception", "interception",
    "reception from loose ball", "save-retain", "save-deflect", "claim-retain", "claim-deflect",
    "unsuccessful save", "own goal",
)


@dataclass(frozen=True)
class EventConfig:
    goalward_widen: float = 2.0
    on_target_widen: float = 0.25
    retain_seconds: float = 1.0
    unsuccessful_seconds: float = 2.0
    direction_horizon: int = 10

    def __post_init__(self) -> None:
        if self.goalward_widen < 0 or self.on_target_widen < 0:
            raise ValueError("goal widenings must be non-negative")
        if self.retain_seconds <= 0 or self.unsuccessful_seconds <= 0:
            raise ValueError("time windows must be positive")
        if self.direction_horizon < 1:
            raise ValueError("direction_horizon must be at least 1")


@dataclass(frozen=True)
class EventRecord:
    frame_index: int
    period: int
    timestamp: float
    player_id: str | None
    team_id: str | None
    ball_control: str
    event_name: str | None = None
    dead_ball_event: str | None = None
    from_set_piece: str | None = None
    confidence: str = "high"


COLUMNS = tuple(f.name for f in fields(EventRecord))


class _Sequence:
    """Chronological view over changes and dead intervals."""

    def __init__(self, frames, changes, resolutions, pitch, cfg):
        self.frames = frames
        self.changes = changes
        self.resolutions = sorted(resolutions, key=lambda r: r.interval.start)
        self.pitch = pitch
        self.cfg = cfg
        self._starts = np.asarray([r.interval.start for r in self.resolutions], dtype=np.int64)

    def interval_after(self, index: int) -> SetPieceResolution | None:
        k = int(np.searchsorted(self._starts, index, side="right"))
        if k < len(self.resolutions):
            r = self.resolutions[k]
            if r.interval.period == self.frames.period[index]:
                return r
        return None

    def next_item(self, i: int):
        """What follows change ``i``: ``("gain", j)``, ``("dead", resolution)`` or None."""
        c = self.changes[i]
        iv = self.interval_after(c.index)
        if i + 1 < len(self.changes):
            nxt = self.changes[i + 1]
            same_period = self.frames.period[nxt.index] == self.frames.period[c.index]
            if same_period and (iv is None or nxt.index < iv.interval.start):
                return ("gain", i + 1)
        if iv is not None:
            return ("dead", iv)
        return None

    def sign(self, team: str, index: int) -> int:
        return self.pitch.attack_sign(team, int(self.frames.period[index]))

    def location(self, c: ControlChange) -> np.ndarray:
        """Where a loss happened: the ball, which is always on the pitch when live."""
        return self.frames.ball[c.index]

    def direction(self, i: int):
        c = self.changes[i]
        item = self.next_item(i)
        limit = None
        if item is not None:
            limit = self.changes[item[1]].index if item[0] == "gain" else item[1].interval.start - 1
        return post_loss_direction(self.frames, c.index, limit, self.cfg.direction_horizon)

    def hits_goal(self, i: int, sign: int, widen: float) -> bool:
        d = self.direction(i)
        if d is None:
            return False
        return ray_hits_goal(self.frames.ball[self.changes[i].index], d, self.pitch, sign, widen)

    def attackers_in_area(self, team: str, index: int) -> int:
        sign = self.sign(team, index)
        mine = np.asarray([t == team for t in self.frames.teams], dtype=bool)
        inside = zone_mask(self.frames.positions[index], Zone("penalty-area"), self.pitch, sign)
        return int((inside & mine).sum())

    def seconds(self, a: int, b: int) -> float:
        return float(self.frames.timestamp[b] - self.frames.timestamp[a])

    def is_opponent_keeper_in_area(self, gain: ControlChange, team: str) -> bool:
        if gain.team_id == team or self.frames.roles[gain.player] != "goalkeeper":
            return False
        sign = self.sign(gain.team_id, gain.index)
        pos = self.frames.positions[gain.index, gain.player]
        return bool(zone_mask(pos, Zone("penalty-area", side="own"), self.pitch, sign))


def classify_shot_save(seq: _Sequence, i: int):
    """Label a shooting candidate at loss ``i``.

    Returns ``{change_position: label}`` for the loss and any gain or
    follow-up loss it settles, or None if ``i`` is not a shooting candidate.
    """
    loss = seq.changes[i]
    team = loss.team_id
    if team not in seq.pitch.attack:
        return None
    sign = seq.sign(team, loss.index)
    cfg = seq.cfg
    item = seq.next_item(i)
    if item is None:
        return None
    if item[0] == "dead":
        res = item[1]
        if res.dead_ball_event == "goal" and res.team is not None:
            if res.team != team:
                return {i: "shot on target"}
            if seq.hits_goal(i, -sign, cfg.on_target_widen):
                return {i: "own goal"}
            return None
        if res.dead_ball_event == "goal?":
            return {i: "shot on target"} if seq.hits_goal(i, sign, cfg.on_target_widen) else None
        corner = res.set_piece == "corner kick" and res.team == team
        goal_kick = res.set_piece == "goal kick" and res.team is not None and res.team != team
        if corner or goal_kick:
            zone = shooter_zone(seq.location(loss), seq.pitch, sign)
            if zone != "cross-zone" and seq.hits_goal(i, sign, cfg.goalward_widen):
                on = seq.hits_goal(i, sign, cfg.on_target_widen)
                return {i: "shot on target" if on else "shot off target"}
        return None

    j = item[1]
    gain = seq.changes[j]
    if not seq.is_opponent_keeper_in_area(gain, team):
        return None
    zone = shooter_zone(seq.location(loss), seq.pitch, sign)
    if zone == "cross-zone":
        if seq.attackers_in_area(team, gain.index) < 1:
            return {i: "pass", j: "reception from loose ball"}
        out = {i: "cross"}
        stem = "claim"
    elif seq.hits_goal(i, sign, cfg.goalward_widen):
        on = seq.hits_goal(i, sign, cfg.on_target_widen)
        out = {i: "shot on target" if on else "shot off target"}
        stem = "save"
    else:
        return {i: "pass", j: "reception from loose ball"}

    # keeper follow-up: retained, deflected, or beaten
    suffix = "retain"
    k = j + 1  # the keeper's closing loss
    if k < len(seq.changes) and seq.changes[k].kind == "loss":
        after = seq.next_item(k)
        beaten = (
            after is not None and after[0] == "dead" and after[1].dead_ball_event == "goal"
            and seq.seconds(gain.index, after[1].interval.start) <= cfg.unsuccessful_seconds
        )
        if beaten:
            out[j] = "unsuccessful save"
            out[k] = None
            return out
        if seq.seconds(gain.index, seq.changes[k].index) <= cfg.retain_seconds:
            suffix = "deflect"
            out[k] = None
    out[j] = f"{stem}-{suffix}"
    return out


def classify_pass_cross_reception(seq: _Sequence, i: int) -> str | None:
    """Label for a change not settled by the shot/save logic."""
    c = seq.changes[i]
    if c.kind == "gain":
        # the first touch after a restart is carried by from_set_piece instead
        if "first_in_segment" in c.context:
            return None
        prev = seq.changes[i - 1]
        return "reception" if prev.team_id == c.team_id else "interception"

    item = seq.next_item(i)
    if (item is None or item[0] == "dead") and not c.released:
        return None
    if item is not None and item[0] == "gain" and c.team_id in seq.pitch.attack:
        sign = seq.sign(c.team_id, c.index)
        gain = seq.changes[item[1]]
        if shooter_zone(seq.location(c), seq.pitch, sign) == "cross-zone":
            pos = seq.frames.positions[gain.index, gain.player]
            in_area = bool(zone_mask(pos, Zone("penalty-area"), seq.pitch, sign))
            if in_area and seq.attackers_in_area(c.team_id, gain.index) >= 1:
                return "cross"
    return "pass"


def label_changes(frames: FrameSeries, changes: list[ControlChange], resolutions: list[SetPieceResolution],
                  pitch: PitchModel, cfg: EventConfig | None = None) -> list[str | None]:
    seq = _Sequence(frames, changes, resolutions, pitch, cfg or EventConfig())
    labels: dict[int, str | None] = {}
    for i, c in enumerate(changes):
        if c.kind != "loss" or i in labels:
            continue
        settled = classify_shot_save(seq, i)
        if settled:
            for k, v in settled.items():
                labels.setdefault(k, v)
    return [labels[i] if i in labels else classify_pass_cross_reception(seq, i) for i in range(len(changes))]


def assemble_events_table(frames: FrameSeries, possession: PossessionResult, resolutions: list[SetPieceResolution],
                          pitch: PitchModel, cfg: EventConfig | None = None) -> list[EventRecord]:
    """One row per control change, with dead-ball and set-piece annotations."""
    changes = possession.changes
    labels = label_changes(frames, changes, resolutions, pitch, cfg)
    timeline = possession.timeline.label
    rows: list[EventRecord] = []
    for c, name in zip(changes, labels):
        code = int(timeline[c.index])
        control = BALL_CONTROL_LABELS[code] if code in (2, 3) else "possession"
        rows.append(EventRecord(
            frame_index=c.frame, period=int(frames.period[c.index]), timestamp=float(frames.timestamp[c.index]),
            player_id=c.player_id, team_id=c.team_id, ball_control=control, event_name=name,
        ))
    index = [c.index for c in changes]
    extra: list[tuple[int, EventRecord]] = []
    for res in sorted(resolutions, key=lambda r: r.interval.start):
        iv = res.interval
        low = res.confidence == "low"
        if res.dead_ball_event is not None:
            k = _last_before(index, frames, iv.start, iv.period)
            if k is not None:
                rows[k] = replace(rows[k], dead_ball_event=res.dead_ball_event,
                                  confidence="low" if low else rows[k].confidence)
            else:
                at = max(iv.start - 1, 0) if iv.start > 0 and frames.period[iv.start - 1] == iv.period else iv.start
                extra.append((at, _synthetic(frames, at, None, dead_ball_event=res.dead_ball_event)))
        if res.set_piece is not None and iv.first_in_play is not None:
            k = _first_from(index, frames, iv.first_in_play, iv.period)
            if k is not None and _next_interval_start(resolutions, iv) > index[k]:
                rows[k] = replace(rows[k], from_set_piece=res.set_piece,
                                  confidence="low" if low else rows[k].confidence)
            else:
                extra.append((iv.first_in_play, _synthetic(frames, iv.first_in_play, res.executor,
                                                           from_set_piece=res.set_piece)))
    keyed = [(ix, 1, n, r) for n, (ix, r) in enumerate(zip(index, rows))]
    keyed += [(ix, 0 if r.from_set_piece else 2, n, r) for n, (ix, r) in enumerate(extra)]
    keyed.sort(key=lambda t: t[:3])
    return [t[3] for t in keyed]


def _next_interval_start(resolutions, iv) -> int:
    later = [r.interval.start for r in resolutions if r.interval.start > iv.start and r.interval.period == iv.period]
    return min(later) if later else np.iinfo(np.int64).max


def _last_before(index, frames, start, period):
    k = int(np.searchsorted(index, start)) - 1
    if k >= 0 and frames.period[index[k]] == period:
        return k
    return None


def _first_from(index, frames, start, period):
    k = int(np.searchsorted(index, start))
    if k < len(index) and frames.period[index[k]] == period:
        return k
    return None


def _synthetic(frames: FrameSeries, at: int, player, **kw) -> EventRecord:
    pid = frames.player_ids[player] if player is not None else None
    team = frames.teams[player] if player is not None else None
    return EventRecord(frame_index=int(frames.frame[at]), period=int(frames.period[at]),
                       timestamp=float(frames.timestamp[at]), player_id=pid, team_id=team,
                       ball_control="possession", confidence="low", **kw)


# --------------------------------------------------------------------------- export


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def events_to_csv(rows: list[EventRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def events_to_jsonl(rows: list[EventRecord]) -> str:
    out = []
    for r in rows:
        d = asdict(r)
        d["timestamp"] = round(d["timestamp"], 3)
        out.append(json.dumps(d, ensure_ascii=False))
    return "".join(line + "\n" for line in out)


def events_from_csv(text: str) -> list[EventRecord]:
    rows = []
    for d in csv.DictReader(io.StringIO(text)):
        rows.append(EventRecord(
            frame_index=int(d["frame_index"]), period=int(d["period"]), timestamp=float(d["timestamp"]),
            player_id=d["player_id"] or None, team_id=d["team_id"] or None, ball_control=d["ball_control"],
            event_name=d["event_name"] or None, dead_ball_event=d["dead_ball_event"] or None,
            from_set_piece=d["from_set_piece"] or None, confidence=d["confidence"] or "high",
        ))
    return rows


def timeline_to_csv(frames: FrameSeries, possession: PossessionResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("frame", "period", "timestamp", "ball_control", "player_id", "team_id"))
    names = possession.timeline.names()
    player = possession.timeline.player
    for i in range(len(frames)):
        j = int(player[i])
        w.writerow((int(frames.frame[i]), int(frames.period[i]), f"{frames.timestamp[i]:.3f}", names[i],
                    frames.player_ids[j] if j >= 0 else "", frames.teams[j] if j >= 0 else ""))
    return buf.getvalue()
