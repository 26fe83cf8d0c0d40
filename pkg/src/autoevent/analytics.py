"""Aggregates over detection output: location heatmaps and pass-angle profiles."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .events import EventRecord
from .geometry import PitchModel, build_pitch
from .ingest import FrameSeries
from .possession import LABEL_POSSESSION, PossessionTimeline, post_loss_direction

HEAT_MODES = ("in-possession", "all-in-play")
NORMALIZATIONS = ("raw", "per-minute")
GAIN_NAMES = ("reception", "interception", "reception from loose ball")
PASS_NAMES = ("pass", "cross")


class AnalyticsError(ValueError):
    """Bad arguments to an aggregate (unknown player, empty grid)."""


@dataclass(frozen=True, eq=False)
class HeatGrid:
    player_id: str
    mode: str
    normalization: str
    counts: np.ndarray  # (nx, ny), x along pitch length
    frames: int  # qualifying frames
    minutes: float  # in-play minutes used for per-minute scaling

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def values(self) -> np.ndarray:
        if self.normalization == "raw":
            return self.counts.astype(float)
        return self.counts / self.minutes if self.minutes > 0 else np.zeros(self.counts.shape)

    def to_dict(self) -> dict:
        return {
            "player_id": self.player_id, "mode": self.mode, "normalization": self.normalization,
            "nx": self.shape[0], "ny": self.shape[1], "frames": self.frames,
            "minutes": round(self.minutes, 6),
            "values": [[round(float(v), 6) for v in row] for row in self.values()],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("ix", "iy", "value"))
        vals = self.values()
        for ix in range(vals.shape[0]):
            for iy in range(vals.shape[1]):
                w.writerow((ix, iy, f"{vals[ix, iy]:.6f}"))
        return buf.getvalue()


def possession_heatmap(timeline: PossessionTimeline, frames: FrameSeries, player_id: str,
                       mode: str = "in-possession", grid: tuple[int, int] = (21, 14),
                       pitch: PitchModel | None = None, normalization: str = "raw") -> HeatGrid:
    """Bin a player's positions over the frames where they qualify under ``mode``."""
    if mode not in HEAT_MODES:
        raise AnalyticsError(f"unknown heatmap mode {mode!r}")
    if normalization not in NORMALIZATIONS:
        raise AnalyticsError(f"unknown normalization {normalization!r}")
    nx, ny = (int(g) for g in grid)
    if nx < 1 or ny < 1:
        raise AnalyticsError("grid dimensions must be at least 1")
    try:
        j = frames.player_index(player_id)
    except KeyError:
        raise AnalyticsError(f"unknown player {player_id!r}") from None
    pitch = pitch or build_pitch()
    pos = frames.positions[:, j]
    ok = np.isfinite(pos).all(axis=1)
    if mode == "in-possession":
        mask = (timeline.label == LABEL_POSSESSION) & (timeline.player == j)
    else:
        mask = frames.in_play.copy()
    mask &= ok
    hl, hw = pitch.half_length, pitch.half_width
    # positions off the pitch land in the edge cells
    ix = np.clip(((pos[mask, 0] + hl) / pitch.length * nx).astype(np.int64), 0, nx - 1)
    iy = np.clip(((pos[mask, 1] + hw) / pitch.width * ny).astype(np.int64), 0, ny - 1)
    counts = np.zeros((nx, ny), dtype=np.int64)
    np.add.at(counts, (ix, iy), 1)
    minutes = float(frames.in_play.sum()) / frames.sample_rate / 60.0
    return HeatGrid(player_id, mode, normalization, counts, int(mask.sum()), minutes)


# --------------------------------------------------------------------------- angles


@dataclass(frozen=True)
class PassAngle:
    frame_index: int
    period: int
    event_name: str
    outgoing: float | None
    incoming: float | None
    outcome: str  # complete / incomplete
    progress: float
    distance: float


@dataclass
class AngleProfile:
    player_id: str
    records: list[PassAngle] = field(default_factory=list)
    bins: int = 16

    def histogram(self) -> list[int]:
        counts = [0] * self.bins
        for r in self.records:
            if r.outgoing is not None:
                counts[angle_bin(r.outgoing, self.bins)] += 1
        return counts

    def to_dict(self) -> dict:
        recs = []
        for r in self.records:
            d = asdict(r)
            for k in ("outgoing", "incoming", "progress", "distance"):
                if d[k] is not None:
                    d[k] = round(d[k], 6)
            recs.append(d)
        return {"player_id": self.player_id, "bins": self.bins, "histogram": self.histogram(), "records": recs}


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    a = math.remainder(a, 2 * math.pi)
    return math.pi if a <= -math.pi else a


def angle_bin(a: float, bins: int = 16) -> int:
    k = int((a + math.pi) / (2 * math.pi) * bins)
    return min(max(k, 0), bins - 1)


def _row_index(frames: FrameSeries, frame_index: int) -> int:
    k = int(np.searchsorted(frames.frame, frame_index))
    if k >= len(frames) or frames.frame[k] != frame_index:
        raise AnalyticsError(f"event frame {frame_index} not in the frame series")
    return k


def _live_end(frames: FrameSeries, start: int, limit: int) -> int:
    """Last frame in ``[start, limit]`` reachable without a dead ball or period change."""
    k = start
    while k < limit and frames.in_play[k + 1] and frames.period[k + 1] == frames.period[start]:
        k += 1
    return k


def _incoming(frames: FrameSeries, g: int, horizon: int) -> float | None:
    k = g
    while k > g - horizon and k > 0 and frames.in_play[k - 1] and frames.period[k - 1] == frames.period[g]:
        k -= 1
    d = frames.ball[g] - frames.ball[k]
    if k == g or not np.isfinite(d).all() or float(np.hypot(*d)) < 1e-6:
        return None
    return wrap_angle(math.atan2(d[1], d[0]))


def pass_angle_profile(events: list[EventRecord], frames: FrameSeries, player_id: str,
                       pitch: PitchModel | None = None, bins: int = 16, horizon: int = 10) -> AngleProfile:
    """Outgoing/incoming angles, progress and ball travel for a player's passes and crosses.

    ``frames`` should be the prepared (smoothed) series the events came from.
    """
    if player_id not in frames.player_ids:
        raise AnalyticsError(f"unknown player {player_id!r}")
    pitch = pitch or build_pitch()
    prof = AngleProfile(player_id, bins=bins)
    for n, row in enumerate(events):
        if row.player_id != player_id or row.event_name not in PASS_NAMES:
            continue
        i = _row_index(frames, row.frame_index)
        nxt = events[n + 1] if n + 1 < len(events) else None
        limit = len(frames) - 1
        if nxt is not None and nxt.period == row.period:
            limit = _row_index(frames, nxt.frame_index)
        out_dir = post_loss_direction(frames, i, limit, horizon)
        outgoing = None if out_dir is None else wrap_angle(math.atan2(out_dir[1], out_dir[0]))

        incoming = None
        prev = events[n - 1] if n > 0 else None
        if prev is not None and prev.player_id == player_id and prev.period == row.period \
                and prev.event_name in GAIN_NAMES:
            incoming = _incoming(frames, _row_index(frames, prev.frame_index), horizon)

        end = _live_end(frames, i, limit)
        path = frames.ball[i:end + 1]
        steps = np.hypot(*np.diff(path, axis=0).T) if len(path) > 1 else np.zeros(0)
        distance = float(np.nansum(steps))

        complete = (row.dead_ball_event is None and nxt is not None and nxt.period == row.period
                    and nxt.team_id == row.team_id and nxt.event_name == "reception")
        sign = pitch.attack_sign(row.team_id, row.period) if row.team_id in pitch.attack else 1
        x = float(frames.ball[i, 0])
        progress = min(max((sign * x + pitch.half_length) / pitch.length, 0.0), 1.0)
        prof.records.append(PassAngle(row.frame_index, row.period, row.event_name, outgoing, incoming,
                                      "complete" if complete else "incomplete", progress, distance))
    return prof
