"""Ball kinematics, control frames, gains/losses and the possession timeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .ingest import FrameSeries, in_play_runs

STATIC_EPS = 1e-6

NONE, POSSESSION, DUEL = 0, 1, 2
LABEL_DEAD, LABEL_NONE, LABEL_POSSESSION, LABEL_DUEL = 0, 1, 2, 3
BALL_CONTROL_LABELS = ("dead ball", "no possession", "possession", "duel")


@dataclass(frozen=True)
class PossessionConfig:
    r_pz: float = 1.0
    r_dz: float = 1.0
    eps_s: float = 0.05
    eps_theta: float = 0.98
    eps_v: float = 1.0

    def __post_init__(self) -> None:
        for name in ("r_pz", "r_dz", "eps_s", "eps_theta", "eps_v"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.r_dz < self.r_pz:
            raise ValueError("r_dz must be at least r_pz")
        if abs(self.eps_theta) > 1:
            raise ValueError("eps_theta is a cosine and must lie in [-1, 1]")


@dataclass(frozen=True, eq=False)
class BallKinematics:
    """Per-frame ball motion; NaN marks undefined values.

    ``d_in``/``v_in`` use frame ``f-1``, ``d_out``/``v_out`` frame ``f+1`` and
    ``ds`` is the displacement from ``f`` to ``f+1``.
    """

    d_in: np.ndarray
    d_out: np.ndarray
    v_in: np.ndarray
    v_out: np.ndarray
    ds: np.ndarray


def compute_ball_kinematics(frames: FrameSeries) -> BallKinematics:
    n = len(frames)
    d_in = np.full((n, 2), np.nan)
    d_out = np.full((n, 2), np.nan)
    v_in = np.full(n, np.nan)
    v_out = np.full(n, np.nan)
    ds = np.full(n, np.nan)
    rate = frames.sample_rate
    for s, e in in_play_runs(frames):
        if e <= s:
            continue
        seg = frames.ball[s:e + 1]
        step = np.diff(seg, axis=0)
        dist = np.hypot(step[:, 0], step[:, 1])
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = step / dist[:, None]
        unit[~(dist >= STATIC_EPS)] = np.nan
        ds[s:e] = dist
        v_out[s:e] = dist * rate
        v_in[s + 1:e + 1] = dist * rate
        d_out[s:e] = unit
        d_in[s + 1:e + 1] = unit
    return BallKinematics(d_in, d_out, v_in, v_out, ds)


@dataclass(frozen=True)
class ControlFrame:
    index: int
    frame: int
    kind: str
    player_id: str | None
    participants: tuple[str, ...]
    distances: dict
    d_in: tuple[float, float]
    d_out: tuple[float, float]
    v_in: float
    v_out: float
    ds: float


@dataclass(frozen=True, eq=False)
class ControlFrameSeries:
    """Dense control-frame table aligned with a FrameSeries.

    ``kind`` is NONE/POSSESSION/DUEL per frame, ``holder`` the possessing
    player index (-1 otherwise), ``dist`` the player-ball distances and
    ``duel_members`` the players inside the duel zone on duel frames.
    """

    kind: np.ndarray
    holder: np.ndarray
    dist: np.ndarray
    duel_members: np.ndarray
    segment: np.ndarray

    def control_indices(self) -> np.ndarray:
        return np.flatnonzero(self.kind != NONE)

    def at(self, i: int, frames: FrameSeries, kin: BallKinematics) -> ControlFrame | None:
        k = int(self.kind[i])
        if k == NONE:
            return None
        ids = frames.player_ids
        members = tuple(ids[j] for j in np.flatnonzero(self.duel_members[i]))
        dists = {ids[j]: float(self.dist[i, j]) for j in range(len(ids)) if np.isfinite(self.dist[i, j])}
        return ControlFrame(
            index=i, frame=int(frames.frame[i]), kind="possession" if k == POSSESSION else "duel",
            player_id=ids[self.holder[i]] if k == POSSESSION else None, participants=members,
            distances=dists, d_in=tuple(kin.d_in[i]), d_out=tuple(kin.d_out[i]),
            v_in=float(kin.v_in[i]), v_out=float(kin.v_out[i]), ds=float(kin.ds[i]),
        )


def ball_distances(frames: FrameSeries) -> np.ndarray:
    diff = frames.positions - frames.ball[:, None, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _segments(frames: FrameSeries) -> np.ndarray:
    """In-play run id per frame (-1 on dead frames)."""
    seg = np.full(len(frames), -1, dtype=np.int64)
    for k, (s, e) in enumerate(in_play_runs(frames)):
        seg[s:e + 1] = k
    return seg


def detect_control_frames(frames: FrameSeries, kin: BallKinematics | None, cfg: PossessionConfig) -> ControlFrameSeries:
    """Apply the possession-zone and duel-zone rules to every in-play frame."""
    n, p = len(frames), frames.n_players
    dist = ball_distances(frames)
    live = frames.in_play & frames.ball_present
    dist[~live] = np.nan
    teams = np.asarray(frames.teams, dtype=object)
    team_ids = frames.team_ids()
    with np.errstate(invalid="ignore"):
        in_dz = dist <= cfg.r_dz
        in_pz = dist <= cfg.r_pz
    duel = np.zeros(n, dtype=bool)
    if len(team_ids) >= 2 and p:
        per_team = [in_dz[:, teams == t].any(axis=1) for t in team_ids]
        duel = np.sum(per_team, axis=0) >= 2
    masked = np.where(in_pz, dist, np.inf)
    holder = np.argmin(masked, axis=1) if p else np.zeros(n, dtype=np.int64)
    has_pz = in_pz.any(axis=1) if p else np.zeros(n, dtype=bool)
    kind = np.where(duel, DUEL, np.where(has_pz, POSSESSION, NONE)).astype(np.int8)
    holder = np.where(kind == POSSESSION, holder, -1).astype(np.int64)
    members = in_dz & duel[:, None]
    return ControlFrameSeries(kind, holder, dist, members, _segments(frames))


@dataclass(frozen=True)
class Run:
    start: int
    stop: int
    kind: int
    player: int  # holder for possession runs, credited player for duel runs

    @property
    def key(self):
        return (self.kind, self.player if self.kind == POSSESSION else -2)


def control_runs(control: ControlFrameSeries) -> list[Run]:
    """Maximal runs of consecutive control frames with the same controller."""
    key = np.where(control.kind == POSSESSION, control.holder, np.where(control.kind == DUEL, -2, -1))
    n = len(key)
    if n == 0:
        return []
    brk = np.ones(n, dtype=bool)
    brk[1:] = (key[1:] != key[:-1]) | (control.segment[1:] != control.segment[:-1])
    starts = np.flatnonzero(brk)
    stops = np.concatenate((starts[1:], [n])) - 1
    keep = key[starts] != -1
    runs = []
    for s, e in zip(starts[keep].tolist(), stops[keep].tolist()):
        k = int(control.kind[s])
        if k == POSSESSION:
            player = int(control.holder[s])
        else:
            d = np.where(control.duel_members[e], control.dist[e], np.inf)
            player = int(np.argmin(d))
        runs.append(Run(s, e, k, player))
    return runs


def validate_gains(control: ControlFrameSeries, kin: BallKinematics, cfg: PossessionConfig) -> ControlFrameSeries:
    """Delete possession runs where the ball changed neither direction nor speed."""
    runs = control_runs(control)
    if not runs:
        return control
    with np.errstate(invalid="ignore"):
        speed_change = np.abs(kin.v_in - kin.v_out) > cfg.eps_v
    kind = control.kind.copy()
    holder = control.holder.copy()
    starts = np.asarray([r.start for r in runs])
    stops = np.asarray([r.stop for r in runs])
    cum = np.concatenate(([0], np.cumsum(speed_change)))
    any_speed = (cum[stops + 1] - cum[starts]) > 0
    dot = np.einsum("ij,ij->i", kin.d_in[starts], kin.d_out[stops])
    with np.errstate(invalid="ignore"):
        same_dir = dot >= cfg.eps_theta  # NaN (undefined direction) -> False -> changed
    is_pos = np.asarray([r.kind == POSSESSION for r in runs])
    drop = is_pos & same_dir & ~any_speed
    for s, e in zip(starts[drop].tolist(), stops[drop].tolist()):
        kind[s:e + 1] = NONE
        holder[s:e + 1] = -1
    return replace(control, kind=kind, holder=holder)


@dataclass(frozen=True)
class ControlChange:
    kind: str  # "gain" | "loss"
    index: int
    frame: int
    player_id: str
    team_id: str
    player: int
    context: frozenset = field(default_factory=frozenset)

    @property
    def released(self) -> bool:
        """Loss where the ball left the player's zone under its own momentum."""
        return self.kind == "loss" and "released" in self.context


def spells(control: ControlFrameSeries) -> list[tuple[int, list[Run]]]:
    """Group kept runs into same-player spells within each in-play segment."""
    out: list[tuple[int, list[Run]]] = []
    prev_seg = None
    for run in control_runs(control):
        seg = int(control.segment[run.start])
        if out and seg == prev_seg and out[-1][1][-1].player == run.player:
            out[-1][1].append(run)
        else:
            out.append((seg, [run]))
        prev_seg = seg
    return out


def detect_control_changes(
    frames: FrameSeries, control: ControlFrameSeries, kin: BallKinematics, cfg: PossessionConfig
) -> list[ControlChange]:
    """Gains and losses from validated control frames.

    Each spell opens with a gain at its first frame and closes with a loss
    at its last control frame. The loss is flagged ``released`` when the
    ball is outside the player's zone on the next frame after moving more
    than ``eps_s``.
    """
    ids, teams = frames.player_ids, frames.teams
    out: list[ControlChange] = []
    grouped = spells(control)
    seg_first = {}
    for seg, runs in grouped:
        seg_first.setdefault(seg, runs[0].start)
    last_idx = -1
    for seg, runs in grouped:
        first, last = runs[0], runs[-1]
        if first.start <= last_idx:
            raise RuntimeError("control runs out of order")
        j = first.player
        ctx = set()
        if seg_first[seg] == first.start:
            ctx.add("first_in_segment")
        if first.kind == DUEL:
            ctx.add("duel_involved")
        out.append(ControlChange("gain", first.start, int(frames.frame[first.start]), ids[j], teams[j], j, frozenset(ctx)))
        f = last.stop
        lctx = set()
        if last.kind == DUEL:
            lctx.add("duel_involved")
        if _released(control, kin, cfg, f, j):
            lctx.add("released")
        out.append(ControlChange("loss", f, int(frames.frame[f]), ids[j], teams[j], j, frozenset(lctx)))
        last_idx = f
    return out


def _released(control: ControlFrameSeries, kin: BallKinematics, cfg: PossessionConfig, f: int, j: int) -> bool:
    n = len(control.kind)
    if f + 1 >= n or control.segment[f + 1] != control.segment[f]:
        return False
    d_next = control.dist[f + 1, j]
    outside = not (d_next <= cfg.r_pz)  # unknown position counts as outside
    return bool(outside and kin.ds[f] > cfg.eps_s)


@dataclass(frozen=True, eq=False)
class PossessionTimeline:
    label: np.ndarray  # LABEL_* codes
    player: np.ndarray  # possessing player index, -1 otherwise

    def names(self) -> list[str]:
        return [BALL_CONTROL_LABELS[k] for k in self.label.tolist()]


def build_possession_timeline(frames: FrameSeries, control: ControlFrameSeries) -> PossessionTimeline:
    label = np.full(len(frames), LABEL_NONE, dtype=np.int8)
    label[~frames.in_play] = LABEL_DEAD
    label[control.kind == POSSESSION] = LABEL_POSSESSION
    label[control.kind == DUEL] = LABEL_DUEL
    player = np.where(control.kind == POSSESSION, control.holder, -1)
    return PossessionTimeline(label, player)


@dataclass(frozen=True, eq=False)
class PossessionResult:
    kinematics: BallKinematics
    raw_control: ControlFrameSeries
    control: ControlFrameSeries
    changes: list
    timeline: PossessionTimeline


def run_possession(frames: FrameSeries, cfg: PossessionConfig) -> PossessionResult:
    """Full possession step on prepared (status-inferred, smoothed) frames."""
    kin = compute_ball_kinematics(frames)
    raw = detect_control_frames(frames, kin, cfg)
    control = validate_gains(raw, kin, cfg)
    changes = detect_control_changes(frames, control, kin, cfg)
    timeline = build_possession_timeline(frames, control)
    return PossessionResult(kin, raw, control, changes, timeline)


def post_loss_direction(frames: FrameSeries, index: int, limit: int | None = None, horizon: int = 10):
    """Ball travel direction after a loss at ``index``.

    Uses the displacement to the latest in-play frame at most ``horizon``
    frames later (and not beyond ``limit``). None if the ball did not move.
    """
    n = len(frames)
    end = min(n - 1, index + horizon, limit if limit is not None else n - 1)
    k = index
    while k < end and frames.in_play[k + 1] and frames.period[k + 1] == frames.period[index]:
        k += 1
    if k == index:
        return None
    d = frames.ball[k] - frames.ball[index]
    norm = float(np.hypot(d[0], d[1]))
    if not np.isfinite(norm) or norm < STATIC_EPS:
        return None
    return d / norm
