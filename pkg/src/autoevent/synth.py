"""Scripted synthetic matches: tracking frames plus ground-truth event tables.

A script is a JSON document with rosters and, per period, an ordered list
of actions. The generator moves the ball piecewise-linearly at constant
speed per action, places players in the geometric configuration of every
set piece during dead intervals, and derives the expected event table from
the script's intent (who kicked where, who received, what restarted play).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .events import EventRecord
from .geometry import (
    GOAL_HALF_WIDTH, PENALTY_MARK_DISTANCE, PitchModel, Zone, build_pitch, ray_hits_goal, shooter_zone, zone_mask,
)
from .ingest import FrameSeries
from .possession import LABEL_DEAD, LABEL_NONE, LABEL_POSSESSION

PERIOD_SECONDS = 45 * 60

# (role, x, y) for a team attacking +x; mirrored through the center otherwise
FORMATION = (
    ("goalkeeper", -50.0, 0.0),
    ("outfield", -35.0, -20.0), ("outfield", -35.0, -7.0), ("outfield", -35.0, 7.0), ("outfield", -35.0, 20.0),
    ("outfield", -20.0, -24.0), ("outfield", -20.0, -8.0), ("outfield", -20.0, 8.0), ("outfield", -20.0, 24.0),
    ("outfield", -6.0, -10.0), ("outfield", -6.0, 10.0),
)

SET_PIECE_KINDS = {
    "kickoff": "kickoff",
    "penalty": "penalty kick",
    "corner": "corner kick",
    "goal_kick": "goal kick",
    "throw_in": "throw-in",
    "free_kick": "free kick",
    "loose": "free kick?",
}
_DBE = {
    "kickoff": "goal", "penalty kick": "penalty awarded", "corner kick": "out for corner kick",
    "goal kick": "out for goal kick", "throw-in": "out for throw-in", "free kick": "foul", "free kick?": "foul?",
}
KICK_TYPES = ("pass", "cross", "shot", "out", "clear", "kick")
CLEAR_RADIUS = 4.0  # other players keep this far from a restart spot
EXECUTOR_OFFSET = 0.4


class ScriptError(ValueError):
    """Inconsistent match script."""


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 0.0
    ball_dropout: float = 0.0
    swaps: int = 0
    flicker: int = 0

    def __post_init__(self) -> None:
        if self.sigma < 0 or not 0 <= self.ball_dropout < 1 or self.swaps < 0 or self.flicker < 0:
            raise ValueError("invalid noise model")

    @property
    def is_zero(self) -> bool:
        return self.sigma == 0 and self.ball_dropout == 0 and self.swaps == 0 and self.flicker == 0


@dataclass
class MatchScript:
    name: str
    teams: dict  # team -> {"attack": "+x"|"-x", "players": [{"id", "role"}]}
    periods: list  # [{"actions": [...]}, ...]
    pitch_length: float = 105.0
    pitch_width: float = 68.0
    sample_rate: float = 25.0
    status_signal: str = "boolean"
    noise: NoiseModel = field(default_factory=NoiseModel)
    r_pz: float = 1.0

    def __post_init__(self) -> None:
        if self.status_signal not in ("boolean", "missing"):
            raise ScriptError(f"status_signal must be 'boolean' or 'missing', got {self.status_signal!r}")
        if self.sample_rate <= 0:
            raise ScriptError("sample_rate must be positive")
        if len(self.teams) != 2:
            raise ScriptError("a script needs exactly two teams")

    @classmethod
    def from_dict(cls, d: dict) -> "MatchScript":
        teams = {}
        for team, entry in d["teams"].items():
            players = entry.get("players")
            if players is None:
                n = int(entry.get("size", 11))
                players = [{"id": f"{team}{k + 1}", "role": FORMATION[k][0]} for k in range(n)]
            teams[str(team)] = {"attack": entry.get("attack", "+x"), "players": [dict(p) for p in players]}
        pitch = d.get("pitch", {})
        noise = NoiseModel(**d.get("noise", {}))
        return cls(
            name=d.get("name", "script"), teams=teams, periods=d["periods"],
            pitch_length=float(pitch.get("length", 105.0)), pitch_width=float(pitch.get("width", 68.0)),
            sample_rate=float(d.get("sample_rate", 25.0)), status_signal=d.get("status_signal", "boolean"),
            noise=noise, r_pz=float(d.get("r_pz", 1.0)),
        )

    @classmethod
    def load(cls, path) -> "MatchScript":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pitch": {"length": self.pitch_length, "width": self.pitch_width},
            "sample_rate": self.sample_rate,
            "status_signal": self.status_signal,
            "r_pz": self.r_pz,
            "noise": {"sigma": self.noise.sigma, "ball_dropout": self.noise.ball_dropout,
                      "swaps": self.noise.swaps, "flicker": self.noise.flicker},
            "teams": self.teams,
            "periods": self.periods,
        }

    def pitch(self) -> PitchModel:
        return build_pitch(self.pitch_length, self.pitch_width, {t: s["attack"] for t, s in self.teams.items()})


@dataclass(frozen=True, eq=False)
class GroundTruth:
    events: list
    ball_control: np.ndarray  # LABEL_* codes per frame
    name: str = ""


def bundled_script_names() -> list[str]:
    root = resources.files("autoevent") / "data" / "scripts"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled_script(name: str) -> MatchScript:
    root = resources.files("autoevent") / "data" / "scripts"
    return MatchScript.from_dict(json.loads((root / f"{name}.json").read_text(encoding="utf-8")))


# --------------------------------------------------------------------------- simulation


class _Track:
    def __init__(self):
        self.t: list[float] = []
        self.p: list[tuple[float, float]] = []

    def key(self, t: float, p) -> None:
        p = (float(p[0]), float(p[1]))
        if self.t and t <= self.t[-1] + 1e-9:
            self.p[-1] = p
            self.t[-1] = max(self.t[-1], t)
        else:
            self.t.append(t)
            self.p.append(p)

    def sample(self, times: np.ndarray) -> np.ndarray:
        t = np.asarray(self.t)
        p = np.asarray(self.p)
        return np.stack([np.interp(times, t, p[:, 0]), np.interp(times, t, p[:, 1])], axis=1)

    def at(self, time: float) -> np.ndarray:
        return self.sample(np.asarray([time]))[0]


class _Period:
    """Simulates one period; times are seconds from the period start."""

    def __init__(self, script: MatchScript, pitch: PitchModel, number: int):
        self.script = script
        self.pitch = pitch
        self.number = number
        self.hl, self.hw = pitch.half_length, pitch.half_width
        self.ids = [p["id"] for t in script.teams.values() for p in t["players"]]
        self.team_of = {p["id"]: team for team, t in script.teams.items() for p in t["players"]}
        self.role_of = {p["id"]: p.get("role", "outfield") for t in script.teams.values() for p in t["players"]}
        self.tracks = {pid: _Track() for pid in self.ids}
        self.ball = _Track()
        self.pos = {pid: np.asarray(self._formation(pid)) for pid in self.ids}
        self.ball_pos = np.zeros(2)
        self.t = 0.0
        self.live: list[list[float]] = []
        self.holder: str | None = None
        self.items: list[dict] = []
        self.holds: list[tuple[float, float]] = []
        self._hold_start: float | None = None
        for pid in self.ids:
            self.tracks[pid].key(0.0, self.pos[pid])
        self.ball.key(0.0, self.ball_pos)

    # -- helpers
    def sign(self, team: str) -> int:
        return self.pitch.attack_sign(team, self.number)

    def _formation(self, pid: str):
        team = self.team_of[pid]
        players = self.script.teams[team]["players"]
        k = [p["id"] for p in players].index(pid)
        _, x, y = FORMATION[k % len(FORMATION)]
        s = self.sign(team)
        return (s * x, s * y)

    def _player(self, pid, i):
        if pid not in self.pos:
            raise ScriptError(f"action {i}: unknown player {pid!r}")
        return pid

    @property
    def in_play(self) -> bool:
        return bool(self.live) and self.live[-1][1] is None

    def _play_on(self, t):
        self.live.append([t, None])

    def _play_off(self, t):
        if self.in_play:
            self.live[-1][1] = t
        self._release(t)

    def _grab(self, pid, t):
        self.holder = pid
        self._hold_start = t

    def _release(self, t):
        if self.holder is not None and self._hold_start is not None:
            self.holds.append((self._hold_start, t, self.holder))
        self._hold_start = None

    def _move(self, targets: dict, t0: float, t1: float, ball_to=None):
        """Move players linearly from their current spot to ``targets`` over [t0, t1]."""
        for pid, dest in targets.items():
            dest = np.asarray(dest, dtype=float)
            self.tracks[pid].key(t0, self.pos[pid])
            self.tracks[pid].key(t1, dest)
            self.pos[pid] = dest
        if ball_to is not None:
            self.ball.key(t0, self.ball_pos)
            self.ball.key(t1, ball_to)
            self.ball_pos = np.asarray(ball_to, dtype=float)

    def _wait(self, duration: float, moves: dict | None = None):
        """Let time pass; the holder keeps the ball at its feet."""
        if duration <= 0:
            return
        t0, t1 = self.t, self.t + duration
        targets = dict(moves or {})
        if self.holder is not None and self.holder in targets:
            self._move(targets, t0, t1, ball_to=targets[self.holder])
        else:
            self._move(targets, t0, t1)
        self.t = t1

    def _moves(self, action, i) -> dict:
        return {self._player(k, i): v for k, v in (action.get("moves") or {}).items()}

    def _exit_fraction(self, a, b) -> float | None:
        """Fraction along a->b where the ball first leaves the pitch, or None."""
        hl, hw = self.hl, self.hw
        fr = []
        for k, lim in ((0, hl), (1, hw)):
            if abs(b[k]) > lim:
                edge = lim if b[k] > 0 else -lim
                d = b[k] - a[k]
                if abs(d) > 1e-12:
                    fr.append((edge - a[k]) / d)
        if not fr:
            return None
        return max(0.0, min(fr))

    # -- actions
    def run(self, actions: list[dict]) -> None:
        for i, action in enumerate(actions):
            kind = action.get("type")
            if kind in KICK_TYPES:
                self.kick(action, i)
            elif kind == "set_piece":
                self.set_piece(action, i)
            elif kind == "dribble":
                self.dribble(action, i)
            elif kind == "leave":
                self.leave(action, i)
            elif kind in ("hold", "move"):
                if kind == "hold" and self.holder is None:
                    raise ScriptError(f"action {i}: hold without a player in possession")
                self._wait(float(action.get("duration", 1.0)), self._moves(action, i))
            elif kind == "collect":
                self.collect(action, i)
            elif kind in ("whistle", "foul"):
                self.whistle(i)
            elif kind == "end":
                self.end(float(action.get("duration", 1.0)))
                return
            else:
                raise ScriptError(f"action {i}: unknown action type {kind!r}")
        self.end(1.0)

    def kick(self, action, i):
        p = self.holder
        if p is None or not self.in_play:
            raise ScriptError(f"action {i}: kick without a player in possession")
        if "from" in action and action["from"] != p:
            raise ScriptError(f"action {i}: ball is with {p}, not {action['from']} (ball teleport)")
        speed = float(action.get("speed", 15.0))
        if speed <= 0:
            raise ScriptError(f"action {i}: speed must be positive")
        moves = self._moves(action, i)
        self._wait(float(action.get("wait", 1.0)))
        origin = self.ball_pos.copy()
        x, y = self.pos[p]
        if p not in moves and (abs(x) > self.hl or abs(y) > self.hw):
            # throw-in and corner takers step back onto the pitch
            moves[p] = np.clip(self.pos[p], [-self.hl + 1, -self.hw + 1], [self.hl - 1, self.hw - 1])
        receiver = action.get("to")
        if receiver is not None:
            self._player(receiver, i)
            if receiver == p:
                raise ScriptError(f"action {i}: {p} cannot pass to itself")
            end = np.asarray(moves.get(receiver, self.pos[receiver]), dtype=float)
        elif "target" in action:
            end = np.asarray(action["target"], dtype=float)
        else:
            raise ScriptError(f"action {i}: kick needs 'to' or 'target'")
        dist = float(np.hypot(*(end - origin)))
        if dist < 1e-6:
            raise ScriptError(f"action {i}: zero-length kick")
        t0 = self.t
        t1 = t0 + dist / speed
        self._release(t0)
        self.items.append({"kind": "loss", "player": p, "t": t0, "origin": origin, "end": end, "kick": True})
        self.holder = None
        self._move(moves, t0, t1, ball_to=end)
        self.t = t1
        frac = self._exit_fraction(origin, end)
        if frac is not None:
            if receiver is not None:
                raise ScriptError(f"action {i}: receiver {receiver} is off the pitch")
            self._play_off(t0 + frac * (t1 - t0))
            return
        if receiver is not None:
            self.items.append({"kind": "gain", "player": receiver, "t": t1})
            self._grab(receiver, t1)

    def collect(self, action, i):
        pid = self._player(action.get("player"), i)
        if not self.in_play or self.holder is not None:
            raise ScriptError(f"action {i}: collect needs a loose ball in play")
        speed = float(action.get("speed", 5.0))
        if speed <= 0:
            raise ScriptError(f"action {i}: speed must be positive")
        dist = float(np.hypot(*(self.ball_pos - self.pos[pid])))
        t0, t1 = self.t, self.t + max(dist, 1e-3) / speed
        moves = self._moves(action, i)
        moves[pid] = self.ball_pos.copy()
        self._move(moves, t0, t1)
        # control starts once the player is within the possession radius
        t_in = t1 - min(self.script.r_pz, dist) / speed
        self.items.append({"kind": "gain", "player": pid, "t": t_in})
        self._grab(pid, t1)
        self.t = t1

    def dribble(self, action, i):
        p = self.holder
        if p is None or not self.in_play:
            raise ScriptError(f"action {i}: dribble without a player in possession")
        speed = float(action.get("speed", 5.0))
        ball_speed = float(action.get("ball_speed", 9.0))
        if speed <= 0 or ball_speed <= 0:
            raise ScriptError(f"action {i}: speed must be positive")
        for point in action.get("path", []):
            point = np.asarray(point, dtype=float)
            d = float(np.hypot(*(point - self.pos[p])))
            t0 = self.t
            self.ball.key(t0, self.ball_pos)
            self.ball.key(t0 + d / ball_speed, point)
            self.ball_pos = point
            self._move({p: point}, t0, t0 + d / speed)
            self.t = t0 + d / speed

    def leave(self, action, i):
        p = self.holder
        if p is None or not self.in_play:
            raise ScriptError(f"action {i}: leave without a player in possession")
        away = np.asarray(action["away"], dtype=float)
        home = self.pos[p].copy()
        speed = float(action.get("speed", 3.0))
        d = float(np.hypot(*(away - home)))
        t0 = self.t
        self._move({p: away}, t0, t0 + d / speed)
        self._move({p: home}, t0 + d / speed + float(action.get("pause", 0.5)), t0 + 2 * d / speed + float(action.get("pause", 0.5)))
        self.t = t0 + 2 * d / speed + float(action.get("pause", 0.5))

    def whistle(self, i):
        if not self.in_play:
            raise ScriptError(f"action {i}: whistle while the ball is dead")
        if self.holder is not None:
            self.items.append({"kind": "loss", "player": self.holder, "t": self.t, "kick": False})
        self._play_off(self.t)
        self.holder = None

    def end(self, duration):
        if self.in_play:
            if self.holder is not None:
                self.items.append({"kind": "loss", "player": self.holder, "t": self.t, "kick": False})
            self._play_off(self.t)
        self.holder = None
        self.items.append({"kind": "end", "t": self.t})
        self.t += duration
        self.ball.key(self.t, self.ball_pos)

    def set_piece(self, action, i):
        kind = action.get("kind")
        if kind not in SET_PIECE_KINDS:
            raise ScriptError(f"action {i}: unknown set piece {kind!r}")
        if self.in_play:
            self.whistle(i)
        t_stop = self.live[-1][1] if self.live else 0.0
        ex = action.get("executor")
        if ex is not None:
            self._player(ex, i)
        elif kind != "loose":
            raise ScriptError(f"action {i}: set piece {kind} needs an executor")
        team = self.team_of[ex] if ex is not None else action.get("team")
        ball, targets = self._configuration(kind, ex, team, action, i)
        for pid, p in (action.get("players") or {}).items():
            targets[self._player(pid, i)] = np.asarray(p, dtype=float)
        duration = float(action.get("duration", 3.0))
        t0 = self.t
        self._move(targets, t0, t0 + 0.4 * duration, ball_to=ball)
        self.t = t0 + duration
        for pid in self.ids:
            self.tracks[pid].key(self.t, self.pos[pid])
        self.ball.key(self.t, self.ball_pos)
        self.items.append({"kind": "dead", "t": t_stop, "restart": self.t, "set_piece": SET_PIECE_KINDS[kind],
                           "team": team, "executor": ex, "period_start": not self.live})
        self._play_on(self.t)
        if ex is not None and kind != "loose":
            self.items.append({"kind": "gain", "player": ex, "t": self.t, "first": True})
            self._grab(ex, self.t)

    def _configuration(self, kind, ex, team, action, i):
        hl, hw = self.hl, self.hw
        targets = {}
        s = self.sign(team) if team is not None else 1
        back = np.asarray([-s * EXECUTOR_OFFSET, 0.0])
        if kind == "kickoff":
            targets = {pid: np.asarray(self._formation(pid)) for pid in self.ids}
            ball = np.zeros(2)
            targets[ex] = ball + back
            return ball, targets
        if kind == "penalty":
            mark = np.asarray([s * (hl - PENALTY_MARK_DISTANCE), 0.0])
            keeper = action.get("keeper") or self._keeper(self.pitch.opponent(team))
            for pid in self.ids:
                if pid in (ex, keeper):
                    continue
                x, y = self.pos[pid]
                targets[pid] = np.asarray([s * min(s * x, 30.0), float(np.clip(y, -30.0, 30.0))])
            targets[keeper] = np.asarray([s * hl, 0.0])
            targets[ex] = mark + back
            return mark, targets
        if kind == "corner":
            side = float(np.sign(action.get("side", np.sign(self.ball_pos[1]) or 1.0)))
            ball = np.asarray([s * (hl - 0.5), side * (hw - 0.5)])
            targets[ex] = np.asarray([s * hl, side * (hw - 0.5)])
        elif kind == "goal_kick":
            y0 = float(action.get("y", 2.0))
            ball = np.asarray([-s * (hl - 3.0), y0])
            targets[ex] = ball + back
        elif kind == "throw_in":
            spot = action.get("spot")
            x = float(spot[0]) if spot is not None else float(self.ball_pos[0])
            side = float(np.sign(spot[1] if spot is not None else self.ball_pos[1]) or 1.0)
            x = float(np.clip(x, -hl + 2, hl - 2))
            ball = np.asarray([x, side * hw])
            targets[ex] = np.asarray([x, side * (hw + EXECUTOR_OFFSET)])
        elif kind in ("free_kick", "loose"):
            spot = action.get("spot")
            ball = np.asarray(spot if spot is not None else self.ball_pos, dtype=float)
            if ex is not None:
                targets[ex] = ball + back
        else:  # pragma: no cover - guarded by SET_PIECE_KINDS
            raise ScriptError(f"action {i}: unknown set piece {kind!r}")
        for pid in self.ids:
            if pid == ex:
                continue
            p = self.pos[pid]
            d = p - ball
            r = float(np.hypot(*d))
            if r < CLEAR_RADIUS:
                u = d / r if r > 1e-9 else np.asarray([0.0, 1.0 if ball[1] <= 0 else -1.0])
                q = ball + u * CLEAR_RADIUS
                q = np.clip(q, [-hl + 0.5, -hw + 0.5], [hl - 0.5, hw - 0.5])
                if float(np.hypot(*(q - ball))) < CLEAR_RADIUS - 1e-9:
                    q = ball + np.asarray([-s * CLEAR_RADIUS, 0.0])
                targets[pid] = q
        return ball, targets

    def _keeper(self, team):
        for pid in self.ids:
            if self.team_of[pid] == team and self.role_of[pid] == "goalkeeper":
                return pid
        raise ScriptError(f"team {team} has no goalkeeper for the penalty")


# --------------------------------------------------------------------------- ground truth


class _Truth:
    """Expected labels from script intent, mirroring the detection rules."""

    def __init__(self, sim: _Period, pitch: PitchModel, retain=1.0, unsuccessful=2.0):
        self.sim = sim
        self.pitch = pitch
        self.retain = retain
        self.unsuccessful = unsuccessful

    def at(self, pid, t):
        return self.sim.tracks[pid].at(t)

    def attackers_in_area(self, team, t):
        s = self.sim.sign(team)
        n = 0
        for pid in self.sim.ids:
            if self.sim.team_of[pid] == team and zone_mask(self.at(pid, t), Zone("penalty-area"), self.pitch, s):
                n += 1
        return n

    def labels(self) -> dict[int, str | None]:
        items = self.sim.items
        out: dict[int, str | None] = {}
        team_of, role_of = self.sim.team_of, self.sim.role_of
        for k, it in enumerate(items):
            if it["kind"] != "loss" or k in out:
                continue
            if not it.get("kick"):
                out[k] = None
                continue
            team = team_of[it["player"]]
            s = self.sim.sign(team)
            origin, end = it["origin"], it["end"]
            direction = (end - origin) / float(np.hypot(*(end - origin)))
            zone = shooter_zone(origin, self.pitch, s)
            nxt = items[k + 1] if k + 1 < len(items) else None
            goalward = ray_hits_goal(origin, direction, self.pitch, s, 2.0)
            on = ray_hits_goal(origin, direction, self.pitch, s, 0.25)
            if nxt is None:
                out[k] = "pass"
                continue
            if nxt["kind"] == "end":
                out[k] = "shot on target" if self._into_goal(end) and on else "pass"
                continue
            if nxt["kind"] == "dead":
                spe, sp_team = nxt["set_piece"], nxt["team"]
                if spe == "kickoff" and self._into_goal(end):
                    if sp_team != team:
                        out[k] = "shot on target"
                    elif ray_hits_goal(origin, direction, self.pitch, -s, 0.25):
                        out[k] = "own goal"
                    else:
                        out[k] = "pass"
                elif (spe == "corner kick" and sp_team == team) or (spe == "goal kick" and sp_team != team):
                    shot = zone != "cross-zone" and goalward
                    out[k] = ("shot on target" if on else "shot off target") if shot else "pass"
                else:
                    out[k] = "pass"
                continue
            # next is a gain
            q = nxt["player"]
            t_gain = nxt["t"]
            keeper = role_of[q] == "goalkeeper" and team_of[q] != team and zone_mask(
                self.at(q, t_gain), Zone("penalty-area", side="own"), self.pitch, self.sim.sign(team_of[q]))
            if keeper:
                if zone == "cross-zone" and self.attackers_in_area(team, t_gain) >= 1:
                    out[k], stem = "cross", "claim"
                elif zone != "cross-zone" and goalward:
                    out[k], stem = ("shot on target" if on else "shot off target"), "save"
                else:
                    out[k], out[k + 1] = "pass", "reception from loose ball"
                    continue
                gk_loss = items[k + 2] if k + 2 < len(items) and items[k + 2]["kind"] == "loss" else None
                suffix = "retain"
                if gk_loss is not None:
                    after = items[k + 3] if k + 3 < len(items) else None
                    if (after is not None and after["kind"] == "dead" and after["set_piece"] == "kickoff"
                            and after["t"] - t_gain <= self.unsuccessful):
                        out[k + 1], out[k + 2] = "unsuccessful save", None
                        continue
                    if gk_loss["t"] - t_gain <= self.retain:
                        suffix = "deflect"
                        out[k + 2] = None
                out[k + 1] = f"{stem}-{suffix}"
                continue
            cross = zone == "cross-zone" and zone_mask(self.at(q, t_gain), Zone("penalty-area"), self.pitch, s)
            out[k] = "cross" if cross and self.attackers_in_area(team, t_gain) >= 1 else "pass"
        # gains not settled above
        prev_loss = None
        for k, it in enumerate(items):
            if it["kind"] == "dead":
                prev_loss = None
            if it["kind"] == "loss":
                prev_loss = it
            if it["kind"] != "gain" or k in out:
                continue
            if it.get("first") or prev_loss is None:
                out[k] = None
            else:
                out[k] = "reception" if team_of[prev_loss["player"]] == team_of[it["player"]] else "interception"
        return out

    def _into_goal(self, end) -> bool:
        return abs(end[0]) > self.pitch.half_length and abs(end[1]) < GOAL_HALF_WIDTH


def _in_penalty_area(ball: np.ndarray, pitch: PitchModel) -> np.ndarray:
    a = Zone("penalty-area")
    return zone_mask(ball, a, pitch, 1) | zone_mask(ball, a, pitch, -1)


def generate_match(script: MatchScript, seed: int = 0, noise: NoiseModel | None = None):
    """Simulate ``script`` and return ``(frames, truth)``.

    ``noise`` overrides the script's own noise model; all randomness comes
    from ``seed``.
    """
    pitch = script.pitch()
    rate = script.sample_rate
    noise = script.noise if noise is None else noise
    ids = [p["id"] for t in script.teams.values() for p in t["players"]]
    if len(set(ids)) != len(ids):
        raise ScriptError("duplicate player ids in rosters")
    teams = tuple(team for team, t in script.teams.items() for _ in t["players"])
    roles = tuple(p.get("role", "outfield") for t in script.teams.values() for p in t["players"])
    blocks = []
    rows: list[EventRecord] = []
    labels = []
    next_frame = 0
    for number, period in enumerate(script.periods, start=1):
        sim = _Period(script, pitch, number)
        sim.run(period.get("actions", []))
        n = int(math.floor(sim.t * rate + 1e-9)) + 1
        times = np.arange(n) / rate
        # periods nominally start every 45 minutes; overlong ones push the next along
        offset_frames = max(int(round((number - 1) * PERIOD_SECONDS * rate)), next_frame)
        next_frame = offset_frames + n
        ball = sim.ball.sample(times)
        pos = np.stack([sim.tracks[pid].sample(times) for pid in ids], axis=1)
        live = np.zeros(n, dtype=bool)
        for a, b in sim.live:
            b = sim.t if b is None else b
            live |= (times >= a - 1e-9) & (times < b - 1e-9)
        lab = np.full(n, LABEL_NONE, dtype=np.int8)
        for a, b, _ in sim.holds:
            lab[(times >= a - 1e-9) & (times < b - 1e-9)] = LABEL_POSSESSION
        lab[~live] = LABEL_DEAD
        labels.append(lab)
        blocks.append((number, offset_frames, times, ball, pos, live))
        rows.extend(_truth_rows(sim, pitch, number, offset_frames, rate, ball, live))
    frames = _assemble(blocks, ids, teams, roles, rate, script.status_signal == "boolean", script.name)
    frames.meta.update({"attack": dict(pitch.attack), "pitch_length": pitch.length, "pitch_width": pitch.width})
    truth = GroundTruth(rows, np.concatenate(labels) if labels else np.zeros(0, dtype=np.int8), script.name)
    if not noise.is_zero:
        frames = corrupt(frames, noise, seed)
    return frames, truth


def _truth_rows(sim: _Period, pitch, number, offset_frames, rate, ball, live) -> list[EventRecord]:
    labels = _Truth(sim, pitch).labels()
    base_t = offset_frames / rate

    def frame_at(t):
        return int(round(t * rate))

    rows, row_item = [], []
    for k, it in enumerate(sim.items):
        if it["kind"] in ("gain", "loss"):
            pid = it["player"]
            f = frame_at(it["t"])
            rows.append(EventRecord(offset_frames + f, number, round(base_t + f / rate, 6), pid, sim.team_of[pid],
                                    "possession", labels.get(k)))
            row_item.append(k)
    dead = [(k, it) for k, it in enumerate(sim.items) if it["kind"] == "dead"]
    spes = [it["set_piece"] for _, it in dead]
    dbes = [None if it["period_start"] else _DBE[it["set_piece"]] for _, it in dead]
    # retaken kickoffs: the ball never reached a penalty area in between
    kicks = [j for j, s in enumerate(spes) if s == "kickoff"]
    area = _in_penalty_area(ball, pitch) & live
    for a, b in zip(kicks, kicks[1:]):
        lo = frame_at(dead[a][1]["restart"])
        hi = frame_at(dead[b][1]["t"])
        if not area[lo:hi].any():
            spes[a] = "incorrect kickoff"
            dbes[b] = "referee interruption"
    for (k, it), spe, dbe in zip(dead, spes, dbes):
        before = [r for r, j in enumerate(row_item) if j < k]
        if dbe is not None and before:
            rows[before[-1]] = replace(rows[before[-1]], dead_ball_event=dbe)
        after = [r for r, j in enumerate(row_item) if j > k]
        if after:
            rows[after[0]] = replace(rows[after[0]], from_set_piece=spe)
    # a ball still flying into the goal when the period ends
    end = [k for k, it in enumerate(sim.items) if it["kind"] == "end"]
    if end and end[0] > 0:
        last = sim.items[end[0] - 1]
        if last["kind"] == "loss" and last.get("kick") and labels.get(end[0] - 1) == "shot on target":
            r = row_item.index(end[0] - 1)
            rows[r] = replace(rows[r], dead_ball_event="goal?")
    return rows


def _assemble(blocks, ids, teams, roles, rate, status_given, name) -> FrameSeries:
    frame = np.concatenate([off + np.arange(len(t)) for _, off, t, *_ in blocks]).astype(np.int64)
    period = np.concatenate([np.full(len(t), num, dtype=np.int64) for num, _, t, *_ in blocks])
    timestamp = np.concatenate([off / rate + t for _, off, t, *_ in blocks])
    ball = np.concatenate([b[3] for b in blocks])
    pos = np.concatenate([b[4] for b in blocks])
    live = np.concatenate([b[5] for b in blocks])
    if not status_given:
        ball = ball.copy()
        ball[~live] = np.nan
    tracked = np.ones(pos.shape[:2], dtype=bool)
    return FrameSeries(frame, period, timestamp, ball, live if status_given else np.ones(len(frame), dtype=bool),
                       tuple(ids), teams, roles, pos, tracked, float(rate), status_given, {"source": f"synth:{name}"})


def corrupt(frames: FrameSeries, noise: NoiseModel, seed: int = 0) -> FrameSeries:
    """Apply positional noise, ball dropout, player swaps and status flicker."""
    rng = np.random.default_rng(seed)
    n, p = len(frames), frames.n_players
    ball = frames.ball.copy()
    pos = frames.positions.copy()
    in_play = frames.in_play.copy()
    if noise.sigma > 0:
        ball += rng.normal(0.0, noise.sigma, ball.shape)
        pos += rng.normal(0.0, noise.sigma, pos.shape)
    if noise.ball_dropout > 0:
        ball[rng.random(n) < noise.ball_dropout] = np.nan
    rate = frames.sample_rate
    teams = np.asarray(frames.teams, dtype=object)
    for _ in range(noise.swaps):
        if n < 2 or p < 2:
            break
        a = int(rng.integers(p))
        mates = np.flatnonzero(teams == teams[a])
        mates = mates[mates != a]
        if not len(mates):
            continue
        b = int(rng.choice(mates))
        s = int(rng.integers(n))
        e = min(n, s + int(2 * rate))
        pos[s:e, [a, b]] = pos[s:e, [b, a]]
    if frames.status_given:
        for _ in range(noise.flicker):
            s = int(rng.integers(n))
            in_play[s:s + int(rng.integers(1, 4))] ^= True
    return replace(frames, ball=ball, positions=pos, in_play=in_play)


# --------------------------------------------------------------------------- random scripts


def random_script(seed: int = 0, minutes: float = 90.0, periods: int = 2, name: str | None = None) -> MatchScript:
    """A long, loosely constrained script for load and equivalence testing.

    Passes go between formation spots with occasional interceptions, throw-ins,
    goal kicks, corners and free kicks. Geometry is not curated, so only
    the frames (not the ground truth) are meant to be meaningful.
    """
    rng = np.random.default_rng(seed)
    teams = {"A": {"attack": "+x"}, "B": {"attack": "-x"}}
    per = minutes * 60.0 / periods
    out_periods = []
    for number in range(1, periods + 1):
        kick_team = "A" if number % 2 else "B"
        actions = [{"type": "set_piece", "kind": "kickoff", "executor": f"{kick_team}10"}]
        holder_team, holder = kick_team, 10
        elapsed = 3.0
        while elapsed < per - 30:
            r = rng.random()
            if r < 0.80:
                same = rng.random() < 0.85
                team = holder_team if same else ("B" if holder_team == "A" else "A")
                choices = [k for k in range(2, 12) if not (team == holder_team and k == holder)]
                to = int(rng.choice(choices))
                actions.append({"type": "pass", "to": f"{team}{to}", "wait": round(float(rng.uniform(0.6, 2.5)), 2),
                                "speed": round(float(rng.uniform(10, 20)), 1)})
                holder_team, holder = team, to
                elapsed += 4.0
            else:
                kind = ["throw_in", "goal_kick", "corner", "free_kick"][int(rng.integers(4))]
                x = round(float(rng.uniform(-40, 40)), 1)
                side = 1 if rng.random() < 0.5 else -1
                actions.append({"type": "out", "target": [x, side * 36.0], "wait": 1.0})
                team = "A" if rng.random() < 0.5 else "B"
                if kind == "throw_in":
                    ex = int(rng.choice([2, 5, 6, 9]))
                    actions.append({"type": "set_piece", "kind": kind, "executor": f"{team}{ex}", "spot": [x, side * 34.0]})
                elif kind == "goal_kick":
                    ex = 1
                    actions.append({"type": "set_piece", "kind": kind, "executor": f"{team}1"})
                elif kind == "corner":
                    ex = int(rng.choice([6, 9]))
                    actions.append({"type": "set_piece", "kind": kind, "executor": f"{team}{ex}", "side": side})
                else:
                    ex = int(rng.choice([3, 4, 7, 8]))
                    actions.append({"type": "set_piece", "kind": kind, "executor": f"{team}{ex}",
                                    "spot": [x * 0.5, round(float(rng.uniform(-15, 15)), 1)]})
                holder_team, holder = team, ex
                elapsed += 8.0
        actions.append({"type": "hold", "duration": max(1.0, per - elapsed)})
        actions.append({"type": "end"})
        out_periods.append({"actions": actions})
    return MatchScript.from_dict({"name": name or f"random-{seed}", "teams": teams, "periods": out_periods})
