"""Tracking-data ingest: parsing, normalization, ball status and smoothing.

Two text formats are supported:

``generic-csv``
    Optional leading ``# key=value`` lines (``units``, ``sample_rate``),
    then a header ``frame,period,timestamp,ball_x,ball_y[,ball_status]``
    followed by repeated ``player_id,team,role,x,y`` groups. Empty ball
    cells mean the ball is missing; empty ``x``/``y`` cells mean the player
    is untracked in that frame.

``jsonl-frames``
    An optional first line ``{"meta": {...}}`` followed by one JSON object
    per frame with the same fields and a ``players`` list.
"""

from __future__ import annotations

import csv
import io
import json
import math
from array import array
from dataclasses import dataclass, field, replace
from typing import IO, Iterable

import numpy as np
from scipy.signal import savgol_filter

FORMATS = ("generic-csv", "jsonl-frames")
ROLES = ("outfield", "goalkeeper", "unknown")
_UNIT_SCALE = {"m": 1.0, "cm": 0.01}
_STATUS_TRUE = {"in-play", "in_play", "alive", "1", "true", "live"}
_STATUS_FALSE = {"dead", "0", "false", "dead-ball", "dead ball"}


class ParseError(ValueError):
    """Malformed tracking input; carries the offending frame and column."""

    def __init__(self, message: str, frame=None, column=None):
        self.frame = frame
        self.column = column
        where = []
        if frame is not None:
            where.append(f"frame {frame}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


@dataclass(frozen=True, eq=False)
class FrameSeries:
    """Time-ordered frames of a match in pitch meters.

    Player arrays are dense over the roster: ``positions[i, j]`` is player
    ``player_ids[j]`` at frame ``i`` (NaN when unknown). ``tracked`` is the
    provider's observation flag; interpolated positions keep it False.
    """

    frame: np.ndarray
    period: np.ndarray
    timestamp: np.ndarray
    ball: np.ndarray
    in_play: np.ndarray
    player_ids: tuple[str, ...]
    teams: tuple[str, ...]
    roles: tuple[str, ...]
    positions: np.ndarray
    tracked: np.ndarray
    sample_rate: float
    status_given: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def n_players(self) -> int:
        return len(self.player_ids)

    @property
    def ball_present(self) -> np.ndarray:
        return np.isfinite(self.ball).all(axis=1)

    def player_index(self, player_id: str) -> int:
        try:
            return self.player_ids.index(player_id)
        except ValueError:
            raise KeyError(f"unknown player {player_id!r}") from None

    def team_ids(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for t in self.teams:
            if t:
                seen.setdefault(t, None)
        return tuple(seen)

    def periods(self) -> list[int]:
        return sorted(int(p) for p in np.unique(self.period))

    def equals(self, other: "FrameSeries") -> bool:
        """Exact equality, NaN-aware."""
        if not isinstance(other, FrameSeries):
            return False
        arrays = ("frame", "period", "timestamp", "ball", "in_play", "positions", "tracked")
        for name in arrays:
            a, b = getattr(self, name), getattr(other, name)
            if a.shape != b.shape or not np.array_equal(a, b, equal_nan=a.dtype.kind == "f"):
                return False
        return (
            self.player_ids == other.player_ids
            and self.teams == other.teams
            and self.roles == other.roles
            and self.sample_rate == other.sample_rate
            and self.status_given == other.status_given
        )


@dataclass(frozen=True)
class SmoothingConfig:
    polynomial_order: int = 2
    window: int = 7
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.window % 2 != 1 or self.window < 1:
            raise ValueError(f"smoothing window must be a positive odd integer, got {self.window}")
        if self.polynomial_order < 0 or self.window <= self.polynomial_order:
            raise ValueError("smoothing window must exceed the polynomial order")


# --------------------------------------------------------------------------- parsing


class _Builder:
    """Accumulates sparse per-frame rows into dense arrays."""

    def __init__(self, scale: float):
        self.scale = scale
        self.frames: list[int] = []
        self.periods: list[int] = []
        self.times: list[float] = []
        self.ball: list[tuple[float, float]] = []
        self.status: list[bool | None] = []
        self.index: dict[str, int] = {}
        self.teams: list[str] = []
        self.roles: list[str] = []
        # flat typed buffers keep per-point memory at 32 bytes
        self.rows, self.cols = array("q"), array("q")
        self.xs, self.ys = array("d"), array("d")
        self.untracked: list[tuple[int, int]] = []

    def add_player(self, row: int, frame: int, seen: set, pid: str, team: str, role: str, x, y, column=None,
                   tracked: bool = True):
        if pid in seen:
            raise ParseError(f"duplicate player {pid!r}", frame=frame, column=column)
        seen.add(pid)
        role = role or "unknown"
        if role not in ROLES:
            raise ParseError(f"invalid role {role!r} for player {pid!r}", frame=frame, column=column)
        j = self.index.get(pid)
        if j is None:
            j = self.index[pid] = len(self.teams)
            self.teams.append(team)
            self.roles.append(role)
        elif self.teams[j] != team:
            raise ParseError(f"player {pid!r} changes team", frame=frame, column=column)
        if x is None or y is None:
            return
        self.rows.append(row)
        self.cols.append(j)
        self.xs.append(x * self.scale)
        self.ys.append(y * self.scale)
        if not tracked:
            self.untracked.append((row, j))

    def build(self, sample_rate: float | None, meta: dict) -> FrameSeries:
        n, p = len(self.frames), len(self.teams)
        frame = np.asarray(self.frames, dtype=np.int64)
        period = np.asarray(self.periods, dtype=np.int64)
        timestamp = np.asarray(self.times, dtype=float)
        ball = np.asarray(self.ball, dtype=float).reshape(n, 2) * self.scale
        positions = np.full((n, p, 2), np.nan)
        if self.rows:
            rows = np.frombuffer(self.rows, dtype=np.int64).astype(np.intp)
            cols = np.frombuffer(self.cols, dtype=np.int64).astype(np.intp)
            positions[rows, cols, 0] = np.frombuffer(self.xs, dtype=float)
            positions[rows, cols, 1] = np.frombuffer(self.ys, dtype=float)
        tracked = np.isfinite(positions).all(axis=2)
        if self.untracked:
            u = np.asarray(self.untracked, dtype=np.intp)
            tracked[u[:, 0], u[:, 1]] = False
        given = [s for s in self.status if s is not None]
        status_given = len(given) > 0
        if status_given and len(given) != n:
            missing = next(i for i, s in enumerate(self.status) if s is None)
            raise ParseError("ball_status given for some frames only", frame=self.frames[missing], column="ball_status")
        present = np.isfinite(ball).all(axis=1)
        in_play = np.asarray(given, dtype=bool) if status_given else present.copy()
        _check_order(frame, timestamp)
        if sample_rate is None:
            sample_rate = _infer_rate(timestamp, period)
        if not sample_rate > 0:
            raise ParseError(f"sample rate must be positive, got {sample_rate}")
        return FrameSeries(
            frame=frame, period=period, timestamp=timestamp, ball=ball, in_play=in_play,
            player_ids=tuple(self.index), teams=tuple(self.teams), roles=tuple(self.roles),
            positions=positions, tracked=tracked, sample_rate=float(sample_rate),
            status_given=status_given, meta=meta,
        )


def _check_order(frame: np.ndarray, timestamp: np.ndarray) -> None:
    if len(frame) > 1:
        bad = np.flatnonzero(np.diff(frame) <= 0)
        if bad.size:
            raise ParseError("frame index not strictly increasing", frame=int(frame[bad[0] + 1]), column="frame")
        bad = np.flatnonzero(np.diff(timestamp) < 0)
        if bad.size:
            raise ParseError("timestamps decrease", frame=int(frame[bad[0] + 1]), column="timestamp")


def _infer_rate(timestamp: np.ndarray, period: np.ndarray) -> float:
    if len(timestamp) < 2:
        return 25.0
    same = period[1:] == period[:-1]
    dt = np.diff(timestamp)[same]
    dt = dt[dt > 0]
    if dt.size == 0:
        return 25.0
    return float(round(1.0 / float(np.median(dt)), 6))


def _parse_units(meta: dict) -> float:
    units = str(meta.get("units", "m")).strip().lower()
    if units not in _UNIT_SCALE:
        raise ParseError(f"unsupported units {units!r} declared in header", column="units")
    return _UNIT_SCALE[units]


def _parse_status(value: str, frame, column="ball_status") -> bool | None:
    v = value.strip().lower()
    if v == "":
        return None
    if v in _STATUS_TRUE:
        return True
    if v in _STATUS_FALSE:
        return False
    raise ParseError(f"invalid ball status {value!r}", frame=frame, column=column)


def _num(value: str, frame, column, optional=True):
    v = value.strip()
    if v == "":
        if optional:
            return None
        raise ParseError("missing value", frame=frame, column=column)
    try:
        out = float(v)
    except ValueError:
        raise ParseError(f"non-numeric value {value!r}", frame=frame, column=column) from None
    if not math.isfinite(out):
        raise ParseError(f"non-finite value {value!r}", frame=frame, column=column)
    return out


def _int(value, frame, column):
    try:
        return int(str(value).strip())
    except ValueError:
        raise ParseError(f"invalid integer {value!r}", frame=frame, column=column) from None


def _read_text(source) -> IO[str]:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    data = source.read()
    return io.StringIO(data.decode("utf-8") if isinstance(data, bytes) else data)


def _check_scale(builder: _Builder, meta: dict) -> None:
    """Reject coordinates that cannot be meters on a football pitch."""
    limit = float(meta.get("max_abs_coordinate", 500.0))
    peaks = [0.0]
    if builder.ball:
        ball = np.abs(np.asarray(builder.ball, dtype=float)) * builder.scale
        peaks.append(float(np.nanmax(ball)) if np.isfinite(ball).any() else 0.0)
    for buf in (builder.xs, builder.ys):
        if buf:
            peaks.append(float(np.abs(np.frombuffer(buf, dtype=float)).max()))
    top = max(peaks)
    if top > limit:
        raise ParseError(
            f"coordinates up to {top:.1f} exceed {limit} m; declared units do not match the data",
            column="units",
        )


def parse_generic_csv(source) -> FrameSeries:
    text = _read_text(source)
    meta: dict = {}
    lines = iter(text)
    header_line = None
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        header_line = line
        break
    if header_line is None:
        raise ParseError("empty tracking file")
    scale = _parse_units(meta)
    header = next(csv.reader([header_line]))
    header = [h.strip() for h in header]
    base = ["frame", "period", "timestamp", "ball_x", "ball_y"]
    if header[:5] != base:
        raise ParseError(f"header must start with {','.join(base)}", column=",".join(header[:5]))
    offset = 5
    has_status = len(header) > 5 and header[5] == "ball_status"
    if has_status:
        offset = 6
    group = ["player_id", "team", "role", "x", "y"]
    rest = header[offset:]
    if len(rest) % 5 or any(rest[i:i + 5] != group for i in range(0, len(rest), 5)):
        raise ParseError("player columns must repeat player_id,team,role,x,y", column=",".join(rest[:5]))
    b = _Builder(scale)
    for row_no, row in enumerate(csv.reader(lines)):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        frame = _int(row[0], row_no, "frame")
        if len(row) < offset:
            raise ParseError("row too short", frame=frame, column=header[len(row)] if len(row) < len(header) else None)
        b.frames.append(frame)
        b.periods.append(_int(row[1], frame, "period"))
        b.times.append(_num(row[2], frame, "timestamp", optional=False))
        bx, by = _num(row[3], frame, "ball_x"), _num(row[4], frame, "ball_y")
        if (bx is None) != (by is None):
            raise ParseError("ball has only one coordinate", frame=frame, column="ball_x" if bx is None else "ball_y")
        b.ball.append((math.nan, math.nan) if bx is None else (bx, by))
        b.status.append(_parse_status(row[5], frame) if has_status else None)
        seen: set = set()
        cur = len(b.frames) - 1
        for k in range(offset, len(row), 5):
            cells = row[k:k + 5]
            if len(cells) < 5:
                cells = cells + [""] * (5 - len(cells))
            pid = cells[0].strip()
            if not pid:
                if any(c.strip() for c in cells[1:]):
                    raise ParseError("player group without player_id", frame=frame, column=f"player_id@{k}")
                continue
            x, y = _num(cells[3], frame, f"x@{k + 3}"), _num(cells[4], frame, f"y@{k + 4}")
            if (x is None) != (y is None):
                raise ParseError(f"player {pid!r} has only one coordinate", frame=frame, column=f"x@{k + 3}")
            b.add_player(cur, frame, seen, pid, cells[1].strip(), cells[2].strip(), x, y, column=f"player_id@{k}")
    _check_scale(b, meta)
    rate = float(meta["sample_rate"]) if "sample_rate" in meta else None
    return b.build(rate, meta)


def parse_jsonl_frames(source) -> FrameSeries:
    """Parse ``jsonl-frames``: an optional ``{"meta": {...}}`` line, then one object per frame."""
    text = _read_text(source)
    meta: dict = {}
    b: _Builder | None = None
    loads = json.loads
    for line_no, line in enumerate(text):
        line = line.strip()
        if not line:
            continue
        try:
            obj = loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON on line {line_no + 1}: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ParseError(f"line {line_no + 1} is not a JSON object")
        if "meta" in obj and "frame" not in obj:
            if b is not None:
                raise ParseError("meta line must come first")
            meta = dict(obj["meta"])
            continue
        if b is None:
            b = _Builder(_parse_units(meta))
        _add_jsonl_frame(b, obj)
    if b is None:
        b = _Builder(_parse_units(meta))
    _check_scale(b, meta)
    rate = float(meta["sample_rate"]) if "sample_rate" in meta else None
    return b.build(rate, meta)


def _add_jsonl_frame(b: _Builder, obj: dict) -> None:
    frame = obj.get("frame")
    if frame is None:
        raise ParseError("frame object without 'frame'", column="frame")
    frame = _int(frame, None, "frame")
    for key in ("period", "timestamp"):
        if key not in obj:
            raise ParseError(f"missing field {key!r}", frame=frame, column=key)
    b.frames.append(frame)
    b.periods.append(_int(obj["period"], frame, "period"))
    ts = obj["timestamp"]
    if not isinstance(ts, (int, float)) or isinstance(ts, bool):
        raise ParseError("timestamp must be numeric", frame=frame, column="timestamp")
    b.times.append(float(ts))
    bx, by = obj.get("ball_x"), obj.get("ball_y")
    if (bx is None) != (by is None):
        raise ParseError("ball has only one coordinate", frame=frame, column="ball_x" if bx is None else "ball_y")
    b.ball.append((math.nan, math.nan) if bx is None else (float(bx), float(by)))
    st = obj.get("ball_status")
    b.status.append(None if st is None else _parse_status(str(st), frame))
    seen: set = set()
    cur = len(b.frames) - 1
    for k, pl in enumerate(obj.get("players", ())):
        pid = pl.get("player_id")
        if pid is None:
            raise ParseError("player without player_id", frame=frame, column=f"players[{k}]")
        x, y = pl.get("x"), pl.get("y")
        if (x is None) != (y is None):
            raise ParseError(f"player {pid!r} has only one coordinate", frame=frame, column=f"players[{k}]")
        b.add_player(cur, frame, seen, str(pid), str(pl.get("team", "")), str(pl.get("role") or ""),
                     None if x is None else float(x), None if y is None else float(y),
                     column=f"players[{k}]", tracked=pl.get("tracked", True) is not False)


def parse_tracking(source, format_id: str = "jsonl-frames") -> FrameSeries:
    """Parse a tracking file (path-free: a text/bytes stream or string)."""
    if format_id == "generic-csv":
        return parse_generic_csv(source)
    if format_id == "jsonl-frames":
        return parse_jsonl_frames(source)
    raise ParseError(f"unknown format {format_id!r}; expected one of {', '.join(FORMATS)}")


def read_tracking(path, format_id: str | None = None) -> FrameSeries:
    if format_id is None:
        format_id = "generic-csv" if str(path).endswith(".csv") else "jsonl-frames"
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tracking(fh, format_id)


def _f(v: float):
    # millimetre resolution keeps files compact
    return None if not math.isfinite(v) else round(float(v), 3)


def _num_json(v: float) -> str:
    return "null" if not math.isfinite(v) else repr(round(float(v), 3))


def iter_jsonl_frames(frames: FrameSeries) -> Iterable[str]:
    """Yield the normalized ``jsonl-frames`` lines for ``frames``."""
    extra = {k: v for k, v in frames.meta.items() if k not in ("units", "sample_rate")}
    yield json.dumps({"meta": {"sample_rate": frames.sample_rate, "units": "m", **extra}}, sort_keys=True, default=str)
    # static parts of each player entry are encoded once
    heads = [
        "{" + json.dumps({"player_id": pid, "team": frames.teams[j], "role": frames.roles[j]})[1:-1] + ', "x": '
        for j, pid in enumerate(frames.player_ids)
    ]
    pos = frames.positions.tolist()
    tracked = frames.tracked.tolist()
    ball = frames.ball.tolist()
    frame = frames.frame.tolist()
    period = frames.period.tolist()
    stamp = frames.timestamp.tolist()
    status = frames.in_play.tolist() if frames.status_given else None
    for i in range(len(frame)):
        parts = []
        for j, head in enumerate(heads):
            x, y = pos[i][j]
            tail = ', "tracked": false}' if not tracked[i][j] and math.isfinite(x) else "}"
            parts.append(f"{head}{_num_json(x)}, \"y\": {_num_json(y)}{tail}")
        line = (f'{{"frame": {frame[i]}, "period": {period[i]}, "timestamp": {round(stamp[i], 6)!r}, '
                f'"ball_x": {_num_json(ball[i][0])}, "ball_y": {_num_json(ball[i][1])}, ')
        if status is not None:
            line += f'"ball_status": "{"in-play" if status[i] else "dead"}", '
        yield line + '"players": [' + ", ".join(parts) + "]}"


def write_jsonl_frames(frames: FrameSeries, fh: IO[str]) -> None:
    for line in iter_jsonl_frames(frames):
        fh.write(line)
        fh.write("\n")


def serialize_jsonl_frames(frames: FrameSeries) -> str:
    buf = io.StringIO()
    write_jsonl_frames(frames, buf)
    return buf.getvalue()


def write_generic_csv(frames: FrameSeries, fh: IO[str]) -> None:
    fh.write(f"# units=m\n# sample_rate={frames.sample_rate!r}\n")
    w = csv.writer(fh, lineterminator="\n")
    header = ["frame", "period", "timestamp", "ball_x", "ball_y"]
    if frames.status_given:
        header.append("ball_status")
    header += ["player_id", "team", "role", "x", "y"] * frames.n_players
    w.writerow(header)
    pos = frames.positions.tolist()
    for i in range(len(frames)):
        bx, by = frames.ball[i]
        row = [int(frames.frame[i]), int(frames.period[i]), repr(float(frames.timestamp[i])),
               "" if not math.isfinite(bx) else repr(float(bx)), "" if not math.isfinite(by) else repr(float(by))]
        if frames.status_given:
            row.append("in-play" if frames.in_play[i] else "dead")
        for j, pid in enumerate(frames.player_ids):
            x, y = pos[i][j]
            row += [pid, frames.teams[j], frames.roles[j],
                    "" if not math.isfinite(x) else repr(x), "" if not math.isfinite(y) else repr(y)]
        w.writerow(row)


# --------------------------------------------------------------------------- status


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive ``(start, stop)`` index pairs of the True runs in ``mask``."""
    m = np.asarray(mask, dtype=np.int8)
    if m.size == 0:
        return []
    d = np.diff(np.concatenate(([0], m, [0])))
    starts = np.flatnonzero(d == 1)
    stops = np.flatnonzero(d == -1) - 1
    return list(zip(starts.tolist(), stops.tolist()))


def period_slices(frames: FrameSeries) -> list[tuple[int, int, int]]:
    """``(period, start, stop_exclusive)`` for each contiguous period block."""
    p = frames.period
    if len(p) == 0:
        return []
    cuts = np.flatnonzero(np.diff(p) != 0) + 1
    starts = np.concatenate(([0], cuts))
    stops = np.concatenate((cuts, [len(p)]))
    return [(int(p[s]), int(s), int(e)) for s, e in zip(starts, stops)]


def debounce_status(status: np.ndarray, debounce: int) -> np.ndarray:
    """Merge status runs shorter than ``debounce`` frames into their neighbours.

    The shortest offending run is flipped first (ties: earliest), which keeps
    the result independent of scan direction.
    """
    status = np.asarray(status, dtype=bool)
    if debounce <= 1 or status.size == 0:
        return status.copy()
    # run-length encoding: values alternate so only lengths and the first value are needed
    change = np.flatnonzero(np.diff(status.astype(np.int8)) != 0) + 1
    bounds = np.concatenate(([0], change, [status.size]))
    lengths = list(np.diff(bounds).tolist())
    first = bool(status[0])
    values = [first if k % 2 == 0 else not first for k in range(len(lengths))]
    while len(lengths) > 1:
        best = -1
        for k, n in enumerate(lengths):
            if n < debounce and (best < 0 or n < lengths[best]):
                best = k
        if best < 0:
            break
        lo, hi = max(best - 1, 0), min(best + 1, len(lengths) - 1)
        merged = sum(lengths[lo:hi + 1])
        value = values[lo] if lo != best else values[hi]
        lengths[lo:hi + 1] = [merged]
        values[lo:hi + 1] = [value]
    return np.repeat(np.asarray(values, dtype=bool), lengths)


def infer_ball_status(frames: FrameSeries, debounce: int = 5) -> FrameSeries:
    """Derive in-play/dead per frame, then debounce per period.

    Provider booleans are used when present; otherwise frames with missing
    ball data are dead.
    """
    if debounce < 0:
        raise ValueError("debounce must be non-negative")
    raw = frames.in_play if frames.status_given else frames.ball_present
    out = np.empty(len(frames), dtype=bool)
    for _, s, e in period_slices(frames):
        out[s:e] = debounce_status(raw[s:e], debounce)
    return replace(frames, in_play=out)


def fill_ball_gaps(frames: FrameSeries) -> FrameSeries:
    """Linearly interpolate missing ball positions inside in-play runs."""
    ball = frames.ball.copy()
    for s, e in in_play_runs(frames):
        seg = ball[s:e + 1]
        ok = np.isfinite(seg).all(axis=1)
        if ok.all() or not ok.any():
            continue
        t = np.arange(len(seg))
        for c in range(2):
            seg[~ok, c] = np.interp(t[~ok], t[ok], seg[ok, c])
    return replace(frames, ball=ball)


def interpolate_player_gaps(frames: FrameSeries, max_gap: int = 10) -> FrameSeries:
    """Fill untracked player stretches of at most ``max_gap`` frames.

    Gaps are bounded on both sides by observed positions within the same
    period; filled frames keep ``tracked`` False.
    """
    pos = frames.positions.copy()
    for _, s, e in period_slices(frames):
        block = pos[s:e]
        have = np.isfinite(block).all(axis=2)
        for j in range(block.shape[1]):
            col = have[:, j]
            if col.all() or not col.any():
                continue
            for a, b in _runs(~col):
                if a == 0 or b == len(col) - 1 or b - a + 1 > max_gap:
                    continue
                left, right = block[a - 1, j], block[b + 1, j]
                w = (np.arange(1, b - a + 2) / (b - a + 2))[:, None]
                block[a:b + 1, j] = left + w * (right - left)
    return replace(frames, positions=pos)


def in_play_runs(frames: FrameSeries) -> list[tuple[int, int]]:
    """Inclusive index ranges of maximal in-play runs, split at period changes."""
    out = []
    for _, s, e in period_slices(frames):
        out.extend((s + a, s + b) for a, b in _runs(frames.in_play[s:e]))
    return out


# --------------------------------------------------------------------------- smoothing


def smooth_run(values: np.ndarray, cfg: SmoothingConfig) -> np.ndarray:
    """Savitzky-Golay fit of one contiguous run (``(n, 2)`` array)."""
    n = len(values)
    if n < 3:
        return values.copy()
    window = min(cfg.window, n if n % 2 else n - 1)
    order = min(cfg.polynomial_order, window - 1)
    if window <= order:
        return values.copy()
    return savgol_filter(values, window, order, axis=0, mode="interp")


def smooth_ball_positions(frames: FrameSeries, cfg: SmoothingConfig | None = None) -> FrameSeries:
    """Smooth ball x/y independently inside each in-play run with a ball."""
    cfg = cfg or SmoothingConfig()
    if not cfg.enabled:
        return frames
    ball = frames.ball.copy()
    ok = frames.in_play & frames.ball_present
    for _, s, e in period_slices(frames):
        for a, b in _runs(ok[s:e]):
            ball[s + a:s + b + 1] = smooth_run(ball[s + a:s + b + 1], cfg)
    return replace(frames, ball=ball)


def prepare_frames(
    frames: FrameSeries,
    smoothing: SmoothingConfig | None = None,
    debounce: int = 5,
    max_player_gap: int = 10,
) -> FrameSeries:
    """Status inference, gap filling and smoothing in pipeline order."""
    out = infer_ball_status(frames, debounce)
    out = fill_ball_gaps(out)
    out = interpolate_player_gaps(out, max_player_gap)
    return smooth_ball_positions(out, smoothing)
