"""Direct per-frame evaluation of the possession rules.

Deliberately naive: plain loops over frames and players, no indexing
structures. Used to cross-check the vectorized implementation in
:mod:`autoevent.possession` on small matches.
"""

from __future__ import annotations

import math

from .ingest import FrameSeries


def _live(frames: FrameSeries, i: int) -> bool:
    bx, by = frames.ball[i]
    return bool(frames.in_play[i]) and math.isfinite(bx) and math.isfinite(by)


def _same_run(frames: FrameSeries, i: int, k: int) -> bool:
    """True when frames i..k (i <= k) are all in play within one period."""
    for m in range(i, k + 1):
        if not frames.in_play[m] or frames.period[m] != frames.period[i]:
            return False
    return True


def _step(frames: FrameSeries, a: int, b: int):
    ax, ay = frames.ball[a]
    bx, by = frames.ball[b]
    dx, dy = float(bx - ax), float(by - ay)
    d = math.hypot(dx, dy)
    direction = (dx / d, dy / d) if d >= 1e-6 else None
    return d, direction


def reference_control_frames(frames: FrameSeries, cfg) -> list[tuple[str, int | None, tuple[int, ...]]]:
    """Per frame: ``("none"|"possession"|"duel", holder, duel_members)``."""
    out = []
    for i in range(len(frames)):
        if not _live(frames, i):
            out.append(("none", None, ()))
            continue
        bx, by = frames.ball[i]
        best, best_d = None, None
        near = []
        for j in range(frames.n_players):
            px, py = frames.positions[i, j]
            if not (math.isfinite(px) and math.isfinite(py)):
                continue
            d = math.hypot(px - bx, py - by)
            if d <= cfg.r_pz and (best_d is None or d < best_d):
                best, best_d = j, d
            if d <= cfg.r_dz:
                near.append(j)
        near_teams = {frames.teams[j] for j in near if frames.teams[j]}
        if len(near_teams) >= 2:
            out.append(("duel", None, tuple(near)))
        elif best is not None:
            out.append(("possession", best, ()))
        else:
            out.append(("none", None, ()))
    return out


def _credited(frames: FrameSeries, i: int, members) -> int:
    bx, by = frames.ball[i]
    best, best_d = None, None
    for j in members:
        px, py = frames.positions[i, j]
        d = math.hypot(px - bx, py - by)
        if best_d is None or d < best_d:
            best, best_d = j, d
    return best


def reference_runs(frames: FrameSeries, ctrl) -> list[tuple[int, int, str, int]]:
    runs = []
    i = 0
    n = len(frames)
    while i < n:
        kind, holder, _ = ctrl[i]
        if kind == "none":
            i += 1
            continue
        k = i
        while (
            k + 1 < n
            and ctrl[k + 1][0] == kind
            and ctrl[k + 1][1] == holder
            and _same_run(frames, k, k + 1)
        ):
            k += 1
        player = holder if kind == "possession" else _credited(frames, k, ctrl[k][2])
        runs.append((i, k, kind, player))
        i = k + 1
    return runs


def reference_validate(frames: FrameSeries, ctrl, cfg):
    """Return control frames with false-positive possession runs removed."""
    ctrl = list(ctrl)
    rate = frames.sample_rate
    for start, stop, kind, _ in reference_runs(frames, ctrl):
        if kind != "possession":
            continue
        d_in = None
        if start > 0 and _same_run(frames, start - 1, start):
            d_in = _step(frames, start - 1, start)[1]
        d_out = None
        if stop + 1 < len(frames) and _same_run(frames, stop, stop + 1):
            d_out = _step(frames, stop, stop + 1)[1]
        turned = d_in is None or d_out is None or (d_in[0] * d_out[0] + d_in[1] * d_out[1]) < cfg.eps_theta
        sped = False
        for f in range(start, stop + 1):
            if f == 0 or f + 1 >= len(frames):
                continue
            if not (_same_run(frames, f - 1, f) and _same_run(frames, f, f + 1)):
                continue
            v0 = _step(frames, f - 1, f)[0] * rate
            v1 = _step(frames, f, f + 1)[0] * rate
            if abs(v0 - v1) > cfg.eps_v:
                sped = True
                break
        if not (turned or sped):
            for f in range(start, stop + 1):
                ctrl[f] = ("none", None, ())
    return ctrl


def reference_changes(frames: FrameSeries, ctrl, cfg) -> list[tuple[str, int, int, bool]]:
    """``(kind, index, player, released)`` tuples in frame order."""
    out = []
    runs = reference_runs(frames, ctrl)
    current = None  # (player, first_start, last_stop, segment_start)
    seg_of = {}

    def segment_start(i):
        if i not in seg_of:
            s = i
            while s > 0 and frames.in_play[s - 1] and frames.period[s - 1] == frames.period[i]:
                s -= 1
            seg_of[i] = s
        return seg_of[i]

    def close(spell):
        player, _, stop, _ = spell
        released = False
        if stop + 1 < len(frames) and _same_run(frames, stop, stop + 1):
            bx, by = frames.ball[stop + 1]
            px, py = frames.positions[stop + 1, player]
            outside = not (math.isfinite(px) and math.isfinite(py)) or math.hypot(px - bx, py - by) > cfg.r_pz
            released = outside and _step(frames, stop, stop + 1)[0] > cfg.eps_s
        out.append(("loss", stop, player, released))

    for start, stop, _, player in runs:
        seg = segment_start(start)
        if current is not None and current[0] == player and current[3] == seg:
            current = (player, current[1], stop, seg)
            continue
        if current is not None:
            close(current)
        out.append(("gain", start, player, False))
        current = (player, start, stop, seg)
    if current is not None:
        close(current)
    return out
