"""Command-line entry point: detect, benchmark, synth, analyze."""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analytics import AnalyticsError, pass_angle_profile, possession_heatmap
from .benchmark import AnnotationError, benchmark_records, confusion_report, load_annotations, match_events, \
    records_to_items, annotations_to_items
from .config import ConfigError, PitchConfig, RunConfig, load_config
from .estimators import infer_attack
from .events import events_from_csv, events_to_csv, events_to_jsonl, timeline_to_csv, EventRecord
from .geometry import PitchConfigError
from .ingest import FORMATS, FrameSeries, ParseError, read_tracking, write_generic_csv, write_jsonl_frames
from .pipeline import DetectionResult, detect
from .synth import MatchScript, NoiseModel, ScriptError, bundled_script_names, generate_match, \
    load_bundled_script, random_script


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int = 2, **extra):
        super().__init__(message)
        self.kind, self.code, self.extra = kind, code, extra


def _fail(exc: CliError) -> int:
    payload = {"error": exc.kind, "message": str(exc), **exc.extra}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return exc.code


def _config(args) -> RunConfig:
    try:
        return load_config(args.config, args.profile, args.set or ())
    except ConfigError as exc:
        raise CliError("config", str(exc)) from None


def _read_frames(path, fmt) -> FrameSeries:
    p = Path(path)
    if not p.exists():
        raise CliError("input", f"input file not found: {p}", 3, path=str(p))
    if fmt is not None and fmt not in FORMATS:
        raise CliError("config", f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    try:
        return read_tracking(p, fmt)
    except ParseError as exc:
        extra = {k: v for k, v in (("frame", exc.frame), ("column", exc.column)) if v is not None}
        raise CliError("parse", str(exc), 3, path=str(p), **extra) from None
    except UnicodeDecodeError as exc:
        raise CliError("parse", f"not UTF-8 text: {exc.reason}", 3, path=str(p)) from None


def _pitch(cfg: RunConfig, frames: FrameSeries):
    """Pitch from config; file metadata or player positions fill what the config leaves out."""
    pc = cfg.pitch
    source = "config"
    if pc.length == PitchConfig.length and pc.width == PitchConfig.width:
        pc = replace(pc, length=float(frames.meta.get("pitch_length", pc.length)),
                     width=float(frames.meta.get("pitch_width", pc.width)))
    if not pc.attack:
        if isinstance(frames.meta.get("attack"), dict):
            pc, source = replace(pc, attack=dict(frames.meta["attack"])), "metadata"
        else:
            try:
                pc, source = replace(pc, attack=infer_attack(frames)), "inferred"
            except ValueError as exc:
                raise CliError("config", f"{exc}; set pitch.attack") from None
    try:
        return pc.build(), source
    except PitchConfigError as exc:
        raise CliError("config", str(exc)) from None


def run_report(result: DetectionResult, pitch, attack_source: str, wall: float, source: str) -> dict:
    rows = result.events
    counts: Counter = Counter()
    for r in rows:
        for v in (r.event_name, r.dead_ball_event, r.from_set_piece):
            if v is not None:
                counts[v] += 1
    tally: dict[str, dict[str, int]] = {}
    for p in result.frames.periods():
        per = [r for r in rows if r.period == p]
        tally[str(p)] = {
            "kickoff": sum(r.from_set_piece == "kickoff" for r in per),
            "goal": sum(r.dead_ball_event == "goal" for r in per),
            "incorrect kickoff": sum(r.from_set_piece == "incorrect kickoff" for r in per),
        }
    return {
        "input": source,
        "version": __version__,
        "frames": len(result.frames),
        "players": result.frames.n_players,
        "rows": len(rows),
        "category_counts": dict(sorted(counts.items())),
        "periods": tally,
        "confidence": dict(sorted(Counter(r.confidence for r in rows).items())),
        "attack": {k: int(v) for k, v in sorted(pitch.attack.items())},
        "attack_source": attack_source,
        "period_starts": {str(k): v for k, v in result.period_starts().items()},
        "wall_time": round(wall, 3),
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def detect_one(path: str, fmt, cfg: RunConfig, out: Path) -> dict:
    t0 = time.perf_counter()
    frames = _read_frames(path, fmt)
    pitch, attack_source = _pitch(cfg, frames)
    result = detect(frames, pitch, cfg)
    wall = time.perf_counter() - t0
    report = run_report(result, pitch, attack_source, wall, str(path))
    _write(out / "events.csv", events_to_csv(result.events))
    _write(out / "events.jsonl", events_to_jsonl(result.events))
    _write(out / "timeline.csv", timeline_to_csv(result.frames, result.possession))
    _write(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def _detect_job(job):
    path, fmt, cfg, out = job
    try:
        return detect_one(path, fmt, cfg, out), None
    except CliError as exc:
        return None, (exc.kind, str(exc), exc.code, exc.extra)


def cmd_detect(args) -> int:
    cfg = _config(args)
    inputs = args.input or ([cfg.input] if cfg.input else [])
    if not inputs:
        raise CliError("usage", "no input given (--input or config 'input')")
    fmt = args.format or cfg.format
    out = Path(args.out or cfg.out or ".")
    if len(inputs) == 1:
        report = detect_one(inputs[0], fmt, cfg, out)
        print(f"{report['rows']} rows, {report['frames']} frames in {report['wall_time']:.2f} s -> {out}")
        return 0
    # batch: one sub-directory per input, matches processed independently
    names = [Path(p).stem for p in inputs]
    if len(set(names)) != len(names):
        names = [f"{k:03d}_{n}" for k, n in enumerate(names)]
    jobs = [(p, fmt, cfg, out / n) for p, n in zip(inputs, names)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_detect_job, jobs))
    else:
        results = [_detect_job(j) for j in jobs]
    code = 0
    for (report, err), name in zip(results, names):
        if err is not None:
            kind, msg, c, extra = err
            code = max(code, _fail(CliError(kind, msg, c, **extra)))
        else:
            print(f"{name}: {report['rows']} rows, {report['frames']} frames in {report['wall_time']:.2f} s")
    return code


def _read_events(path) -> list[EventRecord]:
    p = Path(path)
    if not p.exists():
        raise CliError("input", f"events file not found: {p}", 3, path=str(p))
    text = p.read_text(encoding="utf-8")
    try:
        if p.suffix == ".jsonl":
            return [EventRecord(**json.loads(line)) for line in text.splitlines() if line.strip()]
        return events_from_csv(text)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("parse", f"malformed events file: {exc}", 3, path=str(p)) from None


def _is_events_file(path) -> bool:
    p = Path(path)
    if p.suffix == ".jsonl":
        return True
    with open(p, encoding="utf-8") as fh:
        return "frame_index" in fh.readline()


def _period_starts(items) -> dict[int, float] | None:
    out = {}
    for item in items or ():
        k, _, v = item.partition("=")
        try:
            out[int(k)] = float(v)
        except ValueError:
            raise CliError("usage", f"--period-start expects PERIOD=SECONDS, got {item!r}") from None
    return out or None


def cmd_benchmark(args) -> int:
    cfg = _config(args)
    pred = _read_events(args.input)
    truth_path = Path(args.truth)
    if not truth_path.exists():
        raise CliError("input", f"truth file not found: {truth_path}", 3, path=str(truth_path))
    starts = _period_starts(args.period_start)
    if _is_events_file(truth_path):
        report = benchmark_records(pred, _read_events(truth_path), cfg.matching, starts)
    else:
        try:
            ann = load_annotations(truth_path, strict=not args.lenient, fold_blocked_shots=args.fold_blocked_shots)
        except AnnotationError as exc:
            raise CliError("annotations", str(exc), 2, path=str(truth_path)) from None
        assignment = match_events(records_to_items(pred, starts), annotations_to_items(ann), cfg.matching)
        report = confusion_report(assignment)
    out = Path(args.out or cfg.out or ".")
    _write(out / "report.json", report.to_json())
    _write(out / "confusion.csv", report.to_csv())
    for c in report.categories:
        p, r = report.precision[c], report.recall[c]
        fp = "-" if p is None else f"{p:.3f}"
        fr = "-" if r is None else f"{r:.3f}"
        print(f"{c:28s} precision {fp:>6s}  recall {fr:>6s}")
    return 0


def _script(args) -> MatchScript:
    try:
        if args.random is not None:
            return random_script(args.random, minutes=args.minutes)
        if args.script in bundled_script_names():
            return load_bundled_script(args.script)
        p = Path(args.script)
        if not p.exists():
            raise CliError("input", f"script not found: {args.script}", 3, path=args.script)
        return MatchScript.load(p)
    except ScriptError as exc:
        raise CliError("script", str(exc), 2) from None


def cmd_synth(args) -> int:
    if args.script is None and args.random is None:
        raise CliError("usage", "give --script NAME|PATH or --random SEED")
    script = _script(args)
    noise = None
    if args.sigma or args.dropout:
        try:
            noise = NoiseModel(sigma=args.sigma, ball_dropout=args.dropout)
        except ValueError as exc:
            raise CliError("usage", str(exc)) from None
    try:
        frames, truth = generate_match(script, seed=args.seed, noise=noise)
    except ScriptError as exc:
        raise CliError("script", str(exc), 2) from None
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    fmt = args.format or "jsonl-frames"
    name = "tracking.csv" if fmt == "generic-csv" else "tracking.jsonl"
    with open(out / name, "w", encoding="utf-8", newline="") as fh:
        (write_generic_csv if fmt == "generic-csv" else write_jsonl_frames)(frames, fh)
    _write(out / "truth_events.csv", events_to_csv(truth.events))
    _write(out / "script.json", json.dumps(script.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"{script.name}: {len(frames)} frames, {len(truth.events)} truth rows -> {out}")
    return 0


def cmd_analyze(args) -> int:
    cfg = _config(args)
    path = (args.input or [cfg.input])[0] if (args.input or cfg.input) else None
    if path is None:
        raise CliError("usage", "no input given (--input or config 'input')")
    frames = _read_frames(path, args.format or cfg.format)
    pitch, _ = _pitch(cfg, frames)
    result = detect(frames, pitch, cfg)
    out = Path(args.out or cfg.out or ".")
    try:
        nx, ny = (int(v) for v in args.grid.lower().split("x"))
    except ValueError:
        raise CliError("usage", f"--grid expects NXxNY, got {args.grid!r}") from None
    try:
        if args.kind == "heatmap":
            grid = possession_heatmap(result.possession.timeline, result.frames, args.player, args.mode,
                                      (nx, ny), pitch, args.normalization)
            _write(out / f"heatmap_{args.player}.json", json.dumps(grid.to_dict(), sort_keys=True) + "\n")
            _write(out / f"heatmap_{args.player}.csv", grid.to_csv())
            print(f"{args.player}: {grid.frames} qualifying frames")
        else:
            prof = pass_angle_profile(result.events, result.frames, args.player, pitch, bins=args.bins)
            _write(out / f"angles_{args.player}.json", json.dumps(prof.to_dict(), indent=2, sort_keys=True) + "\n")
            print(f"{args.player}: {len(prof.records)} passes/crosses")
    except AnalyticsError as exc:
        raise CliError("analytics", str(exc), 2) from None
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--profile", help="provider profile (A, B, C)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override, repeatable")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="autoevent", description="Event detection from football tracking data.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect events from a tracking file")
    _common(d)
    d.add_argument("--input", action="append", help="tracking file; repeat for batch mode")
    d.add_argument("--format", choices=FORMATS)
    d.add_argument("--jobs", type=int, default=1, help="parallel matches in batch mode")
    d.set_defaults(func=cmd_detect)

    b = sub.add_parser("benchmark", help="compare an events table with ground truth or annotations")
    _common(b)
    b.add_argument("--input", required=True, help="detected events (csv or jsonl)")
    b.add_argument("--truth", required=True, help="events-schema truth file or annotation csv")
    b.add_argument("--period-start", action="append", metavar="P=SECONDS",
                   help="timestamp at which period P starts (default (P-1)*2700)")
    b.add_argument("--lenient", action="store_true", help="drop unmapped annotation categories")
    b.add_argument("--fold-blocked-shots", action="store_true", help="count blocked shots as passes")
    b.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("synth", help="generate a synthetic match and its ground truth")
    s.add_argument("--script", help="bundled script name or script path")
    s.add_argument("--random", type=int, metavar="SEED", help="random script instead of --script")
    s.add_argument("--minutes", type=float, default=90.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sigma", type=float, default=0.0, help="positional noise (m)")
    s.add_argument("--dropout", type=float, default=0.0, help="ball dropout rate")
    s.add_argument("--format", choices=FORMATS)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)

    a = sub.add_parser("analyze", help="heatmaps and pass-angle profiles")
    _common(a)
    a.add_argument("--input", action="append")
    a.add_argument("--format", choices=FORMATS)
    a.add_argument("--player", required=True)
    a.add_argument("--kind", choices=("heatmap", "angles"), default="heatmap")
    a.add_argument("--mode", choices=("in-possession", "all-in-play"), default="in-possession")
    a.add_argument("--normalization", choices=("raw", "per-minute"), default="raw")
    a.add_argument("--grid", default="21x14")
    a.add_argument("--bins", type=int, default=16)
    a.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        return _fail(CliError("usage", "--jobs must be at least 1"))
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc)
    except OSError as exc:
        return _fail(CliError("io", str(exc), 3, path=str(exc.filename) if exc.filename else None))


if __name__ == "__main__":
    sys.exit(main())
