"""Matching detected events against annotations and confusion reporting."""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .events import EVENT_NAMES, EventRecord
from .setpiece import DEAD_BALL_FOR, SET_PIECE_NAME

PERIOD_SECONDS = 45 * 60
NOT_DETECTED = "not detected"
SPURIOUS = "spurious"

VOCABULARY = tuple(dict.fromkeys(
    list(EVENT_NAMES)
    + sorted(set(DEAD_BALL_FOR.values()) | {"goal?", "referee interruption"})
    + sorted(set(SET_PIECE_NAME.values()) | {"free kick", "free kick?", "incorrect kickoff"})
))

ANNOTATION_COLUMNS = ("match", "half", "minute", "second", "player", "category", "outcome")


class AnnotationError(ValueError):
    """Malformed or unmappable annotation input."""


@dataclass(frozen=True)
class Annotation:
    match_id: str
    half: int
    minute: int
    second: float
    player_ids: tuple[str, ...]
    category: str
    outcome: str | None = None
    raw_category: str | None = None

    @property
    def time(self) -> float:
        """Seconds from the start of the half (minutes run on the match clock)."""
        return self.minute * 60 + self.second - (self.half - 1) * PERIOD_SECONDS


@dataclass(frozen=True)
class Item:
    """One matchable occurrence: an annotation or one label of an event row."""

    half: int
    time: float
    category: str
    player: str | None = None


@dataclass(frozen=True)
class MatchingConfig:
    window: float = 5.0
    strict_player: bool = False

    def __post_init__(self) -> None:
        if not self.window >= 0:
            raise ValueError("matching window must be non-negative")


def default_vocabulary() -> dict[str, str]:
    """Identity map over this package's vocabulary, keyed case-insensitively."""
    return {v.lower(): v for v in VOCABULARY}


def load_annotations(source, vocabulary_map: dict[str, str] | None = None, strict: bool = True,
                     fold_blocked_shots: bool = False) -> list[Annotation]:
    """Read an annotation CSV (match, half, minute, second, player, category, outcome)."""
    vocab = {k.lower(): v for k, v in (vocabulary_map or default_vocabulary()).items()}
    if isinstance(source, Path) or (isinstance(source, str) and source and "\n" not in source
                                    and Path(source).is_file()):
        text = Path(source).read_text(encoding="utf-8")
    elif hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
    if not text.strip():
        return []
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in ("half", "minute", "second", "category") if c not in (reader.fieldnames or ())]
    if missing:
        raise AnnotationError(f"annotation file lacks columns {missing}")
    out, unmapped = [], []
    for n, row in enumerate(reader, start=2):
        raw = (row.get("category") or "").strip()
        cat = vocab.get(raw.lower())
        if cat is None:
            if raw not in unmapped:
                unmapped.append(raw)
            continue
        try:
            half = int(row["half"])
            minute = int(row["minute"])
            second = float(row["second"])
        except (TypeError, ValueError):
            raise AnnotationError(f"malformed time on line {n}") from None
        if half < 1 or minute < 0 or not 0 <= second < 60:
            raise AnnotationError(f"malformed time on line {n}")
        players = tuple(p for p in (row.get("player") or "").replace(";", "|").split("|") if p)
        outcome = (row.get("outcome") or "").strip() or None
        if fold_blocked_shots and outcome and outcome.lower() == "blocked" and cat.startswith("shot"):
            cat = "pass"
        a = Annotation(str(row.get("match") or ""), half, minute, second, players, cat, outcome, raw)
        if a.time < 0:
            raise AnnotationError(f"time on line {n} precedes the start of half {half}")
        out.append(a)
    if unmapped and strict:
        raise AnnotationError(f"unmapped categories: {', '.join(unmapped)}")
    return out


def annotations_to_items(annotations: list[Annotation]) -> list[Item]:
    return [Item(a.half, a.time, a.category, a.player_ids[0] if a.player_ids else None) for a in annotations]


def records_to_items(rows: list[EventRecord], period_starts: dict[int, float] | None = None) -> list[Item]:
    """Expand event rows into one item per label (event, dead-ball event, set piece).

    ``period_starts`` maps a period to the timestamp of its first frame;
    by default period ``p`` starts at ``(p - 1) * 2700`` seconds.
    """
    out = []
    for r in rows:
        start = period_starts[r.period] if period_starts and r.period in period_starts \
            else (r.period - 1) * PERIOD_SECONDS
        t = r.timestamp - start
        for cat in (r.event_name, r.dead_ball_event, r.from_set_piece):
            if cat is not None:
                out.append(Item(r.period, t, cat, r.player_id))
    return out


@dataclass
class Assignment:
    annotations: list[Item]
    predictions: list[Item]
    pairs: list[tuple[int, int]] = field(default_factory=list)  # (annotation, prediction)
    misses: list[int] = field(default_factory=list)
    spurious: list[int] = field(default_factory=list)
    confusions: list[tuple[int, int]] = field(default_factory=list)


def _candidates(ann, pred, cfg: MatchingConfig, same_category: bool):
    by_half = defaultdict(list)
    for k, p in pred:
        by_half[p.half].append((p.time, k, p))
    for v in by_half.values():
        v.sort(key=lambda t: (t[0], t[1]))
    out = []
    for i, a in ann:
        group = by_half.get(a.half, ())
        for t, k, p in group:
            if t < a.time - cfg.window:
                continue
            if t > a.time + cfg.window:
                break
            if (p.category == a.category) != same_category:
                continue
            if cfg.strict_player and a.player is not None and p.player != a.player:
                continue
            out.append((abs(t - a.time), i, k))
    out.sort()
    return out


def _greedy(cands):
    used_a, used_p, pairs = set(), set(), []
    for _, i, k in cands:
        if i in used_a or k in used_p:
            continue
        used_a.add(i)
        used_p.add(k)
        pairs.append((i, k))
    return pairs


def match_events(predicted, annotations, cfg: MatchingConfig | None = None) -> Assignment:
    """Greedy nearest-in-time one-to-one matching within the window, same category.

    Leftovers are then paired across categories (nearest first) to fill
    the confusion matrix; those pairs never count as matches.
    """
    cfg = cfg or MatchingConfig()
    pred = predicted if not predicted or isinstance(predicted[0], Item) else records_to_items(predicted)
    ann = annotations if not annotations or isinstance(annotations[0], Item) else annotations_to_items(annotations)
    res = Assignment(list(ann), list(pred))
    res.pairs = sorted(_greedy(_candidates(list(enumerate(ann)), list(enumerate(pred)), cfg, True)))
    matched_a = {i for i, _ in res.pairs}
    matched_p = {k for _, k in res.pairs}
    res.misses = [i for i in range(len(ann)) if i not in matched_a]
    res.spurious = [k for k in range(len(pred)) if k not in matched_p]
    left_a = [(i, ann[i]) for i in res.misses]
    left_p = [(k, pred[k]) for k in res.spurious]
    res.confusions = sorted(_greedy(_candidates(left_a, left_p, cfg, False)))
    return res


@dataclass
class ConfusionReport:
    categories: list[str]
    matrix: dict[str, dict[str, int]]  # predicted -> annotated -> count
    precision: dict[str, float | None]
    recall: dict[str, float | None]
    pairs: int = 0
    misses: int = 0
    spurious: int = 0

    def to_dict(self) -> dict:
        return {
            "categories": self.categories,
            "matrix": self.matrix,
            "precision": self.precision,
            "recall": self.recall,
            "pairs": self.pairs,
            "misses": self.misses,
            "spurious": self.spurious,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = self.categories + [SPURIOUS]
        w.writerow(["predicted \\ annotated"] + cols)
        for r in self.categories + [NOT_DETECTED]:
            w.writerow([r] + [self.matrix.get(r, {}).get(c, 0) for c in cols])
        return buf.getvalue()

    @classmethod
    def merge(cls, reports: list["ConfusionReport"]) -> "ConfusionReport":
        counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
        for rep in reports:
            for r, row in rep.matrix.items():
                for c, v in row.items():
                    counts[r][c] += v
        cats = sorted({c for rep in reports for c in rep.categories})
        return _from_counts(cats, counts, sum(r.pairs for r in reports), sum(r.misses for r in reports),
                            sum(r.spurious for r in reports))


def confusion_report(assignment: Assignment) -> ConfusionReport:
    ann, pred = assignment.annotations, assignment.predictions
    counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for i, k in assignment.pairs:
        counts[pred[k].category][ann[i].category] += 1
    conf_a = {i for i, _ in assignment.confusions}
    conf_p = {k for _, k in assignment.confusions}
    for i, k in assignment.confusions:
        counts[pred[k].category][ann[i].category] += 1
    for i in assignment.misses:
        if i not in conf_a:
            counts[NOT_DETECTED][ann[i].category] += 1
    for k in assignment.spurious:
        if k not in conf_p:
            counts[pred[k].category][SPURIOUS] += 1
    cats = sorted({a.category for a in ann} | {p.category for p in pred})
    return _from_counts(cats, counts, len(assignment.pairs), len(assignment.misses), len(assignment.spurious))


def _from_counts(cats, counts, pairs, misses, spurious) -> ConfusionReport:
    matrix = {r: {c: int(v) for c, v in sorted(row.items()) if v} for r, row in sorted(counts.items())}
    matrix = {r: row for r, row in matrix.items() if row}
    precision, recall = {}, {}
    for c in cats:
        tp = matrix.get(c, {}).get(c, 0)
        row = sum(matrix.get(c, {}).values())
        col = sum(row_.get(c, 0) for row_ in matrix.values())
        precision[c] = tp / row if row else None
        recall[c] = tp / col if col else None
    return ConfusionReport(list(cats), matrix, precision, recall, pairs, misses, spurious)


def benchmark_records(predicted: list[EventRecord], truth: list[EventRecord], cfg: MatchingConfig | None = None,
                      period_starts: dict[int, float] | None = None) -> ConfusionReport:
    """Confusion report of two event tables (e.g. detections against synthetic ground truth)."""
    a = match_events(records_to_items(predicted, period_starts), records_to_items(truth, period_starts), cfg)
    return confusion_report(a)
