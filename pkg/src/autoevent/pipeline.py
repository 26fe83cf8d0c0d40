"""End-to-end detection: prepare frames, possession, set pieces, events."""

from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .events import EventRecord, assemble_events_table
from .geometry import PitchModel
from .ingest import FrameSeries, prepare_frames
from .possession import PossessionResult, run_possession
from .setpiece import SetPieceResolution, resolve_all


@dataclass(frozen=True, eq=False)
class DetectionResult:
    frames: FrameSeries  # prepared (status inferred, gaps filled, smoothed)
    possession: PossessionResult
    resolutions: list[SetPieceResolution]
    events: list[EventRecord]

    def period_starts(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for p, t in zip(self.frames.period.tolist(), self.frames.timestamp.tolist()):
            out.setdefault(p, t)
        return out


def detect(frames: FrameSeries, pitch: PitchModel, cfg: RunConfig | None = None) -> DetectionResult:
    cfg = cfg or RunConfig()
    prepared = prepare_frames(frames, cfg.smoothing, cfg.debounce, cfg.max_player_gap)
    poss = run_possession(prepared, cfg.possession)
    resolutions = resolve_all(prepared, pitch, cfg.possession, cfg.triggers, poss.changes)
    events = assemble_events_table(prepared, poss, resolutions, pitch, cfg.events)
    return DetectionResult(prepared, poss, resolutions, events)
