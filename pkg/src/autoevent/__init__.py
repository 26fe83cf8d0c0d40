"""Event detection from football tracking data."""

__version__ = "0.1.0"

from .benchmark import ConfusionReport, MatchingConfig, benchmark_records, load_annotations, match_events
from .config import RunConfig, load_config
from .events import EventRecord, events_to_csv
from .geometry import PitchModel, build_pitch
from .ingest import FrameSeries, ParseError, parse_tracking, read_tracking
from .pipeline import DetectionResult, detect
from .synth import MatchScript, NoiseModel, generate_match, load_bundled_script

__all__ = [
    "ConfusionReport", "DetectionResult", "EventRecord", "FrameSeries", "MatchScript", "MatchingConfig",
    "NoiseModel", "ParseError", "PitchModel", "RunConfig", "benchmark_records", "build_pitch", "detect",
    "events_to_csv", "generate_match", "load_annotations", "load_bundled_script", "load_config",
    "match_events", "parse_tracking", "read_tracking",
]
