"""scikit-learn style wrappers so the detector composes with parameter search tooling."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .config import RunConfig, build_config
from .geometry import build_pitch
from .ingest import FrameSeries
from .pipeline import DetectionResult, detect


def infer_attack(frames: FrameSeries) -> dict[str, int]:
    """Attack sign per team in period 1 from mean goalkeeper (else team) x.

    A team defending the -x goal attacks +x.
    """
    first = frames.period == frames.period.min()
    out = {}
    for team in frames.team_ids():
        cols = [j for j, t in enumerate(frames.teams) if t == team]
        keepers = [j for j in cols if frames.roles[j] == "goalkeeper"]
        xs = frames.positions[first][:, keepers or cols, 0]
        mean = float(np.nanmean(xs)) if np.isfinite(xs).any() else 0.0
        out[team] = 1 if mean <= 0 else -1
    if len(out) == 2 and len(set(out.values())) == 1:
        raise ValueError("cannot infer attack directions: both teams sit on the same side")
    return out


class EventDetector(BaseEstimator):
    """Detect events from a FrameSeries.

    ``params`` holds flat ``section.key`` overrides (e.g. ``{"possession.r_pz": 0.5}``).
    ``fit`` only settles attack directions: given ones are validated,
    missing ones are inferred from player positions.
    """

    def __init__(self, pitch_length=105.0, pitch_width=68.0, attack=None, params=None):
        self.pitch_length = pitch_length
        self.pitch_width = pitch_width
        self.attack = attack
        self.params = params

    def _config(self) -> RunConfig:
        return build_config(dict(self.params or {}))

    def fit(self, X: FrameSeries, y=None):
        teams = X.team_ids()
        if self.attack is None:
            attack = infer_attack(X)
        else:
            attack = dict(self.attack)
            missing = [t for t in teams if t not in attack]
            if missing:
                raise ValueError(f"attack direction missing for teams {missing}")
        self.pitch_ = build_pitch(self.pitch_length, self.pitch_width, attack)
        self.config_ = self._config()
        return self

    def detect(self, X: FrameSeries) -> DetectionResult:
        if not hasattr(self, "pitch_"):
            raise RuntimeError("EventDetector is not fitted")
        return detect(X, self.pitch_, self.config_)

    def predict(self, X: FrameSeries):
        return self.detect(X).events


class PossessionLabeler(TransformerMixin, EventDetector):
    """Frame-level ball-control labels (0 dead, 1 none, 2 possession, 3 duel)."""

    def transform(self, X: FrameSeries) -> np.ndarray:
        return self.detect(X).possession.timeline.label.copy()
