"""Run configuration: YAML files, provider profiles and key=value overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .benchmark import MatchingConfig
from .events import EventConfig
from .geometry import PitchModel, build_pitch
from .ingest import SmoothingConfig
from .possession import PossessionConfig
from .setpiece import TriggerTolerances


class ConfigError(ValueError):
    """Invalid configuration value or key."""


# Provider profiles bundle defaults that differ per tracking system.
PROFILES = {
    "A": {"possession.r_pz": 0.5},
    "B": {"possession.r_pz": 1.0},
    "C": {"possession.r_pz": 1.0},
}


@dataclass(frozen=True)
class PitchConfig:
    length: float = 105.0
    width: float = 68.0
    attack: dict = field(default_factory=dict)

    def build(self) -> PitchModel:
        return build_pitch(self.length, self.width, self.attack)


@dataclass(frozen=True)
class RunConfig:
    pitch: PitchConfig = field(default_factory=PitchConfig)
    possession: PossessionConfig = field(default_factory=PossessionConfig)
    triggers: TriggerTolerances = field(default_factory=TriggerTolerances)
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)
    events: EventConfig = field(default_factory=EventConfig)
    matching: MatchingConfig = field(default_factory=MatchingConfig)
    debounce: int = 5
    max_player_gap: int = 10
    input: str | None = None
    format: str | None = None
    out: str | None = None
    profile: str | None = None

    def __post_init__(self) -> None:
        if self.debounce < 0 or self.max_player_gap < 0:
            raise ConfigError("debounce and max_player_gap must be non-negative")


_SECTIONS = {
    "pitch": PitchConfig, "possession": PossessionConfig, "triggers": TriggerTolerances,
    "smoothing": SmoothingConfig, "events": EventConfig, "matching": MatchingConfig,
}


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict) and k in _SECTIONS and key != "pitch.attack":
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(cls, name: str, value):
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    if name not in types:
        raise ConfigError(f"unknown config key {cls.__name__}.{name}")
    t = str(types[name])
    if isinstance(value, str):
        low = value.strip().lower()
        if t.startswith("bool"):
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        if t.startswith("int"):
            try:
                return int(value)
            except ValueError:
                raise ConfigError(f"{name}: expected an integer, got {value!r}") from None
        if t.startswith("float"):
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"{name}: expected a number, got {value!r}") from None
        if t.startswith("dict"):
            loaded = yaml.safe_load(value)
            if not isinstance(loaded, dict):
                raise ConfigError(f"{name}: expected a mapping, got {value!r}")
            return loaded
    return value


def build_config(values: dict) -> RunConfig:
    """Build a validated RunConfig from flat ``section.key`` values."""
    sections: dict[str, dict] = {k: {} for k in _SECTIONS}
    top = {}
    for key, value in values.items():
        if "." in key:
            sec, name = key.split(".", 1)
            if sec not in _SECTIONS:
                raise ConfigError(f"unknown config section {sec!r}")
            sections[sec][name] = _coerce(_SECTIONS[sec], name, value)
        else:
            top[key] = _coerce(RunConfig, key, value)
    try:
        built = {sec: _SECTIONS[sec](**kw) for sec, kw in sections.items()}
        return RunConfig(**built, **top)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_override(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def load_config(path=None, profile: str | None = None, overrides=()) -> RunConfig:
    """Profile defaults, then file values, then explicit overrides."""
    file_values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            loaded = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config file {p}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a mapping")
        file_values = _flatten(loaded)
    values: dict = {}
    profile = profile or file_values.get("profile")
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError(f"unknown provider profile {profile!r}; known: {', '.join(sorted(PROFILES))}")
        values.update(PROFILES[profile])
    values.update(file_values)
    if profile is not None:
        values["profile"] = profile
    for item in overrides:
        k, v = parse_override(item) if isinstance(item, str) else item
        values[k] = v
    return build_config(values)


def config_to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)
