"""Engine configuration: every tunable in one place, loadable from text.

Config files are `key = value` lines; `#` comments; unknown keys are hard
errors so typos never silently fall back to defaults.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    tick_rate: int = 30
    seed: int = 1
    corpus_path: str = ""  # empty: use the bundled default corpus

    # scene geometry (canvas units)
    eps_close: float = 0.03
    len_min: float = 0.02
    r_erase: float = 0.03
    hit_radius: float = 0.02
    r_prox: float = 0.05
    stroke_fade_s: float = 1.5
    fill_opacity: float = 0.4

    # music
    cursor_speed: float = 0.25
    loop_count: int = 3
    octave_span: int = 3
    base_midi: int = 48
    explore_step: float = 0.08
    velocity_touch: int = 100
    velocity_cursor: int = 100
    velocity_explore: int = 80
    velocity_blob: int = 110

    # interaction
    eps_dwell: float = 0.015
    dwell_threshold_s: float = 1.0
    bg_lockout_s: float = 1.0
    t_auto_s: float = 30.0
    evolution_cooldown_s: float = 5.0
    evolution_mode: str = "interactable"
    blob_count: int = 3
    blob_radius: float = 0.08
    blob_speed: float = 0.15

    # floor layout (floor-plane coordinates in [0,1]^2)
    space_x0: float = 0.1
    space_y0: float = 0.1
    space_x1: float = 0.9
    space_y1: float = 0.9
    bg_x0: float = 0.35
    bg_y0: float = 0.0
    bg_x1: float = 0.65
    bg_y1: float = 0.2
    circle1_x: float = 0.25
    circle1_y: float = 0.5
    circle2_x: float = 0.75
    circle2_y: float = 0.5
    circle_radius: float = 0.12

    # hints
    idle_vibrate_s: float = 20.0
    idle_light_s: float = 40.0
    idle_line_s: float = 60.0
    isolation_window_s: float = 30.0
    isolation_radius: float = 0.12
    repetition_threshold: float = 0.8
    repetition_history: int = 5
    area_overuse_threshold: float = 0.6
    hint_scale: float = 0.15
    hint_ttl_s: float = 30.0

    # protocol
    hash_check_ticks: int = 300

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        for f in sorted(fields(self), key=lambda f: f.name):
            h.update(f.name.encode())
            h.update(repr(getattr(self, f.name)).encode())
        return h.hexdigest()

    def to_text(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(EngineConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    raise ConfigError(f"unhandled config field type for {name}")


def parse_config_text(text: str, base: EngineConfig | None = None) -> EngineConfig:
    cfg = base or EngineConfig()
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        overrides[key] = _coerce(key, value)
    return replace(cfg, **overrides)


def load_config(path: str, base: EngineConfig | None = None) -> EngineConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, base)


def apply_overrides(cfg: EngineConfig, overrides: dict[str, str]) -> EngineConfig:
    coerced = {}
    for key, value in overrides.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        coerced[key] = _coerce(key, str(value))
    return replace(cfg, **coerced)
