"""Caregiver control commands: the console's levers over a live session.

A command is a name plus a flat argument dict; every command is either
idempotent or fully parameterized, so applying a recorded command stream
replays deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class InvalidCommandError(ValueError):
    pass


# name -> required argument names (validated before the engine sees them)
COMMAND_ARGS: dict[str, tuple[str, ...]] = {
    "pause": (),
    "resume": (),
    "remove_lines": (),
    "remove_circles": (),
    "toggle_bg_music": (),
    "set_evolution_mode": ("mode",),
    "play_all_melodies": (),
    "toggle_blobs": (),
    "swap_players": (),
    "swap_hands": ("player",),
    "set_brush_color": ("player", "r", "g", "b"),
    "set_background_color": ("r", "g", "b"),
    "set_vibration_enabled": ("enabled",),
    "trigger_hint": ("shape", "x", "y", "player", "style"),
    "tutorial_step": ("index",),
}


@dataclass(frozen=True)
class ControlCommand:
    name: str
    args: dict = field(default_factory=dict)

    def __post_init__(self):
        validate_command(self.name, self.args)


def validate_command(name: str, args: dict) -> None:
    if name not in COMMAND_ARGS:
        raise InvalidCommandError(f"unknown command {name!r}")
    missing = [a for a in COMMAND_ARGS[name] if a not in args]
    if missing:
        raise InvalidCommandError(f"{name}: missing argument(s) {missing}")
