"""melopaint: a deterministic two-player music-and-painting engine.

Players paint on a shared canvas; spots and lines double as notes and
melodies, harmonized by a Markov chord model.  The engine detects idleness,
isolation, and repetitive drawing to stage hints, and exposes a session
protocol for a caregiver console.
"""

from .chords import ChordModel, ChordSymbol, parse_chord_corpus, train_markov
from .config import EngineConfig
from .engine import ChordChange, Engine
from .geometry import Vec2
from .scene import ColorRGB, Player, SceneState, scene_hash

__version__ = "0.1.0"

__all__ = [
    "ChordChange",
    "ChordModel",
    "ChordSymbol",
    "ColorRGB",
    "Engine",
    "EngineConfig",
    "Player",
    "SceneState",
    "Vec2",
    "parse_chord_corpus",
    "scene_hash",
    "train_markov",
    "__version__",
]
