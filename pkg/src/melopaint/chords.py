"""Chord symbols, the corpus parser, and the first-order Markov chord model.

Corpus format: UTF-8 text, one song per line, whitespace-separated chord
tokens, `#` starts a comment running to end of line.  A token is a root
letter A-G, an optional # or b, and an optional quality suffix out of
{m, dim, aug, 7, maj7, m7}; a bare root is a major triad.  Parsing is
all-or-nothing: the first unknown token aborts the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rng import Rng

QUALITIES = ("maj", "min", "dim", "aug", "dom7", "maj7", "min7")

# Suffix order matters only for printing; parsing matches the whole remainder.
_SUFFIX_TO_QUALITY = {
    "": "maj",
    "m": "min",
    "dim": "dim",
    "aug": "aug",
    "7": "dom7",
    "maj7": "maj7",
    "m7": "min7",
}
_QUALITY_TO_SUFFIX = {q: s for s, q in _SUFFIX_TO_QUALITY.items()}

_ROOT_LETTERS = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_PC_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]

CHORD_INTERVALS = {
    "maj": (0, 4, 7),
    "min": (0, 3, 7),
    "dim": (0, 3, 6),
    "aug": (0, 4, 8),
    "dom7": (0, 4, 7, 10),
    "maj7": (0, 4, 7, 11),
    "min7": (0, 3, 7, 10),
}


class ParseError(ValueError):
    """Unrecognized chord token; carries its position in the source text."""

    def __init__(self, line: int, column: int, token: str, reason: str = ""):
        self.line = line
        self.column = column
        self.token = token
        msg = f"line {line}, column {column}: bad chord token {token!r}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class EmptyCorpusError(ValueError):
    """No adjacent chord pair anywhere in the corpus."""


class UnknownChordError(KeyError):
    """Chord is not in the model vocabulary."""


@dataclass(frozen=True, order=True)
class ChordSymbol:
    """Root pitch class 0-11 plus one of the seven supported qualities."""

    root: int
    quality: str

    def __post_init__(self):
        if not 0 <= self.root <= 11:
            raise ValueError(f"root out of range: {self.root}")
        if self.quality not in CHORD_INTERVALS:
            raise ValueError(f"unknown quality: {self.quality}")

    def pitch_classes(self) -> tuple[int, ...]:
        return tuple((self.root + iv) % 12 for iv in CHORD_INTERVALS[self.quality])

    def name(self) -> str:
        return _PC_NAMES[self.root] + _QUALITY_TO_SUFFIX[self.quality]

    def __str__(self) -> str:
        return self.name()


def parse_chord(token: str, line: int = 1, column: int = 1) -> ChordSymbol:
    """Parse one chord token; raises ParseError with the given position."""
    if not token:
        raise ParseError(line, column, token, "empty token")
    letter = token[0].upper()
    if letter not in _ROOT_LETTERS:
        raise ParseError(line, column, token, "invalid root letter")
    root = _ROOT_LETTERS[letter]
    rest = token[1:]
    if rest.startswith("#"):
        root = (root + 1) % 12
        rest = rest[1:]
    elif rest.startswith("b"):
        root = (root - 1) % 12
        rest = rest[1:]
    if rest not in _SUFFIX_TO_QUALITY:
        raise ParseError(line, column, token, "invalid quality suffix")
    return ChordSymbol(root, _SUFFIX_TO_QUALITY[rest])


@dataclass
class CorpusParse:
    sequences: list[list[ChordSymbol]]
    dropped_short: int = 0


def parse_chord_corpus(text: str) -> CorpusParse:
    """One chord sequence per non-empty line; short (<2) sequences dropped.

    A token starting with `#` opens a comment to end of line; a `#` inside
    a token is a sharp (so `C#` parses, `# C` does not).
    """
    sequences: list[list[ChordSymbol]] = []
    dropped = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        seq: list[ChordSymbol] = []
        saw_token = False
        i = 0
        while i < len(raw):
            if raw[i].isspace():
                i += 1
                continue
            start = i
            while i < len(raw) and not raw[i].isspace():
                i += 1
            token = raw[start:i]
            if token.startswith("#"):
                break
            saw_token = True
            seq.append(parse_chord(token, lineno, start + 1))
        if not saw_token:
            continue
        if len(seq) >= 2:
            sequences.append(seq)
        else:
            dropped += 1
    return CorpusParse(sequences, dropped)


@dataclass
class ChordModel:
    """Vocabulary plus a row-stochastic first-order transition matrix."""

    vocabulary: list[ChordSymbol]
    counts: list[list[int]]
    transitions: list[list[float]]
    index: dict[ChordSymbol, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {c: i for i, c in enumerate(self.vocabulary)}

    def row(self, chord: ChordSymbol) -> list[float]:
        if chord not in self.index:
            raise UnknownChordError(str(chord))
        return self.transitions[self.index[chord]]

    def probability(self, current: ChordSymbol, nxt: ChordSymbol) -> float:
        return self.row(current)[self.index[nxt]]


def train_markov(sequences: list[list[ChordSymbol]]) -> ChordModel:
    """Count adjacent pairs, normalize rows; empty rows fall back to uniform."""
    vocab: list[ChordSymbol] = []
    index: dict[ChordSymbol, int] = {}
    for seq in sequences:
        for c in seq:
            if c not in index:
                index[c] = len(vocab)
                vocab.append(c)
    n = len(vocab)
    pairs = 0
    counts = [[0] * n for _ in range(n)]
    for seq in sequences:
        for a, b in zip(seq, seq[1:]):
            counts[index[a]][index[b]] += 1
            pairs += 1
    if pairs == 0:
        raise EmptyCorpusError("corpus contains no adjacent chord pair")
    transitions: list[list[float]] = []
    for row in counts:
        total = sum(row)
        if total == 0:
            transitions.append([1.0 / n] * n)
        else:
            transitions.append([c / total for c in row])
    return ChordModel(vocab, counts, transitions, index)


def next_chord(model: ChordModel, current: ChordSymbol, rng: Rng) -> ChordSymbol:
    """Sample the successor of `current` from its transition row."""
    row = model.row(current)
    u = rng.next_float()
    acc = 0.0
    for j, p in enumerate(row):
        acc += p
        if u < acc:
            return model.vocabulary[j]
    # float shortfall at the tail: take the last positive entry
    for j in range(len(row) - 1, -1, -1):
        if row[j] > 0.0:
            return model.vocabulary[j]
    return model.vocabulary[-1]


def save_model(model: ChordModel, path: str) -> None:
    lines = ["#mtmodel v1"]
    lines.append("vocab " + " ".join(c.name() for c in model.vocabulary))
    for i, chord in enumerate(model.vocabulary):
        probs = " ".join(repr(p) for p in model.transitions[i])
        lines.append(f"row {chord.name()} {probs}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path: str) -> ChordModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("#mtmodel"):
        raise ValueError(f"{path}: not a chord model file")
    vocab: list[ChordSymbol] = []
    rows: dict[str, list[float]] = {}
    for ln in lines[1:]:
        if not ln.strip():
            continue
        parts = ln.split()
        if parts[0] == "vocab":
            vocab = [parse_chord(t) for t in parts[1:]]
        elif parts[0] == "row":
            rows[parts[1]] = [float(x) for x in parts[2:]]
        else:
            raise ValueError(f"{path}: unknown model line {parts[0]!r}")
    if not vocab:
        raise ValueError(f"{path}: missing vocab line")
    transitions = []
    for c in vocab:
        row = rows.get(c.name())
        if row is None or len(row) != len(vocab):
            raise ValueError(f"{path}: missing or malformed row for {c.name()}")
        transitions.append(row)
    counts = [[0] * len(vocab) for _ in vocab]
    return ChordModel(vocab, counts, transitions)
