"""Musical constraints: note names, chords, pitch binning and the timeline."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

A4_HZ = 440.0

_LETTERS = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_ACCIDENTALS = {"": 0, "#": 1, "♯": 1, "b": -1, "♭": -1}
# canonical spelling uses flats
_NAMES = ("C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B")
_NOTE_RE = re.compile(r"^\s*([A-Ga-g])(#|b|♯|♭)?(-?\d+)\s*$")


@dataclass(frozen=True, order=True)
class Note:
    midi: int

    @property
    def pitch_class(self) -> int:
        return self.midi % 12

    @property
    def octave(self) -> int:
        return self.midi // 12 - 1

    @property
    def frequency(self) -> float:
        return A4_HZ * 2.0 ** ((self.midi - 69) / 12)

    @property
    def name(self) -> str:
        return format_note(self)

    def __str__(self):
        return self.name


def parse_note(text: str) -> Note:
    """Parse names like ``"A4"``, ``"Db3"``, ``"F#-1"``."""
    m = _NOTE_RE.match(text)
    if m is None:
        raise ValueError(f"malformed note name {text!r}")
    letter, acc, octave = m.group(1).upper(), m.group(2) or "", int(m.group(3))
    if not -1 <= octave <= 9:
        raise ValueError(f"octave {octave} of {text!r} outside [-1, 9]")
    return Note(12 * (octave + 1) + _LETTERS[letter] + _ACCIDENTALS[acc])


def format_note(note: Note) -> str:
    return f"{_NAMES[note.pitch_class]}{note.octave}"


def parse_chord(text: str | Sequence[str]) -> tuple[Note, ...]:
    """Parse ``"Db3,Gb3,Ab3"`` (or a list of names) into notes sorted by pitch."""
    names = text.split(",") if isinstance(text, str) else list(text)
    names = [n for n in (s.strip() for s in names) if n]
    if not names:
        raise ValueError("a chord needs at least one note")
    return tuple(sorted(parse_note(n) for n in names))


@dataclass(frozen=True)
class ChordSequence:
    chords: tuple[tuple[Note, ...], ...]

    def __post_init__(self):
        if not self.chords:
            raise ValueError("chord sequence is empty")
        for ch in self.chords:
            if not ch:
                raise ValueError("empty chord in sequence")

    @classmethod
    def parse(cls, chords) -> ChordSequence:
        if isinstance(chords, str):
            chords = [chords]
        return cls(tuple(parse_chord(c) for c in chords))

    def __len__(self):
        return len(self.chords)

    @property
    def max_size(self) -> int:
        return max(len(c) for c in self.chords)


@dataclass(frozen=True)
class ScoreSpec:
    chord_sequence: ChordSequence
    duration: float

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be finite and positive, got {self.duration}")

    @classmethod
    def from_chords(cls, chords, duration: float) -> ScoreSpec:
        return cls(ChordSequence.parse(chords), float(duration))


def assign_notes(pitch_values, n_notes: int) -> np.ndarray:
    """Bin values onto ``n_notes`` notes using evenly spaced percentiles.

    Edges sit at percentiles ``100*k/n`` of the values. A value equal to an
    interior edge goes to the lower bin; the maximum always lands in the top
    bin. Returns integer note indices, ascending with the values.
    """
    x = np.asarray(pitch_values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("no pitch values to assign")
    if n_notes < 1:
        raise ValueError("chord must have at least one note")
    if n_notes == 1:
        return np.zeros(x.shape, dtype=np.intp)
    # linear-interpolated percentiles at k/n, with the rank position split into
    # integer and fractional parts exactly so edges that coincide with data
    # values are not perturbed by rounding
    s = np.sort(x.ravel())
    k = np.arange(1, n_notes)
    pos = (s.size - 1) * k
    lo, rem = pos // n_notes, pos % n_notes
    hi = np.minimum(lo + 1, s.size - 1)
    edges = s[lo] + (rem / n_notes) * (s[hi] - s[lo])
    idx = np.searchsorted(edges, x, side="left")
    idx[x == x.max()] = n_notes - 1
    return idx


def chord_at(score: ScoreSpec, t_norm) -> int:
    """Index of the chord sounding at normalised time ``t_norm``."""
    n = len(score.chord_sequence)
    return min(max(int(math.floor(t_norm * n)), 0), n - 1)


def chord_index_series(score: ScoreSpec, t_norm: np.ndarray) -> np.ndarray:
    n = len(score.chord_sequence)
    return np.clip(np.floor(np.asarray(t_norm) * n).astype(np.intp), 0, n - 1)


def shifted_frequency(base: float, semitones):
    """``base`` raised by ``semitones`` (scalar or array)."""
    if not base > 0:
        raise ValueError("base frequency must be positive")
    out = base * np.exp2(np.asarray(semitones, dtype=np.float64) / 12)
    return float(out) if out.ndim == 0 else out
