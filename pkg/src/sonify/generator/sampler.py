"""Sample playback with linear-interpolated pitch shifting and looping."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .. import _kernels
from ..score import Note, parse_note
from ..wav import WavError, read_wav

LOOP_MODES = ("off", "forward", "pingpong")


@dataclass(frozen=True)
class SampleBank:
    samples: Mapping[Note, np.ndarray]
    sample_rate: int
    loop: str = "off"

    def __post_init__(self):
        if not self.samples:
            raise ValueError("sample bank is empty")
        if self.loop not in LOOP_MODES:
            raise ValueError(f"loop mode must be one of {LOOP_MODES}, got {self.loop!r}")
        for note, buf in self.samples.items():
            if np.asarray(buf).size == 0:
                raise ValueError(f"sample for {note} is empty")

    def nearest(self, semitone: float) -> Note:
        """Bank note closest to ``semitone`` (MIDI number); ties go to the lower note."""
        return min(self.samples, key=lambda n: (abs(n.midi - semitone), n.midi))


def resample_linear(x, ratio_out_per_in: float) -> np.ndarray:
    """Resample by linear interpolation to ``round(len(x) * ratio)`` samples."""
    x = np.asarray(x, dtype=np.float64)
    n_out = max(1, int(round(x.size * ratio_out_per_in)))
    pos = np.arange(n_out) / ratio_out_per_in
    return np.interp(pos, np.arange(x.size), x)


def load_sample_bank(directory, sample_rate: int, loop: str = "off") -> SampleBank:
    """Load ``<note>.wav`` files (e.g. ``A4.wav``, ``Db3.wav``) from a directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise WavError(f"sample directory {directory} not found")
    samples = {}
    for path in sorted(directory.glob("*.wav")):
        try:
            note = parse_note(path.stem)
        except ValueError:
            continue
        wav = read_wav(path)
        if wav.data.shape[0] != 1:
            raise WavError(f"{path}: samples must be mono, found {wav.data.shape[0]} channels")
        buf = wav.data[0]
        if buf.size == 0:
            raise WavError(f"{path}: no audio frames")
        if wav.sample_rate != sample_rate:
            buf = resample_linear(buf, sample_rate / wav.sample_rate)
        samples[note] = buf
    if not samples:
        raise WavError(f"no note-named .wav files in {directory}")
    return SampleBank(samples, int(sample_rate), loop)


def _fold(k, length: int, loop: str):
    """Map unbounded read indices into the buffer; -1 marks silence."""
    if loop == "forward":
        return k % length
    if loop == "pingpong":
        m = k % (2 * length)
        return np.where(m < length, m, 2 * length - 1 - m)
    return np.where(k < length, k, -1)


def read_looped(buf, positions, loop: str) -> np.ndarray:
    """Linearly interpolated read of ``buf`` at fractional ``positions``."""
    buf = np.asarray(buf, dtype=np.float64)
    padded = np.append(buf, 0.0)  # index -1 reads the trailing zero
    k0 = np.floor(positions).astype(np.int64)
    frac = positions - k0
    v0 = padded[_fold(k0, buf.size, loop)]
    v1 = padded[_fold(k0 + 1, buf.size, loop)]
    return v0 + frac * (v1 - v0)


def sample_note(bank: SampleBank, note: Note, duration: float, sample_rate: int,
                shift=0.0) -> np.ndarray:
    """Play ``note`` raised by ``shift`` semitones for ``duration`` seconds.

    ``shift`` may be a per-sample array; the bank sample is chosen from the
    initial target pitch and then read at a varying rate.
    """
    if sample_rate != bank.sample_rate:
        raise ValueError(f"bank is at {bank.sample_rate} Hz, engine at {sample_rate} Hz")
    n = max(1, int(round(duration * sample_rate)))
    shift_arr = np.asarray(shift, dtype=np.float64)
    start = float(shift_arr) if shift_arr.ndim == 0 else float(shift_arr[0])
    source = bank.nearest(note.midi + start)
    buf = bank.samples[source]
    if shift_arr.ndim == 0:
        ratio = 2.0 ** ((note.midi + start - source.midi) / 12)
        positions = np.arange(n) * ratio
    else:
        if shift_arr.shape != (n,):
            raise ValueError("pitch-shift series length does not match note length")
        ratio = np.exp2((note.midi - source.midi + shift_arr) / 12)
        positions = _kernels.accumulate_phase(ratio, 0.0)
    return read_looped(buf, positions, bank.loop)
