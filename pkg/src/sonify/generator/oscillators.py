"""Naive (non-band-limited) oscillator waveforms.

Waveforms are evaluated from a phase measured in cycles, ``f*t + phi/2pi``,
so the same code serves fixed and phase-accumulated (modulated) pitch.
Aliasing above Nyquist is not suppressed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FORMS = ("saw", "square", "sine", "tri", "noise")
TWO_PI = 2 * math.pi


def _check_phase(phase):
    if phase == "random":
        return phase
    if isinstance(phase, str):
        raise ValueError(f"phase must be a number or 'random', got {phase!r}")
    return float(phase)


@dataclass(frozen=True)
class OscillatorSpec:
    form: str = "sine"
    level: float = 1.0
    detune: float = 0.0
    phase: float | str = 0.0

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown oscillator form {self.form!r}; choose from {list(FORMS)}")
        if not 0 <= self.level <= 1:
            raise ValueError(f"oscillator level {self.level} outside [0, 1]")
        object.__setattr__(self, "phase", _check_phase(self.phase))

    def frequency(self, freq):
        """Detuned frequency; ``detune`` is a percentage of ``freq``."""
        return freq * (1 + self.detune / 100)

    def resolve_phase(self, rng) -> float:
        if self.phase == "random":
            return float(rng.uniform(0.0, TWO_PI))
        return self.phase


def waveform(form: str, cycles, rng=None):
    """Evaluate ``form`` at phase ``cycles`` (in cycles); output in [-1, 1]."""
    cycles = np.asarray(cycles, dtype=np.float64)
    if form == "sine":
        return np.sin(TWO_PI * cycles)
    if form == "saw":
        return 2.0 * (cycles - np.floor(cycles)) - 1.0
    if form == "square":
        # sign() with zero taken as positive, so values are only +-1
        return np.where(np.sin(TWO_PI * cycles) >= 0, 1.0, -1.0)
    if form == "tri":
        return 2.0 * np.abs(2.0 * (cycles - np.floor(cycles)) - 1.0) - 1.0
    if form == "noise":
        if rng is None:
            raise ValueError("noise needs a random generator")
        return rng.uniform(-1.0, 1.0, size=cycles.shape)
    raise ValueError(f"unknown oscillator form {form!r}")


def osc_sample(spec: OscillatorSpec, freq: float, t: float, rng=None) -> float:
    """Single sample of ``spec`` at time ``t`` seconds.

    ``freq`` is used as given (apply ``spec.frequency`` for detuning).
    A ``"random"`` phase is drawn from ``rng``.
    """
    phi = spec.resolve_phase(rng)
    return float(waveform(spec.form, freq * t + phi / TWO_PI, rng))
