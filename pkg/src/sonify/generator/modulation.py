"""LFOs (tremolo/vibrato) and the time-varying low-pass filter."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from .envelope import EnvelopeSpec, envelope_value
from .oscillators import FORMS, TWO_PI, waveform

CUTOFF_MIN_HZ = 50.0
CUTOFF_MAX_HZ = 16000.0


@dataclass(frozen=True)
class LfoSpec:
    """Low-frequency oscillator.

    ``amount`` is a fractional depth for volume and semitones for pitch; the
    effective depth is ``amount * level``, faded in by ``envelope``.
    """

    use: bool = False
    wave: str = "sine"
    amount: float = 0.0
    freq: float = 1.0
    freq_shift: float = 0.0
    phase: float | str = 0.0
    envelope: EnvelopeSpec = field(default_factory=EnvelopeSpec)
    level: float = 1.0

    def __post_init__(self):
        if self.wave not in FORMS:
            raise ValueError(f"unknown LFO wave {self.wave!r}")
        if self.amount < 0:
            raise ValueError("LFO amount must be non-negative")
        if self.use and not self.freq > 0:
            raise ValueError("an active LFO needs a positive frequency")
        if not 0 <= self.level <= 1:
            raise ValueError(f"LFO level {self.level} outside [0, 1]")
        if isinstance(self.phase, str) and self.phase != "random":
            raise ValueError(f"LFO phase must be a number or 'random', got {self.phase!r}")

    def replace(self, **changes) -> LfoSpec:
        fields = dict(use=self.use, wave=self.wave, amount=self.amount, freq=self.freq,
                      freq_shift=self.freq_shift, phase=self.phase,
                      envelope=self.envelope, level=self.level)
        fields.update({k: v for k, v in changes.items() if v is not None})
        return LfoSpec(**fields)


def _series(value, n):
    """Broadcast a scalar or per-sample array to length ``n`` floats."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"modulation series has length {arr.shape[0]}, buffer has {n}")
    return arr


def lfo_depth(lfo: LfoSpec, n: int, sample_rate: float, rng, note_length=None,
              amount=None, freq_shift=None):
    """Per-sample ``depth * w(t) * env(t)`` and ``depth * env(t)`` for ``lfo``.

    ``amount`` and ``freq_shift`` override those in ``lfo`` and may be per-sample
    arrays (they are evolvable).
    """
    amount = lfo.amount if amount is None else amount
    freq_shift = lfo.freq_shift if freq_shift is None else freq_shift
    phi = float(rng.uniform(0.0, TWO_PI)) if lfo.phase == "random" else float(lfo.phase)
    if np.ndim(freq_shift) == 0:
        rate = lfo.freq * 2.0 ** (float(freq_shift) / 12)
        cycles = rate * (np.arange(n) / sample_rate) + phi / TWO_PI
    else:
        inc = lfo.freq * np.exp2(_series(freq_shift, n) / 12) / sample_rate
        cycles = _kernels.accumulate_phase(inc, phi / TWO_PI)
    w = waveform(lfo.wave, cycles, rng)
    env = envelope_value(lfo.envelope, np.arange(n) / sample_rate, note_length)
    depth = _series(amount, n) * lfo.level * env
    return depth * w, depth


def apply_lfo(buffer, lfo: LfoSpec, target: str, sample_rate: float, rng,
              note_length=None, amount=None, freq_shift=None):
    """Apply ``lfo`` to ``buffer``.

    For ``target="volume"`` the buffer is scaled by ``1 - depth*(1 - w)/2``,
    which never raises the level. For ``target="pitch"`` the per-sample
    semitone offset ``depth*w`` is returned instead; the synthesiser turns
    it into pitch through phase accumulation.
    """
    buffer = np.asarray(buffer, dtype=np.float64)
    if not lfo.use:
        return buffer.copy() if target == "volume" else np.zeros(buffer.shape[0])
    dw, depth = lfo_depth(lfo, buffer.shape[0], sample_rate, rng, note_length,
                          amount, freq_shift)
    if target == "pitch":
        return dw
    if target != "volume":
        raise ValueError(f"LFO target must be 'volume' or 'pitch', got {target!r}")
    if np.any(depth > 1):
        raise ValueError("volume LFO depth above 1 would invert the signal")
    # 1 - depth*(1 - w)/2 == 1 - (depth - depth*w)/2
    return buffer * (1.0 - (depth - dw) / 2)


def cutoff_hz(cutoff_norm):
    """Log map of [0, 1] onto 50 Hz .. 16 kHz."""
    c = np.clip(np.asarray(cutoff_norm, dtype=np.float64), 0.0, 1.0)
    return CUTOFF_MIN_HZ * (CUTOFF_MAX_HZ / CUTOFF_MIN_HZ) ** c


def apply_lowpass(buffer, cutoff_norm, sample_rate: float):
    """One-pole low-pass with a per-sample cutoff.

    ``cutoff_norm`` is a scalar or one value per sample in [0, 1]. The state
    starts at the first input sample, so constant input passes unchanged.
    """
    x = np.ascontiguousarray(buffer, dtype=np.float64)
    fc = _series(cutoff_hz(cutoff_norm), x.shape[0])
    coeff = -np.expm1(-TWO_PI * fc / sample_rate)
    return _kernels.onepole_lowpass(x, np.ascontiguousarray(coeff))
