"""Additive synthesis and the shared per-voice modulation chain.

Signal flow is fixed: oscillators (with pitch modulation) -> low-pass filter
-> volume LFO -> envelope -> volume. Samplers and spectralisers enter the
chain after the oscillator stage via :func:`shape_voice`.
"""
from __future__ import annotations

import numpy as np

from .. import _kernels
from .config import GeneratorConfig
from .envelope import EnvelopeSpec, envelope_value
from .modulation import LfoSpec, apply_lfo, apply_lowpass
from .oscillators import TWO_PI, waveform

# modulator keys understood by the chain; values are scalars or per-sample arrays
ENVELOPE_KEYS = {"volume_envelope/A": "A", "volume_envelope/D": "D",
                 "volume_envelope/S": "S", "volume_envelope/R": "R"}


def n_samples(duration: float, sample_rate: float) -> int:
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    return max(1, int(round(duration * sample_rate)))


def _scalar(mods, key):
    v = mods.get(key)
    if v is None:
        return None
    if np.ndim(v) != 0:
        raise ValueError(f"{key!r} cannot vary over time")
    return float(v)


def voice_envelope(cfg: GeneratorConfig, mods) -> EnvelopeSpec:
    return cfg.envelope.replace(**{f: _scalar(mods, k) for k, f in ENVELOPE_KEYS.items()})


def voice_lfo(lfo: LfoSpec, prefix: str, mods) -> tuple[LfoSpec, object, object]:
    """LFO with per-voice overrides; amount and freq_shift may be arrays."""
    keys = [f"{prefix}/{k}" for k in ("freq", "amount", "freq_shift")]
    # mapping any LFO parameter switches that LFO on for the voice
    use = True if any(mods.get(k) is not None for k in keys) else None
    lfo = lfo.replace(use=use, freq=_scalar(mods, keys[0]))
    return lfo, mods.get(keys[1]), mods.get(keys[2])


def pitch_offset(cfg: GeneratorConfig, n: int, sample_rate: float, rng, mods,
                 note_length=None):
    """Total semitone offset: mapped pitch shift plus pitch LFO."""
    shift = mods.get("pitch_shift", 0.0)
    lfo, amount, fshift = voice_lfo(cfg.pitch_lfo, "pitch_lfo", mods)
    if not lfo.use:
        return shift
    vib = apply_lfo(np.zeros(n), lfo, "pitch", sample_rate, rng, note_length, amount, fshift)
    return vib + shift


def oscillator_mix(cfg: GeneratorConfig, freq: float, n: int, sample_rate: float, rng,
                   semitones=0.0) -> np.ndarray:
    """Level-weighted, level-normalised sum of the oscillators at ``freq``."""
    total = sum(o.level for o in cfg.oscillators)
    if not total > 0:
        raise ValueError("all oscillator levels are zero")
    t = np.arange(n) / sample_rate
    vary = np.ndim(semitones) != 0
    if vary:
        ratio = np.exp2(np.asarray(semitones, dtype=np.float64) / 12)
        if ratio.shape != (n,):
            raise ValueError("pitch series length does not match buffer")
    out = np.zeros(n)
    for osc in cfg.oscillators:
        phi = osc.resolve_phase(rng) / TWO_PI
        f = osc.frequency(freq)
        if vary:
            cycles = _kernels.accumulate_phase(f * ratio / sample_rate, phi)
        else:
            cycles = f * 2.0 ** (float(semitones) / 12) * t + phi
        if osc.level > 0:
            out += osc.level * waveform(osc.form, cycles, rng)
    return out / total


def shape_voice(signal, cfg: GeneratorConfig, sample_rate: float, rng, mods=None,
                note_length=None) -> np.ndarray:
    """Filter, volume LFO, envelope and volume, in that order.

    The filter runs when the preset enables it or a ``cutoff`` modulator is
    given. ``note_length`` (seconds) is where the envelope releases.
    """
    mods = mods or {}
    out = np.asarray(signal, dtype=np.float64)
    if cfg.filter_on or mods.get("cutoff") is not None:
        out = apply_lowpass(out, mods.get("cutoff", cfg.cutoff), sample_rate)
    lfo, amount, fshift = voice_lfo(cfg.volume_lfo, "volume_lfo", mods)
    if lfo.use:
        out = apply_lfo(out, lfo, "volume", sample_rate, rng, note_length, amount, fshift)
    env = voice_envelope(cfg, mods)
    out = out * envelope_value(env, np.arange(out.size) / sample_rate, note_length)
    return out * (cfg.volume * np.asarray(mods.get("volume", 1.0), dtype=np.float64))


def synthesize(cfg: GeneratorConfig, freq: float, duration: float, sample_rate: float,
               modulators=None, rng=None, note_length=None) -> np.ndarray:
    """Render one synthesiser voice at ``freq`` Hz for ``duration`` seconds.

    ``modulators`` maps parameter names (``"pitch_shift"``, ``"cutoff"``,
    ``"volume"``, ``"volume_lfo/amount"``, ``"volume_envelope/A"``, ...) to a
    scalar or a per-sample array.
    """
    mods = modulators or {}
    rng = rng if rng is not None else np.random.default_rng(0)
    n = n_samples(duration, sample_rate)
    semis = pitch_offset(cfg, n, sample_rate, rng, mods, note_length)
    raw = oscillator_mix(cfg, freq, n, sample_rate, rng, semis)
    return shape_voice(raw, cfg, sample_rate, rng, mods, note_length)
