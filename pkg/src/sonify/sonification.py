"""Render sources through score, generator and channels into one buffer."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import wav
from .channels import Direction, MicrophoneBank, MultichannelBuffer, mix_into, slerp_directions
from .generator import GeneratorConfig, SampleBank, sample_note, shape_voice, spectralise
from .generator.synth import oscillator_mix, pitch_offset, voice_envelope
from .score import ScoreSpec, assign_notes, chord_at, chord_index_series
from .sources import EventSet, ObjectSource, ParameterId

P = ParameterId
SAMPLE_RATES = (44100, 48000, 96000)
BLOCK_SIZE = 256
EVENT_HOLD = 0.5
CLIP_KNEE = 0.99

# parameters handed to the generator as modulators when a source maps them
_GENERATOR_PARAMS = tuple(
    p for p in ParameterId
    if p not in (P.POLAR, P.AZIMUTH, P.PITCH, P.TIME, P.TIME_EVO, P.SPECTRUM)
)


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class RenderPlan:
    sources: EventSet | ObjectSource | Sequence[EventSet | ObjectSource]
    score: ScoreSpec
    generator: GeneratorConfig
    bank: MicrophoneBank
    sample_rate: int = 44100
    master_seed: int = 0
    sample_bank: SampleBank | None = None
    event_hold: float = EVENT_HOLD

    @property
    def source_sets(self) -> tuple:
        if isinstance(self.sources, (EventSet, ObjectSource)):
            return (self.sources,)
        return tuple(self.sources)

    @property
    def n_samples(self) -> int:
        return int(round(self.score.duration * self.sample_rate))

    def check(self) -> None:
        """Raise :class:`PlanError` if the plan cannot be rendered."""
        if self.sample_rate not in SAMPLE_RATES:
            raise PlanError(f"sample rate must be one of {SAMPLE_RATES}, got {self.sample_rate}")
        if not isinstance(self.master_seed, (int, np.integer)) or self.master_seed < 0:
            raise PlanError("master seed must be a non-negative integer")
        if self.event_hold < 0:
            raise PlanError("event hold time must be non-negative")
        sets = self.source_sets
        if not sets:
            raise PlanError("plan has no sources")
        kind = self.generator.kind
        try:
            self.generator.check_sample_rate(self.sample_rate)
        except ValueError as exc:
            raise PlanError(str(exc)) from None
        if kind == "sampler":
            if self.sample_bank is None:
                raise PlanError("sampler generator needs a sample bank")
            if self.sample_bank.sample_rate != self.sample_rate:
                raise PlanError("sample bank rate differs from the render rate")
        for s in sets:
            has_spectrum = isinstance(s, ObjectSource) and s.spectrum is not None
            if kind == "spectraliser" and not has_spectrum:
                raise PlanError("spectraliser needs object sources carrying a spectrum")
            if kind == "synthesiser" and not any(o.level > 0 for o in self.generator.oscillators):
                raise PlanError("all oscillator levels are zero")


class NoteRecord(NamedTuple):
    source: int
    note: str
    start: float
    duration: float


@dataclass(frozen=True)
class RenderResult:
    audio: MultichannelBuffer
    clip_count: int
    notes: tuple[NoteRecord, ...] = field(default_factory=tuple)

    def notes_per_bin(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self.notes:
            counts[rec.note] = counts.get(rec.note, 0) + 1
        return counts


class _Voice(NamedTuple):
    signal: np.ndarray
    direction: Direction
    offset: int
    notes: tuple[NoteRecord, ...]


def source_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream per source, fixed by (master seed, source index)."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


def soft_clip(x: np.ndarray, knee: float = CLIP_KNEE) -> tuple[np.ndarray, int]:
    """Pass |x| <= knee unchanged; squash the rest with tanh towards +-1.

    Returns the limited signal and the number of samples whose magnitude
    exceeded 1 beforehand.
    """
    mag = np.abs(x)
    count = int(np.count_nonzero(mag > 1.0))
    over = mag > knee
    if not np.any(over):
        return x.copy(), count
    head = 1.0 - knee
    out = x.copy()
    out[over] = np.sign(x[over]) * (knee + head * np.tanh((mag[over] - knee) / head))
    return out, count


def _event_mods(events: EventSet, i: int) -> dict:
    mods = {}
    for p in _GENERATOR_PARAMS:
        if events.is_mapped(p):
            mods[p.value] = events.value(p, i)
    return mods


def _render_event(plan: RenderPlan, events: EventSet, i: int, note_index: int,
                  source_index: int) -> _Voice:
    cfg, sr = plan.generator, plan.sample_rate
    rng = source_rng(plan.master_seed, source_index)
    t_norm = events.value(P.TIME, i)
    chord = plan.score.chord_sequence.chords[chord_at(plan.score, t_norm)]
    note = chord[note_index % len(chord)]
    mods = _event_mods(events, i)
    env = voice_envelope(cfg, mods)
    note_length = env.A + env.D + plan.event_hold
    length = note_length + env.R
    n = max(1, int(round(length * sr)))
    semis = pitch_offset(cfg, n, sr, rng, mods, note_length)
    if cfg.kind == "sampler":
        raw = sample_note(plan.sample_bank, note, n / sr, sr, semis)
    else:
        raw = oscillator_mix(cfg, note.frequency, n, sr, rng, semis)
    sig = shape_voice(raw, cfg, sr, rng, mods, note_length)
    start = t_norm * plan.score.duration
    direction = Direction(events.value(P.AZIMUTH, i), events.value(P.POLAR, i))
    record = NoteRecord(source_index, note.name, start, length)
    return _Voice(sig, direction, int(round(start * sr)), (record,))


def _block_series(values_at, n: int) -> np.ndarray:
    """Evaluate a function of normalised time at block edges, then interpolate
    linearly to every sample."""
    edges = np.unique(np.append(np.arange(0, n, BLOCK_SIZE), n - 1))
    t_edges = edges / max(n - 1, 1)
    return np.interp(np.arange(n), edges, values_at(t_edges))


def _object_mods(src: ObjectSource, n: int) -> dict:
    mods = {}
    for p in _GENERATOR_PARAMS:
        if p in src.evolutions:
            mods[p.value] = _block_series(src.evolutions[p], n)
        elif p in src.static_values:
            mods[p.value] = src.static_values[p]
    return mods


def _object_direction(src: ObjectSource, n: int) -> Direction:
    az_evo, pol_evo = src.evolutions.get(P.AZIMUTH), src.evolutions.get(P.POLAR)
    az0, pol0 = src.static(P.AZIMUTH), src.static(P.POLAR)
    if az_evo is None and pol_evo is None:
        return Direction(az0, pol0)
    grid = (az_evo or pol_evo).times
    az = az_evo.values if az_evo is not None else np.full(grid.shape, az0)
    pol = pol_evo.values if pol_evo is not None else np.full(grid.shape, pol0)
    query = np.arange(n) / max(n - 1, 1)
    return slerp_directions(grid, Direction(az, pol), query)


def _render_object(plan: RenderPlan, src: ObjectSource, source_index: int) -> _Voice:
    cfg, sr, n = plan.generator, plan.sample_rate, plan.n_samples
    duration = plan.score.duration
    rng = source_rng(plan.master_seed, source_index)
    mods = _object_mods(src, n)
    direction = _object_direction(src, n)
    if cfg.kind == "spectraliser":
        f_min, f_max = cfg.freq_range
        raw = spectralise(src.spectrum, f_min, f_max, n / sr, sr, rng)
        sig = shape_voice(raw, cfg, sr, rng, mods, duration)
        return _Voice(sig, direction, 0, (NoteRecord(source_index, "spectrum", 0.0, duration),))
    chords = plan.score.chord_sequence
    idx = chord_index_series(plan.score, np.arange(n) / max(n - 1, 1))
    n_voices = chords.max_size
    out = np.zeros(n)
    records = []
    for k in range(n_voices):
        first = chords.chords[0][k % len(chords.chords[0])]
        freqs = np.array([c[k % len(c)].frequency for c in chords.chords])[idx]
        voice_mods = dict(mods)
        base_shift = voice_mods.pop("pitch_shift", 0.0)
        voice_mods["pitch_shift"] = 12 * np.log2(freqs / first.frequency) + base_shift
        semis = pitch_offset(cfg, n, sr, rng, voice_mods, duration)
        if cfg.kind == "sampler":
            raw = sample_note(plan.sample_bank, first, n / sr, sr, semis)
        else:
            raw = oscillator_mix(cfg, first.frequency, n, sr, rng, semis)
        out += shape_voice(raw, cfg, sr, rng, mods, duration)
        records.append(NoteRecord(source_index, first.name, 0.0, duration))
    return _Voice(out / n_voices, direction, 0, tuple(records))


def _jobs(plan: RenderPlan):
    index = 0
    for s in plan.source_sets:
        if isinstance(s, EventSet):
            pitch = s.column(P.PITCH)
            if pitch is None:
                pitch = np.full(s.count, plan.generator.pitch)
            bins = assign_notes(pitch, plan.score.chord_sequence.max_size)
            for i in range(s.count):
                yield (_render_event, (plan, s, i, int(bins[i]), index))
                index += 1
        else:
            yield (_render_object, (plan, s, index))
            index += 1


def render(plan: RenderPlan, threads: int = 1) -> RenderResult:
    """Render every source, spatialise and sum them, then soft-limit.

    Voices may be computed on ``threads`` worker threads; they are always
    mixed in source order, so the output does not depend on scheduling.
    """
    plan.check()
    jobs = list(_jobs(plan))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            voices = list(pool.map(lambda job: job[0](*job[1]), jobs))
    else:
        voices = [fn(*args) for fn, args in jobs]
    out = np.zeros((len(plan.bank), plan.n_samples))
    notes = []
    for v in voices:
        if v.offset < out.shape[1]:
            n = min(v.signal.size, out.shape[1] - v.offset)
            direction = v.direction
            if not direction.is_static:
                direction = Direction(np.asarray(direction.azimuth)[:n],
                                      np.asarray(direction.polar)[:n])
            mix_into(out, v.signal[:n], direction, plan.bank, v.offset)
        notes.extend(v.notes)
    limited, clips = soft_clip(out)
    if not np.all(np.isfinite(limited)):
        raise FloatingPointError("render produced non-finite samples")
    return RenderResult(MultichannelBuffer(limited, plan.sample_rate), clips, tuple(notes))


def write_wav(buffer: MultichannelBuffer, path, encoding: str = "pcm16") -> Path:
    """Write an interleaved RIFF/WAVE file in bank channel order."""
    return wav.write_wav(path, buffer.channels, buffer.sample_rate, encoding)


def read_wav(path) -> MultichannelBuffer:
    data = wav.read_wav(path)
    return MultichannelBuffer(data.data, data.sample_rate)


__all__ = [
    "BLOCK_SIZE", "EVENT_HOLD", "NoteRecord", "PlanError", "RenderPlan", "RenderResult",
    "SAMPLE_RATES", "read_wav", "render", "soft_clip", "source_rng", "write_wav",
]
