"""Per-source audio generation: synthesiser, sampler and spectraliser."""
from .config import KINDS, GeneratorConfig
from .envelope import EnvelopeSpec, envelope_value
from .modulation import LfoSpec, apply_lfo, apply_lowpass, cutoff_hz
from .oscillators import FORMS, OscillatorSpec, osc_sample, waveform
from .sampler import LOOP_MODES, SampleBank, load_sample_bank, sample_note
from .spectral import spectralise
from .synth import n_samples, shape_voice, synthesize

__all__ = [
    "FORMS", "KINDS", "LOOP_MODES", "EnvelopeSpec", "GeneratorConfig", "LfoSpec",
    "OscillatorSpec", "SampleBank", "apply_lfo", "apply_lowpass", "cutoff_hz",
    "envelope_value", "load_sample_bank", "n_samples", "osc_sample", "sample_note",
    "shape_voice", "spectralise", "synthesize", "waveform",
]
