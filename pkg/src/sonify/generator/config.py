from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .envelope import EnvelopeSpec
from .modulation import LfoSpec
from .oscillators import OscillatorSpec
from .sampler import LOOP_MODES

KINDS = ("synthesiser", "sampler", "spectraliser")


@dataclass(frozen=True)
class GeneratorConfig:
    """Everything a generator needs to voice one source.

    ``pitch`` is the note selector used when a source does not map pitch;
    ``ranges`` holds default parameter ranges for mappings (e.g. a pitch-shift
    span in semitones).
    """

    kind: str = "synthesiser"
    oscillators: tuple[OscillatorSpec, ...] = (OscillatorSpec(),)
    envelope: EnvelopeSpec = field(default_factory=EnvelopeSpec)
    volume_lfo: LfoSpec = field(default_factory=LfoSpec)
    pitch_lfo: LfoSpec = field(default_factory=LfoSpec)
    filter_on: bool = False
    cutoff: float = 1.0
    volume: float = 1.0
    pitch: float = 1.0
    freq_range: tuple[float, float] = (100.0, 10000.0)
    loop: str = "off"
    samples: str | None = None
    ranges: Mapping[str, tuple[float, float]] = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"generator kind must be one of {KINDS}, got {self.kind!r}")
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        if self.kind == "synthesiser" and not self.oscillators:
            raise ValueError("a synthesiser needs at least one oscillator")
        if not 0 <= self.volume <= 1:
            raise ValueError(f"master volume {self.volume} outside [0, 1]")
        if not 0 <= self.cutoff <= 1:
            raise ValueError(f"cutoff {self.cutoff} outside [0, 1]")
        if not 0 <= self.pitch <= 1:
            raise ValueError(f"pitch selector {self.pitch} outside [0, 1]")
        f_min, f_max = self.freq_range
        if not 0 < f_min < f_max:
            raise ValueError(f"frequency range needs 0 < f_min < f_max, got {self.freq_range}")
        if self.loop not in LOOP_MODES:
            raise ValueError(f"loop mode must be one of {LOOP_MODES}, got {self.loop!r}")
        object.__setattr__(self, "ranges", MappingProxyType(dict(self.ranges)))

    def check_sample_rate(self, sample_rate: float) -> None:
        if self.kind == "spectraliser" and not self.freq_range[1] < sample_rate / 2:
            raise ValueError(
                f"spectraliser f_max {self.freq_range[1]} Hz must be below Nyquist "
                f"({sample_rate / 2} Hz)"
            )
