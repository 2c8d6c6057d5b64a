"""Data sonification: map data onto sound parameters and render spatial audio.

The pipeline runs sources -> score -> generator -> channels; see
:func:`sonify.sonification.render`.
"""
from . import channels, generator, presets, score, sources
from ._kernels import BACKEND
from .channels import Direction, MicrophoneBank, MultichannelBuffer, make_bank, mix
from .generator import GeneratorConfig
from .presets import compile_preset, load_preset, merge_overrides
from .score import ScoreSpec, parse_note
from .sonification import RenderPlan, RenderResult, render, write_wav
from .sources import MapLimits, ParameterId, build_event_set, build_object_source

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Direction", "GeneratorConfig", "MapLimits", "MicrophoneBank",
    "MultichannelBuffer", "ParameterId", "RenderPlan", "RenderResult", "ScoreSpec",
    "build_event_set", "build_object_source", "channels", "compile_preset", "generator",
    "load_preset", "make_bank", "merge_overrides", "mix", "parse_note", "presets", "render",
    "score", "sources", "write_wav",
]
