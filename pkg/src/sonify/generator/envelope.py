from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnvelopeSpec:
    """ADSR timings (seconds), sustain level and per-segment curvature.

    Each segment's unit ramp ``u`` is bent to ``u**(1 + c)``; ``c = 0`` is
    linear, positive values ease in, values in (-1, 0) ease out.
    """

    A: float = 0.0
    D: float = 0.0
    S: float = 1.0
    R: float = 0.0
    Ac: float = 0.0
    Dc: float = 0.0
    Rc: float = 0.0

    def __post_init__(self):
        for name in ("A", "D", "R"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"envelope {name} must be a finite non-negative time, got {v}")
        if not 0 <= self.S <= 1:
            raise ValueError(f"sustain level {self.S} outside [0, 1]")
        for name in ("Ac", "Dc", "Rc"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > -1):
                raise ValueError(f"curvature {name} must exceed -1, got {v}")

    def replace(self, **changes) -> EnvelopeSpec:
        fields = {k: getattr(self, k) for k in ("A", "D", "S", "R", "Ac", "Dc", "Rc")}
        fields.update({k: v for k, v in changes.items() if v is not None})
        return EnvelopeSpec(**fields)


def _bend(u, c):
    return u ** (1.0 + c)


def _held(env: EnvelopeSpec, t):
    """Level before release: attack, decay, then sustain."""
    out = np.full(t.shape, env.S)
    if env.D > 0:
        seg = (t >= env.A) & (t < env.A + env.D)
        u = (t[seg] - env.A) / env.D
        out[seg] = 1.0 - (1.0 - env.S) * _bend(u, env.Dc)
    if env.A > 0:
        seg = t < env.A
        out[seg] = _bend(t[seg] / env.A, env.Ac)
    return out


def envelope_value(env: EnvelopeSpec, t, note_length=None):
    """Envelope level at time ``t`` (seconds, scalar or array) for a note
    released at ``note_length``; ``None`` holds the note indefinitely.

    Release starts from whatever level the note had reached, so a note shorter
    than ``A + D`` fades from mid-attack or mid-decay.
    """
    ts = np.asarray(t, dtype=np.float64)
    flat = np.atleast_1d(ts)
    out = _held(env, flat)
    if note_length is not None:
        rel = flat >= note_length
        if np.any(rel):
            start = _held(env, np.array([float(note_length)]))[0]
            if env.R > 0:
                u = np.minimum((flat[rel] - note_length) / env.R, 1.0)
                out[rel] = start * (1.0 - _bend(u, env.Rc))
            else:
                out[rel] = 0.0
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if ts.ndim == 0 else out.reshape(ts.shape)
