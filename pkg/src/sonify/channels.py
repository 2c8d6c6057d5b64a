"""Virtual microphone banks and spatial mixing.

Every output channel is a microphone with an antenna pattern; a source
heard from direction ``d`` adds ``gain(mic, d) * signal`` to that channel.
Ambisonic banks use real spherical harmonics in the ambiX convention (ACN
channel order, SN3D normalisation, no Condon-Shortley phase).

Angles: ``azimuth`` is measured anticlockwise from straight ahead (so +90 deg
is to the left), ``polar`` from the zenith (pi/2 is the horizon).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Direction:
    """Direction to a source; fields may be scalars or per-sample arrays."""

    azimuth: float | np.ndarray = 0.0
    polar: float | np.ndarray = math.pi / 2

    def __post_init__(self):
        az = np.mod(np.asarray(self.azimuth, dtype=np.float64), TWO_PI)
        pol = np.asarray(self.polar, dtype=np.float64)
        if not (np.all(np.isfinite(az)) and np.all(np.isfinite(pol))):
            raise ValueError("direction angles must be finite")
        if np.any(pol < 0) or np.any(pol > math.pi):
            raise ValueError("polar angle must lie in [0, pi]")
        object.__setattr__(self, "azimuth", float(az) if az.ndim == 0 else az)
        object.__setattr__(self, "polar", float(pol) if pol.ndim == 0 else pol)

    @property
    def is_static(self) -> bool:
        return np.ndim(self.azimuth) == 0 and np.ndim(self.polar) == 0

    def unit_vector(self) -> np.ndarray:
        """Cartesian unit vector(s), shape ``(3,)`` or ``(3, n)``."""
        az, pol = np.asarray(self.azimuth), np.asarray(self.polar)
        s = np.sin(pol)
        return np.array(np.broadcast_arrays(s * np.cos(az), s * np.sin(az), np.cos(pol)))

    @classmethod
    def from_vector(cls, v) -> Direction:
        v = np.asarray(v, dtype=np.float64)
        r = np.linalg.norm(v, axis=0)
        pol = np.arccos(np.clip(v[2] / r, -1.0, 1.0))
        return cls(np.arctan2(v[1], v[0]), pol)


def _legendre_sn3d(order: int, x, s=None) -> dict[tuple[int, int], np.ndarray]:
    """SN3D-normalised associated Legendre functions ``N_l^m P_l^m(x)``, m >= 0,
    without the Condon-Shortley phase. ``s`` is ``sqrt(1 - x^2)`` if known
    more accurately than it can be recomputed."""
    x = np.asarray(x, dtype=np.float64)
    if s is None:
        s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    p = {}
    pmm = np.ones_like(x)
    for m in range(order + 1):
        if m > 0:
            pmm = pmm * (2 * m - 1) * s
        p[(m, m)] = pmm
        if m + 1 <= order:
            p[(m + 1, m)] = x * (2 * m + 1) * pmm
        for l in range(m + 2, order + 1):
            p[(l, m)] = ((2 * l - 1) * x * p[(l - 1, m)] - (l + m - 1) * p[(l - 2, m)]) / (l - m)
    out = {}
    for (l, m), val in p.items():
        norm = math.sqrt((1 if m == 0 else 2) * math.factorial(l - m) / math.factorial(l + m))
        out[(l, m)] = norm * val
    return out


def acn_degree_order(acn: int) -> tuple[int, int]:
    l = math.isqrt(acn)
    return l, acn - l * l - l


def sh_gains(order: int, direction: Direction) -> np.ndarray:
    """All real SN3D spherical harmonics up to ``order`` in ACN order."""
    pol = np.asarray(direction.polar)
    el_sin = np.cos(pol)  # sin(elevation)
    az = np.asarray(direction.azimuth)
    # sin(polar) directly; sqrt(1 - cos^2) loses precision near the poles
    leg = _legendre_sn3d(order, el_sin, np.sin(pol))
    rows = []
    for acn in range((order + 1) ** 2):
        l, m = acn_degree_order(acn)
        base = leg[(l, abs(m))]
        if m > 0:
            base = base * np.cos(m * az)
        elif m < 0:
            base = base * np.sin(-m * az)
        rows.append(np.broadcast_to(base, np.broadcast(el_sin, az).shape))
    return np.array(rows)


@dataclass(frozen=True)
class Microphone:
    """``pattern`` is ``omni``, ``cardioid`` or ``sh`` (spherical harmonic)."""

    pattern: str = "omni"
    axis: Direction = Direction()
    order: int = 0
    acn: int = 0
    gain: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.pattern not in ("omni", "cardioid", "sh"):
            raise ValueError(f"unknown microphone pattern {self.pattern!r}")
        if self.pattern == "sh" and not 0 <= self.acn <= (self.order + 1) ** 2 - 1:
            raise ValueError(f"ACN index {self.acn} invalid for order {self.order}")
        if not self.axis.is_static:
            raise ValueError("microphone axes are fixed")


def antenna_gain(mic: Microphone, direction: Direction):
    """Gain of ``mic`` for a source at ``direction`` (scalar or per-sample)."""
    if mic.pattern == "omni":
        g = np.full(np.broadcast(np.asarray(direction.azimuth),
                                 np.asarray(direction.polar)).shape, 1.0)
    elif mic.pattern == "cardioid":
        cos_gamma = np.tensordot(mic.axis.unit_vector(), direction.unit_vector(), axes=(0, 0))
        g = 0.5 * (1.0 + np.clip(cos_gamma, -1.0, 1.0))
    else:
        l, m = acn_degree_order(mic.acn)
        g = sh_gains(l, direction)[mic.acn]
    g = mic.gain * g
    return float(g) if np.ndim(g) == 0 else g


def _deg(a):
    return math.radians(a % 360.0)


def _ring(labels_angles):
    mics = []
    for label, az in labels_angles:
        if label == "LFE":
            mics.append(Microphone("omni", gain=0.5, label="LFE"))
        else:
            mics.append(Microphone("cardioid", Direction(_deg(az), math.pi / 2), label=label))
    return tuple(mics)


_LAYOUTS = {
    "mono": (Microphone("omni", label="M"),),
    "stereo": _ring([("L", 45), ("R", -45)]),
    "5.1": _ring([("L", 30), ("R", -30), ("C", 0), ("LFE", 0), ("Ls", 110), ("Rs", -110)]),
    "7.1": _ring([("L", 30), ("R", -30), ("C", 0), ("LFE", 0), ("Lb", 135), ("Rb", -135),
                  ("Ls", 90), ("Rs", -90)]),
}
_AMBIX_RE = re.compile(r"^ambix(\d+)$", re.IGNORECASE)
MAX_AMBISONIC_ORDER = 10
SYSTEMS = tuple(_LAYOUTS) + tuple(f"ambiX{n}" for n in (1, 2, 3))


@dataclass(frozen=True)
class MicrophoneBank:
    mics: tuple[Microphone, ...]
    system: str = "custom"

    def __len__(self):
        return len(self.mics)

    @property
    def ambisonic_order(self) -> int | None:
        m = _AMBIX_RE.match(self.system)
        return int(m.group(1)) if m else None

    def gains(self, direction: Direction) -> np.ndarray:
        """Gains of every mic, shape ``(channels, 1)`` or ``(channels, n)``."""
        order = self.ambisonic_order
        if order is not None and all(m.pattern == "sh" for m in self.mics):
            g = sh_gains(order, direction)
        else:
            g = np.array([np.broadcast_to(antenna_gain(m, direction),
                                          np.shape(direction.azimuth) or np.shape(direction.polar))
                          for m in self.mics])
        g = np.asarray(g, dtype=np.float64)
        if g.ndim == 1:
            g = g[:, np.newaxis]
        return np.ascontiguousarray(g)


def make_bank(system: str) -> MicrophoneBank:
    """Microphone bank for a named audio system (``mono``, ``stereo``, ``5.1``,
    ``7.1`` or ``ambiX<order>``)."""
    if system in _LAYOUTS:
        return MicrophoneBank(_LAYOUTS[system], system)
    m = _AMBIX_RE.match(system)
    if m:
        order = int(m.group(1))
        if not 1 <= order <= MAX_AMBISONIC_ORDER:
            raise ValueError(f"ambisonic order must be 1..{MAX_AMBISONIC_ORDER}, got {order}")
        mics = tuple(Microphone("sh", order=order, acn=a, label=f"ACN{a}")
                     for a in range((order + 1) ** 2))
        return MicrophoneBank(mics, f"ambiX{order}")
    raise ValueError(f"unknown audio system {system!r}; choose from {list(SYSTEMS)} "
                     f"or ambiX<order>")


@dataclass(frozen=True)
class MultichannelBuffer:
    channels: np.ndarray  # (n_channels, n_samples)
    sample_rate: int

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim != 2:
            raise ValueError("channels must be a 2-D (channels, samples) array")
        if not np.all(np.isfinite(ch)):
            raise ValueError("multichannel buffer holds non-finite samples")
        object.__setattr__(self, "channels", ch)

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


def slerp_directions(times, directions: Direction, query) -> Direction:
    """Interpolate a direction series (given at ``times``) along great circles."""
    times = np.asarray(times, dtype=np.float64)
    q = np.clip(np.asarray(query, dtype=np.float64), times[0], times[-1])
    v = directions.unit_vector()
    if v.ndim == 1:
        v = v[:, np.newaxis]
    if v.shape[1] == 1:
        return Direction.from_vector(np.repeat(v, q.size, axis=1).reshape((3,) + q.shape))
    seg = np.clip(np.searchsorted(times, q, side="right") - 1, 0, times.size - 2)
    u = (q - times[seg]) / (times[seg + 1] - times[seg])
    p0, p1 = v[:, seg], v[:, seg + 1]
    omega = np.arccos(np.clip(np.sum(p0 * p1, axis=0), -1.0, 1.0))
    so = np.sin(omega)
    small = so < 1e-9
    safe = np.where(small, 1.0, so)
    w0 = np.where(small, 1.0 - u, np.sin((1.0 - u) * omega) / safe)
    w1 = np.where(small, u, np.sin(u * omega) / safe)
    out = w0 * p0 + w1 * p1
    norm = np.linalg.norm(out, axis=0)
    out = np.where(norm > 1e-12, out / np.where(norm > 1e-12, norm, 1.0), p0)
    return Direction.from_vector(out)


def mix_into(out: np.ndarray, signal, direction: Direction, bank: MicrophoneBank,
             offset: int = 0) -> None:
    """Add one source's contribution to ``out`` (channels x samples) in place."""
    sig = np.ascontiguousarray(signal, dtype=np.float64)
    gains = bank.gains(direction)
    if gains.shape[1] not in (1, sig.size):
        raise ValueError(f"direction series has {gains.shape[1]} samples, signal {sig.size}")
    _kernels.mix_add(out, gains, sig, int(offset))


def mix(signals: Sequence, directions: Sequence[Direction], bank: MicrophoneBank,
        sample_rate: int = 44100) -> MultichannelBuffer:
    """Channel ``j`` = sum over sources ``i`` (ascending) of ``gain_j(dir_i(t)) * S_i(t)``."""
    if len(signals) != len(directions):
        raise ValueError(f"{len(signals)} signals but {len(directions)} directions")
    sigs = [np.asarray(s, dtype=np.float64) for s in signals]
    lengths = {s.size for s in sigs}
    if len(lengths) > 1:
        raise ValueError(f"signals have mismatched lengths: {sorted(lengths)}")
    n = lengths.pop() if lengths else 0
    out = np.zeros((len(bank), n))
    for sig, d in zip(sigs, directions):
        mix_into(out, sig, d, bank)
    return MultichannelBuffer(out, sample_rate)
