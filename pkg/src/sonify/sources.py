"""Sound sources: data columns mapped onto sound parameters.

Two source kinds exist. An :class:`EventSet` holds one scalar per event for
every mapped parameter; an :class:`ObjectSource` is a single continuous
source whose evolvable parameters follow a data series over normalised time.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np


class MappingError(ValueError):
    """A mapping request that can never be valid (wrong parameter, duplicate)."""


class MappingWarning(UserWarning):
    """Raised (as a warning) for degenerate but recoverable mappings."""


class ParameterId(str, enum.Enum):
    POLAR = "polar"
    AZIMUTH = "azimuth"
    VOLUME = "volume"
    PITCH = "pitch"
    TIME = "time"
    CUTOFF = "cutoff"
    TIME_EVO = "time_evo"
    SPECTRUM = "spectrum"
    PITCH_SHIFT = "pitch_shift"
    ENV_A = "volume_envelope/A"
    ENV_D = "volume_envelope/D"
    ENV_S = "volume_envelope/S"
    ENV_R = "volume_envelope/R"
    VOLUME_LFO_FREQ = "volume_lfo/freq"
    VOLUME_LFO_FREQ_SHIFT = "volume_lfo/freq_shift"
    VOLUME_LFO_AMOUNT = "volume_lfo/amount"
    PITCH_LFO_FREQ = "pitch_lfo/freq"
    PITCH_LFO_FREQ_SHIFT = "pitch_lfo/freq_shift"
    PITCH_LFO_AMOUNT = "pitch_lfo/amount"

    @classmethod
    def parse(cls, name: str | ParameterId) -> ParameterId:
        try:
            return cls(name)
        except ValueError:
            raise MappingError(f"unknown sound parameter {name!r}") from None

    @property
    def mappable(self) -> bool:
        return _FLAGS[self][0]

    @property
    def evolvable(self) -> bool:
        return _FLAGS[self][1]

    @property
    def domain(self) -> tuple[float, float]:
        """Legal closed range of parameter values."""
        return _DOMAINS[self]


P = ParameterId

# (mappable, evolvable) per parameter
_FLAGS = {
    P.POLAR: (True, True),
    P.AZIMUTH: (True, True),
    P.VOLUME: (True, True),
    P.PITCH: (True, False),
    P.TIME: (True, False),
    P.CUTOFF: (True, True),
    P.TIME_EVO: (False, True),
    P.SPECTRUM: (True, False),
    P.PITCH_SHIFT: (True, True),
    P.ENV_A: (True, False),
    P.ENV_D: (True, False),
    P.ENV_S: (True, False),
    P.ENV_R: (True, False),
    P.VOLUME_LFO_FREQ: (True, False),
    P.VOLUME_LFO_FREQ_SHIFT: (True, True),
    P.VOLUME_LFO_AMOUNT: (True, True),
    P.PITCH_LFO_FREQ: (True, False),
    P.PITCH_LFO_FREQ_SHIFT: (True, True),
    P.PITCH_LFO_AMOUNT: (True, True),
}

_INF = math.inf
_DOMAINS = {
    P.POLAR: (0.0, math.pi),
    P.AZIMUTH: (0.0, 2 * math.pi),
    P.VOLUME: (0.0, 1.0),
    P.PITCH: (0.0, 1.0),
    P.TIME: (0.0, 1.0),
    P.CUTOFF: (0.0, 1.0),
    P.TIME_EVO: (0.0, 1.0),
    P.SPECTRUM: (0.0, _INF),
    P.PITCH_SHIFT: (-_INF, _INF),
    P.ENV_A: (0.0, _INF),
    P.ENV_D: (0.0, _INF),
    P.ENV_S: (0.0, 1.0),
    P.ENV_R: (0.0, _INF),
    P.VOLUME_LFO_FREQ: (0.0, _INF),
    P.VOLUME_LFO_FREQ_SHIFT: (-_INF, _INF),
    P.VOLUME_LFO_AMOUNT: (0.0, 1.0),
    P.PITCH_LFO_FREQ: (0.0, _INF),
    P.PITCH_LFO_FREQ_SHIFT: (-_INF, _INF),
    P.PITCH_LFO_AMOUNT: (0.0, _INF),
}

#: Values used for parameters a source does not map. ``None`` means the
#: generator preset decides.
DEFAULTS: Mapping[ParameterId, float | None] = MappingProxyType({
    P.AZIMUTH: 0.0,
    P.POLAR: math.pi / 2,
    P.VOLUME: 1.0,
    P.PITCH: 0.5,
    P.TIME: 0.0,
    P.CUTOFF: 1.0,
    P.PITCH_SHIFT: 0.0,
    P.ENV_A: None,
    P.ENV_D: None,
    P.ENV_S: None,
    P.ENV_R: None,
    P.VOLUME_LFO_FREQ: None,
    P.VOLUME_LFO_FREQ_SHIFT: None,
    P.VOLUME_LFO_AMOUNT: None,
    P.PITCH_LFO_FREQ: None,
    P.PITCH_LFO_FREQ_SHIFT: None,
    P.PITCH_LFO_AMOUNT: None,
})

#: Parameter ranges used when a mapping gives none.
DEFAULT_RANGES: Mapping[ParameterId, tuple[float, float]] = MappingProxyType({
    P.POLAR: (0.0, math.pi),
    P.AZIMUTH: (0.0, 2 * math.pi),
    P.VOLUME: (0.0, 1.0),
    P.PITCH: (0.0, 1.0),
    P.TIME: (0.0, 1.0),
    P.CUTOFF: (0.0, 1.0),
    P.PITCH_SHIFT: (0.0, 12.0),
    P.ENV_A: (0.0, 1.0),
    P.ENV_D: (0.0, 1.0),
    P.ENV_S: (0.0, 1.0),
    P.ENV_R: (0.0, 1.0),
    P.VOLUME_LFO_FREQ: (0.5, 10.0),
    P.VOLUME_LFO_FREQ_SHIFT: (0.0, 12.0),
    P.VOLUME_LFO_AMOUNT: (0.0, 1.0),
    P.PITCH_LFO_FREQ: (0.5, 10.0),
    P.PITCH_LFO_FREQ_SHIFT: (0.0, 12.0),
    P.PITCH_LFO_AMOUNT: (0.0, 1.0),
})


@dataclass(frozen=True)
class MapLimits:
    """Data-side limits ``lo``/``hi`` and the parameter range they map onto.

    In ``percentile`` mode ``lo`` and ``hi`` are percentiles (0-100) of the
    data; in ``data_units`` mode they are taken literally.
    """

    mode: str = "percentile"
    lo: float = 0.0
    hi: float = 100.0
    param_lo: float = 0.0
    param_hi: float = 1.0

    def __post_init__(self):
        if self.mode not in ("percentile", "data_units"):
            raise ValueError(f"limit mode must be 'percentile' or 'data_units', got {self.mode!r}")
        vals = (self.lo, self.hi, self.param_lo, self.param_hi)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("mapping limits must be finite")
        if self.mode == "percentile" and not 0 <= self.lo < self.hi <= 100:
            raise ValueError(
                f"percentile limits need 0 <= lo < hi <= 100, got {self.lo}, {self.hi}")
        if self.param_lo > self.param_hi:
            raise ValueError("param_lo must not exceed param_hi")

    def check_domain(self, param: ParameterId) -> None:
        lo, hi = param.domain
        if self.param_lo < lo or self.param_hi > hi:
            raise ValueError(
                f"range [{self.param_lo}, {self.param_hi}] outside the legal domain "
                f"[{lo}, {hi}] of {param.value!r}"
            )

    @classmethod
    def for_parameter(cls, param: ParameterId, mode="percentile", lo=None, hi=None,
                      param_range=None) -> MapLimits:
        """Build limits, filling data and parameter ranges from defaults."""
        if not param.mappable or param not in DEFAULT_RANGES:
            raise MappingError(f"{param.value!r} cannot be mapped from a data column")
        if lo is None:
            lo = 0.0 if mode == "percentile" else None
        if hi is None:
            hi = 100.0 if mode == "percentile" else None
        if lo is None or hi is None:
            raise ValueError("data_units limits need explicit lo and hi")
        if param_range is None:
            param_range = DEFAULT_RANGES[param]
        plo, phi = param_range
        limits = cls(mode, float(lo), float(hi), float(plo), float(phi))
        limits.check_domain(param)
        return limits


def map_parameter(data, limits: MapLimits) -> np.ndarray:
    """Clip ``data`` to the resolved limits and rescale onto the parameter range."""
    x = np.asarray(data, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot map an empty data array")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")
    if limits.mode == "percentile":
        lo, hi = np.percentile(x, [limits.lo, limits.hi])
    else:
        lo, hi = limits.lo, limits.hi
    if not hi > lo:
        warnings.warn(
            f"degenerate data range [{lo}, {hi}]; all values mapped to {limits.param_lo}",
            MappingWarning,
            stacklevel=2,
        )
        return np.full(x.shape, limits.param_lo)
    frac = (np.clip(x, lo, hi) - lo) / (hi - lo)
    out = limits.param_lo + frac * (limits.param_hi - limits.param_lo)
    # guard the top end against rounding past param_hi
    return np.minimum(out, limits.param_hi)


@dataclass(frozen=True)
class ParameterMapping:
    """One data column bound to one sound parameter."""

    parameter: ParameterId
    column: str
    limits: MapLimits = field(default_factory=MapLimits)


def _as_mapping(item) -> ParameterMapping:
    if isinstance(item, ParameterMapping):
        return item
    param, column, limits = item
    return ParameterMapping(ParameterId.parse(param), column, limits)


def _check_columns(columns: Mapping[str, Sequence[float]]) -> dict[str, np.ndarray]:
    cols = {k: np.asarray(v, dtype=np.float64) for k, v in columns.items()}
    lengths = {len(v) for v in cols.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns have mismatched lengths: {sorted(lengths)}")
    return cols


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EventSet:
    count: int
    values: Mapping[ParameterId, np.ndarray]

    def __post_init__(self):
        for p, v in self.values.items():
            if not p.mappable:
                raise MappingError(f"{p.value!r} is not a mappable parameter")
            if len(v) != self.count:
                raise ValueError(f"{p.value!r} has {len(v)} values for {self.count} events")

    def is_mapped(self, param) -> bool:
        return ParameterId.parse(param) in self.values

    def value(self, param, index: int):
        p = ParameterId.parse(param)
        if p in self.values:
            return float(self.values[p][index])
        return DEFAULTS.get(p)

    def column(self, param) -> np.ndarray | None:
        return self.values.get(ParameterId.parse(param))


def build_event_set(columns, mappings=(), n_events: int | None = None) -> EventSet:
    """Map table columns onto per-event parameter values.

    ``mappings`` holds ``ParameterMapping`` objects or ``(parameter, column, limits)``
    tuples. With no columns at all, ``n_events`` sets the event count.
    """
    cols = _check_columns(columns)
    if cols:
        count = len(next(iter(cols.values())))
    elif n_events is not None:
        count = int(n_events)
    else:
        count = 1
    values = {}
    for m in map(_as_mapping, mappings):
        p = m.parameter
        if not p.mappable:
            raise MappingError(f"{p.value!r} is not a mappable parameter")
        if p is P.SPECTRUM:
            raise MappingError(
                "'spectrum' is supplied as a spectraliser input, not a column mapping")
        if p in values:
            raise MappingError(f"duplicate mapping for {p.value!r}")
        if m.column not in cols:
            raise KeyError(m.column)
        m.limits.check_domain(p)
        values[p] = _freeze(map_parameter(cols[m.column], m.limits))
    if count < 1:
        raise ValueError("an event set needs at least one event")
    return EventSet(count, MappingProxyType(values))


@dataclass(frozen=True)
class Evolution:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape or self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("evolution grid and values must be equal-length 1-D arrays")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("evolution time grid must be strictly increasing")

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


@dataclass(frozen=True)
class ObjectSource:
    static_values: Mapping[ParameterId, float]
    evolutions: Mapping[ParameterId, Evolution]
    spectrum: np.ndarray | None = None

    def __post_init__(self):
        for p in self.evolutions:
            if not p.evolvable:
                raise MappingError(f"{p.value!r} cannot evolve over time")

    def is_mapped(self, param) -> bool:
        p = ParameterId.parse(param)
        return p in self.evolutions or p in self.static_values

    def static(self, param):
        p = ParameterId.parse(param)
        if p in self.static_values:
            return self.static_values[p]
        return DEFAULTS.get(p)


def build_object_source(series, time_column: str, mappings=(), static=None,
                        spectrum=None) -> ObjectSource:
    """Turn a data series into a single evolving source.

    The ``time_column`` is rescaled to [0, 1] and used as the evolution grid
    for every mapped parameter. ``static`` maps parameter names to fixed
    values for mappable-but-not-evolvable parameters.
    """
    cols = _check_columns(series)
    if time_column not in cols:
        raise KeyError(time_column)
    t = cols[time_column]
    if t.size == 0:
        raise ValueError("empty data series")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValueError(f"time column {time_column!r} is not strictly increasing")
    span = t[-1] - t[0]
    grid = (t - t[0]) / span if t.size > 1 else np.zeros(1)
    evolutions = {}
    for m in map(_as_mapping, mappings):
        p = m.parameter
        if not p.evolvable:
            raise MappingError(f"{p.value!r} is not an evolvable parameter")
        if p is P.TIME_EVO:
            raise MappingError("'time_evo' is set by the time column, not a mapping")
        if p in evolutions:
            raise MappingError(f"duplicate mapping for {p.value!r}")
        if m.column not in cols:
            raise KeyError(m.column)
        m.limits.check_domain(p)
        evolutions[p] = Evolution(_freeze(grid), _freeze(map_parameter(cols[m.column], m.limits)))
    static_values = {}
    for name, v in (static or {}).items():
        p = ParameterId.parse(name)
        if not p.mappable or p is P.SPECTRUM:
            raise MappingError(f"{p.value!r} cannot be given a static value")
        lo, hi = p.domain
        if not lo <= v <= hi:
            raise ValueError(f"static value {v} outside the domain of {p.value!r}")
        static_values[p] = float(v)
    if spectrum is not None:
        spectrum = _freeze(spectrum)
    return ObjectSource(MappingProxyType(static_values), MappingProxyType(evolutions), spectrum)


def evaluate_evolution(src: ObjectSource, param, t):
    """Parameter value at normalised time ``t``; static value if it does not evolve."""
    p = ParameterId.parse(param)
    evo = src.evolutions.get(p)
    if evo is None:
        return src.static(p)
    out = evo(t)
    return float(out) if np.ndim(out) == 0 else out
