"""Named generator presets: YAML trees validated against a strict schema.

Builtins (``default``, ``pitch_mapper``, ``windy``) ship as package data.
Override maps may be nested or use dotted paths; a ``None`` value removes a
key, which lets :func:`diff` express any change between two trees.
"""
from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import yaml

from ..generator import (
    EnvelopeSpec,
    FORMS,
    GeneratorConfig,
    KINDS,
    LfoSpec,
    OscillatorSpec,
)
from ..sources import ParameterId

BUILTINS = ("default", "pitch_mapper", "windy")


class PresetError(ValueError):
    """Invalid preset; ``path`` names the offending key (``a/b/c``)."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_NUM = {"type": "number"}
_NONNEG = {"type": "number", "minimum": 0}
_UNIT = {"type": "number", "minimum": 0, "maximum": 1}
_CURVE = {"type": "number", "exclusiveMinimum": -1}
_PHASE = {"anyOf": [{"type": "number"}, {"const": "random"}]}
_ENV_FIELDS = {"A": _NONNEG, "D": _NONNEG, "S": _UNIT, "R": _NONNEG,
               "Ac": _CURVE, "Dc": _CURVE, "Rc": _CURVE}


def _obj(props, **extra):
    return {"type": "object", "properties": props, "additionalProperties": False, **extra}


_LFO = _obj({
    "use": {"type": "boolean"},
    "wave": {"enum": list(FORMS)},
    "amount": _NONNEG,
    "freq": {"type": "number", "exclusiveMinimum": 0},
    "freq_shift": _NUM,
    "phase": _PHASE,
    "level": _UNIT,
    **_ENV_FIELDS,
})

_RANGE = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCHEMA = _obj({
    "name": {"type": "string"},
    "description": {"type": "string"},
    "generator": {"enum": list(KINDS)},
    "oscillators": {
        "type": "object",
        "patternProperties": {
            "^osc[1-9][0-9]*$": _obj({
                "form": {"enum": list(FORMS)},
                "level": _UNIT,
                "detune": _NUM,
                "phase": _PHASE,
            }),
        },
        "additionalProperties": False,
    },
    "volume_envelope": _obj(dict(_ENV_FIELDS)),
    "volume_lfo": _LFO,
    "pitch_lfo": _LFO,
    "filter": {"type": "boolean"},
    "cutoff": _UNIT,
    "volume": _UNIT,
    "pitch": _UNIT,
    "freq_range": _RANGE,
    # YAML 1.1 reads a bare `off` as false
    "loop": {"enum": [False, "off", "forward", "pingpong"]},
    "samples": {"type": "string"},
    "ranges": _obj({p.value: _RANGE for p in ParameterId if p.mappable}),
}, required=["name"])

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _path(parts) -> str:
    return "/".join(str(p) for p in parts)


def validate(data: Mapping) -> None:
    """Raise :class:`PresetError` naming the first offending key."""
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
    if not errors:
        return
    err = errors[0]
    path = list(err.absolute_path)
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        patterns = err.schema.get("patternProperties", {})
        extra = sorted(k for k in err.instance
                       if k not in allowed and not any(re.match(p, k) for p in patterns))
        if extra:
            raise PresetError(f"unknown key {extra[0]!r}", _path(path + [extra[0]]))
    raise PresetError(err.message, _path(path))


@dataclass(frozen=True)
class PresetTree:
    name: str
    description: str = ""
    data: Mapping[str, Any] = field(default_factory=dict, compare=True)

    def to_dict(self) -> dict:
        return copy.deepcopy(dict(self.data))

    def get(self, dotted: str, default=None):
        node = self.data
        for part in dotted.split("."):
            if not isinstance(node, Mapping) or part not in node:
                return default
            node = node[part]
        return copy.deepcopy(node)


def from_dict(data: Mapping) -> PresetTree:
    data = copy.deepcopy(dict(data))
    validate(data)
    return PresetTree(data["name"], data.get("description", ""), data)


def _parse_yaml(text: str, origin: str):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise PresetError(f"cannot parse {origin}{where}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise PresetError(f"{origin} does not contain a mapping")
    return data


def loads(text: str, origin: str = "<string>") -> PresetTree:
    return from_dict(_parse_yaml(text, origin))


def load_preset(source: str | Path) -> PresetTree:
    """Load a builtin by name, or a preset YAML file by path."""
    if isinstance(source, str) and source in BUILTINS:
        text = resources.files(__package__).joinpath("builtin", f"{source}.yaml").read_text()
        return loads(text, f"builtin preset {source!r}")
    path = Path(source)
    if not path.is_file():
        raise PresetError(f"unknown preset {str(source)!r}; builtins are {list(BUILTINS)}")
    return loads(path.read_text(encoding="utf-8"), str(path))


def serialize(tree: PresetTree) -> str:
    """Canonical YAML text: name and description first, other keys sorted."""
    data = tree.to_dict()
    head = {"name": data.pop("name"), "description": data.pop("description", "")}
    out = yaml.safe_dump(head, sort_keys=False, allow_unicode=True, width=1000)
    if data:
        out += yaml.safe_dump(data, sort_keys=True, allow_unicode=True, default_flow_style=False)
    return out


def expand_dotted(overrides: Mapping) -> dict:
    """Turn ``{"a.b": 1}`` into ``{"a": {"b": 1}}``; nested maps pass through."""
    out: dict = {}
    for key, value in overrides.items():
        if isinstance(value, Mapping):
            value = expand_dotted(value)
        parts = str(key).split(".")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise PresetError("conflicting override paths", ".".join(parts))
        leaf = parts[-1]
        if isinstance(value, dict) and isinstance(node.get(leaf), dict):
            _combine(node[leaf], value)
        else:
            node[leaf] = value
    return out


def _combine(into: dict, more: Mapping) -> None:
    # like a deep merge but keeps None deletion markers
    for key, value in more.items():
        if isinstance(value, Mapping) and isinstance(into.get(key), dict):
            _combine(into[key], value)
        else:
            into[key] = value


def _deep_merge(base: dict, over: Mapping) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if value is None:
            out.pop(key, None)
        elif isinstance(value, Mapping):
            out[key] = _deep_merge(out[key] if isinstance(out.get(key), dict) else {}, value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def merge_overrides(base: PresetTree, overrides: Mapping | None) -> PresetTree:
    """Deep-merge ``overrides`` into ``base`` (overrides win) and re-validate."""
    if not overrides:
        return base
    return from_dict(_deep_merge(base.to_dict(), expand_dotted(overrides)))


def diff(base: PresetTree | Mapping, target: PresetTree | Mapping) -> dict:
    """Minimal override map turning ``base`` into ``target``."""
    a = base.to_dict() if isinstance(base, PresetTree) else dict(base)
    b = target.to_dict() if isinstance(target, PresetTree) else dict(target)
    return _diff(a, b)


def _diff(a: Mapping, b: Mapping) -> dict:
    out = {}
    for key, bv in b.items():
        av = a.get(key, _MISSING)
        if isinstance(av, Mapping) and isinstance(bv, Mapping):
            sub = _diff(av, bv)
            if sub:
                out[key] = sub
        elif av is _MISSING or av != bv or type(av) is not type(bv):
            out[key] = copy.deepcopy(bv)
    for key in a:
        if key not in b:
            out[key] = None
    return out


_MISSING = object()


def _envelope(block: Mapping) -> EnvelopeSpec:
    return EnvelopeSpec(**{k: float(block[k]) for k in _ENV_FIELDS if k in block})


def _lfo(block: Mapping | None) -> LfoSpec:
    block = block or {}
    kw = {k: block[k] for k in ("use", "wave", "amount", "freq", "freq_shift", "phase", "level")
          if k in block}
    for k in ("amount", "freq", "freq_shift", "level"):
        if k in kw:
            kw[k] = float(kw[k])
    return LfoSpec(envelope=_envelope(block), **kw)


def compile_preset(tree: PresetTree) -> GeneratorConfig:
    """Build a :class:`GeneratorConfig`, filling every missing field with its default."""
    d = tree.data
    kw = {}
    if "oscillators" in d:
        oscs = d["oscillators"]
        kw["oscillators"] = tuple(
            OscillatorSpec(
                form=oscs[k].get("form", "sine"),
                level=float(oscs[k].get("level", 1.0)),
                detune=float(oscs[k].get("detune", 0.0)),
                phase=oscs[k].get("phase", 0.0),
            )
            for k in sorted(oscs, key=lambda k: int(k[3:]))
        )
    loop = d.get("loop", "off")
    ranges = {k: (float(v[0]), float(v[1])) for k, v in d.get("ranges", {}).items()}
    if "freq_range" in d:
        kw["freq_range"] = tuple(float(v) for v in d["freq_range"])
    try:
        return GeneratorConfig(
            kind=d.get("generator", "synthesiser"),
            envelope=_envelope(d.get("volume_envelope", {})),
            volume_lfo=_lfo(d.get("volume_lfo")),
            pitch_lfo=_lfo(d.get("pitch_lfo")),
            filter_on=bool(d.get("filter", False)),
            cutoff=float(d.get("cutoff", 1.0)),
            volume=float(d.get("volume", 1.0)),
            pitch=float(d.get("pitch", 1.0)),
            loop="off" if loop is False else loop,
            samples=d.get("samples"),
            ranges=ranges,
            **kw,
        )
    except ValueError as exc:
        raise PresetError(str(exc)) from None


# the public name mirrors the operation; ``compile`` would shadow the builtin
compile = compile_preset  # noqa: A001

__all__ = [
    "BUILTINS", "PresetError", "PresetTree", "SCHEMA", "compile_preset", "diff",
    "expand_dotted", "from_dict", "load_preset", "loads", "merge_overrides", "serialize",
    "validate",
]
