"""Command-line batch renderer.

    sonify --config job.yaml [--data table.csv] [--out out.wav] [--dry-run]

Exit codes: 0 success, 1 configuration error, 2 data error, 3 I/O error.
The environment variable ``SONIFY_SEED`` takes precedence over ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
import yaml

from . import presets
from .channels import make_bank
from .generator import load_sample_bank
from .score import ScoreSpec, assign_notes
from .sonification import SAMPLE_RATES, PlanError, RenderPlan, render, write_wav
from .sources import (
    DEFAULT_RANGES,
    EventSet,
    MapLimits,
    MappingError,
    ParameterId,
    ParameterMapping,
    build_event_set,
    build_object_source,
)
from .wav import ENCODINGS, WavError

log = logging.getLogger("sonify")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_IO = 0, 1, 2, 3
_MISSING = {"", "na", "nan", "null", "none"}


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


def load_table(path) -> dict[str, np.ndarray]:
    """Read a UTF-8 CSV with a header row into float64 columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header) or any(not h for h in header):
        raise DataError(f"{path}: header has blank or duplicate column names")
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: empty table")
    cols = [[] for _ in header]
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
        for c, cell in enumerate(row):
            text = cell.strip()
            if text.lower() in _MISSING:
                raise DataError(f"{path}: missing value at row {r}, column {header[c]!r}")
            try:
                v = float(text)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {text!r} at row {r}, column {header[c]!r}"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value at row {r}, column {header[c]!r}")
            cols[c].append(v)
    log.info("loaded %d rows x %d columns from %s", len(body), len(header), path)
    return {h: np.array(v, dtype=np.float64) for h, v in zip(header, cols)}


_NUM = {"type": "number"}
JOB_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["score"],
    "properties": {
        "data": {"type": "string"},
        "source": {"enum": ["events", "object"]},
        "time_column": {"type": "string"},
        "spectrum_column": {"type": "string"},
        "mappings": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["parameter", "column"],
                "properties": {
                    "parameter": {"enum": [p.value for p in ParameterId]},
                    "column": {"type": "string"},
                    "mode": {"enum": ["percentile", "data_units"]},
                    "lo": _NUM,
                    "hi": _NUM,
                    "range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                },
            },
        },
        "static": {"type": "object", "additionalProperties": _NUM},
        "score": {
            "type": "object",
            "additionalProperties": False,
            "required": ["chords", "duration"],
            "properties": {
                "chords": {"anyOf": [
                    {"type": "string"},
                    {"type": "array", "minItems": 1,
                     "items": {"anyOf": [{"type": "string"},
                                         {"type": "array", "items": {"type": "string"}}]}},
                ]},
                "duration": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "generator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"type": "string"},
                "overrides": {"type": "object"},
                "samples": {"type": "string"},
                "loop": {"enum": [False, "off", "forward", "pingpong"]},
            },
        },
        # YAML reads a bare 5.1 or 7.1 as a number
        "system": {"type": ["string", "number"]},
        "sample_rate": {"enum": list(SAMPLE_RATES)},
        "seed": {"type": "integer", "minimum": 0},
        "encoding": {"enum": list(ENCODINGS)},
        "output": {"type": "string"},
        "event_hold": {"type": "number", "minimum": 0},
    },
}
_JOB_VALIDATOR = jsonschema.Draft202012Validator(JOB_SCHEMA)


@dataclass
class JobConfig:
    data: Path | None
    source: str = "events"
    time_column: str | None = None
    spectrum_column: str | None = None
    mappings: list[dict] = field(default_factory=list)
    static: dict[str, float] = field(default_factory=dict)
    chords: Any = "A4"
    duration: float = 10.0
    preset: str = "default"
    overrides: dict = field(default_factory=dict)
    samples: Path | None = None
    loop: str | None = None
    system: str = "stereo"
    sample_rate: int = 44100
    seed: int = 0
    encoding: str = "pcm16"
    output: Path | None = None
    event_hold: float = 0.5


def _resolve(base: Path, value) -> Path | None:
    if value is None:
        return None
    p = Path(value).expanduser()
    return p if p.is_absolute() else base / p


def load_job(path, args=None) -> JobConfig:
    """Read and validate a job file, applying command-line overrides."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}" if mark else ""
        raise ConfigError(f"{path}:{where} invalid YAML") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    errors = sorted(_JOB_VALIDATOR.iter_errors(raw),
                    key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        if err.validator == "additionalProperties":
            known = set(err.schema.get("properties", {}))
            extra = sorted(set(err.instance) - known)
            if extra:
                raise ConfigError(f"unknown key {extra[0]!r} in {where}")
        raise ConfigError(f"bad value for {where!r}: {err.message}")
    base = path.parent
    gen = raw.get("generator", {})
    score = raw["score"]
    loop = gen.get("loop")
    job = JobConfig(
        data=_resolve(base, raw.get("data")),
        source=raw.get("source", "events"),
        time_column=raw.get("time_column"),
        spectrum_column=raw.get("spectrum_column"),
        mappings=list(raw.get("mappings", [])),
        static=dict(raw.get("static", {})),
        chords=score["chords"],
        duration=float(score["duration"]),
        preset=gen.get("preset", "default"),
        overrides=dict(gen.get("overrides", {})),
        samples=_resolve(base, gen.get("samples")),
        loop="off" if loop is False else loop,
        system=str(raw.get("system", "stereo")),
        sample_rate=int(raw.get("sample_rate", 44100)),
        seed=int(raw.get("seed", 0)),
        encoding=raw.get("encoding", "pcm16"),
        output=_resolve(base, raw.get("output")),
        event_hold=float(raw.get("event_hold", 0.5)),
    )
    if job.preset not in presets.BUILTINS:
        job.preset = str(_resolve(base, job.preset))
    if args is not None:
        if args.data:
            job.data = Path(args.data)
        if args.out:
            job.output = Path(args.out)
        if args.preset:
            job.preset = args.preset
        if args.system:
            job.system = args.system
        if args.duration is not None:
            if not args.duration > 0:
                raise ConfigError("--duration must be positive")
            job.duration = args.duration
        if args.seed is not None:
            job.seed = args.seed
    env_seed = os.environ.get("SONIFY_SEED")
    if env_seed:
        try:
            job.seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"SONIFY_SEED must be an integer, got {env_seed!r}") from None
    if job.data is None:
        raise ConfigError("no data table given (config key 'data' or --data)")
    if job.source == "object" and not job.time_column:
        raise ConfigError("object sources need 'time_column'")
    return job


def _limits(m: dict, param: ParameterId, ranges) -> MapLimits:
    try:
        param_range = m.get("range") or ranges.get(param.value)
        return MapLimits.for_parameter(param, m.get("mode", "percentile"), m.get("lo"),
                                       m.get("hi"), param_range)
    except ValueError as exc:
        raise ConfigError(f"mapping for {param.value!r}: {exc}") from None


def build_plan(job: JobConfig, table: dict[str, np.ndarray]) -> RenderPlan:
    try:
        tree = presets.merge_overrides(presets.load_preset(job.preset), job.overrides)
        if job.samples is not None:
            tree = presets.merge_overrides(tree, {"samples": str(job.samples)})
        if job.loop is not None:
            tree = presets.merge_overrides(tree, {"loop": job.loop})
        cfg = presets.compile_preset(tree)
    except presets.PresetError as exc:
        raise ConfigError(f"generator preset: {exc}") from None
    ranges = {**{k.value: v for k, v in DEFAULT_RANGES.items()}, **cfg.ranges}
    mappings = []
    for m in job.mappings:
        p = ParameterId(m["parameter"])
        if m["column"] not in table:
            raise DataError(f"column {m['column']!r} (mapped to {p.value!r}) not in data table; "
                            f"available: {', '.join(table)}")
        mappings.append(ParameterMapping(p, m["column"], _limits(m, p, ranges)))
    try:
        if job.source == "events":
            sources = build_event_set(table, mappings)
        else:
            if job.time_column not in table:
                raise DataError(f"time column {job.time_column!r} not in data table")
            spectrum = None
            if job.spectrum_column:
                if job.spectrum_column not in table:
                    raise DataError(f"spectrum column {job.spectrum_column!r} not in data table")
                spectrum = table[job.spectrum_column]
            sources = build_object_source(table, job.time_column, mappings, job.static, spectrum)
    except MappingError as exc:
        raise ConfigError(str(exc)) from None
    except (KeyError, ValueError) as exc:
        raise DataError(str(exc)) from None
    try:
        score = ScoreSpec.from_chords(job.chords, job.duration)
        bank = make_bank(job.system)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sample_bank = None
    if cfg.kind == "sampler":
        if not cfg.samples:
            raise ConfigError("sampler generator needs 'samples' (a directory of note WAVs)")
        sample_bank = load_sample_bank(cfg.samples, job.sample_rate, cfg.loop)
    plan = RenderPlan(sources, score, cfg, bank, job.sample_rate, job.seed, sample_bank,
                      job.event_hold)
    try:
        plan.check()
    except PlanError as exc:
        raise ConfigError(str(exc)) from None
    return plan


def _bin_counts(plan: RenderPlan) -> dict[str, int]:
    counts: dict[str, int] = {}
    first = plan.score.chord_sequence.chords[0]
    for s in plan.source_sets:
        if isinstance(s, EventSet):
            pitch = s.column("pitch")
            if pitch is None:
                pitch = np.full(s.count, plan.generator.pitch)
            idx = assign_notes(pitch, plan.score.chord_sequence.max_size)
            for k in range(plan.score.chord_sequence.max_size):
                name = first[k % len(first)].name
                counts[f"bin {k} ({name})"] = int(np.count_nonzero(idx == k))
    return counts


def _describe(job: JobConfig, plan: RenderPlan) -> list[str]:
    n_src = sum(s.count if hasattr(s, "count") else 1 for s in plan.source_sets)
    chords = [",".join(n.name for n in c) for c in plan.score.chord_sequence.chords]
    lines = [
        f"  sources:     {n_src} ({job.source})",
        f"  generator:   {plan.generator.kind} (preset {Path(job.preset).stem})",
        f"  chords:      {' | '.join(chords)}",
        f"  system:      {plan.bank.system} ({len(plan.bank)} channel"
        f"{'s' if len(plan.bank) > 1 else ''})",
        f"  duration:    {plan.score.duration:g} s ({plan.n_samples} samples at "
        f"{plan.sample_rate} Hz)",
        f"  seed:        {plan.master_seed}",
    ]
    for m in job.mappings:
        lines.append(f"  mapping:     {m['column']} -> {m['parameter']}")
    counts = _bin_counts(plan)
    if counts:
        lines.append("  notes per chord bin:")
        lines.extend(f"    {k}: {v}" for k, v in counts.items())
    return lines


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sonify", description="Render a data table to audio.")
    ap.add_argument("--config", required=True, help="job file (YAML)")
    ap.add_argument("--data", help="CSV data table (overrides the config)")
    ap.add_argument("--out", help="output WAV path (overrides the config)")
    ap.add_argument("--preset", help="generator preset name or YAML path")
    ap.add_argument("--system", help="audio system: mono, stereo, 5.1, 7.1, ambiX<n>")
    ap.add_argument("--duration", type=float, help="sonification length in seconds")
    ap.add_argument("--seed", type=int, help="master random seed")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for voices")
    ap.add_argument("--verbose", "-v", action="store_true")
    ap.add_argument("--dry-run", action="store_true", help="validate and print the plan only")
    return ap


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        job = load_job(args.config, args)
        table = load_table(job.data)
        plan = build_plan(job, table)
        if args.dry_run:
            print("sonify plan (dry run, nothing rendered)")
            print("\n".join(_describe(job, plan)))
            print(f"  output:      {job.output} ({job.encoding})")
            return EXIT_OK
        if job.output is None:
            raise ConfigError("no output path (config key 'output' or --out)")
        result = render(plan, threads=max(1, args.threads))
        write_wav(result.audio, job.output, job.encoding)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, WavError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print("sonify render report")
    print("\n".join(_describe(job, plan)))
    print(f"  clip_count:  {result.clip_count}")
    print(f"  output:      {job.output} ({job.encoding}, {result.audio.n_channels} ch, "
          f"{result.audio.duration:g} s)")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
