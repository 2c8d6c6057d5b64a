import math

import numpy as np
import pytest

from sonify.channels import make_bank
from sonify.generator import EnvelopeSpec, GeneratorConfig, OscillatorSpec, load_sample_bank
from sonify.score import ScoreSpec, parse_note
from sonify.sonification import (
    PlanError,
    RenderPlan,
    read_wav,
    render,
    soft_clip,
    source_rng,
    write_wav,
)
from sonify.sources import MapLimits, build_event_set, build_object_source

SR = 44100
SINE = GeneratorConfig(oscillators=(OscillatorSpec("sine"),))


def events(**cols_and_params):
    cols, maps = {}, []
    for param, values in cols_and_params.items():
        cols[param] = values
        maps.append((param, param, MapLimits("data_units", 0, 1)))
    return build_event_set(cols, maps)


def plan(sources, gen=SINE, chords="A4", duration=1.0, system="mono", **kw):
    return RenderPlan(sources, ScoreSpec.from_chords(chords, duration), gen, make_bank(system),
                      **kw)


def test_single_event_is_a_sine_at_the_note():
    res = render(plan(events(time=[0.0]), duration=1.0))
    y = res.audio.channels[0]
    assert res.audio.n_samples == SR
    hold = y[: int(0.5 * SR)]
    assert np.sqrt(np.mean(hold ** 2)) == pytest.approx(1 / math.sqrt(2), rel=1e-3)
    mag = np.abs(np.fft.rfft(hold * np.hanning(hold.size)))
    assert np.fft.rfftfreq(hold.size, 1 / SR)[np.argmax(mag)] == pytest.approx(440.0, abs=2)
    assert np.all(y[int(0.5 * SR):] == 0.0)
    assert res.notes_per_bin() == {"A4": 1}


def test_zero_volume_event_is_silent():
    res = render(plan(events(time=[0.2], volume=[0.0])))
    assert not np.any(res.audio.channels)


def test_event_timing_and_truncation():
    res = render(plan(events(time=[0.0, 0.9]), duration=1.0))
    y = res.audio.channels[0]
    start = int(round(0.9 * SR))
    assert y[start] == 0.0 and np.any(y[start + 1: start + 100] != 0)
    assert res.audio.n_samples == SR


def test_chord_binning_in_render():
    ev = events(time=np.linspace(0, 0.5, 10), pitch=np.linspace(0, 1, 10))
    res = render(plan(ev, chords="C4,E4,G4,B4,D5", duration=2.0))
    assert res.notes_per_bin() == {n: 2 for n in ("C4", "E4", "G4", "B4", "D5")}
    # higher pitch values get higher notes
    order = [parse_note(r.note).midi for r in sorted(res.notes, key=lambda r: r.start)]
    assert order == sorted(order)


def test_stars_style_plan_has_sixteen_channels(demo_dir):
    rng = np.random.default_rng(3)
    ev = build_event_set(
        {"t": rng.uniform(size=20), "c": rng.uniform(size=20), "az": rng.uniform(0, 6, 20)},
        [("time", "t", MapLimits()), ("pitch", "c", MapLimits()),
         ("azimuth", "az", MapLimits("data_units", 0, 6.2))])
    bank = load_sample_bank(demo_dir / "samples", SR)
    gen = GeneratorConfig(kind="sampler", envelope=EnvelopeSpec(D=0.2, S=0.5, R=0.2))
    res = render(plan(ev, gen, chords="Db3,Gb3,Ab3,Eb4,F4", duration=3.0, system="ambiX3",
                      sample_bank=bank))
    assert res.audio.n_channels == 16 and res.audio.n_samples == 3 * SR
    assert set(res.notes_per_bin()) == {"Db3", "Gb3", "Ab3", "Eb4", "F4"}
    # W channel carries the plain sum; first-order channels are bounded by it in energy
    w = res.audio.channels[0]
    assert np.sum(w ** 2) > 0
    for k in (1, 2, 3):
        assert np.sum(res.audio.channels[k] ** 2) <= np.sum(w ** 2) * (1 + 1e-9)


def test_thread_count_does_not_change_output():
    rng = np.random.default_rng(9)
    ev = build_event_set({"t": rng.uniform(size=30), "p": rng.uniform(size=30),
                          "a": rng.uniform(size=30)},
                         [("time", "t", MapLimits()), ("pitch", "p", MapLimits()),
                          ("azimuth", "a", MapLimits())])
    gen = GeneratorConfig(oscillators=(OscillatorSpec("saw", phase="random"),
                                       OscillatorSpec("noise", 0.2)))
    p = plan(ev, gen, chords="C3,E3,G3", duration=2.0, system="5.1", master_seed=4)
    a = render(p, threads=1).audio.channels
    b = render(p, threads=4).audio.channels
    assert a.tobytes() == b.tobytes()
    c = render(plan(ev, gen, chords="C3,E3,G3", duration=2.0, system="5.1", master_seed=5))
    assert not np.array_equal(a, c.audio.channels)


def test_sources_superpose():
    # deterministic voices: the mix of five object sources equals the sum of solo renders
    srcs = []
    for k in range(5):
        t = np.linspace(0, 1, 20)
        srcs.append(build_object_source({"t": t, "v": np.sin(t * (k + 1))}, "t",
                                        [("volume", "v", MapLimits(param_lo=0.0, param_hi=0.15)),
                                         ("azimuth", "v", MapLimits("data_units", -1, 1, 0, 6))]))
    together = render(plan(srcs, duration=0.5, system="stereo"))
    solo = sum(render(plan(s, duration=0.5, system="stereo")).audio.channels for s in srcs)
    assert together.clip_count == 0
    np.testing.assert_allclose(together.audio.channels, solo, atol=1e-12)


def test_object_chord_sequence_changes_pitch():
    src = build_object_source({"t": [0.0, 1.0]}, "t")
    res = render(plan(src, chords=["A3", "A4"], duration=1.0))
    y = res.audio.channels[0]

    def peak(seg):
        mag = np.abs(np.fft.rfft(seg * np.hanning(seg.size)))
        return np.fft.rfftfreq(seg.size, 1 / SR)[np.argmax(mag)]
    assert peak(y[1000:21000]) == pytest.approx(220, abs=3)
    assert peak(y[23000:43000]) == pytest.approx(440, abs=3)


def test_object_multi_note_chord_is_normalised():
    src = build_object_source({"t": [0.0, 1.0]}, "t")
    res = render(plan(src, chords="A3,E4,A4", duration=0.5))
    assert len(res.notes) == 3
    assert np.max(np.abs(res.audio.channels)) <= 1.0


def test_spectraliser_object():
    spec = np.random.default_rng(0).uniform(size=64)
    src = build_object_source({"t": [0.0, 1.0]}, "t", spectrum=spec)
    gen = GeneratorConfig(kind="spectraliser", freq_range=(200.0, 4000.0))
    res = render(plan(src, gen, duration=0.5))
    assert np.max(np.abs(res.audio.channels)) == pytest.approx(0.9)


def test_plan_checks():
    ev = events(time=[0.0])
    with pytest.raises(PlanError):
        render(plan(ev, sample_rate=22050))
    with pytest.raises(PlanError):
        render(plan(ev, master_seed=-1))
    with pytest.raises(PlanError):
        render(plan(ev, GeneratorConfig(kind="sampler")))
    with pytest.raises(PlanError):
        render(plan(ev, GeneratorConfig(kind="spectraliser")))
    with pytest.raises(PlanError):
        render(plan([], ))
    with pytest.raises(PlanError):
        render(plan(ev, GeneratorConfig(oscillators=(OscillatorSpec(level=0.0),))))


@pytest.mark.parametrize("rate", [44100, 48000, 96000])
def test_duration_sets_sample_count(rate):
    res = render(plan(events(time=[0.0]), duration=0.25, sample_rate=rate))
    assert res.audio.n_samples == round(0.25 * rate) and res.audio.sample_rate == rate


def test_soft_clip():
    x = np.array([0.5, -0.99, 1.0, 1.5, -3.0, 0.995])
    y, count = soft_clip(x)
    assert count == 2
    assert y[0] == 0.5 and y[1] == -0.99
    assert np.all(np.abs(y) <= 1.0)
    assert np.all(np.diff(soft_clip(np.linspace(0, 5, 1000))[0]) >= 0)


def test_source_rng_streams_independent():
    a = source_rng(1, 0).uniform(size=4)
    assert np.array_equal(a, source_rng(1, 0).uniform(size=4))
    assert not np.array_equal(a, source_rng(1, 1).uniform(size=4))
    assert not np.array_equal(a, source_rng(2, 0).uniform(size=4))


def test_write_and_read_result(tmp_path):
    res = render(plan(events(time=[0.0]), duration=0.2, system="7.1"))
    path = write_wav(res.audio, tmp_path / "out.wav", "float32")
    back = read_wav(path)
    assert back.n_channels == 8
    np.testing.assert_array_equal(back.channels, res.audio.channels.astype(np.float32))
