import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sonify.generator import (
    EnvelopeSpec,
    GeneratorConfig,
    LfoSpec,
    OscillatorSpec,
    apply_lfo,
    apply_lowpass,
    cutoff_hz,
    envelope_value,
    osc_sample,
    synthesize,
    waveform,
)
from sonify.generator.synth import oscillator_mix

SR = 44100


def spectrum(x):
    """Hann-windowed magnitude spectrum normalised so a unit sine reads 1."""
    w = np.hanning(x.size)
    return np.abs(np.fft.rfft(x * w)) * 2 / w.sum()


def sine_cfg(**kw):
    return GeneratorConfig(oscillators=(OscillatorSpec("sine"),), **kw)


class TestOscillators:
    def test_waveform_values(self):
        c = np.array([0.0, 0.25, 0.5, 0.75])
        np.testing.assert_allclose(waveform("sine", c), [0, 1, 0, -1], atol=1e-15)
        np.testing.assert_allclose(waveform("saw", c), [-1, -0.5, 0, 0.5])
        np.testing.assert_allclose(waveform("tri", c), [1, 0, -1, 0])
        assert list(waveform("square", [0.0, 0.1, 0.6])) == [1.0, 1.0, -1.0]

    @pytest.mark.parametrize("form", ["saw", "square", "sine", "tri"])
    def test_range_and_period(self, form):
        c = np.linspace(0, 3, 3001) + 3e-4  # keep clear of the jumps
        y = waveform(form, c)
        assert np.all(np.abs(y) <= 1.0)
        np.testing.assert_allclose(waveform(form, c[:1000] + 1.0), y[:1000], atol=1e-12)

    def test_noise_needs_rng_and_is_uniform(self, rng):
        with pytest.raises(ValueError):
            waveform("noise", np.zeros(4))
        y = waveform("noise", np.zeros(100000), rng)
        assert np.all(np.abs(y) <= 1) and abs(y.mean()) < 0.01
        assert np.var(y) == pytest.approx(1 / 3, rel=0.02)

    def test_spec_validation_and_detune(self):
        with pytest.raises(ValueError):
            OscillatorSpec("pulse")
        with pytest.raises(ValueError):
            OscillatorSpec(level=1.5)
        with pytest.raises(ValueError):
            OscillatorSpec(phase="zero")
        assert OscillatorSpec(detune=-2).frequency(100.0) == pytest.approx(98.0)

    def test_osc_sample_matches_formula(self):
        spec = OscillatorSpec("sine", phase=0.3)
        for t in (0.0, 0.001, 0.37):
            want = math.sin(2 * math.pi * 440 * t + 0.3)
            assert osc_sample(spec, 440.0, t) == pytest.approx(want)

    def test_sine_rms(self):
        y = synthesize(sine_cfg(), 441.0, 1.0, SR)
        assert np.sqrt(np.mean(y ** 2)) == pytest.approx(1 / math.sqrt(2), rel=1e-9)

    def test_saw_harmonics_follow_one_over_n(self):
        cfg = GeneratorConfig(oscillators=(OscillatorSpec("saw"),))
        y = synthesize(cfg, 220.0, 1.0, SR)
        mag = spectrum(y)
        h1 = mag[220]
        assert h1 == pytest.approx(2 / math.pi, rel=0.05)
        for n in range(2, 11):
            assert mag[220 * n] / h1 == pytest.approx(1 / n, rel=0.05)

    def test_square_has_odd_harmonics_only(self):
        cfg = GeneratorConfig(oscillators=(OscillatorSpec("square"),))
        mag = spectrum(synthesize(cfg, 220.0, 1.0, SR))
        h1 = mag[220]
        assert h1 == pytest.approx(4 / math.pi, rel=0.05)
        for n in (3, 5, 7):
            assert mag[220 * n] / h1 == pytest.approx(1 / n, rel=0.05)
        for n in (2, 4, 6):
            assert mag[220 * n] / h1 < 0.01

    def test_level_normalisation(self):
        cfg = GeneratorConfig(oscillators=(OscillatorSpec("sine"), OscillatorSpec("sine")))
        y = oscillator_mix(cfg, 100.0, 1000, SR, np.random.default_rng(0))
        np.testing.assert_allclose(y, np.sin(2 * np.pi * 100 * np.arange(1000) / SR), atol=1e-12)
        zero = GeneratorConfig(oscillators=(OscillatorSpec(level=0.0),))
        with pytest.raises(ValueError):
            oscillator_mix(zero, 100.0, 10, SR, np.random.default_rng(0))

    def test_pitch_shift_array_matches_constant(self):
        cfg = sine_cfg()
        n = 4410
        a = oscillator_mix(cfg, 220.0, n, SR, np.random.default_rng(0), 7.0)
        b = oscillator_mix(cfg, 220.0, n, SR, np.random.default_rng(0), np.full(n, 7.0))
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_pitch_shift_octave(self):
        y = synthesize(sine_cfg(), 220.0, 1.0, SR, {"pitch_shift": 12.0})
        assert np.argmax(spectrum(y)) == 440


class TestEnvelope:
    def test_endpoints(self):
        env = EnvelopeSpec(A=0.1, D=0.2, S=0.6, R=0.3)
        assert envelope_value(env, 0.0) == 0.0
        assert envelope_value(env, 0.1) == 1.0
        assert envelope_value(env, env.A + env.D) == 0.6
        assert envelope_value(env, 5.0) == 0.6
        assert envelope_value(env, 0.5, note_length=0.5) == pytest.approx(0.6)
        assert envelope_value(env, 0.8, note_length=0.5) == 0.0
        assert envelope_value(env, 2.0, note_length=0.5) == 0.0

    def test_curvature_midpoint(self):
        # u**(1 + c) at u = 1/2 with c = 1 gives 1/4
        env = EnvelopeSpec(A=1.0, Ac=1.0)
        assert envelope_value(env, 0.5) == pytest.approx(0.25)
        assert envelope_value(EnvelopeSpec(A=1.0), 0.5) == pytest.approx(0.5)

    def test_early_release_starts_from_current_level(self):
        env = EnvelopeSpec(A=1.0, D=0.0, S=1.0, R=1.0)
        # released at half-attack (level 0.5), halfway through release -> 0.25
        assert envelope_value(env, 1.0, note_length=0.5) == pytest.approx(0.25)

    def test_zero_segments(self):
        assert envelope_value(EnvelopeSpec(), 0.0) == 1.0
        assert envelope_value(EnvelopeSpec(S=0.3), 0.0) == 0.3

    def test_validation(self):
        with pytest.raises(ValueError):
            EnvelopeSpec(A=-1)
        with pytest.raises(ValueError):
            EnvelopeSpec(S=1.2)
        with pytest.raises(ValueError):
            EnvelopeSpec(Ac=-1.0)

    @given(st.floats(0.001, 2), st.floats(0.001, 2), st.floats(0, 1), st.floats(0.001, 2),
           st.floats(0, 3), st.floats(0, 3), st.floats(0, 3))
    def test_bounded_and_monotone_segments(self, A, D, S, R, Ac, Dc, Rc):
        env = EnvelopeSpec(A, D, S, R, Ac, Dc, Rc)
        t = np.linspace(0, A + D + 0.5 + R + 0.1, 2000)
        y = envelope_value(env, t, note_length=A + D + 0.5)
        assert np.all((y >= 0) & (y <= 1))
        att = t < A
        assert np.all(np.diff(y[att]) >= 0)
        rel = t >= A + D + 0.5
        assert np.all(np.diff(y[rel]) <= 0)


class TestLfo:
    def test_volume_lfo_square_levels(self):
        lfo = LfoSpec(use=True, wave="square", amount=0.5, freq=10.0)
        y = apply_lfo(np.ones(SR), lfo, "volume", SR, np.random.default_rng(0))
        # high half-cycles pass at 1, low half-cycles drop to 1 - amount
        assert set(np.round(np.unique(y), 12)) == {0.5, 1.0}
        seg = y[: SR // 10]
        assert np.sqrt(np.mean(seg ** 2)) == pytest.approx(math.sqrt((1 + 0.25) / 2), rel=0.02)

    def test_volume_lfo_never_boosts(self, rng):
        lfo = LfoSpec(use=True, wave="sine", amount=1.0, freq=3.0, phase="random")
        y = apply_lfo(np.ones(SR), lfo, "volume", SR, rng)
        assert y.max() <= 1.0 + 1e-12 and y.min() >= -1e-12

    def test_pitch_lfo_returns_semitones(self):
        lfo = LfoSpec(use=True, wave="sine", amount=0.5, freq=5.0)
        semis = apply_lfo(np.zeros(SR), lfo, "pitch", SR, np.random.default_rng(0))
        assert semis.max() == pytest.approx(0.5, rel=1e-6)
        assert semis.min() == pytest.approx(-0.5, rel=1e-6)

    def test_inactive_lfo_is_identity(self, rng):
        x = rng.normal(size=100)
        np.testing.assert_array_equal(apply_lfo(x, LfoSpec(), "volume", SR, rng), x)

    def test_lfo_envelope_fades_in(self):
        lfo = LfoSpec(use=True, wave="square", amount=1.0, freq=2.0,
                      envelope=EnvelopeSpec(A=1.0))
        y = apply_lfo(np.ones(SR), lfo, "volume", SR, np.random.default_rng(0))
        assert y[0] == 1.0 and y[-1] < 0.02

    def test_freq_shift_doubles_rate(self):
        lfo = LfoSpec(use=True, wave="sine", amount=1.0, freq=5.0)
        a = apply_lfo(np.zeros(SR), lfo, "pitch", SR, np.random.default_rng(0), freq_shift=12.0)
        b = apply_lfo(np.zeros(SR), lfo, "pitch", SR, np.random.default_rng(0),
                      freq_shift=np.full(SR, 12.0))
        np.testing.assert_allclose(a, b, atol=1e-9)
        assert np.argmax(spectrum(a)) == 10

    def test_bad_target(self, rng):
        with pytest.raises(ValueError):
            apply_lfo(np.ones(4), LfoSpec(use=True, freq=1.0), "cutoff", SR, rng)


class TestFilter:
    def test_cutoff_map(self):
        assert cutoff_hz(0.0) == pytest.approx(50.0)
        assert cutoff_hz(1.0) == pytest.approx(16000.0)
        assert cutoff_hz(0.5) == pytest.approx(math.sqrt(50 * 16000))

    @pytest.mark.parametrize("c", [0.0, 0.1, 0.5, 0.9, 1.0])
    def test_dc_invariance(self, c):
        x = np.full(5000, 0.37)
        np.testing.assert_allclose(apply_lowpass(x, c, SR), x, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("c,f", [(0.2, 100.0), (0.5, 1000.0), (0.5, 5000.0), (0.8, 300.0)])
    def test_sine_gain_matches_transfer_function(self, c, f):
        n = SR
        x = np.sin(2 * np.pi * f * np.arange(n) / SR)
        y = apply_lowpass(x, c, SR)
        a = -math.expm1(-2 * math.pi * cutoff_hz(c) / SR)
        z = np.exp(-1j * 2 * np.pi * f / SR)
        h = abs(a / (1 - (1 - a) * z))
        tail = y[n // 2:]
        assert np.sqrt(2 * np.mean(tail ** 2)) == pytest.approx(h, rel=2e-3)

    def test_noise_reduction_at_minimum_cutoff(self, rng):
        x = rng.uniform(-1, 1, 4 * SR)
        y = apply_lowpass(x, 0.0, SR)
        f = np.fft.rfftfreq(x.size, 1 / SR)
        band = f > 1000
        px = np.sum(np.abs(np.fft.rfft(x))[band] ** 2)
        py = np.sum(np.abs(np.fft.rfft(y))[band] ** 2)
        assert 10 * np.log10(px / py) > 20

    def test_time_varying_cutoff(self, rng):
        x = rng.uniform(-1, 1, SR)
        c = np.linspace(0, 1, SR)
        y = apply_lowpass(x, c, SR)
        assert np.std(np.diff(y[: SR // 10])) < np.std(np.diff(y[-SR // 10:]))
        with pytest.raises(ValueError):
            apply_lowpass(x, c[:-1], SR)


def test_synthesize_signal_chain():
    cfg = sine_cfg(envelope=EnvelopeSpec(A=0.1, S=1.0, R=0.1), volume=0.5)
    y = synthesize(cfg, 441.0, 0.5, SR, note_length=0.3)
    assert y[0] == 0.0
    assert np.max(np.abs(y)) == pytest.approx(0.5, rel=1e-3)
    assert np.all(y[int(0.4 * SR) + 1:] == 0.0)
    z = synthesize(cfg, 441.0, 0.5, SR, {"volume": 0.5}, note_length=0.3)
    np.testing.assert_allclose(z, y * 0.5)


def test_generator_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(kind="granular")
    with pytest.raises(ValueError):
        GeneratorConfig(oscillators=())
    with pytest.raises(ValueError):
        GeneratorConfig(freq_range=(100.0, 50.0))
    with pytest.raises(ValueError):
        GeneratorConfig(kind="spectraliser", freq_range=(100.0, 30000.0)).check_sample_rate(44100)
