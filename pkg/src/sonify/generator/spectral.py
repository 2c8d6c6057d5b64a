from __future__ import annotations

import numpy as np

PEAK = 0.9


def spectralise(spectrum, f_min: float, f_max: float, duration: float, sample_rate: float,
                seed=None) -> np.ndarray:
    """Audio whose magnitude spectrum follows ``spectrum`` between ``f_min``
    and ``f_max``, with uniformly random phases; peak-normalised to 0.9.

    ``spectrum`` values are taken as evenly spaced over ``[f_min, f_max]`` and
    linearly interpolated onto the FFT bins of the output; bins outside the
    band are zero. ``seed`` is an int, a ``SeedSequence`` or a ``Generator``.
    """
    spec = np.asarray(spectrum, dtype=np.float64)
    if spec.ndim != 1 or spec.size < 2:
        raise ValueError("spectrum needs at least two values")
    if np.any(spec < 0) or not np.all(np.isfinite(spec)):
        raise ValueError("spectrum must be finite and non-negative")
    if not np.any(spec > 0):
        raise ValueError("spectrum is all zero")
    if not 0 < f_min < f_max < sample_rate / 2:
        raise ValueError(f"need 0 < f_min < f_max < {sample_rate / 2} Hz, got {f_min}, {f_max}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = max(2, int(round(duration * sample_rate)))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    band = (freqs >= f_min) & (freqs <= f_max)
    if not np.any(band):
        raise ValueError("frequency range contains no FFT bins at this duration")
    mag = np.interp(freqs[band], np.linspace(f_min, f_max, spec.size), spec)
    phases = rng.uniform(0.0, 2 * np.pi, size=mag.size)
    half = np.zeros(freqs.size, dtype=np.complex128)
    half[band] = mag * np.exp(1j * phases)
    out = np.fft.irfft(half, n=n)
    peak = np.max(np.abs(out))
    if peak == 0:
        raise ValueError("spectrum has no energy inside the frequency range")
    return out * (PEAK / peak)
