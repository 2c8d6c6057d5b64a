"""Regenerate the synthetic demo tables and the bell sample bank.

    python demo/make_demo.py

Everything is derived from fixed seeds, so the committed files are
reproducible byte for byte.
"""
from pathlib import Path

import numpy as np

from sonify.score import parse_note
from sonify.wav import write_wav

HERE = Path(__file__).resolve().parent
SR = 44100


def bell(freq, seconds=0.8, sr=SR):
    t = np.arange(int(seconds * sr)) / sr
    partials = [(1.0, 1.0, 3.0), (2.76, 0.5, 5.0), (5.4, 0.25, 8.0), (8.9, 0.12, 12.0)]
    x = sum(a * np.exp(-d * t) * np.sin(2 * np.pi * freq * r * t) for r, a, d in partials)
    x *= np.minimum(1.0, t / 0.002)  # 2 ms fade-in
    return 0.8 * x / np.max(np.abs(x))


def write_csv(path, columns):
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.6g}" for v in row) + "\n")


def main():
    samples = HERE / "samples"
    samples.mkdir(exist_ok=True)
    for name in ("C3", "G3", "C4", "G4", "C5"):
        write_wav(samples / f"{name}.wav", bell(parse_note(name).frequency), SR, "pcm16")

    rng = np.random.default_rng(2022)
    n = 100
    # stars: apparent magnitude (brighter = smaller), colour index, sky position
    colour = rng.normal(0.6, 0.4, n)
    write_csv(HERE / "stars.csv", {
        "magnitude": rng.uniform(-1.0, 6.0, n),
        "colour": colour,
        "blueness": -colour,  # bluer stars get higher notes
        "azimuth_deg": rng.uniform(0.0, 360.0, n),
        "zenith_deg": np.degrees(np.arccos(rng.uniform(0.0, 1.0, n))),
    })

    # spectrum: a continuum with two emission lines, sampled over wavelength
    wl = np.linspace(3800.0, 9200.0, 400)
    flux = 1.0 + 0.3 * np.sin(wl / 900.0)
    for centre, height in ((4861.0, 2.5), (6563.0, 6.0)):
        flux += height * np.exp(-0.5 * ((wl - centre) / 25.0) ** 2)
    flux += rng.normal(0.0, 0.05, wl.size)
    write_csv(HERE / "spectrum.csv", {"wavelength": wl, "flux": np.maximum(flux, 0.0)})

    # galaxy history: lookback time, star formation rate, metallicity
    age = np.linspace(0.1, 13.5, 120)
    sfr = 8.0 * np.exp(-0.5 * ((age - 3.5) / 1.8) ** 2) + 0.5 + rng.normal(0.0, 0.2, age.size)
    metallicity = 0.02 * (1.0 - np.exp(-age / 4.0)) + rng.normal(0.0, 0.0005, age.size)
    write_csv(HERE / "galaxy.csv", {"age_gyr": age, "sfr": np.maximum(sfr, 0.0),
                                    "metallicity": metallicity})


if __name__ == "__main__":
    main()
