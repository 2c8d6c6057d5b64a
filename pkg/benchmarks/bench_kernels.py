"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Times each kernel on both backends (checking they agree bit for bit), then
renders the stars demo end to end under each backend in a subprocess.
"""
import argparse
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from sonify._kernels import _pykernels

try:
    from sonify._kernels import _ckernels
except ImportError:
    _ckernels = None

ROOT = Path(__file__).resolve().parents[1]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def kernel_cases(rng):
    n = 44100 * 5
    x = rng.normal(size=n)
    coeff = rng.uniform(0.01, 0.5, n)
    inc = rng.uniform(0.001, 0.02, n)
    sig = rng.normal(size=n)
    gains = rng.normal(size=(16, n))

    def mix(mod):
        out = np.zeros((16, n))
        mod.mix_add(out, gains, sig, 0)
        return out

    return {
        "onepole_lowpass (5 s)": lambda m: m.onepole_lowpass(x, coeff),
        "accumulate_phase (5 s)": lambda m: m.accumulate_phase(inc, 0.0),
        "mix_add 16 ch (5 s)": mix,
    }


def render_time(pure, repeat):
    env = dict(os.environ)
    env.pop("SONIFY_PURE_PYTHON", None)
    if pure:
        env["SONIFY_PURE_PYTHON"] = "1"
    best = float("inf")
    with tempfile.TemporaryDirectory() as tmp:
        for _ in range(repeat):
            t0 = time.perf_counter()
            subprocess.run([sys.executable, "-m", "sonify.cli", "--config",
                            str(ROOT / "demo" / "galaxy.yaml"), "--out", str(Path(tmp, "g.wav"))],
                           env=env, check=True, capture_output=True)
            best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'cython':>12}{'python':>12}{'speedup':>10}")
    for name, case in kernel_cases(rng).items():
        tc, yc = best_of(lambda: case(_ckernels), args.repeat)
        tp, yp = best_of(lambda: case(_pykernels), args.repeat)
        same = "" if yc.tobytes() == yp.tobytes() else "  (outputs differ!)"
        print(f"{name:<26}{tc * 1e3:>10.2f}ms{tp * 1e3:>10.2f}ms{tp / tc:>9.1f}x{same}")
    n = max(1, args.repeat // 2)
    tc, tp = render_time(False, n), render_time(True, n)
    print(f"{'render galaxy demo':<26}{tc:>11.2f}s{tp:>11.2f}s{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
