"""Pure-Python/numpy versions of the compiled kernels.

Each function performs the same floating-point operations in the same order
as its counterpart in ``_ckernels.pyx``, so both backends give identical bits.
"""
import numpy as np


def onepole_lowpass(x, coeff):
    x = np.ascontiguousarray(x, dtype=np.float64)
    coeff = np.ascontiguousarray(coeff, dtype=np.float64)
    n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    if coeff.shape[0] != n:
        raise ValueError("coefficient series length does not match buffer")
    xs = x.tolist()
    cs = coeff.tolist()
    ys = [0.0] * n
    state = xs[0]
    for i in range(n):
        state = state + cs[i] * (xs[i] - state)
        ys[i] = state
    out[:] = ys
    return out


def accumulate_phase(increments, start):
    increments = np.ascontiguousarray(increments, dtype=np.float64)
    out = np.empty(increments.shape[0], dtype=np.float64)
    if out.size == 0:
        return out
    out[0] = start
    # add.accumulate is a strictly sequential left-to-right sum
    np.add.accumulate(np.concatenate(([float(start)], increments[:-1])), out=out)
    return out


def mix_add(out, gains, signal, offset):
    nch, total = out.shape
    m = signal.shape[0]
    if gains.shape[0] != nch:
        raise ValueError("gain rows must match channel count")
    per_sample = gains.shape[1] != 1
    if per_sample and gains.shape[1] != m:
        raise ValueError("gain series length does not match signal")
    if offset < 0 or offset >= total:
        return
    stop = min(m, total - offset)
    if per_sample:
        out[:, offset:offset + stop] += gains[:, :stop] * signal[:stop]
    else:
        out[:, offset:offset + stop] += gains * signal[:stop]
