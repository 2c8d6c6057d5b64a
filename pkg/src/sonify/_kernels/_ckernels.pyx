# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics must match ``_pykernels`` bit for bit."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def onepole_lowpass(const double[::1] x, const double[::1] coeff):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double state
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    if n == 0:
        return out
    if coeff.shape[0] != n:
        raise ValueError("coefficient series length does not match buffer")
    state = x[0]
    with nogil:
        for i in range(n):
            state = state + coeff[i] * (x[i] - state)
            y[i] = state
    return out


def accumulate_phase(const double[::1] increments, double start):
    cdef Py_ssize_t n = increments.shape[0]
    cdef Py_ssize_t i
    cdef double acc = start
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] p = out
    with nogil:
        for i in range(n):
            p[i] = acc
            acc = acc + increments[i]
    return out


def mix_add(double[:, ::1] out, const double[:, ::1] gains, const double[::1] signal,
            Py_ssize_t offset):
    cdef Py_ssize_t nch = out.shape[0]
    cdef Py_ssize_t total = out.shape[1]
    cdef Py_ssize_t m = signal.shape[0]
    cdef Py_ssize_t c, i, stop
    cdef bint per_sample = gains.shape[1] != 1
    if gains.shape[0] != nch:
        raise ValueError("gain rows must match channel count")
    if per_sample and gains.shape[1] != m:
        raise ValueError("gain series length does not match signal")
    if offset < 0 or offset >= total:
        return
    stop = min(m, total - offset)
    with nogil:
        for c in range(nch):
            if per_sample:
                for i in range(stop):
                    out[c, offset + i] = out[c, offset + i] + gains[c, i] * signal[i]
            else:
                for i in range(stop):
                    out[c, offset + i] = out[c, offset + i] + gains[c, 0] * signal[i]
