# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched log-probability kernels.

Mirrors ``tumatch._core_py`` in signatures and semantics; that module is
the reference implementation, this one exists for speed in the solver's
inner loop. Inputs are C-contiguous float64 (and int64) arrays prepared by
the wrappers in ``tumatch.kernels``; every reduction is a max-shifted
log-sum-exp, so large payoff magnitudes do not overflow.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, log

cnp.import_array()


def logit_logprobs(double[:, ::1] payoffs):
    """Multinomial logit log-probabilities, outside option in column 0."""
    cdef Py_ssize_t rows = payoffs.shape[0]
    cdef Py_ssize_t cols = payoffs.shape[1]
    res = np.empty((rows, cols + 1))
    cdef double[:, ::1] out = res
    cdef Py_ssize_t r, j
    cdef double peak, total, norm
    for r in range(rows):
        peak = 0.0
        for j in range(cols):
            if payoffs[r, j] > peak:
                peak = payoffs[r, j]
        total = exp(-peak)
        for j in range(cols):
            total += exp(payoffs[r, j] - peak)
        norm = peak + log(total)
        out[r, 0] = -norm
        for j in range(cols):
            out[r, j + 1] = payoffs[r, j] - norm
    return res


cdef void _inclusive_values(double[:, ::1] payoffs, Py_ssize_t r,
                            cnp.int64_t[::1] nest_index, double[::1] lam,
                            double[:, ::1] tmp) noexcept:
    # tmp rows: 0 = per-nest running max, 1 = shifted sum, 2 = inclusive value.
    cdef Py_ssize_t cols = payoffs.shape[1]
    cdef Py_ssize_t nests = lam.shape[0]
    cdef Py_ssize_t j, k
    cdef double u
    for k in range(nests):
        tmp[0, k] = -INFINITY
        tmp[1, k] = 0.0
    for j in range(cols):
        k = nest_index[j]
        u = payoffs[r, j] / lam[k]
        if u > tmp[0, k]:
            tmp[0, k] = u
    for j in range(cols):
        k = nest_index[j]
        tmp[1, k] += exp(payoffs[r, j] / lam[k] - tmp[0, k])
    for k in range(nests):
        tmp[2, k] = tmp[0, k] + log(tmp[1, k])


def nested_logprobs(double[:, ::1] payoffs, cnp.int64_t[::1] nest_index, double[::1] lam):
    """Nested logit log-probabilities, outside option in column 0."""
    cdef Py_ssize_t rows = payoffs.shape[0]
    cdef Py_ssize_t cols = payoffs.shape[1]
    cdef Py_ssize_t nests = lam.shape[0]
    res = np.empty((rows, cols + 1))
    cdef double[:, ::1] out = res
    scratch = np.empty((3, nests))
    cdef double[:, ::1] tmp = scratch
    cdef Py_ssize_t r, j, k
    cdef double peak, total, norm
    for r in range(rows):
        _inclusive_values(payoffs, r, nest_index, lam, tmp)
        peak = 0.0
        for k in range(nests):
            if lam[k] * tmp[2, k] > peak:
                peak = lam[k] * tmp[2, k]
        total = exp(-peak)
        for k in range(nests):
            total += exp(lam[k] * tmp[2, k] - peak)
        norm = peak + log(total)
        out[r, 0] = -norm
        for j in range(cols):
            k = nest_index[j]
            out[r, j + 1] = payoffs[r, j] / lam[k] + (lam[k] - 1.0) * tmp[2, k] - norm
    return res


def nested_cond_logprobs(double[:, ::1] payoffs, cnp.int64_t[::1] nest_index, double[::1] lam):
    """Log-probabilities of each inside alternative conditional on its nest."""
    cdef Py_ssize_t rows = payoffs.shape[0]
    cdef Py_ssize_t cols = payoffs.shape[1]
    cdef Py_ssize_t nests = lam.shape[0]
    res = np.empty((rows, cols))
    cdef double[:, ::1] out = res
    scratch = np.empty((3, nests))
    cdef double[:, ::1] tmp = scratch
    cdef Py_ssize_t r, j, k
    for r in range(rows):
        _inclusive_values(payoffs, r, nest_index, lam, tmp)
        for j in range(cols):
            k = nest_index[j]
            out[r, j] = payoffs[r, j] / lam[k] - tmp[2, k]
    return res


def gnl_logprobs(double[:, ::1] payoffs, double[:, ::1] log_weights, double[::1] lam):
    """Generalized nested logit log-probabilities, outside option in column 0.

    ``log_weights[j, k]`` is the log membership of inside alternative j in
    nest k, -inf marking zero membership; those terms are skipped so no
    0 * inf ever forms.
    """
    cdef Py_ssize_t rows = payoffs.shape[0]
    cdef Py_ssize_t cols = payoffs.shape[1]
    cdef Py_ssize_t nests = lam.shape[0]
    res = np.empty((rows, cols + 1))
    cdef double[:, ::1] out = res
    scratch = np.empty((3, nests))
    cdef double[:, ::1] tmp = scratch
    cdef Py_ssize_t r, j, k
    cdef double a, peak, total, norm, best, inner
    for r in range(rows):
        for k in range(nests):
            tmp[0, k] = -INFINITY
            tmp[1, k] = 0.0
        for j in range(cols):
            for k in range(nests):
                if log_weights[j, k] > -INFINITY:
                    a = log_weights[j, k] + payoffs[r, j] / lam[k]
                    if a > tmp[0, k]:
                        tmp[0, k] = a
        for j in range(cols):
            for k in range(nests):
                if log_weights[j, k] > -INFINITY:
                    tmp[1, k] += exp(log_weights[j, k] + payoffs[r, j] / lam[k] - tmp[0, k])
        for k in range(nests):
            if tmp[0, k] > -INFINITY:
                tmp[2, k] = tmp[0, k] + log(tmp[1, k])
            else:
                # Nest with no member weight contributes nothing.
                tmp[2, k] = -INFINITY
        peak = 0.0
        for k in range(nests):
            if tmp[2, k] > -INFINITY and lam[k] * tmp[2, k] > peak:
                peak = lam[k] * tmp[2, k]
        total = exp(-peak)
        for k in range(nests):
            if tmp[2, k] > -INFINITY:
                total += exp(lam[k] * tmp[2, k] - peak)
        norm = peak + log(total)
        out[r, 0] = -norm
        for j in range(cols):
            best = -INFINITY
            for k in range(nests):
                if log_weights[j, k] > -INFINITY:
                    a = log_weights[j, k] + payoffs[r, j] / lam[k] + (lam[k] - 1.0) * tmp[2, k]
                    if a > best:
                        best = a
            inner = 0.0
            for k in range(nests):
                if log_weights[j, k] > -INFINITY:
                    inner += exp(log_weights[j, k] + payoffs[r, j] / lam[k]
                                 + (lam[k] - 1.0) * tmp[2, k] - best)
            out[r, j + 1] = best + log(inner) - norm
    return res
