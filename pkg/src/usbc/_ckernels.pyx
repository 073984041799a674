# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled batched synthesize-match-detect kernel."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def energy_statistics(
    const double[:, ::1] book,
    const double[::1] code,
    const cnp.intp_t[::1] tx,
    const double[:, ::1] tag_wave,
    const double[::1] beta2,
    const double[::1] pulse,
    const double[:, :, ::1] noise,
    double sigma,
):
    cdef Py_ssize_t n_trials = noise.shape[0]
    cdef Py_ssize_t n_f = noise.shape[1]
    cdef Py_ssize_t n_s = noise.shape[2]
    cdef Py_ssize_t n_bc = book.shape[0]
    cdef Py_ssize_t b, j, i, m, k
    cdef double dj, chip, interf, r, acc

    out = np.zeros((n_trials, n_bc), dtype=np.float64)
    acc_buf = np.empty((n_s, n_bc), dtype=np.float64)
    w_buf = np.empty(n_bc, dtype=np.float64)
    cdef double[:, ::1] J = out
    cdef double[:, ::1] y = acc_buf
    cdef double[::1] w = w_buf

    with nogil:
        for b in range(n_trials):
            y[:, :] = 0.0
            k = tx[b]
            for j in range(n_f):
                dj = code[j]
                chip = book[k, j] * dj
                interf = beta2[b] * dj
                for m in range(n_bc):
                    w[m] = book[m, j] * dj
                for i in range(n_s):
                    r = chip * tag_wave[b, i] + interf * pulse[i] + sigma * noise[b, j, i]
                    for m in range(n_bc):
                        y[i, m] += w[m] * r
            for m in range(n_bc):
                acc = 0.0
                for i in range(n_s):
                    acc += y[i, m] * y[i, m]
                J[b, m] = acc
    return out
