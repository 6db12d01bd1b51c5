# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled log-domain reduction kernels.

Same contracts as ``_fallback``: polar log-domain rows are rescaled by their
peak log magnitude and accumulated in ordinary complex arithmetic.  Terms
more than ~46 nats below the row peak cannot move the sum at double
precision and are skipped, which is what makes this worth compiling.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, exp, isfinite, log, sin, sqrt, M_PI

cnp.import_array()

BACKEND = "compiled"

cdef double SKIP_NATS = 46.0


def logc_sum_axis(logmag, phase):
    lm_in = np.ascontiguousarray(logmag, dtype=np.float64)
    ph_in = np.ascontiguousarray(phase, dtype=np.float64)
    shape = tuple(lm_in.shape)
    cdef Py_ssize_t ncol = shape[len(shape) - 1]
    lm2 = lm_in.reshape(-1, ncol) if lm_in.ndim > 1 else lm_in.reshape(1, -1)
    ph2 = ph_in.reshape(-1, ncol) if ph_in.ndim > 1 else ph_in.reshape(1, -1)

    cdef double[:, ::1] lm = lm2
    cdef double[:, ::1] ph = ph2
    cdef Py_ssize_t nrow = lm.shape[0], n = lm.shape[1]
    out_lm = np.empty(nrow)
    out_ph = np.empty(nrow)
    out_smag = np.empty(nrow)
    out_nfin = np.empty(nrow, dtype=np.int64)
    cdef double[::1] olm = out_lm
    cdef double[::1] oph = out_ph
    cdef double[::1] osm = out_smag
    cdef long long[::1] onf = out_nfin

    cdef Py_ssize_t r, i
    cdef double m, v, w, re, im, smag
    cdef long long nfin
    for r in range(nrow):
        m = -np.inf
        nfin = 0
        for i in range(n):
            v = lm[r, i]
            if isfinite(v):
                nfin += 1
                if v > m:
                    m = v
        if nfin == 0 or not isfinite(m):
            olm[r] = -np.inf
            oph[r] = 0.0
            osm[r] = 0.0
            onf[r] = nfin
            continue
        re = 0.0
        im = 0.0
        for i in range(n):
            v = lm[r, i] - m
            if v > -746.0:  # exp underflows to 0 below this anyway
                w = exp(v)
                re += w * cos(ph[r, i])
                im += w * sin(ph[r, i])
        smag = sqrt(re * re + im * im)
        if smag > 0.0:
            olm[r] = m + log(smag)
            oph[r] = atan2(im, re)
        else:
            olm[r] = -np.inf
            oph[r] = 0.0
        osm[r] = smag
        onf[r] = nfin

    if lm_in.ndim > 1:
        rshape = shape[:-1]
        return (out_lm.reshape(rshape), out_ph.reshape(rshape),
                out_smag.reshape(rshape), out_nfin.reshape(rshape))
    return out_lm[0], out_ph[0], out_smag[0], int(out_nfin[0])


def osc_reduce(logmag, phase, t, xi):
    lm_in = np.ascontiguousarray(logmag, dtype=np.float64)
    ph_in = np.ascontiguousarray(phase, dtype=np.float64)
    t_in = np.ascontiguousarray(t, dtype=np.float64)
    xi_in = np.ascontiguousarray(xi, dtype=np.float64)

    cdef double[:, ::1] lm = lm_in
    cdef double[:, ::1] ph = ph_in
    cdef double[::1] tv = t_in
    cdef double[::1] xv = xi_in
    cdef Py_ssize_t nrow = lm.shape[0], n = lm.shape[1], nk = xv.shape[0]

    # e^{-2*pi*i*t_i*xi_k} table, computed once per call
    osc = np.exp(-2j * np.pi * np.outer(t_in, xi_in))
    cdef double complex[:, ::1] E = np.ascontiguousarray(osc)

    out_lm = np.empty((nrow, nk))
    out_ph = np.empty((nrow, nk))
    cdef double[:, ::1] olm = out_lm
    cdef double[:, ::1] oph = out_ph

    acc = np.empty(nk, dtype=np.complex128)
    cdef double complex[::1] a = acc
    cdef Py_ssize_t r, i, k
    cdef double m, v, w, smag
    cdef double complex z
    for r in range(nrow):
        m = -np.inf
        for i in range(n):
            v = lm[r, i]
            if isfinite(v) and v > m:
                m = v
        if not isfinite(m):
            for k in range(nk):
                olm[r, k] = -np.inf
                oph[r, k] = 0.0
            continue
        for k in range(nk):
            a[k] = 0.0
        for i in range(n):
            v = lm[r, i] - m
            if v <= -SKIP_NATS:
                continue
            w = exp(v)
            z = w * (cos(ph[r, i]) + 1j * sin(ph[r, i]))
            for k in range(nk):
                a[k] = a[k] + z * E[i, k]
        for k in range(nk):
            smag = sqrt(a[k].real * a[k].real + a[k].imag * a[k].imag)
            if smag > 0.0:
                olm[r, k] = m + log(smag)
                oph[r, k] = atan2(a[k].imag, a[k].real)
            else:
                olm[r, k] = -np.inf
                oph[r, k] = 0.0
    return out_lm, out_ph
