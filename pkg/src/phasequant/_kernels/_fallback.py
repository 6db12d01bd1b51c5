"""Pure-numpy implementations of the hot reduction kernels.

Both kernels consume polar log-domain data: an array of log magnitudes
(``-inf`` means exact zero) and an array of phases in radians.  They are the
only place where extreme-range values are rescaled into ordinary complex
arithmetic, so everything above them stays exact in log space.

The compiled twin in ``_core.pyx`` implements the same contracts; the
package selects whichever is importable (see ``__init__``).
"""

import numpy as np

BACKEND = "python"

# Fixed block size keeps temporaries bounded and the summation order
# reproducible independent of available memory.
_ROW_BLOCK = 256


def logc_sum_axis(logmag, phase):
    """Stable complex log-sum-exp along the last axis.

    Returns ``(lm, ph, smag, nfin)`` where ``lm + i*ph`` is the log of
    ``sum(exp(logmag + i*phase))``, ``smag`` is the magnitude of the
    max-rescaled sum (every rescaled term has magnitude <= 1) and ``nfin``
    counts the finite terms; callers derive cancellation flags from the pair.
    """
    lm = np.asarray(logmag, dtype=np.float64)
    ph = np.asarray(phase, dtype=np.float64)
    m = np.max(lm, axis=-1, keepdims=True)
    finite = np.isfinite(m)
    shift = np.where(finite, m, 0.0)
    z = np.exp(lm - shift) * np.exp(1j * ph)
    s = np.sum(z, axis=-1)
    smag = np.abs(s)
    shift = shift[..., 0]
    finite = finite[..., 0]
    with np.errstate(divide="ignore"):
        out_lm = np.where(finite & (smag > 0.0), shift + np.log(smag), -np.inf)
    out_ph = np.where(np.isfinite(out_lm), np.angle(s), 0.0)
    nfin = np.count_nonzero(np.isfinite(lm), axis=-1)
    smag = np.where(finite, smag, 0.0)
    if lm.ndim == 1:
        return float(out_lm), float(out_ph), float(smag), int(nfin)
    return out_lm, out_ph, smag, nfin


def osc_reduce(logmag, phase, t, xi):
    """Oscillatory row reduction shared by the STFT and Wigner transforms.

    For rows ``r`` and output frequencies ``xi[k]`` computes

        out[r, k] = log sum_i exp(logmag[r, i] + i*(phase[r, i] - 2*pi*t[i]*xi[k]))

    returning the pair ``(lm, ph)``.  Each row is rescaled by its own peak
    log magnitude, so rows of wildly different scale keep full relative
    accuracy; within a row the reduction is an ordinary complex matmul.
    """
    lm = np.ascontiguousarray(logmag, dtype=np.float64)
    ph = np.ascontiguousarray(phase, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    nrow, n = lm.shape
    nk = xi.shape[0]
    osc = np.exp(-2j * np.pi * np.outer(t, xi))
    out_lm = np.empty((nrow, nk))
    out_ph = np.empty((nrow, nk))
    for lo in range(0, nrow, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, nrow)
        blk_lm = lm[lo:hi]
        m = np.max(blk_lm, axis=1)
        finite = np.isfinite(m)
        shift = np.where(finite, m, 0.0)
        z = np.exp(blk_lm - shift[:, None]) * np.exp(1j * ph[lo:hi])
        s = z @ osc
        smag = np.abs(s)
        with np.errstate(divide="ignore"):
            out_lm[lo:hi] = np.where(
                finite[:, None] & (smag > 0.0), shift[:, None] + np.log(smag), -np.inf
            )
        out_ph[lo:hi] = np.where(np.isfinite(out_lm[lo:hi]), np.angle(s), 0.0)
    return out_lm, out_ph
