"""Log-domain complex arithmetic, grids, quadrature and differentiation.

Everything downstream (transforms, symbols, quantisation) manipulates values
whose magnitudes reach exp(exp(.)); they are representable only as
(log magnitude, phase) pairs.  This module owns that representation:

* ``LogComplex`` - a scalar in polar log form, exact under multiplication;
* ``SampledFunction`` - log-form samples on a uniform 1-D or phase-space grid;
* ``quad`` - trapezoidal quadrature performed entirely in log space;
* ``finite_diff`` - Richardson-extrapolated central differences for the
  derivative-bound checks.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    CancellationWarning,
    GridCompatibilityError,
    InvalidParameterError,
    OverflowRefusalError,
    StepCollapseError,
    TruncationWarning,
)

NEG_INF = float("-inf")

# Boundary sample above this fraction of the peak triggers TruncationWarning.
QUAD_TAIL_LOG_TOL = math.log(1e-14)
# Rescaled-sum magnitude below 1e-13 * (term count) flags cancellation.
CANCEL_REL = 1e-13
# to_linear refuses beyond this log magnitude (double overflow guard).
LINEAR_MAX_LOG = 700.0


def wrap_phase(phi):
    """Wrap radians into (-pi, pi]."""
    w = np.asarray(phi, dtype=np.float64)
    w = w - 2.0 * np.pi * np.round(w / (2.0 * np.pi))
    w = np.where(w <= -np.pi, w + 2.0 * np.pi, w)
    if np.ndim(phi) == 0:
        return float(w)
    return w


@dataclass(frozen=True)
class LogComplex:
    """Complex scalar stored as (log magnitude, phase).

    ``logmag = -inf`` encodes exact zero, in which case the phase is
    canonically 0.  Multiplication adds both components exactly; addition
    goes through :func:`logc_sum`.
    """

    logmag: float
    phase: float = 0.0

    def __post_init__(self):
        lm = float(self.logmag)
        ph = float(self.phase)
        if math.isnan(lm) or lm == math.inf:
            raise InvalidParameterError(f"invalid log magnitude {lm!r}")
        if lm == NEG_INF:
            ph = 0.0
        else:
            ph = wrap_phase(ph)
        object.__setattr__(self, "logmag", lm)
        object.__setattr__(self, "phase", ph)

    @classmethod
    def from_complex(cls, z) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls(NEG_INF, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(NEG_INF, 0.0)

    @classmethod
    def one(cls) -> "LogComplex":
        return cls(0.0, 0.0)

    def is_zero(self) -> bool:
        return self.logmag == NEG_INF

    def to_complex(self) -> complex:
        if self.is_zero():
            return 0j
        if self.logmag > LINEAR_MAX_LOG:
            raise OverflowRefusalError(
                f"log magnitude {self.logmag:.3g} exceeds linear range"
            )
        return math.exp(self.logmag) * complex(
            math.cos(self.phase), math.sin(self.phase)
        )

    def conj(self) -> "LogComplex":
        return LogComplex(self.logmag, -self.phase)

    def __mul__(self, other) -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if self.is_zero() or other.is_zero():
            return LogComplex.zero()
        return LogComplex(self.logmag + other.logmag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if other.is_zero():
            raise ZeroDivisionError("division by exact log-domain zero")
        if self.is_zero():
            return LogComplex.zero()
        return LogComplex(self.logmag - other.logmag, self.phase - other.phase)

    def __abs__(self) -> float:
        return math.exp(self.logmag) if self.logmag <= LINEAR_MAX_LOG else math.inf


def logc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    return a * b


def logc_sum(terms) -> LogComplex:
    """Sum a finite sequence of LogComplex values.

    The maximal log magnitude is factored out and the rescaled residuals are
    summed in ordinary complex arithmetic.  Emits CancellationWarning when
    the rescaled sum magnitude drops below 1e-13 times the term count.
    """
    terms = list(terms)
    if not terms:
        return LogComplex.zero()
    lm = np.array([t.logmag for t in terms])
    ph = np.array([t.phase for t in terms])
    out_lm, out_ph, smag, nfin = _kernels.logc_sum_axis(lm, ph)
    if nfin > 0 and smag < CANCEL_REL * nfin:
        warnings.warn(
            CancellationWarning(
                f"rescaled sum magnitude {smag:.3e} below {CANCEL_REL:g} * {nfin}"
            ),
            stacklevel=2,
        )
        if smag < np.finfo(float).eps * nfin:
            return LogComplex.zero()
    return LogComplex(out_lm, out_ph)


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid: points x0 + k*dx, k = 0..n-1."""

    x0: float
    dx: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParameterError("grid needs at least 2 points")
        if not (self.dx > 0):
            raise InvalidParameterError("grid spacing must be positive")

    @classmethod
    def symmetric(cls, radius: float, n: int) -> "Grid1D":
        if n < 2:
            raise InvalidParameterError("grid needs at least 2 points")
        dx = 2.0 * radius / (n - 1)
        return cls(-radius, dx, n)

    @property
    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def radius(self) -> float:
        return -self.x0

    def is_symmetric(self) -> bool:
        return abs(self.x0 + (self.n - 1) * self.dx / 2.0) <= 1e-9 * self.dx

    def log_trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n, math.log(self.dx))
        w[0] += math.log(0.5)
        w[-1] += math.log(0.5)
        return w


@dataclass(frozen=True)
class PhaseGrid:
    """Cartesian product of a position grid and a frequency grid."""

    xg: Grid1D
    kg: Grid1D

    @property
    def shape(self):
        return (self.xg.n, self.kg.n)

    def is_symmetric(self) -> bool:
        return self.xg.is_symmetric() and self.kg.is_symmetric()

    def fft_dual(self) -> bool:
        """True when the frequency spacing matches 1/(n*dx) of the x grid."""
        return abs(self.kg.dx * self.xg.n * self.xg.dx - 1.0) <= 1e-9


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Function samples on a grid, stored in polar log form (row-major)."""

    grid: object  # Grid1D | PhaseGrid
    logmag: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)

    def __post_init__(self):
        lm = np.asarray(self.logmag, dtype=np.float64)
        ph = np.asarray(self.phase, dtype=np.float64)
        shape = (
            (self.grid.n,) if isinstance(self.grid, Grid1D) else self.grid.shape
        )
        if lm.shape != shape or ph.shape != shape:
            raise GridCompatibilityError(
                f"sample shape {lm.shape} does not match grid shape {shape}"
            )
        ph = np.where(np.isfinite(lm), wrap_phase(ph), 0.0)
        object.__setattr__(self, "logmag", lm)
        object.__setattr__(self, "phase", ph)

    @classmethod
    def from_complex(cls, grid, values) -> "SampledFunction":
        values = np.asarray(values, dtype=np.complex128)
        mag = np.abs(values)
        with np.errstate(divide="ignore"):
            lm = np.log(mag)  # log(0) -> -inf is the wanted encoding
        ph = np.where(mag > 0.0, np.angle(values), 0.0)
        return cls(grid, lm, ph)

    @classmethod
    def from_callable(cls, grid, fn) -> "SampledFunction":
        return cls.from_complex(grid, np.vectorize(fn)(grid.points))

    @classmethod
    def zero(cls, grid) -> "SampledFunction":
        shape = (grid.n,) if isinstance(grid, Grid1D) else grid.shape
        return cls(grid, np.full(shape, NEG_INF), np.zeros(shape))

    def conj(self) -> "SampledFunction":
        return SampledFunction(self.grid, self.logmag, -self.phase)

    def scaled(self, factor: LogComplex) -> "SampledFunction":
        if factor.is_zero():
            return SampledFunction.zero(self.grid)
        return SampledFunction(
            self.grid, self.logmag + factor.logmag, self.phase + factor.phase
        )

    def __mul__(self, other: "SampledFunction") -> "SampledFunction":
        if self.grid != other.grid:
            raise GridCompatibilityError("pointwise product needs equal grids")
        return SampledFunction(
            self.grid, self.logmag + other.logmag, self.phase + other.phase
        )

    def max_logmag(self) -> float:
        return float(np.max(self.logmag))

    def interp_log(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Linear interpolation of (logmag, phase) at points ``xs``.

        Off-grid points evaluate to exact zero; interpolation requires a
        1-D grid.  Phase is interpolated on the locally unwrapped branch.
        """
        if not isinstance(self.grid, Grid1D):
            raise GridCompatibilityError("interpolation needs a 1-D grid")
        xs = np.asarray(xs, dtype=np.float64)
        pts = self.grid.points
        lm = np.interp(xs, pts, self.logmag, left=NEG_INF, right=NEG_INF)
        ph_unwrapped = np.unwrap(np.where(np.isfinite(self.logmag), self.phase, 0.0))
        ph = wrap_phase(np.interp(xs, pts, ph_unwrapped, left=0.0, right=0.0))
        return lm, np.where(np.isfinite(lm), ph, 0.0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh)
            if isinstance(self.grid, Grid1D):
                out.writerow(["x", "logmag", "phase"])
                for x, lm, ph in zip(self.grid.points, self.logmag, self.phase):
                    out.writerow([f"{x:.17g}", f"{lm:.17g}", f"{ph:.17g}"])
            else:
                out.writerow(["x", "xi", "logmag", "phase"])
                xs = self.grid.xg.points
                ks = self.grid.kg.points
                for i, x in enumerate(xs):
                    for j, k in enumerate(ks):
                        out.writerow(
                            [
                                f"{x:.17g}",
                                f"{k:.17g}",
                                f"{self.logmag[i, j]:.17g}",
                                f"{self.phase[i, j]:.17g}",
                            ]
                        )


def to_linear(f: SampledFunction) -> np.ndarray:
    """Dense complex values of ``f``; refuses if any sample would overflow."""
    peak = f.max_logmag()
    if peak >= LINEAR_MAX_LOG:
        bad = np.flatnonzero(np.ravel(f.logmag) >= LINEAR_MAX_LOG)
        raise OverflowRefusalError(
            f"{bad.size} samples exceed linear range (peak logmag {peak:.3g})",
            indices=bad[:16],
        )
    with np.errstate(under="ignore"):
        return np.exp(f.logmag) * np.exp(1j * f.phase)


def from_linear(grid, values) -> SampledFunction:
    return SampledFunction.from_complex(grid, values)


def _check_tail(logmag, log_weights=None, what="integrand"):
    lm = logmag if log_weights is None else logmag + log_weights
    peak = np.max(lm)
    if not np.isfinite(peak):
        return
    if lm.ndim == 1:
        boundary = max(lm[0], lm[-1])
    else:
        boundary = max(
            np.max(lm[0, :]), np.max(lm[-1, :]), np.max(lm[:, 0]), np.max(lm[:, -1])
        )
    ratio = boundary - peak
    if ratio > QUAD_TAIL_LOG_TOL:
        warnings.warn(
            TruncationWarning(
                f"{what} boundary/peak log ratio {ratio:.3g} above "
                f"{QUAD_TAIL_LOG_TOL:.3g}",
                log_ratio=ratio,
            ),
            stacklevel=3,
        )


def quad(f: SampledFunction) -> LogComplex:
    """Trapezoidal quadrature of ``f`` over its (symmetric) grid.

    Operates in log space throughout; on smooth integrands that have decayed
    at the boundary the trapezoid rule on a symmetric grid is spectrally
    accurate, which is why no higher-order scheme is offered.
    """
    if isinstance(f.grid, Grid1D):
        if not f.grid.is_symmetric():
            raise GridCompatibilityError("quadrature requires a symmetric grid")
        _check_tail(f.logmag)
        w = f.grid.log_trapezoid_weights()
        lm, ph, smag, nfin = _kernels.logc_sum_axis(f.logmag + w, f.phase)
    else:
        if not f.grid.is_symmetric():
            raise GridCompatibilityError("quadrature requires symmetric grids")
        _check_tail(f.logmag)
        wx = f.grid.xg.log_trapezoid_weights()
        wk = f.grid.kg.log_trapezoid_weights()
        lm2 = f.logmag + wx[:, None] + wk[None, :]
        lm, ph, smag, nfin = _kernels.logc_sum_axis(
            np.ravel(lm2), np.ravel(f.phase)
        )
    if nfin > 0 and smag < CANCEL_REL * nfin:
        warnings.warn(
            CancellationWarning(f"quadrature lost significance (|s| = {smag:.3e})"),
            stacklevel=2,
        )
    return LogComplex(lm, ph)


_CENTRAL_OFFSETS = {}


def _central_stencil(order: int):
    """Offsets (in units of h) and weights of the lowest central difference."""
    if order not in _CENTRAL_OFFSETS:
        k = order
        offs = np.array([k / 2.0 - j for j in range(k + 1)])
        wts = np.array([(-1) ** j * math.comb(k, j) for j in range(k + 1)], float)
        _CENTRAL_OFFSETS[order] = (offs, wts)
    return _CENTRAL_OFFSETS[order]


def finite_diff(fn, x: float, order: int, h: float | None = None):
    """Central finite difference of ``fn`` at ``x`` with Richardson step.

    Returns ``(value, err_estimate)``.  ``order`` is capped at 8; the two-step
    Richardson pair (h, h/2) upgrades the O(h^2) stencil to O(h^4) and its
    disagreement is the error estimate.  Raises StepCollapseError when the
    two levels disagree by more than 1e-3 in relative terms.
    """
    if order < 0 or order > 8:
        raise InvalidParameterError("derivative order must be in 0..8")
    if order == 0:
        return fn(x), 0.0
    if h is None:
        h = max(1e-5, np.finfo(float).eps ** (1.0 / (order + 2)))
    offs, wts = _central_stencil(order)

    def level(step):
        vals = np.array([fn(x + o * step) for o in offs], dtype=complex)
        num = np.dot(wts, vals)
        # roundoff scale of the stencil: what cancellation can produce
        noise = np.sum(np.abs(wts) * np.abs(vals)) * np.finfo(float).eps
        return num / step**order, noise / step**order

    d1, n1 = level(h)
    d2, n2 = level(h / 2.0)
    d3, n3 = level(h / 4.0)
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d3 - d2) / 3.0
    val = (16.0 * r2 - r1) / 15.0
    err = abs(r2 - r1) / 15.0
    scale = max(abs(val), abs(r2))
    # disagreement 9 digits below the stencil's cancellation mass means the
    # derivative is numerically zero there, not that the step collapsed
    mass = max(n1, n2, n3) / np.finfo(float).eps
    if scale > 0 and abs(r2 - r1) > max(1e-3 * scale, 1e-9 * mass):
        raise StepCollapseError(
            f"Richardson levels disagree by {abs(r2 - r1) / scale:.3e} "
            f"at x={x!r}, order {order}"
        )
    if abs(val.imag) == 0.0:
        return val.real, err
    return val, err
