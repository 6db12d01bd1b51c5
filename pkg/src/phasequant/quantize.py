"""Weyl quantisation and both evaluation routes for localisation operators.

The extended operators exist only at the pairing level, so the primary API
returns <A psi, theta> (bilinear dual pairings) rather than sampled
functions:

* ``locop_direct``     <a, V_{w1} psi * conj(V_{w2} conj theta)> - needs an
  ultrapolynomially bounded symbol (mild mode);
* ``locop_via_weyl``   Weyl pairing of b = a * W(w2, w1) - the route that
  extends to super-exponential symbols, guarded by the admissibility
  threshold and a quadrature tail monitor that refuses divergent data
  instead of silently truncating it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DivergentIntegrandError,
    ExtrapolationUnstableError,
    GridCompatibilityError,
    InvalidParameterError,
    MildModeRefusalError,
    NotAdmissibleError,
    TruncationWarning,
)
from .numerics import (
    NEG_INF,
    Grid1D,
    LogComplex,
    PhaseGrid,
    SampledFunction,
    quad,
)
from .symbols import TensorSymbol, admissibility
from .tf import TFPlan, evaluate_log, stft
from .weights import AssociatedFunction, RSequence, WeightSequence
from .windows import WindowSpec

_U_CHUNK = 32
TAIL_TRUNC_LOG = math.log(1e-10)
FIT_LOG_C_MAX = math.log(1e6)


def _difference_grid(a: Grid1D, b: Grid1D) -> Grid1D:
    """Grid holding every a_j - b_i; needs equal spacing and odd sizes."""
    if abs(a.dx - b.dx) > 1e-9 * a.dx:
        raise GridCompatibilityError("difference grid needs equal spacings")
    if a.n % 2 == 0 or b.n % 2 == 0:
        raise GridCompatibilityError("difference grid needs odd point counts")
    return Grid1D(a.x0 - (-b.x0), a.dx, a.n + b.n - 1)


@dataclass(frozen=True)
class ConvolutionPlan:
    """Grid layout for b = a * W(wa, wb).

    The output lives on ``out``; the position quadrature runs over
    ``ygrid``, whose spacing must equal the output x spacing so shifted
    kernel arguments fall exactly on the kernel's difference grid.
    ``etagrid`` fixes the domain on which the frequency factor gtilde is
    treated as integrable; ``wig_ygrid`` overrides the kernel's internal
    integration grid.
    """

    out: PhaseGrid
    ygrid: Grid1D
    etagrid: Grid1D
    wig_ygrid: Grid1D | None = None

    def __post_init__(self):
        if not (
            self.out.is_symmetric()
            and self.ygrid.is_symmetric()
            and self.etagrid.is_symmetric()
        ):
            raise GridCompatibilityError("plan grids must be symmetric")
        self.ugrid()  # validates spacing/oddness

    def ugrid(self) -> Grid1D:
        return _difference_grid(self.out.xg, self.ygrid)

    @classmethod
    def build(
        cls,
        x_radius: float,
        nx: int,
        xi_radius: float,
        nxi: int,
        y_radius: float,
        eta_radius: float,
        wig_ygrid: Grid1D | None = None,
    ) -> "ConvolutionPlan":
        if nx % 2 == 0 or nxi % 2 == 0:
            raise InvalidParameterError("plan needs odd grid sizes")
        xg = Grid1D.symmetric(x_radius, nx)
        kg = Grid1D.symmetric(xi_radius, nxi)
        my = int(math.ceil(y_radius / xg.dx))
        return cls(
            PhaseGrid(xg, kg),
            Grid1D.symmetric(my * xg.dx, 2 * my + 1),
            Grid1D.symmetric(eta_radius, 257),
            wig_ygrid,
        )


@dataclass(frozen=True)
class WeylSymbol:
    b: SampledFunction
    provenance: dict = field(default_factory=dict)
    gelfand_fit: dict | None = None


@dataclass(frozen=True)
class PairingResult:
    value: LogComplex
    route: str
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "value": {"logmag": self.value.logmag, "phase": self.value.phase},
            "route": self.route,
            "warnings": list(self.diagnostics.get("warnings", [])),
        }
        for key in ("epsilons", "spread"):
            if key in self.diagnostics:
                out[key] = self.diagnostics[key]
        return out


def _tail_verdict(profile: np.ndarray) -> tuple[bool, float]:
    """(divergent, boundary_ratio) for a quadrature-direction log profile.

    Divergent when the outer 10% of the grid carries values not decreasing
    below the interior maximum; boundary_ratio is boundary-peak in logs.
    """
    n = profile.size
    k = max(1, n // 10)
    interior = profile[k : n - k]
    outer = np.concatenate([profile[:k], profile[n - k :]])
    interior_max = float(np.max(interior))
    outer_max = float(np.max(outer))
    divergent = outer_max > interior_max - 1e-9
    boundary = max(profile[0], profile[-1])
    return divergent, float(boundary - np.max(profile))


def wigner_zero_slice(wa: WindowSpec, wb: WindowSpec, us, wig_ygrid=None) -> np.ndarray:
    """log |W(wa, wb)(u, 0)| on arbitrary points ``us`` (tail-monitor helper).

    For the positive window families this is also sup over xi of |W|, since
    |W(u, xi)| <= integral of the positive integrand = W(u, 0).
    """
    us = np.asarray(us, dtype=float)
    from .tf import default_wigner_ygrid

    yg = wig_ygrid or default_wigner_ygrid(wa, wb, float(np.max(np.abs(us))), 0.0)
    ys = yg.points
    logw = yg.log_trapezoid_weights()
    out = np.empty(us.size)
    for lo in range(0, us.size, 256):
        hi = min(lo + 256, us.size)
        lmf, _ = evaluate_log(wa, us[lo:hi, None] + ys[None, :] / 2.0)
        lmg, _ = evaluate_log(wb, us[lo:hi, None] - ys[None, :] / 2.0)
        lm, _, _, _ = _kernels.logc_sum_axis(
            lmf + lmg + logw[None, :], np.zeros((hi - lo, ys.size))
        )
        out[lo:hi] = lm
    return out


def y_tail_profile(
    x_factor_logmag: np.ndarray,
    wa: WindowSpec,
    wb: WindowSpec,
    ygrid: Grid1D,
    probe_x: float = 0.0,
    wig_ygrid: Grid1D | None = None,
) -> np.ndarray:
    """Log magnitude of the y-integrand f(y) * sup_xi |W(wa,wb)(x0 - y, .)|."""
    w0 = wigner_zero_slice(wa, wb, probe_x - ygrid.points, wig_ygrid)
    return x_factor_logmag + w0


def _ghat_on_points(xi_factor, etagrid: Grid1D, ys: np.ndarray):
    """log form of Ghat(y) = int gtilde(eta) e^{2 pi i y eta} deta.

    The trapezoid rendition of this transform is 1/d_eta-periodic in y, so
    the eta spacing is refined until the period clears the requested y
    range; gtilde must have decayed at the eta boundary (growing gtilde has
    no quadrature-representable inverse transform and is refused - growth
    in the frequency factor belongs to the operator Ptilde).
    """
    ymax = float(np.max(np.abs(ys)))
    deta = min(etagrid.dx, 1.0 / (2.0 * ymax + 16.0))
    m = int(math.ceil(etagrid.radius / deta))
    eg = Grid1D.symmetric(etagrid.radius, 2 * m + 1)
    glm, gph = xi_factor.gtilde_log(eg.points)
    peak = float(np.max(glm))
    boundary = max(glm[0], glm[-1])
    if boundary > peak - 20.0:
        raise InvalidParameterError(
            "gtilde has not decayed on the eta grid; the convolution route "
            "supports integrable gtilde (put growth into Ptilde) or constants"
        )
    lm = glm + eg.log_trapezoid_weights()
    out_lm, out_ph = _kernels.osc_reduce(
        lm[None, :], gph[None, :], eg.points, -np.asarray(ys, dtype=float)
    )
    return out_lm[0], out_ph[0]


def _modified_kernel(
    term, wa: WindowSpec, wb: WindowSpec, plan: ConvolutionPlan
) -> SampledFunction:
    """K(u, xi) = int e^{-2 pi i y xi} P-factors(u, y) wa(u+y/2) wb(u-y/2) Ghat(y) dy.

    This is the frequency convolution of P(D_x)Ptilde(D_xi)W(wa, wb) with
    gtilde, folded into the position-side quadrature: multiplying the
    Wigner integrand by Ghat is exact where sampling that convolution on a
    frequency grid is not (the kernel degenerates to a near-delta in xi for
    large |u|).  Position derivatives act through the windows' log-derivative
    ratios, frequency derivatives through powers of (-2 pi y); total
    operator order is capped at 2.
    """
    x_op = term.x_op
    p_tilde = term.xi_factor.p_tilde
    if not (x_op.is_identity() and p_tilde.is_identity()) and (
        x_op.order + p_tilde.order > 2
    ):
        raise InvalidParameterError(
            "kernel derivatives are certified for total order <= 2 only"
        )
    from .tf import _osc_rows

    ugrid = plan.ugrid()
    us = ugrid.points
    ks = plan.out.kg.points
    gtilde = term.xi_factor.gtilde
    const_g = getattr(gtilde, "kind", None) == "const"
    if const_g:
        if not (p_tilde.is_identity() and x_op.is_identity()):
            raise InvalidParameterError(
                "constant gtilde is only combined with identity operators; "
                "fold constants into the coefficients instead"
            )
        # exact collapse: int K(u, v) dv = wa(u) conj(wb(u))
        lma, pha = evaluate_log(wa, us)
        lmb, phb = evaluate_log(wb, us)
        base = LogComplex.from_complex(gtilde.c)
        lm = np.broadcast_to((lma + lmb + base.logmag)[:, None], (us.size, ks.size))
        ph = np.broadcast_to((pha - phb + base.phase)[:, None], (us.size, ks.size))
        return SampledFunction(PhaseGrid(ugrid, plan.out.kg), lm.copy(), ph.copy())

    yg = plan.wig_ygrid or _default_kernel_ygrid(
        wa, wb, float(np.max(np.abs(us))), float(np.max(np.abs(ks)))
    )
    ys = yg.points
    logw = yg.log_trapezoid_weights()
    ghat_lm, ghat_ph = _ghat_on_points(term.xi_factor, plan.etagrid, ys)

    pieces_lm = []
    pieces_ph = []
    for m, cm in enumerate(x_op.coeffs):
        for n, dn in enumerate(p_tilde.coeffs):
            if cm == 0 or dn == 0:
                continue
            # D_u^m = (-i d/du)^m expands through the window ratios;
            # D_v^n acting on e^{-2 pi i y v} is exactly (-2 pi y)^n
            coef = complex(cm) * complex(dn) * (-1j) ** m
            for j in range(m + 1):
                cj = coef * math.comb(m, j)

                def rows(lo, hi, _j=j, _m=m, _n=n, _cj=cj):
                    left = us[lo:hi, None] + ys[None, :] / 2.0
                    right = us[lo:hi, None] - ys[None, :] / 2.0
                    lmf, phf = evaluate_log(wa, left)
                    lmg, phg = evaluate_log(wb, right)
                    fac = (
                        _cj
                        * wa.deriv_ratio(_j, left)
                        * wb.deriv_ratio(_m - _j, right)
                        * (-2.0 * np.pi * ys[None, :]) ** _n
                    )
                    mag = np.abs(fac)
                    with np.errstate(divide="ignore"):
                        lm = lmf + lmg + np.log(mag) + ghat_lm[None, :]
                    ph = (
                        phf
                        - phg
                        + np.where(mag > 0, np.angle(fac), 0.0)
                        + ghat_ph[None, :]
                    )
                    return lm, ph

                lm, ph = _osc_rows(rows, us.size, ys, ks, logw)
                pieces_lm.append(lm)
                pieces_ph.append(ph)
    if len(pieces_lm) == 1:
        out_lm, out_ph = pieces_lm[0], pieces_ph[0]
    else:
        k = len(pieces_lm)
        out_lm, out_ph, _, _ = _kernels.logc_sum_axis(
            np.stack(pieces_lm, axis=-1).reshape(-1, k),
            np.stack(pieces_ph, axis=-1).reshape(-1, k),
        )
        out_lm = out_lm.reshape(us.size, ks.size)
        out_ph = out_ph.reshape(us.size, ks.size)
    return SampledFunction(PhaseGrid(ugrid, plan.out.kg), out_lm, out_ph)


def _default_kernel_ygrid(
    wa: WindowSpec, wb: WindowSpec, u_max: float, xi_max: float
) -> Grid1D:
    """y grid for the modified kernel: the Ghat factor confines the mass
    near the origin, so only the oscillation rate matters for the spacing
    and a moderate radius suffices (grown when the window product is still
    flat there)."""
    dy = 1.0 / (2.0 * (xi_max + 8.0))
    radius = 8.0
    for _ in range(32):
        lmf, _ = evaluate_log(wa, np.array([0.0, radius / 2.0]))
        lmg, _ = evaluate_log(wb, np.array([0.0, -radius / 2.0]))
        if (lmf[1] + lmg[1]) - (lmf[0] + lmg[0]) <= -20.0:
            break
        radius *= 1.25
    m = int(math.ceil(radius / dy))
    return Grid1D.symmetric(m * dy, 2 * m + 1)


def convolve_symbol_wigner(
    a: TensorSymbol,
    wa: WindowSpec,
    wb: WindowSpec,
    plan: ConvolutionPlan,
    enforce_admissibility: bool = True,
    probe_x: float = 0.0,
) -> WeylSymbol:
    """b = a * W(wa, wb), sampled on the plan's output phase grid.

    Per term, the frequency convolution with gtilde is folded exactly into
    the kernel's own oscillatory integral (see _modified_kernel), leaving a
    single position convolution with the growth factor.  Before any heavy
    work the y-integrand tail is monitored at ``probe_x``: a non-decreasing
    tail raises DivergentIntegrandError (the integral does not exist; no
    truncated value is produced).
    """
    verdict = admissibility(a, wa, wb)
    if enforce_admissibility and verdict.admissible is not True:
        raise NotAdmissibleError(verdict.reason)

    ugrid = plan.ugrid()
    xg, kg = plan.out.xg, plan.out.kg
    ys = plan.ygrid.points
    ny = ys.size
    nx, nxi = xg.n, kg.n
    lwy = plan.ygrid.log_trapezoid_weights()
    diagnostics = {"warnings": []}

    # u gather indices: u = x_j - y_i
    u_idx = np.arange(nx)[:, None] - np.arange(ny)[None, :] + (ny - 1)

    term_lm = []
    term_ph = []
    for tno, term in enumerate(a.terms):
        flm, fph = term.x_factor.log_eval_array(ys)

        profile = y_tail_profile(
            flm, wa, wb, plan.ygrid, probe_x, wig_ygrid=None
        )
        divergent, tail_ratio = _tail_verdict(profile)
        if divergent:
            raise DivergentIntegrandError(
                f"term {tno}: y-integrand tail is non-decreasing "
                "(growth reaches the admissibility threshold)"
            )
        if tail_ratio > TAIL_TRUNC_LOG:
            msg = f"term {tno}: y-tail boundary/peak log ratio {tail_ratio:.3g}"
            diagnostics["warnings"].append(msg)
            warnings.warn(TruncationWarning(msg, log_ratio=tail_ratio), stacklevel=2)

        K = _modified_kernel(term, wa, wb, plan)

        # b(x, xi) = sum_i f(y_i) K(x - y_i, xi) w_i
        b_lm = np.empty((nx, nxi))
        b_ph = np.empty((nx, nxi))
        add_lm = (flm + lwy)[None, :, None]
        add_ph = fph[None, :, None]
        for lo in range(0, nx, _U_CHUNK):
            hi = min(lo + _U_CHUNK, nx)
            lm = K.logmag[u_idx[lo:hi], :] + add_lm
            ph = K.phase[u_idx[lo:hi], :] + add_ph
            lm = np.swapaxes(lm, 1, 2)
            ph = np.swapaxes(ph, 1, 2)
            rl, rp, _, _ = _kernels.logc_sum_axis(
                np.ascontiguousarray(lm).reshape(-1, ny),
                np.ascontiguousarray(ph).reshape(-1, ny),
            )
            b_lm[lo:hi] = rl.reshape(hi - lo, nxi)
            b_ph[lo:hi] = rp.reshape(hi - lo, nxi)
        term_lm.append(b_lm)
        term_ph.append(b_ph)

    if len(term_lm) == 1:
        lm, ph = term_lm[0], term_ph[0]
    else:
        k = len(term_lm)
        lm, ph, _, _ = _kernels.logc_sum_axis(
            np.stack(term_lm, axis=-1).reshape(-1, k),
            np.stack(term_ph, axis=-1).reshape(-1, k),
        )
        lm = lm.reshape(nx, nxi)
        ph = ph.reshape(nx, nxi)

    provenance = {
        "windows": [wa.to_json(), wb.to_json()],
        "admissibility": verdict.to_json(),
        "grid": {
            "x_radius": xg.radius, "nx": nx,
            "xi_radius": kg.radius, "nxi": nxi,
            "y_radius": plan.ygrid.radius, "eta_radius": plan.etagrid.radius,
        },
        "diagnostics": diagnostics,
    }
    return WeylSymbol(SampledFunction(plan.out, lm, ph), provenance)


@dataclass(frozen=True)
class GelfandFit:
    feasible: bool
    C: float
    candidate: int | None
    x_radius: float
    decay_feasible: bool = False
    decay_C: float | None = None
    decay_c: float | None = None

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "C": self.C,
            "candidate": self.candidate,
            "x_radius": self.x_radius,
            "decay_feasible": self.decay_feasible,
            "decay_C": self.decay_C,
            "decay_c": self.decay_c,
        }


def gelfand_bound_fit(
    weyl: WeylSymbol,
    seq: WeightSequence,
    x_radius: float,
    k_candidates: list[RSequence],
    decay_candidates=(0.25, 0.5, 1.0, 2.0),
) -> GelfandFit:
    """Smallest C with |b(x, xi)| <= C e^{N_{k_p}(|xi|)} on |x| <= x_radius.

    Candidates are tried in order; the best (smallest C) feasible one wins.
    When b actually decays in xi, the sharper envelope C e^{-M(c|xi|)} is
    fitted as well and reported.
    """
    b = weyl.b
    xs = b.grid.xg.points
    ks = np.abs(b.grid.kg.points)
    rows = np.abs(xs) <= x_radius + 1e-12
    sub = b.logmag[rows, :]
    best = (math.inf, None)
    for idx, rs in enumerate(k_candidates):
        af = AssociatedFunction(seq, rs)
        log_c = float(np.max(sub - af.eval_many(ks)[None, :]))
        if log_c < best[0]:
            best = (log_c, idx)
    feasible = best[0] <= FIT_LOG_C_MAX
    decay_feasible = False
    decay_c = None
    decay_C = None
    af0 = AssociatedFunction(seq)
    for c in sorted(decay_candidates, reverse=True):
        log_c2 = float(np.max(sub + af0.eval_many(c * ks)[None, :]))
        if log_c2 <= FIT_LOG_C_MAX:
            decay_feasible = True
            decay_c = c
            decay_C = math.exp(log_c2)
            break
    return GelfandFit(
        feasible,
        math.exp(min(best[0], 700.0)),
        best[1],
        x_radius,
        decay_feasible,
        decay_C,
        decay_c,
    )


def _aligned_indices(grid: Grid1D, pts: np.ndarray):
    idx = (pts - grid.x0) / grid.dx
    ridx = np.round(idx)
    if np.max(np.abs(idx - ridx)) > 1e-6:
        raise GridCompatibilityError(
            "pairing grids must be commensurate (no interpolation here)"
        )
    ii = ridx.astype(np.int64)
    inside = (ii >= 0) & (ii < grid.n)
    return np.clip(ii, 0, grid.n - 1), inside


def weyl_pair(
    weyl: WeylSymbol | SampledFunction,
    psi: SampledFunction,
    theta: SampledFunction,
    eps0: float | None = None,
) -> PairingResult:
    """<b^w psi, theta> as the oscillatory integral
    iint e^{2 pi i w xi} b(u, xi) theta(u + w/2) psi(u - w/2) du dw dxi.

    The (u, w) quadrature runs per xi slice; when the resulting xi profile
    has decayed at the grid boundary it is summed directly, otherwise a
    Gaussian damp e^{-eps xi^2} is applied at eps in {4, 2, 1} * eps0 and
    extrapolated polynomially to eps = 0, reporting the spread.
    """
    b = weyl.b if isinstance(weyl, WeylSymbol) else weyl
    if not isinstance(b.grid, PhaseGrid):
        raise GridCompatibilityError("weyl symbol must live on a phase grid")
    if psi.grid.dx != theta.grid.dx:
        raise GridCompatibilityError("psi and theta must share their spacing")
    ug = b.grid.xg
    kgrid = b.grid.kg
    dxs = psi.grid.dx
    # w grid: spacing 2 dx_psi so u +- w/2 lands on the sample grids
    ximax = max(abs(kgrid.points[0]), abs(kgrid.points[-1]))
    if 1.0 / (4.0 * dxs) < ximax - 1e-9:
        raise GridCompatibilityError(
            f"sample spacing {dxs:g} too coarse: the w-quadrature is "
            f"1/(2 dx)-periodic in xi, need dx <= {1.0 / (4.0 * ximax):g} "
            f"for the xi radius {ximax:g}"
        )
    mw = int(round(2.0 * psi.grid.radius / (2.0 * dxs)))
    wgrid = Grid1D.symmetric(mw * 2.0 * dxs, 2 * mw + 1)
    us = ug.points
    ws = wgrid.points
    it, inside_t = _aligned_indices(theta.grid, us[:, None] + ws[None, :] / 2.0)
    ip, inside_p = _aligned_indices(psi.grid, us[:, None] - ws[None, :] / 2.0)
    lm_tp = np.where(inside_t, theta.logmag[it], NEG_INF) + np.where(
        inside_p, psi.logmag[ip], NEG_INF
    )
    ph_tp = np.where(inside_t, theta.phase[it], 0.0) + np.where(
        inside_p, psi.phase[ip], 0.0
    )
    lm_tp = lm_tp + ug.log_trapezoid_weights()[:, None]
    lm_tp = lm_tp + wgrid.log_trapezoid_weights()[None, :]

    ks = kgrid.points
    g_lm = np.empty(ks.size)
    g_ph = np.empty(ks.size)
    for k, xi in enumerate(ks):
        lm = lm_tp + b.logmag[:, k][:, None]
        ph = ph_tp + b.phase[:, k][:, None] + 2.0 * np.pi * xi * ws[None, :]
        g_lm[k], g_ph[k], _, _ = _kernels.logc_sum_axis(lm.ravel(), ph.ravel())

    diagnostics = {"warnings": []}
    lwk = kgrid.log_trapezoid_weights()
    peak = float(np.max(g_lm))
    boundary = max(g_lm[0], g_lm[-1])
    if boundary - peak <= TAIL_TRUNC_LOG:
        lm, ph, _, _ = _kernels.logc_sum_axis(g_lm + lwk, g_ph)
        return PairingResult(LogComplex(lm, ph), "direct", diagnostics)

    # damped route
    ximax = max(abs(ks[0]), abs(ks[-1]))
    if eps0 is None:
        eps0 = max(3.0, (boundary - peak) + 23.0) / ximax**2
    svals = []
    epsilons = [4.0 * eps0, 2.0 * eps0, eps0]
    for eps in epsilons:
        lm, ph, _, _ = _kernels.logc_sum_axis(g_lm + lwk - eps * ks**2, g_ph)
        svals.append(LogComplex(lm, ph))
    ref = max(s.logmag for s in svals)
    if not np.isfinite(ref):
        return PairingResult(LogComplex.zero(), "damped", diagnostics)
    z4, z2, z1 = [
        math.exp(s.logmag - ref) * complex(math.cos(s.phase), math.sin(s.phase))
        for s in svals
    ]
    quad_extrap = (8.0 * z1 - 6.0 * z2 + z4) / 3.0
    lin_extrap = 2.0 * z1 - z2
    if quad_extrap == 0:
        value = LogComplex.zero()
        spread = abs(quad_extrap - lin_extrap)
    else:
        value = LogComplex(ref + math.log(abs(quad_extrap)),
                           math.atan2(quad_extrap.imag, quad_extrap.real))
        spread = abs(quad_extrap - lin_extrap) / abs(quad_extrap)
    diagnostics["epsilons"] = epsilons
    diagnostics["spread"] = spread
    if spread > 1e-3:
        raise ExtrapolationUnstableError(
            f"damping extrapolation spread {spread:.3e} exceeds 1e-3"
        )
    return PairingResult(value, "damped", diagnostics)


def locop_direct(
    a: TensorSymbol,
    w1: WindowSpec,
    w2: WindowSpec,
    psi: SampledFunction,
    theta: SampledFunction,
    plan: TFPlan,
) -> PairingResult:
    """<A_a psi, theta> = <a, V_{w1} psi * conj(V_{w2} conj theta)>.

    Only for symbols certified bounded on the grid (mild mode); growing
    symbols must go through the convolution route.
    """
    if not a.is_mild():
        raise MildModeRefusalError(
            "symbol growth exceeds ultrapolynomial: use locop_via_weyl"
        )
    v1 = stft(psi, w1, plan)
    v2 = stft(theta.conj(), w2, plan)
    alm, aph = a.eval_grid(plan.phase.xg.points, plan.phase.kg.points)
    integrand = SampledFunction(
        plan.phase, alm + v1.logmag + v2.logmag, aph + v1.phase - v2.phase
    )
    return PairingResult(quad(integrand), "direct")


def locop_apply_mild(
    a: TensorSymbol,
    w1: WindowSpec,
    w2: WindowSpec,
    psi: SampledFunction,
    plan: TFPlan,
    out_grid: Grid1D | None = None,
) -> SampledFunction:
    """Sampled A_a psi = V*_{w2}(a V_{w1} psi), mild symbols only.

    Pairings are the primary API (the extended operators land in a
    distribution space); this convenience exists because in mild mode the
    output is an honest function.
    """
    if not a.is_mild():
        raise MildModeRefusalError(
            "sampled application needs an ultrapolynomially bounded symbol"
        )
    from .tf import stft_adjoint

    v1 = stft(psi, w1, plan)
    alm, aph = a.eval_grid(plan.phase.xg.points, plan.phase.kg.points)
    weighted = SampledFunction(
        plan.phase, alm + v1.logmag, aph + v1.phase
    )
    return stft_adjoint(weighted, w2, out_grid or plan.signal)


def locop_via_weyl(
    a: TensorSymbol,
    w1: WindowSpec,
    w2: WindowSpec,
    psi: SampledFunction,
    theta: SampledFunction,
    plan: ConvolutionPlan,
    enforce_admissibility: bool = True,
) -> PairingResult:
    """<A_a psi, theta> through b = a * W(w2, w1) and the Weyl pairing."""
    weyl = convolve_symbol_wigner(
        a, w2, w1, plan, enforce_admissibility=enforce_admissibility
    )
    result = weyl_pair(weyl, psi, theta)
    return PairingResult(
        result.value,
        "convolution-weyl",
        {**result.diagnostics, "admissibility": weyl.provenance["admissibility"]},
    )
