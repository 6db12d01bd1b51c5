"""Closed-form window families and their derivative-bound checks.

Three analytic families are supported, every one of them evaluated exactly
in log space:

* ``gaussian(a)``        exp(-pi (x/a)^2)
* ``subgaussian(r, q)``  exp(-r <x>^q),        q >= 1
* ``doubleexp(t, q)``    exp(-t e^{<x>^q}),    q > 0

with <x> = sqrt(1 + x^2).  A fourth variant wraps arbitrary sampled data.
Derivatives are taken from the closed forms by Richardson finite
differences; the bound fits report the smallest constant C that makes the
respective factorial envelope hold on the probe grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .numerics import NEG_INF, LogComplex, SampledFunction, finite_diff
from .weights import WeightSequence

FIT_C_MAX = 1e6


def bracket(x):
    """<x> = (1 + x^2)^{1/2}."""
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


@dataclass(frozen=True)
class WindowSpec:
    kind: str
    a: float | None = None
    r: float | None = None
    q: float | None = None
    t: float | None = None
    samples: SampledFunction | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if not (self.a and self.a > 0):
                raise InvalidParameterError("gaussian needs width a > 0")
        elif self.kind == "subgaussian":
            if not (self.r and self.r > 0) or self.q is None or self.q < 1:
                raise InvalidParameterError("subgaussian needs r > 0 and q >= 1")
        elif self.kind == "doubleexp":
            if not (self.t and self.t > 0) or not (self.q and self.q > 0):
                raise InvalidParameterError("doubleexp needs t > 0 and q > 0")
        elif self.kind == "sampled":
            if self.samples is None:
                raise InvalidParameterError("sampled window needs samples")
        else:
            raise InvalidParameterError(f"unknown window kind {self.kind!r}")

    def log_eval_array(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """(logmag, phase) at points ``xs``; exact for the analytic kinds."""
        xs = np.asarray(xs, dtype=float)
        if self.kind == "gaussian":
            lm = -math.pi * (xs / self.a) ** 2
        elif self.kind == "subgaussian":
            lm = -self.r * bracket(xs) ** self.q
        elif self.kind == "doubleexp":
            lm = -self.t * np.exp(bracket(xs) ** self.q)
        else:
            return self.samples.interp_log(xs)
        return lm, np.zeros_like(lm)

    def eval(self, x: float) -> LogComplex:
        lm, ph = self.log_eval_array(np.array([x]))
        if lm[0] == NEG_INF:
            return LogComplex.zero()
        return LogComplex(float(lm[0]), float(ph[0]))

    def linear_callable(self):
        """Plain-float evaluator for finite differencing (may underflow)."""
        if self.kind == "sampled":
            raise InvalidParameterError("derivative checks need a closed form")

        def fn(x: float) -> float:
            lm, _ = self.log_eval_array(np.array([x]))
            v = lm[0]
            return math.exp(v) if v > -745.0 else 0.0

        return fn

    def log_slope(self, x: float) -> float:
        """|d/dx log w(x)|, used to pick finite-difference steps."""
        return abs(self.log_deriv1(np.array([x]))[0])

    def log_deriv1(self, xs) -> np.ndarray:
        """s'(x) where w = e^{s}; exact closed forms."""
        xs = np.asarray(xs, dtype=float)
        b = bracket(xs)
        if self.kind == "gaussian":
            return -2.0 * math.pi * xs / self.a**2
        if self.kind == "subgaussian":
            return -self.r * self.q * xs * b ** (self.q - 2.0)
        if self.kind == "doubleexp":
            return -self.t * self.q * xs * b ** (self.q - 2.0) * np.exp(b**self.q)
        raise InvalidParameterError("no closed-form slope for sampled windows")

    def log_deriv2(self, xs) -> np.ndarray:
        """s''(x) where w = e^{s}; exact closed forms."""
        xs = np.asarray(xs, dtype=float)
        b = bracket(xs)
        if self.kind == "gaussian":
            return np.full(xs.shape, -2.0 * math.pi / self.a**2)
        bpp = self.q * (b ** (self.q - 2.0) + (self.q - 2.0) * xs**2 * b ** (self.q - 4.0))
        if self.kind == "subgaussian":
            return -self.r * bpp
        if self.kind == "doubleexp":
            bp = self.q * xs * b ** (self.q - 2.0)
            return -self.t * np.exp(b**self.q) * (bpp + bp**2)
        raise InvalidParameterError("no closed-form curvature for sampled windows")

    def deriv_ratio(self, order: int, xs) -> np.ndarray:
        """w^{(order)}(x) / w(x) for order <= 2, from the log derivatives."""
        xs = np.asarray(xs, dtype=float)
        if order == 0:
            return np.ones(xs.shape)
        if order == 1:
            return self.log_deriv1(xs)
        if order == 2:
            return self.log_deriv2(xs) + self.log_deriv1(xs) ** 2
        raise InvalidParameterError("derivative ratios are provided up to order 2")

    def decay_params(self) -> tuple[str, float, float]:
        """(family, rate, q) in the sub-Gaussian sense, for admissibility.

        A gaussian of width a decays like exp(-(pi/a^2) <x>^2) up to a
        constant, so it is classified as subgaussian with r = pi/a^2, q = 2.
        """
        if self.kind == "gaussian":
            return "subgaussian", math.pi / self.a**2, 2.0
        if self.kind == "subgaussian":
            return "subgaussian", self.r, self.q
        if self.kind == "doubleexp":
            return "doubleexp", self.t, self.q
        raise InvalidParameterError("sampled windows carry no decay certificate")

    def to_json(self) -> dict:
        out = {"variant": self.kind}
        for name in ("a", "r", "q", "t"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out

    @classmethod
    def from_json(cls, data: dict) -> "WindowSpec":
        return cls(
            kind=data["variant"],
            a=data.get("a"),
            r=data.get("r"),
            q=data.get("q"),
            t=data.get("t"),
        )


def gaussian(a: float = 1.0) -> WindowSpec:
    return WindowSpec("gaussian", a=a)


def subgaussian(r: float, q: float) -> WindowSpec:
    return WindowSpec("subgaussian", r=r, q=q)


def doubleexp(t: float, q: float) -> WindowSpec:
    return WindowSpec("doubleexp", t=t, q=q)


def sampled_window(samples: SampledFunction) -> WindowSpec:
    return WindowSpec("sampled", samples=samples)


def _derivative_table(
    w: WindowSpec, xs: np.ndarray, alpha_max: int, h_scale: float = 1.0
) -> np.ndarray:
    """|d^alpha w / dx^alpha| on the grid, alpha = 0..alpha_max."""
    if alpha_max > 6:
        raise InvalidParameterError("derivative orders above 6 lose all digits")
    fn = w.linear_callable()
    out = np.empty((alpha_max + 1, xs.size))
    for j, x in enumerate(xs):
        h = h_scale * 0.15 / (1.0 + w.log_slope(x))
        out[0, j] = abs(fn(x))
        for k in range(1, alpha_max + 1):
            val, _ = finite_diff(fn, x, k, h=h)
            out[k, j] = abs(val)
    return out


@dataclass(frozen=True)
class DerivBoundFit:
    """Smallest C with |d^alpha w| <= C^alpha * envelope(alpha, x) on the grid."""

    C: float
    ok: bool
    alpha_max: int
    per_alpha: tuple

    def to_json(self) -> dict:
        return {
            "C": self.C,
            "ok": self.ok,
            "alpha_max": self.alpha_max,
            "per_alpha": list(self.per_alpha),
        }


def _fit_c(deriv: np.ndarray, env_log: np.ndarray) -> DerivBoundFit:
    # env_log[k, j] = log envelope without the C^alpha factor
    amax = deriv.shape[0] - 1
    per_alpha = []
    c_log = 0.0
    with np.errstate(divide="ignore"):
        log_deriv = np.log(deriv)
    for k in range(1, amax + 1):
        excess = np.max(log_deriv[k] - env_log[k]) / k
        per_alpha.append(math.exp(excess) if np.isfinite(excess) else 0.0)
        if np.isfinite(excess):
            c_log = max(c_log, excess)
    c = math.exp(c_log)
    return DerivBoundFit(c, c <= FIT_C_MAX, amax, tuple(per_alpha))


def verify_subgauss_derivative_bound(
    w: WindowSpec, alpha_max: int, xs, h_scale: float = 1.0
) -> DerivBoundFit:
    """Fit C in |d^alpha e^{-r<x>^q}| <= C^alpha alpha! e^{-r<x>^q + <x>^{q-1}}."""
    if w.kind != "subgaussian":
        raise InvalidParameterError("fit applies to subgaussian windows")
    xs = np.asarray(xs, dtype=float)
    deriv = _derivative_table(w, xs, alpha_max, h_scale)
    br = bracket(xs)
    base = -w.r * br**w.q + br ** (w.q - 1.0)
    env = np.array(
        [math.lgamma(k + 1.0) + base for k in range(alpha_max + 1)]
    )
    return _fit_c(deriv, env)


def verify_doubleexp_derivative_bound(
    w: WindowSpec, rho: float, tau: float, alpha_max: int, xs, h_scale: float = 1.0
) -> DerivBoundFit:
    """Fit C in |d^alpha exp(-t e^{<x>^q})| <= C^alpha (alpha!)^{1+rho} exp(-tau e^{<x>^q})."""
    if w.kind != "doubleexp":
        raise InvalidParameterError("fit applies to doubleexp windows")
    if not (0 < tau < w.t):
        raise InvalidParameterError("tau must lie in (0, t)")
    if not rho > 0:
        raise InvalidParameterError("rho must be positive")
    xs = np.asarray(xs, dtype=float)
    deriv = _derivative_table(w, xs, alpha_max, h_scale)
    base = -tau * np.exp(bracket(xs) ** w.q)
    env = np.array(
        [(1.0 + rho) * math.lgamma(k + 1.0) + base for k in range(alpha_max + 1)]
    )
    return _fit_c(deriv, env)


def seminorm_estimate(
    w: WindowSpec,
    seq: WeightSequence,
    r_prime: float,
    q: float,
    h: float,
    alpha_max: int,
    xs,
) -> float:
    """sup over the grid and alpha <= alpha_max of
    h^alpha e^{r'<x>^q} |d^alpha w(x)| / M_alpha."""
    if alpha_max > 6:
        raise InvalidParameterError("alpha_max is capped at 6")
    xs = np.asarray(xs, dtype=float)
    deriv = _derivative_table(w, xs, alpha_max)
    br_pow = r_prime * bracket(xs) ** q
    best = NEG_INF
    with np.errstate(divide="ignore"):
        log_deriv = np.log(deriv)
    for k in range(alpha_max + 1):
        vals = k * math.log(h) + br_pow + log_deriv[k] - seq.log_values[k]
        best = max(best, float(np.max(vals)))
    return math.exp(best) if best < 700 else math.inf
