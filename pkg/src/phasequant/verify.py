"""Property suites for the standalone inequalities and the divergence demo.

Each suite draws a fixed-seed random sample, checks its inequality in log
scale, and returns a PropertyReport whose verdict is pass exactly when the
worst violation stays within roundoff (1e-12 in log scale).  The
inequalities are exact mathematical statements, so any real violation is
an implementation bug, not a tolerance issue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError
from .numerics import Grid1D, SampledFunction, quad
from .quantize import _tail_verdict, y_tail_profile
from .windows import bracket, subgaussian

LOG_TOL = 1e-12


@dataclass(frozen=True)
class PropertyReport:
    property_id: str
    samples: int
    max_violation: float  # log-scale; <= tolerance means pass
    verdict: bool
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "property": self.property_id,
            "samples": self.samples,
            "max_violation": self.max_violation,
            "verdict": "pass" if self.verdict else "fail",
            "params": self.params,
        }


def _report(pid: str, viol: np.ndarray, seed: int, **params) -> PropertyReport:
    worst = float(np.max(viol))
    return PropertyReport(
        pid, viol.size, worst, worst <= LOG_TOL, {"seed": seed, **params}
    )


def check_product_split(n: int = 10_000, seed: int = 2024) -> PropertyReport:
    """|x|^k1 |y|^k2 <= 2^{k1+k2} (|x-y/2|^{k1+k2} + |x+y/2|^{k1+k2})."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-50.0, 50.0, n)
    y = rng.uniform(-50.0, 50.0, n)
    k1 = rng.integers(0, 9, n)
    k2 = rng.integers(0, 9, n)
    with np.errstate(divide="ignore"):
        lhs = k1 * np.log(np.abs(x)) + k2 * np.log(np.abs(y))
        k = k1 + k2
        rhs = k * math.log(2.0) + np.logaddexp(
            k * np.log(np.abs(x - y / 2.0)), k * np.log(np.abs(x + y / 2.0))
        )
    viol = np.where(np.isfinite(lhs), lhs - rhs, -np.inf)
    return _report("product-split", viol, seed)


def check_geometric_mean_decay(n: int = 10_000, seed: int = 2024) -> PropertyReport:
    """e^{-r<x-y/2>^q - r<x+y/2>^q} <= e^{-2r<x>^q} for q >= 1, r >= 0."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-20.0, 20.0, n)
    y = rng.uniform(-20.0, 20.0, n)
    q = rng.uniform(1.0, 3.0, n)
    r = rng.uniform(0.0, 4.0, n)
    lhs = -r * (bracket(x - y / 2.0) ** q + bracket(x + y / 2.0) ** q)
    rhs = -2.0 * r * bracket(x) ** q
    return _report("geometric-mean-decay", lhs - rhs, seed)


def check_peetre_type(n: int = 10_000, seed: int = 2024) -> PropertyReport:
    """s<x-y>^q <= s<x>^q + q 2^{q-1}|s||y|(<x>^{q-1} + <y>^{q-1})."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-20.0, 20.0, n)
    y = rng.uniform(-20.0, 20.0, n)
    q = rng.uniform(1.0, 3.0, n)
    s = rng.uniform(-5.0, 5.0, n)
    s = np.where(np.abs(s) < 1e-3, 1.0, s)  # s = 0 is outside the statement
    lhs = s * bracket(x - y) ** q
    rhs = (
        s * bracket(x) ** q
        + q * 2.0 ** (q - 1.0) * np.abs(s) * np.abs(y) * bracket(x) ** (q - 1.0)
        + q * 2.0 ** (q - 1.0) * np.abs(s) * np.abs(y) * bracket(y) ** (q - 1.0)
    )
    # both sides can reach ~1e4: normalize the roundoff comparison
    scale = np.maximum(1.0, np.abs(rhs))
    return _report("peetre-type", (lhs - rhs) / scale, seed)


def check_subadditive_bracket(n: int = 10_000, seed: int = 2024) -> PropertyReport:
    """<x-y>^q <= <x>^q + <y>^q for q in [0, 1]."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-50.0, 50.0, n)
    y = rng.uniform(-50.0, 50.0, n)
    q = rng.uniform(0.0, 1.0, n)
    lhs = bracket(x - y) ** q
    rhs = bracket(x) ** q + bracket(y) ** q
    return _report("subadditive-bracket", lhs - rhs, seed)


ALL_INEQUALITY_SUITES = (
    check_product_split,
    check_geometric_mean_decay,
    check_peetre_type,
    check_subadditive_bracket,
)


@lru_cache(maxsize=1)
def _plateau_table(samples: int = 4001):
    """Cumulative integral of the width-0.5 mollifier bump.

    chi is the convolution of the indicator of [-1.5, 1.5] with the
    compactly supported bump exp(1 - 1/(1 - u^2)), u = s/0.25, normalised
    to unit mass: a plateau on |x| <= 1 and support inside |x| <= 2.
    """
    s = np.linspace(-0.25, 0.25, samples)
    u = s / 0.25
    with np.errstate(divide="ignore", over="ignore"):
        b = np.where(np.abs(u) < 1.0, np.exp(1.0 - 1.0 / (1.0 - u**2)), 0.0)
    cum = np.concatenate([[0.0], np.cumsum((b[1:] + b[:-1]) * 0.5 * (s[1] - s[0]))])
    cum /= cum[-1]
    return s, cum


def plateau_bump(x) -> np.ndarray:
    """Smooth cutoff: 1 on |x| <= 1, 0 beyond |x| >= 2, monotone between."""
    x = np.asarray(x, dtype=float)
    s, cum = _plateau_table()

    def cdf(v):
        return np.interp(v, s, cum, left=0.0, right=1.0)

    # chi(x) = integral of the unit-mass bump over [x - 1.5, x + 1.5]
    return np.clip(cdf(x + 1.5) - cdf(x - 1.5), 0.0, 1.0)


def divergence_demo(l: float, q: float, n_max: int = 8, points: int = 8193):
    """I_n = int e^{(l/2)<x>^q} chi(x / 2^n) dx for n = 1..n_max, in log scale.

    The returned array is the sequence log I_n; the integrands blow past
    linear floating range long before n_max = 8, which is the point of
    computing them in log space.
    """
    if not (l > 0 and q >= 1):
        raise InvalidParameterError("divergence demo needs l > 0 and q >= 1")
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        scale = 2.0**n
        g = Grid1D.symmetric(2.05 * scale, points)
        xs = g.points
        chi = plateau_bump(xs / scale)
        with np.errstate(divide="ignore"):
            lm = (l / 2.0) * bracket(xs) ** q + np.log(chi)
        f = SampledFunction(g, lm, np.zeros_like(lm))
        out[n - 1] = quad(f).logmag
    return out


@dataclass(frozen=True)
class ThresholdScan:
    l_values: tuple
    divergent: tuple
    last_finite: float | None
    first_divergent: float | None

    def bracket_width(self) -> float | None:
        if self.last_finite is None or self.first_divergent is None:
            return None
        return self.first_divergent - self.last_finite

    def to_json(self) -> dict:
        return {
            "l_values": list(self.l_values),
            "divergent": list(self.divergent),
            "last_finite": self.last_finite,
            "first_divergent": self.first_divergent,
        }


def threshold_scan(
    r: float,
    q: float,
    l_values,
    probe_x: float = 0.0,
    y_radius: float = 40.0,
    ny: int = 1601,
) -> ThresholdScan:
    """Run the convolution tail monitor for symbols e^{l<x>^q} against the
    sub-Gaussian window pair e^{-r<x>^q}, for each candidate growth l.

    The divergence transition should bracket the admissibility threshold
    2r; the scan reports the verdict per l plus the bracketing pair.
    """
    w = subgaussian(r, q)
    yg = Grid1D.symmetric(y_radius, ny)
    ys = yg.points
    results = []
    for l in l_values:
        profile = y_tail_profile(l * bracket(ys) ** q, w, w, yg, probe_x)
        divergent, _ = _tail_verdict(profile)
        results.append(bool(divergent))
    last_finite = None
    first_divergent = None
    for l, d in zip(l_values, results):
        if not d:
            last_finite = l if last_finite is None else max(last_finite, l)
    for l, d in sorted(zip(l_values, results)):
        if d:
            first_divergent = l
            break
    return ThresholdScan(tuple(l_values), tuple(results), last_finite, first_divergent)
