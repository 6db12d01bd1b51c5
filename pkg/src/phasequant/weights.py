"""Weight sequences, their defining conditions, and associated functions.

A weight sequence M_p (M_0 = 1, M_p^{1/p} -> infinity) controls derivative
growth throughout the package.  Everything is stored and evaluated as
ln M_p: the interesting sequences, Gevrey powers (p!)^sigma among them,
overflow doubles long before p reaches the default prefix length.

Condition checks on infinite-tail statements are finite-prefix certificates;
for the Gevrey family they are replaced by closed-form rules, and each
report records which kind of certificate it carries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, PrefixTooShortError

DEFAULT_PREFIX = 256

HOLDS_ON_PREFIX = "holds-on-prefix"
FAILS_AT_P = "fails-at-p"
CERTIFIED_BY_FAMILY = "certified-by-family"
REFUTED_BY_FAMILY = "refuted-by-family"


def _log_factorial(p) -> np.ndarray:
    return np.vectorize(lambda k: math.lgamma(k + 1.0))(np.asarray(p, dtype=float))


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Finite prefix of ln M_p, with an optional closed-form family tag.

    When ``family == "gevrey"`` the sequence extends beyond the stored
    prefix through ln M_p = sigma * lgamma(p+1), which the associated
    function uses whenever its supremum falls outside the prefix.
    """

    log_values: np.ndarray = field(repr=False)
    family: str | None = None
    sigma: float | None = None

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=np.float64)
        if lv.ndim != 1 or lv.size < 17:
            raise InvalidParameterError("weight sequence prefix needs p_max >= 16")
        if not np.all(np.isfinite(lv)):
            raise InvalidParameterError("all M_p must be positive and finite")
        if abs(lv[0]) > 1e-12:
            raise InvalidParameterError("M_0 must equal 1")
        # divergence proxy: M_p^{1/p} increasing over the stored tail
        p = np.arange(1, lv.size)
        root = lv[1:] / p
        tail = root[3 * len(root) // 4 :]
        if np.any(np.diff(tail) < -1e-12):
            raise InvalidParameterError("M_p^{1/p} must be eventually increasing")
        object.__setattr__(self, "log_values", lv)

    @property
    def p_max(self) -> int:
        return self.log_values.size - 1

    def log_m_ratios(self) -> np.ndarray:
        """ln m_p = ln(M_p / M_{p-1}) for p = 1..P."""
        return np.diff(self.log_values)

    def log_value(self, p: int) -> float:
        """ln M_p, using the family closed form beyond the stored prefix."""
        if p <= self.p_max:
            return float(self.log_values[p])
        if self.family == "gevrey":
            return self.sigma * math.lgamma(p + 1.0)
        raise PrefixTooShortError(f"p={p} beyond stored prefix {self.p_max}")

    def has_closed_form(self) -> bool:
        return self.family == "gevrey"

    def to_json(self) -> dict:
        out = {
            "family": self.family,
            "p_max": self.p_max,
            "log_values": [float(v) for v in self.log_values],
        }
        if self.sigma is not None:
            out["sigma"] = self.sigma
        return out

    @classmethod
    def from_json(cls, data: dict) -> "WeightSequence":
        return cls(
            np.asarray(data["log_values"], dtype=float),
            family=data.get("family"),
            sigma=data.get("sigma"),
        )


def gevrey_sequence(sigma: float, p_max: int = DEFAULT_PREFIX) -> WeightSequence:
    """The sequence M_p = (p!)^sigma, built in log space.

    ``sigma`` must be positive and ``p_max`` at least 16.
    """
    if not sigma > 0:
        raise InvalidParameterError("gevrey exponent must be positive")
    if p_max < 16:
        raise InvalidParameterError("p_max must be at least 16")
    # cumulative sum of logs rather than lgamma: keeps the prefix exactly
    # consistent with its own ratios m_p = p^sigma
    logs = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, p_max + 1)))])
    return WeightSequence(sigma * logs, family="gevrey", sigma=float(sigma))


@dataclass(frozen=True, eq=False)
class RSequence:
    """Positive, monotonically increasing sequence r_p, p = 1..P."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise InvalidParameterError("r sequence needs at least 2 terms")
        if not np.all(v > 0):
            raise InvalidParameterError("r_p must be positive")
        if np.any(np.diff(v) < -1e-15):
            raise InvalidParameterError("r_p must be monotonically increasing")
        if not v[-1] > v[0]:
            raise InvalidParameterError("r_p must grow over the prefix")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_power(cls, c: float, expo: float, p_max: int = DEFAULT_PREFIX):
        p = np.arange(1, p_max + 1, dtype=float)
        return cls(c * p**expo)

    @property
    def p_max(self) -> int:
        return self.values.size

    def log_cumprod(self) -> np.ndarray:
        """ln prod_{j<=p} r_j for p = 0..P (empty product = 1)."""
        return np.concatenate([[0.0], np.cumsum(np.log(self.values))])


class AssociatedFunction:
    """M(rho) = sup_p ln(rho^p / M_p), evaluated exactly on the prefix.

    With an ``RSequence`` attached this is N_{r_p}, the associated function
    of the scaled sequence M_p * prod_{j<=p} r_j.  Instances are immutable
    and evaluation is cached, so they are safe to share across threads.
    """

    def __init__(self, seq: WeightSequence, rs: RSequence | None = None):
        self.seq = seq
        self.rs = rs
        scaled = seq.log_values.copy()
        if rs is not None:
            p_stop = min(seq.p_max, rs.p_max)
            scaled = scaled[: p_stop + 1] + rs.log_cumprod()[: p_stop + 1]
        self._log_m = scaled
        self._ratios = np.diff(scaled)
        self._ratios_sorted = bool(np.all(np.diff(self._ratios) >= -1e-12))
        self._eval = lru_cache(maxsize=4096)(self._eval_uncached)

    def _closed_form_sup(self, log_rho: float) -> float:
        # Gevrey only: ln m_p = sigma*ln p, so the argmax sits near
        # rho^(1/sigma); check the two integer neighbours.
        sigma = self.seq.sigma
        p_star = math.exp(log_rho / sigma)
        best = 0.0
        for p in {math.floor(p_star), math.ceil(p_star), math.floor(p_star) + 1}:
            if p < 1:
                continue
            s = p * log_rho - sigma * math.lgamma(p + 1.0)
            best = max(best, s)
        return best

    def _eval_uncached(self, rho: float) -> float:
        if rho < 0:
            raise InvalidParameterError("associated function needs rho >= 0")
        if rho == 0.0:
            return 0.0
        log_rho = math.log(rho)
        if self._ratios_sorted:
            p_star = int(np.searchsorted(self._ratios, log_rho, side="right"))
        else:
            p_star = int(np.argmax(log_rho * np.arange(self._log_m.size) - self._log_m))
        if p_star >= self._log_m.size - 1:
            if self.rs is None and self.seq.has_closed_form():
                return self._closed_form_sup(log_rho)
            raise PrefixTooShortError(
                f"supremum at rho={rho:g} attained at the prefix end "
                f"(p_max={self._log_m.size - 1}); value would be an underestimate"
            )
        return max(0.0, p_star * log_rho - float(self._log_m[p_star]))

    def eval(self, rho: float) -> float:
        return self._eval(float(rho))

    def eval_many(self, rhos) -> np.ndarray:
        return np.array([self.eval(r) for r in np.asarray(rhos, dtype=float)])

    __call__ = eval


def assoc_eval(af: AssociatedFunction, rho: float) -> float:
    return af.eval(rho)


def assoc_subadd_check(af: AssociatedFunction, lam: float, rho: float) -> bool:
    """Truth of M(lam + rho) <= ln 2 + M(2 lam) + M(2 rho)."""
    if lam < 0 or rho < 0:
        raise InvalidParameterError("subadditivity check needs lam, rho >= 0")
    lhs = af.eval(lam + rho)
    rhs = math.log(2.0) + af.eval(2.0 * lam) + af.eval(2.0 * rho)
    return lhs <= rhs + 1e-12


def nrp_eval(seq: WeightSequence, rs: RSequence, rho: float) -> float:
    """N_{r_p}(rho): associated function of the r-scaled sequence."""
    return AssociatedFunction(seq, rs).eval(rho)


@dataclass(frozen=True)
class ConditionVerdict:
    status: str
    conclusive: bool
    detail: dict

    def holds(self) -> bool:
        return self.status in (HOLDS_ON_PREFIX, CERTIFIED_BY_FAMILY)


@dataclass(frozen=True)
class ConditionReport:
    m1: ConditionVerdict
    m2: ConditionVerdict
    m3_prime: ConditionVerdict
    m3: ConditionVerdict

    def to_json(self) -> dict:
        return {
            name: {"status": v.status, "conclusive": v.conclusive, **v.detail}
            for name, v in {
                "M1": self.m1,
                "M2": self.m2,
                "M3prime": self.m3_prime,
                "M3": self.m3,
            }.items()
        }


def _check_m1(lv: np.ndarray) -> ConditionVerdict:
    lhs = 2.0 * lv[1:-1]
    rhs = lv[:-2] + lv[2:]
    bad = np.flatnonzero(lhs > rhs + 1e-12)
    if bad.size:
        p = int(bad[0] + 1)
        return ConditionVerdict(FAILS_AT_P, True, {"p": p})
    return ConditionVerdict(HOLDS_ON_PREFIX, True, {})


def _check_m2(lv: np.ndarray) -> ConditionVerdict:
    # smallest H with c0 anchored at 1:   excess_p <= ln c0 + p ln H
    pmax = lv.size - 1
    excess = np.empty(pmax + 1)
    excess[0] = 0.0
    for p in range(1, pmax + 1):
        q = np.arange(0, p + 1)
        excess[p] = lv[p] - np.min(lv[q] + lv[p - q])
    ps = np.arange(1, pmax + 1, dtype=float)
    log_h = max(0.0, float(np.max(excess[1:] / ps)))
    log_c0 = max(0.0, float(np.max(excess[1:] - ps * log_h)))
    return ConditionVerdict(
        HOLDS_ON_PREFIX, True, {"c0": math.exp(log_c0), "H": math.exp(log_h)}
    )


def _check_m3(seq: WeightSequence) -> tuple[ConditionVerdict, ConditionVerdict]:
    if seq.family == "gevrey":
        if seq.sigma > 1.0:
            v = ConditionVerdict(CERTIFIED_BY_FAMILY, True, {"sigma": seq.sigma})
            return v, v
        v = ConditionVerdict(REFUTED_BY_FAMILY, True, {"sigma": seq.sigma})
        return v, v
    # prefix-only: the tail sums are truncated, so any verdict is
    # non-conclusive; report the fitted c0 for what the prefix shows.
    inv_m = np.exp(-seq.log_m_ratios())  # M_{p-1}/M_p, p = 1..P
    tails = np.cumsum(inv_m[::-1])[::-1]  # tails[p-1] = sum_{j>=p} 1/m_j
    pmax = seq.p_max
    c0 = 0.0
    for p in range(1, pmax):
        bound = p * math.exp(-seq.log_m_ratios()[p])  # p * M_p / M_{p+1}
        c0 = max(c0, tails[p] / bound)
    m3 = ConditionVerdict(HOLDS_ON_PREFIX, False, {"c0": max(1.0, c0)})
    m3p = ConditionVerdict(
        HOLDS_ON_PREFIX, False, {"partial_sum": float(np.sum(inv_m))}
    )
    return m3p, m3


def check_conditions(seq: WeightSequence) -> ConditionReport:
    """Per-condition verdicts for (M.1), (M.2), (M.3)' and (M.3).

    Exact prefix checks for (M.1); smallest fitting (c0, H) for (M.2);
    closed-form rules for tagged Gevrey sequences on the tail conditions,
    otherwise a prefix verdict flagged non-conclusive.
    """
    lv = seq.log_values
    m3p, m3 = _check_m3(seq)
    return ConditionReport(_check_m1(lv), _check_m2(lv), m3p, m3)


@dataclass(frozen=True)
class GrowthReport:
    sup_log: float
    bounded: bool
    h: float

    @property
    def sup(self) -> float:
        return math.exp(self.sup_log) if self.sup_log < 700 else math.inf


def ultrapoly_growth_check(f, seq: WeightSequence, h: float) -> GrowthReport:
    """Sup over the grid of |f(x)| e^{-M(h|x|)} plus a tail verdict.

    ``bounded`` is False when the outer 10% of the grid carries a strictly
    larger weighted value than the interior: on-grid evidence that the
    weighted function keeps growing.
    """
    if not h > 0:
        raise InvalidParameterError("h must be positive")
    af = AssociatedFunction(seq)
    xs = f.grid.points
    g = f.logmag - af.eval_many(h * np.abs(xs))
    radius = np.max(np.abs(xs))
    outer = np.abs(xs) > 0.9 * radius
    interior_max = float(np.max(g[~outer])) if np.any(~outer) else -math.inf
    outer_max = float(np.max(g[outer])) if np.any(outer) else -math.inf
    bounded = not (outer_max > interior_max + 1e-9)
    return GrowthReport(float(np.max(g)), bounded, h)


def fit_growth_exponent(xs, ys) -> float:
    """Exponent alpha of the power-law fit y ~= A * x^alpha.

    Least squares in linear space (not log-log): the additive logarithmic
    corrections to the associated function at desk-scale arguments would
    otherwise bias the slope.  A is eliminated in closed form and alpha
    found by golden-section search.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)

    def residual(alpha: float) -> float:
        basis = xs**alpha
        a = np.dot(ys, basis) / np.dot(basis, basis)
        return float(np.sum((ys - a * basis) ** 2))

    lo, hi = 0.05, 5.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = residual(c), residual(d)
    for _ in range(200):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = residual(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = residual(d)
    return 0.5 * (lo + hi)


def save_weight_sequence(seq: WeightSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(seq.to_json(), fh, sort_keys=True)


def load_weight_sequence(path) -> WeightSequence:
    with open(path, encoding="utf-8") as fh:
        return WeightSequence.from_json(json.load(fh))
