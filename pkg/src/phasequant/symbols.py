"""Tensor-sum symbols and their admissibility against window pairs.

A symbol is a finite sum of terms (P(D_x) f)(x) (x) g(xi) where f carries
certified super-exponential growth, g = Ptilde(D) gtilde with gtilde of
ultrapolynomial growth, and P, Ptilde are finite truncations of
infinite-order operators whose coefficients decay like L^alpha / M_alpha.

Admissibility of such a symbol for a window pair is a closed decision:
exponential-power growth e^{l<x>^q} needs l < 2r against windows decaying
like e^{-r<x>^q}, and double-exponential growth exp(e^{l<x>^q}) needs
l < 1 against windows exp(-t e^{<x>^q}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidParameterError, OverflowRefusalError
from .numerics import (
    NEG_INF,
    LogComplex,
    SampledFunction,
    finite_diff,
    wrap_phase,
)
from .weights import WeightSequence
from .windows import WindowSpec, bracket


@dataclass(frozen=True)
class ScalarForm:
    """Small closed-form family used for probes and frequency factors.

    kinds: ``const`` (value c), ``gauss`` (c * e^{-a x^2}),
    ``exppower`` (e^{s <x>^q}, either sign of s),
    ``doubleexp`` (e^{s e^{<x>^q}}, either sign of s).
    """

    kind: str
    c: complex = 1.0
    a: float = math.pi
    s: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        if self.kind not in ("const", "gauss", "exppower", "doubleexp"):
            raise InvalidParameterError(f"unknown form {self.kind!r}")
        if self.kind == "gauss" and not self.a > 0:
            raise InvalidParameterError("gauss needs a > 0")

    def log_eval_array(self, xs):
        xs = np.asarray(xs, dtype=float)
        base = LogComplex.from_complex(self.c)
        if self.kind == "const":
            lm = np.full(xs.shape, base.logmag)
        elif self.kind == "gauss":
            lm = base.logmag - self.a * xs**2
        elif self.kind == "exppower":
            lm = base.logmag + self.s * bracket(xs) ** self.q
        else:
            lm = base.logmag + self.s * np.exp(bracket(xs) ** self.q)
        ph = np.full(xs.shape, base.phase)
        return lm, np.where(np.isfinite(lm), ph, 0.0)

    def linear_callable(self):
        def fn(x: float) -> complex:
            lm, ph = self.log_eval_array(np.array([x]))
            # flush deep underflow to exact zero: differencing subnormals
            # yields noise, and these magnitudes cannot matter downstream
            if lm[0] < -600.0:
                return 0.0
            if lm[0] > 700.0:
                raise OverflowRefusalError(
                    f"form value logmag {lm[0]:.3g} beyond linear range at x={x!r}"
                )
            return math.exp(lm[0]) * complex(math.cos(ph[0]), math.sin(ph[0]))

        return fn

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "const" or self.c != 1.0:
            out["c"] = [self.c.real, complex(self.c).imag]
        if self.kind == "gauss":
            out["a"] = self.a
        if self.kind in ("exppower", "doubleexp"):
            out["s"] = self.s
            out["q"] = self.q
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ScalarForm":
        c = data.get("c", 1.0)
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        return cls(
            kind=data["kind"],
            c=c,
            a=data.get("a", math.pi),
            s=data.get("s", 0.0),
            q=data.get("q", 1.0),
        )


@dataclass(frozen=True)
class UltradiffOp:
    """Finite truncation (order <= 8) of an ultradifferential operator.

    Applies sum_alpha c_alpha D^alpha with D = -i d/dx; the class
    certificate |c_alpha| <= C L^alpha / M_alpha covers the stored range
    only, which is all a numerical artifact can assert.
    """

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(complex(c) for c in self.coeffs)
        if not cs or len(cs) > 9:
            raise InvalidParameterError("operator order must be in 0..8")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def identity(cls) -> "UltradiffOp":
        return cls((1.0,))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def is_identity(self) -> bool:
        return self.order == 0 and self.coeffs[0] == 1.0

    def apply_closed_form(self, form, xs) -> tuple[np.ndarray, np.ndarray]:
        """(logmag, phase) of sum_a c_a D^a form at points xs.

        Derivatives come from Richardson finite differences of the linear
        values, so the form must stay within double range on the points.
        """
        xs = np.asarray(xs, dtype=float)
        if self.is_identity():
            return form.log_eval_array(xs)
        fn = form.linear_callable()
        out = np.zeros(xs.shape, dtype=complex)
        for alpha, c in enumerate(self.coeffs):
            if c == 0:
                continue
            dfac = c * (-1j) ** alpha
            for j, x in enumerate(xs.ravel()):
                val, _ = finite_diff(fn, float(x), alpha)
                out.ravel()[j] += dfac * val
        mag = np.abs(out)
        with np.errstate(divide="ignore"):
            lm = np.log(mag)
        return lm, np.where(mag > 0, np.angle(out), 0.0)

    def to_json(self) -> dict:
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "UltradiffOp":
        return cls(tuple(complex(re, im) for re, im in data["coeffs"]))


def class_bound_check(op: UltradiffOp, seq: WeightSequence) -> tuple[float, float]:
    """Smallest (C, L) with |c_alpha| <= C L^alpha / M_alpha on the stored range.

    C anchors the alpha = 0 coefficient (at least 1); L then covers the rest.
    """
    c0 = max(1.0, abs(op.coeffs[0]))
    log_c = math.log(c0)
    log_l = 0.0
    for alpha in range(1, op.order + 1):
        mag = abs(op.coeffs[alpha])
        if mag == 0.0:
            continue
        t = math.log(mag) + float(seq.log_values[alpha]) - log_c
        log_l = max(log_l, t / alpha)
    return c0, math.exp(log_l)


@dataclass(frozen=True)
class GrowthFactor:
    """Position factor with a certified growth class.

    kinds: ``exppower`` e^{l<x>^q} (l > 0, q >= 1),
    ``doubleexp`` exp(e^{l<x>^q}) (0 < l < 1, q > 0),
    ``sampled`` arbitrary samples with envelope tag
    |f(x)| <= e^{c_log} e^{l<x>^q} verified on the sample grid (l = 0
    tags a bounded factor).
    """

    kind: str
    l: float = 0.0
    q: float = 1.0
    samples: SampledFunction | None = None
    c_log: float = 0.0

    def __post_init__(self):
        if self.kind == "exppower":
            if not (self.l > 0 and self.q >= 1):
                raise InvalidParameterError("exppower needs l > 0, q >= 1")
        elif self.kind == "doubleexp":
            if not (0 < self.l < 1 and self.q > 0):
                raise InvalidParameterError("doubleexp growth needs 0 < l < 1, q > 0")
        elif self.kind == "sampled":
            if self.samples is None:
                raise InvalidParameterError("sampled factor needs samples")
            if self.l < 0:
                raise InvalidParameterError("envelope exponent must be >= 0")
            xs = self.samples.grid.points
            env = self.c_log + self.l * bracket(xs) ** self.q
            if np.any(self.samples.logmag > env + 1e-9):
                raise InvalidParameterError(
                    "samples violate the tagged growth envelope"
                )
        else:
            raise InvalidParameterError(f"unknown growth factor {self.kind!r}")

    def log_eval_array(self, xs):
        xs = np.asarray(xs, dtype=float)
        if self.kind == "exppower":
            return self.l * bracket(xs) ** self.q, np.zeros(xs.shape)
        if self.kind == "doubleexp":
            return np.exp(self.l * bracket(xs) ** self.q), np.zeros(xs.shape)
        from .tf import evaluate_log

        return evaluate_log(self.samples, xs)

    def as_form(self) -> ScalarForm:
        if self.kind == "exppower":
            return ScalarForm("exppower", s=self.l, q=self.q)
        if self.kind == "doubleexp":
            # exp(e^{l<x>^q}) is not itself a ScalarForm power; closed-form
            # differentiation is refused for it at evaluation time
            raise InvalidParameterError(
                "double-exponential growth has no differentiable closed form here"
            )
        raise InvalidParameterError("sampled growth factors are not closed forms")

    def is_mild(self) -> bool:
        """True when the factor is certifiably bounded on its domain."""
        return self.kind == "sampled" and self.l == 0.0

    def to_json(self) -> dict:
        out = {"kind": self.kind, "l": self.l, "q": self.q}
        if self.c_log:
            out["c_log"] = self.c_log
        return out


@dataclass(frozen=True)
class TemperedFactor:
    """Frequency factor g = Ptilde(D) gtilde with gtilde of
    ultrapolynomial growth (certificate optional, checked by the CLI)."""

    gtilde: object  # ScalarForm | SampledFunction
    p_tilde: UltradiffOp = field(default_factory=UltradiffOp.identity)
    certificate: dict | None = None

    def gtilde_log(self, xis) -> tuple[np.ndarray, np.ndarray]:
        """Raw gtilde values (the convolution route applies Ptilde to the
        kernel, not to gtilde)."""
        xis = np.asarray(xis, dtype=float)
        if isinstance(self.gtilde, SampledFunction):
            from .tf import evaluate_log

            return evaluate_log(self.gtilde, xis)
        return self.gtilde.log_eval_array(xis)

    def log_eval_array(self, xis):
        xis = np.asarray(xis, dtype=float)
        if self.p_tilde.is_identity():
            return self.gtilde_log(xis)
        if isinstance(self.gtilde, SampledFunction):
            raise InvalidParameterError(
                "non-identity operators need a closed-form gtilde"
            )
        return self.p_tilde.apply_closed_form(self.gtilde, xis)

    def to_json(self) -> dict:
        if isinstance(self.gtilde, SampledFunction):
            raise InvalidParameterError("sampled gtilde is not serializable")
        return {"gtilde": self.gtilde.to_json(), "p_tilde": self.p_tilde.to_json()}


@dataclass(frozen=True)
class SymbolTerm:
    x_op: UltradiffOp
    x_factor: GrowthFactor
    xi_factor: TemperedFactor


@dataclass(frozen=True)
class TensorSymbol:
    """Finite sum sum_j (P_j(D_x) f_j) (x) g_j(xi)."""

    terms: tuple

    def __post_init__(self):
        ts = tuple(self.terms)
        if not ts:
            raise InvalidParameterError("symbol needs at least one term")
        object.__setattr__(self, "terms", ts)

    def is_mild(self) -> bool:
        return all(t.x_factor.is_mild() for t in self.terms)

    def term_x_log(self, term: SymbolTerm, xs):
        """x-part of one term: (P(D_x) f)(x) in log form."""
        if term.x_op.is_identity():
            return term.x_factor.log_eval_array(xs)
        return term.x_op.apply_closed_form(term.x_factor.as_form(), xs)

    def eval_grid(self, xs, xis) -> tuple[np.ndarray, np.ndarray]:
        """(logmag, phase) of the symbol on the tensor grid xs x xis."""
        xs = np.asarray(xs, dtype=float)
        xis = np.asarray(xis, dtype=float)
        parts_lm = []
        parts_ph = []
        for term in self.terms:
            xlm, xph = self.term_x_log(term, xs)
            klm, kph = term.xi_factor.log_eval_array(xis)
            parts_lm.append(xlm[:, None] + klm[None, :])
            parts_ph.append(xph[:, None] + kph[None, :])
        if len(parts_lm) == 1:
            return parts_lm[0], wrap_phase(parts_ph[0])
        lm = np.stack(parts_lm, axis=-1)
        ph = np.stack(parts_ph, axis=-1)
        out_lm, out_ph, _, _ = _kernels.logc_sum_axis(
            lm.reshape(-1, len(parts_lm)), ph.reshape(-1, len(parts_lm))
        )
        shape = (xs.size, xis.size)
        return out_lm.reshape(shape), out_ph.reshape(shape)

    def eval_point(self, x: float, xi: float) -> LogComplex:
        lm, ph = self.eval_grid(np.array([x]), np.array([xi]))
        if lm[0, 0] == NEG_INF:
            return LogComplex.zero()
        return LogComplex(float(lm[0, 0]), float(ph[0, 0]))

    def to_json(self) -> dict:
        return {
            "terms": [
                {
                    "x_op": t.x_op.to_json(),
                    "x_factor": t.x_factor.to_json(),
                    "xi_factor": t.xi_factor.to_json(),
                }
                for t in self.terms
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "TensorSymbol":
        terms = []
        for t in data["terms"]:
            xf = t["x_factor"]
            if xf.get("kind") == "sampled":
                raise InvalidParameterError("sampled factors are not serializable")
            terms.append(
                SymbolTerm(
                    x_op=UltradiffOp.from_json(t.get("x_op", {"coeffs": [[1, 0]]})),
                    x_factor=GrowthFactor(
                        kind=xf["kind"],
                        l=xf.get("l", 0.0),
                        q=xf.get("q", 1.0),
                        c_log=xf.get("c_log", 0.0),
                    ),
                    xi_factor=TemperedFactor(
                        gtilde=ScalarForm.from_json(t["xi_factor"]["gtilde"]),
                        p_tilde=UltradiffOp.from_json(
                            t["xi_factor"].get("p_tilde", {"coeffs": [[1, 0]]})
                        ),
                    ),
                )
            )
        return cls(tuple(terms))


def symbol_eval(a: TensorSymbol, x: float, xi: float) -> LogComplex:
    return a.eval_point(x, xi)


@dataclass(frozen=True)
class AdmissibilityVerdict:
    admissible: bool | None  # None = unknown (unsupported combination)
    reason: str
    threshold: float | None = None
    rate: float | None = None

    def __bool__(self) -> bool:
        return self.admissible is True

    def to_json(self) -> dict:
        return {
            "admissible": self.admissible,
            "reason": self.reason,
            "threshold": self.threshold,
            "rate": self.rate,
        }


def _factor_growth(f: GrowthFactor) -> tuple[str, float, float]:
    if f.kind == "sampled":
        return ("exppower", f.l, f.q) if f.l > 0 else ("bounded", 0.0, 1.0)
    return (f.kind, f.l, f.q)


def admissibility(
    a: TensorSymbol, w1: WindowSpec, w2: WindowSpec
) -> AdmissibilityVerdict:
    """Decide whether every term's growth clears the window pair's threshold.

    Sub-Gaussian pair with common q: exponential-power factors need
    l < 2 min(r1, r2) (slower powers always pass, faster never).
    Double-exponential pair with common q: double-exponential factors need
    l < 1; merely exponential-power growth always passes.  Anything else is
    reported unknown rather than guessed.
    """
    try:
        fam1, r1, q1 = w1.decay_params()
        fam2, r2, q2 = w2.decay_params()
    except InvalidParameterError as exc:
        return AdmissibilityVerdict(None, f"window without decay certificate: {exc}")
    if fam1 != fam2:
        return AdmissibilityVerdict(None, "mixed window families are undecided here")
    if abs(q1 - q2) > 1e-12:
        return AdmissibilityVerdict(None, "windows with different q are undecided")
    q = q1
    if fam1 == "subgaussian":
        rate = min(r1, r2)
        threshold = 2.0 * rate
        for j, t in enumerate(a.terms):
            kind, l, qf = _factor_growth(t.x_factor)
            if kind == "bounded":
                continue
            if kind == "doubleexp":
                return AdmissibilityVerdict(
                    False,
                    f"term {j}: double-exponential growth against "
                    "sub-Gaussian windows",
                    threshold,
                    rate,
                )
            if qf > q + 1e-12:
                return AdmissibilityVerdict(
                    False,
                    f"term {j}: growth power q={qf:g} exceeds window q={q:g}",
                    threshold,
                    rate,
                )
            if abs(qf - q) <= 1e-12 and not l < threshold:
                return AdmissibilityVerdict(
                    False,
                    f"term {j}: l={l:g} is not below 2r={threshold:g}",
                    threshold,
                    rate,
                )
        return AdmissibilityVerdict(True, "all factors below the 2r threshold",
                                    threshold, rate)
    # double-exponential windows
    for j, t in enumerate(a.terms):
        kind, l, qf = _factor_growth(t.x_factor)
        if kind == "doubleexp":
            if qf > q + 1e-12:
                return AdmissibilityVerdict(
                    False, f"term {j}: inner power q={qf:g} exceeds window q={q:g}",
                    1.0, min(r1, r2),
                )
            if abs(qf - q) <= 1e-12 and not l < 1.0:
                return AdmissibilityVerdict(
                    False, f"term {j}: l={l:g} is not below 1", 1.0, min(r1, r2)
                )
    return AdmissibilityVerdict(
        True, "all factors below the double-exponential threshold", 1.0, min(r1, r2)
    )
