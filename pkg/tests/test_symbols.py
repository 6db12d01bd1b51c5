"""Tensor symbols: evaluation, certificates and admissibility logic."""

import json
import math

import numpy as np
import pytest

from phasequant.errors import InvalidParameterError
from phasequant.numerics import Grid1D, SampledFunction
from phasequant.symbols import (
    GrowthFactor,
    ScalarForm,
    SymbolTerm,
    TemperedFactor,
    TensorSymbol,
    UltradiffOp,
    admissibility,
    class_bound_check,
    symbol_eval,
)
from phasequant.weights import gevrey_sequence
from phasequant.windows import bracket, doubleexp, gaussian, subgaussian


def single_term(x_factor, gtilde=None, x_op=None, p_tilde=None):
    return TensorSymbol(
        (
            SymbolTerm(
                x_op or UltradiffOp.identity(),
                x_factor,
                TemperedFactor(
                    gtilde or ScalarForm("gauss", a=math.pi),
                    p_tilde or UltradiffOp.identity(),
                ),
            ),
        )
    )


class TestEvaluation:
    def test_exppower_times_gaussian_at_origin(self):
        a = single_term(GrowthFactor("exppower", l=1.0, q=1.0))
        # e^{<0>} * e^{0} = e
        assert symbol_eval(a, 0.0, 0.0).to_complex() == pytest.approx(math.e)

    def test_doubleexp_growth_logmag(self):
        a = single_term(GrowthFactor("doubleexp", l=0.5, q=1.0))
        v = symbol_eval(a, 10.0, 0.0)
        assert v.logmag == pytest.approx(math.exp(0.5 * math.sqrt(101.0)), rel=1e-14)

    def test_term_linearity(self):
        t1 = single_term(GrowthFactor("exppower", l=1.0, q=1.0))
        t2 = single_term(GrowthFactor("exppower", l=0.5, q=1.0))
        both = TensorSymbol(t1.terms + t2.terms)
        z = symbol_eval(both, 0.7, 0.4).to_complex()
        z1 = symbol_eval(t1, 0.7, 0.4).to_complex()
        z2 = symbol_eval(t2, 0.7, 0.4).to_complex()
        assert z == pytest.approx(z1 + z2, rel=1e-12)

    def test_empty_symbol_rejected(self):
        with pytest.raises(InvalidParameterError):
            TensorSymbol(())

    def test_operator_on_frequency_factor(self):
        # D^2 gtilde for a gaussian: -(d^2/dxi^2) e^{-pi xi^2}|_0 = 2 pi
        op = UltradiffOp((0.0, 0.0, 1.0))
        a = single_term(
            GrowthFactor("exppower", l=1.0, q=1.0), p_tilde=op
        )
        v = symbol_eval(a, 0.0, 0.0).to_complex()
        assert v == pytest.approx(math.e * 2.0 * math.pi, rel=1e-6)


class TestGrowthFactors:
    def test_envelope_certificate_enforced(self):
        g = Grid1D.symmetric(4.0, 65)
        f = SampledFunction.from_complex(g, np.exp(2.0 * bracket(g.points)))
        with pytest.raises(InvalidParameterError):
            GrowthFactor("sampled", samples=f, l=1.0, q=1.0)
        ok = GrowthFactor("sampled", samples=f, l=2.0, q=1.0)
        assert not ok.is_mild()

    def test_bounded_tag_is_mild(self):
        g = Grid1D.symmetric(4.0, 65)
        f = SampledFunction.from_complex(g, np.cos(g.points) * np.exp(-g.points**2))
        fac = GrowthFactor("sampled", samples=f, l=0.0)
        assert fac.is_mild()

    def test_doubleexp_l_domain(self):
        with pytest.raises(InvalidParameterError):
            GrowthFactor("doubleexp", l=1.5, q=1.0)


class TestClassBound:
    def test_identity(self):
        c, l = class_bound_check(UltradiffOp.identity(), gevrey_sequence(1.0))
        assert c == 1.0 and l == 1.0

    def test_reciprocal_weights(self):
        seq = gevrey_sequence(1.0)
        op = UltradiffOp(
            tuple(1.0 / math.exp(seq.log_values[a]) for a in range(6))
        )
        c, l = class_bound_check(op, seq)
        assert c == pytest.approx(1.0) and l == pytest.approx(1.0)

    def test_geometric_growth(self):
        seq = gevrey_sequence(1.0)
        op = UltradiffOp(
            tuple(2.0**a / math.exp(seq.log_values[a]) for a in range(6))
        )
        _, l = class_bound_check(op, seq)
        assert l == pytest.approx(2.0)

    def test_order_cap(self):
        with pytest.raises(InvalidParameterError):
            UltradiffOp(tuple(range(10)))


class TestAdmissibility:
    W = subgaussian(1.0, 1.0)

    def test_below_threshold(self):
        a = single_term(GrowthFactor("exppower", l=1.5, q=1.0))
        v = admissibility(a, self.W, self.W)
        assert v.admissible is True
        assert v.threshold == pytest.approx(2.0)

    def test_above_threshold(self):
        a = single_term(GrowthFactor("exppower", l=2.5, q=1.0))
        assert admissibility(a, self.W, self.W).admissible is False

    def test_at_threshold_excluded(self):
        a = single_term(GrowthFactor("exppower", l=2.0, q=1.0))
        assert admissibility(a, self.W, self.W).admissible is False

    def test_min_rate_rule(self):
        a = single_term(GrowthFactor("exppower", l=1.5, q=1.0))
        v = admissibility(a, subgaussian(0.6, 1.0), self.W)
        assert v.admissible is False and v.threshold == pytest.approx(1.2)

    def test_monotone_in_l(self):
        # decreasing l never flips admissible -> not admissible
        verdicts = [
            admissibility(
                single_term(GrowthFactor("exppower", l=l, q=1.0)), self.W, self.W
            ).admissible
            for l in (2.4, 1.9, 1.2, 0.4)
        ]
        for earlier, later in zip(verdicts, verdicts[1:]):
            assert not (earlier is True and later is False)
        assert verdicts[-1] is True and verdicts[0] is False

    def test_doubleexp_windows(self):
        wd = doubleexp(1.0, 1.0)
        good = single_term(GrowthFactor("doubleexp", l=0.5, q=1.0))
        assert admissibility(good, wd, wd).admissible is True
        bad = single_term(GrowthFactor("doubleexp", l=0.99, q=2.0))
        assert admissibility(bad, wd, wd).admissible is False
        power = single_term(GrowthFactor("exppower", l=5.0, q=1.0))
        assert admissibility(power, wd, wd).admissible is True

    def test_doubleexp_growth_vs_subgauss_windows(self):
        a = single_term(GrowthFactor("doubleexp", l=0.1, q=1.0))
        assert admissibility(a, self.W, self.W).admissible is False

    def test_mixed_families_unknown(self):
        a = single_term(GrowthFactor("exppower", l=0.5, q=1.0))
        v = admissibility(a, self.W, doubleexp(1.0, 1.0))
        assert v.admissible is None

    def test_gaussian_maps_to_q2(self):
        a = single_term(GrowthFactor("exppower", l=1.0, q=2.0))
        v = admissibility(a, gaussian(1.0), gaussian(1.0))
        assert v.admissible is True
        assert v.threshold == pytest.approx(2.0 * math.pi)

    def test_slower_power_always_passes(self):
        a = single_term(GrowthFactor("exppower", l=9.0, q=1.0))
        v = admissibility(a, gaussian(1.0), gaussian(1.0))  # q = 2 windows
        assert v.admissible is True


class TestJson:
    def test_roundtrip(self):
        a = single_term(
            GrowthFactor("exppower", l=1.5, q=1.0),
            gtilde=ScalarForm("gauss", a=math.pi),
            x_op=UltradiffOp((1.0, 0.5j)),
        )
        back = TensorSymbol.from_json(json.loads(json.dumps(a.to_json())))
        assert back.terms[0].x_factor.l == 1.5
        assert back.terms[0].x_op.coeffs == a.terms[0].x_op.coeffs
        v0 = symbol_eval(a, 0.3, 0.2).to_complex()
        v1 = symbol_eval(back, 0.3, 0.2).to_complex()
        assert v0 == pytest.approx(v1, rel=1e-12)
