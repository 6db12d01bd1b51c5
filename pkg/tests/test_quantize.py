"""Convolution route, Weyl pairing and both localisation routes."""

import math

import numpy as np
import pytest

from phasequant.errors import (
    DivergentIntegrandError,
    GridCompatibilityError,
    MildModeRefusalError,
    NotAdmissibleError,
)
from phasequant.numerics import Grid1D, PhaseGrid, SampledFunction, quad, to_linear
from phasequant.quantize import (
    ConvolutionPlan,
    WeylSymbol,
    convolve_symbol_wigner,
    gelfand_bound_fit,
    locop_apply_mild,
    locop_direct,
    locop_via_weyl,
    weyl_pair,
)
from phasequant.symbols import (
    GrowthFactor,
    ScalarForm,
    SymbolTerm,
    TemperedFactor,
    TensorSymbol,
    UltradiffOp,
)
from phasequant.tf import gabor_plan, wigner
from phasequant.weights import RSequence, gevrey_sequence
from phasequant.windows import gaussian, subgaussian

SIG = Grid1D.symmetric(8.0, 513)
TS = SIG.points


def gauss_probe(shift=0.0, modulation=0.0, odd=False):
    vals = np.exp(-np.pi * (TS - shift) ** 2)
    if odd:
        vals = TS * vals
    if modulation:
        vals = vals * np.exp(2j * np.pi * modulation * TS)
    return SampledFunction.from_complex(SIG, vals)


def term(x_factor, gtilde=None, x_op=None, p_tilde=None):
    return SymbolTerm(
        x_op or UltradiffOp.identity(),
        x_factor,
        TemperedFactor(
            gtilde or ScalarForm("gauss", a=math.pi),
            p_tilde or UltradiffOp.identity(),
        ),
    )


def bounded_factor(fn=None):
    vals = np.ones(SIG.n) if fn is None else fn(TS)
    f = SampledFunction.from_complex(SIG, vals)
    return GrowthFactor("sampled", samples=f, l=0.0, c_log=float(np.max(f.logmag)))


MILD_GAUSS = TensorSymbol((term(bounded_factor(lambda t: np.exp(-np.pi * t**2))),))
EXP15 = TensorSymbol((term(GrowthFactor("exppower", l=1.5, q=1.0)),))


class TestConvolution:
    def test_against_independent_oracle(self):
        # f == 1, gtilde gaussian, gaussian windows: compare against nested
        # scipy adaptive quadrature of iint f(y) g(eta) W(x-y, xi-eta)
        from scipy.integrate import quad as squad

        a = TensorSymbol((term(bounded_factor()),))
        wg = gaussian(1.0)
        plan = ConvolutionPlan.build(4.0, 33, 4.0, 33, y_radius=10.0, eta_radius=8.0)
        weyl = convolve_symbol_wigner(a, wg, wg, plan)

        def oracle(x, xi):
            # W(u, v) for the e^{-pi t^2} pair is sqrt2 e^{-2pi u^2} e^{-2pi v^2}
            inner = squad(
                lambda eta: math.exp(-math.pi * eta**2)
                * math.exp(-2 * math.pi * (xi - eta) ** 2),
                -12, 12, limit=200,
            )[0]
            outer = squad(
                lambda y: math.exp(-2 * math.pi * (x - y) ** 2), -12, 12, limit=200
            )[0]
            return math.sqrt(2.0) * inner * outer

        bv = to_linear(weyl.b)
        xs, ks = plan.out.xg.points, plan.out.kg.points
        for ix in (6, 16, 26):
            for ik in (6, 16, 26):
                assert bv[ix, ik] == pytest.approx(
                    oracle(xs[ix], ks[ik]), rel=1e-7
                )

    def test_constant_symbol_collapses_to_window_overlap(self):
        a = TensorSymbol((term(bounded_factor(), gtilde=ScalarForm("const", c=1.0)),))
        w1, w2 = gaussian(1.0), subgaussian(2.0, 2.0)
        plan = ConvolutionPlan.build(6.0, 49, 6.0, 49, y_radius=12.0, eta_radius=8.0)
        weyl = convolve_symbol_wigner(a, w2, w1, plan)
        gg = Grid1D.symmetric(12.0, 4001)
        lm1, _ = w1.log_eval_array(gg.points)
        lm2, _ = w2.log_eval_array(gg.points)
        overlap = np.trapezoid(np.exp(lm1 + lm2), gg.points)
        vals = to_linear(weyl.b)
        assert np.allclose(vals.real, overlap, rtol=1e-7)
        assert np.max(np.abs(vals.imag)) <= 1e-12 * overlap

    def test_super_exponential_growth_stays_bounded_by_symbol_rate(self):
        w = subgaussian(1.0, 1.0)
        plan = ConvolutionPlan.build(8.0, 65, 8.0, 65, y_radius=60.0, eta_radius=8.0)
        weyl = convolve_symbol_wigner(EXP15, w, w, plan)
        assert np.all(np.isfinite(weyl.b.logmag))
        xs = plan.out.xg.points
        i0 = (plan.out.kg.n - 1) // 2
        gap = weyl.b.logmag[:, i0] - 1.5 * np.sqrt(1.0 + xs**2)
        assert np.max(gap) < 1.0  # log b(x, 0) - 1.5<x> bounded above

    def test_admissibility_gate(self):
        a = TensorSymbol((term(GrowthFactor("exppower", l=2.5, q=1.0)),))
        w = subgaussian(1.0, 1.0)
        plan = ConvolutionPlan.build(4.0, 33, 4.0, 33, y_radius=40.0, eta_radius=8.0)
        with pytest.raises(NotAdmissibleError):
            convolve_symbol_wigner(a, w, w, plan)
        with pytest.raises(DivergentIntegrandError):
            convolve_symbol_wigner(a, w, w, plan, enforce_admissibility=False)

    def test_plan_alignment_validated(self):
        with pytest.raises(GridCompatibilityError):
            ConvolutionPlan(
                PhaseGrid(Grid1D.symmetric(4.0, 33), Grid1D.symmetric(4.0, 33)),
                Grid1D.symmetric(5.0, 33),  # spacing differs from out.xg
                Grid1D.symmetric(6.0, 65),
            )


class TestGelfandFit:
    PLAN = ConvolutionPlan.build(4.0, 33, 6.0, 49, y_radius=10.0, eta_radius=8.0)

    def test_gaussian_case_feasible_with_slow_candidates(self):
        wg = gaussian(1.0)
        a = TensorSymbol((term(bounded_factor()),))
        weyl = convolve_symbol_wigner(a, wg, wg, self.PLAN)
        seq = gevrey_sequence(2.0)
        cands = [RSequence.from_power(c, 1.0, seq.p_max) for c in (1.0, 4.0)]
        fit = gelfand_bound_fit(weyl, seq, 3.0, cands)
        assert fit.feasible
        # b decays in xi here, so the sharper e^{-M} envelope also fits
        assert fit.decay_feasible and fit.decay_c > 0

    def test_super_exponential_b_still_decays_in_xi(self):
        # the gaussian gtilde keeps b xi-integrable even when it blows up
        # in x: the sharper decay envelope must be reported feasible
        w = subgaussian(1.0, 1.0)
        plan = ConvolutionPlan.build(6.0, 49, 6.0, 49, y_radius=56.0, eta_radius=8.0)
        weyl = convolve_symbol_wigner(EXP15, w, w, plan)
        seq = gevrey_sequence(2.0)
        fit = gelfand_bound_fit(
            weyl, seq, 4.0, [RSequence.from_power(1.0, 1.0, seq.p_max)]
        )
        assert fit.decay_feasible and fit.decay_c > 0

    def test_constant_b_needs_unit_constant(self):
        pg = PhaseGrid(Grid1D.symmetric(4.0, 33), Grid1D.symmetric(4.0, 33))
        b = WeylSymbol(SampledFunction.from_complex(pg, np.ones(pg.shape)))
        seq = gevrey_sequence(2.0)
        fit = gelfand_bound_fit(b, seq, 3.0, [RSequence.from_power(1.0, 1.0, 256)])
        assert fit.feasible and fit.C == pytest.approx(1.0)


class TestWeylPair:
    BGRID = PhaseGrid(Grid1D.symmetric(8.0, 65), Grid1D.symmetric(8.0, 129))

    def test_identity_symbol_collapses(self):
        b = WeylSymbol(
            SampledFunction.from_complex(self.BGRID, np.ones(self.BGRID.shape))
        )
        psi, theta = gauss_probe(0.3), gauss_probe(-0.2, modulation=0.25)
        res = weyl_pair(b, psi, theta)
        truth = np.trapezoid(to_linear(psi) * to_linear(theta), TS)
        assert res.value.to_complex() == pytest.approx(truth, rel=1e-6)

    def test_weyl_wigner_duality(self):
        X, K = np.meshgrid(
            self.BGRID.xg.points, self.BGRID.kg.points, indexing="ij"
        )
        b = SampledFunction.from_complex(self.BGRID, np.exp(-np.pi * (X**2 + K**2)))
        psi, theta = gauss_probe(0.3), gauss_probe(-0.2, modulation=0.25)
        lhs = weyl_pair(WeylSymbol(b), psi, theta).value.to_complex()
        W = wigner(psi, theta.conj(), self.BGRID)
        rhs = quad(
            SampledFunction(self.BGRID, b.logmag + W.logmag, b.phase + W.phase)
        ).to_complex()
        assert abs(lhs - rhs) <= 1e-6 * abs(lhs)

    def test_parity_annihilation(self):
        X, K = np.meshgrid(
            self.BGRID.xg.points, self.BGRID.kg.points, indexing="ij"
        )
        b = SampledFunction.from_complex(self.BGRID, np.exp(-np.pi * (X**2 + K**2)))
        res = weyl_pair(WeylSymbol(b), gauss_probe(odd=True), gauss_probe())
        assert res.value.logmag < math.log(1e-8)

    def test_damped_route_on_undecayed_xi_boundary(self):
        # a xi window too narrow for the pairing to have decayed: the
        # damped route engages and its extrapolated value still matches the
        # analytic collapse <1^w psi, theta> = int psi theta
        narrow = PhaseGrid(self.BGRID.xg, Grid1D.symmetric(1.75, 29))
        b = WeylSymbol(
            SampledFunction.from_complex(narrow, np.ones(narrow.shape))
        )
        psi, theta = gauss_probe(0.2), gauss_probe(-0.1)
        res = weyl_pair(b, psi, theta, eps0=0.1)
        assert res.route == "damped"
        assert res.diagnostics["spread"] <= 1e-3
        assert res.diagnostics["epsilons"] == [0.4, 0.2, 0.1]
        truth = np.trapezoid(to_linear(psi) * to_linear(theta), TS)
        assert res.value.to_complex() == pytest.approx(truth, rel=1e-3)

    def test_pairing_linear_in_b_psi_theta(self):
        X, K = np.meshgrid(
            self.BGRID.xg.points, self.BGRID.kg.points, indexing="ij"
        )
        b1 = SampledFunction.from_complex(self.BGRID, np.exp(-np.pi * (X**2 + K**2)))
        b2 = SampledFunction.from_complex(
            self.BGRID, np.exp(-2.0 * (X**2 + K**2)) * (0.5 - 0.25j)
        )
        bsum = SampledFunction.from_complex(
            self.BGRID, to_linear(b1) + to_linear(b2)
        )
        psi, theta = gauss_probe(0.2), gauss_probe(-0.3)
        v1 = weyl_pair(WeylSymbol(b1), psi, theta).value.to_complex()
        v2 = weyl_pair(WeylSymbol(b2), psi, theta).value.to_complex()
        vs = weyl_pair(WeylSymbol(bsum), psi, theta).value.to_complex()
        assert vs == pytest.approx(v1 + v2, rel=1e-10)
        # linearity in psi
        psi2 = gauss_probe(-0.4, modulation=0.2)
        psisum = SampledFunction.from_complex(
            SIG, to_linear(psi) + 2.0 * to_linear(psi2)
        )
        va = weyl_pair(WeylSymbol(b1), psisum, theta).value.to_complex()
        vb = (
            weyl_pair(WeylSymbol(b1), psi, theta).value.to_complex()
            + 2.0 * weyl_pair(WeylSymbol(b1), psi2, theta).value.to_complex()
        )
        assert va == pytest.approx(vb, rel=1e-10)

    def test_conjugate_symmetry_real_b(self):
        X, K = np.meshgrid(
            self.BGRID.xg.points, self.BGRID.kg.points, indexing="ij"
        )
        b = SampledFunction.from_complex(self.BGRID, np.exp(-np.pi * (X**2 + K**2)))
        psi = gauss_probe(0.3, modulation=0.4)
        val = weyl_pair(WeylSymbol(b), psi, psi.conj()).value.to_complex()
        assert abs(val.imag) <= 1e-8 * abs(val)

    def test_coarse_samples_rejected(self):
        coarse = Grid1D.symmetric(8.0, 129)  # dx = 1/8 > 1/(4*8)
        psi = SampledFunction.from_complex(
            coarse, np.exp(-np.pi * coarse.points**2)
        )
        b = WeylSymbol(
            SampledFunction.from_complex(self.BGRID, np.ones(self.BGRID.shape))
        )
        with pytest.raises(GridCompatibilityError):
            weyl_pair(b, psi, psi)


class TestLocopRoutes:
    CPLAN = ConvolutionPlan.build(8.0, 65, 8.0, 129, y_radius=12.0, eta_radius=8.0)

    def test_unit_symbol_reconstruction_identity(self):
        a = TensorSymbol((term(bounded_factor(), gtilde=ScalarForm("const", c=1.0)),))
        w1, w2 = gaussian(1.0), subgaussian(2.0, 2.0)
        psi, theta = gauss_probe(0.3), gauss_probe(-0.2)
        res = locop_via_weyl(a, w1, w2, psi, theta, self.CPLAN)
        gg = Grid1D.symmetric(12.0, 4001)
        lm1, _ = w1.log_eval_array(gg.points)
        lm2, _ = w2.log_eval_array(gg.points)
        overlap = np.trapezoid(np.exp(lm1 + lm2), gg.points)
        pairing = np.trapezoid(to_linear(psi) * to_linear(theta), TS)
        assert res.value.to_complex() == pytest.approx(
            overlap * pairing, rel=1e-6
        )
        # the direct route realises the same identity through the STFT
        # orthogonality relation
        rd = locop_direct(a, w1, w2, psi, theta, gabor_plan(SIG))
        assert rd.value.to_complex() == pytest.approx(
            overlap * pairing, rel=1e-6
        )

    def test_route_equivalence_on_mild_symbol(self):
        w1, w2 = gaussian(1.0), subgaussian(2.0, 2.0)
        psi, theta = gauss_probe(0.3), gauss_probe(-0.2, modulation=0.25)
        rd = locop_direct(a := MILD_GAUSS, w1, w2, psi, theta, gabor_plan(SIG))
        rw = locop_via_weyl(a, w1, w2, psi, theta, self.CPLAN)
        vd, vw = rd.value.to_complex(), rw.value.to_complex()
        assert abs(vd - vw) <= 1e-5 * abs(vd)

    def test_window_order_pinned_by_asymmetry(self):
        # swapped windows must give a different pairing when w1 != w2
        w1, w2 = gaussian(1.0), subgaussian(3.0, 2.0)
        psi, theta = gauss_probe(0.4), gauss_probe(-0.3)
        r12 = locop_direct(MILD_GAUSS, w1, w2, psi, theta, gabor_plan(SIG))
        r21 = locop_direct(MILD_GAUSS, w2, w1, psi, theta, gabor_plan(SIG))
        v12, v21 = r12.value.to_complex(), r21.value.to_complex()
        assert abs(v12 - v21) > 1e-6 * abs(v12)
        # and the convolution route agrees with the matching direct order
        rw = locop_via_weyl(MILD_GAUSS, w1, w2, psi, theta, self.CPLAN)
        assert abs(rw.value.to_complex() - v12) <= 1e-5 * abs(v12)

    def test_sampled_application_consistent_with_pairing(self):
        w1, w2 = gaussian(1.0), subgaussian(2.0, 2.0)
        psi, theta = gauss_probe(0.3), gauss_probe(-0.2)
        plan = gabor_plan(SIG)
        applied = locop_apply_mild(MILD_GAUSS, w1, w2, psi, plan)
        paired = np.trapezoid(to_linear(applied) * to_linear(theta), TS)
        ref = locop_direct(MILD_GAUSS, w1, w2, psi, theta, plan)
        assert paired == pytest.approx(ref.value.to_complex(), rel=1e-8)

    def test_sampled_application_refused_for_growth(self):
        with pytest.raises(MildModeRefusalError):
            locop_apply_mild(
                EXP15, subgaussian(1.0, 1.0), subgaussian(1.0, 1.0),
                gauss_probe(), gabor_plan(SIG),
            )

    def test_mild_mode_refusal(self):
        psi, theta = gauss_probe(), gauss_probe()
        with pytest.raises(MildModeRefusalError):
            locop_direct(
                EXP15, subgaussian(1.0, 1.0), subgaussian(1.0, 1.0),
                psi, theta, gabor_plan(SIG),
            )

    def test_super_exponential_route(self):
        w = subgaussian(1.0, 1.0)
        plan = ConvolutionPlan.build(8.0, 65, 8.0, 65, y_radius=60.0, eta_radius=8.0)
        psi, theta = gauss_probe(0.3), gauss_probe(-0.2)
        res = locop_via_weyl(EXP15, w, w, psi, theta, plan)
        assert np.isfinite(res.value.logmag)
        assert res.route == "convolution-weyl"

    def test_operator_symbol_route_equivalence(self):
        # non-identity Ptilde: direct route differentiates gtilde, the
        # convolution route differentiates the kernel; both must agree
        op = UltradiffOp((1.0, 0.0, 0.25))
        a = TensorSymbol((term(bounded_factor(), p_tilde=op),))
        w1, w2 = gaussian(1.0), gaussian(1.25)
        psi, theta = gauss_probe(0.2), gauss_probe(-0.15)
        rd = locop_direct(a, w1, w2, psi, theta, gabor_plan(SIG))
        rw = locop_via_weyl(a, w1, w2, psi, theta, self.CPLAN)
        vd, vw = rd.value.to_complex(), rw.value.to_complex()
        assert abs(vd - vw) <= 1e-5 * abs(vd)

    def test_position_operator_route_equivalence(self):
        op = UltradiffOp((1.0, 0.5))
        fx = SampledFunction.from_complex(SIG, np.exp(-np.pi * TS**2))
        # direct route needs the closed form to differentiate, so build the
        # sampled factor from the closed-form values of P(D) f instead
        fvals = to_linear(fx)
        dvals = np.gradient(fvals, TS)
        pf = fvals + 0.5 * (-1j) * dvals
        a_direct = TensorSymbol(
            (
                term(
                    GrowthFactor(
                        "sampled",
                        samples=SampledFunction.from_complex(SIG, pf),
                        l=0.0,
                        c_log=1.0,
                    )
                ),
            )
        )
        a_conv = TensorSymbol((term(bounded_factor(lambda t: np.exp(-np.pi * t**2)),
                                    x_op=op),))
        w1, w2 = gaussian(1.0), gaussian(1.25)
        psi, theta = gauss_probe(0.2), gauss_probe(-0.15)
        rd = locop_direct(a_direct, w1, w2, psi, theta, gabor_plan(SIG))
        rw = locop_via_weyl(a_conv, w1, w2, psi, theta, self.CPLAN)
        vd, vw = rd.value.to_complex(), rw.value.to_complex()
        # np.gradient is only second order: compare loosely
        assert abs(vd - vw) <= 1e-3 * abs(vd)
