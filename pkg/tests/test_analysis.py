import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyline import analysis as an
from hardyline.errors import DomainError, IllConditioned
from hardyline.halfline_operator import hardy_weight
from hardyline.weights import Power

DPS = 64


def mp_S(gamma, n):
    return mpmath.fsum(mpmath.mpf(k) ** (mpmath.mpf(gamma) - 1) for k in range(1, n + 1))


class TestPowerSums:
    def test_examples(self):
        assert an.power_sum(1, 5) == 5.0
        assert an.power_sum(2, 4) == 10.0
        assert an.power_sum(1.5, 2) == pytest.approx(1 + math.sqrt(2), rel=1e-15)
        assert an.power_sum(3, 0) == 0.0

    def test_cache_matches_fsum(self):
        ps = an.PowerSum(0.5)
        S = ps.prefix(3000)
        assert S[0] == 0.0 and np.all(np.diff(S) > 0)
        assert S[2999] == pytest.approx(an.power_sum(0.5, 2999), rel=1e-15)
        assert ps(17) == pytest.approx(an.power_sum(0.5, 17), rel=1e-15)

    def test_negative_n(self):
        with pytest.raises(DomainError):
            an.power_sum(1, -1)


class TestPowerSumInequalities:
    def test_examples(self):
        assert an.prop41_check(1.5, 2, "i") == pytest.approx(2 * 2 ** 1.5 / 1.5 - (2 + math.sqrt(2)), rel=1e-14)
        assert an.prop41_check(1, 6, "ii") == pytest.approx(6.0)
        assert an.prop41_check(2, 2, "iii") == pytest.approx(3 - math.e, rel=1e-14)

    def test_small_window_minimum_is_not_at_two(self):
        m = an.prop41_margins(2.0, 10, "iii")
        assert m[0] == pytest.approx(3 - math.e)
        assert int(np.argmin(m)) + 2 == 10

    @pytest.mark.parametrize("gamma,n,part", [(1.3, 500, "i"), (4.7, 9000, "ii"), (2.25, 10_000, "iii"), (-4.5, 300, "iii"),
                                              (50.0, 40, "iii")])
    def test_against_mp(self, gamma, n, part):
        with mpmath.workdps(DPS):
            g = mpmath.mpf(gamma)
            Sm, Sn = mp_S(g, n - 1), mp_S(g, n)
            ref = {
                "i": 2 * mpmath.mpf(n) ** g / g - (Sm + Sn),
                "ii": mpmath.mpf(n) ** (2 * g) / g ** 2 - Sm * Sn,
                "iii": Sn - mpmath.exp(g / n) * Sm,
            }[part]
        assert an.prop41_check(gamma, n, part) == pytest.approx(float(ref), rel=1e-6)

    @pytest.mark.parametrize("gamma,part", [(2.5, "i"), (1.0, "i"), (0.0, "ii"), (1.5, "iv")])
    def test_domain(self, gamma, part):
        with pytest.raises(DomainError):
            an.prop41_check(gamma, 5, part)


class TestGapBound:
    def test_examples(self):
        assert an.cor43_gap(3, 2, 2, 1) == pytest.approx(1 / 6, rel=1e-14)
        assert an.cor43_gap(3, 2, 2, math.inf) == pytest.approx(2 / 3 - math.sinh(0.5), rel=1e-14)

    def test_closed_form_telescoping(self):
        n = 10 ** 4
        ref = 4 / (n ** 3 - n) - 4 / n ** 3
        assert an.cor43_gap(3, 2, n, 1) == pytest.approx(ref, rel=1e-6)
        assert an.cor43_gap(3, 2, n, 1) > 0

    @pytest.mark.parametrize("alpha,p,n,K", [(2.5, 1.5, 7, 1), (5, 3, 400, 3), (10, 2, 2, math.inf), (3, 2, 5000, math.inf)])
    def test_against_mp(self, alpha, p, n, K):
        with mpmath.workdps(DPS):
            a, p_ = mpmath.mpf(alpha), mpmath.mpf(p)
            e = 1 / (p_ - 1)
            Sm, Sn = mp_S(a - p_ + 1, n - 1), mp_S(a - p_ + 1, n)
            lhs = Sm ** -e - Sn ** -e
            rhs1 = (a - p_ + 1) ** (p_ * e) / ((p_ - 1) * mpmath.mpf(n) ** (a * e))
            th = (a - p_ + 1) / (2 * (p_ - 1))
            if K == math.inf:
                fac = mpmath.sinh(th / n) / (th / n)
            else:
                fac = mpmath.fsum(th ** (2 * k) / mpmath.factorial(2 * k + 1) / mpmath.mpf(n) ** (2 * k) for k in range(K))
            ref = lhs - rhs1 * fac
        assert an.cor43_gap(alpha, p, n, K) == pytest.approx(float(ref), rel=1e-6)

    def test_domain(self):
        with pytest.raises(DomainError):
            an.cor43_gap(1, 2, 5)
        with pytest.raises(DomainError):
            an.cor43_gap(3, 2, 5, K=0)


class TestRemainderSeries:
    def test_examples(self):
        assert an.remainder_h(3, 2, 1) == pytest.approx(math.sinh(1), rel=1e-15)
        assert an.remainder_h(4, 3, 2) == pytest.approx(math.sinh(0.25) / 0.25, rel=1e-15)
        assert an.remainder_h(3, 2, 10 ** 6) - 1 == pytest.approx(1 / 6e12, rel=1e-6)

    def test_series_matches_closed_form(self):
        # theta = (alpha-p+1)/(2(p-1)) swept up to 10 at p = 2
        for theta in np.linspace(0.05, 10, 40):
            alpha = 2 * theta + 1
            n = np.arange(1, 2000)
            h = an.remainder_h(alpha, 2, n)
            s = an.remainder_h_series(alpha, 2, n, K=25)
            assert np.max(np.abs(s / h - 1)) < 1e-14

    def test_coefficients(self):
        c = an.series_coefficients(3, 2, 4)
        assert c.tolist() == pytest.approx([1, 1 / 6, 1 / 120, 1 / 5040])


class TestLemma42:
    def test_examples(self):
        assert an.lemma42_F(0, 2) == 0.0
        assert an.lemma42_F(1, 2) == pytest.approx(2 * (1 - math.exp(-2)) - math.e + 1, rel=1e-13)
        assert an.lemma42_F(1, 2) == pytest.approx(0.0110476, abs=1e-7)
        assert an.lemma42_F(0.5, 2) == pytest.approx(1.5 * (1 - math.exp(-1)) - math.exp(2 / 3) + 1, rel=1e-12)
        assert an.lemma42_F(0.5, 2) == pytest.approx(4.47e-4, abs=1e-6)

    @pytest.mark.parametrize("x,g", [(1e-4, 2.0), (1e-3, 2.0), (0.3, 2.0), (1e-4, 7.5), (1.0, 50.0), (0.01, 2.5)])
    def test_against_mp(self, x, g):
        with mpmath.workdps(100):
            X, G = mpmath.mpf(x), mpmath.mpf(g)
            ref = (1 + X) ** (G - 1) * (1 - mpmath.exp(-G * X)) - mpmath.exp(G * X / (1 + X)) + 1
        assert an.lemma42_F(x, g) == pytest.approx(float(ref), rel=1e-10)

    def test_fallback_is_used_near_zero(self):
        vals, fb = an.lemma42_values(np.array([1e-5, 1e-4, 0.5]), 2.0)
        assert fb >= 2 and np.all(vals > 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            an.lemma42_F(1.5, 2)
        with pytest.raises(DomainError):
            an.lemma42_F(0.5, 1.5)


class TestSubcriticalWeights:
    def test_examples(self):
        assert an.subcritical_weight(3, 2, 1) == pytest.approx(1 - 1 / math.sinh(1), rel=1e-14)
        assert an.subcritical_weight(3, 2, 1) == pytest.approx(0.1490818718, abs=1e-10)
        assert an.subcritical_weight(0.5, 2, 1) == pytest.approx(2 / 3)
        assert an.subcritical_weight(0.5, 2, 3) == pytest.approx(math.sqrt(3) - math.sqrt(2), rel=1e-14)

    def test_zero_alpha_residual(self):
        assert an.subcritical_weight(0, 2, 1) == pytest.approx(2 - math.sqrt(2) - 0.25, rel=1e-14)
        # residual = optimal unit weight minus the sharp Hardy term
        hw = hardy_weight(Power(0), 3, 50).values
        n = np.arange(1, 51)
        assert np.allclose(an.subcritical_weight(0, 3, n), hw - (2 / 3) ** 3 / n ** 3.0, rtol=1e-9, atol=1e-16)

    @pytest.mark.parametrize("alpha,p", [(3.0, 2.0), (5.0, 3.0), (0.5, 2.0), (0.0, 2.0), (4.0, 3.0)])
    def test_against_mp(self, alpha, p):
        n = np.array([1, 2, 10, 1000, 10 ** 5])
        got = an.subcritical_weight(alpha, p, n)
        with mpmath.workdps(DPS):
            a, p_ = mpmath.mpf(alpha), mpmath.mpf(p)
            ref = []
            for k in n.tolist():
                k = mpmath.mpf(k)
                if alpha > p - 1:
                    z = (a - p_ + 1) / (2 * (p_ - 1)) / k
                    ref.append(k ** a * (1 - (mpmath.sinh(z) / z) ** (1 - p_)))
                elif alpha > 0:
                    nu = (p_ - 1 - a) / (p_ - a) if k == 1 else (k - 1) ** a
                    ref.append(k ** a - nu)
                else:
                    b = (p_ - 1) / p_
                    ref.append((1 - (1 - 1 / k) ** b) ** (p_ - 1) - ((1 + 1 / k) ** b - 1) ** (p_ - 1) - b ** p_ / k ** p_)
        ref = np.array([float(r) for r in ref])
        # alpha = 0 subtracts terms of size 1/n, so the error floor is absolute
        floor = 8e-16 / n if alpha == 0 else 0.0
        assert np.all(np.abs(got - ref) <= 1e-12 * np.abs(ref) + floor)
        assert np.all(got > 0)

    @pytest.mark.parametrize("alpha,p", [(1.0, 2.0), (-0.5, 2.0)])
    def test_domain(self, alpha, p):
        with pytest.raises(DomainError):
            an.subcritical_weight(alpha, p, 3)


class TestRemainderWeight:
    def test_positive(self):
        R = an.remainder_weights(3.0, 2.0, 10 ** 4)
        assert np.all(R > 0)

    def test_decay_rates(self):
        n = np.arange(1, 10 ** 4 + 1, dtype=float)
        # w_3 grows like n, the critical rate for p = 2, hence the log^2 correction
        R3 = an.remainder_weights(3.0, 2.0, 10 ** 4)
        scaled = R3 * n * np.log(n) ** 2
        assert np.ptp(scaled[1000:]) < 0.1 * scaled[-1]
        R05 = an.remainder_weights(0.5, 2.0, 10 ** 4)
        scaled = R05 * n ** (1 + 2 - 0.5)
        assert np.ptp(scaled[1000:]) < 0.05 * scaled[-1]

    def test_single_value(self):
        assert an.remainder_weight(3, 2, 50) == an.remainder_weights(3, 2, 50)[-1]

    def test_domain(self):
        with pytest.raises(DomainError):
            an.remainder_weights(1.0, 2.0, 5)


class TestStability:
    def test_delta(self):
        r = an.stability_margin([1.0], 0, 2)
        assert r.energy == pytest.approx(1.75)
        assert r.remainder_norm_p == pytest.approx(2 - math.sqrt(2) - 0.25, rel=1e-14)
        assert r.margin == pytest.approx(math.sqrt(2), rel=1e-14)
        assert r.psi_of_d == pytest.approx(r.remainder_norm_p, rel=1e-14)

    @pytest.mark.parametrize("alpha,p", an.STABILITY_GRID)
    def test_random_nonnegative(self, alpha, p):
        rng = np.random.default_rng(11)
        U = np.vstack([an.random_vectors(rng, 300), an.extremal_vectors(alpha, p, 50)])
        e, r = an.stability_margins(U, alpha, p)
        assert np.all(e - r >= -1e-12 * (np.abs(e) + r))

    @settings(max_examples=30, deadline=None)
    @given(u=st.lists(st.floats(-5, 5), min_size=1, max_size=20).filter(lambda v: any(abs(x) > 1e-3 for x in v)),
           c=st.floats(-4, 4).filter(lambda c: abs(c) > 0.1))
    def test_homogeneity(self, u, c):
        a = an.stability_margin(u, 3.0, 2.0)
        b = an.stability_margin(np.array(u) * c, 3.0, 2.0)
        assert b.margin == pytest.approx(c * c * a.margin, rel=1e-10, abs=1e-12 * (a.energy + a.remainder_norm_p))


class TestFits:
    def test_synthetic(self):
        n = an.default_grid()
        fit = an.asymptotic_fit(3.7 / n ** 2, n, [2])
        assert fit.coefficient(2) == pytest.approx(3.7, abs=1e-10)

    def test_ill_conditioned(self):
        n = 1e5 + np.arange(7.0)
        with pytest.raises(IllConditioned):
            an.asymptotic_fit(1 / n ** 2, n, [2, 3], extra=3)

    def test_too_few_points(self):
        with pytest.raises(DomainError):
            an.asymptotic_fit([1.0, 2.0, 3.0], [1.0, 2.0, 4.0], [2, 3])

    @pytest.mark.parametrize("alpha", [-1.0, -2.0, -3.0])
    def test_expansion_coefficients(self, alpha):
        fit = an.expansion_fit(alpha, 2)
        exp = an.expected_coefficients(alpha)
        assert abs(fit.coefficient(2) - exp[2]) < 1e-3
        assert abs(fit.coefficient(3) - exp[3]) < 1e-3

    def test_unit_weight_fourth_order(self):
        # w(n) = 1/(4n^2) + 5/(64 n^4) + O(n^-6) for nu = 1, p = 2
        n, v = an.normalised_weight(0.0, 2.0, 2.0 ** np.arange(4, 11))
        fit = an.asymptotic_fit(v, n, [2, 4], extra=2)
        assert fit.coefficient(2) == pytest.approx(0.25, abs=1e-9)
        assert fit.coefficient(4) == pytest.approx(5 / 64, abs=1e-4)


class TestGap:
    @pytest.mark.parametrize("alpha", [-1, -2, -3])
    def test_witness(self, alpha):
        w = an.discrete_vs_continuous_gap(alpha)
        assert w.checked_to == 10 * w.n_alpha and w.persists_to >= w.checked_to
        hw = hardy_weight(Power(float(alpha)), 2, w.checked_to)
        n = np.arange(w.n_alpha, w.checked_to + 1, dtype=float)
        cont = (alpha - 1) ** 2 / 4 * n ** (alpha - 2.0)
        assert np.all(hw.values[w.n_alpha - 1:] < cont)

    @pytest.mark.parametrize("alpha", [0, -1.5, 1])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            an.discrete_vs_continuous_gap(alpha)


class TestSuites:
    def test_registry(self):
        for name in an.SUITES:
            assert an.suite_tasks(name, nmax=50, samples=8)

    def test_unknown(self):
        with pytest.raises(DomainError):
            an.suite_tasks("nope")

    def test_aggregate_sorted_and_order_free(self):
        tasks = an.suite_tasks("cor43", nmax=200)
        pts = [f(*a) for f, a in tasks]
        a = an.aggregate("cor43", pts)
        b = an.aggregate("cor43", pts[::-1])
        assert a == b and a.passed

    def test_midpoint_bound(self):
        enc, bound = an.remark46_b2_bound(4.0, 2.0, 25)
        assert enc.hi <= bound
