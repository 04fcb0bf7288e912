import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyline.errors import DomainError, TailUnknown
from hardyline.halfline_operator import (
    CONVERGENT,
    DIVERGENT,
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    burn_in,
    ground_state,
    hardy_weight,
    optimal_hardy_weight,
    oscillation_stats,
    p_laplacian,
    p_laplacian_apply,
    signed_power,
    weight_comparison,
)
from hardyline.weights import Power, Table


def mp_weight(alpha, p, n):
    """Optimal weight of nu = k^alpha at n, from the ground state at 60 digits."""
    with mpmath.workdps(60):
        p = mpmath.mpf(p)
        a = mpmath.mpf(alpha)
        e = -1 / (p - 1)
        conv = a * e < -1
        if conv:
            G = lambda m: mpmath.zeta(-a * e, m + 1) if m >= 1 else mpmath.mpf(0)  # noqa: E731
        else:
            G = lambda m: mpmath.fsum(mpmath.mpf(k) ** (a * e) for k in range(1, m + 1))  # noqa: E731
        b = (p - 1) / p
        f = [G(m) ** b if m >= 1 else mpmath.mpf(0) for m in (n - 1, n, n + 1)]
        sp = lambda z: mpmath.sign(z) * abs(z) ** (p - 1)  # noqa: E731
        L = mpmath.mpf(n) ** a * sp(f[1] - f[0]) + mpmath.mpf(n + 1) ** a * sp(f[1] - f[2])
        return L / f[1] ** (p - 1)


class TestGroundState:
    def test_unit_weights(self):
        gs = ground_state(Power(0), 2)
        assert gs.branch == DIVERGENT
        assert [gs(n) for n in range(5)] == [0.0, 1.0, 2.0, 3.0, 4.0]

    def test_convergent(self):
        gs = ground_state(Power(3), 2)
        assert gs.branch == CONVERGENT
        lo, hi = gs.enclosure(3)
        ref = float(mpmath.zeta(3) - 1)
        assert lo[1] <= ref <= hi[1]
        assert gs(0) == 0.0

    def test_harmonic_numbers(self):
        assert ground_state(Power(1), 2)(3) == pytest.approx(11 / 6, rel=1e-15)

    def test_forced_branch_for_tables(self):
        t = Table((1.0, 2.0, 3.0, 4.0))
        with pytest.raises(TailUnknown):
            ground_state(t, 2)
        assert ground_state(t, 2, branch=DIVERGENT)(2) == pytest.approx(1.5)
        with pytest.raises(DomainError):
            ground_state(t, 2, branch="sideways")

    def test_negative_index(self):
        with pytest.raises(DomainError):
            ground_state(Power(0), 2)(-1)

    def test_memo_grows(self):
        gs = ground_state(Power(0.5), 3)
        a = gs.values(10).copy()
        b = gs.values(5000)
        assert np.array_equal(a, b[:11])


class TestOperator:
    def test_signed_power(self):
        assert signed_power(-8.0, 1 / 3) == pytest.approx(-2.0)
        with pytest.raises(DomainError):
            signed_power(1.0, 0.0)

    def test_ground_state_is_harmonic(self):
        G = ground_state(Power(0), 2).values(10)
        assert p_laplacian_apply(Power(0), 2, G, 5) == 0.0

    def test_delta(self):
        assert p_laplacian_apply(Power(0), 2, [0.0, 1.0, 0.0], 1) == 2.0

    def test_convergent_harmonic(self):
        gs = ground_state(Power(3), 2)
        lo, hi = gs.enclosure(10)
        G = 0.5 * (lo + hi)
        assert abs(p_laplacian_apply(Power(3), 2, G, 2)) < 1e-14

    @pytest.mark.parametrize("alpha,p", [(1.0, 3.0), (0.5, 1.5), (4.0, 2.5)])
    def test_harmonic_general_p(self, alpha, p):
        gs = ground_state(Power(alpha), p)
        G = gs.values(60)
        L = p_laplacian(Power(alpha), p, G)
        scale = Power(alpha).values(1, 59) * np.abs(np.diff(G[:-1])) ** (p - 1)
        if gs.branch == CONVERGENT:
            # G(0) = 0 makes vertex 1 a strict supersolution
            assert L[0] > 0
            L, scale = L[1:], scale[1:]
        assert np.all(np.abs(L) <= 1e-10 * scale)

    def test_missing_value(self):
        with pytest.raises(DomainError):
            p_laplacian_apply(Power(0), 2, [0.0, 1.0], 1)


class TestHardyWeight:
    def test_closed_form_first_value(self):
        assert optimal_hardy_weight(Power(0), 2, 1) == pytest.approx(2 - math.sqrt(2), rel=1e-15)

    def test_expansion_at_100(self):
        n = 100
        assert optimal_hardy_weight(Power(0), 2, n) == pytest.approx(1 / (4 * n ** 2) + 5 / (64 * n ** 4), abs=1e-10)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.5])
    def test_unit_weight_formula(self, p):
        b = (p - 1) / p
        ref = (1 - 0.9 ** b) ** (p - 1) - (1.1 ** b - 1) ** (p - 1)
        assert optimal_hardy_weight(Power(0), p, 10) == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("alpha,p", [(0.0, 2.0), (-1.0, 2.0), (3.0, 2.0), (0.5, 3.0), (4.0, 3.0), (2.0, 1.5), (6.0, 2.5)])
    @pytest.mark.parametrize("n", [1, 2, 17, 1000])
    def test_against_mp_oracle(self, alpha, p, n):
        hw = hardy_weight(Power(alpha), p, n)
        ref = float(mp_weight(alpha, p, n))
        assert abs(hw.values[-1] - ref) <= max(hw.uncertainty[-1], 1e-13 * abs(ref))
        assert hw.values[-1] == pytest.approx(ref, rel=1e-7)

    @settings(max_examples=30, deadline=None)
    @given(alpha=st.floats(-3, 6), p=st.floats(1.2, 4))
    def test_positive(self, alpha, p):
        if abs(alpha - (p - 1)) < 1e-3:
            return
        hw = hardy_weight(Power(alpha), p, 400)
        assert np.all(hw.values > 0)
        assert np.all(hw.uncertainty < hw.values)

    def test_domain(self):
        with pytest.raises(DomainError):
            hardy_weight(Power(0), 2, 0)
        with pytest.raises(DomainError):
            optimal_hardy_weight(Power(0), 2, 0)


class TestDiagnostics:
    def test_burn_in(self):
        assert burn_in(10) == 16 and burn_in(10_000) == 1000

    def test_unit_ratio(self):
        assert oscillation_stats(Power(0), 2, 100).sup_ratio == 2.0

    def test_oscillating_weight(self):
        N = 10 ** 4
        vals = tuple(float(n // 2) if n % 2 == 0 else 1.0 for n in range(1, N + 3))
        nu = Table(vals)
        gs = ground_state(nu, 2, branch=DIVERGENT)
        st_ = oscillation_stats(nu, 2, N, gs=gs)
        assert st_.sup_ratio <= 1 + 2.0
        assert st_.m1_ratios[0] < 1e-3

    def test_power_ratios_tend_to_one(self):
        lo, hi = oscillation_stats(Power(5), 2, 1000).m1_ratios
        assert 1 <= lo <= hi < 1.06


class TestComparison:
    def test_holds(self):
        v = weight_comparison(Power(0), 2, Power(-2), 10_000, scale=0.25)
        assert v.verdict == HOLDS and v.heuristic
        assert v.ratio_stats[0] > 1.0

    def test_fails_with_witness(self):
        v = weight_comparison(Power(-1), 2, Power(-3), 10_000)
        assert v.verdict == FAILS and v.witness is not None and not v.heuristic
        hw = hardy_weight(Power(-1), 2, 10_000)
        m = np.arange(v.witness, 10_001, dtype=float)
        assert np.all(hw.values[v.witness - 1:] < m ** -3.0)

    def test_inconclusive(self):
        v = weight_comparison(Power(0), 2, Power(-1), 10_000)
        assert v.verdict == INCONCLUSIVE and v.slope < -0.1
