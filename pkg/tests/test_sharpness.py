import math

import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from hardyline.errors import DomainError, NotConverged, PrefixViolation, UnsupportedAlpha, ZeroDenominator
from hardyline.sharpness import (
    Bounds,
    PolyBump,
    PowerProfile,
    RayleighProblem,
    Value,
    continuum_constant,
    critical_hardy_check,
    critical_margins,
    energy_and_mass,
    hardy_check,
    hardy_margins,
    minimize_rayleigh,
    rayleigh_quotient,
    sampled_test_quotient,
    sharp_constant,
    solve_p_poisson,
)
from hardyline.weights import Power


def eigh_oracle(alpha, N, M=1, p=2.0):
    """Smallest eigenvalue of the stiffness/mass pencil by dense scipy eigh."""
    n = np.arange(M, N + 2, dtype=float)
    nu = n ** alpha  # edges M..N+1
    size = N - M + 1
    K = np.zeros((size, size))
    for i in range(size):
        K[i, i] = nu[i] + nu[i + 1]
        if i + 1 < size:
            K[i, i + 1] = K[i + 1, i] = -nu[i + 1]
    D = np.diag(n[:size] ** (alpha - p))
    return scipy.linalg.eigh(K, D, eigvals_only=True)[0]


class TestSharpConstant:
    def test_values(self):
        assert sharp_constant(0, 2) == Value(0.25)
        assert sharp_constant(1, 2) is None
        assert sharp_constant(2.0, 3.0) is None
        assert sharp_constant(-1, 2) == Bounds(0.125, 1.0)

    @pytest.mark.parametrize("alpha,p", [(0, 3), (3, 2), (0.5, 1.5), (7, 4)])
    def test_formula(self, alpha, p):
        assert continuum_constant(alpha, p) == pytest.approx(abs((alpha - p + 1) / p) ** p, rel=1e-15)


class TestQuotients:
    def test_examples(self):
        mu, nu = Power(-2), Power(0)
        assert rayleigh_quotient([1.0], mu, nu, 2) == 2.0
        assert rayleigh_quotient([1.0, 1.0], mu, nu, 2) == pytest.approx(1.6)
        assert rayleigh_quotient([1.0], Power(1), Power(3), 3) == 9.0

    def test_zero(self):
        with pytest.raises(ZeroDenominator):
            rayleigh_quotient([0.0, 0.0], Power(-2), Power(0), 2)

    def test_energy_and_mass_shifted(self):
        e, m = energy_and_mass([1.0], Power(-2), Power(0), 2, start=3)
        assert (e, m) == (pytest.approx(2.0), pytest.approx(1 / 9))

    def test_hardy_examples(self):
        assert hardy_check([1.0], 0, 2) == pytest.approx(1.75)
        assert hardy_check([1.0, 1.0], 0, 2) == pytest.approx(1.6875)
        assert hardy_check([1.0], 3, 2) == pytest.approx(8.0)

    def test_hardy_domain(self):
        with pytest.raises(UnsupportedAlpha):
            hardy_check([1.0], 1, 2)
        with pytest.raises(UnsupportedAlpha):
            hardy_check([1.0], -1, 2)

    def test_critical_examples(self):
        ref = 5 - 0.25 / (2 * math.log(2) ** 2)
        assert critical_hardy_check([0.0, 1.0], 2) == pytest.approx(ref, rel=1e-14)
        assert critical_hardy_check([0.0, 3.0], 2) == pytest.approx(9 * ref, rel=1e-14)
        ref2 = 6 - 0.25 * (1 / (2 * math.log(2) ** 2) + 1 / (3 * math.log(3) ** 2))
        assert critical_hardy_check([0.0, 1.0, 1.0], 2) == pytest.approx(ref2, rel=1e-14)
        assert ref2 == pytest.approx(5.67078, abs=1e-5)

    def test_critical_prefix(self):
        with pytest.raises(PrefixViolation):
            critical_hardy_check([1.0, 1.0], 2)

    def test_batched_agrees(self):
        rng = np.random.default_rng(3)
        U = rng.standard_normal((20, 9))
        m, _ = hardy_margins(U, 3.0, 2.0)
        assert np.allclose(m, [hardy_check(u, 3.0, 2.0) for u in U], rtol=1e-12)
        U[:, 0] = 0
        m, _ = critical_margins(U, 2.5)
        assert np.allclose(m, [critical_hardy_check(u, 2.5) for u in U], rtol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(
        u=st.lists(st.floats(-10, 10), min_size=1, max_size=25),
        alpha=st.sampled_from([0.0, 0.5, 2.0, 3.0, 5.0]),
        p=st.sampled_from([1.5, 2.0, 3.0]),
    )
    def test_inequality_holds(self, u, alpha, p):
        if alpha == p - 1 or not any(u):
            return
        m, lhs = hardy_margins(np.array([u]), alpha, p)
        assert m[0] >= -1e-12 * lhs[0]


class TestMinimize:
    def test_one_site(self):
        r = minimize_rayleigh(RayleighProblem(2, 1, alpha=0))
        assert r.value == 2.0

    def test_two_sites(self):
        r = minimize_rayleigh(RayleighProblem(2, 2, alpha=0))
        assert r.value == pytest.approx(5 - math.sqrt(13), rel=1e-14)

    @pytest.mark.parametrize("alpha,N,M", [(0, 64, 1), (0, 500, 1), (3, 200, 1), (0.5, 100, 5), (-1, 300, 1)])
    def test_exact_vs_eigh(self, alpha, N, M):
        r = minimize_rayleigh(RayleighProblem(2, N, M, alpha=alpha), method="exact")
        assert r.value == pytest.approx(eigh_oracle(alpha, N, M), rel=1e-10)
        assert r.bracket[0] <= r.value <= r.bracket[1]

    def test_minimizer_attains_value(self):
        prob = RayleighProblem(2, 300, alpha=0)
        r = minimize_rayleigh(prob)
        assert prob.quotient(r.minimizer) == pytest.approx(r.value, rel=1e-12)

    @pytest.mark.parametrize("N", [64, 512])
    def test_descent_matches_exact(self, N):
        prob = RayleighProblem(2, N, alpha=0)
        a = minimize_rayleigh(prob, method="exact").value
        b = minimize_rayleigh(prob, method="descent")
        assert b.converged
        assert b.value == pytest.approx(a, rel=1e-8)

    @pytest.mark.parametrize("alpha,p", [(0.0, 1.5), (0.0, 3.0), (3.0, 2.5)])
    def test_descent_above_sharp_constant(self, alpha, p):
        r = minimize_rayleigh(RayleighProblem(p, 256, alpha=alpha))
        assert r.converged
        assert r.value > continuum_constant(alpha, p)

    def test_truncation_monotone(self):
        vals = [minimize_rayleigh(RayleighProblem(2, N, alpha=0)).value for N in (64, 512, 4096)]
        assert vals[0] > vals[1] > vals[2] > 0.25
        assert vals[2] < 0.5

    def test_strict_raises(self):
        with pytest.raises(NotConverged) as info:
            minimize_rayleigh(RayleighProblem(1.5, 200, alpha=0), max_iter=2, strict=True)
        assert info.value.result is not None

    def test_exact_needs_p2(self):
        with pytest.raises(DomainError):
            minimize_rayleigh(RayleighProblem(3, 10, alpha=0), method="exact")

    def test_problem_domain(self):
        with pytest.raises(DomainError):
            RayleighProblem(2, 3, M=5, alpha=0)
        with pytest.raises(DomainError):
            RayleighProblem(2, 3)

    def test_poisson_solve(self):
        rng = np.random.default_rng(0)
        nu = rng.uniform(0.5, 2.0, 13)
        f = rng.uniform(0.1, 1.0, 12)
        v = solve_p_poisson(nu, f, 3.0)
        padded = np.concatenate(([0.0], v, [0.0]))
        d = np.diff(padded)
        flux = nu * np.sign(d) * np.abs(d) ** 2
        assert np.allclose(flux[:-1] - flux[1:], f, rtol=1e-10, atol=1e-12)


class TestSampled:
    def test_bump_limit(self):
        assert sampled_test_quotient(PolyBump(), 1000, 0, 2) == pytest.approx(1.0, rel=1e-2)

    def test_bump_single_site(self):
        assert sampled_test_quotient(PolyBump(), 2, 0, 2) == 2.0

    def test_power_profile_approaches_continuum_from_above(self):
        # continuum quotient by mpmath quadrature; the sampled values fall towards it
        # slowly, at rate m^(-2 eps), because the profile is singular at 0
        phi = PowerProfile(0.0, 2.0, 0.05)
        g = phi.exponent
        with mpmath.workdps(30):
            num = mpmath.quad(lambda x: (g * x ** (g - 1) * (1 - x) ** 2 - 2 * x ** g * (1 - x)) ** 2, [0, 1])
            den = mpmath.quad(lambda x: (x ** g * (1 - x) ** 2) ** 2 / x ** 2, [0, 1])
        cont = float(num / den)
        assert cont == pytest.approx(0.28416, abs=1e-5)
        qs = [sampled_test_quotient(phi, m, 0.0, 2.0) for m in (10 ** 3, 10 ** 4, 10 ** 5)]
        assert qs[0] > qs[1] > qs[2] > cont > 0.25

    def test_m_domain(self):
        with pytest.raises(DomainError):
            sampled_test_quotient(PolyBump(), 1, 0, 2)
