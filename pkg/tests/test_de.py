"""Deterministic-equivalent solver against independent oracles."""

import numpy as np
import pytest

from jrcsim.channels import crandn
from jrcsim.de import (
    DeConvergenceError,
    DeProblem,
    DeRegimeError,
    resolvent_trace_mc_oracle,
    solve_delta,
    solve_delta_prime,
)


def _bisect_single_weight(w, rho, dim, tol=1e-14):
    """Scalar root of delta = w * dim / (rho + w / (1 + delta))."""
    lo, hi = 0.0, w * dim / rho
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = mid - w * dim / (rho + w / (1.0 + mid))
        if f > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol * (1.0 + hi):
            break
    return 0.5 * (lo + hi)


def _bracketed_root_solver(weights, rho, evals, dim):
    """Independent solver: because every weight multiplies the identity, the
    whole system reduces to one scalar root  c = rho + sum_p w_p/(1 + w_p mu(c))
    with mu(c) = sum_i 1/(lambda_i + c), bracketed on [rho, rho + sum w]."""
    from scipy.optimize import brentq

    def mu(c):
        shifted = evals + c if evals is not None else np.full(dim, c)
        return float(np.sum(1.0 / shifted))

    def f(c):
        return c - rho - float(np.sum(weights / (1.0 + weights * mu(c))))

    hi = rho + float(np.sum(weights))
    if f(hi) <= 0:
        c_star = hi
    else:
        c_star = brentq(f, rho * (1 + 1e-12), hi, xtol=1e-14, rtol=1e-14)
    return weights * mu(c_star)


class TestFixedPoint:
    def test_empty_weights_scaled_identity(self):
        prob = DeProblem(weights=np.zeros(0), rho=2.0, dim=16)
        sol = solve_delta(prob)
        assert sol.mu == pytest.approx(16 / 2.0, rel=1e-14)
        np.testing.assert_allclose(sol.t_matrix(), np.eye(16) / 2.0)

    def test_zero_weight_trace_halves_when_rho_doubles(self):
        mu1 = solve_delta(DeProblem(np.zeros(0), 1.0, 32)).mu
        mu2 = solve_delta(DeProblem(np.zeros(0), 2.0, 32)).mu
        assert mu2 == pytest.approx(mu1 / 2.0, rel=1e-14)

    def test_single_weight_against_bisection(self):
        w, rho, dim = 3.7, 0.8, 24
        sol = solve_delta(DeProblem(np.array([w]), rho, dim), tol=1e-12)
        assert sol.delta[0] == pytest.approx(_bisect_single_weight(w, rho, dim),
                                             rel=1e-9)

    def test_random_instance_against_bracketed_root(self):
        rng = np.random.default_rng(5)
        dim = 16
        weights = rng.uniform(0.5, 2.0, size=3)
        g = crandn(rng, dim, 6)
        s = g @ g.conj().T  # Wishart, nonnegative definite
        prob = DeProblem(weights, rho=1.3, dim=dim, s_matrix=s)
        sol = solve_delta(prob, tol=1e-13, max_iter=2000)
        ref = _bracketed_root_solver(weights, 1.3, np.linalg.eigvalsh(s), dim)
        np.testing.assert_allclose(sol.delta, ref, rtol=1e-8)

    def test_exclusions(self):
        weights = np.array([1.0, 2.0, 3.0])
        full = solve_delta(DeProblem(weights, 1.0, 16))
        cut = solve_delta(DeProblem(weights, 1.0, 16, exclusions=(1,)))
        assert cut.delta.size == 2
        np.testing.assert_array_equal(cut.kept, [0, 2])
        # removing an interferer increases the resolvent trace
        assert cut.mu > full.mu

    def test_nonconvergence_is_loud(self):
        prob = DeProblem(np.array([1.0, 2.0]), rho=0.01, dim=64)
        with pytest.raises(DeConvergenceError, match="not converged"):
            solve_delta(prob, tol=1e-15, max_iter=2)

    def test_residual_monotone_after_burn_in(self):
        rng = np.random.default_rng(8)
        weights = rng.uniform(0.5, 5.0, size=6)
        prob = DeProblem(weights, rho=1.0, dim=64)
        residuals = []
        delta = np.full(weights.size, 1.0)
        for _ in range(40):
            c = 1.0 + np.sum(weights / (1.0 + delta))
            new = weights * (64 / c)
            residuals.append(np.max(np.abs(new - delta) / (1.0 + new)))
            delta = new
        assert all(b <= a * (1 + 1e-12) for a, b in zip(residuals[2:], residuals[3:]))

    def test_mu_decreasing_in_rho_delta_increasing_in_weight(self):
        weights = np.array([1.0, 2.0])
        mus = [solve_delta(DeProblem(weights, rho, 32)).mu for rho in (0.5, 1.0, 2.0)]
        assert mus[0] > mus[1] > mus[2]
        d0 = solve_delta(DeProblem(np.array([1.0, 2.0]), 1.0, 32)).delta[0]
        d1 = solve_delta(DeProblem(np.array([1.5, 2.0]), 1.0, 32)).delta[0]
        assert d1 > d0


class TestDerivativeSystem:
    def test_empty_weights(self):
        sol = solve_delta(DeProblem(np.zeros(0), 2.0, 16))
        prime = solve_delta_prime(sol)
        # T' = T^2 when there is nothing to correct
        assert prime.mu_prime == pytest.approx(16 / 4.0, rel=1e-14)

    @pytest.mark.parametrize("mixed", [False, True])
    def test_mu_prime_matches_resolvent_derivative(self, mixed):
        rng = np.random.default_rng(3)
        if mixed:
            weights = np.concatenate([np.full(4, 0.9), np.full(4, 1e-5)])
        else:
            weights = rng.uniform(0.5, 2.0, size=4)
        g = crandn(rng, 32, 5)
        s = g @ g.conj().T

        def mu_at(rho):
            return solve_delta(DeProblem(weights, rho, 32, s_matrix=s),
                               tol=1e-13, max_iter=5000).mu

        rho = 0.7
        h = 1e-5 * rho
        fd = (mu_at(rho - h) - mu_at(rho + h)) / (2 * h)
        sol = solve_delta(DeProblem(weights, rho, 32, s_matrix=s),
                          tol=1e-13, max_iter=5000)
        prime = solve_delta_prime(sol)
        assert prime.mu_prime == pytest.approx(fd, rel=1e-3)

    def test_seed_weight_scales_linearly(self):
        sol = solve_delta(DeProblem(np.array([1.0, 0.5]), 1.0, 32))
        base = solve_delta_prime(sol, seed_weight=1.0).mu_prime
        scaled = solve_delta_prime(sol, seed_weight=0.25).mu_prime
        assert scaled == pytest.approx(0.25 * base, rel=1e-12)

    def test_delta_prime_nonnegative(self):
        sol = solve_delta(DeProblem(np.array([2.0, 0.3, 1.1]), 0.9, 48))
        prime = solve_delta_prime(sol)
        assert np.all(prime.delta_prime >= 0)

    def test_regime_failure_is_explicit(self):
        # huge weights with a vanishing regularizer push the spectral radius
        # of the coupling matrix past one
        sol = solve_delta(DeProblem(np.full(8, 50.0), 1.0, 64), max_iter=5000)
        fake = type(sol)(
            delta=sol.delta * 0, mu=sol.mu, c=sol.c, tr_t2=sol.tr_t2 * 1e6,
            iterations=sol.iterations, residual=sol.residual, kept=sol.kept,
            weights_kept=sol.weights_kept, problem=sol.problem)
        with pytest.raises(DeRegimeError, match="spectral radius"):
            solve_delta_prime(fake)


class TestMonteCarloOracle:
    def test_trace_agreement(self):
        rng = np.random.default_rng(11)
        weights = np.array([1.0, 0.7, 1.4, 0.2])
        g = crandn(rng, 64, 4)
        s = 0.5 * (g @ g.conj().T)
        prob = DeProblem(weights, rho=1.0, dim=64, s_matrix=s)
        tr1, tr2 = resolvent_trace_mc_oracle(prob, 200, rng)
        sol = solve_delta(prob, tol=1e-12, max_iter=2000)
        prime = solve_delta_prime(sol)
        assert abs(tr1 - sol.mu) / sol.mu <= 0.05
        assert abs(tr2 - prime.mu_prime) / prime.mu_prime <= 0.05

    def test_no_weights_exact_per_draw(self):
        rng = np.random.default_rng(2)
        prob = DeProblem(np.zeros(0), rho=2.0, dim=16)
        tr1, tr2 = resolvent_trace_mc_oracle(prob, 3, rng)
        assert tr1 == pytest.approx(16 / 2.0, rel=1e-12)
        assert tr2 == pytest.approx(16 / 4.0, rel=1e-12)
