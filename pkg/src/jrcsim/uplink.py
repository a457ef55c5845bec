"""Uplink data phase: MMSE combining and the per-user SINR, both ways.

The empirical path decomposes the post-combining power of one channel draw
into six statistically orthogonal components (desired, inter-user,
estimation error, cancellable radar, residual radar, noise), so the
decomposition sums exactly to the conditional received power. The analytic
path evaluates the same six terms through deterministic equivalents of the
resolvent traces, conditioned per drop on the interference-channel estimate
that enters the combiner.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .channels import ChannelRealization
from .config import SystemConfig
from .de import DeError, DeProblem, solve_delta, solve_delta_prime
from .scenario import PowerAllocation, Scenario
from .training import ChannelEstimate

ZETA_TERMS = ("signal", "inter_user", "est_error", "radar_canc", "radar_resid", "noise")


@dataclass(frozen=True)
class UplinkEmpirical:
    """Per-user empirical SINR with its six-way power decomposition."""

    gamma: np.ndarray          # (K,)
    zeta: dict[str, np.ndarray]
    total: np.ndarray          # (K,) sum of the six components


@dataclass(frozen=True)
class UplinkDeResult:
    """Per-user deterministic-equivalent SINR, rate and term breakdown."""

    gamma: np.ndarray
    rate: np.ndarray
    zeta: dict[str, np.ndarray]


def uplink_loading(
    scenario: Scenario,
    powers: PowerAllocation,
    config: SystemConfig,
    b2_bar: np.ndarray,
) -> float:
    """Diagonal loading of the receive covariance: every white-power source.

    Estimation-error power, the residual (unestimated) radar interference
    N_t * eta_e * sigma_r2, and thermal noise.
    """
    est_err = float(np.sum(scenario.beta * powers.eps_up_data * b2_bar))
    return est_err + config.N_t * scenario.eta_e * config.sigma_r2 + config.N0


def mmse_combiner(
    estimate: ChannelEstimate,
    g_rb_hat: np.ndarray,
    scenario: Scenario,
    powers: PowerAllocation,
    config: SystemConfig,
) -> np.ndarray:
    """MMSE receive filter C = R^{-1} H_hat with R built from the estimates."""
    b2_bar = estimate.b2_bar if estimate.sync_known else estimate.b2_bar.mean(axis=0)
    h_hat = estimate.h_hat
    weights = scenario.beta * powers.eps_up_data  # (K,)
    cov = (h_hat * weights[None, :]) @ h_hat.conj().T
    if config.sigma_r2 > 0:
        cov = cov + config.sigma_r2 * (g_rb_hat @ g_rb_hat.conj().T)
    load = uplink_loading(scenario, powers, config, b2_bar)
    cov[np.diag_indices_from(cov)] += load
    cho = scipy.linalg.cho_factor(cov, lower=True, check_finite=False)
    return scipy.linalg.cho_solve(cho, h_hat, check_finite=False)


def empirical_uplink_sinr(
    realization: ChannelRealization,
    estimate: ChannelEstimate,
    combiner: np.ndarray,
    powers: PowerAllocation,
    scenario: Scenario,
    config: SystemConfig,
) -> UplinkEmpirical:
    """Six-way post-combining power split for one draw.

    Powers are conditional means given the quantities the receiver knows:
    symbols, noise and the channel-error ensembles are averaged analytically,
    while the estimated channels and the estimated interference channel enter
    through their realized values. This matches the analytic SINR's
    conditioning, and makes the six components sum to c_k^H R c_k exactly
    (R being the combiner's receive covariance).
    """
    b2_bar = estimate.b2_bar if estimate.sync_known else estimate.b2_bar.mean(axis=0)
    h_hat = estimate.h_hat
    weights = scenario.beta * powers.eps_up_data  # (K,)

    cross_hat = combiner.conj().T @ h_hat    # (K, K), [k, l] = c_k^H h_hat_l
    gain2_hat = np.abs(cross_hat) ** 2
    filter2 = np.sum(np.abs(combiner) ** 2, axis=0)  # ||c_k||^2

    p_signal = weights * np.diagonal(gain2_hat)
    p_inter = gain2_hat @ weights - p_signal
    p_est = float(np.sum(weights * b2_bar)) * filter2
    if config.sigma_r2 > 0:
        p_canc = config.sigma_r2 * np.sum(
            np.abs(combiner.conj().T @ realization.G_rb_hat) ** 2, axis=1)
        p_resid = config.N_t * config.sigma_r2 * scenario.eta_e * filter2
    else:
        p_canc = np.zeros(config.K)
        p_resid = np.zeros(config.K)
    p_noise = config.N0 * filter2

    zeta = {
        "signal": p_signal,
        "inter_user": p_inter,
        "est_error": p_est,
        "radar_canc": p_canc,
        "radar_resid": p_resid,
        "noise": p_noise,
    }
    denom = p_inter + p_est + p_canc + p_resid + p_noise
    total = p_signal + denom
    return UplinkEmpirical(gamma=p_signal / denom, zeta=zeta, total=total)


def _low_rank_eigvals(g_scaled: np.ndarray, dim: int) -> np.ndarray:
    """Eigenvalues of G G^H (M x M) via the small Gram G^H G."""
    cols = g_scaled.shape[1]
    if cols == 0:
        return np.zeros(dim)
    small = np.linalg.eigvalsh(g_scaled.conj().T @ g_scaled)
    return np.concatenate([np.maximum(small, 0.0), np.zeros(dim - cols)])


def de_uplink_sinr(
    scenario: Scenario,
    powers: PowerAllocation,
    config: SystemConfig,
    g_rb_hat: np.ndarray,
    b2: np.ndarray,
) -> UplinkDeResult:
    """Deterministic-equivalent per-user uplink SINR for one drop.

    Solves the leave-one-out fixed points (per user k), the leave-two-out
    ones (user pairs, and user k against each interference-channel column),
    then assembles the six power terms. Solver failures propagate with the
    offending leave-out set named.
    """
    K, M, n_t = config.K, config.M, config.N_t
    b2 = np.asarray(b2, dtype=float)
    b2_bar = 1.0 - b2
    beta_eps = scenario.beta * powers.eps_up_data
    w = beta_eps * b2
    rho = uplink_loading(scenario, powers, config, b2_bar)
    sig2 = config.sigma_r2
    eta_hat = scenario.eta_I - scenario.eta_e  # estimate-part variance

    radar_on = sig2 > 0 and n_t > 0
    if radar_on:
        g_scaled = np.sqrt(sig2) * g_rb_hat
        evals_full = _low_rank_eigvals(g_scaled, M)
        evals_drop = [
            _low_rank_eigvals(np.delete(g_scaled, i, axis=1), M) for i in range(n_t)
        ]
    else:
        evals_full = None
        evals_drop = []

    def solve(exclusions: tuple[int, ...], evals) -> tuple[float, float]:
        problem = DeProblem(w, rho, M, s_eigvals=evals, exclusions=exclusions)
        try:
            sol = solve_delta(problem, tol=config.de_tol, max_iter=config.de_max_iter)
            prime = solve_delta_prime(sol)
        except DeError as exc:
            raise DeError(f"{exc} [leave-out set {exclusions}]") from exc
        return sol.mu, prime.mu_prime

    mu_k = np.empty(K)
    mu_p_k = np.empty(K)
    for k in range(K):
        mu_k[k], mu_p_k[k] = solve((k,), evals_full)

    mu_kl = np.zeros((K, K))
    mu_p_kl = np.zeros((K, K))
    for k, l in combinations(range(K), 2):
        mu, mu_p = solve((k, l), evals_full)
        mu_kl[k, l] = mu_kl[l, k] = mu
        mu_p_kl[k, l] = mu_p_kl[l, k] = mu_p

    if radar_on:
        mu_ki = np.empty((K, n_t))
        mu_p_ki = np.empty((K, n_t))
        for k in range(K):
            for i in range(n_t):
                mu_ki[k, i], mu_p_ki[k, i] = solve((k,), evals_drop[i])

    zeta = {name: np.zeros(K) for name in ZETA_TERMS}
    for k in range(K):
        common = (1.0 + w[k] * mu_k[k]) ** 2
        zeta["signal"][k] = beta_eps[k] * (b2[k] * mu_k[k]) ** 2 / common

        others = [l for l in range(K) if l != k]
        if others:
            num = np.array([
                beta_eps[l] * b2[l] * mu_p_kl[k, l]
                / (1.0 + w[l] * mu_kl[k, l]) ** 2
                for l in others
            ])
            zeta["inter_user"][k] = b2[k] / common * float(np.sum(num))

        zeta["est_error"][k] = (
            b2[k] * mu_p_k[k] / common * float(np.sum(beta_eps * b2_bar))
        )
        if radar_on:
            terms = mu_p_ki[k] / (1.0 + sig2 * eta_hat * mu_ki[k]) ** 2
            zeta["radar_canc"][k] = sig2 * eta_hat * b2[k] / common * float(np.sum(terms))
            zeta["radar_resid"][k] = (
                n_t * sig2 * scenario.eta_e * b2[k] * mu_p_k[k] / common
            )
        zeta["noise"][k] = config.N0 * b2[k] * mu_p_k[k] / common

    denom = sum(zeta[name] for name in ZETA_TERMS if name != "signal")
    gamma = zeta["signal"] / denom
    return UplinkDeResult(gamma=gamma, rate=np.log2(1.0 + gamma), zeta=zeta)
