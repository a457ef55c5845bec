"""Downlink data phase: regularized zero-forcing with a null toward the radar.

The precoder is built from the concatenation of the user-channel estimates
and the BS-to-radar interference-channel estimate, so driving the
regularizer down steers the transmission into the null space of the
estimated radar channel. Per-user SINRs come both from a per-draw power
decomposition and from deterministic equivalents; the radar-side
interference floor feeding the downlink angle CRB is computed here too.
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

ZETA_TERMS = ("signal", "inter_user", "est_error", "radar", "noise")


@dataclass(frozen=True)
class Precoder:
    """RZF precoding matrix with its regularizer and stacked channel basis."""

    Q: np.ndarray       # (M, K)
    alpha: float
    H_bar: np.ndarray   # (M, K + N_r) = [H_hat, G_br_hat]


@dataclass(frozen=True)
class DownlinkEmpirical:
    gamma: np.ndarray
    zeta: dict[str, np.ndarray]
    total: np.ndarray


@dataclass(frozen=True)
class DownlinkDeResult:
    gamma: np.ndarray
    rate: np.ndarray
    zeta: dict[str, np.ndarray]


def default_alpha(
    scenario: Scenario, powers: PowerAllocation, config: SystemConfig
) -> float:
    """Regularizer default (K + N_r) * N0 / (M * mean received energy)."""
    mean_power = float(np.mean(scenario.beta * powers.eps_dn_data))
    if mean_power <= 0:
        return (config.K + config.N_r) * config.N0 / config.M
    return (config.K + config.N_r) * config.N0 / (config.M * mean_power)


def rzf_precoder(
    estimate: ChannelEstimate, g_br_hat: np.ndarray, alpha: float
) -> Precoder:
    """Q = (H_bar H_bar^H + alpha I)^{-1} H_hat with H_bar = [H_hat, G_br_hat]."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    h_bar = np.concatenate([estimate.h_hat, g_br_hat], axis=1)
    gram = h_bar @ h_bar.conj().T
    gram[np.diag_indices_from(gram)] += alpha
    cho = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    q = scipy.linalg.cho_solve(cho, estimate.h_hat, check_finite=False)
    return Precoder(Q=q, alpha=float(alpha), H_bar=h_bar)


def null_leakage_ratio(precoder: Precoder, powers: PowerAllocation) -> float:
    """Power leaked into the estimated radar directions over served power."""
    K = precoder.Q.shape[1]
    g_side = precoder.H_bar[:, K:]
    eps = powers.eps_dn_data
    leak = float(np.sum(np.abs(g_side.conj().T @ precoder.Q) ** 2 * eps[None, :]))
    cross = precoder.H_bar[:, :K].conj().T @ precoder.Q
    served = float(np.sum(np.abs(np.diagonal(cross)) ** 2 * eps))
    return leak / served


def empirical_downlink_sinr(
    realization: ChannelRealization,
    estimate: ChannelEstimate,
    precoder: Precoder,
    powers: PowerAllocation,
    scenario: Scenario,
    config: SystemConfig,
) -> DownlinkEmpirical:
    """Per-draw received-power split at each user (symbol averages analytic).

    As in the uplink, the channel-error ensemble is averaged analytically
    (its per-user power is beta_k * b2_bar_k times the precoded energy),
    while the estimated channels enter realized. The radar-to-user term is
    the per-use average power of the radar's constant-Gram transmit block,
    sigma_r2 * ||g_rk||^2 / N_t, which averages to sigma_r2 * eta_rk.
    """
    b2_bar = estimate.b2_bar if estimate.sync_known else estimate.b2_bar.mean(axis=0)
    q = precoder.Q
    h_hat = estimate.h_hat
    eps = powers.eps_dn_data
    beta = scenario.beta

    cross_hat = h_hat.conj().T @ q   # (K, K), [k, m] = h_hat_k^H q_m
    gain2_hat = np.abs(cross_hat) ** 2

    p_signal = beta * eps * np.diagonal(gain2_hat)
    p_inter = beta * (gain2_hat @ eps - eps * np.diagonal(gain2_hat))
    beam_energy = float(np.sum(eps * np.sum(np.abs(q) ** 2, axis=0)))
    p_est = beta * b2_bar * beam_energy
    if config.sigma_r2 > 0 and config.N_t > 0:
        p_radar = config.sigma_r2 * np.sum(np.abs(realization.g_rk) ** 2, axis=1) / config.N_t
    else:
        p_radar = np.zeros(config.K)
    p_noise = np.full(config.K, config.N0)

    zeta = {
        "signal": p_signal,
        "inter_user": p_inter,
        "est_error": p_est,
        "radar": p_radar,
        "noise": p_noise,
    }
    denom = p_inter + p_est + p_radar + p_noise
    return DownlinkEmpirical(gamma=p_signal / denom, zeta=zeta, total=p_signal + denom)


def _solver(scenario: Scenario, config: SystemConfig, b2: np.ndarray, alpha: float):
    """Fixed-point solver over the mixed user/radar-column weight vector."""
    weights = np.concatenate([
        np.asarray(b2, dtype=float),
        np.full(config.N_r, scenario.eta_I - scenario.eta_e),
    ])

    def solve(exclusions: tuple[int, ...]) -> tuple[float, float]:
        problem = DeProblem(weights, alpha, config.M, exclusions=exclusions)
        try:
            sol = solve_delta(problem, tol=config.de_tol, max_iter=config.de_max_iter)
            prime = solve_delta_prime(sol)
        except DeError as exc:
            raise DeError(f"{exc} [leave-out set {exclusions}]") from exc
        return sol.mu, prime.mu_prime

    return solve


def de_downlink_sinr(
    scenario: Scenario,
    powers: PowerAllocation,
    config: SystemConfig,
    b2: np.ndarray,
    alpha: float,
) -> DownlinkDeResult:
    """Deterministic-equivalent per-user downlink SINR.

    The fixed points run over K user weights b2_l and N_r radar-column
    weights eta_I - eta_e; no per-drop matrix enters, so the result depends
    on the drop only through the large-scale coefficients.
    """
    K = config.K
    b2 = np.asarray(b2, dtype=float)
    b2_bar = 1.0 - b2
    eps = powers.eps_dn_data
    beta = scenario.beta
    solve = _solver(scenario, config, b2, alpha)

    mu_k = np.empty(K)
    mu_p_k = np.empty(K)
    for k in range(K):
        mu_k[k], mu_p_k[k] = solve((k,))

    mu_km = np.zeros((K, K))
    mu_p_km = np.zeros((K, K))
    for k, m in combinations(range(K), 2):
        mu, mu_p = solve((k, m))
        mu_km[k, m] = mu_km[m, k] = mu
        mu_p_km[k, m] = mu_p_km[m, k] = mu_p

    # Service quality of user l's own beam, shared by the estimation-error term.
    own = b2 * mu_k
    own_gain = eps * b2 * mu_p_k / (1.0 + own) ** 2

    zeta = {name: np.zeros(K) for name in ZETA_TERMS}
    for k in range(K):
        common = (1.0 + own[k]) ** 2
        zeta["signal"][k] = beta[k] * eps[k] * own[k] ** 2 / common
        others = [m for m in range(K) if m != k]
        if others:
            terms = np.array([
                eps[m] * b2[m] * mu_p_km[k, m] / (1.0 + b2[m] * mu_km[k, m]) ** 2
                for m in others
            ])
            zeta["inter_user"][k] = beta[k] * b2[k] / common * float(np.sum(terms))
        zeta["est_error"][k] = beta[k] * b2_bar[k] * float(np.sum(own_gain))
        zeta["radar"][k] = config.sigma_r2 * scenario.eta_rk[k]
        zeta["noise"][k] = config.N0

    denom = sum(zeta[name] for name in ZETA_TERMS if name != "signal")
    gamma = zeta["signal"] / denom
    return DownlinkDeResult(gamma=gamma, rate=np.log2(1.0 + gamma), zeta=zeta)


def de_radar_noise_power(
    scenario: Scenario,
    powers: PowerAllocation,
    config: SystemConfig,
    b2: np.ndarray,
    alpha: float,
) -> float:
    """Per-antenna interference-plus-noise power at the radar in the downlink.

    Thermal noise, the transmission leaking through the error part of the
    BS-to-radar channel (proportional to eta_e and the precoder column
    energies), and the residual leakage through the estimated part that the
    null does not fully remove at finite regularization.
    """
    K = config.K
    b2 = np.asarray(b2, dtype=float)
    eps = powers.eps_dn_data
    eta_hat = scenario.eta_I - scenario.eta_e
    solve = _solver(scenario, config, b2, alpha)

    mu_l = np.empty(K)
    mu_p_l = np.empty(K)
    for l in range(K):
        mu_l[l], mu_p_l[l] = solve((l,))
    beam_energy = eps * b2 * mu_p_l / (1.0 + b2 * mu_l) ** 2  # E||q_l||^2 * eps_l

    p_err = scenario.eta_e * float(np.sum(beam_energy))

    p_hat = 0.0
    if config.N_r > 0 and eta_hat > 0:
        mu_g, _ = solve((K,))
        null_gain = (1.0 + eta_hat * mu_g) ** 2
        for i in range(K):
            mu_gi, mu_p_gi = solve((K, i))
            p_hat += (
                eps[i] * b2[i] * eta_hat * mu_p_gi
                / (null_gain * (1.0 + b2[i] * mu_gi) ** 2)
            )

    return config.N0 + p_err + p_hat
