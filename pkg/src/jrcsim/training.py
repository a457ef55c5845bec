"""Pilot phase: despreading and LMMSE channel estimation under radar interference.

Pilots are the unitary DFT matrix scaled by 1/sqrt(K): rows are orthonormal
sequences of K symbols each. User k transmits sqrt(eps_up_pilot_k) * psi_k[n],
so eps_up_pilot_k is the total pilot energy a user spends over the window.

Two estimator variants are supported. When the BS knows the radar waveform
timing ("sync-known") it subtracts the part of the despread interference it
can reconstruct from its interference-channel estimate, and the estimation
quality is the same on every antenna. Without that knowledge the residual
radar power differs per antenna through ||g_hat_rb_i||^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelRealization, crandn
from .config import SystemConfig
from .scenario import PowerAllocation, Scenario


@dataclass(frozen=True)
class LmmseCoefficients:
    """Despread-observation gains and the estimate/error variance split.

    Sync-known: all arrays have shape (K,). Sync-unknown: shape (M, K),
    one entry per (antenna, user). b2 + b2_bar == 1 always.
    """

    gain: np.ndarray
    b2: np.ndarray
    b2_bar: np.ndarray
    sync_known: bool


@dataclass(frozen=True)
class ChannelEstimate:
    """LMMSE estimates of the unit-variance user channels."""

    h_hat: np.ndarray       # (M, K)
    b2: np.ndarray          # (K,) sync-known, (M, K) sync-unknown
    b2_bar: np.ndarray
    sync_known: bool

    def b2_per_user(self) -> np.ndarray:
        """Per-user estimate variance; only defined for the sync-known split."""
        if not self.sync_known:
            raise ValueError("per-user b2 requires the sync-known (antenna-"
                             "independent) estimator")
        return self.b2


def generate_pilots(K: int) -> np.ndarray:
    """Orthonormal pilot matrix: K x K scaled DFT, rows are the sequences."""
    if K < 1:
        raise ValueError("K must be >= 1")
    n = np.arange(K)
    return np.exp(-2j * np.pi * np.outer(n, n) / K) / np.sqrt(K)


def pilot_radar_block(config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Radar emission seen by the BS during the pilot window.

    White across antennas and channel uses with per-antenna power sigma_r2,
    i.e. E[s s^H] = sigma_r2 * I_{N_t} per use. Shape (N_t, K).
    """
    return np.sqrt(config.sigma_r2) * crandn(rng, config.N_t, config.K)


def lmmse_coefficients(
    scenario: Scenario,
    powers: PowerAllocation,
    config: SystemConfig,
    sync_known: bool = True,
    g_hat_row_norms: np.ndarray | None = None,
) -> LmmseCoefficients:
    """Closed-form estimator gains and variances for the despread pilots.

    ``g_hat_row_norms`` holds ||g_hat_rb_i||^2 per BS antenna and is required
    in sync-unknown mode, where the known interference-channel estimate is
    left in as residual interference.
    """
    p = scenario.beta * powers.eps_up_pilot  # (K,) received pilot energies
    if np.any(~np.isfinite(p)):
        raise ValueError("non-finite pilot energies")
    resid = config.N_t * scenario.eta_e * config.sigma_r2 + config.N0

    if sync_known:
        denom = p + resid
        gain = np.sqrt(p) / denom
        b2 = p / denom
    else:
        if g_hat_row_norms is None:
            raise ValueError("sync-unknown coefficients need per-antenna "
                             "||g_hat_rb_i||^2")
        norms = np.asarray(g_hat_row_norms, dtype=float)
        if norms.ndim != 1 or np.any(~np.isfinite(norms)):
            raise ValueError("g_hat_row_norms must be a finite 1-D array")
        denom = p[None, :] + config.sigma_r2 * norms[:, None] + resid
        gain = np.sqrt(p)[None, :] / denom
        b2 = p[None, :] / denom

    return LmmseCoefficients(gain=gain, b2=b2, b2_bar=1.0 - b2, sync_known=sync_known)


def pilot_rx_block(
    realization: ChannelRealization,
    scenario: Scenario,
    powers: PowerAllocation,
    pilots: np.ndarray,
    radar_block: np.ndarray,
    config: SystemConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Assemble the M x K block the BS receives during the pilot window."""
    amp = np.sqrt(scenario.beta * powers.eps_up_pilot)  # (K,)
    signal = (realization.H * amp[None, :]) @ pilots
    interference = realization.G_rb @ radar_block
    noise = np.sqrt(config.N0) * crandn(rng, config.M, config.K)
    return signal + interference + noise


def estimate_channels(
    rx_block: np.ndarray,
    pilots: np.ndarray,
    coeffs: LmmseCoefficients,
    radar_block: np.ndarray | None = None,
    g_rb_hat: np.ndarray | None = None,
) -> ChannelEstimate:
    """Despread the pilot block and scale to the LMMSE channel estimates."""
    despread = rx_block @ pilots.conj().T  # (M, K) observations y_il
    if coeffs.sync_known:
        if radar_block is None or g_rb_hat is None:
            raise ValueError("sync-known estimation needs the radar block and "
                             "the interference-channel estimate")
        despread = despread - g_rb_hat @ radar_block @ pilots.conj().T
        h_hat = coeffs.gain[None, :] * despread
    else:
        h_hat = coeffs.gain * despread
    return ChannelEstimate(
        h_hat=h_hat, b2=coeffs.b2, b2_bar=coeffs.b2_bar,
        sync_known=coeffs.sync_known,
    )
