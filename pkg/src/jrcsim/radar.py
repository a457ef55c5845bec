"""Radar subsystem: array manifolds, snapshot simulation, MUSIC and angle CRBs.

Both radar arrays are half-wavelength uniform linear arrays, so the steering
vectors have unit-modulus entries exp(j pi n sin(theta)) and the manifold
derivative is analytic. The angle-of-arrival block spans N = N_t channel
uses and the transmitted block S is a scaled unitary matrix with
S S^H = sigma_r2 * I exactly; that normalization is what the CRB expressions
and the downlink radar-to-user interference power sigma_r2 * eta_rk assume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelRealization, crandn
from .config import SystemConfig
from .scenario import PowerAllocation, Scenario


@dataclass(frozen=True)
class ArrayManifold:
    """Steering vectors, the rank-one manifold A and its angle derivative."""

    theta: float
    a_t: np.ndarray   # (N_t,)
    a_r: np.ndarray   # (N_r,)
    A: np.ndarray     # (N_r, N_t) = a_r a_t^T
    A_dot: np.ndarray  # elementwise d A / d theta


@dataclass(frozen=True)
class RadarMetrics:
    """Angle-estimation bound and the radar information rate built on it."""

    crb: float         # rad^2
    radar_rate: float  # bits per channel use, log2(1 + 1/crb)
    theta_hat: float | None = None
    mse: float | None = None


def _element_offsets(n: int) -> np.ndarray:
    # Phase-reference at the array centroid: makes the manifold orthogonal to
    # its derivative, so the angle information (and the CRB built on it) does
    # not depend on an arbitrary reference-element choice.
    return np.arange(n) - (n - 1) / 2.0


def steering_vector(theta: float | np.ndarray, n: int) -> np.ndarray:
    """Half-wavelength ULA response; broadside theta=0 gives the all-ones vector."""
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * np.pi * np.multiply.outer(_element_offsets(n), np.sin(theta)))


def array_manifold(theta: float, n_t: int, n_r: int) -> ArrayManifold:
    """Build the transmit/receive manifold at one angle in (-pi/2, pi/2)."""
    if not -np.pi / 2 < theta < np.pi / 2:
        raise ValueError(f"theta {theta:.4f} rad outside (-pi/2, pi/2)")
    a_t = steering_vector(theta, n_t)
    a_r = steering_vector(theta, n_r)
    phase_rate = 1j * np.pi * np.cos(theta)
    a_t_dot = phase_rate * _element_offsets(n_t) * a_t
    a_r_dot = phase_rate * _element_offsets(n_r) * a_r
    A = np.outer(a_r, a_t)
    A_dot = np.outer(a_r_dot, a_t) + np.outer(a_r, a_t_dot)
    return ArrayManifold(theta=float(theta), a_t=a_t, a_r=a_r, A=A, A_dot=A_dot)


def radar_waveform(n_t: int, sigma_r2: float, rng: np.random.Generator) -> np.ndarray:
    """Draw one N_t x N_t transmit block with S S^H = sigma_r2 * I exactly.

    The unitary factor is Haar distributed (QR of a complex Gaussian with the
    phase convention fixed), so different seeds give different blocks with
    the identical Gram matrix.
    """
    z = crandn(rng, n_t, n_t)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))[None, :]
    return np.sqrt(sigma_r2) * q


def simulate_radar_receive(
    manifold: ArrayManifold,
    scenario: Scenario,
    s_block: np.ndarray,
    config: SystemConfig,
    rng: np.random.Generator,
    mode: str = "none",
    pilots: np.ndarray | None = None,
    powers: PowerAllocation | None = None,
    realization: ChannelRealization | None = None,
    precoder_matrix: np.ndarray | None = None,
    include_noise: bool = True,
) -> np.ndarray:
    """Assemble the N_r x N block the radar receives.

    Modes select the communication interference added to the target echo:
      "none"          echo (+ noise) only
      "uplink-pilot"  user pilot transmissions through g_kr
      "uplink-data"   unit-power uplink data symbols through g_kr
      "downlink"      the precoded BS transmission through the true G_br
    """
    n_r, n_t = manifold.A.shape
    if s_block.shape[0] != n_t:
        raise ValueError(f"waveform has {s_block.shape[0]} rows, manifold expects {n_t}")
    n = s_block.shape[1]
    z = scenario.h_rr * (manifold.A @ s_block)

    if mode == "none":
        pass
    elif mode in ("uplink-pilot", "uplink-data"):
        if powers is None or realization is None:
            raise ValueError(f"mode '{mode}' needs powers and a channel realization")
        if realization.g_kr.shape[1] != n_r:
            raise ValueError("g_kr dimension does not match the receive array")
        if mode == "uplink-pilot":
            if pilots is None:
                raise ValueError("mode 'uplink-pilot' needs the pilot matrix")
            if pilots.shape[1] < n:
                raise ValueError(
                    f"pilot window ({pilots.shape[1]} uses) shorter than the "
                    f"snapshot block ({n})"
                )
            symbols = pilots[:, :n]
            amps = np.sqrt(powers.eps_up_pilot)
        else:
            symbols = crandn(rng, config.K, n)
            amps = np.sqrt(powers.eps_up_data)
        z = z + realization.g_kr.T @ (amps[:, None] * symbols)
    elif mode == "downlink":
        if powers is None or realization is None or precoder_matrix is None:
            raise ValueError("mode 'downlink' needs powers, realization and the precoder")
        symbols = crandn(rng, config.K, n)
        tx = precoder_matrix @ (np.sqrt(powers.eps_dn_data)[:, None] * symbols)
        z = z + realization.G_br.conj().T @ tx
    else:
        raise ValueError(f"unknown mode '{mode}'")

    if include_noise:
        z = z + np.sqrt(config.N0) * crandn(rng, n_r, n)
    return z


def _music_scan(block: np.ndarray, grid_deg: float, refine: bool) -> tuple[float, bool]:
    """Noise-subspace scan of one n x N block; returns (theta_hat_deg, ok)."""
    n, cols = block.shape
    cov = block @ block.conj().T / cols
    evals, evecs = np.linalg.eigh(cov)
    noise_space = evecs[:, : n - 1]
    ok = bool(evals[-1] > evals[-2] * (1.0 + 1e-9) + 1e-300)

    grid = np.arange(-90.0 + grid_deg, 90.0, grid_deg)
    responses = steering_vector(np.deg2rad(grid), n)  # (n, G)
    cost = np.sum(np.abs(noise_space.conj().T @ responses) ** 2, axis=0)
    idx = int(np.argmin(cost))

    theta_deg = grid[idx]
    if refine and 0 < idx < grid.size - 1:
        lo, mid, hi = cost[idx - 1], cost[idx], cost[idx + 1]
        denom = lo - 2.0 * mid + hi
        if denom > 0:
            theta_deg = theta_deg + 0.5 * (lo - hi) / denom * grid_deg
    return float(theta_deg), ok


def music_aoa(
    z_block: np.ndarray,
    grid_deg: float,
    refine: bool = True,
    s_block: np.ndarray | None = None,
) -> tuple[float, bool]:
    """Estimate the target angle from one snapshot block.

    Eigendecomposes the sample covariance Z Z^H / N, projects the receive
    steering vector onto the noise subspace (the N_r - 1 smallest
    eigenvectors) over a uniform angle grid and refines the grid argmax with
    one parabolic interpolation step on the projection power.

    When the transmitted block ``s_block`` is supplied (the mono-static radar
    always knows it), the matched-filtered statistic Z S^H yields a second,
    transmit-aperture subspace estimate; fusing the two with their Fisher
    weights recovers the aperture information a receive-only scan discards
    and brings the estimator onto the two-sided angle bound.

    Returns (theta_hat, ok); ok is False when the covariance shows no
    signal/noise eigenvalue separation, in which case theta_hat is still the
    best-effort estimate and should be counted as a failure.
    """
    n_r = z_block.shape[0]
    theta_rx, ok = _music_scan(z_block, grid_deg, refine)
    theta_deg = theta_rx

    if s_block is not None and s_block.shape[0] >= 2 and n_r >= 2:
        n_t = s_block.shape[0]
        matched = z_block @ s_block.conj().T  # (n_r, n_t), rank-one + white noise
        theta_tx, ok_tx = _music_scan(matched.T, grid_deg, refine)
        if ok_tx:
            # Fisher weights of the two apertures (common factors cancel).
            w_rx = n_t * n_r * (n_r**2 - 1)
            w_tx = n_r * n_t * (n_t**2 - 1)
            theta_deg = (w_rx * theta_rx + w_tx * theta_tx) / (w_rx + w_tx)
    return float(np.deg2rad(theta_deg)), ok


def uplink_effective_noise(
    scenario: Scenario, powers: PowerAllocation, config: SystemConfig
) -> float:
    """Per-snapshot interference-plus-noise power at the radar, pilot window.

    The orthonormal pilots spread each user's pilot energy evenly over the K
    uses, so the per-use interference power is sum_k eps_up_pilot_k * eta_rk / K.
    """
    return config.N0 + float(np.sum(powers.eps_up_pilot * scenario.eta_rk)) / config.K


def crb_theta(
    manifold: ArrayManifold,
    sigma_r2: float,
    h_rr_abs2: float,
    sigma2_eff: float,
) -> float:
    """Angle CRB: sigma2_eff / (2 sigma_r2 |h_rr|^2 Re Tr{A_dot A_dot^H})."""
    if sigma2_eff <= 0:
        raise ValueError("effective noise power must be positive")
    echo = sigma_r2 * h_rr_abs2
    if echo <= 0:
        return np.inf
    re_tr = float(np.real(np.sum(manifold.A_dot * manifold.A_dot.conj())))
    return sigma2_eff / (2.0 * echo * re_tr)


def radar_rate(crb: float) -> float:
    """Radar information rate log2(1 + 1/CRB), zero for an infinite bound."""
    if not np.isfinite(crb):
        return 0.0
    return float(np.log2(1.0 + 1.0 / crb))


def crb(
    mode: str,
    scenario: Scenario,
    powers: PowerAllocation,
    config: SystemConfig,
    manifold: ArrayManifold | None = None,
    dl_noise_power: float | None = None,
) -> RadarMetrics:
    """Angle CRB and radar rate for one subframe.

    Uplink uses the pilot-window interference; downlink needs the
    deterministic-equivalent noise power (see
    :func:`jrcsim.downlink.de_radar_noise_power`).
    """
    if manifold is None:
        manifold = array_manifold(scenario.theta, config.N_t, config.N_r)
    if mode == "uplink":
        sigma2_eff = uplink_effective_noise(scenario, powers, config)
    elif mode == "downlink":
        if dl_noise_power is None:
            raise ValueError("downlink CRB needs the DE radar noise power")
        sigma2_eff = dl_noise_power
    else:
        raise ValueError(f"unknown mode '{mode}'")
    bound = crb_theta(manifold, config.sigma_r2, abs(scenario.h_rr) ** 2, sigma2_eff)
    return RadarMetrics(crb=bound, radar_rate=radar_rate(bound))
