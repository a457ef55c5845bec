"""Cell geometry and the large-scale coefficients derived from it.

One scenario is a single drop: user, radar and target positions plus the
path gains, interference variances and the target reflection coefficient.
Everything here is deterministic given (config, seed) and immutable after
construction, so scenarios can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, SystemConfig


@dataclass(frozen=True)
class Scenario:
    """Sampled geometry and derived per-drop large-scale quantities."""

    user_positions: np.ndarray   # (K, 2) cartesian, m, BS at the origin
    radar_position: np.ndarray   # (2,)
    target_position: np.ndarray  # (2,)
    theta: float                 # target angle seen from the radar, rad, in (-pi/2, pi/2)
    beta: np.ndarray             # (K,) BS-user path gains, in (0, 1]
    eta_I: float                 # BS-radar interference variance
    eta_e: float                 # interference-estimate error variance (<= eta_I)
    eta_rk: np.ndarray           # (K,) radar-user path gains
    h_rr: complex                # target reflection coefficient

    def __post_init__(self):
        self.user_positions.setflags(write=False)
        self.beta.setflags(write=False)
        self.eta_rk.setflags(write=False)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-user energies after channel-inversion power control."""

    eps_up_pilot: np.ndarray  # (K,)
    eps_up_data: np.ndarray   # (K,)
    eps_dn_data: np.ndarray   # (K,)

    def __post_init__(self):
        for arr in (self.eps_up_pilot, self.eps_up_data, self.eps_dn_data):
            arr.setflags(write=False)

    def scaled(self, factor: float) -> "PowerAllocation":
        return PowerAllocation(
            eps_up_pilot=self.eps_up_pilot * factor,
            eps_up_data=self.eps_up_data * factor,
            eps_dn_data=self.eps_dn_data * factor,
        )


def path_gain(distance: np.ndarray | float, alpha_pl: float) -> np.ndarray | float:
    """Clamped power-law path gain min(d^-alpha, 1)."""
    return np.minimum(np.asarray(distance, dtype=float) ** (-alpha_pl), 1.0)


def _uniform_disc(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform(size=n))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def build_scenario(config: SystemConfig, rng: np.random.Generator | None = None) -> Scenario:
    """Sample one drop of the cell geometry.

    Users, radar and target are drawn uniformly over the disc of radius
    ``cell_radius``; the target angle is the radar-to-target bearing folded
    into the front hemisphere of the (linear) radar arrays.
    """
    config.validate()
    if rng is None:
        rng = np.random.default_rng(config.seed)

    users = _uniform_disc(rng, config.K, config.cell_radius)
    radar = _uniform_disc(rng, 1, config.cell_radius)[0]
    target = _uniform_disc(rng, 1, config.cell_radius)[0]

    d_users = np.linalg.norm(users, axis=1)
    d_br = float(np.linalg.norm(radar))
    d_rk = np.linalg.norm(users - radar[None, :], axis=1)

    beta = path_gain(d_users, config.alpha_pl)
    eta_I = float(path_gain(d_br, config.alpha_pl))
    eta_e = config.interf_err_frac * eta_I
    eta_rk = path_gain(d_rk, config.alpha_pl)

    delta = target - radar
    bearing = float(np.arctan2(delta[1], delta[0]))
    # A ULA cannot tell front from back; fold the bearing onto (-pi/2, pi/2).
    theta = float(np.arcsin(np.sin(bearing)))

    if config.sigma_r2 > 0:
        mag = np.sqrt(config.radar_snr * config.N0 / config.sigma_r2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        h_rr = complex(mag * np.exp(1j * phase))
    else:
        h_rr = 0j

    return Scenario(
        user_positions=users,
        radar_position=radar,
        target_position=target,
        theta=theta,
        beta=beta,
        eta_I=eta_I,
        eta_e=eta_e,
        eta_rk=eta_rk,
        h_rr=h_rr,
    )


def power_control(
    scenario: Scenario,
    config: SystemConfig,
    beta_floor: float = 1e-12,
) -> PowerAllocation:
    """Channel-inversion power control: eps_k = target / beta_k.

    After inversion, ``beta_k * eps_k`` is the configured received energy
    for every user, so the common received SNR is ``target / N0``.
    """
    beta = scenario.beta
    if np.any(beta < beta_floor):
        worst = float(beta.min())
        raise ConfigError(
            f"path gain {worst:.3e} below floor {beta_floor:.1e}; "
            "inversion would overflow"
        )
    return PowerAllocation(
        eps_up_pilot=config.eps_up_pilot / beta,
        eps_up_data=config.eps_up_data / beta,
        eps_dn_data=config.eps_dn_data / beta,
    )
