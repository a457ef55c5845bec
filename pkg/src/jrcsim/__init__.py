"""Link-level simulator for a MIMO radar coexisting with a massive MIMO cell.

Monte Carlo and deterministic-equivalent performance of both subsystems:
channel estimation under radar interference, MMSE uplink combining, RZF
downlink precoding with a radar null, MUSIC angle estimation, angle CRBs,
radar rates and achievable rate regions.
"""

from .config import ConfigError, SystemConfig, apply_overrides, load_config
from .scenario import PowerAllocation, Scenario, build_scenario, power_control
from .channels import ChannelRealization, draw_channels, dump_realization, load_realization
from .training import (
    ChannelEstimate,
    LmmseCoefficients,
    estimate_channels,
    generate_pilots,
    lmmse_coefficients,
    pilot_radar_block,
    pilot_rx_block,
)
from .de import (
    DeConvergenceError,
    DeError,
    DeProblem,
    DeRegimeError,
    DeSolution,
    resolvent_trace_mc_oracle,
    solve_delta,
    solve_delta_prime,
)
from .radar import (
    ArrayManifold,
    RadarMetrics,
    array_manifold,
    crb,
    music_aoa,
    radar_rate,
    radar_waveform,
    simulate_radar_receive,
)
from .uplink import de_uplink_sinr, empirical_uplink_sinr, mmse_combiner
from .downlink import (
    Precoder,
    de_downlink_sinr,
    de_radar_noise_power,
    default_alpha,
    empirical_downlink_sinr,
    rzf_precoder,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
