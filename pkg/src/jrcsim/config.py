"""System configuration: one flat, validated parameter set per experiment.

The configuration file format is flat TOML (no sections); keys are named
exactly like the dataclass fields below. Unknown keys are an error so that
typos never silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import tomli


class ConfigError(ValueError):
    """Raised for unknown keys, bad types or violated invariants."""


@dataclass(frozen=True)
class SystemConfig:
    """All dimensional, power and tolerance parameters of one experiment.

    Energies and powers are linear (not dB). The ``eps_*`` values are the
    per-user *received* energy targets: channel-inversion power control
    divides them by the large-scale coefficient of each user, so the
    received SNR ``eps / N0`` is common to all users.
    """

    # Array / cell dimensions
    M: int = 64               # BS antennas
    K: int = 4                # single-antenna users
    N_t: int = 4              # radar transmit antennas
    N_r: int = 4              # radar receive antennas
    f_c: float = 3e9          # carrier frequency, Hz (arrays are half-wavelength ULAs)
    cell_radius: float = 100.0  # m
    alpha_pl: float = 3.0     # path-loss exponent

    # Frame structure (channel uses); frame_len = K + tau_u + tau_d
    frame_len: int = 1024
    tau_u: int = 510
    tau_d: int = 510

    # Powers (linear)
    N0: float = 1.0           # noise power
    eps_up_pilot: float = 10.0  # received pilot energy target
    eps_up_data: float = 10.0   # received uplink data energy target
    eps_dn_data: float = 10.0   # received downlink data energy target
    sigma_r2: float = 1.0     # radar transmit power
    radar_snr: float = 100.0  # target-echo SNR (fixes |h_rr|^2 = radar_snr * N0 / sigma_r2)

    # Interference-channel estimation quality
    interf_err_frac: float = 0.1  # eta_e = interf_err_frac * eta_I

    # Reproducibility / numerics
    seed: int = 1234
    de_tol: float = 1e-9
    de_max_iter: int = 500
    music_grid_deg: float = 0.01
    trials: int = 500

    # Downlink regularization; None -> (K + N_r) * N0 / (M * mean received power)
    alpha_dl: float | None = None

    def validate(self) -> "SystemConfig":
        if self.M <= self.K + self.N_r:
            raise ConfigError(
                f"M must exceed K + N_r for the downlink null (got M={self.M}, "
                f"K={self.K}, N_r={self.N_r})"
            )
        for name in ("M", "K", "frame_len", "tau_u", "tau_d"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        # A zero-antenna radar is allowed: it degenerates to a radar-free cell.
        for name in ("N_t", "N_r"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("N0", "eps_up_pilot", "eps_up_data", "eps_dn_data",
                     "sigma_r2", "radar_snr", "cell_radius", "f_c"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0.0 <= self.interf_err_frac <= 1.0:
            raise ConfigError("interf_err_frac must lie in [0, 1]")
        if self.frame_len != self.K + self.tau_u + self.tau_d:
            raise ConfigError(
                f"frame_len must equal K + tau_u + tau_d "
                f"({self.K} + {self.tau_u} + {self.tau_d} != {self.frame_len})"
            )
        if self.de_tol <= 0:
            raise ConfigError("de_tol must be > 0")
        if self.de_max_iter < 1:
            raise ConfigError("de_max_iter must be >= 1")
        if self.music_grid_deg <= 0:
            raise ConfigError("music_grid_deg must be > 0")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.alpha_dl is not None and self.alpha_dl <= 0:
            raise ConfigError("alpha_dl must be > 0 when set")
        return self

    def replace(self, **kwargs) -> "SystemConfig":
        """Return a validated copy with the given fields replaced."""
        return dataclasses.replace(self, **kwargs).validate()

    def full_scale(self) -> "SystemConfig":
        """The large reference geometry: 128 BS antennas, 8 users, 8x8 radar."""
        return self.replace(
            M=128, K=8, N_t=8, N_r=8,
            frame_len=1024, tau_u=508, tau_d=508,
            trials=10_000,
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SystemConfig)}
_INT_FIELDS = {"M", "K", "N_t", "N_r", "frame_len", "tau_u", "tau_d",
               "seed", "de_max_iter", "trials"}


def _coerce(key: str, value) -> object:
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"key '{key}' expects an integer, got {value!r}")
        return value
    # alpha_dl and the float fields accept ints too
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}' expects a number, got {value!r}")
    return float(value)


def config_from_mapping(data: dict, base: SystemConfig | None = None) -> SystemConfig:
    """Build a config from a flat mapping, rejecting unknown keys."""
    base = base or SystemConfig()
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
    coerced = {k: _coerce(k, v) for k, v in data.items()}
    return dataclasses.replace(base, **coerced).validate()


def load_config(path: str | Path) -> SystemConfig:
    """Load a SystemConfig from a flat TOML file."""
    raw = Path(path).read_bytes()
    try:
        data = tomli.loads(raw.decode("utf-8"))
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    flat = {}
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"configuration must be flat; found table '{key}'")
        flat[key] = value
    return config_from_mapping(flat)


def parse_override(text: str) -> tuple[str, object]:
    """Parse one ``KEY=VALUE`` command-line override."""
    if "=" not in text:
        raise ConfigError(f"override '{text}' is not of the form KEY=VALUE")
    key, _, value = text.partition("=")
    key = key.strip()
    value = value.strip()
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key(s): {key}")
    if key == "alpha_dl" and value.lower() in ("none", "auto"):
        return key, None
    if key in _INT_FIELDS:
        try:
            return key, int(value)
        except ValueError:
            raise ConfigError(f"key '{key}' expects an integer, got {value!r}") from None
    try:
        return key, float(value)
    except ValueError:
        raise ConfigError(f"key '{key}' expects a number, got {value!r}") from None


def apply_overrides(config: SystemConfig, overrides: list[str]) -> SystemConfig:
    updates = dict(parse_override(o) for o in overrides)
    return dataclasses.replace(config, **updates).validate()
