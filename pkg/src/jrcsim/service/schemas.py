"""Pydantic request/response models for the experiment service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..config import SystemConfig, config_from_mapping

CurveKind = Literal[
    "est-mse", "aoa-mse", "ul-rate", "ul-radar-rate", "dl-rate", "dl-radar-rate",
]


class ConfigPayload(BaseModel):
    """Flat system configuration; unset fields keep their defaults.

    Field names match the configuration-file keys one to one; unknown keys
    are rejected.
    """

    model_config = ConfigDict(extra="forbid")

    M: Optional[int] = None
    K: Optional[int] = None
    N_t: Optional[int] = None
    N_r: Optional[int] = None
    f_c: Optional[float] = None
    cell_radius: Optional[float] = None
    alpha_pl: Optional[float] = None
    frame_len: Optional[int] = None
    tau_u: Optional[int] = None
    tau_d: Optional[int] = None
    N0: Optional[float] = None
    eps_up_pilot: Optional[float] = None
    eps_up_data: Optional[float] = None
    eps_dn_data: Optional[float] = None
    sigma_r2: Optional[float] = None
    radar_snr: Optional[float] = None
    interf_err_frac: Optional[float] = None
    seed: Optional[int] = None
    de_tol: Optional[float] = None
    de_max_iter: Optional[int] = None
    music_grid_deg: Optional[float] = None
    trials: Optional[int] = None
    alpha_dl: Optional[float] = None

    def to_config(self, base: SystemConfig | None = None) -> SystemConfig:
        data = {k: v for k, v in self.model_dump().items() if v is not None}
        return config_from_mapping(data, base=base)


class CurveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: CurveKind
    config: ConfigPayload = Field(default_factory=ConfigPayload)
    sweep: Optional[str] = None
    grid: Optional[list[float]] = None
    trials: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    threads: int = Field(default=1, ge=1)


class CurveResponse(BaseModel):
    kind: str
    points: list[dict]
    csv: str
    manifest: dict
    failures: int


class RateRegionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ConfigPayload = Field(default_factory=ConfigPayload)
    mode: Literal["uplink", "downlink"] = "uplink"
    radar_grid: Optional[list[float]] = None
    comm_grid: Optional[list[float]] = None
    trials: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    threads: int = Field(default=1, ge=1)
    mc_check_trials: Optional[int] = Field(default=None, ge=0)


class RateRegionResponse(BaseModel):
    mode: str
    points: list[dict]
    frontier: list[dict]
    chord: list[dict]
    csv: str
    manifest: dict
    failures: int


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ConfigPayload = Field(default_factory=ConfigPayload)
    trials: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    threads: int = Field(default=1, ge=1)
    gamma_threshold: float = Field(default=0.10, gt=0)
    term_threshold: float = Field(default=0.10, gt=0)


class ValidateResponse(BaseModel):
    passed: bool
    flags: list[str]
    failures: int
    report: dict


class HealthResponse(BaseModel):
    status: str
    version: str
