"""Small-scale channel draws for one Monte Carlo trial.

All channels are i.i.d. zero-mean circularly symmetric complex Gaussian.
The BS-radar interference channels come pre-split into an estimate part and
an independent error part (variances eta_I - eta_e and eta_e); the sum is
the true channel, exactly, entry by entry.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SystemConfig
from .scenario import Scenario

_MAGIC = b"JRCCH001"


def crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """Standard complex normal: unit variance split evenly over re/im."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of every small-scale channel in the system.

    Shapes (BS-side matrices keep the BS dimension first):
      H          (M, K)    unit-variance BS-user channels
      G_rb_hat   (M, N_t)  radar-tx -> BS interference, estimate part
      G_rb_tilde (M, N_t)  radar-tx -> BS interference, error part
      G_br_hat   (M, N_r)  BS -> radar-rx interference, estimate part
      G_br_tilde (M, N_r)  BS -> radar-rx interference, error part
      g_rk       (K, N_t)  radar-tx -> user k rows
      g_kr       (K, N_r)  user k -> radar-rx rows
    """

    H: np.ndarray
    G_rb_hat: np.ndarray
    G_rb_tilde: np.ndarray
    G_br_hat: np.ndarray
    G_br_tilde: np.ndarray
    g_rk: np.ndarray
    g_kr: np.ndarray

    @property
    def G_rb(self) -> np.ndarray:
        return self.G_rb_hat + self.G_rb_tilde

    @property
    def G_br(self) -> np.ndarray:
        return self.G_br_hat + self.G_br_tilde


def draw_channels(
    scenario: Scenario, config: SystemConfig, rng: np.random.Generator
) -> ChannelRealization:
    """Draw all small-scale channels for one trial."""
    M, K = config.M, config.K
    n_t, n_r = config.N_t, config.N_r

    sd_hat = np.sqrt(max(scenario.eta_I - scenario.eta_e, 0.0))
    sd_err = np.sqrt(scenario.eta_e)
    sd_rk = np.sqrt(scenario.eta_rk)  # (K,)

    return ChannelRealization(
        H=crandn(rng, M, K),
        G_rb_hat=sd_hat * crandn(rng, M, n_t),
        G_rb_tilde=sd_err * crandn(rng, M, n_t),
        G_br_hat=sd_hat * crandn(rng, M, n_r),
        G_br_tilde=sd_err * crandn(rng, M, n_r),
        g_rk=sd_rk[:, None] * crandn(rng, K, n_t),
        g_kr=sd_rk[:, None] * crandn(rng, K, n_r),
    )


_FIELDS = ("H", "G_rb_hat", "G_rb_tilde", "G_br_hat", "G_br_tilde", "g_rk", "g_kr")


def dump_realization(real: ChannelRealization, path: str | Path) -> None:
    """Write a realization to a binary debug dump.

    Layout: 8-byte magic ``JRCCH001``; four little-endian uint32 dimensions
    (M, K, N_t, N_r); then the arrays H, G_rb_hat, G_rb_tilde, G_br_hat,
    G_br_tilde, g_rk, g_kr in that order, each row-major complex128
    (interleaved real/imag float64).
    """
    M, K = real.H.shape
    n_t = real.G_rb_hat.shape[1]
    n_r = real.G_br_hat.shape[1]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<4I", M, K, n_t, n_r))
        for name in _FIELDS:
            arr = np.ascontiguousarray(getattr(real, name), dtype=np.complex128)
            fh.write(arr.tobytes())


def load_realization(path: str | Path) -> ChannelRealization:
    """Read a realization written by :func:`dump_realization`."""
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise ValueError(f"{path}: not a channel dump (bad magic)")
    M, K, n_t, n_r = struct.unpack_from("<4I", raw, 8)
    shapes = {
        "H": (M, K),
        "G_rb_hat": (M, n_t),
        "G_rb_tilde": (M, n_t),
        "G_br_hat": (M, n_r),
        "G_br_tilde": (M, n_r),
        "g_rk": (K, n_t),
        "g_kr": (K, n_r),
    }
    offset = 8 + 16
    arrays = {}
    for name in _FIELDS:
        shape = shapes[name]
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype=np.complex128, count=count, offset=offset)
        arrays[name] = arr.reshape(shape).copy()
        offset += count * 16
    return ChannelRealization(**arrays)
