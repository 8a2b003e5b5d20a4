"""THz line-of-sight link: spreading loss, molecular absorption, noise, SINR, capacity.

All powers are linear watts. Every function is pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

K_BOLTZMANN = constants.k  # J/K
SPEED_OF_LIGHT = constants.c  # m/s


@dataclass(frozen=True)
class ChannelParams:
    """Physical-layer constants and tagged-link geometry.

    f : carrier frequency (Hz)
    K : absorption coefficient of the medium (1/m)
    T : temperature (K)
    p : transmit power of every SBS (W)
    W : bandwidth (Hz)
    d0 : tagged user to serving SBS distance (m)
    L : packet size (bits)
    """

    f: float = 1e12
    K: float = 0.0016
    T: float = 300.0
    p: float = 1.0
    W: float = 10e9
    d0: float = 1.0
    L: float = 10e6

    def __post_init__(self):
        for name in ("f", "T", "p", "W", "d0", "L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"ChannelParams.{name} must be > 0, got {getattr(self, name)!r}")
        if not self.K >= 0:
            raise ValueError(f"ChannelParams.K must be >= 0, got {self.K!r}")

    @property
    def A0(self) -> float:
        """Effective aperture term c^2 / (16 pi^2 f^2), in m^2."""
        return aperture(self.f)

    def with_(self, **changes) -> "ChannelParams":
        return replace(self, **changes)


def aperture(f: float) -> float:
    if f <= 0:
        raise ValueError("frequency must be positive")
    return SPEED_OF_LIGHT**2 / (16.0 * math.pi**2 * f**2)


def free_space_loss(f, d):
    """Spreading loss (4 pi f d / c)^2 (dimensionless, >= 0)."""
    f = np.asarray(f, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(f <= 0) or np.any(d <= 0):
        raise ValueError("free_space_loss needs f > 0 and d > 0")
    out = (4.0 * np.pi * f * d / SPEED_OF_LIGHT) ** 2
    return out.item() if out.ndim == 0 else out


def transmittance(K, d):
    """Beer-Lambert transmittance exp(-K d)."""
    K = np.asarray(K, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(K < 0) or np.any(d < 0):
        raise ValueError("transmittance needs K >= 0 and d >= 0")
    out = np.exp(-K * d)
    return out.item() if out.ndim == 0 else out


def path_loss(f, K, d):
    """Total loss: spreading loss times molecular absorption loss 1/tau."""
    return free_space_loss(f, d) / transmittance(K, d)


def received_power(params: ChannelParams, p_tx, d):
    """p_tx * A0 * d^-2 * exp(-K d)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("received_power needs d > 0")
    out = np.asarray(p_tx, dtype=float) * params.A0 / d**2 * np.exp(-params.K * d)
    return out.item() if out.ndim == 0 else out


def thermal_noise(params: ChannelParams) -> float:
    """Johnson-Nyquist noise power k_B T W over the band."""
    return K_BOLTZMANN * params.T * params.W


def absorption_noise(params: ChannelParams, p_tx, d):
    """Noise re-radiated by the medium along a link: p A0 d^-2 (1 - exp(-K d))."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("absorption_noise needs d > 0")
    out = np.asarray(p_tx, dtype=float) * params.A0 / d**2 * -np.expm1(-params.K * d)
    return out.item() if out.ndim == 0 else out


def noise_floor(params: ChannelParams) -> float:
    """N0: thermal noise over W plus the tagged link's own absorption noise."""
    return thermal_noise(params) + absorption_noise(params, params.p, params.d0)


def tagged_received_power(params: ChannelParams) -> float:
    return received_power(params, params.p, params.d0)


def sinr(params: ChannelParams, combined_interference):
    """SINR of the tagged link.

    ``combined_interference`` is sum_i p A0 d_i^-2, i.e. interferer power plus
    interferer absorption noise (the exp(-K d_i) factors cancel).
    """
    denom = noise_floor(params) + np.asarray(combined_interference, dtype=float)
    if np.any(denom <= 0):
        raise ValueError("noise floor plus interference must be positive; clip Gaussian samples first")
    out = tagged_received_power(params) / denom
    return out.item() if out.ndim == 0 else out


def capacity(params: ChannelParams, combined_interference):
    """Shannon rate W log2(1 + SINR) in bit/s."""
    return params.W * np.log2(1.0 + sinr(params, combined_interference))


def transmission_time(params: ChannelParams, combined_interference):
    """Seconds needed to push one packet of L bits at the Shannon rate."""
    return params.L / capacity(params, combined_interference)
