"""Uplink radio model: Rayleigh block fading, SINR and rate-driven transmit power."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MBPS = 1e6

DEFAULT_RATES = tuple(g * MBPS for g in range(2, 9))
# endpoints published for 2 and 8 Mbps; interior points fill a concave curve
DEFAULT_SSIM = (0.955, 0.968, 0.976, 0.982, 0.986, 0.989, 0.991)


class SingularLinkError(ValueError):
    pass


@dataclass(frozen=True)
class RadioLink:
    bandwidth_hz: float
    noise_w: float
    path_loss_exp: float
    distance_m: float
    gain_sq: float
    # (transmit power W, |H|^2, distance m) for every interfering base station
    interferers: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0 or self.noise_w <= 0 or self.path_loss_exp <= 0:
            raise ValueError("bandwidth, noise and path-loss exponent must be positive")
        if self.distance_m < 0 or self.gain_sq < 0:
            raise ValueError("distance and gain must be non-negative")

    def interference_plus_noise(self) -> float:
        a = self.path_loss_exp
        return self.noise_w + sum(p * h2 * d ** (-a) for p, h2, d in self.interferers)

    def received_gain(self) -> float:
        if self.gain_sq <= 0 or self.distance_m <= 0:
            raise SingularLinkError("zero channel gain or zero distance")
        return self.gain_sq * self.distance_m ** (-self.path_loss_exp)


@dataclass(frozen=True)
class RateTable:
    rates: tuple[float, ...] = DEFAULT_RATES
    ssim: tuple[float, ...] = DEFAULT_SSIM

    def __post_init__(self) -> None:
        if len(self.rates) != len(self.ssim) or not self.rates:
            raise ValueError("rates and SSIM values must be non-empty and equally long")
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise ValueError("rates must be strictly increasing")
        if any(b <= a for a, b in zip(self.ssim, self.ssim[1:])):
            raise ValueError("SSIM must be strictly increasing in rate")
        if any(not 0.0 < s <= 1.0 for s in self.ssim):
            raise ValueError("SSIM values must lie in (0, 1]")
        if self.rates[0] <= 0:
            raise ValueError("rates must be positive")

    def __len__(self) -> int:
        return len(self.rates)

    def index(self, rate: float) -> int:
        for k, g in enumerate(self.rates):
            if g == rate:
                return k
        raise KeyError(f"rate {rate} not in table")


def sample_gain(rng: np.random.Generator) -> float:
    """Draw |H|^2 for H = sqrt(1/2) (t + j t'), t and t' standard normal."""
    t, t2 = rng.standard_normal(2)
    return gain_from_normals(float(t), float(t2))


def gain_from_normals(t: float, t2: float) -> float:
    return (t * t + t2 * t2) / 2.0


def sinr(link: RadioLink, p_tran: float) -> float:
    return p_tran * link.received_gain() / link.interference_plus_noise()


def transmit_power(link: RadioLink, rate: float) -> float:
    """Uplink power (W) that makes B log2(1 + SINR) equal ``rate``."""
    if rate < 0:
        raise ValueError("rate must be non-negative")
    return link.interference_plus_noise() / link.received_gain() * math.expm1(
        rate / link.bandwidth_hz * math.log(2.0)
    )


def ssim_of_rate(table: RateTable, rate: float) -> float:
    return table.ssim[table.index(rate)]


def selected_rate_factor(rate: float, selected: int, bandwidth_hz: float) -> float:
    """2^(g e / B) written as (1 - e) + e 2^(g / B) for a binary selector e."""
    return (1 - selected) + selected * 2.0 ** (rate / bandwidth_hz)
