"""Instantaneous jump rates of the symmetric and tilted dynamics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..params import ReservoirParams
from .field import TiltField
from .types import LatticeConfiguration


@dataclass(frozen=True)
class RateTable:
    """Rates of every possible event.

    ``bonds[k - 1]`` is the exchange rate across the bond ``(k, k + 1)``.
    """

    bonds: np.ndarray
    left: float
    right: float

    @property
    def total(self) -> float:
        return float(self.bonds.sum() + self.left + self.right)


def _occ(config):
    occ = config.occupancy if isinstance(config, LatticeConfiguration) else np.asarray(config)
    return occ.astype(float)


def ssep_rates(config: LatticeConfiguration, params: ReservoirParams) -> RateTable:
    eta = _occ(config)
    n = eta.size + 1
    n2 = float(n) * n
    bonds = np.where(eta[1:] != eta[:-1], n2, 0.0)
    left = n / params.cap_a * ((1 - eta[0]) * params.alpha + (1 - params.alpha) * eta[0])
    right = n / params.cap_b * ((1 - eta[-1]) * params.beta + (1 - params.beta) * eta[-1])
    return RateTable(bonds, float(left), float(right))


def wasep_rates(config: LatticeConfiguration, params: ReservoirParams, field: TiltField, t: float) -> RateTable:
    if field.is_zero:
        return ssep_rates(config, params)
    eta = _occ(config)
    n = eta.size + 1
    n2 = float(n) * n
    h = field.value(t, np.arange(1, n) / n)
    jump = eta[1:] - eta[:-1]
    bonds = np.where(jump != 0, n2 * np.exp(-jump * np.diff(h)), 0.0)
    e0, e1 = eta[0], eta[-1]
    left = n / params.cap_a * (np.exp(h[0]) * params.alpha * (1 - e0) + np.exp(-h[0]) * (1 - params.alpha) * e0)
    right = n / params.cap_b * (np.exp(h[-1]) * params.beta * (1 - e1) + np.exp(-h[-1]) * (1 - params.beta) * e1)
    return RateTable(bonds, float(left), float(right))
