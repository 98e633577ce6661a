"""Scattering decoherence of the two-mass spin density matrix.

Both channels are Hadamard products with a fixed mask over the
``[m, m', n, n']`` indices, applied once over the interaction time.  Each
mass decoheres independently at the same rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entanglement import DensityMatrix
from .errors import DomainError


@dataclass(frozen=True)
class DecoherenceModel:
    gamma_short: float = 0.0  # Hz
    gamma_long: float = 0.0  # Hz / m^2
    delta_x: float = 2.5e-4  # m
    tau: float = 2.0  # s

    def __post_init__(self):
        for name in ("gamma_short", "gamma_long", "tau", "delta_x"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    @property
    def spin_half_rate(self) -> float:
        """``gamma_short + gamma_long dx^2``: the single rate that describes j = 1/2."""
        return self.gamma_short + self.gamma_long * self.delta_x**2

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        out = rho
        if self.gamma_short:
            out = apply_short(out, self.gamma_short, self.tau)
        if self.gamma_long:
            out = apply_long(out, self.gamma_long, self.delta_x, self.tau)
        return out


def _index_grids(d):
    i = np.arange(d)
    return np.meshgrid(i, i, i, i, indexing="ij")  # m, m', n, n'


def short_mask(d, rate_time) -> np.ndarray:
    """``exp(-(2 - delta_mm' - delta_nn') gamma tau)`` in ``[m, m', n, n']`` layout."""
    m, mp, n, np_ = _index_grids(d)
    return np.exp(-(2 - (m == mp) - (n == np_)) * rate_time)


def long_mask(d, rate_time) -> np.ndarray:
    """``exp(-Gamma dx^2 tau [(m-m')^2 + (n-n')^2])`` with ``rate_time = Gamma dx^2 tau``."""
    m, mp, n, np_ = _index_grids(d)
    return np.exp(-((m - mp) ** 2 + (n - np_) ** 2) * rate_time)


def _apply_mask(rho: DensityMatrix, mask) -> DensityMatrix:
    return DensityMatrix.from_tensor4(rho.tensor4() * mask)


def apply_short(rho: DensityMatrix, gamma_short, tau) -> DensityMatrix:
    if gamma_short < 0 or tau < 0:
        raise DomainError("decoherence rate and time must be non-negative")
    return _apply_mask(rho, short_mask(rho.d, gamma_short * tau))


def apply_long(rho: DensityMatrix, gamma_long, delta_x, tau) -> DensityMatrix:
    if gamma_long < 0 or tau < 0:
        raise DomainError("decoherence rate and time must be non-negative")
    return _apply_mask(rho, long_mask(rho.d, gamma_long * delta_x**2 * tau))


def spin_half_decohered(rho: DensityMatrix, gamma, tau) -> np.ndarray:
    """Closed form for two spin-1/2 masses with a single total rate ``gamma``.

    Entries with one mismatched spin index decay as ``exp(-gamma tau)``, those
    with both mismatched as ``exp(-2 gamma tau)``; populations are kept.
    """
    if rho.d != 2:
        raise DomainError("closed form only holds for j = 1/2")
    out = np.array(rho.matrix, dtype=complex)
    e1, e2 = np.exp(-gamma * tau), np.exp(-2 * gamma * tau)
    for row in range(4):
        m, n = divmod(row, 2)
        for col in range(4):
            mp, np_ = divmod(col, 2)
            mismatches = (m != mp) + (n != np_)
            out[row, col] *= (1.0, e1, e2)[mismatches]
    return out
