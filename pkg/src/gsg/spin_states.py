"""Spin states of a fixed total angular momentum ``j`` in the Dicke basis.

Amplitudes are stored in ascending ``m`` order, ``m = -j, -j+1, ..., +j``,
so index ``i`` corresponds to ``m = -j + i``.  The spin ground state is
``|m=-j>`` and the coherent state with ``theta = 0`` coincides with it.

All constructors return normalized states whose first non-negligible
amplitude is real and non-negative.  ``rotate`` is the only operation that
does not fix the global phase, since the SU(2) double cover is observable
through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidSpinError

_PHASE_EPS = 1e-12


def check_spin(j) -> float:
    """Validate ``j`` as a positive half-integer (number or "p/q" string) and return it as a float."""
    try:
        value = float(Fraction(j)) if isinstance(j, str) else float(j)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidSpinError(f"spin must be a half-integer, got {j!r}") from exc
    twice = 2 * value
    if not np.isfinite(twice) or abs(twice - round(twice)) > 1e-9 or round(twice) < 1:
        raise InvalidSpinError(f"spin must be a positive half-integer, got {j!r}")
    return round(twice) / 2


def spin_dim(j) -> int:
    return int(round(2 * check_spin(j))) + 1


def m_values(j) -> np.ndarray:
    j = check_spin(j)
    return np.arange(spin_dim(j)) - j


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def fix_global_phase(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real >= 0."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    idx = np.flatnonzero(np.abs(amplitudes) > _PHASE_EPS)
    if idx.size == 0:
        return amplitudes.copy()
    first = amplitudes[idx[0]]
    return amplitudes * (abs(first) / first)


@dataclass(frozen=True)
class SpinState:
    """Pure spin-``j`` state given by its Dicke amplitudes ``c_m``."""

    j: float
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        j = check_spin(self.j)
        amps = _freeze(self.amplitudes)
        if amps.ndim != 1 or amps.size != spin_dim(j):
            raise DomainError(f"expected {spin_dim(j)} amplitudes for j={j}, got shape {amps.shape}")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, j, amplitudes, fix_phase=True) -> "SpinState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise DomainError("cannot normalize a zero or non-finite amplitude vector")
        amps = amps / norm
        if fix_phase:
            amps = fix_global_phase(amps)
        return cls(j, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def m(self) -> np.ndarray:
        return m_values(self.j)

    @property
    def probabilities(self) -> np.ndarray:
        """Spin distribution ``P_s(m) = |c_m|^2``."""
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "SpinState") -> complex:
        """``<self|other>``."""
        if other.dim != self.dim:
            raise DomainError("overlap between states of different spin")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class SpinOperatorSet:
    j: float
    Jx: np.ndarray
    Jy: np.ndarray
    Jz: np.ndarray
    Jp: np.ndarray
    Jm: np.ndarray


@lru_cache(maxsize=None)
def spin_operators(j) -> SpinOperatorSet:
    """Dense ``(2j+1) x (2j+1)`` angular momentum matrices with hbar = 1."""
    j = check_spin(j)
    m = m_values(j)
    # J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>: sub-diagonal in ascending order
    jp = np.diag(np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)), -1).astype(complex)
    jm = jp.conj().T
    ops = dict(
        Jx=(jp + jm) / 2,
        Jy=(jp - jm) / 2j,
        Jz=np.diag(m).astype(complex),
        Jp=jp,
        Jm=jm,
    )
    for a in ops.values():
        a.setflags(write=False)
    return SpinOperatorSet(j=j, **ops)


def expm_hermitian(H: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H`` by eigendecomposition."""
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def ground_state(j) -> SpinState:
    j = check_spin(j)
    amps = np.zeros(spin_dim(j), dtype=complex)
    amps[0] = 1.0
    return SpinState(j, amps)


def _log_binom(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _css_amplitudes(j: float, theta: float, phi: float) -> np.ndarray:
    """Unnormalized-safe closed form of ``c_m ~ mu^(j+m) sqrt(binom(2j, j+m))``.

    With ``mu = e^{i phi} tan(theta/2)`` and the Radcliffe normalization
    ``(1 + |mu|^2)^(-j)`` the amplitudes are
    ``sqrt(binom) sin^(j+m)(theta/2) cos^(j-m)(theta/2) e^{i phi (j+m)}``,
    which stays finite at the ``theta = pi`` pole where ``mu`` diverges.
    Angles outside ``[0, pi]`` are folded onto the sphere the way the
    analytic continuation of ``tan(theta/2)`` does it.
    """
    theta = float(theta) % (2 * np.pi)
    if theta > np.pi:
        theta = 2 * np.pi - theta
        phi = phi + np.pi
    n = int(round(2 * j))
    k = np.arange(n + 1)
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    logb = np.array([_log_binom(n, kk) for kk in k])
    with np.errstate(divide="ignore"):
        mag = np.exp(0.5 * logb) * np.power(s, k) * np.power(c, n - k)
    return mag * np.exp(1j * phi * k)


def coherent_spin_state(j, theta, phi=0.0) -> SpinState:
    """Coherent spin state ``|phi, theta>``.

    ``theta = 0`` is the ground state ``|-j>`` and ``theta = pi`` is ``|+j>``;
    ``|c_m|^2`` follows the binomial law with success probability
    ``sin^2(theta/2)``.
    """
    j = check_spin(j)
    if not (0.0 <= theta <= np.pi):
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    if theta == np.pi:
        amps = np.zeros(spin_dim(j), dtype=complex)
        amps[-1] = 1.0
        return SpinState(j, amps)
    return SpinState.from_amplitudes(j, _css_amplitudes(j, theta, phi))


def css_superposition(j, theta1, phi1, theta2, phi2) -> SpinState:
    """Normalized superposition of two coherent states.

    The normalization uses the exact overlap of the two components, so
    non-orthogonal pairs are handled correctly and identical arguments
    return the coherent state itself.
    """
    j = check_spin(j)
    a = SpinState.from_amplitudes(j, _css_amplitudes(j, theta1, phi1)).amplitudes
    b = SpinState.from_amplitudes(j, _css_amplitudes(j, theta2, phi2)).amplitudes
    norm2 = 2.0 + 2.0 * np.vdot(a, b).real
    if norm2 < 1e-24:
        raise DomainError("the two coherent states cancel exactly")
    return SpinState.from_amplitudes(j, (a + b) / np.sqrt(norm2))


def symmetric_superposition(j, delta_theta, delta_phi=0.0, theta0=np.pi / 2) -> SpinState:
    """``N (|theta0 + dtheta, dphi> + |theta0 - dtheta, -dphi>)``."""
    return css_superposition(j, theta0 + delta_theta, delta_phi, theta0 - delta_theta, -delta_phi)


def twisting_generator(j, axis_mode: str) -> np.ndarray:
    """Hermitian generator of the squeezing unitary ``exp(-i chi H)``.

    one_axis: ``Jy^2``.  two_axis: ``(J+^2 - J-^2) / 2i``.
    """
    ops = spin_operators(j)
    if axis_mode == "one_axis":
        return ops.Jy @ ops.Jy
    if axis_mode == "two_axis":
        return (ops.Jp @ ops.Jp - ops.Jm @ ops.Jm) / 2j
    raise DomainError(f"unknown axis mode {axis_mode!r}")


def squeezed_spin_state(j, chi, theta, phi=0.0, axis_mode="one_axis") -> SpinState:
    base = coherent_spin_state(j, theta, phi)
    if chi == 0:
        return base
    U = expm_hermitian(twisting_generator(base.j, axis_mode), chi)
    return SpinState.from_amplitudes(base.j, U @ base.amplitudes)


def rotate(state: SpinState, alpha, beta, gamma) -> SpinState:
    """Apply ``exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz)``.

    The global phase is left untouched.
    """
    ops = spin_operators(state.j)
    m = state.m
    amps = np.exp(-1j * gamma * m) * state.amplitudes
    amps = expm_hermitian(ops.Jy, beta) @ amps
    amps = np.exp(-1j * alpha * m) * amps
    return SpinState(state.j, amps)


def spin_moments(state: SpinState):
    """Mean spin vector and symmetrized covariance matrix of ``(Jx, Jy, Jz)``."""
    ops = spin_operators(state.j)
    psi = state.amplitudes
    J = (ops.Jx, ops.Jy, ops.Jz)
    mean = np.array([np.vdot(psi, A @ psi).real for A in J])
    cov = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            sym = (J[a] @ J[b] + J[b] @ J[a]) / 2
            cov[a, b] = np.vdot(psi, sym @ psi).real - mean[a] * mean[b]
    return mean, cov


def transverse_variances(state: SpinState) -> np.ndarray:
    """Eigenvalues (ascending) of the spin covariance in the plane normal to the mean spin."""
    mean, cov = spin_moments(state)
    n = mean / np.linalg.norm(mean)
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - n * (trial @ n)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    P = np.stack([e1, e2])
    return np.linalg.eigvalsh(P @ cov @ P.T)


@dataclass(frozen=True)
class HusimiField:
    """Husimi-Q values on a uniform ``(theta, phi)`` grid.

    ``theta`` spans ``[0, pi]`` inclusive; ``phi`` spans ``[0, 2 pi)``.
    """

    j: float
    theta: np.ndarray
    phi: np.ndarray
    q: np.ndarray  # shape (n_theta, n_phi)

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    def normalization(self) -> float:
        """``(2j+1)/(4 pi) * integral of Q sin(theta) dtheta dphi``."""
        inner = np.trapezoid(self.q * np.sin(self.theta)[:, None], self.theta, axis=0)
        return float((2 * self.j + 1) / (4 * np.pi) * inner.sum() * (2 * np.pi / self.n_phi))


def husimi_q(state: SpinState, n_theta: int, n_phi: int) -> HusimiField:
    if n_theta < 2 or n_phi < 2:
        raise DomainError("husimi grid needs at least 2 points per axis")
    j = state.j
    n = int(round(2 * j))
    theta = np.linspace(0.0, np.pi, n_theta)
    phi = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    k = np.arange(n + 1)
    logb = np.array([_log_binom(n, kk) for kk in k])
    s, c = np.sin(theta / 2)[:, None], np.cos(theta / 2)[:, None]
    mag = np.exp(0.5 * logb)[None, :] * s**k * c ** (n - k)
    ph = np.exp(-1j * np.outer(k, phi))
    amp = mag @ (state.amplitudes[:, None] * ph)
    q = np.clip(np.abs(amp) ** 2, 0.0, 1.0)
    return HusimiField(j=j, theta=theta, phi=phi, q=q)
