"""Splitting and recombination dynamics of a generalized Stern-Gerlach loop.

A mass of spin ``j`` in a harmonic trap of frequency ``omega_M`` is driven
by ``H = hbar omega_M a^dag a - hbar g Jz (a + a^dag)``.  Each Dicke
component ``m`` follows its own coherent-state trajectory

    alpha_m(t) = m k (1 - exp(-i omega_M t)),   k = g / omega_M,

and picks up the dynamical phase ``k^2 m^2 (omega_M t - sin omega_M t)``.
The closed form is checked here against brute-force exponentiation of the
Hamiltonian in a truncated Fock space (``fock_oracle_evolve``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks
from scipy.special import gammaln

from .constants import CODATA2018, Constants
from .errors import DomainError, TruncationError, UnboundedSplittingTimeError
from .spin_states import SpinState, check_spin, m_values, spin_operators


@dataclass(frozen=True)
class GsgParams:
    """Trap and coupling parameters for one interferometer."""

    mass: float  # kg
    omega_M: float  # rad/s
    gradient: float  # T/m
    lande_g: float
    g: float  # rad/s
    constants: Constants = CODATA2018

    @property
    def k(self) -> float:
        """Dimensionless coupling ``g / omega_M``."""
        return self.g / self.omega_M

    @property
    def t_split(self) -> float:
        return np.pi / self.omega_M

    @property
    def sigma_x(self) -> float:
        """Width of every branch wavepacket, ``sqrt(hbar / (M omega_M))``."""
        return math.sqrt(self.constants.hbar / (self.mass * self.omega_M))

    @classmethod
    def from_k(cls, mass, omega_M, k, lande_g=2.0, constants=CODATA2018) -> "GsgParams":
        """Build parameters from the dimensionless coupling, inferring the gradient."""
        _check_positive(mass=mass, omega_M=omega_M)
        g = k * omega_M
        gradient = g / (lande_g * constants.mu_B * math.sqrt(1.0 / (2 * constants.hbar * mass * omega_M)))
        return cls(mass, omega_M, gradient, lande_g, g, constants)


def _check_positive(**kw):
    for name, value in kw.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")


def coupling_from_gradient(mass, omega_M, gradient, lande_g=2.0, constants=CODATA2018) -> GsgParams:
    _check_positive(mass=mass, omega_M=omega_M)
    g = lande_g * constants.mu_B * math.sqrt(1.0 / (2 * constants.hbar * mass * omega_M)) * gradient
    return GsgParams(mass, omega_M, gradient, lande_g, g, constants)


@dataclass(frozen=True)
class DiamagneticDerivation:
    """Trap frequency, coupling and splitting set by the diamagnetic response."""

    chi_m: float  # m^3/kg
    mu_0: float
    gradient: float
    omega_M: float
    g: float
    t_split: float
    delta_x: float
    params: GsgParams


def diamagnetic_params(chi_m, mass, gradient, lande_g=2.0, constants=CODATA2018) -> DiamagneticDerivation:
    """Derive ``omega_M = sqrt(|chi_m|/mu_0) dB/dx`` and the resulting loop scales.

    A zero gradient gives no trap and an infinite splitting time, reported
    as ``UnboundedSplittingTimeError``.
    """
    if chi_m == 0:
        raise DomainError("magnetic susceptibility must be non-zero")
    _check_positive(mass=mass)
    if gradient == 0:
        raise UnboundedSplittingTimeError("zero magnetic gradient: the splitting time is unbounded")
    if gradient < 0:
        raise DomainError(f"gradient must be positive, got {gradient}")
    mu_0 = constants.mu_0
    omega = math.sqrt(abs(chi_m) / mu_0) * gradient
    params = coupling_from_gradient(mass, omega, gradient, lande_g, constants)
    delta_x = 2 * lande_g * constants.mu_B * mu_0 / (mass * abs(chi_m) * gradient)
    return DiamagneticDerivation(
        chi_m=chi_m, mu_0=mu_0, gradient=gradient, omega_M=omega, g=params.g,
        t_split=np.pi / omega, delta_x=delta_x, params=params,
    )


def superposition_extent(params: GsgParams, j):
    """Adjacent-branch spacing ``dx`` and total extent ``dD = 2 j dx`` at ``t_s``."""
    j = check_spin(j)
    hbar = params.constants.hbar
    dx = 2 * math.sqrt(2 * hbar / (params.mass * params.omega_M)) * params.g / params.omega_M
    return dx, 2 * j * dx


@dataclass(frozen=True)
class TrajectoryBundle:
    j: float
    t: float
    m: np.ndarray
    alpha: np.ndarray  # complex, dimensionless
    x: np.ndarray  # m
    p: np.ndarray  # kg m/s
    phase: np.ndarray  # rad
    sigma_x: float


def branch_trajectories(params: GsgParams, j, t) -> TrajectoryBundle:
    if t < 0:
        raise DomainError("time must be non-negative")
    j = check_spin(j)
    m = m_values(j)
    k, w = params.k, params.omega_M
    wt = w * t
    hbar, M = params.constants.hbar, params.mass
    alpha = m * k * (1 - np.exp(-1j * wt))
    x = m * k * math.sqrt(2 * hbar / (M * w)) * (1 - math.cos(wt))
    p = m * params.g * math.sqrt(2 * hbar * M / w) * math.sin(wt)
    phase = k**2 * m**2 * (wt - math.sin(wt))
    return TrajectoryBundle(j, t, m, alpha, x, p, phase, params.sigma_x)


def position_density(state: SpinState, params: GsgParams, t, x_grid) -> np.ndarray:
    """``P(x, t) = sum_m P_s(m) N(<x_m(t)>, hbar / (M omega_M))`` sampled on ``x_grid``."""
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or x_grid.size == 0:
        raise DomainError("x grid must be a non-empty 1-D array")
    if np.any(np.diff(x_grid) <= 0):
        raise DomainError("x grid must be strictly increasing")
    traj = branch_trajectories(params, state.j, t)
    s = traj.sigma_x
    z = (x_grid[:, None] - traj.x[None, :]) / s
    gauss = np.exp(-0.5 * z**2) / (s * math.sqrt(2 * np.pi))
    return gauss @ state.probabilities


@dataclass(frozen=True)
class SplitState:
    """Spin amplitudes at ``t_s`` with their branch positions."""

    j: float
    amplitudes: np.ndarray
    positions: np.ndarray  # m
    k: float


def split_state(state: SpinState, params: GsgParams) -> SplitState:
    m = state.m
    k = params.k
    dx, _ = superposition_extent(params, state.j)
    amps = state.amplitudes * np.exp(1j * np.pi * k**2 * m**2)
    return SplitState(state.j, amps, m * dx, k)


def recombine_state(split: SplitState, interaction_phases=None) -> SpinState:
    """Close the loop: second ``pi k^2 m^2`` phase plus per-branch phases ``exp(-i phi_m)``.

    The position register returns to the trap centre and is dropped.
    """
    m = m_values(split.j)
    amps = split.amplitudes * np.exp(1j * np.pi * split.k**2 * m**2)
    if interaction_phases is not None:
        amps = amps * np.exp(-1j * np.asarray(interaction_phases, dtype=float))
    return SpinState(split.j, amps)


def coherent_fock_amplitudes(alpha, n_fock) -> np.ndarray:
    """``<n|alpha>`` for ``n < n_fock``."""
    n = np.arange(n_fock)
    if alpha == 0:
        out = np.zeros(n_fock, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def closed_form_state(state: SpinState, params: GsgParams, t, n_fock) -> np.ndarray:
    """Joint amplitudes ``psi[m, n]`` of ``sum_m c_m e^{i k^2 m^2 (wt - sin wt)} |m>|alpha_m(t)>``."""
    traj = branch_trajectories(params, state.j, t)
    out = np.empty((state.dim, n_fock), dtype=complex)
    for i, (c, a, ph) in enumerate(zip(state.amplitudes, traj.alpha, traj.phase)):
        out[i] = c * np.exp(1j * ph) * coherent_fock_amplitudes(a, n_fock)
    return out


def default_fock_size(params: GsgParams, j) -> int:
    a = 2 * check_spin(j) * abs(params.k)  # max |alpha_m| over the loop
    return math.ceil(a**2 + 10 * a + 20)


@dataclass(frozen=True)
class FockOracleResult:
    joint: np.ndarray  # (2j+1, n_fock) amplitudes from direct exponentiation
    closed_form: np.ndarray
    fidelity: float
    norm: float
    vacuum_overlap: np.ndarray  # per populated branch, |<m, 0|psi>|^2 / |c_m|^2
    top_occupancy: float


def joint_hamiltonian(j, k, n_fock) -> np.ndarray:
    """``a^dag a - k Jz (a + a^dag)`` in units of ``hbar omega_M``; spin index is the slow one."""
    a = np.diag(np.sqrt(np.arange(1, n_fock)), 1)
    num = np.diag(np.arange(n_fock, dtype=float))
    jz = spin_operators(j).Jz.real
    eye_s = np.eye(jz.shape[0])
    return np.kron(eye_s, num) - k * np.kron(jz, a + a.T)


def fock_oracle_evolve(state: SpinState, params: GsgParams, t, n_fock=None) -> FockOracleResult:
    """Evolve ``state (x) |0>`` by exact eigendecomposition of the truncated joint Hamiltonian."""
    if t < 0:
        raise DomainError("time must be non-negative")
    if n_fock is None:
        n_fock = default_fock_size(params, state.j)
    a_max = 2 * state.j * abs(params.k)
    if a_max**2 + 6 * a_max >= n_fock:
        raise TruncationError(f"n_fock={n_fock} too small for |alpha|max={a_max:.3g}")
    H = joint_hamiltonian(state.j, params.k, n_fock)
    w, v = np.linalg.eigh(H)
    psi0 = np.zeros((state.dim, n_fock), dtype=complex)
    psi0[:, 0] = state.amplitudes
    wt = params.omega_M * t
    psi = (v @ (np.exp(-1j * wt * w) * (v.conj().T @ psi0.ravel()))).reshape(state.dim, n_fock)
    top = float(np.sum(np.abs(psi[:, -1]) ** 2))
    if top > 1e-8:
        raise TruncationError(f"top Fock occupancy {top:.3g} exceeds 1e-8 at n_fock={n_fock}")
    ref = closed_form_state(state, params, t, n_fock)
    fid = abs(np.vdot(ref.ravel(), psi.ravel())) ** 2 / (np.vdot(ref.ravel(), ref.ravel()).real)
    probs = state.probabilities
    populated = probs > 1e-12
    vac = np.full(state.dim, np.nan)
    vac[populated] = np.abs(psi[populated, 0]) ** 2 / probs[populated]
    return FockOracleResult(
        joint=psi, closed_form=ref, fidelity=float(fid),
        norm=float(np.linalg.norm(psi)), vacuum_overlap=vac, top_occupancy=top,
    )


def density_peaks(density, rel_height=1e-6):
    """Indices of local maxima of a sampled density above ``rel_height * max``."""
    density = np.asarray(density, dtype=float)
    idx, _ = find_peaks(density, height=rel_height * float(density.max()))
    return idx
