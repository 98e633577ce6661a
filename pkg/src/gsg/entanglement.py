"""Gravitational phases between two interferometers and entanglement measures.

Bipartite amplitudes are stored as a ``(d, d)`` matrix ``psi[m, n]`` with
``m`` the Dicke index of mass A and ``n`` that of mass B (ascending order,
``d = 2j + 1``).  Density matrices live on the flattened index
``m * d + n``; ``DensityMatrix.tensor4`` gives the ``rho[m, m', n, n']`` view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .constants import CODATA2018, Constants
from .errors import DimensionMismatchError, DomainError, NotHermitianError
from .spin_states import SpinState, check_spin, m_values

GEOMETRIES = ("linear", "parallel")
DISTANCE_MODES = ("euclidean", "literal")
ENTROPY_EPS = 1e-14


@dataclass(frozen=True)
class ExperimentConfig:
    """Two-interferometer set-up; SI units throughout."""

    geometry: str = "parallel"
    j: float = 0.5
    mass_a: float = 1e-14
    mass_b: float = 1e-14
    delta_x: float = 2.5e-4
    delta_s: float = 5e-5
    tau: float = 2.0
    k: float = 0.0
    distance_mode: str = "euclidean"
    constants: Constants = field(default=CODATA2018, compare=True)

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise DomainError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if self.distance_mode not in DISTANCE_MODES:
            raise DomainError(f"distance_mode must be one of {DISTANCE_MODES}, got {self.distance_mode!r}")
        object.__setattr__(self, "j", check_spin(self.j))
        if not self.delta_s > 0:
            raise DomainError("delta_s must be positive")
        if not self.tau >= 0:
            raise DomainError("tau must be non-negative")
        if not (self.mass_a > 0 and self.mass_b > 0):
            raise DomainError("masses must be positive")
        if not self.delta_x >= 0:
            raise DomainError("delta_x must be non-negative")

    @property
    def dim(self) -> int:
        return int(round(2 * self.j)) + 1

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def phase_prefactor(config: ExperimentConfig) -> float:
    """``G M_A M_B tau / hbar`` in rad m."""
    c = config.constants
    return c.G * config.mass_a * config.mass_b * config.tau / c.hbar


def branch_distances(config: ExperimentConfig) -> np.ndarray:
    """Distance between branch ``m`` of A and branch ``n`` of B during the interaction.

    In ``literal`` mode the parallel entry is ``ds^2 + dx^2 (m-n)^2`` read as
    a length in metres.
    """
    m = m_values(config.j)
    diff = m[:, None] - m[None, :]
    ds, dx = config.delta_s, config.delta_x
    if config.geometry == "linear":
        dist = np.abs(ds + dx * (2 * config.j + diff))
    elif config.distance_mode == "euclidean":
        dist = np.sqrt(ds**2 + dx**2 * diff**2)
    else:
        dist = np.abs(ds**2 + dx**2 * diff**2) / 1.0  # reference length 1 m
    if np.any(dist <= 0):
        raise DomainError("zero branch separation in phase matrix")
    return dist


def phase_matrix(config: ExperimentConfig) -> np.ndarray:
    """``phi[m, n] = G M_A M_B tau / (hbar * distance[m, n])``."""
    if config.tau == 0:
        return np.zeros((config.dim, config.dim))
    return phase_prefactor(config) / branch_distances(config)


@dataclass(frozen=True)
class BipartiteState:
    j: float
    amplitudes: np.ndarray  # (d, d)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        d = int(round(2 * check_spin(self.j))) + 1
        if a.shape != (d, d):
            raise DimensionMismatchError(f"expected ({d}, {d}) amplitudes, got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def schmidt_coefficients(self) -> np.ndarray:
        """Squared Schmidt coefficients ``lambda_i``, descending."""
        s = np.linalg.svd(self.amplitudes, compute_uv=False)
        return s**2

    def density_matrix(self) -> "DensityMatrix":
        v = self.amplitudes.ravel()
        return DensityMatrix(self.dim, np.outer(v, v.conj()))


def joint_state(state_a: SpinState, state_b: SpinState, phases, k=0.0) -> BipartiteState:
    """``psi[m, n] = c_m c_n exp(2 pi i k^2 (m^2 - n^2)) exp(-i phi[m, n])``."""
    if state_a.dim != state_b.dim:
        raise DimensionMismatchError("both masses must carry the same spin")
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (state_a.dim, state_a.dim):
        raise DimensionMismatchError(f"phase matrix shape {phases.shape} does not match d={state_a.dim}")
    m = state_a.m
    local = np.exp(2j * np.pi * k**2 * (m[:, None] ** 2 - m[None, :] ** 2)) if k else 1.0
    psi = np.outer(state_a.amplitudes, state_b.amplitudes) * local * np.exp(-1j * phases)
    return BipartiteState(state_a.j, psi)


def reduced_density(psi: BipartiteState, subsystem="A") -> np.ndarray:
    a = psi.amplitudes
    if subsystem == "A":
        return a @ a.conj().T
    if subsystem == "B":
        return a.T @ a.conj()
    raise DomainError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def _check_hermitian(rho, tol=1e-10):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotHermitianError("expected a square matrix")
    scale = max(1.0, float(np.max(np.abs(rho))))
    if np.max(np.abs(rho - rho.conj().T)) > tol * scale:
        raise NotHermitianError("matrix is not Hermitian")


def von_neumann_entropy(rho) -> float:
    """``-Tr rho ln rho`` in nats; eigenvalues below 1e-14 are dropped."""
    _check_hermitian(rho)
    w = np.linalg.eigvalsh(rho)
    w = w[w > ENTROPY_EPS]
    return float(max(0.0, -np.sum(w * np.log(w))))


def entanglement_entropy(psi: BipartiteState) -> float:
    return von_neumann_entropy(reduced_density(psi, "A"))


@dataclass(frozen=True)
class DensityMatrix:
    """Bipartite density matrix on the flattened ``m * d + n`` index."""

    d: int
    matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=complex)
        D = self.d * self.d
        if a.shape != (D, D):
            raise DimensionMismatchError(f"expected ({D}, {D}) density matrix, got {a.shape}")
        object.__setattr__(self, "matrix", a)

    def tensor4(self) -> np.ndarray:
        """View indexed ``[m, m', n, n']``."""
        d = self.d
        return self.matrix.reshape(d, d, d, d).transpose(0, 2, 1, 3)

    @classmethod
    def from_tensor4(cls, t4) -> "DensityMatrix":
        d = t4.shape[0]
        return cls(d, np.ascontiguousarray(t4.transpose(0, 2, 1, 3)).reshape(d * d, d * d))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def reduced(self, subsystem="A") -> np.ndarray:
        t4 = self.tensor4()
        if subsystem == "A":
            return np.einsum("abnn->ab", t4)
        return np.einsum("mmab->ab", t4)


def partial_transpose(rho) -> np.ndarray:
    """Transpose on subsystem A: ``rho^PT[(m,n),(m',n')] = rho[(m',n),(m,n')]``."""
    if isinstance(rho, DensityMatrix):
        d, mat = rho.d, rho.matrix
    else:
        mat = np.asarray(rho)
        d = math.isqrt(mat.shape[0])
    return mat.reshape(d, d, d, d).transpose(2, 1, 0, 3).reshape(d * d, d * d)


def negativity_threshold(d: int) -> float:
    """Tolerance below which a partial-transpose eigenvalue counts as negative; ``d`` is the local dimension."""
    return 1e-10 * d


@dataclass(frozen=True)
class WitnessReport:
    negativity: float
    negative_eigenvalues: np.ndarray
    witness: np.ndarray  # sum over negative eigenvectors of (|l><l|)^PT
    d: int

    def expectation(self, rho) -> float:
        mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return float(np.trace(self.witness @ mat).real)

    def gellmann_coefficients(self) -> np.ndarray:
        """Coefficients ``c[a, b]`` with ``W = sum c[a, b] L_a (x) L_b``."""
        return gellmann_decompose_bipartite(self.witness, self.d)


def negativity(rho) -> WitnessReport:
    """Sum of negative eigenvalues of the partial transpose, with its witness."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    d = math.isqrt(mat.shape[0])
    _check_hermitian(mat)
    w, v = np.linalg.eigh(partial_transpose(mat))
    neg = w < -negativity_threshold(d)
    vecs = v[:, neg]
    proj = vecs @ vecs.conj().T
    witness = partial_transpose(proj)
    return WitnessReport(
        negativity=float(w[neg].sum()) if neg.any() else 0.0,
        negative_eigenvalues=w[neg],
        witness=witness,
        d=d,
    )


def negativity_value(rho) -> float:
    """Mixed-state negativity without building the witness."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    d = math.isqrt(mat.shape[0])
    w = np.linalg.eigvalsh(partial_transpose(mat))
    w = w[w < -negativity_threshold(d)]
    return float(w.sum()) if w.size else 0.0


def pure_negativity(psi: BipartiteState) -> float:
    """``-sum_{i<j} sqrt(lambda_i lambda_j)`` from the Schmidt coefficients.

    The products are exactly the negative eigenvalues of the partial
    transpose, so the same tolerance as the eigensolver path is applied.
    """
    s = np.linalg.svd(psi.amplitudes, compute_uv=False)
    prod = np.outer(s, s)[np.triu_indices(s.size, 1)]
    prod = prod[prod > negativity_threshold(s.size)]
    return -float(prod.sum()) if prod.size else 0.0


@lru_cache(maxsize=None)
def gellmann_basis(d: int) -> np.ndarray:
    """Generalized Gell-Mann matrices, shape ``(d*d, d, d)``.

    Order: symmetric, antisymmetric, diagonal, then ``sqrt(2/d) I``; every
    element satisfies ``Tr(L_a L_b) = 2 delta_ab``.
    """
    mats = []
    for a in range(d):
        for b in range(a + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[a, b] = s[b, a] = 1.0
            mats.append(s)
    for a in range(d):
        for b in range(a + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[a, b], s[b, a] = -1j, 1j
            mats.append(s)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(math.sqrt(2.0 / (l * (l + 1))) * diag).astype(complex))
    mats.append(math.sqrt(2.0 / d) * np.eye(d, dtype=complex))
    out = np.array(mats)
    out.setflags(write=False)
    return out


def gellmann_decompose(H) -> np.ndarray:
    """Real coefficients ``c`` with ``H = sum_a c_a L_a``."""
    H = np.asarray(H)
    _check_hermitian(H)
    L = gellmann_basis(H.shape[0])
    return np.einsum("aji,ij->a", L, H).real / 2


def gellmann_reconstruct(coeffs, d) -> np.ndarray:
    return np.einsum("a,aij->ij", np.asarray(coeffs, dtype=float), gellmann_basis(d))


def gellmann_decompose_bipartite(W, d) -> np.ndarray:
    """``c[a, b] = Tr(W L_a (x) L_b) / 4`` for an operator on the ``d * d`` space."""
    W = np.asarray(W)
    _check_hermitian(W)
    L = gellmann_basis(d)
    W4 = W.reshape(d, d, d, d)  # [m, n, m', n']
    t1 = np.einsum("mnpq,apm->anq", W4, L)
    return np.einsum("anq,bqn->ab", t1, L).real / 4


@dataclass(frozen=True)
class CasimirPolder:
    v_cp: float  # J
    v_grav: float  # J
    ratio: float  # |V_grav / V_CP|
    warning: bool  # r < 5 R, far from the r >> R regime


def sphere_radius(mass, density) -> float:
    return (3 * mass / (4 * np.pi * density)) ** (1 / 3)


def casimir_polder_ratio(R, eps, r, mass_a, mass_b, constants=CODATA2018) -> CasimirPolder:
    """Casimir-Polder versus Newtonian potential between two dielectric spheres."""
    if r <= 2 * R:
        raise DomainError(f"separation r={r} must exceed the contact distance 2R={2 * R}")
    c = constants
    v_cp = -(23 * c.hbar * c.c / (4 * np.pi)) * R**6 / r**7 * ((eps - 1) / (eps + 2)) ** 2
    v_grav = -c.G * mass_a * mass_b / r
    ratio = math.inf if v_cp == 0 else abs(v_grav / v_cp)
    return CasimirPolder(v_cp=v_cp, v_grav=v_grav, ratio=ratio, warning=r < 5 * R)
