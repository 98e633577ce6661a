import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import angles, phis, random_density, random_state
from gsg.constants import CODATA2018
from gsg.entanglement import (
    BipartiteState,
    DensityMatrix,
    ExperimentConfig,
    branch_distances,
    casimir_polder_ratio,
    entanglement_entropy,
    gellmann_basis,
    gellmann_decompose,
    gellmann_decompose_bipartite,
    gellmann_reconstruct,
    joint_state,
    negativity,
    negativity_value,
    partial_transpose,
    phase_matrix,
    pure_negativity,
    reduced_density,
    sphere_radius,
    von_neumann_entropy,
)
from gsg.errors import DimensionMismatchError, DomainError, NotHermitianError
from gsg.spin_states import SpinState, coherent_spin_state, symmetric_superposition

C = CODATA2018
spins = st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0])


def bipartite(rng, d):
    return BipartiteState((d - 1) / 2, random_state(rng, d * d).reshape(d, d))


# --- configuration and phases ---------------------------------------------

@pytest.mark.parametrize("kw", [dict(delta_s=0), dict(tau=-1), dict(mass_a=0), dict(mass_b=-1),
                                dict(geometry="diagonal"), dict(distance_mode="cubic"), dict(delta_x=-1)])
def test_config_validation(kw):
    with pytest.raises(DomainError):
        ExperimentConfig(**kw)


def test_zero_time_zero_phases(preset):
    assert np.array_equal(phase_matrix(preset.with_(tau=0.0, j=3)), np.zeros((7, 7)))


def test_parallel_diagonal_phase_value(preset):
    """G M^2 tau / (hbar ds) with the constants typed in directly."""
    expected = 6.67430e-11 * 1e-28 * 2.0 / (1.054571817e-34 * 5e-5)
    phi = phase_matrix(preset)
    assert phi[0, 0] == pytest.approx(expected, rel=1e-12)
    assert phi[1, 1] == pytest.approx(2.5316, abs=1e-4)


def test_linear_closest_branches(preset):
    """The minimum separation ds sits at (m=-j, n=+j) in the stored index convention."""
    for j in (0.5, 2.0, 5.0):
        cfg = preset.with_(geometry="linear", j=j)
        dist = branch_distances(cfg)
        assert dist.min() == pytest.approx(cfg.delta_s, rel=1e-12)
        assert np.unravel_index(np.argmin(dist), dist.shape) == (0, cfg.dim - 1)
        assert phase_matrix(cfg)[0, -1] == pytest.approx(
            C.G * 1e-28 * 2.0 / (C.hbar * cfg.delta_s), rel=1e-12
        )


@given(spins, st.sampled_from(["linear", "parallel"]), st.sampled_from(["euclidean", "literal"]))
def test_phase_structure(j, geometry, mode):
    cfg = ExperimentConfig(geometry=geometry, j=j, distance_mode=mode)
    phi = phase_matrix(cfg)
    assert np.all(np.isfinite(phi)) and np.all(phi > 0)
    d = cfg.dim
    diff = np.subtract.outer(np.arange(d), np.arange(d))
    for delta in range(-(d - 1), d):
        vals = phi[diff == delta]
        assert np.allclose(vals, vals[0], rtol=1e-14)
    if geometry == "parallel":
        assert np.allclose(phi, phi.T, rtol=1e-14)


def test_literal_mode_differs(preset):
    lit = phase_matrix(preset.with_(distance_mode="literal"))
    euc = phase_matrix(preset)
    assert not np.allclose(lit, euc)


# --- joint state and reductions --------------------------------------------

def test_joint_state_shape_checks():
    a = coherent_spin_state(1, 1.0)
    with pytest.raises(DimensionMismatchError):
        joint_state(a, coherent_spin_state(0.5, 1.0), np.zeros((3, 3)))
    with pytest.raises(DimensionMismatchError):
        joint_state(a, a, np.zeros((2, 2)))


@given(spins, angles, angles)
def test_no_phase_means_no_entanglement(j, ta, tb):
    a, b = coherent_spin_state(j, ta), coherent_spin_state(j, tb)
    d = a.dim
    assert entanglement_entropy(joint_state(a, b, np.zeros((d, d)))) < 1e-10
    assert entanglement_entropy(joint_state(a, b, np.full((d, d), 0.77))) < 1e-10


@given(spins, st.integers(0, 10**6))
def test_joint_state_normalized(j, seed):
    rng = np.random.default_rng(seed)
    d = int(2 * j) + 1
    a = SpinState.from_amplitudes(j, random_state(rng, d))
    b = SpinState.from_amplitudes(j, random_state(rng, d))
    psi = joint_state(a, b, rng.uniform(0, 10, (d, d)), k=rng.uniform(0, 2))
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1, abs=1e-12)


def test_reduced_density_examples():
    prod = BipartiteState(0.5, np.outer([0.6, 0.8], [1, 0]))
    assert np.linalg.matrix_rank(reduced_density(prod)) == 1
    bell = BipartiteState(0.5, np.eye(2) / math.sqrt(2))
    assert np.allclose(reduced_density(bell, "A"), np.eye(2) / 2)
    with pytest.raises(DomainError):
        reduced_density(bell, "C")


@given(st.integers(2, 6), st.integers(0, 10**6))
def test_reduced_spectra_agree(d, seed):
    psi = bipartite(np.random.default_rng(seed), d)
    wa = np.linalg.eigvalsh(reduced_density(psi, "A"))
    wb = np.linalg.eigvalsh(reduced_density(psi, "B"))
    assert np.allclose(wa, wb, atol=1e-10)
    rho = psi.density_matrix()
    assert np.allclose(rho.reduced("A"), reduced_density(psi, "A"))
    assert np.allclose(rho.reduced("B"), reduced_density(psi, "B"))


# --- entropy -------------------------------------------------------------

def test_entropy_examples():
    assert von_neumann_entropy(np.diag([1.0, 0, 0])) == 0
    assert von_neumann_entropy(np.eye(5) / 5) == pytest.approx(math.log(5), abs=1e-12)
    with pytest.raises(NotHermitianError):
        von_neumann_entropy(np.array([[0.5, 1.0], [0.0, 0.5]]))


@given(st.integers(2, 7), st.integers(0, 10**6))
def test_entropy_bounds(d, seed):
    s = entanglement_entropy(bipartite(np.random.default_rng(seed), d))
    assert -1e-12 <= s <= math.log(d) + 1e-12


# --- partial transpose and negativity ----------------------------------------

def test_partial_transpose_product_state():
    rng = np.random.default_rng(1)
    ra, rb = random_density(rng, 3), random_density(rng, 3)
    pt = partial_transpose(np.kron(ra, rb))
    assert np.allclose(pt, np.kron(ra.T, rb))
    assert np.linalg.eigvalsh(pt).min() > -1e-12


def test_partial_transpose_bell():
    bell = BipartiteState(0.5, np.eye(2) / math.sqrt(2))
    w = np.linalg.eigvalsh(partial_transpose(bell.density_matrix()))
    assert np.allclose(w, [-0.5, 0.5, 0.5, 0.5])


def test_partial_transpose_index_convention():
    d = 3
    rho = np.arange(81, dtype=float).reshape(9, 9)
    pt = partial_transpose(rho)
    for m, n, mp, np_ in np.ndindex(d, d, d, d):
        assert pt[m * d + n, mp * d + np_] == rho[mp * d + n, m * d + np_]


@given(st.integers(2, 5), st.integers(0, 10**6))
def test_pure_state_partial_transpose_spectrum(d, seed):
    """Full eigensolve against the Schmidt construction {l_i} and {+-sqrt(l_i l_j)}."""
    psi = bipartite(np.random.default_rng(seed), d)
    lam = psi.schmidt_coefficients()
    expect = list(lam)
    for i in range(d):
        for k in range(i + 1, d):
            r = math.sqrt(lam[i] * lam[k])
            expect += [r, -r]
    w = np.linalg.eigvalsh(partial_transpose(psi.density_matrix()))
    assert np.allclose(np.sort(w), np.sort(expect), atol=1e-10)
    assert negativity(psi.density_matrix()).negativity == pytest.approx(pure_negativity(psi), abs=1e-10)


@given(st.integers(2, 7), st.floats(-12, -6), st.integers(0, 10**6))
def test_fast_path_drops_the_same_tiny_eigenvalues(d, log_eps, seed):
    """Nearly product states put many PT eigenvalues near the tolerance; both paths must agree."""
    rng = np.random.default_rng(seed)
    a, b = random_state(rng, d), random_state(rng, d)
    amp = np.outer(a, b) + 10**log_eps * random_state(rng, d * d).reshape(d, d)
    psi = BipartiteState((d - 1) / 2, amp / np.linalg.norm(amp))
    assert abs(negativity_value(psi.density_matrix()) - pure_negativity(psi)) <= 1e-10

def test_product_state_has_no_witness():
    a = coherent_spin_state(1, 1.0)
    psi = joint_state(a, a, np.zeros((3, 3)))
    rep = negativity(psi.density_matrix())
    assert rep.negativity == 0 and rep.negative_eigenvalues.size == 0
    assert np.allclose(rep.witness, 0)


@given(st.integers(2, 4), st.integers(0, 10**6), st.integers(1, 16))
def test_witness_properties(d, seed, rank):
    """The listed eigenvalues sum to the negativity and Tr(W rho) reproduces it.

    W itself is the partial transpose of a projector; W^PT (not W) is idempotent.
    """
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d * d, min(rank, d * d))
    rep = negativity(rho)
    assert rep.negative_eigenvalues.sum() == pytest.approx(rep.negativity, abs=1e-10)
    assert rep.expectation(rho) == pytest.approx(rep.negativity, abs=1e-10)
    proj = partial_transpose(rep.witness)
    assert np.allclose(proj @ proj, proj, atol=1e-8)
    assert negativity_value(rho) == pytest.approx(rep.negativity, abs=1e-12)


@given(st.integers(2, 5), st.integers(0, 10**6))
def test_negativity_bounds_and_ppt_direction(d, seed):
    psi = bipartite(np.random.default_rng(seed), d)
    n = pure_negativity(psi)
    assert -(d - 1) / 2 - 1e-12 <= n <= 0
    if n < -1e-8:
        assert entanglement_entropy(psi) > 0


def test_maximally_entangled_negativity():
    d = 4
    psi = BipartiteState(1.5, np.eye(d) / 2)
    assert pure_negativity(psi) == pytest.approx(-(d - 1) / 2, abs=1e-12)


# --- invariances of the gravitational state --------------------------------------

@given(spins, angles, angles, phis, phis)
def test_phi_independence(j, ta, tb, pa, pb):
    cfg = ExperimentConfig(j=j)
    phi = phase_matrix(cfg)
    ref = joint_state(coherent_spin_state(j, ta), coherent_spin_state(j, tb), phi)
    rot = joint_state(coherent_spin_state(j, ta, pa), coherent_spin_state(j, tb, pb), phi)
    assert entanglement_entropy(rot) == pytest.approx(entanglement_entropy(ref), abs=1e-10)
    assert pure_negativity(rot) == pytest.approx(pure_negativity(ref), abs=1e-10)


@given(spins, angles, angles)
def test_geometry_symmetries(j, ta, tb):
    par = phase_matrix(ExperimentConfig(j=j))
    lin = phase_matrix(ExperimentConfig(j=j, geometry="linear"))

    def s(phases, x, y):
        return entanglement_entropy(joint_state(coherent_spin_state(j, x), coherent_spin_state(j, y), phases))

    assert abs(s(par, ta, tb) - s(par, tb, ta)) < 1e-10
    assert abs(s(lin, ta, tb) - s(lin, math.pi - tb, math.pi - ta)) < 1e-10


@given(spins, angles, angles, st.floats(0, 3))
def test_local_phase_immunity(j, ta, tb, k):
    phi = phase_matrix(ExperimentConfig(j=j))
    a, b = coherent_spin_state(j, ta), coherent_spin_state(j, tb)
    plain, twisted = joint_state(a, b, phi), joint_state(a, b, phi, k)
    assert entanglement_entropy(twisted) == pytest.approx(entanglement_entropy(plain), abs=1e-12)
    assert pure_negativity(twisted) == pytest.approx(pure_negativity(plain), abs=1e-12)


def test_table_points(preset):
    a = coherent_spin_state(0.5, math.pi / 2)
    psi = joint_state(a, a, phase_matrix(preset))
    assert entanglement_entropy(psi) == pytest.approx(0.59, abs=0.01)
    assert negativity(psi.density_matrix()).negativity == pytest.approx(-0.44, abs=0.01)
    s = symmetric_superposition(10, 0.0)
    assert entanglement_entropy(joint_state(s, s, phase_matrix(preset.with_(j=10)))) > 1.0


# --- density matrix container ----------------------------------------------------

@given(st.integers(2, 4), st.integers(0, 10**6))
def test_tensor4_round_trip(d, seed):
    rho = DensityMatrix(d, random_density(np.random.default_rng(seed), d * d))
    again = DensityMatrix.from_tensor4(rho.tensor4())
    assert np.array_equal(again.matrix, rho.matrix)
    assert rho.trace() == pytest.approx(1)


def test_density_matrix_shape_check():
    with pytest.raises(DimensionMismatchError):
        DensityMatrix(3, np.eye(4))


# --- Gell-Mann basis ------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 5])
def test_gellmann_orthogonality(d):
    L = gellmann_basis(d)
    assert L.shape == (d * d, d, d)
    gram = np.einsum("aij,bji->ab", L, L)
    assert np.allclose(gram, 2 * np.eye(d * d))
    assert all(np.allclose(x, x.conj().T) for x in L)


def test_gellmann_identity_and_pauli_z():
    c = gellmann_decompose(np.eye(3))
    assert np.count_nonzero(np.abs(c) > 1e-14) == 1 and c[-1] != 0
    cz = gellmann_decompose(np.diag([1.0, -1.0]))
    assert np.count_nonzero(np.abs(cz) > 1e-14) == 1
    assert cz[2] == pytest.approx(1.0)


@given(st.integers(0, 10**6))
def test_gellmann_round_trip(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    H = a + a.conj().T
    assert np.max(np.abs(gellmann_reconstruct(gellmann_decompose(H), 5) - H)) < 1e-10


def test_gellmann_bipartite_round_trip():
    rng = np.random.default_rng(3)
    d = 3
    W = random_density(rng, d * d)
    c = gellmann_decompose_bipartite(W, d)
    L = gellmann_basis(d)
    back = sum(c[a, b] * np.kron(L[a], L[b]) for a in range(d * d) for b in range(d * d))
    assert np.allclose(back, W, atol=1e-12)


# --- Casimir-Polder ------------------------------------------------------------

def test_casimir_polder_vacuum_dielectric():
    cp = casimir_polder_ratio(1e-6, 1.0, 1e-4, 1e-14, 1e-14)
    assert cp.v_cp == 0 and cp.ratio == math.inf


def test_casimir_polder_scaling():
    r1 = casimir_polder_ratio(1e-6, 5.7, 1e-4, 1e-14, 1e-14).ratio
    r2 = casimir_polder_ratio(1e-6, 5.7, 2e-4, 1e-14, 1e-14).ratio
    assert r2 / r1 == pytest.approx(2**6, rel=1e-12)


def test_casimir_polder_diamond():
    """Diamond spheres of 1e-14 kg: gravity dominates by 10x only beyond ~200 um.

    At 50 um the photon-mediated potential still wins by about two orders of
    magnitude, while at 250 um gravity is ahead by more than a factor ten.
    """
    R = sphere_radius(1e-14, 3500.0)
    assert R == pytest.approx(8.8e-7, rel=0.01)
    assert casimir_polder_ratio(R, 5.7, 5e-5, 1e-14, 1e-14).ratio < 0.1
    assert casimir_polder_ratio(R, 5.7, 2.5e-4, 1e-14, 1e-14).ratio > 10


def test_casimir_polder_domain_and_warning():
    with pytest.raises(DomainError):
        casimir_polder_ratio(1e-6, 5.7, 1.5e-6, 1e-14, 1e-14)
    assert casimir_polder_ratio(1e-6, 5.7, 3e-6, 1e-14, 1e-14).warning
