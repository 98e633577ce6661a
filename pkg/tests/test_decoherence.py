import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import angles, random_density
from gsg.decoherence import (
    DecoherenceModel,
    apply_long,
    apply_short,
    long_mask,
    short_mask,
    spin_half_decohered,
)
from gsg.entanglement import DensityMatrix, ExperimentConfig, joint_state, negativity_value, phase_matrix
from gsg.errors import DomainError
from gsg.spin_states import coherent_spin_state

rates = st.floats(0, 5)


def rho_for(d, seed):
    return DensityMatrix(d, random_density(np.random.default_rng(seed), d * d))


def gravity_state(j, theta=math.pi / 2, geometry="parallel"):
    cfg = ExperimentConfig(j=j, geometry=geometry)
    a = coherent_spin_state(j, theta)
    b = coherent_spin_state(j, math.pi - theta if geometry == "linear" else theta)
    return joint_state(a, b, phase_matrix(cfg)).density_matrix()


def test_zero_rate_is_identity():
    rho = rho_for(3, 0)
    assert np.array_equal(apply_short(rho, 0.0, 2.0).matrix, rho.matrix)
    assert np.array_equal(apply_long(rho, 0.0, 2.5e-4, 2.0).matrix, rho.matrix)
    assert DecoherenceModel().apply(rho) is rho


def test_infinite_short_rate_keeps_classical_diagonal():
    rho = rho_for(3, 1)
    out = apply_short(rho, 1e3, 1.0).tensor4()
    t4 = rho.tensor4()
    d = 3
    for m, mp, n, np_ in np.ndindex(d, d, d, d):
        if m == mp and n == np_:
            assert out[m, mp, n, np_] == t4[m, mp, n, np_]
        else:
            assert out[m, mp, n, np_] == 0


def test_short_mask_exponents():
    d, r = 3, 0.3
    mask = short_mask(d, r)
    assert mask[0, 0, 1, 1] == 1
    assert mask[0, 1, 2, 2] == pytest.approx(math.exp(-r))
    assert mask[0, 1, 2, 0] == pytest.approx(math.exp(-2 * r))


def test_long_mask_quadratic_in_separation():
    """j=2: the |m-m'|=4 coherence decays 16 times faster in the exponent than |m-m'|=1."""
    r = 0.01
    mask = long_mask(5, r)
    assert math.log(mask[0, 4, 0, 0]) == pytest.approx(16 * math.log(mask[0, 1, 0, 0]), rel=1e-12)


@given(rates, st.integers(0, 10**6))
def test_spin_half_short_matches_closed_form(gamma, seed):
    rho = rho_for(2, seed)
    out = apply_short(rho, gamma, 2.0)
    assert np.allclose(out.matrix, spin_half_decohered(rho, gamma, 2.0), atol=1e-14)


@given(st.floats(0, 1e8), st.integers(0, 10**6))
def test_spin_half_long_equals_total_rate(big_gamma, seed):
    dx = 2.5e-4
    rho = rho_for(2, seed)
    out = apply_long(rho, big_gamma, dx, 2.0)
    assert np.allclose(out.matrix, spin_half_decohered(rho, big_gamma * dx**2, 2.0), atol=1e-14)
    model = DecoherenceModel(gamma_long=big_gamma, delta_x=dx, tau=2.0)
    assert model.spin_half_rate == pytest.approx(big_gamma * dx**2)


def test_closed_form_only_for_spin_half():
    with pytest.raises(DomainError):
        spin_half_decohered(rho_for(3, 0), 0.1, 1.0)


@given(st.integers(2, 4), rates, rates, st.integers(0, 10**6))
def test_channels_preserve_trace_hermiticity_positivity(d, gs, gl, seed):
    rho = rho_for(d, seed)
    model = DecoherenceModel(gamma_short=gs, gamma_long=gl * 1e7, delta_x=2.5e-4, tau=1.0)
    out = model.apply(rho).matrix
    assert np.trace(out).real == pytest.approx(1, abs=1e-12)
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(out).min() >= -1e-10


@given(st.integers(2, 4), rates, rates, st.integers(0, 10**6))
def test_channels_commute(d, gs, gl, seed):
    rho = rho_for(d, seed)
    a = apply_long(apply_short(rho, gs, 1.0), gl, 1.0, 1.0)
    b = apply_short(apply_long(rho, gl, 1.0, 1.0), gs, 1.0)
    # Hadamard masks commute; only the rounding of the two products may differ
    assert np.allclose(a.matrix, b.matrix, rtol=1e-14, atol=0)


@pytest.mark.parametrize("j", [0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("limit", ["short", "long"])
def test_negativity_monotone_in_rate(j, limit):
    rho = gravity_state(j, 1.2)
    grid = [0.0, 0.05, 0.1, 0.25, 0.5]  # gamma tau, or Gamma dx^2 tau
    values = []
    for r in grid:
        out = apply_short(rho, r, 1.0) if limit == "short" else apply_long(rho, r, 1.0, 1.0)
        values.append(abs(negativity_value(out)))
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


@given(angles)
def test_monotone_for_random_angles(theta):
    rho = gravity_state(2.0, theta, "linear")
    vals = [abs(negativity_value(apply_long(rho, r, 1.0, 1.0))) for r in (0, 0.1, 0.2, 0.4, 0.8)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_negative_inputs_rejected():
    rho = rho_for(2, 0)
    with pytest.raises(DomainError):
        apply_short(rho, -1.0, 1.0)
    with pytest.raises(DomainError):
        apply_long(rho, 1.0, 1.0, -1.0)
    with pytest.raises(DomainError):
        DecoherenceModel(gamma_short=-0.1)
