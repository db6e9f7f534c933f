import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import relative_entropy_quadrature
from modeconv.relaxation import (
    EnergyLaw,
    ExperimentConfig,
    RelaxationState,
    SolverError,
    advance_diffusion,
    advance_euler,
    cfl_euler,
    check_lemma,
    darcy_velocity,
    diffusion_dt,
    entropy_split,
    grid_points,
    initial_density,
    lemma_constants,
    rel_entropy,
    relative_energy,
    relaxation_experiment,
    step_diffusion,
    step_euler,
)


@given(
    rho=st.floats(0.0, 20.0),
    rho_bar=st.floats(0.1, 5.0),
    gamma=st.sampled_from([1.5, 2.0, 3.0, 2.5]),
    k=st.floats(0.5, 2.0),
)
@settings(max_examples=100, deadline=None)
def test_relative_entropy_matches_quadrature(rho, rho_bar, gamma, k):
    law = EnergyLaw(k, gamma)
    got = rel_entropy(rho, rho_bar, law)
    want = relative_entropy_quadrature(rho, rho_bar, k, gamma)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-12)
    assert got >= 0


def test_relative_entropy_near_the_diagonal():
    law = EnergyLaw(1.0, 1.5)
    rb = 1.3
    for d in (1e-4, 1e-6, 1e-9):
        # second-order Taylor term h''(rb) d^2 / 2
        want = 0.5 * law.d2h(rb) * d * d
        assert rel_entropy(rb + d, rb, law) == pytest.approx(want, rel=1e-3)
    assert rel_entropy(rb, rb, law) == 0


def test_relative_entropy_validation():
    law = EnergyLaw()
    with pytest.raises(ValueError):
        rel_entropy(-1.0, 1.0, law)
    with pytest.raises(ValueError):
        rel_entropy(1.0, 0.0, law)
    with pytest.raises(ValueError):
        EnergyLaw(gamma=1.0)


def test_gamma_two_entropy_is_quadratic():
    law = EnergyLaw(1.0, 2.0)
    rho = np.linspace(0, 10, 101)
    assert np.allclose(rel_entropy(rho, 2.0, law), (rho - 2.0) ** 2, rtol=1e-14, atol=1e-14)


def test_lemma_constants_reference_case():
    law = EnergyLaw(1.0, 2.0)
    c = lemma_constants(law, 0.5, 2.0)
    assert c.R == 3.0
    assert c.C1 == pytest.approx(1 - 1e-6, abs=1e-15)
    assert c.C2 == pytest.approx(1 - 1e-6, abs=1e-15)
    s1, s2 = check_lemma(c, law)
    assert s1 >= -1e-12 and s2 >= -1e-12


@pytest.mark.parametrize("gamma", [1.5, 3.0])
def test_lemma_constants_other_laws(gamma):
    law = EnergyLaw(1.0, gamma)
    c = lemma_constants(law, 0.5, 2.0)
    assert c.C1 > 0 and c.C2 > 0
    s1, s2 = check_lemma(c, law, samples=2000, seed=1)
    assert s1 >= -1e-12 and s2 >= -1e-12
    rho, bar = np.array([0.2, 40.0]), np.array([1.0, 1.0])
    assert np.all(rel_entropy(rho, bar, law) >= c.lower_bound(rho, bar) - 1e-12)


def test_lemma_constants_validation():
    with pytest.raises(ValueError):
        lemma_constants(EnergyLaw(), 2.0, 1.0)


def smooth_state(J=64, eps=0.1):
    x = grid_points(J)
    rho = 1 + 0.3 * np.cos(2 * np.pi * x)
    return RelaxationState(rho, 0.1 * np.sin(2 * np.pi * x), eps)


def test_euler_step_conserves_mass_and_rejects_bad_steps():
    law = EnergyLaw()
    st0 = smooth_state()
    dt = cfl_euler(st0, law)
    st1 = step_euler(st0, law, dt)
    assert st1.mass == pytest.approx(st0.mass, rel=1e-14)
    assert st1.time == dt
    with pytest.raises(SolverError):
        step_euler(st0, law, 3 * dt)
    vac = RelaxationState(np.zeros(8), np.zeros(8), 0.1)
    with pytest.raises(SolverError):
        step_euler(vac, law, 1e-6)


def test_friction_relaxes_momentum():
    law = EnergyLaw()
    st0 = RelaxationState(np.ones(32), np.full(32, 0.5), 0.01)
    st1 = advance_euler(st0, law, 0.05)
    # uniform state: only friction acts
    assert np.allclose(st1.momentum, 0.5 * math.exp(-0.05 / 0.01), rtol=1e-10)
    assert st1.time == 0.05


def test_diffusion_conserves_mass_and_smooths():
    law = EnergyLaw()
    x = grid_points(64)
    rb = 1 + 0.3 * np.cos(2 * np.pi * x)
    dt = diffusion_dt(rb, law)
    out = advance_diffusion(rb, law, 0.0, 0.02)
    assert math.fsum(out) == pytest.approx(math.fsum(rb), rel=1e-13)
    assert np.ptp(out) < np.ptp(rb)
    with pytest.raises(SolverError):
        step_diffusion(rb, law, 2 * dt)


def test_darcy_velocity_of_cosine():
    law = EnergyLaw(1.0, 2.0)
    J = 256
    x = grid_points(J)
    rb = 1 + 0.3 * np.cos(2 * np.pi * x)
    # h'(rho) = 2 rho, so -d/dx h' = 1.2 pi sin(2 pi x)
    assert np.allclose(darcy_velocity(rb, law), 1.2 * np.pi * np.sin(2 * np.pi * x), atol=1e-3)


def test_relative_energy_zero_for_matching_states():
    law = EnergyLaw()
    x = grid_points(64)
    rb = 1 + 0.3 * np.cos(2 * np.pi * x)
    st0 = RelaxationState(rb.copy(), rb * darcy_velocity(rb, law), 0.1)
    assert relative_energy(st0, rb, law) == 0
    split = entropy_split(st0, rb, lemma_constants(law, 0.5, 2.0), law)
    assert split.trimmed_l2 == 0 and split.complement_measure == 0 and split.chain_holds


def test_initial_density_and_small_experiment():
    cfg = ExperimentConfig(J=32, T_final=0.05, eps_list=(0.25, 0.0625), samples=5)
    assert initial_density(cfg)[0] == pytest.approx(1 + 0.3 * math.cos(2 * math.pi / 64), rel=1e-14)
    rep = relaxation_experiment(cfg)
    a, b = rep.runs
    assert a.psi[0] == 0 and b.psi[0] == 0
    assert b.sup_psi < a.sup_psi
    assert all(s.chain_holds for r in rep.runs for s in r.splits)
    assert max(r.mass_drift for r in rep.runs) <= 1e-12
    rows = rep.rows()
    assert {"time", "eps", "psi", "trimmed_l2", "mass"} <= set(rows[0])
