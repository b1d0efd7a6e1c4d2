import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otto_squeeze import dynamics, model, qops
from otto_squeeze.qops import SX, SZ

from conftest import random_state

# DOP853 integration of i dU/dt = H_ch(t) U at rtol 1e-13 (fig1 frequencies)
XI_ORACLE = {1e-4: 0.4559537692389731, 5e-4: 0.02318088454762221, 1e-2: 0.00019068704591941225}

# DOP853 integration of the hot-bath master equation for 0.2 time units from |+x><+x|
HOT_ORACLE = {
    0.0: np.array([[0.33201483, 0.26123544], [0.26123544, 0.66798517]]),
    1.0: np.array([[0.43904849, 0.04347749], [0.04347749, 0.56095151]]),
}


def xi_of(tau_dri, **kw):
    cfg = model.fig1(tau_dri=tau_dri)
    u = dynamics.build_propagator(cfg, "compression", **kw)
    return dynamics.transition_probability(u, model.cold_basis(cfg), model.hot_basis(cfg))


@pytest.mark.parametrize("tau_dri, want", sorted(XI_ORACLE.items()))
def test_transition_probability_against_ode(tau_dri, want):
    assert xi_of(tau_dri) == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("tau_dri", [1e-4, 5e-4])
def test_midpoint_rule_agrees_with_magnus(tau_dri):
    assert xi_of(tau_dri, method="midpoint") == pytest.approx(xi_of(tau_dri), abs=1e-9)


def test_constant_field_matches_closed_form():
    h = np.array([0.3, -0.2, 1.1])
    u, _ = dynamics.time_ordered_exponential(lambda t: np.broadcast_to(h, np.shape(t) + (3,)), 2.5)
    want = qops.mat_exp(-2.5j * qops.from_pauli(0, h))
    np.testing.assert_allclose(u, want, atol=1e-12)


def test_zero_duration_is_identity():
    u, n = dynamics.time_ordered_exponential(lambda t: np.ones(np.shape(t) + (3,)), 0.0)
    assert n == 0 and np.array_equal(u, np.eye(2))


def test_step_cap_raises():
    with pytest.raises(dynamics.NoConvergence):
        dynamics.time_ordered_exponential(
            lambda t: np.stack([1e6 * np.cos(1e3 * t), 0 * t, 1e6 * np.sin(t)], axis=-1), 1.0, max_steps=2**10)


def test_expansion_is_transpose_of_compression(fig1_cfg):
    u_ch = dynamics.build_propagator(fig1_cfg, "compression").u
    u_hc = dynamics.build_propagator(fig1_cfg, "expansion").u
    np.testing.assert_allclose(u_hc, u_ch.T, atol=1e-12)


def test_propagators_are_unitary(fig1_cycle):
    for p in (fig1_cycle.u_ch, fig1_cycle.u_hc):
        np.testing.assert_allclose(p.u @ p.u.conj().T, np.eye(2), atol=1e-13)


@pytest.mark.parametrize("r", [0.0, 1.0])
def test_hot_isochore_against_ode(r):
    ch = dynamics.isochore_channel(model.fig1(r=r), "hot")
    out = ch.apply(0.5 * np.array([[1, 1], [1, 1]], dtype=complex))
    np.testing.assert_allclose(out, HOT_ORACLE[r], atol=1e-8)


@pytest.mark.parametrize("hot_model", model.HOT_MODELS)
@pytest.mark.parametrize("r", [0.0, 0.4, 1.0])
def test_isochores_are_cptp(hot_model, r):
    cfg = model.fig1(r=r, hot_model=hot_model, squeeze_phase=0.3)
    for bath in ("hot", "cold"):
        m = dynamics.isochore_channel(cfg, bath).matrix
        assert np.linalg.eigvalsh(qops.choi_matrix(m)).min() > -1e-10
        np.testing.assert_allclose(m[0], [1, 0, 0, 0], atol=1e-12)


@pytest.mark.parametrize("hot_model", model.HOT_MODELS)
def test_squeezed_channel_reduces_to_thermal_at_zero(hot_model):
    cfg = model.fig1(r=0.0, hot_model=hot_model)
    thermal = dynamics.isochore_channel(model.fig1(r=0.0), "hot").matrix
    np.testing.assert_allclose(dynamics.isochore_channel(cfg, "hot").matrix, thermal, atol=1e-12)


def test_cold_steady_state_is_gibbs(fig1_cfg):
    h = model.hamiltonian_cold(fig1_cfg)
    gibbs = qops.mat_exp(-fig1_cfg.beta_c * h)
    gibbs /= np.trace(gibbs)
    np.testing.assert_allclose(dynamics.isochore_channel(fig1_cfg, "cold").steady_state(), gibbs, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_kl_to_steady_state_never_increases(seed):
    cfg = model.fig1(r=0.6)
    ch = dynamics.isochore_channel(cfg, "hot")
    ss = ch.steady_state()
    rho = random_state(np.random.default_rng(seed))
    kl = [qops.relative_entropy(qops.apply_superop(ch.at(t), rho), ss) for t in np.linspace(0, 1.0, 10)]
    assert np.all(np.diff(kl) <= 1e-12)


def test_dephasing_removes_coherence():
    basis = model.energy_basis(SX)
    rho = random_state(np.random.default_rng(1))
    out = dynamics.dephasing_map(rho, basis)
    in_basis = basis.conj().T @ out @ basis
    assert abs(in_basis[0, 1]) < 1e-15
    np.testing.assert_allclose(np.diag(in_basis), np.diag(basis.conj().T @ rho @ basis), atol=1e-15)


def test_limit_cycle_matches_brute_force(fig1_cfg, fig1_cycle):
    brute = dynamics.iterate_cycle(fig1_cfg, np.eye(2) / 2, 200)
    assert qops.trace_distance(brute, fig1_cycle.rho_t0) < 1e-12


def test_limit_cycle_regression(fig1_cycle):
    # frozen from 200 brute-force cycles started at I/2
    n_t0 = np.trace(fig1_cycle.rho_t0 @ model.hamiltonian_cold(fig1_cycle.cfg)).real / fig1_cycle.cfg.omega_c
    assert n_t0 == pytest.approx(-0.3807962494204841, abs=1e-10)


def test_limit_cycle_is_a_fixed_point(fig1_cfg, fig1_cycle):
    phi = dynamics.cycle_map(fig1_cfg)
    np.testing.assert_allclose(qops.apply_superop(phi, fig1_cycle.rho_t0), fig1_cycle.rho_t0, atol=1e-12)


@pytest.mark.parametrize("seed", [3, 11])
def test_limit_cycle_independent_of_seed_state(fig1_cfg, fig1_cycle, seed):
    rho = random_state(np.random.default_rng(seed))
    assert qops.trace_distance(dynamics.iterate_cycle(fig1_cfg, rho, 300), fig1_cycle.rho_t0) < 1e-10


def test_unitary_strokes_preserve_spectrum(fig1_cycle):
    c = fig1_cycle
    np.testing.assert_allclose(np.linalg.eigvalsh(c.rho_t1), np.linalg.eigvalsh(c.rho_t0), atol=1e-10)
    np.testing.assert_allclose(np.linalg.eigvalsh(c.rho_t3), np.linalg.eigvalsh(c.rho_t2), atol=1e-10)


def test_states_are_density_matrices(fig1_cycle):
    assert all(qops.is_density_matrix(rho, 1e-12) for rho in fig1_cycle.states)


def test_power_iteration_fallback():
    phi = np.diag([1.0, 0.5, 0.5, 0.5])
    phi[1, 0] = 0.1
    v = dynamics._fixed_point(phi, 1e-12, 10**4)
    np.testing.assert_allclose(v, [1, 0.2, 0, 0], atol=1e-11)


def test_no_limit_cycle_raises():
    # rotation about z plus a drift along z: the direct solve is singular and iteration never settles
    phi = qops.unitary_superop(qops.mat_exp(-0.5j * SZ))
    phi[3, 0] = 0.1
    with pytest.raises(dynamics.NoLimitCycle):
        dynamics._fixed_point(phi, 1e-12, 100)
