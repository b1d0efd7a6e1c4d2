import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otto_squeeze import model
from otto_squeeze.qops import SX, SZ


def test_fig1_preset_values():
    cfg = model.fig1()
    assert cfg.omega_c == pytest.approx(2 * math.pi * 1000)
    assert cfg.omega_h == pytest.approx(2 * math.pi * 2250)
    assert cfg.beta_c * cfg.omega_c == pytest.approx(2.0)
    assert cfg.beta_h * cfg.omega_h == pytest.approx(1.0)
    assert (cfg.tau_c, cfg.gamma_c, cfg.gamma_h) == (3.0, 3.0, 3.0)
    assert cfg.eta_otto == pytest.approx(5 / 9)


@pytest.mark.parametrize("change", [
    dict(omega_c=2 * math.pi * 3000),
    dict(beta_h=1.0),
])
def test_validate_rejects_broken_ordering(change):
    with pytest.raises(model.RangeError):
        model.fig1(**change).validate()


@pytest.mark.parametrize("change", [dict(r=-0.1), dict(gamma_h=0.0), dict(tau_h=-1.0),
                                    dict(omega_h=float("nan")), dict(hot_model="lorentz")])
def test_constructor_rejects_bad_values(change):
    with pytest.raises(model.RangeError):
        model.fig1(**change)


def test_hamiltonian_endpoints(fig1_cfg):
    cfg = fig1_cfg
    np.testing.assert_allclose(model.hamiltonian_ch(cfg, 0.0), model.hamiltonian_cold(cfg), atol=1e-12)
    np.testing.assert_allclose(model.hamiltonian_ch(cfg, cfg.tau_dri), model.hamiltonian_hot(cfg), atol=1e-9)
    np.testing.assert_allclose(model.hamiltonian_hc(cfg, 0.0), model.hamiltonian_hot(cfg), atol=1e-9)


def test_midpoint_hamiltonian(fig1_cfg):
    cfg = fig1_cfg
    w = (cfg.omega_c + cfg.omega_h) / 2
    want = w / 2 * (SX + SZ) / math.sqrt(2)
    np.testing.assert_allclose(model.hamiltonian_ch(cfg, cfg.tau_dri / 2), want, atol=1e-9)


def test_time_outside_stroke_rejected(fig1_cfg):
    with pytest.raises(model.OutOfRange):
        model.hamiltonian_ch(fig1_cfg, -1e-9)
    with pytest.raises(model.OutOfRange):
        model.hamiltonian_ch(fig1_cfg, 2 * fig1_cfg.tau_dri)


@given(st.floats(0, 1))
def test_gap_follows_linear_ramp(s):
    cfg = model.fig1()
    h = model.hamiltonian_ch(cfg, s * cfg.tau_dri)
    gap = np.diff(np.linalg.eigvalsh(h))[0]
    assert gap == pytest.approx(float(model.omega_ramp(cfg, s * cfg.tau_dri)), rel=1e-12)


def test_squeeze_identity_at_zero():
    assert np.array_equal(model.squeeze_operator(0.0), np.eye(2))


def test_squeeze_rejects_complex():
    with pytest.raises(TypeError):
        model.squeeze_operator(0.5 + 0.1j)


@given(st.floats(0, 2))
def test_squeeze_is_unitary(r):
    s = model.squeeze_operator(r)
    np.testing.assert_allclose(s @ s.conj().T, np.eye(2), atol=1e-13)


@given(st.floats(0.05, 5), st.floats(1, 100))
def test_beta_eff_reduces_at_zero_squeezing(bw, w):
    assert model.beta_h_eff(bw / w, w, 0.0) == pytest.approx(bw / w, rel=1e-12)


@given(st.floats(0.05, 5), st.floats(0.01, 2))
def test_beta_eff_matches_squeezed_occupation(bw, r):
    # detailed balance of the squeezed rates: exp(beta_eff w) = (N + 1) / N
    big_n, _ = model.squeezed_occupations(bw, 1.0, r)
    assert model.beta_h_eff(bw, 1.0, r) == pytest.approx(math.log1p(1 / big_n), rel=1e-10)


@given(st.floats(0.05, 5), st.floats(0, 2), st.floats(0, 2))
def test_beta_eff_decreases_with_squeezing(bw, r1, r2):
    lo, hi = sorted((r1, r2))
    assert model.beta_h_eff(bw, 1.0, hi) <= model.beta_h_eff(bw, 1.0, lo) * (1 + 1e-12)


def test_beta_eff_high_temperature_limit():
    # beta_eff -> beta sech(2r) as beta omega -> 0
    b, r = 1e-6, 0.7
    assert model.beta_h_eff(b, 1.0, r) == pytest.approx(b / math.cosh(2 * r), rel=1e-6)
