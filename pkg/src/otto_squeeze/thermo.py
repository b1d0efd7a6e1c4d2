"""Deterministic thermodynamics of the limit cycle."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import dynamics, model
from .dynamics import CycleState
from .model import EngineConfig
from .qops import relative_entropy, shannon_entropy, von_neumann_entropy

CHECK_TOL = 1e-9


class DecompositionMismatch(ArithmeticError):
    """Two independent routes to the same average disagree."""


class NegativeVariance(ArithmeticError):
    pass


class NotEngine(ValueError):
    """The configuration does not operate as a heat engine."""


def _energy(rho, h) -> float:
    return float(np.trace(rho @ h).real)


@dataclass(frozen=True)
class CycleAverages:
    """Populations and stroke parameters entering the closed-form averages."""

    n_t0: float
    n_t1: float
    n_t2: float
    n_t3: float
    xi: float
    zeta_ch: float
    zeta_hc: float


def populations(cycle: CycleState) -> CycleAverages:
    """<n_t> = Tr(rho H)/(hbar omega) at the four boundaries plus xi and the zetas.

    The zetas are defined so the closed forms reproduce the energy balances
    and are cross-checked against the propagator matrix elements
    ``zeta = -Re[U^{gg} rho^{ge} (U^dag)^{eg}]``.
    """
    cfg = cycle.cfg
    hc, hh = model.hamiltonian_cold(cfg), model.hamiltonian_hot(cfg)
    ec, eh = cfg.hbar * cfg.omega_c, cfg.hbar * cfg.omega_h
    n0 = _energy(cycle.rho_t0, hc) / ec
    n1 = _energy(cycle.rho_t1, hh) / eh
    n2 = _energy(cycle.rho_t2, hh) / eh
    n3 = _energy(cycle.rho_t3, hc) / ec
    bc, bh = model.cold_basis(cfg), model.hot_basis(cfg)
    xi = dynamics.transition_probability(cycle.u_ch, bc, bh)
    xi_hc = dynamics.transition_probability(cycle.u_hc, bh, bc)
    if abs(xi - xi_hc) > 1e-10:
        raise DecompositionMismatch(f"compression/expansion transition probabilities differ: {xi} vs {xi_hc}")
    zeta_ch = (n1 - n0 * (1 - 2 * xi)) / 2
    zeta_hc = (n3 - n2 * (1 - 2 * xi)) / 2
    for zeta, u, rho, b_in, b_out, name in (
        (zeta_ch, cycle.u_ch, cycle.rho_t0, bc, bh, "zeta_ch"),
        (zeta_hc, cycle.u_hc, cycle.rho_t2, bh, bc, "zeta_hc"),
    ):
        ref = zeta_matrix_element(u, rho, b_in, b_out)
        if abs(zeta - ref) > CHECK_TOL:
            raise DecompositionMismatch(f"{name}: energy-balance {zeta:.3e} vs matrix-element {ref:.3e}")
    return CycleAverages(n0, n1, n2, n3, xi, zeta_ch, zeta_hc)


def zeta_matrix_element(u, rho, basis_in, basis_out) -> float:
    """-Re[U^{gg} rho^{ge} (U^dag)^{eg}] with in/out energy eigenbases (index 0 = g, 1 = e)."""
    um = dynamics.matrix_in_bases(u, basis_in, basis_out)
    rho_in = basis_in.conj().T @ rho @ basis_in
    udag_eg = np.conj(um[0, 1])
    return float(-(um[0, 0] * rho_in[0, 1] * udag_eg).real)


def energy_balance(cycle: CycleState) -> dict:
    """Stroke energy changes from traces: w1, q_h, w2, q_c."""
    cfg = cycle.cfg
    hc, hh = model.hamiltonian_cold(cfg), model.hamiltonian_hot(cfg)
    w1 = _energy(cycle.rho_t1, hh) - _energy(cycle.rho_t0, hc)
    q_h = _energy(cycle.rho_t2, hh) - _energy(cycle.rho_t1, hh)
    w2 = _energy(cycle.rho_t3, hc) - _energy(cycle.rho_t2, hh)
    q_c = _energy(cycle.rho_end, hc) - _energy(cycle.rho_t3, hc)
    return dict(w1=w1, q_h=q_h, w2=w2, q_c=q_c, w_tot=w1 + w2)


def work_closed_form(avg: CycleAverages, cfg: EngineConfig) -> float:
    """<w_tot> from populations, xi and zetas (work done on the medium)."""
    wc, wh = cfg.hbar * cfg.omega_c, cfg.hbar * cfg.omega_h
    extracted = ((wh - wc) * (avg.n_t2 - avg.n_t0)
                 + 2 * avg.xi * (wc * avg.n_t2 + wh * avg.n_t0)
                 - 2 * wh * avg.zeta_ch - 2 * wc * avg.zeta_hc)
    return -extracted


def heat_hot_closed_form(avg: CycleAverages, cfg: EngineConfig) -> float:
    wh = cfg.hbar * cfg.omega_h
    return wh * (avg.n_t2 + avg.n_t0 * (2 * avg.xi - 1) - 2 * avg.zeta_ch)


def _tol(cfg: EngineConfig) -> float:
    return CHECK_TOL * cfg.hbar * cfg.omega_h


def average_work(cycle: CycleState) -> float:
    """<w_tot>, checked between the trace route and the closed form."""
    exact = energy_balance(cycle)["w_tot"]
    closed = work_closed_form(populations(cycle), cycle.cfg)
    if abs(exact - closed) > _tol(cycle.cfg):
        raise DecompositionMismatch(f"<w_tot>: trace {exact} vs closed form {closed}")
    return exact


def average_heat_hot(cycle: CycleState) -> float:
    exact = energy_balance(cycle)["q_h"]
    closed = heat_hot_closed_form(populations(cycle), cycle.cfg)
    if abs(exact - closed) > _tol(cycle.cfg):
        raise DecompositionMismatch(f"<q_h>: trace {exact} vs closed form {closed}")
    return exact


def work_variance_closed_form(avg: CycleAverages, cfg: EngineConfig) -> float:
    wc, wh = cfg.hbar * cfg.omega_c, cfg.hbar * cfg.omega_h
    n0, n2, xi = avg.n_t0, avg.n_t2, avg.xi
    a = n0 * (1 - 2 * xi) + 2 * avg.zeta_ch
    b = n2 * (1 - 2 * xi) + 2 * avg.zeta_hc
    return (wh**2 * (0.5 - n2**2 - a**2)
            + wc**2 * (0.5 - n0**2 - b**2)
            + wc * wh * (2 * n0 * a + 2 * n2 * b + 2 * xi - 1))


def work_variance(cycle: CycleState, avg: CycleAverages | None = None) -> float:
    """Work fluctuation delta w_tot^2; raises on negative values beyond round-off."""
    cfg = cycle.cfg
    var = work_variance_closed_form(avg or populations(cycle), cfg)
    if var < -CHECK_TOL * (cfg.hbar * cfg.omega_h) ** 2:
        raise NegativeVariance(f"work variance {var} < 0")
    return max(var, 0.0)


def work_decomposition(avg: CycleAverages, cfg: EngineConfig) -> dict:
    wc, wh = cfg.hbar * cfg.omega_c, cfg.hbar * cfg.omega_h
    w_trls = (wh - wc) * (avg.n_t2 - avg.n_t0)
    w_fri = 2 * avg.xi * (wc * avg.n_t2 + wh * avg.n_t0)
    w_coh = -2 * wh * avg.zeta_ch - 2 * wc * avg.zeta_hc
    return dict(w_trls=w_trls, w_fri=w_fri, w_coh=w_coh, w_deph=w_trls + w_fri)


def generalized_carnot(cfg: EngineConfig) -> tuple[float, float]:
    """(eta_c_gen, beta_h_eff)."""
    b_eff = model.beta_h_eff(cfg.beta_h, cfg.omega_h, cfg.r, cfg.hbar)
    return 1 - b_eff / cfg.beta_c, b_eff


def efficiencies(w_tot: float, q_h: float, avg: CycleAverages, cfg: EngineConfig) -> dict:
    if not (q_h > 0 and w_tot < 0):
        raise NotEngine(f"q_h={q_h:.4g}, w_tot={w_tot:.4g}")
    eta_th = -w_tot / q_h
    eta_otto = cfg.eta_otto
    closed = eta_otto + 2 * (cfg.hbar * cfg.omega_c / q_h) * (
        avg.xi * (avg.n_t0 + avg.n_t2) - avg.zeta_hc - avg.zeta_ch)
    if abs(closed - eta_th) > CHECK_TOL:
        raise DecompositionMismatch(f"eta_th {eta_th} vs closed form {closed}")
    eta_c_gen, b_eff = generalized_carnot(cfg)
    return dict(eta_th=eta_th, eta_otto=eta_otto, eta_c_gen=eta_c_gen, beta_h_eff=b_eff)


def coherence(rho: np.ndarray, basis: np.ndarray) -> float:
    """Relative entropy of coherence S(dephased rho) - S(rho) in ``basis``."""
    pops = np.real(np.diag(basis.conj().T @ rho @ basis))
    return max(shannon_entropy(pops) - von_neumann_entropy(rho), 0.0)


def coherence_diagnostics(cycle: CycleState) -> tuple[float, float]:
    """(C(rho_t2), D(rho_t2 || hot steady state))."""
    rho = cycle.rho_t2
    c = coherence(rho, model.hot_basis(cycle.cfg))
    kl = relative_entropy(rho, cycle.hot.steady_state())
    return c, max(kl, 0.0)


def classify(w_tot: float, q_h: float, q_c: float) -> str:
    if w_tot < 0 and q_h > 0:
        return "engine"
    if w_tot > 0 and q_c > 0 and q_h < 0:
        return "refrigerator"
    if w_tot > 0 and q_h > 0 and q_c < 0:
        return "accelerator"
    if w_tot > 0 and q_h < 0 and q_c < 0:
        return "heater"
    return "dud"


@dataclass(frozen=True)
class ThermoReport:
    regime: str
    n_t0: float
    n_t2: float
    xi: float
    zeta_ch: float
    zeta_hc: float
    w_tot_avg: float
    q_h_avg: float
    q_c_avg: float
    w_trls: float
    w_fri: float
    w_coh: float
    w_deph: float
    w_var: float
    power: float
    rel_power_fluct: float
    eta_th: float
    eta_otto: float
    eta_c_gen: float
    beta_h_eff: float
    coherence_t2: float
    kl_t2: float
    tau_cyc: float
    omega_c: float
    hbar: float

    ENERGY_FIELDS = ("w_tot_avg", "q_h_avg", "q_c_avg", "w_trls", "w_fri", "w_coh", "w_deph")

    def to_dict(self) -> dict:
        """Flat record with raw values plus ``*_scaled`` copies in units of hbar omega_c, 1/omega_c."""
        d = asdict(self)
        e = self.hbar * self.omega_c
        for name in self.ENERGY_FIELDS:
            d[f"{name}_scaled"] = d[name] / e
        d["w_var_scaled"] = self.w_var / e**2
        d["power_scaled"] = self.power / (e * self.omega_c)
        d["tau_cyc_scaled"] = self.tau_cyc * self.omega_c
        d["beta_h_eff_scaled"] = self.beta_h_eff * e
        return d

    @classmethod
    def field_names(cls) -> list[str]:
        base = [f.name for f in fields(cls)]
        extra = [f"{n}_scaled" for n in cls.ENERGY_FIELDS]
        return base + extra + ["w_var_scaled", "power_scaled", "tau_cyc_scaled", "beta_h_eff_scaled"]


def thermo_report(cycle: CycleState) -> ThermoReport:
    """All averages, decompositions, bounds and diagnostics of one limit cycle."""
    cfg = cycle.cfg
    avg = populations(cycle)
    bal = energy_balance(cycle)
    w_tot, q_h, q_c = bal["w_tot"], bal["q_h"], bal["q_c"]
    tol = _tol(cfg)
    if abs(w_tot + q_h + q_c) > tol:
        raise DecompositionMismatch(f"energy not conserved: {w_tot + q_h + q_c}")
    if abs(w_tot - work_closed_form(avg, cfg)) > tol:
        raise DecompositionMismatch("<w_tot> closed form disagrees with energy balance")
    if abs(q_h - heat_hot_closed_form(avg, cfg)) > tol:
        raise DecompositionMismatch("<q_h> closed form disagrees with energy balance")
    parts = work_decomposition(avg, cfg)
    if abs(-w_tot - parts["w_deph"] - parts["w_coh"]) > tol:
        raise DecompositionMismatch("work decomposition does not sum to -<w_tot>")
    var = work_variance(cycle, avg)
    regime = classify(w_tot, q_h, q_c)
    eta_c_gen, b_eff = generalized_carnot(cfg)
    if regime == "engine":
        eta_th = efficiencies(w_tot, q_h, avg, cfg)["eta_th"]
        rel = math.sqrt(var) / abs(w_tot)
    else:
        eta_th = rel = math.nan
    c, kl = coherence_diagnostics(cycle)
    return ThermoReport(
        regime=regime, n_t0=avg.n_t0, n_t2=avg.n_t2, xi=avg.xi,
        zeta_ch=avg.zeta_ch, zeta_hc=avg.zeta_hc,
        w_tot_avg=w_tot, q_h_avg=q_h, q_c_avg=q_c, **parts, w_var=var,
        power=-w_tot / cfg.tau_cyc, rel_power_fluct=rel,
        eta_th=eta_th, eta_otto=cfg.eta_otto, eta_c_gen=eta_c_gen, beta_h_eff=b_eff,
        coherence_t2=c, kl_t2=kl, tau_cyc=cfg.tau_cyc, omega_c=cfg.omega_c, hbar=cfg.hbar,
    )


def simulate(cfg: EngineConfig, **kw) -> ThermoReport:
    return thermo_report(dynamics.solve_limit_cycle(cfg, **kw))
