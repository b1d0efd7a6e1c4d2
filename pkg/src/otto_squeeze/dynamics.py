"""Stroke propagation and the limit-cycle solve.

Unitary strokes use a step-doubled product of short-time exponentials;
isochores are exact exponentials of a 4x4 Pauli-basis Lindbladian.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import model
from .model import EngineConfig
from .qops import (
    I2,
    PAULI,
    SM,
    SP,
    apply_superop,
    check_density_matrix,
    dagger,
    from_bloch,
    mat_exp_batch,
    polar_unitary,
    superop,
    to_bloch,
    trace_distance,
    unitary_superop,
)

PROPAGATOR_TOL = 1e-11
MAX_STEPS = 2**24
_CHUNK = 2**16
_ORDER = {"magnus4": 4, "midpoint": 2}


class NoConvergence(RuntimeError):
    pass


class NoLimitCycle(RuntimeError):
    pass


# --- time-ordered exponentials -----------------------------------------------


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """mats[n-1] @ ... @ mats[0] by pairwise reduction."""
    while len(mats) > 1:
        if len(mats) % 2:
            mats = np.concatenate([mats, I2[None]])
        mats = np.matmul(mats[1::2], mats[0::2])
    return mats[0]


def _step_exponents(field, t0: np.ndarray, dt: float, method: str, hbar: float) -> np.ndarray:
    """Pauli vectors g_k with step propagator exp(-i g_k . sigma)."""
    if method == "midpoint":
        return field(t0 + dt / 2) * dt / hbar
    c = math.sqrt(3) / 6
    h1 = field(t0 + dt * (0.5 - c)) / hbar
    h2 = field(t0 + dt * (0.5 + c)) / hbar
    # two-point Gauss Magnus: Omega = -i[dt/2 (h1+h2) + (sqrt3/6) dt^2 h2 x h1].sigma
    return dt / 2 * (h1 + h2) + c * dt * dt * np.cross(h2, h1)


def _product(field, duration: float, n: int, method: str, hbar: float) -> np.ndarray:
    dt = duration / n
    u = I2.copy()
    for start in range(0, n, _CHUNK):
        k = np.arange(start, min(start + _CHUNK, n))
        g = _step_exponents(field, k * dt, dt, method, hbar)
        u = _ordered_product(mat_exp_batch(np.zeros(len(k)), -1j * g)) @ u
    return u


def time_ordered_exponential(field, duration: float, *, tol: float = PROPAGATOR_TOL,
                             method: str = "magnus4", hbar: float = 1.0,
                             n_start: int = 16, max_steps: int = MAX_STEPS) -> tuple[np.ndarray, int]:
    """T exp(-i/hbar int_0^duration h(t).sigma dt) for a traceless Hamiltonian.

    ``field(t)`` maps an array of times to Pauli vectors of shape ``(n, 3)``.
    The step count doubles until successive products differ by less than
    ``tol`` in max-norm; the last pair is Richardson-combined and projected
    onto the unitary group.  Returns ``(U, steps)``.
    """
    if method not in _ORDER:
        raise ValueError(f"unknown method {method!r}")
    if duration == 0:
        return I2.copy(), 0
    p = _ORDER[method]
    n = n_start
    prev = _product(field, duration, n, method, hbar)
    while True:
        n *= 2
        if n > max_steps:
            raise NoConvergence(f"time-ordered exponential not converged to {tol:g} within {max_steps} steps")
        cur = _product(field, duration, n, method, hbar)
        diff = np.max(np.abs(cur - prev))
        if diff < tol:
            return polar_unitary(cur + (cur - prev) / (2**p - 1)), n
        prev = cur


@dataclass(frozen=True, eq=False)
class Propagator:
    u: np.ndarray
    stroke: str
    steps: int = 0

    @property
    def superop(self) -> np.ndarray:
        return unitary_superop(self.u)


@functools.lru_cache(maxsize=512)
def _cached_propagator(omega_c, omega_h, tau_dri, hbar, stroke, method, tol):
    if stroke == "compression":
        def field(t):
            return model.ramp_field(omega_c, omega_h, tau_dri, t, hbar)
    else:
        def field(s):
            return model.ramp_field(omega_c, omega_h, tau_dri, tau_dri - s, hbar)
    u, n = time_ordered_exponential(field, tau_dri, tol=tol, method=method, hbar=hbar)
    u.setflags(write=False)
    return Propagator(u=u, stroke=stroke, steps=n)


def build_propagator(cfg: EngineConfig, stroke: str, *, method: str = "magnus4",
                     tol: float = PROPAGATOR_TOL) -> Propagator:
    """U_ch (``"compression"``) or U_hc (``"expansion"``); cached per drive."""
    if stroke not in ("compression", "expansion"):
        raise ValueError(f"unknown stroke {stroke!r}")
    return _cached_propagator(float(cfg.omega_c), float(cfg.omega_h), float(cfg.tau_dri),
                              float(cfg.hbar), stroke, method, float(tol))


def transition_probability(u, basis_in: np.ndarray, basis_out: np.ndarray) -> float:
    """|<e_out|U|g_in>|^2, the level-flip probability across a stroke."""
    u = u.u if isinstance(u, Propagator) else u
    amp = np.conj(basis_out[:, 1]) @ u @ basis_in[:, 0]
    return float(abs(amp) ** 2)


def matrix_in_bases(u, basis_in: np.ndarray, basis_out: np.ndarray) -> np.ndarray:
    """Elements <m_out|U|n_in> indexed (m, n) with 0 = ground, 1 = excited."""
    u = u.u if isinstance(u, Propagator) else u
    return dagger(basis_out) @ u @ basis_in


# --- isochores ---------------------------------------------------------------


def _dissipator(jump: np.ndarray):
    jd = dagger(jump)
    jdj = jd @ jump
    return lambda x: jump @ x @ jd - 0.5 * (jdj @ x + x @ jdj)


def thermal_generator(basis: np.ndarray, down: float, up: float) -> np.ndarray:
    """Pauli-basis generator with decay rate ``down`` and excitation rate ``up``."""
    lower = np.outer(basis[:, 0], np.conj(basis[:, 1]))
    d_down, d_up = _dissipator(lower), _dissipator(dagger(lower))
    return superop(lambda x: down * d_down(x) + up * d_up(x))


def squeezed_generator(gamma: float, big_n: float, big_m: complex) -> np.ndarray:
    """Squeezed-bath dissipator in the sigma_z basis including anomalous terms."""
    d_down, d_up = _dissipator(SM), _dissipator(SP)

    def gen(x):
        out = gamma * (big_n + 1) * d_down(x) + gamma * big_n * d_up(x)
        return out - gamma * big_m * (SP @ x @ SP) - gamma * np.conj(big_m) * (SM @ x @ SM)

    return superop(gen)


def hamiltonian_rotation(h: np.ndarray, t: float, hbar: float = 1.0) -> np.ndarray:
    """Superoperator of free evolution under a constant traceless ``h`` for time ``t``."""
    a = np.array([0.5 * np.trace(p @ h).real for p in PAULI[1:]])
    u = mat_exp_batch(np.zeros(1), (-1j * t / hbar * a)[None])[0]
    return unitary_superop(u)


@dataclass(frozen=True, eq=False)
class IsochoreChannel:
    """CPTP map of one isochore: ``matrix = rotation(duration) @ expm(generator*duration)``."""

    bath: str
    duration: float
    generator: np.ndarray
    hamiltonian: np.ndarray | None
    hbar: float = 1.0

    def at(self, duration: float) -> np.ndarray:
        m = expm(self.generator * duration)
        if self.hamiltonian is not None:
            m = hamiltonian_rotation(self.hamiltonian, duration, self.hbar) @ m
        m[0] = (1.0, 0.0, 0.0, 0.0)
        return m

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        return self.at(self.duration)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return check_density_matrix(apply_superop(self.matrix, rho))

    def steady_state(self) -> np.ndarray:
        """Infinite-time fixed point of the dissipative part."""
        g = self.generator
        v = np.linalg.solve(g[1:, 1:], -g[1:, 0])
        return from_bloch(np.concatenate([[1.0], v]))


def isochore_channel(cfg: EngineConfig, bath: str, duration: float | None = None) -> IsochoreChannel:
    """Channel of the ``"hot"`` (squeezed) or ``"cold"`` (thermal) isochore."""
    if bath == "cold":
        n = model.thermal_occupation(cfg.beta_c, cfg.omega_c, cfg.hbar)
        gen = thermal_generator(model.cold_basis(cfg), cfg.gamma_c * (n + 1), cfg.gamma_c * n)
        return IsochoreChannel("cold", cfg.tau_c if duration is None else duration, gen,
                               model.hamiltonian_cold(cfg), cfg.hbar)
    if bath != "hot":
        raise ValueError(f"unknown bath {bath!r}")
    tau = cfg.tau_h if duration is None else duration
    h_hot = model.hamiltonian_hot(cfg)
    if cfg.hot_model == "frame":
        n = model.thermal_occupation(cfg.beta_h, cfg.omega_h, cfg.hbar)
        s = unitary_superop(model.squeeze_operator(cfg.r))
        gen = s.T @ thermal_generator(model.hot_basis(cfg), cfg.gamma_h * (n + 1), cfg.gamma_h * n) @ s
        return IsochoreChannel("hot", tau, gen, None, cfg.hbar)
    big_n, big_m = model.squeezed_occupations(cfg.beta_h, cfg.omega_h, cfg.r, cfg.hbar)
    if cfg.hot_model == "secular":
        gen = thermal_generator(model.hot_basis(cfg), cfg.gamma_h * (big_n + 1), cfg.gamma_h * big_n)
    else:
        gen = squeezed_generator(cfg.gamma_h, big_n, -big_m * np.exp(1j * cfg.squeeze_phase))
    return IsochoreChannel("hot", tau, gen, h_hot, cfg.hbar)


def dephasing_map(rho: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Remove all coherence of ``rho`` in the orthonormal ``basis``."""
    out = np.zeros((2, 2), dtype=complex)
    for k in range(2):
        proj = np.outer(basis[:, k], np.conj(basis[:, k]))
        out += proj @ rho @ proj
    return out


def dephasing_superop(basis: np.ndarray) -> np.ndarray:
    return superop(lambda x: dephasing_map(x, basis))


# --- limit cycle -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CycleState:
    cfg: EngineConfig
    rho_t0: np.ndarray
    rho_t1: np.ndarray
    rho_t2: np.ndarray
    rho_t3: np.ndarray
    rho_end: np.ndarray
    u_ch: Propagator
    u_hc: Propagator
    hot: IsochoreChannel
    cold: IsochoreChannel

    @property
    def states(self) -> tuple[np.ndarray, ...]:
        return (self.rho_t0, self.rho_t1, self.rho_t2, self.rho_t3, self.rho_end)


def stroke_superops(cfg: EngineConfig, u_ch: Propagator, u_hc: Propagator,
                    hot: IsochoreChannel, cold: IsochoreChannel) -> list[np.ndarray]:
    hot_m = hot.matrix
    if cfg.dephase_after_hot:
        hot_m = dephasing_superop(model.hot_basis(cfg)) @ hot_m
    return [u_ch.superop, hot_m, u_hc.superop, cold.matrix]


def cycle_map(cfg: EngineConfig, **kw) -> np.ndarray:
    """Bloch-space matrix of one full cycle starting at t0."""
    ops = stroke_superops(cfg, build_propagator(cfg, "compression", **kw),
                          build_propagator(cfg, "expansion", **kw),
                          isochore_channel(cfg, "hot"), isochore_channel(cfg, "cold"))
    return ops[3] @ ops[2] @ ops[1] @ ops[0]


def _fixed_point(phi: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    try:
        v = np.linalg.solve(np.eye(3) - phi[1:, 1:], phi[1:, 0])
        v = np.concatenate([[1.0], v])
        if np.all(np.isfinite(v)) and np.linalg.norm(phi @ v - v) <= tol:
            return v
    except np.linalg.LinAlgError:
        pass
    v = np.array([1.0, 0.0, 0.0, 0.0])
    for _ in range(max_iter):
        nxt = phi @ v
        if np.linalg.norm(nxt - v) <= tol:
            return nxt
        v = nxt
    raise NoLimitCycle("cycle map has no attracting fixed point within tolerance")


def solve_limit_cycle(cfg: EngineConfig, *, tol: float = 1e-12, max_iter: int = 10**6,
                      method: str = "magnus4") -> CycleState:
    """Periodic steady state of compression, hot isochore, expansion, cold isochore."""
    u_ch = build_propagator(cfg, "compression", method=method)
    u_hc = build_propagator(cfg, "expansion", method=method)
    hot = isochore_channel(cfg, "hot")
    cold = isochore_channel(cfg, "cold")
    ops = stroke_superops(cfg, u_ch, u_hc, hot, cold)
    phi = ops[3] @ ops[2] @ ops[1] @ ops[0]
    v = _fixed_point(phi, tol, max_iter)
    vs = [v]
    for op in ops:
        vs.append(op @ vs[-1])
    rhos = [check_density_matrix(from_bloch(x)) for x in vs]
    if trace_distance(rhos[4], rhos[0]) > tol:
        raise NoLimitCycle(f"limit-cycle residual {trace_distance(rhos[4], rhos[0]):.3g} exceeds {tol:g}")
    return CycleState(cfg, *rhos, u_ch=u_ch, u_hc=u_hc, hot=hot, cold=cold)


def iterate_cycle(cfg: EngineConfig, rho0: np.ndarray, n_cycles: int) -> np.ndarray:
    """Brute-force stroboscopic iteration (used as an oracle for the direct solve)."""
    phi = cycle_map(cfg)
    v = to_bloch(rho0)
    for _ in range(n_cycles):
        v = phi @ v
    return from_bloch(v)
