"""Two-point-measurement statistics of heat and work.

Energies are measured projectively at the five stroke boundaries.  The
boundary state at the end of the cold isochore starts the next cycle, so
cycles form a two-state Markov chain; long-time statistics come from the
Perron root of the tilted one-cycle matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import dynamics, model
from .thermo import generalized_carnot
from .dynamics import CycleState
from .minimize import BracketFailure, minimize_scalar
from .qops import from_bloch, to_bloch

# path axes: (n0, n1, n2, n3, n4), 0 = ground, 1 = excited
_G = np.indices((2, 2, 2, 2, 2))


@dataclass(frozen=True, eq=False)
class TpmChain:
    """Column-stochastic kernels ``K[out, in]`` for the four strokes plus level energies."""

    kernels: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    eps_c: np.ndarray
    eps_h: np.ndarray
    stationary: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.stationary is None:
            object.__setattr__(self, "stationary", _stationary(self.cycle_kernel))

    @property
    def cycle_kernel(self) -> np.ndarray:
        k1, k2, k3, k4 = self.kernels
        return k4 @ k3 @ k2 @ k1

    @property
    def increments(self) -> dict:
        """Per-path (shape 2x2x2x2x2) energy increments."""
        n0, n1, n2, n3, n4 = _G
        ec, eh = self.eps_c, self.eps_h
        w1 = eh[n1] - ec[n0]
        q_h = eh[n2] - eh[n1]
        w2 = ec[n3] - eh[n2]
        q_c = ec[n4] - ec[n3]
        return dict(w1=w1, q_h=q_h, w2=w2, q_c=q_c, w_tot=w1 + w2)

    @property
    def log_path_weights(self) -> np.ndarray:
        """log P(n1..n4 | n0) for every path."""
        n0, n1, n2, n3, n4 = _G
        k1, k2, k3, k4 = self.kernels
        with np.errstate(divide="ignore"):
            return (np.log(k1[n1, n0]) + np.log(k2[n2, n1])
                    + np.log(k3[n3, n2]) + np.log(k4[n4, n3]))


def _stationary(k: np.ndarray) -> np.ndarray:
    # two-state column-stochastic chain: pi_1 = k[1,0] / (k[1,0] + k[0,1])
    a, b = k[1, 0], k[0, 1]
    if a + b == 0:
        return np.array([0.5, 0.5])
    pi = np.array([b, a]) / (a + b)
    return pi


def _population_kernel(matrix: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """K[m, n] = <m| E(|n><n|) |m> for a Pauli-basis channel ``matrix``."""
    k = np.empty((2, 2))
    for n in range(2):
        proj = np.outer(basis[:, n], np.conj(basis[:, n]))
        out = from_bloch(matrix @ to_bloch(proj))
        k[:, n] = np.real(np.diag(basis.conj().T @ out @ basis))
    k = np.clip(k, 0.0, None)
    return k / k.sum(axis=0)


def _unitary_kernel(u, basis_in, basis_out) -> np.ndarray:
    return np.abs(dynamics.matrix_in_bases(u, basis_in, basis_out)) ** 2


def build_tpm_chain(cycle: CycleState) -> TpmChain:
    cfg = cycle.cfg
    bc, bh = model.cold_basis(cfg), model.hot_basis(cfg)
    kernels = (
        _unitary_kernel(cycle.u_ch, bc, bh),
        _population_kernel(cycle.hot.matrix, bh),
        _unitary_kernel(cycle.u_hc, bh, bc),
        _population_kernel(cycle.cold.matrix, bc),
    )
    ec = cfg.hbar * cfg.omega_c / 2 * np.array([-1.0, 1.0])
    eh = cfg.hbar * cfg.omega_h / 2 * np.array([-1.0, 1.0])
    return TpmChain(kernels, ec, eh)


def chain_for(cfg: model.EngineConfig) -> TpmChain:
    return build_tpm_chain(dynamics.solve_limit_cycle(cfg))


# --- cumulant generating functions ------------------------------------------


def _log_perron(log_t: np.ndarray) -> float:
    """log of the largest eigenvalue of a non-negative 2x2 matrix given entrywise logs."""
    # diagonal similarity: both off-diagonals -> their geometric mean, spectrum unchanged
    a, d = log_t[0, 0], log_t[1, 1]
    g = (log_t[0, 1] + log_t[1, 0]) / 2
    m = max(a, d, g)
    if not np.isfinite(m):
        return -math.inf
    a, d, g = math.exp(a - m), math.exp(d - m), math.exp(g - m)
    # largest scaled entry is 1, so the root is >= 1 and the log is safe
    return m + math.log((a + d) / 2 + math.sqrt(((a - d) / 2) ** 2 + g * g))


def tilted_log_matrix(chain: TpmChain, phi1: float, phi2: float) -> np.ndarray:
    """Entrywise log of T[n4, n0] = sum_paths P e^{phi1 q_h + phi2 w_tot}."""
    inc = chain.increments
    logw = chain.log_path_weights + phi1 * inc["q_h"] + phi2 * inc["w_tot"]
    return logsumexp(logw, axis=(1, 2, 3)).T


def cgf(chain: TpmChain, phi1: float, phi2: float) -> float:
    """Scaled CGF per cycle: log Perron root of the tilted cycle matrix."""
    if phi1 == 0 and phi2 == 0:
        return 0.0
    return _log_perron(tilted_log_matrix(chain, phi1, phi2))


def cgf_iid(chain: TpmChain, phi1: float, phi2: float) -> float:
    """ln <e^{phi1 q_h + phi2 w_tot}> over one cycle started from the stationary state."""
    inc = chain.increments
    with np.errstate(divide="ignore"):
        log_pi = np.log(chain.stationary)[_G[0]]
    return float(logsumexp(log_pi + chain.log_path_weights + phi1 * inc["q_h"] + phi2 * inc["w_tot"]))


def _path_probabilities(chain: TpmChain) -> np.ndarray:
    return chain.stationary[_G[0]] * np.exp(chain.log_path_weights)


def path_moments(chain: TpmChain, a: float = 0.0, b: float = 1.0) -> tuple[float, float]:
    """Single-cycle mean and variance of ``a q_h + b w_tot`` by explicit enumeration of the 32 paths."""
    inc = chain.increments
    x = a * inc["q_h"] + b * inc["w_tot"]
    p = _path_probabilities(chain)
    mean = float(np.sum(p * x))
    return mean, float(np.sum(p * (x - mean) ** 2))


def cgf_derivatives(chain: TpmChain, a: float = 0.0, b: float = 1.0) -> tuple[float, float]:
    """First and second derivative of ``s -> cgf(s a, s b)`` at ``s = 0``.

    Equal to the long-time mean and asymptotic variance per cycle of
    ``X = a q_h + b w_tot``; the variance includes the cycle-to-cycle
    covariances through the Markov boundary state.
    """
    inc = chain.increments
    x = a * inc["q_h"] + b * inc["w_tot"]
    w = np.exp(chain.log_path_weights)
    t1 = np.einsum("abcde,abcde->ea", w, x)  # [n4, n0]
    t2 = np.einsum("abcde,abcde->ea", w, x * x)
    pi = chain.stationary
    k = chain.cycle_kernel
    mean = float(t1.sum(axis=0) @ pi)
    h = t1.sum(axis=0)  # E[X | n0]
    g = t1 @ pi  # E[X 1{n4}]
    proj = np.outer(pi, np.ones(2))
    fundamental = np.linalg.inv(np.eye(2) - k + proj) - proj
    var = float(t2.sum(axis=0) @ pi - mean**2 + 2 * h @ fundamental @ g)
    return mean, var


# --- large deviations of the efficiency --------------------------------------


@dataclass(frozen=True, eq=False)
class LdfCurve:
    eta_grid: np.ndarray
    j_values: np.ndarray
    phi2_star: np.ndarray
    at_edge: np.ndarray

    @property
    def argmin_eta(self) -> float:
        return float(self.eta_grid[np.argmin(self.j_values)])

    @property
    def argmax_eta(self) -> float:
        return float(self.eta_grid[np.argmax(self.j_values)])

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.eta_grid)))


def default_eta_grid(cfg: model.EngineConfig, points: int = 400, lo: float = -0.2, hi: float = 1.3) -> np.ndarray:
    eta_c_gen, _ = generalized_carnot(cfg)
    return np.linspace(lo * eta_c_gen, hi * eta_c_gen, points)


def ldf_point(chain: TpmChain, eta: float, tol: float = 1e-10, limit: float | None = None):
    scale = float(chain.eps_h[1] * 2)
    limit = 1e3 / scale if limit is None else limit
    res = minimize_scalar(lambda p: cgf(chain, p * eta, p), 0.0, 0.1 / scale, limit, tol)
    return -min(res.fx, 0.0), res.x, res.at_edge


def ldf(chain: TpmChain, eta_grid, tol: float = 1e-10) -> LdfCurve:
    """J(eta) = -min_{phi2} cgf(phi2 eta, phi2) on a grid."""
    eta_grid = np.asarray(eta_grid, dtype=float)
    j = np.empty_like(eta_grid)
    phi = np.empty_like(eta_grid)
    edge = np.zeros(len(eta_grid), dtype=bool)
    for i, eta in enumerate(eta_grid):
        j[i], phi[i], edge[i] = ldf_point(chain, eta, tol)
    if len(edge) and edge.all():
        raise BracketFailure("no finite minimiser anywhere on the grid (degenerate chain)")
    return LdfCurve(eta_grid, j, phi, edge)


def tpm_efficiency(chain: TpmChain) -> float:
    """Long-time efficiency -<w_tot>/<q_h> of the measured chain."""
    w, _ = cgf_derivatives(chain, 0.0, 1.0)
    q, _ = cgf_derivatives(chain, 1.0, 0.0)
    return -w / q


# --- exact single-cycle distribution ----------------------------------------


@dataclass(frozen=True, eq=False)
class EfficiencyHistogram:
    q_h: np.ndarray
    w_tot: np.ndarray
    probability: np.ndarray
    eta: np.ndarray
    diverging_mass: float


def stochastic_efficiency_histogram(chain: TpmChain, decimals: int = 9) -> EfficiencyHistogram:
    """Distribution of eta = -w_tot/q_h over the 32 single-cycle paths.

    Paths sharing the same (q_h, w_tot) are merged; paths with ``q_h = 0``
    have no finite efficiency and are summed into ``diverging_mass``.
    """
    inc = chain.increments
    p = _path_probabilities(chain).ravel()
    q = inc["q_h"].ravel()
    w = inc["w_tot"].ravel()
    scale = float(chain.eps_h[1] * 2)
    keys = np.round(np.column_stack([q, w]) / scale, decimals)
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    prob = np.bincount(inv.ravel(), weights=p, minlength=len(first))
    keep = prob > 0
    qs, ws, prob = q[first][keep], w[first][keep], prob[keep]
    zero = np.abs(qs) < 0.5 * scale * 10.0**-decimals
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(zero, np.nan, -ws / np.where(zero, 1.0, qs))
    return EfficiencyHistogram(qs, ws, prob, eta, float(prob[zero].sum()))


# --- Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectories:
    """Per-cycle samples in chain-major order (cycles of one chain are contiguous)."""

    q_h: np.ndarray
    w_tot: np.ndarray
    q_c: np.ndarray
    chain_length: int

    def joint_distribution(self, decimals: int = 9):
        pts = np.column_stack([self.q_h, self.w_tot])
        scale = max(np.max(np.abs(pts)), 1.0)
        _, first, counts = np.unique(np.round(pts / scale, decimals), axis=0,
                                     return_index=True, return_counts=True)
        return pts[first], counts / counts.sum()


def _run_stream(chain: TpmChain, rng: np.random.Generator, n_chains: int, length: int):
    ec, eh = chain.eps_c, chain.eps_h
    k1, k2, k3, k4 = chain.kernels
    q = np.empty((n_chains, length))
    w = np.empty((n_chains, length))
    qc = np.empty((n_chains, length))
    state = (rng.random(n_chains) < chain.stationary[1]).astype(int)
    for t in range(length):
        u = rng.random((4, n_chains))
        n1 = (u[0] < k1[1, state]).astype(int)
        n2 = (u[1] < k2[1, n1]).astype(int)
        n3 = (u[2] < k3[1, n2]).astype(int)
        n4 = (u[3] < k4[1, n3]).astype(int)
        w[:, t] = eh[n1] - ec[state] + ec[n3] - eh[n2]
        q[:, t] = eh[n2] - eh[n1]
        qc[:, t] = ec[n4] - ec[n3]
        state = n4
    return q, w, qc


def sample_trajectories(chain: TpmChain, n_cycles: int, seed: int, *, n_streams: int = 16,
                        chains_per_stream: int = 64, executor=None) -> Trajectories:
    """Monte Carlo cycles from the stationary chain.

    Each stream owns an independent generator spawned from ``(seed, stream index)``
    and runs ``chains_per_stream`` chains in lock-step.  The result depends only
    on ``(seed, n_streams, chains_per_stream)``, never on the executor.
    """
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    total_chains = n_streams * chains_per_stream
    length = -(-n_cycles // total_chains)
    seqs = np.random.SeedSequence(seed).spawn(n_streams)
    args = [(chain, np.random.default_rng(s), chains_per_stream, length) for s in seqs]
    if executor is None:
        parts = [_run_stream(*a) for a in args]
    else:
        parts = list(executor.map(_run_stream, *zip(*args)))
    q, w, qc = (np.concatenate([p[i] for p in parts]).ravel()[:n_cycles] for i in range(3))
    return Trajectories(q, w, qc, length)
