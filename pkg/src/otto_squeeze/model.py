"""Physical definition of the squeezed-reservoir Otto engine."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .qops import SM, SP, SX, SZ, eig_herm, mat_exp

HOT_MODELS = ("secular", "anomalous", "frame")


class RangeError(ValueError):
    """A configuration value violates a physical invariant."""


class OutOfRange(ValueError):
    """A stroke time lies outside ``[0, tau_dri]``."""


@dataclass(frozen=True)
class EngineConfig:
    """All parameters of one engine cycle (hbar = 1 throughout).

    ``hot_model`` selects the hot-bath generator:

    * ``"secular"`` -- squeezed-bath GKSL dissipator with the normal
      correlations ``N = n (cosh 2r) + sinh^2 r`` only; the anomalous terms
      rotate at twice the qubit frequency in the lab frame and are dropped.
    * ``"anomalous"`` -- the same dissipator with the anomalous correlator
      ``M = -(n + 1/2) sinh(2r) e^{i squeeze_phase}`` kept, squeeze phase locked
      to the start of the stroke.
    * ``"frame"`` -- thermal dissipator applied to ``S(r) rho S(r)^dag``.
    """

    omega_c: float
    omega_h: float
    beta_c: float
    beta_h: float
    tau_dri: float
    tau_h: float
    tau_c: float
    gamma_h: float
    gamma_c: float
    r: float = 0.0
    dephase_after_hot: bool = False
    hot_model: str = "secular"
    squeeze_phase: float = 0.0
    hbar: float = field(default=1.0, repr=False)

    def __post_init__(self):
        for name in ("omega_c", "omega_h", "beta_c", "beta_h", "tau_dri", "tau_h", "tau_c",
                     "gamma_h", "gamma_c", "r", "squeeze_phase", "hbar"):
            if not math.isfinite(getattr(self, name)):
                raise RangeError(f"{name} must be finite")
        if self.hot_model not in HOT_MODELS:
            raise RangeError(f"hot_model must be one of {HOT_MODELS}, got {self.hot_model!r}")
        if self.r < 0:
            raise RangeError("r must be >= 0")
        for name in ("omega_c", "omega_h", "beta_c", "beta_h", "gamma_h", "gamma_c", "hbar"):
            if getattr(self, name) <= 0:
                raise RangeError(f"{name} must be > 0")
        for name in ("tau_dri", "tau_h", "tau_c"):
            if getattr(self, name) < 0:
                raise RangeError(f"{name} must be >= 0")

    def validate(self) -> "EngineConfig":
        """Enforce the engine-regime invariants used throughout the figures."""
        if not self.omega_h > self.omega_c > 0:
            raise RangeError("require omega_h > omega_c > 0")
        if not self.beta_c > self.beta_h > 0:
            raise RangeError("require beta_c > beta_h > 0")
        for name in ("tau_dri", "tau_h", "tau_c"):
            if getattr(self, name) <= 0:
                raise RangeError(f"require {name} > 0")
        return self

    @property
    def tau_cyc(self) -> float:
        return self.tau_h + self.tau_c + 2 * self.tau_dri

    @property
    def eta_otto(self) -> float:
        return 1 - self.omega_c / self.omega_h

    def replace(self, **changes) -> "EngineConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


FIG1 = dict(
    omega_c=2 * math.pi * 1000,
    omega_h=2 * math.pi * 2250,
    beta_c=2 / (2 * math.pi * 1000),
    beta_h=1 / (2 * math.pi * 2250),
    tau_c=3.0,
    gamma_c=3.0,
    gamma_h=3.0,
)
PRESETS = {"fig1": FIG1}


def fig1(**overrides) -> EngineConfig:
    """Fig. 1 caption constants; ``tau_h``, ``tau_dri`` default to 0.2 and 5e-4."""
    params = dict(FIG1, tau_h=0.2, tau_dri=5e-4)
    params.update(overrides)
    return EngineConfig(**params)


# --- drive protocol ----------------------------------------------------------


def omega_ramp(cfg: EngineConfig, t):
    """Gap during compression: affine from omega_c at t=0 to omega_h at t=tau_dri."""
    s = np.asarray(t) / cfg.tau_dri
    return cfg.omega_c * (1 - s) + cfg.omega_h * s


def _check_time(cfg: EngineConfig, t) -> None:
    t = np.asarray(t)
    if np.any(t < 0) or np.any(t > cfg.tau_dri * (1 + 1e-14)):
        raise OutOfRange(f"t must lie in [0, {cfg.tau_dri}]")


def ramp_field(omega_c: float, omega_h: float, tau_dri: float, t, hbar: float = 1.0) -> np.ndarray:
    """Pauli vector ``h(t)`` with ``H_ch(t) = h(t) . sigma``; shape ``(..., 3)``."""
    t = np.asarray(t, dtype=float)
    s = t / tau_dri
    theta = np.pi * s / 2
    half = hbar * (omega_c * (1 - s) + omega_h * s) / 2
    return np.stack([half * np.cos(theta), np.zeros_like(theta), half * np.sin(theta)], axis=-1)


def drive_field(cfg: EngineConfig, t) -> np.ndarray:
    return ramp_field(cfg.omega_c, cfg.omega_h, cfg.tau_dri, t, cfg.hbar)


def hamiltonian_ch(cfg: EngineConfig, t: float) -> np.ndarray:
    _check_time(cfg, t)
    hx, _, hz = drive_field(cfg, t)
    return hx * SX + hz * SZ


def hamiltonian_hc(cfg: EngineConfig, s: float) -> np.ndarray:
    """Expansion Hamiltonian, the time-reverse of compression."""
    _check_time(cfg, s)
    return hamiltonian_ch(cfg, cfg.tau_dri - s)


def hamiltonian_cold(cfg: EngineConfig) -> np.ndarray:
    return cfg.hbar * cfg.omega_c / 2 * SX


def hamiltonian_hot(cfg: EngineConfig) -> np.ndarray:
    return cfg.hbar * cfg.omega_h / 2 * SZ


def energy_basis(h: np.ndarray) -> np.ndarray:
    """Columns (ground, excited) of the eigenbasis of ``h``."""
    return eig_herm(h)[1]


def cold_basis(cfg: EngineConfig) -> np.ndarray:
    return energy_basis(hamiltonian_cold(cfg))


def hot_basis(cfg: EngineConfig) -> np.ndarray:
    return energy_basis(hamiltonian_hot(cfg))


def squeeze_operator(r: float) -> np.ndarray:
    """S(r) = exp(r sigma_- - r sigma_+) for real r (a rotation about y by 2r)."""
    if np.iscomplexobj(r) or not np.isreal(r):
        raise TypeError("only real squeezing parameters are supported")
    return mat_exp(r * SM - r * SP)


def thermal_occupation(beta: float, omega: float, hbar: float = 1.0) -> float:
    return 1.0 / math.expm1(beta * hbar * omega)


def squeezed_occupations(beta: float, omega: float, r: float, hbar: float = 1.0) -> tuple[float, float]:
    """(N, |M|) of a squeezed thermal bath at the qubit frequency."""
    n = thermal_occupation(beta, omega, hbar)
    big_n = n * math.cosh(2 * r) + math.sinh(r) ** 2
    big_m = (n + 0.5) * math.sinh(2 * r)
    return big_n, big_m


def beta_h_eff(beta_h: float, omega_h: float, r: float, hbar: float = 1.0) -> float:
    """Effective inverse temperature of the squeezed hot bath."""
    c = math.cosh(2 * r)
    g = math.expm1(beta_h * hbar * omega_h)
    return math.log((2 * c + g * (c + 1)) / (2 * c + g * (c - 1))) / (hbar * omega_h)
