"""Finite-time spin-1/2 Otto engine with a squeezed hot reservoir."""

from .model import EngineConfig, fig1
from .dynamics import solve_limit_cycle
from .thermo import ThermoReport, simulate
from .stats import build_tpm_chain, cgf, ldf

__all__ = ["EngineConfig", "fig1", "solve_limit_cycle", "ThermoReport", "simulate",
           "build_tpm_chain", "cgf", "ldf"]
__version__ = "0.1.0"
