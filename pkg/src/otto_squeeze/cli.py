"""Command-line driver: ``otto-squeeze simulate|sweep|ldf|histogram --config run.toml``.

Config files are flat TOML.  Physics keys are those of ``EngineConfig``;
``preset = "fig1"`` fills in everything except ``tau_h`` and ``tau_dri``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import dynamics, model, qops, stats, thermo
from .minimize import BracketFailure

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

MODES = ("simulate", "sweep", "ldf", "histogram")
SWEEP_AXES = ("r", "tau_h", "tau_dri", "tau_c")
VALIDATION_LEVELS = ("fast", "strict")

PHYSICS_KEYS = {
    "omega_c": float, "omega_h": float, "beta_c": float, "beta_h": float,
    "tau_dri": float, "tau_h": float, "tau_c": float,
    "gamma_h": float, "gamma_c": float, "r": float,
    "dephase_after_hot": bool, "hot_model": str, "squeeze_phase": float,
}
OPTIONAL_PHYSICS = {"r", "dephase_after_hot", "hot_model", "squeeze_phase"}
RUN_KEYS = {
    "preset": str, "mode": str, "output": str, "seed": int, "validation_level": str,
    "sweep_axis": str, "sweep_start": float, "sweep_stop": float, "sweep_points": int, "sweep_log": bool,
    "eta_points": int, "mc_cycles": int, "regime_error": bool,
}

EXIT_OK, EXIT_SCHEMA, EXIT_RANGE, EXIT_NUMERIC, EXIT_REGIME = 0, 2, 3, 4, 5


class SchemaError(ValueError):
    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


class RegimeError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    points: int
    log: bool = False

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunSpec:
    base: model.EngineConfig
    mode: str = "simulate"
    sweep: SweepAxis | None = None
    output: str | None = None
    seed: int = 0
    validation_level: str = "fast"
    eta_points: int = 400
    mc_cycles: int = 0
    regime_error: bool = False
    preset: str | None = field(default=None, compare=False)


# --- parsing -----------------------------------------------------------------


def _coerce(key: str, value, kind):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(key, f"expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(key, f"expected an integer, got {type(value).__name__}")
        return value
    if not isinstance(value, kind):
        raise SchemaError(key, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_config(text: str, mode: str | None = None) -> RunSpec:
    """Validate a flat TOML document into a RunSpec.

    Raises SchemaError for unknown, missing or mistyped keys and
    ``model.RangeError`` for values violating a model invariant.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError("<document>", str(exc)) from exc
    allowed = PHYSICS_KEYS | RUN_KEYS
    for key, value in doc.items():
        if key not in allowed:
            raise SchemaError(key, "unknown key")
        if isinstance(value, dict):
            raise SchemaError(key, "nested tables are not allowed")
    vals = {k: _coerce(k, v, allowed[k]) for k, v in doc.items()}

    preset = vals.pop("preset", None)
    physics: dict = {}
    if preset is not None:
        if preset not in model.PRESETS:
            raise SchemaError("preset", f"unknown preset {preset!r}")
        physics.update(model.PRESETS[preset])
    physics.update({k: v for k, v in vals.items() if k in PHYSICS_KEYS})
    for key in PHYSICS_KEYS:
        if key not in physics and key not in OPTIONAL_PHYSICS:
            raise SchemaError(key, "required key missing")
    base = model.EngineConfig(**physics).validate()

    mode = mode or vals.get("mode", "simulate")
    if mode not in MODES:
        raise SchemaError("mode", f"must be one of {MODES}")
    level = vals.get("validation_level", "fast")
    if level not in VALIDATION_LEVELS:
        raise SchemaError("validation_level", f"must be one of {VALIDATION_LEVELS}")

    # sweep keys are parsed whenever present so one file serves every mode
    sweep = None
    if mode == "sweep" or any(k.startswith("sweep_") for k in vals):
        for key in ("sweep_axis", "sweep_start", "sweep_stop", "sweep_points"):
            if key not in vals:
                raise SchemaError(key, "required to define a sweep")
        if vals["sweep_axis"] not in SWEEP_AXES:
            raise SchemaError("sweep_axis", f"must be one of {SWEEP_AXES}")
        sweep = SweepAxis(vals["sweep_axis"], vals["sweep_start"], vals["sweep_stop"],
                          vals["sweep_points"], vals.get("sweep_log", False))
        _check_sweep(sweep)

    spec = RunSpec(
        base=base, mode=mode, sweep=sweep, output=vals.get("output"),
        seed=vals.get("seed", 0), validation_level=level,
        eta_points=vals.get("eta_points", 400), mc_cycles=vals.get("mc_cycles", 0),
        regime_error=vals.get("regime_error", False), preset=preset,
    )
    if spec.eta_points < 2:
        raise model.RangeError("eta_points must be >= 2")
    if spec.mc_cycles < 0:
        raise model.RangeError("mc_cycles must be >= 0")
    return spec


def _check_sweep(s: SweepAxis) -> None:
    if s.points < 2:
        raise model.RangeError("sweep_points must be >= 2")
    if min(s.start, s.stop) < 0 or (s.log and min(s.start, s.stop) <= 0):
        raise model.RangeError("sweep bounds must be positive")
    if s.name != "r" and min(s.start, s.stop) <= 0:
        raise model.RangeError(f"sweep over {s.name} needs bounds > 0")


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize(spec: RunSpec) -> str:
    """Flat TOML document that parses back to an equal RunSpec."""
    items: dict = {k: v for k, v in spec.base.to_dict().items() if k in PHYSICS_KEYS}
    items["mode"] = spec.mode
    if spec.sweep is not None:
        s = spec.sweep
        items.update(sweep_axis=s.name, sweep_start=s.start, sweep_stop=s.stop,
                     sweep_points=s.points, sweep_log=s.log)
    if spec.output is not None:
        items["output"] = spec.output
    items.update(seed=spec.seed, validation_level=spec.validation_level,
                 eta_points=spec.eta_points, mc_cycles=spec.mc_cycles, regime_error=spec.regime_error)
    return "".join(f"{k} = {_toml_value(v)}\n" for k, v in items.items())


# --- output formatting -----------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def sweep_header(axis: str) -> list[str]:
    return [axis] + thermo.ThermoReport.field_names()


def _json_safe(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, float) and not math.isfinite(v):
            out[k] = None
        else:
            out[k] = v
    return out


# --- orchestration -----------------------------------------------------------------


def worker_count() -> int:
    env = os.environ.get("OTTO_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _report_row(cfg: model.EngineConfig) -> dict:
    return thermo.simulate(cfg).to_dict()


def _check_regime(regimes, spec: RunSpec) -> None:
    if spec.regime_error:
        bad = [r for r in regimes if r != "engine"]
        if bad:
            raise RegimeError(f"{len(bad)} configuration(s) not in the engine regime (e.g. {bad[0]})")


def strict_check(cfg: model.EngineConfig) -> list[str]:
    """Run every debug invariant on one configuration; returns the checks performed."""
    done = []
    with qops.validation(True):
        cycle = dynamics.solve_limit_cycle(cfg)
        for name in ("rho_t0", "rho_t1", "rho_t2", "rho_t3", "rho_end"):
            qops.check_density_matrix(getattr(cycle, name), tol=1e-10)
        done.append("density matrices")
        for ch in (cycle.hot, cycle.cold):
            if np.linalg.eigvalsh(qops.choi_matrix(ch.matrix)).min() < -1e-10:
                raise qops.InvalidDensityMatrix(f"{ch.bath} isochore is not completely positive")
        done.append("complete positivity")
        for u in (cycle.u_ch.u, cycle.u_hc.u):
            if np.max(np.abs(u @ qops.dagger(u) - np.eye(2))) > 1e-12:
                raise dynamics.NoConvergence("propagator is not unitary")
        done.append("unitarity")
        if qops.trace_distance(dynamics.iterate_cycle(cfg, cycle.rho_t0, 1), cycle.rho_t0) > 1e-10:
            raise dynamics.NoLimitCycle("limit cycle is not a fixed point")
        done.append("fixed point")
        thermo.thermo_report(cycle)
        done.append("energy balance and decomposition")
        chain = stats.build_tpm_chain(cycle)
        for k in chain.kernels:
            if np.max(np.abs(k.sum(axis=0) - 1)) > 1e-12 or k.min() < 0:
                raise dynamics.NoConvergence("TPM kernel is not column-stochastic")
        done.append("stochastic kernels")
    return done


def run(spec: RunSpec, out=None) -> dict:
    """Execute a RunSpec.  Writes the artifact to ``spec.output`` (or ``out`` stream) and returns a summary."""
    if spec.validation_level == "strict":
        qops.set_validation(True)
    cfg = spec.base
    if spec.mode == "simulate":
        report = thermo.simulate(cfg)
        _check_regime([report.regime], spec)
        payload = {"config": cfg.to_dict(), "report": _json_safe(report.to_dict())}
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
        summary = {"regime": report.regime}
    elif spec.mode == "sweep":
        s = spec.sweep
        values = s.values()
        cfgs = [cfg.replace(**{s.name: float(v)}) for v in values]
        workers = min(worker_count(), len(cfgs))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_report_row, cfgs))
        else:
            rows = [_report_row(c) for c in cfgs]
        _check_regime([r["regime"] for r in rows], spec)
        header = sweep_header(s.name)
        text = to_csv(header, ([v] + [row[k] for k in header[1:]] for v, row in zip(values, rows)))
        summary = {"rows": len(rows)}
    elif spec.mode == "ldf":
        chain = stats.chain_for(cfg)
        curve = stats.ldf(chain, stats.default_eta_grid(cfg, spec.eta_points))
        text = to_csv(["eta", "j_value"], zip(curve.eta_grid, curve.j_values))
        summary = {"argmin_eta": curve.argmin_eta, "argmax_eta": curve.argmax_eta,
                   "edge_points": int(curve.at_edge.sum())}
    else:
        chain = stats.chain_for(cfg)
        hist = stats.stochastic_efficiency_histogram(chain)
        header = ["q_h", "w_tot", "probability"]
        columns = [hist.q_h, hist.w_tot, hist.probability]
        if spec.mc_cycles:
            traj = stats.sample_trajectories(chain, spec.mc_cycles, spec.seed)
            keys, probs = traj.joint_distribution()
            lookup = {(round(q, 6), round(w, 6)): p for (q, w), p in zip(keys, probs)}
            header.append("mc_probability")
            columns.append([lookup.get((round(q, 6), round(w, 6)), 0.0) for q, w in zip(hist.q_h, hist.w_tot)])
        text = to_csv(header, zip(*columns))
        summary = {"diverging_mass": hist.diverging_mass}
    if spec.output:
        with open(spec.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    elif out is not None:
        out.write(text)
    return summary


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, SchemaError):
        return EXIT_SCHEMA
    if isinstance(exc, (model.RangeError, model.OutOfRange)):
        return EXIT_RANGE
    if isinstance(exc, (dynamics.NoConvergence, dynamics.NoLimitCycle, BracketFailure,
                        thermo.DecompositionMismatch, thermo.NegativeVariance, qops.InvalidDensityMatrix)):
        return EXIT_NUMERIC
    if isinstance(exc, RegimeError):
        return EXIT_REGIME
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="otto-squeeze", description=__doc__.splitlines()[0])
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="flat TOML configuration file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (overrides the config)")
    p.add_argument("--check", action="store_true", help="run strict invariant checks on the base configuration first")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            spec = parse_config(fh.read(), mode=args.mode)
        changes = {}
        if args.out:
            changes["output"] = args.out
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.check:
            changes["validation_level"] = "strict"
        spec = replace(spec, **changes)
        if args.check:
            for item in strict_check(spec.base):
                print(f"check ok: {item}", file=sys.stderr)
        summary = run(spec, out=sys.stdout)
        print(json.dumps(summary), file=sys.stderr)
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # mapped to one exit code per error class
        code = exit_code(exc)
        if code == 1:
            raise
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
