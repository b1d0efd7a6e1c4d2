"""Side-by-side diagnostics of the three hot-bath generators.

For each model: hot steady-state population temperature vs beta_h_eff, the
number of Otto-limit violations on the standard grid, and the direction of
the coherence and efficiency trends in r.
"""

import math

import numpy as np

from otto_squeeze import dynamics, model, thermo

from _common import parser, save


def main():
    p = parser(__doc__, "compare_hot_models.csv")
    args = p.parse_args()
    rows = []
    rs = np.linspace(0, 1, 11)
    for m in model.HOT_MODELS:
        cfg1 = model.fig1(r=1.0, hot_model=m)
        p_e = dynamics.isochore_channel(cfg1, "hot").steady_state()[0, 0].real
        beta_pop = math.log((1 - p_e) / p_e) / cfg1.omega_h
        reps = [thermo.simulate(model.fig1(r=float(r), hot_model=m)) for r in rs]
        c = np.array([x.coherence_t2 for x in reps])
        eta = np.array([x.eta_th for x in reps])
        violations = 0
        for r in np.linspace(0, 1, 6):
            for tau_h in np.geomspace(0.1, 5, 6):
                for tau_dri in np.geomspace(1e-4, 1e-2, 6):
                    rep = thermo.simulate(model.fig1(r=float(r), tau_h=float(tau_h), tau_dri=float(tau_dri), hot_model=m))
                    violations += rep.regime == "engine" and rep.eta_th > rep.eta_otto
        rows.append((m, beta_pop, thermo.generalized_carnot(cfg1)[1], violations,
                     bool(np.all(np.diff(c) <= 1e-12)), bool(np.all(np.diff(eta) >= -1e-12))))
        print(rows[-1])
    save(args.out, ["hot_model", "beta_from_populations_r1", "beta_h_eff_r1", "otto_violations",
                    "coherence_nonincreasing", "eta_nondecreasing"], rows)


if __name__ == "__main__":
    main()
