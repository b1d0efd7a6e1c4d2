"""Averages, coherence diagnostics and power fluctuations against the squeezing parameter."""

import numpy as np

from otto_squeeze import model, thermo

from _common import parser, save

COLUMNS = ["r", "eta_th", "eta_otto", "eta_c_gen", "power", "rel_power_fluct",
           "coherence_t2", "kl_t2", "w_trls", "w_fri", "w_coh"]


def main():
    p = parser(__doc__, "squeezing_sweep.csv")
    p.add_argument("--tau-h", type=float, default=0.2)
    p.add_argument("--tau-dri", type=float, default=5e-4)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--hot-model", default="secular", choices=model.HOT_MODELS)
    args = p.parse_args()
    rows = []
    for r in np.linspace(0, 1, args.points):
        rep = thermo.simulate(model.fig1(r=float(r), tau_h=args.tau_h, tau_dri=args.tau_dri,
                                         hot_model=args.hot_model)).to_dict()
        rows.append([r] + [rep[c] for c in COLUMNS[1:]])
    save(args.out, COLUMNS, rows)


if __name__ == "__main__":
    main()
