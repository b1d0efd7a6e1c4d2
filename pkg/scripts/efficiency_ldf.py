"""Large-deviation rate function of the stochastic efficiency with and without squeezing."""

import numpy as np

from otto_squeeze import model, stats, thermo

from _common import parser, save


def main():
    p = parser(__doc__, "efficiency_ldf.csv")
    p.add_argument("--tau-h", type=float, default=5.0)
    p.add_argument("--tau-dri", type=float, default=1e-3)
    p.add_argument("--points", type=int, default=400)
    args = p.parse_args()
    cfg1 = model.fig1(r=1.0, tau_h=args.tau_h, tau_dri=args.tau_dri)
    grid = stats.default_eta_grid(cfg1, args.points)
    cols = {}
    for r in (0.0, 1.0):
        cfg = cfg1.replace(r=r)
        chain = stats.chain_for(cfg)
        curve = stats.ldf(chain, grid)
        cols[r] = curve.j_values
        print(f"r={r:g}: J min at {curve.argmin_eta:.4f} (TPM efficiency {stats.tpm_efficiency(chain):.4f}), "
              f"max at {curve.argmax_eta:.4f} (eta_C_gen {thermo.generalized_carnot(cfg)[0]:.4f})")
    save(args.out, ["eta", "j_r0", "j_r1"], zip(grid, cols[0.0], cols[1.0]))


if __name__ == "__main__":
    main()
