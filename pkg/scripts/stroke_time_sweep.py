"""Power and efficiency against the hot-stroke time at fixed squeezing.

The free precession during the hot stroke makes the coherent work oscillate
with period 2 pi / omega_h in tau_h; the oscillations die out once the
stroke is long enough to erase the coherence.
"""

import numpy as np

from otto_squeeze import model, thermo

from _common import parser, save


def main():
    p = parser(__doc__, "stroke_time_sweep.csv")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--tau-dri", type=float, default=5e-4)
    p.add_argument("--points", type=int, default=2000)
    args = p.parse_args()
    rows = []
    for tau_h in np.linspace(0.05, 2.0, args.points):
        rep = thermo.simulate(model.fig1(r=args.r, tau_h=float(tau_h), tau_dri=args.tau_dri))
        rows.append((tau_h, rep.power, rep.eta_th, rep.w_coh, rep.rel_power_fluct))
    save(args.out, ["tau_h", "power", "eta_th", "w_coh", "rel_power_fluct"], rows)


if __name__ == "__main__":
    main()
