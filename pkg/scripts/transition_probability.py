"""Level-flip probability xi against drive time, including the sudden limit."""

import numpy as np

from otto_squeeze import dynamics, model

from _common import parser, save


def xi(tau_dri: float) -> float:
    cfg = model.fig1(tau_dri=tau_dri)
    u = dynamics.build_propagator(cfg, "compression")
    return dynamics.transition_probability(u, model.cold_basis(cfg), model.hot_basis(cfg))


def main():
    p = parser(__doc__, "transition_probability.csv")
    p.add_argument("--points", type=int, default=400)
    args = p.parse_args()
    taus = np.geomspace(1e-4, 1e-2, args.points)
    rows = [(t, xi(t)) for t in taus]
    save(args.out, ["tau_dri", "xi"], rows)
    sudden = 1e-7 * 2 * np.pi / model.FIG1["omega_h"]
    print(f"sudden limit: xi({sudden:.2e}) = {xi(sudden):.6f}")


if __name__ == "__main__":
    main()
