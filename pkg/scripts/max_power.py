"""Efficiency at maximum power over omega_h in a high-temperature surrogate.

Full thermalization, adiabatic drive, beta_h omega_h <= 0.05.  The scan over
the cold/hot temperature ratio compares the optimum with 1 - sqrt(b) and with
(1 - b)/(1 + b), b = beta_h_eff / beta_c.
"""

import math

import numpy as np

from otto_squeeze import model, thermo
from otto_squeeze.minimize import golden_section

from _common import parser, save


def eta_at_max_power(r: float, ratio: float, beta_omega_max: float = 0.05) -> tuple[float, float]:
    wc = model.FIG1["omega_c"]
    w_max = wc * (1 + ratio)
    beta_h = beta_omega_max / w_max
    beta_c = ratio * beta_h

    def neg_power(wh):
        cfg = model.EngineConfig(omega_c=wc, omega_h=wh, beta_c=beta_c, beta_h=beta_h, tau_dri=0.05,
                                 tau_h=30.0, tau_c=30.0, gamma_h=3.0, gamma_c=3.0, r=r)
        return -thermo.simulate(cfg).power

    best = golden_section(neg_power, wc * (1 + 1e-3), w_max, 1e-7 * wc)
    return 1 - wc / best.x, beta_h / math.cosh(2 * r) / beta_c


def main():
    p = parser(__doc__, "max_power.csv")
    args = p.parse_args()
    rows = []
    for r in (0.0, 0.3):
        for ratio in (1.1, 1.5, 2.0, 3.0, 4.5, 8.0):
            eta, b = eta_at_max_power(r, ratio)
            rows.append((r, ratio, eta, 1 - math.sqrt(b), (1 - b) / (1 + b)))
            print(f"r={r:g} beta_c/beta_h={ratio:g}: eta*={eta:.4f}  1-sqrt(b)={1 - math.sqrt(b):.4f}  "
                  f"(1-b)/(1+b)={(1 - b) / (1 + b):.4f}")
    save(args.out, ["r", "beta_ratio", "eta_max_power", "one_minus_sqrt_b", "one_minus_b_over_one_plus_b"], rows)


if __name__ == "__main__":
    main()
