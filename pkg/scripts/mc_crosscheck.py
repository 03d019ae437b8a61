#!/usr/bin/env python3
"""Monte Carlo vs analytic cross-check table.

Simulates the heralding experiment at a few working points and prints
the empirical acceptance probability, mean photon number and Mandel Q
next to the closed-form values, with z-scores.

Usage:
    python scripts/mc_crosscheck.py [--shots 1000000] [--seed 0]
"""

import argparse

from quadherald import (AcceptanceWindow, DetectorModel, Squeezing,
                        acceptance_probability_imperfect, mandel_q,
                        mean_photon_number, monte_carlo_experiment)

POINTS = [
    (0.25, 0.0, 1.0, 0.0),
    (0.25, 1.0, 1.0, 0.0),
    (0.25, 2.0, 1.0, 0.0),
    (0.25, 1.0, 0.8, 0.0),
    (0.3, 1.5, 0.8, 0.2),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--shots", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    header = (f"{'lam':>5} {'x0':>4} {'eta':>4} {'nbar':>4} "
              f"{'C_emp':>9} {'z_C':>5}  {'mean_emp':>9} {'z_m':>5}  "
              f"{'Q_emp':>9} {'z_Q':>5}")
    print(header)
    print("-" * len(header))
    for lam, x0, eta, nbar in POINTS:
        s = Squeezing(lam)
        w = AcceptanceWindow.threshold(x0)
        d = DetectorModel(eta=eta, n_bar=nbar)
        r = monte_carlo_experiment(s, w, d, shots=args.shots, seed=args.seed)
        se = r.standard_errors
        c_ana = acceptance_probability_imperfect(s, w, d)
        m_ana = mean_photon_number(s, w, d)
        q_ana = mandel_q(s, w, d)
        z_c = 0.0 if se["C"] == 0 else (r.empirical_c - c_ana) / se["C"]
        z_m = (r.empirical_mean - m_ana) / se["mean"]
        z_q = (r.empirical_q - q_ana) / se["Q"]
        print(f"{lam:5.2f} {x0:4.1f} {eta:4.2f} {nbar:4.1f} "
              f"{r.empirical_c:9.6f} {z_c:5.2f}  {r.empirical_mean:9.5f} "
              f"{z_m:5.2f}  {r.empirical_q:9.5f} {z_q:5.2f}")


if __name__ == "__main__":
    main()
