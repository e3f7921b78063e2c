#!/usr/bin/env python3
"""Print an OTOC growth-rate fit for one initial point, straight to stdout.

Usage:
    python scripts/quick_otoc.py [--system iho|hiho] [--np N] [--point q,p]
                                 [--t-end T] [--samples N]

Handy for exploring truncation sizes and fit windows before committing a
full figure config.
"""
import argparse

import numpy as np

from otoclab.analysis import auto_window, fit_exponential
from otoclab.evolution import diagonalize, variance_otoc
from otoclab.fock import CoherentParams, FockDim, HihoParams, build_hiho, build_iho, coherent_state


def run():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--system", choices=["iho", "hiho"], default="iho")
    ap.add_argument("--np", dest="n_p", type=int, default=300)
    ap.add_argument("--point", default="0,0")
    ap.add_argument("--t-end", type=float, default=None)
    ap.add_argument("--samples", type=int, default=301)
    ap.add_argument("--gamma", type=float, default=3.0)
    ap.add_argument("--g", type=float, default=0.04)
    args = ap.parse_args()

    q, p = (float(x) for x in args.point.split(","))
    dim = FockDim(args.n_p)
    if args.system == "iho":
        prop = diagonalize(build_iho(dim))
        t_end = args.t_end if args.t_end is not None else 3.0
    else:
        prop = diagonalize(build_hiho(dim, HihoParams(args.gamma, args.g)))
        t_end = args.t_end if args.t_end is not None else 0.3
    psi0 = coherent_state(dim, CoherentParams(q, p))
    times = np.linspace(0.0, t_end, args.samples)
    series = variance_otoc(prop, psi0, times)
    window = auto_window(series, min_span=t_end / 10.0)
    fit = fit_exponential(series, window)
    print(f"system={args.system} n_p={args.n_p} point=({q}, {p})")
    print(f"fit window  [{fit.window[0]:.4f}, {fit.window[1]:.4f}]")
    print(f"growth rate {fit.rate:.6f}   r^2 {fit.r_squared:.8f}")
    print(f"C(0)={series.values[0]:.6f}  C(t_end)={series.values[-1]:.6e}")


if __name__ == "__main__":
    run()
