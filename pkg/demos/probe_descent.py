#!/usr/bin/env python3
"""A hot probe melts its way down through cold ice.

Two bundled configurations share one mesh: a half-symmetric ice column
with a probe-shaped hole whose wall is held at the melting point, a
sliding band of elements underneath the tip, and three temperature
sensors buried 1, 3 and 5 cm from the probe wall.

* probe_equilibrium.ini couples the melt film in equilibrium form: the
  closed-form descent velocity is applied from the first step on.
* probe_temperature.ini couples in transient form: each step recovers
  the heat flux actually conducted into the ice at the tip and feeds it
  to the melt-film closure, so the probe starts from rest and works its
  way up towards the equilibrium speed.

Run:  python3 demos/probe_descent.py [--steps N] [--out DIR]
"""

import argparse
import os

import numpy as np

from ccmsim import velocity as vel
from ccmsim.driver import load_config, run

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir,
                        "fixtures")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=None,
                    help="override the configured number of steps (full run: 200)")
    ap.add_argument("--out", default="demo_out",
                    help="parent directory for run outputs (default demo_out)")
    args = ap.parse_args()

    reports = {}
    for name in ("probe_equilibrium", "probe_temperature"):
        cfg = load_config(os.path.join(FIXTURES, f"{name}.ini"))
        if args.steps:
            cfg.n_steps = args.steps
        cfg.out_dir = os.path.join(args.out, name)
        u_eq = vel.u_eq_temperature(cfg.ccm_params, cfg.T_w)
        print(f"=== {name}: {cfg.n_steps} steps of {cfg.dt:g} s "
              f"({cfg.n_steps * cfg.dt:g} s of melting) ===")
        report = run(cfg)
        reports[name] = (cfg, report, u_eq)
        recs = report.records
        print("      t [s]   U [m/s]      depth [m]   band recyclings")
        for rec in recs[:: max(1, len(recs) // 8)]:
            print(f"  {rec.t:9.0f}   {rec.U:.4e}   {rec.displacement:9.4f}   "
                  f"{rec.slip_count:5d}")
        s = report.summary
        print(f"  final: displacement {s.final_displacement:.4f} m, mean U "
              f"(last 10%) {s.mean_velocity_last_10pct:.4e} m/s "
              f"({s.mean_velocity_last_10pct / u_eq:.1%} of the closed-form "
              f"equilibrium {u_eq:.4e})")
        print(f"  outputs in {cfg.out_dir}")
        print()

    _, rep_tr, u_eq = reports["probe_temperature"]
    print("The transient run plateaus a few percent below the closed form:")
    print("the recovered tip flux on this deliberately coarse staircase tip")
    print("carries re-entrant corner singularities, and length-weighted")
    print("averaging over the tip window leaves a small positive flux bias")
    print("that the closure converts into a slightly lower speed.  Honest")
    print("coarse-mesh behavior -- refine the tip to shrink it.")
    print()

    if rep_tr.sensor_values.size:
        peaks = np.nanmax(rep_tr.sensor_values, axis=0)
        t_pk = rep_tr.sensor_times[np.nanargmax(rep_tr.sensor_values, axis=0)]
        print("Sensor response (transient run):")
        for k, (d_cm, pk, tp) in enumerate(zip((1, 3, 5), peaks, t_pk)):
            print(f"  {d_cm} cm from the wall: peak {pk:6.1f} K at t = {tp:5.0f} s")
        print("Closer runs hotter, and every trace climbs quickly as the tip")
        print("passes but cools slowly afterwards -- the classic asymmetric")
        print("thermal wake of a moving heat source.")

    if plt is not None:
        os.makedirs(args.out, exist_ok=True)
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        for name, (cfg, report, u_eq) in reports.items():
            t = [r.t for r in report.records]
            ax1.plot(t, [r.U / u_eq for r in report.records],
                     label=name.split("_")[1])
        ax1.axhline(1.0, color="k", lw=0.6, ls=":")
        ax1.set_xlabel("t [s]")
        ax1.set_ylabel("U / U_eq")
        ax1.legend(title="coupling")
        cfg, report, _ = reports["probe_temperature"]
        for k, d_cm in enumerate((1, 3, 5)):
            ax2.plot(report.sensor_times, report.sensor_values[:, k],
                     label=f"{d_cm} cm")
        ax2.set_xlabel("t [s]")
        ax2.set_ylabel("sensor temperature [K]")
        ax2.legend()
        fig.tight_layout()
        path = os.path.join(args.out, "probe_descent.png")
        fig.savefig(path, dpi=130)
        print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
