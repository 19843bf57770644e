"""Integrate the log I_2 flow from a seeded SU(3) point and print how well the pendulum law holds.

    python scripts/pendulum_demo.py --t 10 --steps 10000 --csv pendulum.csv
"""

import argparse

import numpy as np

from darbouxlab.io import write_csv
from darbouxlab.su3 import pendulum_flow, random_su3, turning_points
from darbouxlab.suites import pendulum_checks


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--t", type=float, default=10.0)
    ap.add_argument("--steps", type=int, default=10000)
    ap.add_argument("--csv")
    args = ap.parse_args()

    a0 = random_su3(np.random.default_rng(args.seed))
    traj = pendulum_flow(a0, args.t, steps=args.steps)
    k = traj.stiffness()[0]
    print(f"I = {np.round(traj.I[0].real, 6)}, rho = {traj.rho[0].real:.6f}, K = rho / I2^2 = {k:.6f}")
    for key, val in pendulum_checks(traj).items():
        print(f"{key:>14}: {val:.3e}")
    # literal constant 2 rho, for comparison with the fitted one
    dt = traj.times[1] - traj.times[0]
    wdd = (traj.omega_dot[2:] - traj.omega_dot[:-2]) / (2 * dt)
    lit = np.abs(wdd + 2 * traj.rho[1:-1].real * np.sin(traj.omega[1:-1])).max()
    print(f"{'2 rho law':>14}: {lit:.3e}")
    print("turning points:", np.round(turning_points(traj), 6))
    if args.csv:
        write_csv(args.csv, *traj.csv_rows())
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
