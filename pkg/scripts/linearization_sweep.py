"""Scatter the three-wave demo, take Euler steps of a hierarchy flow and show the O(dt) residual.

    python scripts/linearization_sweep.py --k 1 --n-xi 65
"""

import argparse

import numpy as np

from darbouxlab.poisson import DiagonalGenerator
from darbouxlab.scattering import SpectralConfig, forward_scatter, linearization_check, three_wave_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--n-xi", type=int, default=65)
    ap.add_argument("--amplitude", type=float, default=0.12)
    ap.add_argument("--dts", type=float, nargs="+", default=[1e-3, 1e-4, 1e-5])
    args = ap.parse_args()

    q = three_wave_demo(args.amplitude)
    cfg = SpectralConfig(n_xi=args.n_xi)
    mu = DiagonalGenerator.centered(1j * np.linspace(1.0, -0.6, 3) ** 2)
    base = forward_scatter(q, cfg)
    print(f"int ||q|| = {q.l1_norm():.4f}, unitarity residual {base.unitarity_residual():.2e}")
    print(f"{'dt':>8} {'q_sign':>6} {'residual':>11} {'sign':>4}")
    for q_sign in (-1, 1):
        prev = None
        for dt in args.dts:
            r = linearization_check(q, mu, args.k, dt, cfg, base=base, q_sign=q_sign)
            ratio = "" if prev is None else f"  ratio {prev / r.residual:.2f}"
            print(f"{dt:8.0e} {q_sign:6d} {r.residual:11.3e} {r.sign:4d}{ratio}")
            prev = r.residual


if __name__ == "__main__":
    main()
