"""Regenerate the bundled three-wave demo potential (src/darbouxlab/data/three_wave_demo.json)."""

import argparse
from pathlib import Path

from darbouxlab.io import write_json
from darbouxlab.scattering import three_wave_demo

DEFAULT = Path(__file__).resolve().parents[1] / "src" / "darbouxlab" / "data" / "three_wave_demo.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitude", type=float, default=0.12)
    ap.add_argument("--L", type=float, default=12.0)
    ap.add_argument("--h", type=float, default=1 / 64)
    ap.add_argument("--out", type=Path, default=DEFAULT)
    args = ap.parse_args()
    q = three_wave_demo(args.amplitude, args.L, args.h)
    write_json(args.out, q.to_json())
    print(f"wrote {args.out}: {len(q.values)} nodes, int ||q|| = {q.l1_norm():.4f}, tail = {q.tail():.1e}")


if __name__ == "__main__":
    main()
