"""Exact Plateau minimizers for halfspace boundary data; counts cells off the halfspace.

    python3 scripts/flatness.py --kernel gauss:sigma=1 --resolutions 16 32 64 128
"""

import argparse
import json

from kperimeter.kernel import make_kernel
from kperimeter.plateau import flatness_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--kernel", nargs="+", default=["exp:lambda=1", "gauss:sigma=1", "ball:R=1"])
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--resolutions", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--epsilon", type=float, help="kernel scale (default: reach a quarter of the cube)")
    args = ap.parse_args()
    for kid in args.kernel:
        rep = flatness_experiment(make_kernel(kid, args.dim), args.dim, args.resolutions, args.epsilon)
        print(json.dumps(rep, indent=2))


if __name__ == "__main__":
    main()
