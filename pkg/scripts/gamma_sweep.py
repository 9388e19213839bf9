"""Epsilon sweep of a shape's rescaled energies, with affine extrapolation.

    python3 scripts/gamma_sweep.py --kernel exp:lambda=1 --eps 0.125 0.0625 0.03125 0.015625
"""

import argparse

from kperimeter.gamma import extrapolate, records_to_csv, sweep
from kperimeter.grid import Box, Halfspace, unit_cube
from kperimeter.kernel import compute_constants, make_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--kernel", default="exp:lambda=1")
    ap.add_argument("--eps", type=float, nargs="+", default=[1 / 4, 1 / 8, 1 / 16, 1 / 32])
    ap.add_argument("--q", type=int, default=8)
    ap.add_argument("--omega", choices=["cube", "upper"], default="cube",
                    help="unit cube (J1 limit) or (-1/2,1/2)x(0,1) whose boundary holds the interface (J2 limit)")
    ap.add_argument("--csv")
    args = ap.parse_args()

    k = make_kernel(args.kernel, 2)
    omega = unit_cube(2) if args.omega == "cube" else Box((-0.5, 0.0), (0.5, 1.0))
    recs = sweep(Halfspace(), omega, k, args.eps, q=args.q, exterior=args.omega == "upper")
    text = records_to_csv(recs)
    print(text, end="")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    # the interface has unit length inside the cube and along the boundary of the upper box
    field = "ratio_J1" if args.omega == "cube" else "ratio_J2"
    r = extrapolate(recs, field, reference=compute_constants(k).c_K)
    print(f"{field}: limit {r.limit_estimate:.6f}  reference {r.reference:.6f}  "
          f"rel error {r.relative_error:.3%}  slope {r.slope:.4f}  rms residual {r.residual:.2e}")


if __name__ == "__main__":
    main()
