"""Locality defect (1/eps) L_eps(E, F) for separated squares and for a split cube.

    python3 scripts/locality.py --kernel exp:lambda=1 --h 0.00390625
"""

import argparse

from kperimeter.functional import locality_defect
from kperimeter.grid import Box, GridSpec, Halfspace, classical_perimeter, make_shape, unit_cube
from kperimeter.kernel import c_prime, make_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--kernel", default="exp:lambda=1")
    ap.add_argument("--gap", type=float, default=0.25)
    ap.add_argument("--h", type=float, default=1 / 256)
    ap.add_argument("--eps", type=float, nargs="+", default=[1 / 4, 1 / 8, 1 / 16, 1 / 32])
    args = ap.parse_args()
    k = make_kernel(args.kernel, 2)

    g = GridSpec.covering([0, 0], [1 + args.gap, 0.5], args.h)
    E = make_shape(Box((0.0, 0.0), (0.5, 0.5)), g)
    F = make_shape(Box((0.5 + args.gap, 0.0), (1.0 + args.gap, 0.5)), g)
    print(f"separated squares, gap {args.gap}")
    for r in locality_defect(E, F, k, args.eps):
        print(f"  eps {r['epsilon']:.6f}  value {r['value']:.6e}")

    g = GridSpec.covering([-0.5, -0.5], [0.5, 0.5], args.h)
    box = unit_cube(2)
    H, B = make_shape(Halfspace(), g), make_shape(box, g)
    bound = 0.5 * c_prime(k) * classical_perimeter(Halfspace(), box)
    print(f"cube split by a flat interface, bound c'_K/2 * Per = {bound:.6f}")
    for r in locality_defect(H & B, ~H & B, k, args.eps):
        print(f"  eps {r['epsilon']:.6f}  value {r['value']:.6f}  ratio to bound {r['value'] / bound:.4f}")


if __name__ == "__main__":
    main()
