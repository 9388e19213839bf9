"""Wavy perturbations of the flat interface against the flat one, per epsilon.

    python3 scripts/liminf_probe.py --amplitudes 0.25 1 2
"""

import argparse

from kperimeter.gamma import gamma_liminf_probe
from kperimeter.kernel import make_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--kernel", nargs="+", default=["exp:lambda=1", "gauss:sigma=1"])
    ap.add_argument("--amplitudes", type=float, nargs="+", default=[0.25, 1.0, 2.0])
    ap.add_argument("--wavelength", type=float, default=4.0, help="in units of eps")
    ap.add_argument("--eps", type=float, nargs="+", default=[1 / 8, 1 / 16, 1 / 32])
    args = ap.parse_args()
    for kid in args.kernel:
        for a in args.amplitudes:
            rep = gamma_liminf_probe(make_kernel(kid, 2), a, args.eps, wavelength=args.wavelength)
            for r in rep["runs"]:
                print(f"{kid:16s} amp {a:5.2f}  eps {r['epsilon']:.5f}  flat {r['flat']:.5f}  "
                      f"wavy {r['perturbed']:.5f}  {'ok' if r['ok'] else 'UNDERCUT'}")


if __name__ == "__main__":
    main()
