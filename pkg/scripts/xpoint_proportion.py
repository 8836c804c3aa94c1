"""Share of fractions in [1/2, 2/3] with denominator <= n that are X-points of [0, x, 1]."""

import argparse

from meanmedian.numeric import Q, fmt
from meanmedian.systems import resolve_bundle
from meanmedian.variation import xpoint_proportion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=25)
    a = ap.parse_args()
    for n, P, misses in xpoint_proportion(resolve_bundle("0x1", (Q(0), Q(1))), a.nmax):
        print(f"{n:3d}  {float(P):.5f}  {' '.join(fmt(m) for m in misses)}")


if __name__ == "__main__":
    main()
