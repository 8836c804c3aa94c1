"""Variation of the [0, x, 1] limit function over Farey and dyadic partitions, and the fitted slopes."""

import argparse

from meanmedian.systems import resolve_bundle
from meanmedian.variation import LimitCache, variation_series


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qmax", type=int, default=300)
    ap.add_argument("--imax", type=int, default=12)
    ap.add_argument("--cache", help="file of already computed limits")
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    B = resolve_bundle("0x1")
    cache = LimitCache(a.cache) if a.cache else None
    for kind, params in (("farey", range(3, a.qmax + 1)), ("dyadic", range(3, a.imax + 1))):
        s = variation_series(B, kind, list(params), cache=cache, workers=a.workers)
        last = s.entries[-1]
        print(f"{kind}: alpha={s.alpha:.4f} dimension={s.dimension_estimate:.4f} fit={s.fit_range} "
              f"V({last.param})={float(last.V):.3f} min coverage={min(e.coverage for e in s.entries):.1f}%")


if __name__ == "__main__":
    main()
