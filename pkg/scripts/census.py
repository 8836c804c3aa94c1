"""Active X-points of [0, x, 1] in [1/2, 2/3] grouped by transit time, with a symmetry check for each."""

import argparse
import time

from meanmedian import xpoints as xp
from meanmedian.numeric import fmt
from meanmedian.systems import resolve_bundle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tmax", type=int, default=19)
    ap.add_argument("--list", action="store_true", help="print every member")
    a = ap.parse_args()
    t0 = time.time()
    c = xp.census(resolve_bundle("0x1"), a.tmax)
    for t, ps in sorted(c.sets.items()):
        print(f"t={t:3d}  count={len(ps)}")
        if a.list:
            for p in ps:
                rec = c.records[p]
                inv = xp.xpoint_symmetry(rec).mu.is_involution() if rec.regular else None
                print(f"    {fmt(p):>12}  m={fmt(rec.m_at_p)}  regular={rec.regular}  involution={inv}")
    if c.skipped:
        print(f"skipped {len(c.skipped)}: " + ", ".join(f"{fmt(p)} ({why})" for p, why in c.skipped))
    print(f"{time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
