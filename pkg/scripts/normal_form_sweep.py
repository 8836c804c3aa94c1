"""Transit times and limits of the normal form for odd t, with the regular-phase bounds."""

import argparse
import csv
import sys

from meanmedian.normal_form import NormalFormRow, nf_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tmin", type=int, default=5)
    ap.add_argument("--tmax", type=int, default=95)
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    rows = nf_sweep(range(a.tmin | 1, a.tmax + 1, 2), workers=a.workers)
    w = csv.writer(sys.stdout)
    w.writerow(NormalFormRow.HEADER)
    for r in rows:
        w.writerow(r.csv_row())


if __name__ == "__main__":
    main()
