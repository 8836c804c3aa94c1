"""Rank-one pipeline on the left of 2/3 in [0, x, 1]: auxiliary sequence, stabilised line, limit branches."""

from meanmedian import xpoints as xp
from meanmedian.numeric import Q, fmt
from meanmedian.systems import resolve_bundle


def main():
    B = resolve_bundle("0x1", (Q(1, 2), Q(3, 4)))
    rec = xp.classify_xpoint(B, Q(2, 3))
    print(f"tau={rec.tau} m={fmt(rec.m_at_p)}")
    sa = xp.SideAnalysis(B, rec, "left")
    sa.tractability(index=9)
    res = sa.rank1_analysis(300)
    seq = sa.sequence
    print(f"{len(seq.distinct_xpoints)} distinct terms, {fmt(seq.distinct_xpoints[0])} .. {fmt(seq.distinct_xpoints[-1])}")
    print("transit times", seq.transit_times)
    print("Y* =", " x + ".join(fmt(v) for v in res.y_star))
    for lo, hi, s, c in res.branches:
        print(f"  [{fmt(lo)}, {fmt(hi)}]  {fmt(s)} x + {fmt(c)}")


if __name__ == "__main__":
    main()
