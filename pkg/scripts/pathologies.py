"""Points and systems where the tractability conditions or the quasi-regularity theorem break down."""

from meanmedian import xpoints as xp
from meanmedian.numeric import Q, fmt
from meanmedian.orbit import iterate_until_stable
from meanmedian.systems import resolve_bundle


def main():
    B = resolve_bundle("0x1")
    p = Q(999, 1798)
    r = iterate_until_stable(B.values(p))
    att = xp.SideAnalysis(B, xp.classify_xpoint(B, p), "right").check_index(r.transit_time)
    print(f"{fmt(p)}: m={fmt(r.limit)} tau={r.transit_time} T1={att['T1']} T2={att['T2']} T3={att['T3']}")
    x, pair = att["witness"]["T2"]
    print(f"  T2 witness: Y{pair[0]} and Y{pair[1]} cross at {fmt(x)}")

    for name in ("alpha-10", "alpha-388"):
        Ba = resolve_bundle(name)
        rec = xp.classify_xpoint(Ba, Q(0))
        for side in ("right", "left"):
            t = xp.tractability(Ba, rec, side)
            print(f"{name} {side}: tractable={t.ok} index={t.index} {t.reason}")

    for p, n_max in ((Q(1913, 3452), 300), (Q(708, 1273), 800)):
        rec = xp.classify_xpoint(B, p)
        x, label, res = xp.SideAnalysis(B, rec, "right").quasi_regularity_bound(n_max)
        print(f"{fmt(p)}: bound={fmt(x) if x is not None else None} via {label} conditions={res.conditions}")


if __name__ == "__main__":
    main()
