"""Command-line front end. Exit codes: 0 success, 1 incomplete within caps, 2 usage error."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from .numeric import Q, fmt, parse_rational

EXIT_OK, EXIT_INCOMPLETE, EXIT_USAGE = 0, 1, 2
WORKERS_ENV = "MEANMEDIAN_WORKERS"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    interval: Optional[tuple] = None
    cap: Optional[int] = None      # None: each command's own default
    output_path: Optional[str] = None
    output_format: str = "csv"
    parallelism: int = 1
    long_run: bool = False
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cap is not None and self.cap < 1:
            raise UsageError("caps must be positive")
        if self.parallelism < 1:
            raise UsageError("parallelism must be at least 1")
        if self.interval is not None and not self.interval[0] < self.interval[1]:
            raise UsageError("interval needs lo < hi")
        if self.output_format not in ("csv", "json"):
            raise UsageError("format is csv or json")

    def echo(self) -> dict:
        d = asdict(self)
        if self.interval is not None:
            d["interval"] = [fmt(v) for v in self.interval]
        return d


@dataclass
class Outcome:
    """What a command produced: tabular rows and/or a JSON document, plus completeness."""
    header: Optional[list] = None
    rows: list = field(default_factory=list)
    doc: Optional[dict] = None
    complete: bool = True
    warnings: list = field(default_factory=list)
    stages: dict = field(default_factory=dict)


# argument helpers

def _rational(s):
    try:
        return parse_rational(s)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _interval(s):
    parts = s.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("interval is 'lo,hi'")
    return tuple(_rational(p) for p in parts)


def _int_range(s):
    """'a:b' inclusive, or a comma list."""
    try:
        if ":" in s:
            a, b = s.split(":")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {s!r}")


def _bundle(spec, interval):
    from .systems import resolve_bundle
    try:
        return resolve_bundle(spec, interval)
    except ValueError as e:
        raise UsageError(str(e))


# commands

def cmd_orbit(cfg, a) -> Outcome:
    from .orbit import MAX_STEPS, iterate_until_stable
    xs = [_rational(v) for v in a.set.split(",")]
    cap = cfg.cap or MAX_STEPS
    r = iterate_until_stable(xs, cap, keep_history=a.history)
    doc = {"set": [fmt(v) for v in xs], "limit": None if r.limit is None else fmt(r.limit),
           "tau": r.transit_time, "steps": r.steps_taken}
    out = Outcome(["limit", "tau", "steps"], [[doc["limit"] or "", r.transit_time or "", r.steps_taken]], doc,
                  complete=r.stabilized)
    if a.history:
        doc["history"] = [fmt(v) for v in r.history]
        out.header = ["n", "x_n", "median_n"]
        n0 = len(xs)
        out.rows = [[n0 + 1 + k, fmt(v), fmt(r.median_history[k + 1])] for k, v in enumerate(r.history)]
    if not r.stabilized:
        out.warnings.append(f"cap {cap} exceeded")
    return out


def cmd_limit(cfg, a) -> Outcome:
    from .dynamics import limit_function
    B = _bundle(a.bundle, cfg.interval)
    sm = limit_function(B, None, a.nmax)
    rows = sm.rows()
    doc = {"atoms": [dict(zip(["lo", "hi", "slope", "intercept", "tau"], r)) for r in rows],
           "fully_resolved": sm.fully_resolved, "steps": sm.steps}
    out = Outcome(["lo", "hi", "slope", "intercept", "tau"], rows, doc, complete=sm.fully_resolved)
    if not sm.fully_resolved:
        out.warnings.append(f"{len(sm.unresolved)} atoms unresolved after {a.nmax} functions")
    return out


def cmd_bundle_run(cfg, a) -> Outcome:
    from .dynamics import iterate_bundle
    B = _bundle(a.bundle, cfg.interval)
    o = iterate_bundle(B, a.n, stop_when_stable=False)
    rows = []
    for k, f in enumerate(o.functions, 1):
        for i, (s, c) in enumerate(zip(f.slopes, f.intercepts)):
            rows.append([k, fmt(f.breaks[i]), fmt(f.breaks[i + 1]), fmt(s), fmt(c)])
    doc = {"functions": [f.to_dict() for f in o.functions], "stable_from": o.stable_from}
    return Outcome(["k", "lo", "hi", "slope", "intercept"], rows, doc)


def cmd_xpoint(cfg, a) -> Outcome:
    from . import xpoints as xp
    B = _bundle(a.bundle, cfg.interval)
    cap = cfg.cap or xp.ORBIT_CAP
    rec = xp.classify_xpoint(B, a.p, cap=cap)
    doc = {"record": rec.to_dict()}
    out = Outcome(doc=doc, complete=rec.stabilising)
    sides = [a.side] if a.side else list(xp.SIDES)
    for s in sides:
        try:
            sa = xp.SideAnalysis(B, rec, s, cap)
            if a.index:
                sa.tractability(index=a.index)
        except xp.PreconditionError as e:
            doc[s] = {"error": str(e)}
            out.warnings.append(f"{s}: {e}")
            continue
        for what in a.analysis:
            key = f"{what}:{s}"
            try:
                if what == "tractability":
                    doc[key] = (sa.tract or sa.tractability()).to_dict()
                elif what == "sequence":
                    doc[key] = sa.auxiliary_sequence(a.nmax).to_dict()
                elif what == "dichotomy":
                    doc[key] = sa.resolve_dichotomy(a.probe).to_dict()
                elif what == "rank1":
                    doc[key] = sa.rank1_analysis(a.nmax).to_dict()
                elif what == "neighborhood":
                    x, label, _ = sa.quasi_regularity_bound(a.nmax)
                    doc[key] = {"end": None if x is None else fmt(x), "case": label}
            except xp.PreconditionError as e:
                doc[key] = {"error": str(e)}
                out.warnings.append(f"{key}: {e}")
    if "symmetry" in a.analysis:
        try:
            doc["symmetry"] = xp.xpoint_symmetry(rec).to_dict()
        except (xp.PreconditionError, ValueError) as e:
            doc["symmetry"] = {"error": str(e)}
    out.header = ["key", "value"]
    out.rows = [[k, json.dumps(v, sort_keys=True)] for k, v in doc.items()]
    return out


def cmd_census(cfg, a) -> Outcome:
    from .xpoints import ORBIT_CAP, census
    B = _bundle(a.bundle, cfg.interval)
    c = census(B, a.tmax, cap=cfg.cap or ORBIT_CAP)
    sets = {str(t): [fmt(p) for p in ps] for t, ps in sorted(c.sets.items())}
    doc = {"t_max": a.tmax, "sets": sets, "counts": {str(t): n for t, n in c.counts().items()},
           "skipped": [[fmt(p), why] for p, why in c.skipped]}
    rows = [[t, fmt(p)] for t, ps in sorted(c.sets.items()) for p in ps]
    out = Outcome(["t", "p"], rows, doc, complete=not c.skipped)
    if c.skipped:
        out.warnings.append(f"{len(c.skipped)} candidates skipped (cap exceeded)")
    return out


def cmd_normal_form(cfg, a) -> Outcome:
    from .normal_form import NF_CAP, nf_regular_phase, nf_run, regular_phase_end
    if a.t < 5 or a.t % 2 == 0:
        raise UsageError("order must be odd and at least 5")
    N = regular_phase_end(a.t)
    cap = cfg.cap or NF_CAP
    o = nf_run(a.t, cap, min_length=N + 3 - a.t, check_core=False)
    rep = nf_regular_phase(a.t, o)
    doc = {"t": a.t, "m_t": None if o.m_t is None else fmt(o.m_t), "tau_t": o.tau_t,
           "regular_phase": rep.to_dict()}
    if a.dump_orbit:
        out = Outcome(["n", "y_n", "median_n"], [list(r) for r in o.rows()], doc)
    else:
        out = Outcome(["t", "m_t", "tau_t", "L_t", "N_t", "m_lower", "tau_lower"],
                      [[a.t, doc["m_t"] or "", o.tau_t or "", rep.L_t, rep.N_t,
                        fmt(rep.lower_bound_m), rep.lower_bound_tau]], doc)
    out.complete = o.stabilized
    if not o.stabilized:
        out.warnings.append(f"order {a.t} did not stabilise within {cap} steps")
    return out


def cmd_nf_sweep(cfg, a) -> Outcome:
    from .normal_form import NF_CAP, NormalFormRow, nf_sweep
    hi = a.tmax if (a.tmax <= 95 or cfg.long_run) else 95
    orders = [t for t in range(a.tmin, hi + 1) if t % 2 and t >= 5]
    rows = nf_sweep(orders, cfg.cap or NF_CAP, cfg.parallelism)
    out = Outcome(list(NormalFormRow.HEADER), [r.csv_row() for r in rows])
    out.doc = {"rows": [dict(zip(NormalFormRow.HEADER, map(str, r.csv_row()))) for r in rows]}
    if hi < a.tmax:
        out.warnings.append("orders above 95 need --long-run")
    missing = [r.t for r in rows if r.tau_t is None]
    if missing:
        out.complete = False
        out.warnings.append(f"not stabilised: {missing}")
    return out


def cmd_variation(cfg, a) -> Outcome:
    from .variation import POINT_CAP, LimitCache, variation_series
    B = _bundle(a.bundle, cfg.interval)
    params = a.range or (list(range(3, 301)) if a.kind == "farey" else list(range(3, 13)))
    limit = 2000 if a.kind == "farey" else 14
    if max(params) > (300 if a.kind == "farey" else 12) and not cfg.long_run:
        raise UsageError("full-scale sweeps need --long-run")
    if max(params) > limit:
        raise UsageError(f"parameter above {limit}")
    cache = LimitCache(a.cache) if a.cache else None
    s = variation_series(B, a.kind, params, cfg.cap or POINT_CAP, cache, cfg.parallelism)
    out = Outcome(["q_or_i", "partition_size", "V_num", "V_den", "coverage_pct"],
                  [e.csv_row() for e in s.entries], s.to_dict())
    if any(e.unresolved for e in s.entries):
        out.warnings.append("some points unresolved; see coverage_pct")
    return out


def cmd_proportion(cfg, a) -> Outcome:
    from .systems import resolve_bundle
    from .variation import POINT_CAP, xpoint_proportion
    B = resolve_bundle("0x1", (Q(0), Q(1)))
    rows = xpoint_proportion(B, a.nmax, cfg.cap or POINT_CAP)
    table = [[n, fmt(P), f"{float(P):.5f}", " ".join(fmt(x) for x in miss)] for n, P, miss in rows]
    return Outcome(["n", "P_n", "P_n_decimal", "non_xpoints"], table,
                   {"rows": [dict(zip(["n", "P_n", "decimal", "non_xpoints"], r)) for r in table]})


def cmd_report(cfg, a) -> Outcome:
    """Regenerate the datasets behind each acceptance criterion into one directory."""
    outdir = cfg.output_path or "report"
    os.makedirs(outdir, exist_ok=True)
    jobs = [
        ("c1_limit_0x11", ["limit", "--bundle", "0x11", "--nmax", "300"]),
        ("c1_orbit_probe", ["orbit", "--set", "0,1/10000,1,1"]),
        ("c4_nf_sweep", ["nf-sweep", "--tmin", "5", "--tmax", "95"]),
        ("c5_nf_55", ["normal-form", "--t", "55", "--dump-orbit"]),
        ("c6_census", ["census", "--tmax", str(a.tmax), "--format", "json"]),
        ("c7_rank1_2_3", ["xpoint", "--bundle", "0x1", "--interval", "1/2,3/4", "--p", "2/3", "--side", "left",
                          "--index", "9", "--analysis", "sequence", "rank1", "--format", "json"]),
        ("c9_proportion", ["proportion", "--nmax", "19"]),
        ("c10_farey", ["variation", "--kind", "farey", "--format", "json"]),
        ("c10_dyadic", ["variation", "--kind", "dyadic", "--format", "json"]),
    ]
    stages = {}
    complete = True
    for name, argv in jobs:
        ext = "json" if "json" in argv else "csv"
        t0 = time.perf_counter()
        code = main(argv + ["--output", os.path.join(outdir, f"{name}.{ext}"), "--no-manifest"])
        stages[name] = {"seconds": round(time.perf_counter() - t0, 3), "exit": code}
        complete = complete and code == EXIT_OK
    return Outcome(["stage", "seconds", "exit"], [[k, v["seconds"], v["exit"]] for k, v in stages.items()],
                   {"stages": stages}, complete=complete, stages=stages)


COMMANDS = {
    "orbit": cmd_orbit, "limit": cmd_limit, "bundle-run": cmd_bundle_run, "xpoint": cmd_xpoint,
    "census": cmd_census, "normal-form": cmd_normal_form, "nf-sweep": cmd_nf_sweep,
    "variation": cmd_variation, "proportion": cmd_proportion, "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--interval", type=_interval, help="lo,hi as exact rationals")
    common.add_argument("--cap", type=int, default=None, help="iteration cap (command default if omitted)")
    common.add_argument("--output", help="write the artifact here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=None, help=f"parallel workers (env {WORKERS_ENV})")
    common.add_argument("--long-run", action="store_true", help="allow full-scale sweeps")
    common.add_argument("--no-manifest", action="store_true", help=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="mmm", description="Exact mean-median map computations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("orbit", parents=[common], help="scalar orbit of a rational multiset")
    s.add_argument("--set", required=True, help="comma-separated rationals, e.g. 0,1/10000,1,1")
    s.add_argument("--history", action="store_true")

    s = sub.add_parser("limit", parents=[common], help="limit and transit-time map of a bundle")
    s.add_argument("--bundle", required=True, help="named system or comma-separated affine expressions")
    s.add_argument("--nmax", type=int, default=300)

    s = sub.add_parser("bundle-run", parents=[common], help="dump the functional orbit")
    s.add_argument("--bundle", required=True)
    s.add_argument("--n", type=int, default=10)

    s = sub.add_parser("xpoint", parents=[common], help="classify and analyse one X-point")
    s.add_argument("--bundle", required=True)
    s.add_argument("--p", type=_rational, required=True)
    s.add_argument("--side", choices=("left", "right"))
    s.add_argument("--index", type=int, help="fixed tractability index")
    s.add_argument("--analysis", nargs="*", default=[],
                   choices=("tractability", "sequence", "dichotomy", "rank1", "neighborhood", "symmetry"))
    s.add_argument("--probe", type=_rational)
    s.add_argument("--nmax", type=int, default=300)

    s = sub.add_parser("census", parents=[common], help="active X-points by transit time")
    s.add_argument("--bundle", default="0x1")
    s.add_argument("--tmax", type=int, required=True)

    s = sub.add_parser("normal-form", parents=[common], help="one normal-form orbit")
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--dump-orbit", action="store_true")

    s = sub.add_parser("nf-sweep", parents=[common], help="normal-form summaries over odd orders")
    s.add_argument("--tmin", type=int, default=5)
    s.add_argument("--tmax", type=int, default=95)

    s = sub.add_parser("variation", parents=[common], help="variation over Farey or dyadic partitions")
    s.add_argument("--bundle", default="0x1")
    s.add_argument("--kind", choices=("farey", "dyadic"), default="farey")
    s.add_argument("--range", type=_int_range, help="q or i values, 'a:b' or a list")
    s.add_argument("--cache", help="evaluation cache file")

    s = sub.add_parser("proportion", parents=[common], help="proportion of X-points by denominator")
    s.add_argument("--nmax", type=int, default=19)

    s = sub.add_parser("report", parents=[common], help="regenerate every acceptance dataset")
    s.add_argument("--tmax", type=int, default=13)
    return p


def _render(out: Outcome, fmt_: str) -> str:
    if fmt_ == "json" or out.header is None:
        return json.dumps(out.doc if out.doc is not None else {"rows": out.rows}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(out.header)
    w.writerows(out.rows)
    return buf.getvalue()


def _versions() -> dict:
    from importlib.metadata import PackageNotFoundError, version
    out = {}
    for lib in ("gmpy2", "numpy"):
        try:
            out[lib] = version(lib)
        except PackageNotFoundError:
            out[lib] = None
    return out


def run_command(cfg: RunConfig, args) -> int:
    t0 = time.perf_counter()
    out = COMMANDS[cfg.command](cfg, args)
    wall = time.perf_counter() - t0
    text = _render(out, cfg.output_format)
    if cfg.output_path and cfg.command != "report":
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for w in out.warnings:
        print(f"warning: {w}", file=sys.stderr)
    code = EXIT_OK if out.complete else EXIT_INCOMPLETE
    if cfg.output_path and not args.no_manifest:
        base = cfg.output_path if cfg.command != "report" else os.path.join(cfg.output_path, "report")
        manifest = {"version": __version__, "python": platform.python_version(), "libraries": _versions(),
                    "config": cfg.echo(), "wall_clock_seconds": round(wall, 3),
                    "stages": out.stages or {cfg.command: {"seconds": round(wall, 3)}}, "warnings": out.warnings,
                    "exit": code}
        with open(base + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    workers = args.workers if args.workers is not None else int(os.environ.get(WORKERS_ENV, "1") or 1)
    try:
        opts = {k: v for k, v in vars(args).items()
                if k not in ("command", "interval", "cap", "output", "format", "workers", "long_run")}
        cfg = RunConfig(args.command, args.interval, args.cap, args.output, args.format, workers,
                        args.long_run, {k: str(v) for k, v in opts.items()})
        return run_command(cfg, args)
    except (UsageError, argparse.ArgumentTypeError, ValueError) as e:
        # ValueError here means inputs the library rejected (bad set, degenerate bundle, ...)
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
