"""Command-line front end.

Subcommands: ode, simulate, figures, oracle, tuza, concentration.  Every run
is deterministic given its full argument list (including --seed); batch
samples split the seed stream by sample index.  TRIPACK_JOBS overrides
--jobs.  All outputs are UTF-8, CSV uses '.' decimals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import concentration as conc
from . import ode, oracle, processes
from .graph import complete_graph, gnm_graph, load_edge_list

_PROCESS_ALIASES = {
    "k11s": processes.KIND_K11S,
    "triangle-only": processes.KIND_TRIANGLE_ONLY,
    "triangle_only": processes.KIND_TRIANGLE_ONLY,
    "tf": processes.KIND_TRIANGLE_FREE,
    "triangle-free": processes.KIND_TRIANGLE_FREE,
    "rtf": processes.KIND_REVERSE_TF,
    "reverse-triangle-free": processes.KIND_REVERSE_TF,
    "rtr": processes.KIND_RTR,
    "random-triangle-removal": processes.KIND_RTR,
}


def _jobs(args) -> int:
    env = os.environ.get("TRIPACK_JOBS", "").strip()
    if env:
        return max(1, int(env))
    if args.jobs is not None:
        return max(1, args.jobs)
    return os.cpu_count() or 1


def _outdir(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit(obj: dict) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_ode(args) -> int:
    out = _outdir(args.out)
    consts = ode.constants()
    if out is not None:
        ode.write_curve_csv(out / "curves.csv", args.t_max, args.grid, step=args.step)
        (out / "constants.json").write_text(json.dumps(consts, indent=2, sort_keys=True), encoding="utf-8")
    _emit(consts)
    return 0


def cmd_figures(args) -> int:
    out = _outdir(args.out) or Path(".")
    cols = ode.curve_grid(args.c_max, args.grid)
    ts = cols["t"]

    def write(name, header, rows):
        with open(out / name, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")

    nz = [k for k in range(len(ts)) if ts[k] >= 0.01]
    write("figure2a.csv", "c,l_nu", [(ts[k], cols["l_nu"][k]) for k in range(len(ts))])
    write("figure2b.csv", "c,u_tau", [(ts[k], cols["u_tau"][k]) for k in range(len(ts))])
    write("figure2c.csv", "c,ratio",
          [(ts[k], cols["u_tau"][k] / cols["l_nu"][k]) for k in nz])
    write("figure3a.csv", "c,l_nu,l_nu_star",
          [(ts[k], cols["l_nu"][k], cols["l_nu_star"][k]) for k in range(len(ts))])
    write("figure3b.csv", "c,ratio",
          [(ts[k], cols["u_tau"][k] / cols["l_nu_star"][k]) for k in nz])
    _emit({"written": sorted(p.name for p in out.glob("figure*.csv")), "dir": str(out)})
    return 0


def _start_graph(args):
    if args.kn is not None:
        return complete_graph(args.kn)
    if args.input is not None:
        return load_edge_list(args.input)
    if args.n is not None and (args.m is not None or args.c is not None):
        m = args.m if args.m is not None else int(args.c * args.n**1.5)
        return gnm_graph(args.n, m, args.seed)
    raise SystemExit("removal processes need --kn, --input, or --n with --m/--c")


def cmd_simulate(args) -> int:
    kind = _PROCESS_ALIASES.get(args.process)
    if kind is None:
        raise SystemExit(f"unknown process {args.process!r}")
    if args.m is not None and args.c is not None:
        raise SystemExit("--m and --c are mutually exclusive")
    out = _outdir(args.out)
    jobs = _jobs(args)
    if kind in (processes.KIND_REVERSE_TF, processes.KIND_RTR):
        start = _start_graph(args)
        traces = processes.run_many(kind, samples=args.samples, seed=args.seed,
                                    checkpoint_count=args.checkpoints, start=start, jobs=jobs)
    else:
        if args.n is None or (args.m is None and args.c is None):
            raise SystemExit(f"{args.process} needs --n and one of --m/--c")
        traces = processes.run_many(kind, n=args.n, c=args.c, m=args.m,
                                    samples=args.samples, seed=args.seed,
                                    checkpoint_count=args.checkpoints,
                                    rounds=args.rounds, jobs=jobs)
    agg = processes.aggregate(traces)
    if out is not None:
        for tr in traces:
            tr.write_csv(out / f"trace_{kind}_s{tr.sample:03d}.csv")
        (out / f"aggregate_{kind}.json").write_text(
            json.dumps(agg, indent=2, sort_keys=True), encoding="utf-8")
        if args.format == "json":
            for tr in traces:
                (out / f"trace_{kind}_s{tr.sample:03d}.json").write_text(
                    json.dumps(tr.summary(), indent=2, sort_keys=True), encoding="utf-8")
    _emit(agg)
    return 0


def cmd_oracle(args) -> int:
    g = load_edge_list(args.input)
    res = oracle.solve(g, budget=args.budget)
    payload = res.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    _emit(payload)
    return 0


def cmd_tuza(args) -> int:
    if (args.m is None) == (args.c is None):
        raise SystemExit("specify exactly one of --m/--c")
    m = args.m if args.m is not None else int(args.c * args.n**1.5)
    report = oracle.verify_tuza_batch(args.n, m, args.samples, seed=args.seed,
                                      budget=args.budget, jobs=_jobs(args))
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")
    slim = {k: v for k, v in report.items() if k != "rows"}
    _emit(slim)
    if report["violation_count"]:
        _emit({"failure": "tau <= 2*nu violated", "samples": report["violations"]})
        return 1
    return 0


def cmd_concentration(args) -> int:
    report = conc.run_concentration(args.n, args.c, seed=args.seed,
                                    checkpoint_count=args.checkpoints)
    payload = report.to_dict()
    if args.out:
        p = Path(args.out)
        if p.suffix == ".csv":
            report.write_csv(p)
        else:
            p.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    summary = {
        "n": report.n,
        "c": report.c,
        "seed": report.seed,
        "outside_envelope": report.exceeds_envelope(),
        "checkpoints": len(report.checkpoints),
        "d_u_mean_relative_after_burnin": (report.global_max("d_u", "mean_relative", conc.REL_T_MIN) or (None,))[0],
        "c_r_mean_abs": (report.global_max("c_r", "mean_abs") or (None,))[0],
    }
    _emit(summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tripack",
                                 description="triangle packing process laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ode", help="tabulate curves and solve constants")
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--grid", type=float, default=0.01, help="output grid spacing")
    p.add_argument("--step", type=float, default=ode.DEFAULT_STEP, help="integrator step")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ode)

    p = sub.add_parser("simulate", help="run a stochastic process")
    p.add_argument("--process", required=True,
                   help="k11s | triangle-only | tf | rtf | rtr")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--kn", type=int, default=None, help="start from the complete graph K_n")
    p.add_argument("--input", default=None, help="edge-list start graph")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoints", type=int, default=100)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figures", help="emit curve CSVs for plotting")
    p.add_argument("--c-max", type=float, default=10.0)
    p.add_argument("--grid", type=float, default=0.01)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("oracle", help="exact nu/tau of an edge-list graph")
    p.add_argument("--input", required=True)
    p.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("tuza", help="batch-verify tau <= 2*nu on G(n,m) samples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tuza)

    p = sub.add_parser("concentration", help="empirical dynamic-concentration report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoints", type=int, default=20)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_concentration)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        _emit({"failure": str(exc)})
        return 1


if __name__ == "__main__":
    sys.exit(main())
