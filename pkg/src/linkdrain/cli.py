"""Command-line front end.

Exit codes: 0 success, 1 usage or failed verification, 2 link-count cap
exceeded, 3 infeasible strategy, 4 I/O or schema error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .colgen import solve_cg
from .conditions import (CertificateReport, check_cardinality_corollaries, check_condition1,
                         check_condition4)
from .errors import (BudgetExceeded, DomainError, GenerationError, InfeasibleStrategy,
                     SchemaError)
from .framework import FrameworkConfig, run_framework, trace_to_csv
from .groups import members
from .instance import GeneratorParams, load, parse_demand, save
from .schedule import load_schedule, save_schedule

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    # argparse uses status 2 for usage errors; 2 is reserved for the cap here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> tuple:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _add_generator_args(p):
    p.add_argument("--n", type=int, default=15, help="links per instance")
    p.add_argument("--count", type=int, default=1, help="number of instances")
    p.add_argument("--demand", default="uniform:1000", help="uniform:V or random:LO:HI")
    p.add_argument("--rate", default="shannon", choices=["shannon", "bpsk", "binary"])
    p.add_argument("--z", type=float, default=1e-6, help="BPSK bit error rate")
    p.add_argument("--threshold", type=float, default=None, help="binary SINR threshold")
    p.add_argument("--sigma2", type=float, default=None, help="noise power")
    p.add_argument("--seed", type=int, default=0)


def _params(args) -> GeneratorParams:
    p = GeneratorParams(n=args.n, demand=parse_demand(args.demand), rate=args.rate, z=args.z,
                        sigma2=args.sigma2, seed=args.seed)
    if args.threshold is not None:
        p.threshold = args.threshold
    p.validate()
    return p


def _load_dir(path) -> list:
    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise SchemaError(f"no instance files under {path}")
    return [(f.stem, load(f)) for f in files]


def cmd_gen(args) -> int:
    spec = harness.ExperimentSpec(count=args.count, params=_params(args), seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, inst in spec.instances():
        save(inst, out / f"{name}.json")
    print(f"wrote {args.count} instance(s) to {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load(args.instance)
    name = args.algorithm
    sched, iterations, wall = harness.timed_run(inst, name, args.delta, args.timing)
    try:
        baseline = sched.total if name == harness.BASELINE else solve_cg(inst, "exact").length
    except BudgetExceeded:
        baseline = None
    row = harness.make_row(Path(args.instance).stem, name, sched, iterations, baseline, wall)
    sys.stdout.write(harness.rows_to_csv([row]))
    if args.out:
        save_schedule(sched, args.out, inst, algorithm=name)
    if args.trace:
        if name not in harness.FRAMEWORK_ALGORITHMS:
            raise DomainError("--trace applies to framework algorithms only")
        trace_to_csv(run_framework(inst, FrameworkConfig.from_name(name, args.delta)).trace, args.trace)
    return EXIT_OK


def _spec(args, algorithms, instances=None) -> harness.ExperimentSpec:
    # loaded instance files override the generated count in the header
    count = len(instances) if instances else args.count
    return harness.ExperimentSpec(count=count, params=_params(args), algorithms=algorithms,
                                  deltas=args.deltas, delta=args.delta, seed=args.seed,
                                  timing=args.timing)


def cmd_sweep(args) -> int:
    algs = args.algorithms or tuple(a for a in harness.FRAMEWORK_ALGORITHMS if a.startswith("td-"))
    instances = _load_dir(args.instances) if args.instances else None
    spec = _spec(args, algs, instances)
    summary, runs = harness.run_sweep(spec, instances)
    header = spec.header_lines()
    text = harness.sweep_to_csv(summary, header, args.out)
    if args.rows:
        harness.rows_to_csv([row for _, row in runs], header, args.rows)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    instances = _load_dir(args.instances) if args.instances else None
    spec = _spec(args, args.algorithms or harness.ALGORITHMS, instances)
    rows = harness.run_experiment(spec, instances)
    text = harness.rows_to_csv(rows, spec.header_lines(), args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def _guarded(label, fn, *a) -> dict:
    try:
        return fn(*a).to_dict()
    except BudgetExceeded as exc:
        return CertificateReport(label, False, skipped=True, details={"reason": str(exc)}).to_dict()
    except DomainError as exc:
        return CertificateReport(label, False, skipped=True, details={"reason": str(exc)}).to_dict()


def check_report(inst) -> dict:
    out = {"n": inst.n, "variant": inst.oracle.variant}
    c1 = _guarded("condition1", check_condition1, inst)
    if isinstance(c1.get("witness"), int):
        c1["witness_links"] = members(inst.to_original(c1["witness"]))
    out["condition1"] = c1
    out["h1_optimal"] = bool(c1["holds"]) and not c1["skipped"]
    out["condition4"] = _guarded("condition4", check_condition4, inst)
    if inst.oracle.variant == "cardinality":
        out["cardinality"] = check_cardinality_corollaries(inst.oracle.r[:inst.n]).to_dict()
    return out


def cmd_check(args) -> int:
    report = check_report(load(args.instance))
    text = json.dumps(report, indent=1, default=float)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load(args.instance)
    sched = load_schedule(args.schedule, inst)
    residual = sched.residual(inst)
    ok = sched.is_feasible(inst, args.rtol)
    print(json.dumps({"feasible": ok, "residual": residual, "length": sched.total}))
    return EXIT_OK if ok else EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linkdrain", description="Minimum-length link scheduling solvers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate random instances")
    _add_generator_args(p)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run one algorithm on one instance")
    p.add_argument("instance")
    p.add_argument("--algorithm", "-a", default="cg-exact",
                   choices=list(harness.ALGORITHMS + harness.EXTRA_ALGORITHMS))
    p.add_argument("--delta", type=float, default=harness.DEFAULT_DELTA)
    p.add_argument("--out", help="write the schedule JSON here")
    p.add_argument("--trace", help="write the framework trace CSV here")
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    p.set_defaults(func=cmd_solve)

    for name, func, helptext in (("sweep-delta", cmd_sweep, "mean normalized length versus delta"),
                                 ("bench", cmd_bench, "every algorithm on a batch of instances")):
        p = sub.add_parser(name, help=helptext)
        _add_generator_args(p)
        p.set_defaults(count=50)
        p.add_argument("--instances", help="instance file or directory instead of generating")
        p.add_argument("--algorithms", type=_names, default=None)
        p.add_argument("--deltas", type=_floats, default=harness.DEFAULT_GRID)
        p.add_argument("--delta", type=float, default=harness.DEFAULT_DELTA)
        p.add_argument("--timing", action="store_true")
        p.add_argument("--out", help="CSV path (stdout when omitted)")
        if name == "sweep-delta":
            p.add_argument("--rows", help="also write every individual run here")
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="optimality-condition certificates")
    p.add_argument("instance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="re-check a schedule against its instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.add_argument("--rtol", type=float, default=harness.VERIFY_RTOL)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InfeasibleStrategy as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SchemaError, OSError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
