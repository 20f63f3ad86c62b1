"""Command-line entry point.

Exit codes: 0 success, 1 at least one experiment errored, 2 invalid input.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .errors import DiskodeError, ScenarioError
from .harness import CATALOG, emit_report, load_scenario, parse_scenario, run_scenario, validate_catalog

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


def _global_flags(default) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default=default, help="directory for report files")
    p.add_argument("--format", choices=("csv", "json", "both"), default=default, help="report format")
    p.add_argument("--tol", type=float, default=default, help="solver tolerance override")
    p.add_argument("--threads", type=int, default=default, help="worker threads (speed only)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diskode",
        description="Solve nonlinear disk ODEs along rays and check growth and membership estimates.",
        parents=[_global_flags(None)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _global_flags(argparse.SUPPRESS)

    cat = sub.add_parser("catalog", help="built-in equations", parents=[flags])
    cat.add_argument("action", choices=("list",))

    for name, help_text in (("validate", "check a scenario file"), ("run", "run a scenario file")):
        p = sub.add_parser(name, help=help_text, parents=[flags])
        p.add_argument("scenario", help="path to a scenario JSON file")

    def catalog_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text, parents=[flags])
        p.add_argument("equation", choices=sorted(CATALOG), help="catalog entry")
        p.add_argument("--r-max", type=float, default=0.999)
        p.add_argument("--nu", type=float, default=0.0)
        p.add_argument("--rays", type=int, default=8)
        p.add_argument("--report-n", type=int, default=101)
        p.add_argument("--kernel-p", type=float, default=None, help="power kernel t^p")
        p.add_argument("--kernel-const", type=float, default=None, help="constant kernel")
        return p

    catalog_cmd("solve", "solve the fan of rays")
    p = catalog_cmd("norms", "norms of the coefficients")
    p.add_argument("--space", nargs="+", default=["bloch", "bers"], choices=("bloch", "bers", "hardy", "qk"))
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--t", type=float, default=2.0)
    p = catalog_cmd("bounds", "growth and comparison estimates")
    p.add_argument("--which", nargs="+", default=["growth", "derivative"],
                   choices=("growth", "derivative", "hinf", "bloch", "comparison"))
    p.add_argument("--epsilon", type=float, nargs="+", default=[0.1, 0.5])
    p.add_argument("--hinf-s", type=float, nargs="+", default=[0.0, 0.5])
    p.add_argument("--bloch-m", type=float, default=None)
    p = catalog_cmd("conditions", "coefficient-size and kernel hypotheses")
    p.add_argument("--mode", choices=("thm_alpha", "thm_beta"), default="thm_beta")
    p.add_argument("--threshold", type=float, nargs="+", default=[1.0])
    p.add_argument("--c", type=float, default=None)
    p = catalog_cmd("volterra", "iterated-kernel estimate")
    p.add_argument("--r-grid", type=float, nargs="+", default=None)
    p.add_argument("--n-max", type=int, default=80)
    p = catalog_cmd("scan", "empirical Q_K integral scan")
    p.add_argument("--r-max-seq", type=float, nargs="+", default=[0.9, 0.99, 0.999])
    p.add_argument("--scan-rays", type=int, default=64)
    p.add_argument("--radial-n", type=int, default=48)
    p.add_argument("--kernel-form", choices=("green", "one_minus_phi_sq"), default="one_minus_phi_sq")
    return parser


def _scenario_from_args(args) -> dict:
    exp: dict = {"type": args.command}
    if args.command == "norms":
        exp.update(spaces=args.space, s=args.s, t=args.t)
    elif args.command == "bounds":
        exp.update(which=args.which, epsilons=args.epsilon, hinf_s=args.hinf_s, bloch_M=args.bloch_m)
    elif args.command == "conditions":
        exp.update(mode=args.mode, thresholds=args.threshold, c=args.c)
    elif args.command == "volterra":
        exp["n_max"] = args.n_max
        if args.r_grid:
            exp["r_grid"] = args.r_grid
    elif args.command == "scan":
        exp.update(r_max_sequence=args.r_max_seq, n_rays=args.scan_rays, radial_n=args.radial_n,
                   kernel_form=args.kernel_form)
    kernel = {"family": "power", "p": 0.5}
    if args.kernel_p is not None:
        kernel = {"family": "power", "p": args.kernel_p}
    elif args.kernel_const is not None:
        kernel = {"family": "constant", "value": args.kernel_const}
    return {
        "schema_version": 1,
        "id": f"{args.equation}_{args.command}",
        "equation": {"catalog": args.equation},
        "kernel": kernel,
        "solver": {"r_max": args.r_max, "nu": args.nu, "n_rays": args.rays, "report_n": args.report_n},
        "experiments": [exp],
    }


def _summary(bundle) -> str:
    lines = [f"scenario {bundle.scenario_id}"]
    for res in bundle.results:
        line = f"  {res.key}: {res.status}"
        if res.message:
            line += f" ({res.message})"
        lines.append(line)
        status = res.rows.get("bound_status", [])
        if status:
            counts: dict[str, int] = {}
            for row in status:
                counts[row["status"]] = counts.get(row["status"], 0) + 1
            lines.append("    bounds: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
        for row in res.rows.get("conditions", []):
            if row["item"] == "overall":
                verdict = "pass" if row["passed"] else "fail"
                lines.append(f"    conditions: threshold={row['threshold']:g} {verdict}")
        for row in res.rows.get("scan", [])[-1:]:
            lines.append(f"    scan: slope={row['slope']:.6g} ({row['classification']})")
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads or 1

    if args.command == "catalog":
        validate_catalog()
        for name, entry in sorted(CATALOG.items()):
            print(f"{name:15s} {entry.note}")
        return EXIT_OK

    try:
        if args.command in ("validate", "run"):
            scenario = load_scenario(args.scenario)
        else:
            scenario = parse_scenario(_scenario_from_args(args))
        if args.tol is not None:
            data = scenario.model_dump(mode="json")
            data["solver"]["tol"] = args.tol
            scenario = parse_scenario(data)
    except (ScenarioError, DiskodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "validate":
        sys.stdout.write(scenario.to_json())
        return EXIT_OK

    bundle = run_scenario(scenario, threads=threads)
    print(_summary(bundle))
    out_dir = args.out or scenario.output.dir
    fmt = args.format or scenario.output.format
    if out_dir:
        try:
            for path in emit_report(bundle, out_dir, fmt):
                print(f"wrote {path}")
        except OSError as exc:
            print(f"cannot write report: {exc}", file=sys.stderr)
            return EXIT_FAILED
    return EXIT_OK if bundle.ok else EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
