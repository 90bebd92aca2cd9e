"""Command-line driver: ``polyvem {check-element,patch-test,convergence,make-mesh,report}``.

Every subcommand accepts ``--config file.json`` whose keys mirror the long
flag names (``{"m": 3, "k": 4, "sizes": [4, 8, 16]}``); flags given on the
command line take precedence over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .errors import VEMError
from .mesh import MESH_KINDS, make_grid, save_mesh


def _sizes(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(s) for s in text]
    try:
        return [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid size list {text!r}") from exc


def _common(p: argparse.ArgumentParser, mesh: bool = True) -> None:
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("--m", type=int, default=3, help="order of the operator (m >= 3)")
    p.add_argument("--k", type=int, default=3, help="polynomial degree (k >= m)")
    if mesh:
        p.add_argument("--mesh", choices=MESH_KINDS, default="squares")
        p.add_argument("--perturb", type=float, default=None, help="vertex jitter as a fraction of 1/N")
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyvem", description="H^m-nonconforming virtual elements for (-Delta)^m u = f")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-element", help="element identities on the polygon zoo")
    _common(p, mesh=False)
    p.add_argument("--polygon", default=None, help="JSON file with a vertex list to check instead of the zoo")

    p = sub.add_parser("patch-test", help="polynomial reproduction on a mesh")
    _common(p)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--degree", type=int, default=None, help="degree of the random polynomial (default k)")

    p = sub.add_parser("convergence", help="manufactured-solution convergence study")
    _common(p)
    p.add_argument("--sizes", type=_sizes, default=[4, 8, 16], help="comma-separated N values")
    p.add_argument("--solution", default=None, help="'sin<p>' or 'zero' (default sin<m>)")

    p = sub.add_parser("make-mesh", help="write a mesh of the unit square to JSON")
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("kind", choices=MESH_KINDS)
    p.add_argument("N", type=int)
    p.add_argument("--perturb", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("report", help="render a convergence CSV as a table")
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("csv")
    p.add_argument("--data", default=None, help="also write a gnuplot-style data file")
    p.add_argument("--out", default=None)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = json.loads(Path(args.config).read_text())
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = set(config) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        if "sizes" in config:
            config["sizes"] = _sizes(config["sizes"])
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    if getattr(args, "perturb", 0.0) is None:
        kind = getattr(args, "mesh", None) or getattr(args, "kind", None)
        args.perturb = 0.2 if kind == "polygons-perturbed" else 0.0
    return args


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_check_element(args) -> int:
    cells = None
    if args.polygon:
        cells = harness.zoo_cells(harness.load_polygon(args.polygon))
    records = harness.check_element(args.m, args.k, cells)
    worst: dict[str, float] = {}
    for r in records:
        worst[r.identity] = max(worst.get(r.identity, 0.0), r.value)
    lines = [f"max {name}: {value:.3e}" for name, value in worst.items()]
    failed = [r for r in records if not r.passed]
    lines += [f"FAIL {r.identity} on {r.cell}: {r.value:.3e} > {r.tol:g}" for r in failed]
    lines.append("PASS" if not failed else f"{len(failed)} identity checks failed")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if not failed else 1


def cmd_patch_test(args) -> int:
    res = harness.patch_test(args.m, args.k, args.mesh, args.N, args.perturb, args.seed, args.degree)
    text = (
        f"m={res.m} k={res.k} mesh={res.mesh} N={res.N} degree={res.degree} ndofs={res.ndofs}\n"
        f"relative dof error {res.error:.3e} (threshold {harness.PATCH_TOL:g})\n"
        f"{'PASS' if res.passed else 'FAIL'}\n"
    )
    _emit(text, args.out)
    return 0 if res.passed else 1


def cmd_convergence(args) -> int:
    config = harness.RunConfig(
        m=args.m, k=args.k, mesh=args.mesh, sizes=args.sizes, perturb=args.perturb,
        seed=args.seed, solution=args.solution, out=args.out,
    )
    result = harness.convergence(config)
    _emit(harness.rows_to_csv(result.rows, config.m), args.out)
    if result.final_rate is None:
        print("rate check skipped", file=sys.stderr)
        return 0
    verdict = "PASS" if result.passed else "FAIL"
    print(
        f"{verdict}: e{config.m} rate {result.final_rate:.3f}, required >= {result.expected_rate - harness.RATE_SLACK:.2f}",
        file=sys.stderr,
    )
    return 0 if result.passed else 1


def cmd_make_mesh(args) -> int:
    mesh = make_grid(args.kind, args.N, args.perturb, args.seed)
    out = args.out or f"{args.kind}-{args.N}.json"
    save_mesh(mesh, out)
    print(f"wrote {out}: {mesh.n_cells} cells, {mesh.n_vertices} vertices, {mesh.n_edges} edges")
    return 0


def cmd_report(args) -> int:
    table, data = harness.report(harness.read_csv(args.csv))
    _emit(table, args.out)
    if args.data:
        Path(args.data).write_text(data)
    return 0


COMMANDS = {
    "check-element": cmd_check_element,
    "patch-test": cmd_patch_test,
    "convergence": cmd_convergence,
    "make-mesh": cmd_make_mesh,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (VEMError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
