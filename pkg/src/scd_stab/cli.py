"""Command line front end: ``scd-stab {check,faces,oracle} FILE``.

Exit codes: 0 when every selected condition holds (or the oracle finds no
violation), 2 when something fails, 1 on bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .checks import CLI_NAMES, CONDITIONS, run_checks
from .oracle import OracleError, build_solution_graph, verify_isolated_calmness_around
from .polyhedra import PolyhedronError, enumerate_faces
from .problem import ProblemError, load_problem
from .rational import fmt_mat, q

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2
CHOICES = ("primal", "dual", "face", "facepair", "point", "aubin", "scd", "all")


def _dump(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False)


def _out(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _workers(args) -> int:
    env = os.environ.get("SCD_STAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ProblemError(f"SCD_STAB_WORKERS must be an integer, got {env!r}") from None
    return max(1, args.workers)


def cmd_check(args) -> int:
    p = load_problem(args.file)
    conditions = CONDITIONS if args.condition == "all" else (CLI_NAMES[args.condition],)
    report = run_checks(p, conditions, workers=_workers(args))
    if args.json:
        _out(args, _dump({"problem": p.name, "all_hold": report.all_hold, "verdicts": report.to_json()}))
    else:
        lines = [f"{p.name or args.file}: l={p.l} k={p.k}"]
        for v in report.to_json():
            line = f"  {v['condition']:<18} {v['verdict']}"
            if v["witness"]:
                parts = [f"{k}=[{', '.join(x)}]" for k, x in v["witness"].items()]
                where = ", ".join(f"{k}={val}" for k, val in sorted(v["provenance"].items()))
                line += "  " + " ".join(parts) + (f"  ({where})" if where else "")
            lines.append(line)
        _out(args, "\n".join(lines))
    return EXIT_OK if report.all_hold else EXIT_FAIL


def cmd_faces(args) -> int:
    p = load_problem(args.file)
    K = p.critical_cone
    faces = enumerate_faces(K)
    if args.json:
        data = {
            "problem": p.name,
            "critical_cone": K.to_json(),
            "faces": [
                {"active": list(F.key), "dim": F.dim, "lineality": fmt_mat(F.span_basis)} for F in faces
            ],
        }
        _out(args, _dump(data))
    else:
        lines = [f"critical cone in R^{K.dim}: {len(faces)} faces"]
        for F in faces:
            basis = "; ".join("(" + ", ".join(str(x) for x in b) + ")" for b in F.span_basis) or "{0}"
            lines.append(f"  dim {F.dim}  active {list(F.key)}  span {basis}")
        _out(args, "\n".join(lines))
    return EXIT_OK


def cmd_oracle(args) -> int:
    p = load_problem(args.file)
    if not p.affine:
        raise ProblemError("oracle requires affine data")
    G = build_solution_graph(p)
    rep = verify_isolated_calmness_around(
        G, q(args.radius), q(args.kappa), args.samples, args.seed, workers=_workers(args)
    )
    if args.json:
        _out(args, _dump({"problem": p.name, "pieces": len(G.pieces), **rep.to_json()}))
    else:
        d = rep.to_json()
        lines = [
            f"{rep.verdict}: {d['anchors']} anchors, {d['probes']} probes, "
            f"largest ratio {d['modulus']} (kappa {d['kappa']}, seed {rep.seed})"
        ]
        if rep.quadruple:
            qd = rep.quadruple
            lines.append(f"  x={qd['x']} y={qd['y']} x'={qd['x_probe']} y'={qd['y_probe']}")
        _out(args, "\n".join(lines))
    return EXIT_FAIL if rep.violated else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit JSON")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="print nothing")

    parser = argparse.ArgumentParser(
        prog="scd-stab", description="Isolated calmness certificates for polyhedral generalized equations."
    )
    parser.add_argument("--json", action="store_true", help="emit JSON")
    parser.add_argument("--quiet", action="store_true", help="print nothing; use the exit code")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="run stability conditions")
    c.add_argument("file")
    c.add_argument("--condition", choices=CHOICES, default="all")
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("faces", parents=[common], help="list faces of the critical cone")
    f.add_argument("file")
    f.set_defaults(func=cmd_faces)

    o = sub.add_parser("oracle", parents=[common], help="sample the solution map for calmness violations")
    o.add_argument("file")
    o.add_argument("--radius", default="1/10")
    o.add_argument("--kappa", default="2")
    o.add_argument("--samples", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--workers", type=int, default=1)
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProblemError, PolyhedronError, OracleError, OSError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
