"""Command-line front end. Every subcommand prints one JSON object on stdout.

Exit codes: 0 analysis completed, 2 invalid input, 3 size guard or budget hit.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from ngacsafe import documents as docs
from ngacsafe.bench import measure_mis, plot_rows, triangle_sweep, write_csv
from ngacsafe.dacc import BudgetExceeded, solve_dacc
from ngacsafe.model import errors, validate_model
from ngacsafe.oracles import SizeGuardError
from ngacsafe.reductions import gen_disjoint_triangles, gen_mutex_groups_model, reduce_3col_to_dacc, reduce_dacc_to_cosp
from ngacsafe.safety import ModelRejected, build_constraint_graph, build_supergraph, check_safety

EXIT_OK, EXIT_INPUT, EXIT_LIMIT = 0, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, kind: str, message: str, diagnostics=()):
        super().__init__(message)
        self.code, self.kind, self.diagnostics = code, kind, list(diagnostics)


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Fail(EXIT_INPUT, "io", f"{path}: {exc.strerror}") from exc


def _diag_docs(diags) -> list:
    return [{"code": d.code, "message": d.message, "severity": d.severity} for d in diags]


def _model(path: str):
    return docs.parse_policy(_read(path))


def cmd_validate(args) -> tuple[dict, int]:
    diags = validate_model(_model(args.model), strict=not args.lenient)
    ok = not errors(diags)
    doc = {"schema": docs.SCHEMA_VERSION, "verdict": "valid" if ok else "invalid", "diagnostics": _diag_docs(diags)}
    return doc, EXIT_OK if ok else EXIT_INPUT


def cmd_check_safety(args) -> tuple[dict, int]:
    model = _model(args.model)
    verdict = check_safety(
        model, all_potential=args.all_potential, strict=not args.lenient, jobs=args.jobs, max_mis=args.max_mis,
    )
    return docs.safety_doc(verdict, with_sequence=args.witness, timing=args.timing), EXIT_OK


def cmd_solve_dacc(args) -> tuple[dict, int]:
    inst = docs.parse_instance(_read(args.instance))
    t0 = time.perf_counter()
    verdict = solve_dacc(inst, max_mis=args.max_mis)
    elapsed = (time.perf_counter() - t0) * 1000.0 if args.timing else None
    return docs.dacc_doc(verdict, elapsed_ms=elapsed), EXIT_OK


def cmd_reduce_3col(args) -> tuple[dict, int]:
    return docs.instance_to_doc(reduce_3col_to_dacc(docs.parse_graph(_read(args.graph)))), EXIT_OK


def cmd_reduce_dacc(args) -> tuple[dict, int]:
    return docs.model_to_doc(reduce_dacc_to_cosp(docs.parse_instance(_read(args.instance)))), EXIT_OK


def cmd_gen(args) -> tuple[dict, int]:
    if args.family == "triangles":
        if args.k is None:
            raise _Fail(EXIT_INPUT, "usage", "gen triangles needs a count k")
        return docs.constraint_graph_to_doc(gen_disjoint_triangles(args.k)), EXIT_OK
    try:
        groups = [int(x) for x in args.groups.split(",") if x.strip()]
    except ValueError as exc:
        raise _Fail(EXIT_INPUT, "usage", f"--groups must be comma-separated integers: {args.groups!r}") from exc
    return docs.model_to_doc(gen_mutex_groups_model(args.users, groups, right=args.right)), EXIT_OK


def cmd_bench(args) -> tuple[dict, int]:
    if args.what == "safety":
        if args.target is None:
            raise _Fail(EXIT_INPUT, "usage", "bench safety needs a model file")
        return _bench_safety(_model(args.target), args), EXIT_OK

    if args.target is not None:
        try:
            k = int(args.target)
        except ValueError as exc:
            raise _Fail(EXIT_INPUT, "usage", f"bench mis takes a triangle count, got {args.target!r}") from exc
        if k < 1:
            raise _Fail(EXIT_INPUT, "usage", "triangle count must be at least 1")
        rows = triangle_sweep(k, brute_limit=args.brute_limit)
    else:
        cg = docs.parse_constraint_graph(_read(args.input))
        rows = [measure_mis(cg, "input", brute_limit=args.brute_limit)]
    if args.csv:
        write_csv(rows, Path(args.csv))
    if args.plot:
        plot_rows(rows, Path(args.plot))
    last = rows[-1]
    doc = {
        "schema": docs.SCHEMA_VERSION,
        "verdict": "measured",
        "rows": [r.as_json(timing=not args.no_timing) for r in rows],
        "stats": {"misEnumerated": last.mis, "naiveSubsets": last.subsets, "vertices": last.vertices},
    }
    return doc, EXIT_OK


def _bench_safety(model, args) -> dict:
    sg = build_supergraph(model)
    cg = build_constraint_graph(model, sg)
    constrained = sum(1 for v in cg.vertices if cg.neighbors(v))
    verdict = check_safety(model, max_mis=args.max_mis)
    stats = {
        "tuplesChecked": verdict.stats.tuples_checked,
        "misEnumerated": verdict.stats.mis_enumerated,
        "maxMisPerTuple": verdict.stats.max_mis_per_tuple,
        "constrainedEdges": constrained,
        "naiveSubsets": 2 ** constrained,
    }
    if not args.no_timing:
        stats["elapsedMs"] = round(verdict.stats.elapsed_ms, 3)
    return {"schema": docs.SCHEMA_VERSION, "verdict": "safe" if verdict.safe else "unsafe", "stats": stats}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ngacsafe", description="Safety analysis for NGAC access-control models.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a model document for well-formedness")
    s.add_argument("model")
    s.add_argument("--lenient", action="store_true", help="downgrade condition mismatches to warnings")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("check-safety", help="decide whether any command sequence creates new access")
    s.add_argument("model")
    s.add_argument("--all-potential", action="store_true", help="also test users/resources only commands can create")
    s.add_argument("--witness", action="store_true", help="include the replayable command sequence")
    s.add_argument("--jobs", type=int, default=1, help="parallel tuple checks (default 1, sequential)")
    s.add_argument("--lenient", action="store_true", help="downgrade condition mismatches to warnings")
    s.add_argument("--timing", action="store_true", help="add elapsedMs to stats (output no longer reproducible)")
    s.add_argument("--max-mis", type=int, default=None, help="give up (exit 3) past this many sets per tuple")
    s.set_defaults(func=cmd_check_safety)

    s = sub.add_parser("solve-dacc", help="solve a constrained-connectivity instance")
    s.add_argument("instance")
    s.add_argument("--timing", action="store_true")
    s.add_argument("--max-mis", type=int, default=None)
    s.set_defaults(func=cmd_solve_dacc)

    s = sub.add_parser("reduce-3col", help="graph document -> DACC instance document")
    s.add_argument("graph")
    s.set_defaults(func=cmd_reduce_3col)

    s = sub.add_parser("reduce-dacc", help="DACC instance document -> model document")
    s.add_argument("instance")
    s.set_defaults(func=cmd_reduce_dacc)

    s = sub.add_parser("gen", help="generate worst-case instances")
    s.add_argument("family", choices=["triangles", "mutex"])
    s.add_argument("k", nargs="?", type=int, help="number of disjoint triangles")
    s.add_argument("--users", type=int, default=1)
    s.add_argument("--groups", default="3", help="comma-separated group sizes, e.g. 3,3,3")
    s.add_argument("--right", default="read")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("bench", help="compare MIS enumeration with naive search")
    s.add_argument("what", choices=["mis", "safety"])
    s.add_argument("target", nargs="?", help="triangle count (mis) or model file (safety)")
    s.add_argument("--input", default="-", help="constraint graph document when no count is given")
    s.add_argument("--plot", help="write a PNG figure of the sweep")
    s.add_argument("--csv", help="write the rows as CSV")
    s.add_argument("--brute-limit", type=int, default=None, help="largest vertex count to brute force (default 16)")
    s.add_argument("--max-mis", type=int, default=None)
    s.add_argument("--no-timing", action="store_true", help="omit wall-clock fields")
    s.set_defaults(func=cmd_bench)
    return p


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        try:
            doc, code = args.func(args)
        except docs.DocumentError as exc:
            raise _Fail(EXIT_INPUT, "document", str(exc)) from exc
        except ModelRejected as exc:
            raise _Fail(EXIT_INPUT, "model", "model rejected", exc.diagnostics) from exc
        except (SizeGuardError, BudgetExceeded) as exc:
            raise _Fail(EXIT_LIMIT, "limit", str(exc)) from exc
        except ValueError as exc:
            raise _Fail(EXIT_INPUT, "input", str(exc)) from exc
    except _Fail as fail:
        err = {"kind": fail.kind, "message": str(fail)}
        if fail.diagnostics:
            err["diagnostics"] = _diag_docs(fail.diagnostics)
        stdout.write(docs.dumps({"schema": docs.SCHEMA_VERSION, "verdict": "error", "error": err}))
        stderr.write(f"ngacsafe: {fail}\n")
        return fail.code
    stdout.write(docs.dumps(doc))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
