"""Command-line front end: ``extreme-povm <command> [options]``.

Exit codes: 0 affirmative answer, 1 negative answer (not extreme, no packing,
nothing found), 2 unreliable verdict, 3 usage error, 4 invalid input data,
5 numerical failure.  Outcome indices on the command line are 1-based.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import constructions as con
from . import io
from .dilation import minimal_dilation
from .errors import NoSymmetricSolution, PovmError, PreconditionError
from .extremality import check_extreme_a, check_extreme_c
from .operator_core import tolerance_profile
from .packing import brute_force_oracle, formation_to_dict, render, solve
from .rank_catalog import (
    catalog_to_dict,
    derive_feasible,
    enumerate_candidates,
    format_catalog,
    parse_vector,
)

EXIT_OK, EXIT_NO, EXIT_UNRELIABLE, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = range(6)

CONSTRUCT_OPS = ("add-rank1", "rank1-chain", "delete", "refine", "multiply", "increase", "lift")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit status 3."""

    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n{self.format_usage()}")


def _global_options() -> argparse.ArgumentParser:
    # defaults are suppressed so the flags work before or after the command
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tolerance-profile", choices=("default", "strict"), default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default=argparse.SUPPRESS)
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text", default=argparse.SUPPRESS)
    p.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="write the main document here")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = _Parser(
        prog="extreme-povm",
        description="Extremality checks, constructions and packings for finite-outcome POVMs.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("check-extreme", parents=[common], help="decide extremality of a povm-json file")
    p.add_argument("file", type=Path)
    p.add_argument("--criterion", choices=("c", "a", "both"), default="c")
    p.add_argument("--witness-out", type=Path, help="write the mixing pair when not extreme")

    p = sub.add_parser("dilate", parents=[common], help="minimal dilation of a povm-json file")
    p.add_argument("file", type=Path)

    p = sub.add_parser("construct", parents=[common], help="apply a construction")
    p.add_argument("op", choices=CONSTRUCT_OPS)
    p.add_argument("--in", dest="infile", type=Path, help="input povm-json (all ops but rank1-chain)")
    p.add_argument("--dim", type=int, help="dimension for rank1-chain")
    p.add_argument("--outcomes", type=int, help="number of outcomes for rank1-chain")
    p.add_argument("--index", type=int, help="1-based outcome for delete / increase / lift")
    p.add_argument("--partition", help='refine groups, e.g. "2,1;1;3" (one group list per outcome)')
    p.add_argument("--factor", type=int, help="multiplier for multiply")
    p.add_argument("--p", type=int, help="dimension increment for lift")

    p = sub.add_parser("enumerate", parents=[common], help="candidate rank vectors or the catalog")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--derive", action="store_true", help="classify candidates into the catalog")
    p.add_argument("--use-packing", action="store_true", help="seed the catalog with symmetric packings")
    p.add_argument("--numerical-budget", type=int, default=0, help="search budget for OPEN entries")

    p = sub.add_parser("pack", parents=[common], help="solve a square packing problem")
    p.add_argument("--vector", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--pad", type=int, help="number of 1x1 boxes (default: as in the vector)")
    p.add_argument("--render", choices=("text", "svg"))
    p.add_argument("--oracle", action="store_true", help="cross-check with brute force (d <= 6)")

    p = sub.add_parser("synthesize", parents=[common], help="extreme POVM from a symmetric packing")
    p.add_argument("--vector", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--emit-formation", type=Path)

    p = sub.add_parser("search", parents=[common], help="randomised search for an extreme POVM")
    p.add_argument("--vector", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--report", type=Path, help="also write the search report here")
    return parser


def _emit(args, doc, text: str | None = None) -> None:
    payload = text if args.fmt == "text" and text is not None else io.dumps(doc)
    if args.out is not None:
        args.out.write_text(payload + "\n")
    else:
        sys.stdout.write(payload + "\n")


def _vector(args):
    if args.dim < 1:
        raise UsageError("--dim must be positive")
    try:
        return parse_vector(args.vector, args.dim)
    except ValueError as exc:
        raise UsageError(f"bad --vector {args.vector!r}: {exc}") from None


def _verdict_code(verdict) -> int:
    if not verdict.reliable:
        return EXIT_UNRELIABLE
    return EXIT_OK if verdict.is_extreme else EXIT_NO


def cmd_check_extreme(args, tol) -> int:
    povm = io.read_povm(args.file, tol)
    verdicts = []
    if args.criterion in ("c", "both"):
        verdicts.append(check_extreme_c(povm, tol, witness=True))
    if args.criterion in ("a", "both"):
        verdicts.append(check_extreme_a(povm, tol))
    doc = {"tolerance_profile": tol.name, "verdicts": [v.as_dict() for v in verdicts]}
    if len({v.is_extreme for v in verdicts}) > 1:
        doc["disagreement"] = True
    main = verdicts[0]
    if main.witness is not None:
        doc["witness"] = {
            "scale": main.witness.scale,
            "separation": main.witness.separation(),
            "midpoint_defect": main.witness.midpoint_defect(povm),
        }
        if args.witness_out:
            io.write_json({"a": io.povm_to_dict(main.witness.a), "b": io.povm_to_dict(main.witness.b)}, args.witness_out)
    lines = [
        f"criterion {v.criterion}: {'extreme' if v.is_extreme else 'not extreme'}"
        f" (rank {v.numerical_rank}/{v.gram_dim}, gap {v.sv_gap:.3g}"
        f"{'' if v.reliable else ', UNRELIABLE'})"
        for v in verdicts
    ]
    _emit(args, doc, "\n".join(lines))
    if doc.get("disagreement"):
        return EXIT_UNRELIABLE
    return max(_verdict_code(v) for v in verdicts)


def cmd_dilate(args, tol) -> int:
    povm = io.read_povm(args.file, tol)
    dil = minimal_dilation(povm, tol)
    doc = {
        "dim": dil.dim,
        "dilation_dim": dil.dilation_dim,
        "block_sizes": list(dil.block_sizes),
        "isometry": io.matrix_to_json(dil.isometry),
        "isometry_defect": dil.isometry_defect(),
        "minimality_rank": dil.minimality_rank(tol),
    }
    text = (
        f"C^{dil.dim} -> C^{dil.dilation_dim}, blocks {list(dil.block_sizes)},"
        f" |J*J - I| = {dil.isometry_defect():.3g}"
    )
    _emit(args, doc, text)
    return EXIT_OK


def _outcome(args, povm) -> int:
    if args.index is None:
        return 0
    if not 1 <= args.index <= povm.n_outcomes:
        raise UsageError(f"--index must be in 1..{povm.n_outcomes}")
    return args.index - 1


def _parse_partition(text: str) -> list[list[int]]:
    try:
        return [[int(x) for x in grp.split(",") if x.strip()] for grp in text.split(";")]
    except ValueError:
        raise UsageError(f"bad --partition {text!r}") from None


def cmd_construct(args, tol) -> int:
    op = args.op
    if op == "rank1-chain":
        if args.dim is None or args.outcomes is None:
            raise UsageError("rank1-chain needs --dim and --outcomes")
        out = con.rank1_chain(args.dim, args.outcomes, seed=args.seed, tol=tol)
    else:
        if args.infile is None:
            raise UsageError(f"{op} needs --in FILE")
        povm = io.read_povm(args.infile, tol)
        if op == "add-rank1":
            out = con.add_rank1(povm, seed=args.seed, tol=tol)
        elif op == "delete":
            out = con.delete_outcome(povm, _outcome(args, povm), seed=args.seed, tol=tol)
        elif op == "refine":
            if args.partition is None:
                raise UsageError("refine needs --partition")
            out = con.refine(povm, _parse_partition(args.partition), tol=tol)
        elif op == "multiply":
            if args.factor is None:
                raise UsageError("multiply needs --factor")
            out = con.multiply_ranks(povm, args.factor, tol=tol)
        elif op == "increase":
            out = con.increase_rank(povm, _outcome(args, povm), tol=tol)
        else:
            if args.p is None:
                raise UsageError("lift needs --p")
            out = con.lift_dimension(povm, args.p, _outcome(args, povm), tol=tol)
    _emit(args, io.povm_to_dict(out), f"d = {out.dim}, ranks {list(out.ranks)}")
    return EXIT_OK


def cmd_enumerate(args, tol) -> int:
    if args.derive:
        records = derive_feasible(
            args.dim, use_packing=args.use_packing, numerical_budget=args.numerical_budget, seed=args.seed
        )
        _emit(args, catalog_to_dict(args.dim, records), format_catalog(records))
    else:
        vecs = enumerate_candidates(args.dim)
        doc = {"dim": args.dim, "candidates": [str(v) for v in vecs]}
        _emit(args, doc, "\n".join(str(v) for v in vecs))
    return EXIT_OK


def cmd_pack(args, tol) -> int:
    vec = _vector(args)
    mode = "symmetric" if args.symmetric else "general"
    formation = solve(vec, pad=args.pad, symmetric=args.symmetric)
    doc = {"vector": str(vec), "mode": mode, "solvable": formation is not None}
    if formation is not None:
        doc["formation"] = formation_to_dict(formation)
    if args.oracle:
        ref = brute_force_oracle(vec, pad=args.pad, mode=mode)
        doc["oracle_solvable"] = ref is not None
        if (ref is None) != (formation is None):
            sys.stderr.write("extreme-povm: solver and brute-force oracle disagree\n")
            _emit(args, doc)
            return EXIT_NUMERIC
    if args.render and formation is not None:
        text = render(formation, args.render)
        if args.render == "svg" or args.fmt == "text":
            target = args.out
            payload = text if text.endswith("\n") else text + "\n"
            if target is not None:
                target.write_text(payload)
            else:
                sys.stdout.write(payload)
            return EXIT_OK
        doc["rendering"] = text
    _emit(args, doc, f"{vec} ({mode}): {'solvable' if formation else 'unsolvable'}")
    return EXIT_OK if formation is not None else EXIT_NO


def cmd_synthesize(args, tol) -> int:
    from .packing import solve_symmetric
    from .synthesis import synthesize_vector

    vec = _vector(args)
    try:
        povm = synthesize_vector(vec, seed=args.seed, tol=tol)
    except NoSymmetricSolution as exc:
        sys.stderr.write(f"extreme-povm: {exc}\n")
        return EXIT_NO
    if args.emit_formation:
        io.write_json(formation_to_dict(solve_symmetric(vec.canonical(), pad=0)), args.emit_formation)
    _emit(args, io.povm_to_dict(povm), f"d = {povm.dim}, ranks {list(povm.ranks)}, certified extreme")
    return EXIT_OK


def cmd_search(args, tol) -> int:
    from .search import search_extreme

    vec = _vector(args)
    if args.budget < 0:
        raise UsageError("--budget must be non-negative")
    report = search_extreme(vec, budget=args.budget, seed=args.seed, tol=tol)
    doc = report.to_dict()
    if args.report:
        args.report.write_text(report.to_json() + "\n")
    if report.found is not None:
        if args.out is not None:
            io.write_povm(report.found, args.out)
        else:
            doc["povm"] = io.povm_to_dict(report.found)
    text = (
        f"{report.target}: {'found' if report.found else 'not found'} after {report.trials} trials"
        f" (best gap {report.best_sv_gap:.3g})"
    )
    payload = text if args.fmt == "text" else io.dumps(doc)
    sys.stdout.write(payload + "\n")
    return EXIT_OK if report.found is not None else EXIT_NO


COMMANDS = {
    "check-extreme": cmd_check_extreme,
    "dilate": cmd_dilate,
    "construct": cmd_construct,
    "enumerate": cmd_enumerate,
    "pack": cmd_pack,
    "synthesize": cmd_synthesize,
    "search": cmd_search,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for key, default in (("tolerance_profile", "default"), ("seed", 0), ("fmt", "json"), ("out", None)):
        if not hasattr(args, key):
            setattr(args, key, default)
    tol = tolerance_profile(args.tolerance_profile)
    try:
        return COMMANDS[args.command](args, tol)
    except UsageError as exc:
        sys.stderr.write(f"extreme-povm {args.command}: error: {exc}\n")
        sys.stderr.write(parser._subparsers._group_actions[0].choices[args.command].format_usage())
        return EXIT_USAGE
    except (PreconditionError, OSError, json.JSONDecodeError, ValueError) as exc:
        sys.stderr.write(f"extreme-povm {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_DATA
    except PovmError as exc:
        sys.stderr.write(f"extreme-povm {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as exc:
        sys.stderr.write(f"extreme-povm {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
