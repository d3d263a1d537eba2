"""Command-line entry point: ``torusrig <command> ...``.

Exit codes: 0 success (for ``check``, both verdicts say minimally rigid),
1 definite negative, 2 malformed input or bad configuration, 3 the
combinatorial and linear verdicts disagree.
"""

from __future__ import annotations

import argparse
import csv
import io as _stringio
import json
import os
import sys
import time
from typing import Sequence

from . import __version__
from .constructions import graph_document, random_tight_graph, reduce_to_seed, replay_trace
from .errors import CapExceeded, ConfigError, DocumentError, TorusRigError
from .io import digest, dumps, load_json, read_graph, trace_document, trace_from_document
from .linalg import MERSENNE_61, is_prime
from .rigidity import (
    DEFAULT_TRIALS,
    assemble_matrix,
    dependent_circuit,
    generic_rank,
    induce_bar_joint,
    sample_positions,
)
from .sparsity import ENGINES, check_sparsity, select_engine

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_DISAGREE = 0, 1, 2, 3
SEED_ENV = "TORUSRIG_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _emit(doc: object, out) -> None:
    out.write(dumps(doc))


def _oracle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prime", type=int, default=MERSENNE_61, help="field modulus (default 2^61-1)")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="random placements")
    p.add_argument("--seed", type=int, default=None, help=f"placement seed (default ${SEED_ENV} or 0)")


def _timed(args, report: dict, start: float) -> dict:
    if args.timing:
        report["timing_s"] = round(time.perf_counter() - start, 6)
    return report


def cmd_check(args, out) -> int:
    start = time.perf_counter()
    graph = read_graph(args.file)
    engine = select_engine(graph) if args.engine == "auto" else args.engine
    oracle = {"prime": args.prime, "trials": args.trials, "seed": args.seed}
    comb = check_sparsity(graph, engine, **oracle)
    lin = generic_rank(induce_bar_joint(graph), args.prime, args.trials, args.seed)
    combinatorial = comb.tight and comb.sparse
    linear = lin.minimally_rigid
    if combinatorial != linear:
        code = EXIT_DISAGREE
    elif combinatorial:
        code = EXIT_OK
    else:
        code = EXIT_NEGATIVE
    report = {
        "command": "check",
        "input_digest": digest(graph),
        "engine": engine,
        "config": {"seed": args.seed, "prime": args.prime, "trials": args.trials},
        "sparsity": comb.to_dict(),
        "rigidity": lin.to_dict(),
        "minimally_rigid": combinatorial and linear,
        "witness": list(comb.witness) if comb.witness is not None else None,
        "exit_code": code,
    }
    if code == EXIT_DISAGREE:
        report["disagreement"] = {
            "graph": graph_document(graph),
            "dependent_bars": dependent_circuit(graph, **oracle),
        }
    _emit(_timed(args, report, start), out)
    return code


def cmd_rank(args, out) -> int:
    start = time.perf_counter()
    graph = read_graph(args.file)
    lin = generic_rank(induce_bar_joint(graph), args.prime, args.trials, args.seed, exact=args.exact)
    report = {
        "command": "rank",
        "input_digest": digest(graph),
        "config": {"seed": args.seed, "prime": args.prime, "trials": args.trials, "exact": args.exact},
        "rigidity": lin.to_dict(),
        "exit_code": EXIT_OK,
    }
    _emit(_timed(args, report, start), out)
    return EXIT_OK


def cmd_induce(args, out) -> int:
    fw = induce_bar_joint(read_graph(args.file))
    _emit(graph_document(fw.graph), out)
    return EXIT_OK


def cmd_matrix(args, out) -> int:
    import random

    if not is_prime(args.prime):
        raise ConfigError(f"modulus {args.prime} is not prime")
    graph = read_graph(args.file)
    fw = induce_bar_joint(graph)
    positions = sample_positions(fw.vertices, random.Random(args.positions_seed), args.prime)
    m = assemble_matrix(fw, positions, args.prime)
    if args.format == "json":
        _emit({
            "columns": m.column_labels(),
            "modulus": args.prime,
            "rows": [{"edge_id": rid, "entries": line} for rid, line in zip(m.row_ids, m.dense())],
        }, out)
        return EXIT_OK
    buf = _stringio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["edge_id"] + m.column_labels())
    for rid, line in zip(m.row_ids, m.dense()):
        writer.writerow([rid] + line)
    out.write(buf.getvalue())
    return EXIT_OK


def cmd_generate(args, out) -> int:
    _emit(graph_document(random_tight_graph(args.bodies, args.seed)), out)
    return EXIT_OK


def cmd_reduce(args, out) -> int:
    trace = reduce_to_seed(read_graph(args.file))
    _emit(trace_document(trace), out)
    return EXIT_OK


def cmd_replay(args, out) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError(exc.strerror or "unreadable", args.file) from None
    trace = trace_from_document(load_json(text, args.file), args.file)
    _emit(graph_document(replay_trace(trace)), out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    from .harness import run_verify

    start = time.perf_counter()
    report = {"command": "verify", **run_verify(args.corpus_size, args.max_bodies, args.seed)}
    report["exit_code"] = EXIT_OK if report["passed"] else EXIT_NEGATIVE
    _emit(_timed(args, report, start), out)
    return report["exit_code"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torusrig", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="count and rank verdicts for a body-bar graph")
    p.add_argument("file")
    p.add_argument("--engine", choices=ENGINES, default="auto")
    _oracle_args(p)
    p.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("rank", help="generic rank of the induced bar-joint framework")
    p.add_argument("file")
    _oracle_args(p)
    p.add_argument("--exact", action="store_true", help="integer positions, elimination over Q")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("induce", help="print the induced bar-joint graph")
    p.add_argument("file")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("matrix", help="dump the rigidity matrix at seeded positions")
    p.add_argument("file")
    p.add_argument("--positions-seed", type=int, default=None)
    p.add_argument("--prime", type=int, default=MERSENNE_61)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("generate", help="random tight sparse graph built by pinches")
    p.add_argument("--bodies", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("reduce", help="split-off reduction trace down to one body")
    p.add_argument("file")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("replay", help="rebuild a graph from a reduction trace")
    p.add_argument("file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("verify", help="run the cross-validation harness")
    p.add_argument("--corpus-size", type=int, default=50)
    p.add_argument("--max-bodies", type=int, default=6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        fallback = default_seed()
        for name in ("seed", "positions_seed"):
            if hasattr(args, name) and getattr(args, name) is None:
                setattr(args, name, fallback)
        return args.func(args, out)
    except (DocumentError, ConfigError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TorusRigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        detail = getattr(exc, "instance", None)
        if detail is not None:
            print(json.dumps(detail, sort_keys=True), file=sys.stderr)
        return EXIT_NEGATIVE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
