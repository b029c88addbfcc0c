"""Command-line front end.

Exit codes: 0 true/consistent, 1 false/inconsistent, 2 parse or input
error, 3 oracle mismatch, 4 budget exceeded, 5 partial batch failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .closure import CompiledKB
from .kb import SCKB, KBSyntaxError, SituatedConditional, parse_kb, parse_query
from .logic import EntailmentOracle, LogicError, parse_formula
from .semantics import build_minimal_epistemic_model, satisfies_situated

EXIT_TRUE, EXIT_FALSE, EXIT_PARSE, EXIT_MISMATCH, EXIT_BUDGET, EXIT_PARTIAL = range(6)

ORACLE_MAX_ATOMS = 2


class InputError(Exception):
    pass


@dataclass
class QueryResult:
    query: SituatedConditional
    verdict: bool
    entailment_calls: int
    elapsed: float  # seconds

    def to_json(self) -> dict:
        return {
            "query": str(self.query),
            "verdict": self.verdict,
            "calls": self.entailment_calls,
            "ms": round(self.elapsed * 1000, 3),
        }


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from None


def load_kb(path: str) -> SCKB:
    try:
        return parse_kb(_read(path))
    except KBSyntaxError as e:
        raise InputError(f"{path}: {e}") from None


def run_query(compiled: CompiledKB, q: SituatedConditional) -> QueryResult:
    oracle = compiled.oracle
    before = oracle.calls
    start = time.perf_counter()
    verdict = compiled.query(q)
    return QueryResult(q, verdict, oracle.calls - before, time.perf_counter() - start)


def semantic_verdict(kb: SCKB, q: SituatedConditional) -> bool | None:
    """Brute-force verdict for tiny vocabularies, None when out of range."""
    from .oracle import brute_minimal_epistemic_model

    vocab = kb.vocab.copy()
    vocab.extend(sorted(q.atoms() - set(vocab)))
    if not 0 < len(vocab) <= ORACLE_MAX_ATOMS:
        return None
    if not CompiledKB(kb).consistent:
        return True
    return satisfies_situated(brute_minimal_epistemic_model(kb, vocab), q)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    kb = load_kb(args.kb)
    consistent = CompiledKB(kb, EntailmentOracle(args.engine)).consistent
    print("consistent" if consistent else "inconsistent")
    return EXIT_TRUE if consistent else EXIT_FALSE


def cmd_query(args) -> int:
    kb = load_kb(args.kb)
    try:
        q = parse_query(args.query, kb.vocab.copy())
    except KBSyntaxError as e:
        raise InputError(f"query: {e}") from None
    compiled = CompiledKB(kb, EntailmentOracle(args.engine))
    result = run_query(compiled, q)
    if args.json:
        print(json.dumps(result.to_json()))
    else:
        print("true" if result.verdict else "false")
        if args.stats:
            print(f"calls: {result.entailment_calls}")
    if args.oracle:
        expected = semantic_verdict(kb, q)
        if expected is None:
            print(f"oracle: skipped (needs 1 to {ORACLE_MAX_ATOMS} atoms)", file=sys.stderr)
        elif expected != result.verdict:
            print(f"oracle: mismatch, semantic verdict is {str(expected).lower()}", file=sys.stderr)
            return EXIT_MISMATCH
        else:
            print("oracle: agrees", file=sys.stderr)
    return EXIT_TRUE if result.verdict else EXIT_FALSE


def cmd_rank(args) -> int:
    kb = load_kb(args.kb)
    vocab = kb.vocab.copy()
    try:
        alpha = parse_formula(args.formula, "collect", vocab)
    except LogicError as e:
        raise InputError(f"formula: {e}") from None
    compiled = CompiledKB(kb, EntailmentOracle(args.engine))
    start = time.perf_counter()
    r = compiled.rank(alpha)
    elapsed = time.perf_counter() - start
    if args.json:
        print(json.dumps({
            "formula": args.formula,
            "rank": None if r.is_infinite else r.level,
            "kind": r.kind.value,
            "calls": compiled.oracle.calls,
            "ms": round(elapsed * 1000, 3),
        }))
    else:
        print(r)
    return EXIT_TRUE


def cmd_model(args) -> int:
    kb = load_kb(args.kb)
    if len(kb.vocab) > args.max_atoms:
        print(
            f"refusing to print a model over {len(kb.vocab)} atoms (limit {args.max_atoms}; raise --max-atoms)",
            file=sys.stderr,
        )
        return EXIT_BUDGET
    if len(kb.vocab) == 0:
        raise InputError("knowledge base mentions no atoms; add an 'atoms:' header")
    oracle = EntailmentOracle(args.engine)
    if not CompiledKB(kb, oracle).consistent:
        print("inconsistent", file=sys.stderr)
        return EXIT_FALSE
    print(build_minimal_epistemic_model(kb, oracle).dump())
    return EXIT_TRUE


def _query_lines(text: str):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_no, line


def cmd_batch(args) -> int:
    kb = load_kb(args.kb)
    queries_text = _read(args.queries)
    compiled = CompiledKB(kb, EntailmentOracle(args.engine))
    rows: list[dict] = []
    failed = False
    for line_no, line in _query_lines(queries_text):
        try:
            q = parse_query(line, kb.vocab.copy())
        except KBSyntaxError as e:
            failed = True
            rows.append({"line": line_no, "error": str(e)})
            if not args.json:
                print(f"line {line_no}: error: {e}")
            continue
        result = run_query(compiled, q)
        row = result.to_json()
        rows.append(row)
        if not args.json:
            tail = f"\tcalls={row['calls']}" if args.stats else ""
            print(f"{row['query']}\t{'true' if result.verdict else 'false'}{tail}")
    if args.json:
        print(json.dumps(rows, indent=2))
    return EXIT_PARTIAL if failed else EXIT_TRUE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="situated",
        description="Minimal-closure reasoning over situated conditional knowledge bases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def engine(p: argparse.ArgumentParser) -> None:
        p.add_argument("--engine", choices=["tt", "search"], default="tt",
                       help="entailment backend: truth table or DPLL search (default: tt)")

    p = sub.add_parser("check", help="report whether the knowledge base is consistent")
    p.add_argument("kb")
    engine(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("query", help="decide a conditional 'A |~ B' or 'A |~[G] B'")
    p.add_argument("kb")
    p.add_argument("query")
    engine(p)
    p.add_argument("--oracle", action="store_true",
                   help=f"cross-check against brute-force semantics (vocabularies up to {ORACLE_MAX_ATOMS} atoms)")
    p.add_argument("--stats", action="store_true", help="print the entailment-call count")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("rank", help="rank of a formula with respect to the conjunctive form")
    p.add_argument("kb")
    p.add_argument("formula")
    engine(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("model", help="print the minimal epistemic model, highest layer first")
    p.add_argument("kb")
    p.add_argument("--max-atoms", type=int, default=12)
    engine(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("batch", help="answer one query per line against a single compiled KB")
    p.add_argument("kb")
    p.add_argument("queries")
    engine(p)
    p.add_argument("--stats", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_TRUE
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
