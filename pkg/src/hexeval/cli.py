"""Command line front end: ``hexeval solve`` and ``hexeval gen``."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .bench import bench_generate
from .core import Program, format_interpretation
from .deps import rule_dependencies, rule_graph_dot
from .errors import GroundingDiverged, HexError, ParseError
from .evalgraph import add_final_unit, build_evaluation_graph, evaluation_graph_dot
from .external import OracleRegistry, builtin_registry, load_table_oracle
from .grounding import DEFAULT_MAX_ITER, check_program_safety, ground_fixpoint
from .modelgraph import RunStats, answer_set_graph_dot, answer_sets_on_demand, build_answer_set_graph
from .parser import format_program, parse_with_diagnostics

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 2, 3
HEURISTICS = ("monolithic", "trivial", "greedy")


@dataclass
class RunConfig:
    inputs: list[str]
    oracles: list[str] = field(default_factory=list)
    heuristic: str = "greedy"
    share_constraints: bool = False
    stream: bool = False
    limit: Optional[int] = None
    ground_only: bool = False
    max_ground_iter: int = DEFAULT_MAX_ITER
    dot_deps: Optional[str] = None
    dot_eval: Optional[str] = None
    trace_model_graph: Optional[str] = None
    stats: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.limit is not None and self.limit < 1:
            raise ValueError("-n must be at least 1")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")


def load_program(paths: Sequence[str]) -> Program:
    rules = []
    errors = []
    for path in paths:
        P, diags = parse_with_diagnostics(Path(path).read_text(encoding="utf-8"))
        for d in diags:
            if d.severity != "error":
                logging.getLogger("hexeval").warning("%s:%d:%d: %s", path, d.line, d.column, d.message)
        bad = [replace(d, message=f"{path}: {d.message}") for d in diags if d.severity == "error"]
        if bad or P is None:
            errors.extend(bad)
            continue
        rules.extend(P.rules)
    if errors:
        raise ParseError(errors)
    return Program(tuple(rules))


def load_registry(paths: Sequence[str]) -> OracleRegistry:
    reg = builtin_registry()
    for p in paths:
        reg.register(load_table_oracle(p))
    return reg


def solve(P: Program, reg: OracleRegistry, heuristic: str = "greedy", share_constraints: bool = False,
          stream: bool = False, limit: Optional[int] = None, stats: Optional[RunStats] = None,
          max_iter: int = DEFAULT_MAX_ITER, retain: bool = False):
    """Answer sets as a list, plus the answer set graph when one was kept."""
    E = add_final_unit(build_evaluation_graph(P, reg, heuristic, share_constraints))
    stats = stats if stats is not None else RunStats()
    if stream:
        s = answer_sets_on_demand(E, reg, stats, retain=retain, max_iter=max_iter)
        out = []
        while limit is None or len(out) < limit:
            m = s.next()
            if m is None:
                break
            out.append(m)
        return out, s.graph, E
    A, sets = build_answer_set_graph(E, reg, stats, max_iter=max_iter)
    out = sorted(sets, key=format_interpretation)
    return (out if limit is None else out[:limit]), A, E


def run(cfg: RunConfig, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    t0 = time.perf_counter()
    try:
        P = load_program(cfg.inputs)
        reg = load_registry(cfg.oracles)
        safety = check_program_safety(P, reg)
        for r, v in safety.violations:
            print(f"unsafe variable {v} in rule: {r}", file=err)
        if not safety.ok:
            return EXIT_USAGE
        for r, msg in safety.warnings:
            print(f"warning: {msg} in rule: {r}", file=err)
        if cfg.dot_deps:
            Path(cfg.dot_deps).write_text(rule_graph_dot(rule_dependencies(P, reg)), encoding="utf-8")
        if cfg.ground_only:
            rep = ground_fixpoint(P, reg, cfg.max_ground_iter)
            out.write(format_program(rep.program))
            if cfg.stats:
                print(f"ground rules: {len(rep.program)}  iterations: {rep.iterations}  "
                      f"invented: {sorted(rep.invented)}", file=err)
            return EXIT_OK
        stats = RunStats()
        sets, A, E = solve(P, reg, cfg.heuristic, cfg.share_constraints, cfg.stream, cfg.limit, stats,
                           cfg.max_ground_iter, retain=bool(cfg.trace_model_graph))
        for m in sets:
            print(format_interpretation(m), file=out)
        if cfg.dot_eval:
            Path(cfg.dot_eval).write_text(evaluation_graph_dot(E), encoding="utf-8")
        if cfg.trace_model_graph and A is not None:
            Path(cfg.trace_model_graph).write_text(answer_set_graph_dot(A), encoding="utf-8")
        if cfg.stats:
            elapsed = time.perf_counter() - t0
            print(f"units: {stats.units}  unit evaluations: {stats.unit_evaluations}  "
                  f"joins: {stats.joins_defined}/{stats.joins_attempted}  "
                  f"candidates: {stats.solve.candidates}  oracle calls: {reg.calls}  "
                  f"time: {elapsed:.3f}s", file=err)
        return EXIT_OK
    except GroundingDiverged as e:
        print(f"grounding diverged: {e}", file=err)
        return EXIT_DIVERGED
    except ParseError as e:
        for d in e.diagnostics:
            print(f"line {d.line}, column {d.column}: {d.message}", file=err)
        return EXIT_USAGE
    except (HexError, OSError) as e:
        print(f"error: {e}", file=err)
        return EXIT_USAGE


def compare_heuristics(P: Program, reg: OracleRegistry) -> dict[str, RunStats]:
    """Solve with every heuristic (greedy also with sharing) and check they agree."""
    results: dict[str, RunStats] = {}
    reference = None
    for name, heuristic, share in (("monolithic", "monolithic", False), ("trivial", "trivial", False),
                                   ("greedy", "greedy", False), ("greedy+sharing", "greedy", True)):
        stats = RunStats()
        sets, _, _ = solve(P, reg, heuristic, share, stats=stats)
        if reference is None:
            reference = set(sets)
        elif set(sets) != reference:
            raise AssertionError(f"heuristic {name} disagrees on the answer sets")
        results[name] = stats
    return results


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hexeval", description="Evaluate HEX programs.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    s = sub.add_parser("solve", help="compute answer sets")
    s.add_argument("inputs", nargs="+", metavar="FILE")
    s.add_argument("--oracle", action="append", default=[], metavar="FILE", help=".etab table oracle")
    s.add_argument("--heuristic", choices=HEURISTICS, default="greedy")
    s.add_argument("--share-constraints", action="store_true")
    s.add_argument("--stream", action="store_true", help="enumerate answer sets on demand")
    s.add_argument("-n", type=int, default=None, metavar="N", help="stop after N answer sets")
    s.add_argument("--ground-only", action="store_true")
    s.add_argument("--max-ground-iter", type=int, default=DEFAULT_MAX_ITER, metavar="N")
    s.add_argument("--dot-deps", metavar="F")
    s.add_argument("--dot-eval", metavar="F")
    s.add_argument("--trace-model-graph", metavar="F")
    s.add_argument("--stats", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    g = sub.add_parser("gen", help="write a benchmark instance")
    g.add_argument("kind", choices=("rs", "mcs"))
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".", metavar="DIR")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if args.cmd == "gen":
        try:
            hex_path, etab_path = bench_generate(args.kind, args.size, args.seed, args.out)
        except HexError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        print(hex_path)
        print(etab_path)
        return EXIT_OK
    try:
        cfg = RunConfig(args.inputs, args.oracle, args.heuristic, args.share_constraints, args.stream, args.n,
                        args.ground_only, args.max_ground_iter, args.dot_deps, args.dot_eval,
                        args.trace_model_graph, args.stats, args.seed)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
