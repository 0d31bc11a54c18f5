"""Answer set graphs, the join, batch model building and streaming enumeration."""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx

from .core import Atom, Program
from .errors import DuplicateExpandedInterpretation, IncompleteGraph, JoinUndefined
from .evalgraph import EvaluationGraph, _program, compute_fai, unit_closures
from .external import OracleRegistry
from .grounding import DEFAULT_MAX_ITER, ground_hex
from .solver import SolveStats, check_answer_set, iter_lde_safe

INPUT, OUTPUT = "i", "o"


@dataclass(frozen=True)
class Vertex:
    id: int
    unit: int
    type: str
    int: frozenset
    succ: tuple[int, ...]


@dataclass
class RunStats:
    units: int = 0
    unit_evaluations: int = 0
    joins_attempted: int = 0
    joins_defined: int = 0
    solve: SolveStats = field(default_factory=SolveStats)

    @property
    def candidates(self) -> int:
        return self.solve.candidates


class AnswerSetGraph:
    """Vertices labelled with unit, type and interpretation; edges point to successors."""

    def __init__(self) -> None:
        self.vertices: dict[int, Vertex] = {}
        self._reach: dict[int, frozenset[int]] = {}
        self._expanded: dict[int, frozenset] = {}
        self._by_unit: dict[tuple[int, str], list[int]] = {}
        self.complete_units: set[int] = set()

    def __len__(self) -> int:
        return len(self.vertices)

    def add_vertex(self, unit: int, type_: str, content: Iterable[Atom], succ: Sequence[int] = ()) -> int:
        for s in succ:
            if s not in self.vertices:
                raise KeyError(f"unknown successor vertex {s}")
        vid = max(self.vertices, default=0) + 1
        v = Vertex(vid, unit, type_, frozenset(content), tuple(succ))
        self.vertices[vid] = v
        self._by_unit.setdefault((unit, type_), []).append(vid)
        return vid

    def reach(self, m: int) -> frozenset[int]:
        """Vertices reachable from ``m``, including ``m``."""
        r = self._reach.get(m)
        if r is None:
            r = frozenset({m}).union(*(self.reach(s) for s in self.vertices[m].succ))
            self._reach[m] = r
        return r

    def expanded(self, m: int) -> frozenset:
        e = self._expanded.get(m)
        if e is None:
            e = frozenset().union(*(self.vertices[w].int for w in self.reach(m)))
            self._expanded[m] = e
        return e

    def i_ints(self, u: int) -> list[int]:
        return list(self._by_unit.get((u, INPUT), ()))

    def o_ints(self, u: int) -> list[int]:
        return list(self._by_unit.get((u, OUTPUT), ()))

    def edges(self) -> set[tuple[int, int]]:
        return {(v.id, s) for v in self.vertices.values() for s in v.succ}

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges())
        return g


def expanded_interpretation(A: AnswerSetGraph, m: int) -> frozenset:
    return A.expanded(m)


def _fai_conflict(A: AnswerSetGraph, reach: Iterable[int], fai: set[int]) -> bool:
    seen: dict[int, int] = {}
    for w in reach:
        v = A.vertices[w]
        if v.type == OUTPUT and v.unit in fai:
            if seen.setdefault(v.unit, w) != w:
                return True
    return False


def join(E: EvaluationGraph, A: AnswerSetGraph, u: int, models: Sequence[int],
         fai: Optional[set[int]] = None) -> Optional[frozenset]:
    """Union of the given o-interpretations, or None if the join is undefined."""
    preds = E.preds(u)
    if len(models) != len(preds):
        raise ValueError(f"unit {u} has {len(preds)} predecessors, got {len(models)} models")
    for p, m in zip(preds, models):
        v = A.vertices[m]
        if v.type != OUTPUT or v.unit != p:
            raise ValueError(f"vertex {m} is not an o-interpretation at unit {p}")
    fai = compute_fai(E, u) if fai is None else fai
    reach = set().union(*(A.reach(m) for m in models)) if models else set()
    if _fai_conflict(A, reach, fai):
        return None
    return frozenset().union(*(A.vertices[m].int for m in models)) if models else frozenset()


def add_i_interpretation(E: EvaluationGraph, A: AnswerSetGraph, u: int, models: Sequence[int],
                         fai: Optional[set[int]] = None) -> int:
    content = join(E, A, u, models, fai)
    if content is None:
        raise JoinUndefined(f"join of {list(models)} at unit {u} is undefined")
    exp = content.union(*(A.expanded(m) for m in models))
    for m in A.i_ints(u):
        if A.expanded(m) == exp:
            raise DuplicateExpandedInterpretation(f"unit {u} already has i-interpretation {m} with this content")
    return A.add_vertex(u, INPUT, content, models)


def add_o_interpretation(A: AnswerSetGraph, u: int, m_in: int, content: Iterable[Atom]) -> int:
    v = A.vertices[m_in]
    if v.type != INPUT or v.unit != u:
        raise ValueError(f"vertex {m_in} is not an i-interpretation at unit {u}")
    content = frozenset(content)
    exp = content | A.expanded(m_in)
    for m in A.o_ints(u):
        if A.expanded(m) == exp:
            raise DuplicateExpandedInterpretation(f"unit {u} already has o-interpretation {m} with this content")
    return A.add_vertex(u, OUTPUT, content, (m_in,))


# -- validation ----------------------------------------------------------------


class _GroundCache:
    def __init__(self, E: EvaluationGraph, reg: OracleRegistry, max_iter: int):
        self.E, self.reg, self.max_iter = E, reg, max_iter
        self._cache: dict = {}

    def closure(self, u: int, strict: bool) -> Program:
        key = (u, strict)
        if key not in self._cache:
            below, below_eq = unit_closures(self.E, u)
            self._cache[key] = ground_hex(_program(below if strict else below_eq), self.reg, self.max_iter)
        return self._cache[key]


def validate_answer_set_graph(A: AnswerSetGraph, E: EvaluationGraph, reg: Optional[OracleRegistry] = None,
                              semantic: bool = True, max_iter: int = DEFAULT_MAX_ITER,
                              _ground: Optional[_GroundCache] = None) -> list[str]:
    """Structural i-graph conditions plus, if ``semantic``, the answer-set conditions."""
    out: list[str] = []
    if not nx.is_directed_acyclic_graph(A.digraph()):
        out.append("answer set graph is cyclic")
        return out
    g = E.digraph()
    for v in A.vertices.values():
        if v.unit not in E.units:
            out.append(f"vertex {v.id} at unknown unit {v.unit}")
            continue
        succ = [A.vertices[s] for s in v.succ]
        if v.type == OUTPUT:
            if len(succ) != 1 or succ[0].type != INPUT or succ[0].unit != v.unit:
                out.append(f"(IG-I) o-interpretation {v.id} needs exactly one i-interpretation at its unit")
        else:
            preds = E.preds(v.unit)
            got = sorted(s.unit for s in succ)
            if got != preds or any(s.type != OUTPUT for s in succ):
                out.append(f"(IG-O) i-interpretation {v.id} must use one o-interpretation per predecessor unit")
            reached: dict[int, set[int]] = {}
            for w in A.reach(v.id) - {v.id}:
                x = A.vertices[w]
                if x.type == OUTPUT:
                    reached.setdefault(x.unit, set()).add(w)
            for w in nx.descendants(g, v.unit):
                if len(reached.get(w, ())) != 1:
                    out.append(f"(IG-F) i-interpretation {v.id} reaches {len(reached.get(w, ()))} "
                               f"o-interpretations at unit {w}")
            if v.int != frozenset().union(*(s.int for s in succ)):
                out.append(f"i-interpretation {v.id} is not the union of its successors")
    for (u, t), ids in A._by_unit.items():
        exps = [A.expanded(m) for m in ids]
        if len(set(exps)) != len(exps):
            out.append(f"(IG-U) duplicate expanded {t}-interpretations at unit {u}")
    if semantic and not out:
        if reg is None:
            raise ValueError("semantic validation needs an oracle registry")
        gc = _ground or _GroundCache(E, reg, max_iter)
        for v in A.vertices.values():
            prog = gc.closure(v.unit, strict=v.type == INPUT)
            if not check_answer_set(prog, A.expanded(v.id), reg):
                kind = "u^<" if v.type == INPUT else "u^<="
                out.append(f"vertex {v.id}: expanded interpretation is not an answer set of {kind} of unit {v.unit}")
    return out


def answer_set_graph_dot(A: AnswerSetGraph) -> str:
    from .core import format_interpretation
    from .deps import _q

    lines = ["digraph answersets {"]
    for vid in sorted(A.vertices):
        v = A.vertices[vid]
        lines.append(f"  m{vid} [label={_q(f'm{vid}/{v.type} @u{v.unit} ' + format_interpretation(v.int))}];")
    for a, b in sorted(A.edges()):
        lines.append(f"  m{a} -> m{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- batch model building -------------------------------------------------------


def _debug_enabled(debug: Optional[bool]) -> bool:
    if debug is not None:
        return debug
    return os.environ.get("HEXEVAL_DEBUG_VALIDATE", "") not in ("", "0")


def _consistent_joins(E: EvaluationGraph, A: AnswerSetGraph, u: int, fai: set[int],
                      stats: RunStats) -> Iterator[tuple[int, ...]]:
    """Tuples of o-interpretations, one per predecessor, whose join is defined.

    Prefixes that already reach two o-interpretations at a FAI are pruned;
    every complete tuple is then confirmed by :func:`join`.
    """
    preds = E.preds(u)
    if not preds:
        stats.joins_attempted += 1
        stats.joins_defined += 1
        yield ()
        return

    def rec(k: int, chosen: tuple, reach: frozenset) -> Iterator[tuple]:
        if k == len(preds):
            stats.joins_attempted += 1
            if join(E, A, u, chosen, fai) is not None:
                stats.joins_defined += 1
                yield chosen
            return
        for m in A.o_ints(preds[k]):
            r = reach | A.reach(m)
            if _fai_conflict(A, r, fai):
                stats.joins_attempted += 1
                continue
            yield from rec(k + 1, chosen + (m,), r)

    yield from rec(0, (), frozenset())


def build_answer_set_graph(E: EvaluationGraph, reg: OracleRegistry, stats: Optional[RunStats] = None,
                           debug: Optional[bool] = None, max_iter: int = DEFAULT_MAX_ITER
                           ) -> tuple[AnswerSetGraph, set[frozenset]]:
    """Build the answer set graph unit by unit; the final unit's inputs are the answer sets."""
    if E.final is None:
        raise ValueError("evaluation graph needs a final unit (see add_final_unit)")
    stats = stats if stats is not None else RunStats()
    stats.units = len(E.units)
    debug = _debug_enabled(debug)
    gc = _GroundCache(E, reg, max_iter) if debug else None
    A = AnswerSetGraph()
    done: set[int] = set()

    def check() -> None:
        problems = validate_answer_set_graph(A, E, reg, max_iter=max_iter, _ground=gc)
        if problems:
            raise AssertionError("answer set graph invalid: " + "; ".join(problems[:5]))

    while True:
        eligible = [u for u in E.ids() if u not in done and all(p in done for p in E.preds(u))]
        if not eligible:
            raise IncompleteGraph("no unit can be evaluated; is the evaluation graph acyclic?")
        u = eligible[0]
        fai = compute_fai(E, u)
        for models in _consistent_joins(E, A, u, fai, stats):
            add_i_interpretation(E, A, u, models, fai)
            if debug:
                check()
        if u == E.final:
            return A, {A.vertices[m].int for m in A.i_ints(u)}
        for m in A.i_ints(u):
            stats.unit_evaluations += 1
            for out in iter_lde_safe(E.units[u], A.expanded(m), reg, stats.solve, max_iter):
                add_o_interpretation(A, u, m, out)
                if debug:
                    check()
        done.add(u)
        A.complete_units.add(u)


def build_answer_sets(E: EvaluationGraph, reg: OracleRegistry, stats: Optional[RunStats] = None,
                      debug: Optional[bool] = None, max_iter: int = DEFAULT_MAX_ITER) -> set[frozenset]:
    return build_answer_set_graph(E, reg, stats, debug, max_iter)[1]


def answer_sets_from_complete_graph(A: AnswerSetGraph, E: EvaluationGraph) -> set[frozenset]:
    """Answer sets read off a complete graph by picking one o-interpretation per unit.

    A pick is admissible when everything reachable from it contains exactly
    the picked o-interpretations and no others.
    """
    units = [u for u in E.ids() if u != E.final]
    missing = [u for u in units if u not in A.complete_units]
    if missing:
        raise IncompleteGraph(f"units {missing} are not output-complete")
    order = list(reversed(list(nx.lexicographical_topological_sort(E.digraph().reverse()))))
    order = [u for u in order if u != E.final]
    result: set[frozenset] = set()

    def rec(k: int, pick: dict[int, int]) -> None:
        if k == len(order):
            result.add(frozenset().union(*(A.vertices[m].int for m in pick.values())))
            return
        u = order[k]
        if u in pick:
            rec(k + 1, pick)
            return
        for m in A.o_ints(u):
            new = dict(pick)
            ok = True
            for w in A.reach(m):
                x = A.vertices[w]
                if x.type == OUTPUT and new.setdefault(x.unit, w) != w:
                    ok = False
                    break
            if ok:
                rec(k + 1, new)

    rec(0, {})
    return result


# -- streaming ------------------------------------------------------------------


def _stream_order(E: EvaluationGraph) -> list[int]:
    """Depth-first postorder from the final unit, predecessors taken right to left."""
    order: list[int] = []
    seen: set[int] = set()

    def visit(u: int) -> None:
        seen.add(u)
        for p in reversed(E.preds(u)):
            if p not in seen:
                visit(p)
        order.append(u)

    visit(E.final)
    return order


class AnswerSetStream:
    """Enumerates answer sets on demand while keeping one input and one output model per unit.

    The units (without the final one) form an odometer in dependency order.
    Advancing unit k discards the models of all later units, which are then
    rebuilt from the current models of their predecessors. ``refcount_o``
    tracks how many current input models point at a unit's current output.
    """

    def __init__(self, E: EvaluationGraph, reg: OracleRegistry, stats: Optional[RunStats] = None,
                 retain: bool = False, max_iter: int = DEFAULT_MAX_ITER):
        if E.final is None:
            raise ValueError("evaluation graph needs a final unit (see add_final_unit)")
        self.E, self.reg, self.max_iter = E, reg, max_iter
        self.stats = stats if stats is not None else RunStats()
        self.stats.units = len(E.units)
        self.order = [u for u in _stream_order(E) if u != E.final]
        self.preds = {u: E.preds(u) for u in E.units}
        self.cur_i: dict[int, Optional[frozenset]] = {u: None for u in self.order}
        self.cur_o: dict[int, Optional[frozenset]] = {u: None for u in self.order}
        self.refcount_o: dict[int, int] = {u: 0 for u in self.order}
        self._iters: dict[int, Optional[Iterator[frozenset]]] = {u: None for u in self.order}
        self.live = {u: 0 for u in self.order}
        self.max_live_i = {u: 0 for u in self.order}
        self.max_live_o = {u: 0 for u in self.order}
        self._started = False
        self._done = False
        self.graph: Optional[AnswerSetGraph] = AnswerSetGraph() if retain else None
        self._ids: dict = {}
        self._cur_vid: dict[int, Optional[int]] = {u: None for u in self.order}
        self._cur_in_vid: dict[int, Optional[int]] = {u: None for u in self.order}

    # bookkeeping
    def _count(self) -> None:
        for u in self.order:
            self.max_live_i[u] = max(self.max_live_i[u], int(self.cur_i[u] is not None))
            self.max_live_o[u] = max(self.max_live_o[u], int(self.cur_o[u] is not None))

    def _expanded_o(self, u: int) -> frozenset:
        return self.cur_o[u] | self.cur_i[u]

    def _release(self, u: int) -> None:
        if self.cur_i[u] is not None:
            for p in self.preds[u]:
                self.refcount_o[p] -= 1
        self.cur_i[u] = None
        self.cur_o[u] = None
        self._iters[u] = None

    def _open(self, u: int) -> None:
        """Build the input of ``u`` from the current outputs of its predecessors."""
        inp = frozenset().union(*(self._expanded_o(p) for p in self.preds[u])) if self.preds[u] else frozenset()
        self.stats.joins_attempted += 1
        self.stats.joins_defined += 1
        for p in self.preds[u]:
            self.refcount_o[p] += 1
        self.cur_i[u] = inp
        self.stats.unit_evaluations += 1
        self._iters[u] = iter_lde_safe(self.E.units[u], inp, self.reg, self.stats.solve, self.max_iter)
        if self.graph is not None:
            self._record_input(u)

    def _step(self, u: int) -> bool:
        """Move ``u`` to its next output model; False when exhausted."""
        if self.refcount_o[u] != 0:
            raise AssertionError(f"output of unit {u} replaced while still referenced")
        nxt = next(self._iters[u], None)
        if nxt is None:
            self.cur_o[u] = None
            return False
        self.cur_o[u] = nxt
        if self.graph is not None:
            self._record_output(u)
        self._count()
        return True

    def _run(self, k: int, advance: bool) -> bool:
        """Drive the odometer from position k until all positions hold a model.

        With ``advance`` the unit at k moves to its next output; otherwise it is
        opened on a fresh input. An exhausted unit hands control back to the
        position before it.
        """
        n = len(self.order)
        while 0 <= k < n:
            u = self.order[k]
            if advance:
                for j in range(n - 1, k, -1):
                    self._release(self.order[j])
            else:
                self._open(u)
                self._count()
            if self._step(u):
                k, advance = k + 1, False
            else:
                self._release(u)
                k, advance = k - 1, True
        return k == n

    def _current(self) -> frozenset:
        out = frozenset().union(*(self.cur_o[u] for u in self.order)) if self.order else frozenset()
        if self.graph is not None:
            self._record_final()
        return out

    def next(self) -> Optional[frozenset]:
        """The next answer set, or None once the stream is exhausted."""
        if self._done:
            return None
        if not self._started:
            self._started = True
            ok = self._run(0, advance=False)
        else:
            ok = self._run(len(self.order) - 1, advance=True)
        if not ok:
            self._done = True
            for u in self.order:
                self._release(u)
            return None
        return self._current()

    def __iter__(self) -> Iterator[frozenset]:
        while True:
            m = self.next()
            if m is None:
                return
            yield m

    @property
    def done(self) -> bool:
        return self._done

    # optional recording of everything seen, for tests
    def _vertex(self, u: int, t: str, content: frozenset, succ: tuple, exp: frozenset) -> int:
        key = (u, t, exp)
        if key not in self._ids:
            self._ids[key] = self.graph.add_vertex(u, t, content, succ)
        return self._ids[key]

    def _record_input(self, u: int) -> None:
        succ = tuple(self._cur_vid[p] for p in self.preds[u])
        content = frozenset().union(*(self.cur_o[p] for p in self.preds[u])) if succ else frozenset()
        self._cur_in_vid[u] = self._vertex(u, INPUT, content, succ, self.cur_i[u])

    def _record_output(self, u: int) -> None:
        m_in = self._cur_in_vid[u]
        self._cur_vid[u] = self._vertex(u, OUTPUT, self.cur_o[u], (m_in,), self._expanded_o(u))

    def _record_final(self) -> None:
        u = self.E.final
        succ = tuple(self._cur_vid[p] for p in self.preds[u])
        content = frozenset().union(*(self.cur_o[p] for p in self.preds[u]))
        self._vertex(u, INPUT, content, succ, content)


def answer_sets_on_demand(E: EvaluationGraph, reg: OracleRegistry, stats: Optional[RunStats] = None,
                          retain: bool = False, max_iter: int = DEFAULT_MAX_ITER) -> AnswerSetStream:
    return AnswerSetStream(E, reg, stats, retain, max_iter)
