"""Evaluation units, evaluation graphs and decomposition heuristics.

An edge ``(u, v)`` means unit ``u`` depends on unit ``v``; ``v`` is then a
predecessor of ``u`` in evaluation order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import networkx as nx

from .core import Program, Rule, ground_heads
from .deps import RuleDependencyGraph, _q, is_generalized_bottom, rule_dependencies, scc_condensation
from .external import OracleRegistry


@dataclass
class EvaluationGraph:
    units: dict[int, frozenset[Rule]]
    edges: set[tuple[int, int]] = field(default_factory=set)
    final: Optional[int] = None

    def copy(self) -> "EvaluationGraph":
        return EvaluationGraph(dict(self.units), set(self.edges), self.final)

    def ids(self) -> list[int]:
        return sorted(self.units)

    def preds(self, u: int) -> list[int]:
        return sorted(v for (a, v) in self.edges if a == u)

    def dependents(self, v: int) -> list[int]:
        return sorted(a for (a, b) in self.edges if b == v)

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.units)
        g.add_edges_from(self.edges)
        return g

    def units_of(self, r: Rule) -> list[int]:
        return [u for u in self.ids() if r in self.units[u]]

    def rules(self) -> set[Rule]:
        return set().union(*self.units.values()) if self.units else set()


def _program(rules: Iterable[Rule]) -> Program:
    return Program(tuple(sorted(set(rules), key=str)))


def unit_closures(E: EvaluationGraph, u: int) -> tuple[frozenset[Rule], frozenset[Rule]]:
    below: set[Rule] = set()
    for w in nx.descendants(E.digraph(), u):
        below |= E.units[w]
    return frozenset(below), frozenset(below | E.units[u])


def validate_evaluation_graph(P: Program, E: EvaluationGraph, reg: OracleRegistry,
                              consts: Optional[Iterable[str]] = None,
                              G: Optional[RuleDependencyGraph] = None) -> list[str]:
    v: list[str] = []
    g = E.digraph()
    for a, b in E.edges:
        if a not in E.units or b not in E.units:
            v.append(f"edge ({a},{b}) refers to an unknown unit")
        elif a == b:
            v.append(f"self-loop at unit {a}")
    if not nx.is_directed_acyclic_graph(g):
        v.append("graph is cyclic")
    prules = set(P.rules)
    covered = E.rules()
    for r in prules - covered:
        v.append(f"(a) rule not covered: {r}")
    for r in covered - prules:
        v.append(f"(a) unit contains foreign rule: {r}")
    for r in prules:
        if not r.is_constraint and len(E.units_of(r)) != 1:
            v.append(f"(b) non-constraint in {len(E.units_of(r))} units: {r}")
    G = G or rule_dependencies(P, reg)
    for (i, j), labels in G.edges.items():
        r, s = G.rules[i], G.rules[j]
        ur, us = E.units_of(r), E.units_of(s)
        if "n" in labels:
            for a in ur:
                for b in us:
                    if a != b and (a, b) not in E.edges:
                        v.append(f"(c) missing edge ({a},{b}) for {r} ->n {s}")
        if "m" in labels and ur:
            if not any(all(b == a or (a, b) in E.edges for b in us) for a in ur):
                v.append(f"(d) no unit of {r} covers all units of {s}")
    cs = set(consts) if consts is not None else P.constants()
    heads = {u: ground_heads(E.units[u], cs) for u in E.ids()}
    for a, b in itertools.combinations(E.ids(), 2):
        common = heads[a] & heads[b]
        if common:
            v.append(f"ground heads of units {a} and {b} overlap: {sorted(map(str, common))[:3]}")
    return v


def compute_fai(E: EvaluationGraph, v: int) -> set[int]:
    """Units reachable from ``v`` by two paths that share only their endpoints."""
    g = E.digraph()
    out = set()
    for w in nx.descendants(g, v):
        f = nx.DiGraph()
        for x in g.nodes:
            if x not in (v, w):
                f.add_edge(("in", x), ("out", x), capacity=1)
        for a, b in g.edges:
            src = ("out", a) if a != v else "s"
            dst = ("in", b) if b != w else "t"
            if a == w or b == v:
                continue
            f.add_edge(src, dst, capacity=1)
        if "s" in f and "t" in f and nx.maximum_flow_value(f, "s", "t") >= 2:
            out.add(w)
    return out


def add_final_unit(E: EvaluationGraph) -> EvaluationGraph:
    E2 = E.copy()
    fid = max(E.units, default=0) + 1
    E2.units[fid] = frozenset()
    E2.edges |= {(fid, u) for u in E.units}
    E2.final = fid
    return E2


# -- heuristics ----------------------------------------------------------------


def heuristic_monolithic(P: Program, reg: Optional[OracleRegistry] = None) -> EvaluationGraph:
    return EvaluationGraph({1: frozenset(P.rules)})


def _from_components(comps: list[frozenset[Rule]], edges: set[tuple[int, int]]) -> EvaluationGraph:
    return EvaluationGraph({k + 1: c for k, c in enumerate(comps)}, {(a + 1, b + 1) for a, b in edges})


def heuristic_trivial(P: Program, reg: OracleRegistry) -> EvaluationGraph:
    comps, edges = scc_condensation(rule_dependencies(P, reg))
    return _from_components(comps, edges)


def _renumber(E: EvaluationGraph) -> EvaluationGraph:
    """Relabel units 1..k so that every unit comes after its predecessors."""
    g = E.digraph().reverse()
    order = list(nx.lexicographical_topological_sort(g))
    new = {u: k + 1 for k, u in enumerate(order)}
    return EvaluationGraph({new[u]: E.units[u] for u in order}, {(new[a], new[b]) for a, b in E.edges})


def heuristic_greedy(P: Program, reg: OracleRegistry) -> EvaluationGraph:
    G = rule_dependencies(P, reg)
    E = heuristic_trivial(P, reg)
    units = dict(E.units)
    edges = set(E.edges)

    def blocked(a: frozenset, b: frozenset) -> bool:
        for x, y in ((a, b), (b, a)):
            for r in x:
                if r.has_external() and any(s in y for s in G.targets(r)):
                    return True
        return False

    while True:
        g = nx.DiGraph()
        g.add_nodes_from(units)
        g.add_edges_from(edges)
        out = {u: frozenset(b for (a, b) in edges if a == u) for u in units}
        inc = {u: frozenset(a for (a, b) in edges if b == u) for u in units}
        merged = False
        for u, v in itertools.combinations(sorted(units), 2):
            same_deps = out[u] and out[u] == out[v]
            same_users = inc[u] and inc[u] == inc[v]
            if not (same_deps or same_users):
                continue
            if blocked(units[u], units[v]):
                continue
            if nx.has_path(g, u, v) or nx.has_path(g, v, u):
                continue
            units[u] = units[u] | units.pop(v)
            edges = {(u if a == v else a, u if b == v else b) for a, b in edges}
            edges = {(a, b) for a, b in edges if a != b}
            merged = True
            break
        if not merged:
            break
    return _renumber(EvaluationGraph(units, edges))


def _sharing_is_covered(E: EvaluationGraph, c: Rule, targets: set[Rule]) -> bool:
    """Every closure u^< and u^<= holding c has one copy of c that sees all of c's targets there.

    Without this a join can combine models that each satisfy their own copy
    of c while their union violates it.
    """
    g = E.digraph()
    below = {u: nx.descendants(g, u) for u in E.units}
    for u in E.units:
        for closure in (below[u], below[u] | {u}):
            homes = [y for y in closure if c in E.units[y]]
            if not homes:
                continue
            seen = {t for w in closure for t in targets if t in E.units[w]}
            if not any(seen <= {t for w in below[y] | {y} for t in targets if t in E.units[w]} for y in homes):
                return False
    return True


def push_shareable_constraints(P: Program, E: EvaluationGraph, reg: OracleRegistry) -> EvaluationGraph:
    """Copy constraints into further units where they can prune models early.

    A constraint c is copied into unit u when c depends on some rule of u,
    every nonmonotonic dependency of c is satisfied inside u or a direct
    predecessor of u, and the copy keeps every closure containing c covered
    by a single copy (see ``_sharing_is_covered``). Units are tried in id order.
    """
    G = rule_dependencies(P, reg)
    E2 = E.copy()
    for c in P.rules:
        if not c.is_constraint:
            continue
        m_targets, n_targets = G.targets(c, "m"), G.targets(c, "n")
        for u in E.ids():
            if u == E.final or c in E2.units[u]:
                continue
            local = E.units[u]
            if not (m_targets | n_targets) & local:
                continue
            direct = set(local).union(*(E.units[w] for w in E.preds(u)))
            if not n_targets <= direct:
                continue
            trial = E2.copy()
            trial.units[u] = trial.units[u] | {c}
            if _sharing_is_covered(trial, c, m_targets | n_targets):
                E2 = trial
    return E2


def check_closure_bottoms(E: EvaluationGraph, u: int, reg: OracleRegistry) -> bool:
    below, below_eq = unit_closures(E, u)
    R = {r for r in below if not r.is_constraint}
    if not is_generalized_bottom(_program(below_eq), R, below, reg):
        return False
    sub = _program(below)
    G = rule_dependencies(sub, reg)
    for w in E.preds(u):
        _, w_eq = unit_closures(E, w)
        Rw = {r for r in w_eq if not r.is_constraint}
        if not is_generalized_bottom(sub, Rw, w_eq, reg, G):
            return False
    return True


def evaluation_graph_dot(E: EvaluationGraph) -> str:
    lines = ["digraph evaluation {"]
    for u in E.ids():
        name = "final" if u == E.final else f"u{u}"
        body = "\\n".join(str(r) for r in sorted(E.units[u], key=str))
        lines.append(f"  u{u} [shape=box,label={_q(name + ': ' + body)}];")
    for a, b in sorted(E.edges):
        lines.append(f"  u{a} -> u{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def build_evaluation_graph(P: Program, reg: OracleRegistry, heuristic: str = "greedy",
                           share_constraints: bool = False) -> EvaluationGraph:
    makers = {"monolithic": heuristic_monolithic, "trivial": heuristic_trivial, "greedy": heuristic_greedy}
    try:
        E = makers[heuristic](P, reg)
    except KeyError:
        raise ValueError(f"unknown heuristic {heuristic!r}") from None
    if share_constraints:
        E = push_shareable_constraints(P, E, reg)
    return E
