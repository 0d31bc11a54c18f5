"""Atom- and rule-level dependency relations, SCCs and splitting checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import networkx as nx

from .core import Atom, ExternalAtom, Program, Rule, is_var
from .external import OracleRegistry


def unifies(a: Atom, b: Atom) -> bool:
    """First-order unification of two atoms with variables renamed apart."""
    if a.pred != b.pred or len(a.args) != len(b.args):
        return False
    bind: dict = {}

    def find(t):
        while t in bind:
            t = bind[t]
        return t

    for x, y in zip(a.args, b.args):
        x = find(("L", x) if is_var(x) else x)
        y = find(("R", y) if is_var(y) else y)
        if x == y:
            continue
        if isinstance(x, tuple):
            bind[x] = y
        elif isinstance(y, tuple):
            bind[y] = x
        else:
            return False
    return True


def _external_targets(a: ExternalAtom, head: Atom, reg: OracleRegistry) -> bool:
    d = reg.check_arity(a)
    return any(head.pred == p and head.arity == t for p, t in d.input_predicates(a.inputs))


# -- atom dependency graph -----------------------------------------------------

AnyAtom = Union[Atom, ExternalAtom]


@dataclass
class AtomDependencyGraph:
    vertices: set = field(default_factory=set)
    edges: set = field(default_factory=set)  # (src, dst, label) with label in m, n, e_m, e_n

    def labels(self, a, b) -> set[str]:
        return {l for (x, y, l) in self.edges if x == a and y == b}


def atom_dependencies(P: Program, reg: OracleRegistry) -> AtomDependencyGraph:
    rules = [r for r in P.rules if not r.is_fact]
    g = AtomDependencyGraph()
    for r in rules:
        for a in r.head + r.pos + r.neg:
            if isinstance(a, (Atom, ExternalAtom)):
                g.vertices.add(a)
    # targets may be heads of any rule, facts included; sources come from non-facts
    heads = list(dict.fromkeys(h for r in P.rules for h in r.head))
    for r in rules:
        for h in r.head:
            for b in r.pos:
                if isinstance(b, (Atom, ExternalAtom)):
                    g.edges.add((h, b, "m"))
            for b in r.neg:
                g.edges.add((h, b, "n"))
            for h2 in r.head:
                if h2 != h:
                    g.edges.add((h, h2, "m"))
        for b in r.pos + r.neg:
            if isinstance(b, Atom):
                for h in heads:
                    if unifies(b, h):
                        g.edges.add((b, h, "m"))
            elif isinstance(b, ExternalAtom):
                label = "e_m" if reg.check_arity(b).monotonic else "e_n"
                for h in heads:
                    if _external_targets(b, h, reg):
                        g.edges.add((b, h, label))
    g.vertices.update(x for e in g.edges for x in e[:2])
    return g


# -- rule dependency graph -----------------------------------------------------


@dataclass
class RuleDependencyGraph:
    rules: tuple[Rule, ...]
    edges: dict[tuple[int, int], set[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._pos = {r: i for i, r in enumerate(self.rules)}

    def add(self, i: int, j: int, label: str) -> None:
        self.edges.setdefault((i, j), set()).add(label)

    def index(self, r: Rule) -> int:
        return self._pos[r]

    def labeled(self) -> set[tuple[Rule, Rule, str]]:
        return {(self.rules[i], self.rules[j], l) for (i, j), ls in self.edges.items() for l in ls}

    def targets(self, r: Rule, label: str | None = None) -> set[Rule]:
        i = self.index(r)
        return {self.rules[j] for (a, j), ls in self.edges.items() if a == i and (label is None or label in ls)}

    def depends(self, r: Rule, s: Rule, label: str | None = None) -> bool:
        ls = self.edges.get((self.index(r), self.index(s)), set())
        return bool(ls) if label is None else label in ls

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.rules)))
        g.add_edges_from(self.edges)
        return g


def rule_dependencies(P: Union[Program, Iterable[Rule]], reg: OracleRegistry) -> RuleDependencyGraph:
    rules = P.rules if isinstance(P, Program) else Program(tuple(P)).rules
    g = RuleDependencyGraph(rules)
    for i, r in enumerate(rules):
        exts = [(a, True) for a in r.pos if isinstance(a, ExternalAtom)]
        exts += [(a, False) for a in r.neg if isinstance(a, ExternalAtom)]
        ext_mono = {a: reg.check_arity(a).monotonic for a, _ in exts}
        for j, s in enumerate(rules):
            if i == j:
                continue
            for h in s.head:
                if any(isinstance(b, Atom) and unifies(b, h) for b in r.pos):
                    g.add(i, j, "m")
                if any(isinstance(b, Atom) and unifies(b, h) for b in r.neg):
                    g.add(i, j, "n")
                if any(unifies(h2, h) for h2 in r.head):
                    g.add(i, j, "m")
                    g.add(j, i, "m")
                for a, positive in exts:
                    if _external_targets(a, h, reg):
                        g.add(i, j, "m" if positive and ext_mono[a] else "n")
    return g


def scc_condensation(G: RuleDependencyGraph) -> tuple[list[frozenset[Rule]], set[tuple[int, int]]]:
    """SCCs in an order where every component comes after the ones it depends on."""
    dg = G.digraph()
    cond = nx.condensation(dg)
    order = list(reversed(list(nx.lexicographical_topological_sort(cond, key=lambda c: min(cond.nodes[c]["members"])))))
    pos = {c: k for k, c in enumerate(order)}
    comps = [frozenset(G.rules[i] for i in cond.nodes[c]["members"]) for c in order]
    edges = {(pos[a], pos[b]) for a, b in cond.edges}
    return comps, edges


def is_rule_splitting_set(P: Program, R: Iterable[Rule], reg: OracleRegistry, G: RuleDependencyGraph | None = None) -> bool:
    R = set(R)
    if not R <= set(P.rules):
        return False
    G = G or rule_dependencies(P, reg)
    for (i, j) in G.edges:
        if G.rules[i] in R and G.rules[j] not in R:
            return False
    return True


def is_generalized_bottom(P: Program, R: Iterable[Rule], B: Iterable[Rule], reg: OracleRegistry,
                          G: RuleDependencyGraph | None = None) -> bool:
    R, B = set(R), set(B)
    G = G or rule_dependencies(P, reg)
    if not is_rule_splitting_set(P, R, reg, G) or not R <= B <= set(P.rules):
        return False
    outside = set(P.rules) - B
    for c in B - R:
        if not c.is_constraint:
            return False
        if any(s in outside for s in G.targets(c, "n")):
            return False
    return True


# -- DOT export ----------------------------------------------------------------


def _q(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def atom_graph_dot(g: AtomDependencyGraph) -> str:
    lines = ["digraph atoms {"]
    for v in sorted(g.vertices, key=str):
        lines.append(f"  {_q(v)};")
    for a, b, l in sorted(g.edges, key=lambda e: (str(e[0]), str(e[1]), e[2])):
        lines.append(f"  {_q(a)} -> {_q(b)} [label={_q(l)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def rule_graph_dot(G: RuleDependencyGraph) -> str:
    lines = ["digraph rules {"]
    for i, r in enumerate(G.rules):
        lines.append(f"  r{i} [label={_q(r)}];")
    for (i, j), ls in sorted(G.edges.items()):
        lines.append(f"  r{i} -> r{j} [label={_q(','.join(sorted(ls)))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
