"""Safety checking and fixpoint grounding with value invention."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import networkx as nx

from .core import Atom, BuiltinAtom, ExternalAtom, Program, Rule, is_var
from .errors import GroundingDiverged, UnsafeRule
from .external import CONST, OracleRegistry

log = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 64
SUBSET_CAP = 2 ** 12


def safe_variables(r: Rule) -> set[str]:
    safe: set[str] = set()
    for a in r.pos:
        if isinstance(a, Atom):
            safe |= a.variables()
    changed = True
    while changed:
        changed = False
        for a in r.pos:
            if isinstance(a, ExternalAtom) and all(not is_var(t) or t in safe for t in a.inputs):
                new = {t for t in a.outputs if is_var(t)} - safe
                if new:
                    safe |= new
                    changed = True
    return safe


@dataclass
class SafetyReport:
    violations: list[tuple[Rule, str]] = field(default_factory=list)
    warnings: list[tuple[Rule, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _feeding_predicates(r: Rule, a: ExternalAtom, reg: OracleRegistry) -> set[str]:
    """Predicates whose atoms influence the value of external atom ``a`` in ``r``."""
    d = reg.check_arity(a)
    preds = {p for p, _ in d.input_predicates(a.inputs)}
    in_vars = {t for t in a.inputs if is_var(t)}
    for b in r.pos:
        if isinstance(b, Atom) and b.variables() & in_vars:
            preds.add(b.pred)
    return preds


def check_program_safety(P: Program, reg: OracleRegistry) -> SafetyReport:
    rep = SafetyReport()
    pg = nx.DiGraph()  # head predicate -> predicates it reads
    for r in P.rules:
        for h in r.head:
            pg.add_node(h.pred)
            for b in r.pos + r.neg:
                if isinstance(b, Atom):
                    pg.add_edge(h.pred, b.pred)
                elif isinstance(b, ExternalAtom):
                    for p in _feeding_predicates(r, b, reg):
                        pg.add_edge(h.pred, p)
    for r in P.rules:
        safe = safe_variables(r)
        for v in sorted(r.variables() - safe):
            rep.violations.append((r, v))
        head_vars = set().union(*(h.variables() for h in r.head)) if r.head else set()
        for a in r.pos:
            if not isinstance(a, ExternalAtom):
                continue
            out_vars = {t for t in a.outputs if is_var(t)} & head_vars
            if not out_vars:
                continue
            cyclic = set()
            for h in r.head:
                for p in _feeding_predicates(r, a, reg):
                    if p in pg and h.pred in pg and nx.has_path(pg, p, h.pred):
                        cyclic |= {h.pred, p}
            if not cyclic:
                continue
            cycle_preds = set()
            for h in r.head:
                if h.pred in pg:
                    cycle_preds |= {q for q in pg if nx.has_path(pg, h.pred, q) and nx.has_path(pg, q, h.pred)}
            for v in sorted(out_vars):
                guarded = any(
                    isinstance(b, Atom) and v in b.variables() and b.pred not in cycle_preds for b in r.pos
                )
                if not guarded:
                    rep.warnings.append((r, f"output variable {v} of {a} may invent unboundedly many values"))
    return rep


@dataclass
class GroundingReport:
    program: Program
    iterations: int
    invented: frozenset
    cap_hit: bool = False


class _Grounder:
    def __init__(self, P: Program, reg: OracleRegistry):
        self.P = P
        self.reg = reg
        self.derivable: set[Atom] = set()
        self.by_pred: dict[tuple[str, int], list[Atom]] = {}
        self._ext_cache: dict = {}

    def set_derivable(self, atoms: set[Atom]) -> None:
        self.derivable = atoms
        self.by_pred = {}
        for a in sorted(atoms):
            self.by_pred.setdefault((a.pred, a.arity), []).append(a)
        self._ext_cache = {}

    # external evaluation over subsets of the derivable atoms
    def _relevant(self, d, ins) -> list[Atom]:
        out = []
        for p, t in d.input_predicates(ins):
            out.extend(self.by_pred.get((p, t), ()))
        return sorted(set(out))

    def candidate_outputs(self, a: ExternalAtom) -> set[tuple]:
        key = (a.name, a.inputs)
        if key in self._ext_cache:
            return self._ext_cache[key]
        d = self.reg.check_arity(a)
        if d.monotonic:
            outs = self.reg_enum(d, a.inputs, self.derivable)
        else:
            rel = self._relevant(d, a.inputs)
            if 2 ** len(rel) > SUBSET_CAP:
                raise GroundingDiverged(0, f"&{a.name} input extension of {len(rel)} atoms exceeds subset cap")
            outs = set()
            for k in range(len(rel) + 1):
                for S in itertools.combinations(rel, k):
                    outs |= self.reg_enum(d, a.inputs, set(S))
        self._ext_cache[key] = outs
        return outs

    def reg_enum(self, d, ins, I) -> set[tuple]:
        self.reg.calls += 1
        return d.enumerate(ins, d.projections(I, ins))

    def body_supportable(self, g: Rule) -> bool:
        """Is there an I within the derivable atoms satisfying the positive body of ``g``?"""
        exts = [a for a in g.pos if isinstance(a, ExternalAtom)]
        if not exts:
            return True
        forced = {a for a in g.pos if isinstance(a, Atom)}
        nonmono = [a for a in exts if not self.reg.check_arity(a).monotonic]
        if not nonmono:
            return all(self.reg.evaluate(a, self.derivable) for a in exts)
        rel: set[Atom] = set()
        for a in nonmono:
            rel.update(self._relevant(self.reg.get(a.name), a.inputs))
        free = sorted(rel - forced)
        if 2 ** len(free) > SUBSET_CAP:
            raise GroundingDiverged(0, "nonmonotonic input extension exceeds subset cap")
        base = self.derivable - set(free)
        for k in range(len(free) + 1):
            for S in itertools.combinations(free, k):
                I = base | set(S)
                if all(self.reg.evaluate(a, I) for a in exts):
                    return True
        return False

    # substitution enumeration
    def instances(self, r: Rule) -> list[Rule]:
        out: list[Rule] = []
        self._extend(r, list(r.pos), {}, out)
        return out

    def _extend(self, r: Rule, todo: list, theta: dict, out: list) -> None:
        if not todo:
            missing = r.variables() - set(theta)
            if missing:
                raise UnsafeRule(f"unsafe variables {sorted(missing)} in rule {r}")
            g = r.subst(theta)
            g = Rule(g.head, tuple(a for a in g.pos if not isinstance(a, BuiltinAtom)), g.neg)
            if self.body_supportable(g):
                out.append(g)
            return
        k, score = self._pick(todo, theta)
        lit = todo[k]
        if score >= 9:
            raise UnsafeRule(f"cannot bind the variables of {lit} in rule {r}")
        rest = todo[:k] + todo[k + 1:]
        if isinstance(lit, BuiltinAtom):
            b = lit.subst(theta)
            if b.is_ground():
                if b.holds():
                    self._extend(r, rest, theta, out)
            elif b.op == "=":
                var, val = (b.left, b.right) if is_var(b.left) else (b.right, b.left)
                self._extend(r, rest, {**theta, var: val}, out)
            return
        if isinstance(lit, Atom):
            pat = lit.subst(theta)
            for cand in self.by_pred.get((pat.pred, pat.arity), ()):
                th = _match(pat.args, cand.args, theta)
                if th is not None:
                    self._extend(r, rest, th, out)
            return
        e = lit.subst(theta)
        if all(not is_var(t) for t in e.outputs):
            self._extend(r, rest, theta, out)  # pure filter, decided in body_supportable
            return
        for tup in sorted(self.candidate_outputs(e)):
            th = _match(e.outputs, tup, theta)
            if th is not None:
                self._extend(r, rest, th, out)

    def _pick(self, todo: list, theta: dict) -> int:
        best, best_score = 0, None
        for k, lit in enumerate(todo):
            if isinstance(lit, BuiltinAtom):
                unbound = [v for v in lit.variables() if v not in theta]
                score = 0 if not unbound else (1 if lit.op == "=" and len(unbound) == 1 else 9)
            elif isinstance(lit, ExternalAtom):
                if any(is_var(t) and t not in theta for t in lit.inputs):
                    score = 9
                elif all(not is_var(t) or t in theta for t in lit.outputs):
                    score = 0
                else:
                    score = 3
            else:
                score = 2
            if best_score is None or score < best_score:
                best, best_score = k, score
        return best, best_score


def _match(pattern: tuple, values: tuple, theta: dict) -> Optional[dict]:
    th = theta
    for p, v in zip(pattern, values):
        if is_var(p):
            bound = th.get(p)
            if bound is None:
                if th is theta:
                    th = dict(theta)
                th[p] = v
            elif bound != v:
                return None
        elif p != v:
            return None
    return th


def _rule_key(r: Rule) -> str:
    return str(r)


def ground_fixpoint(P: Program, reg: OracleRegistry, max_iter: int = DEFAULT_MAX_ITER) -> GroundingReport:
    """Iterate the grounding operator starting from the program's ground facts.

    ``iterations`` counts the applications that added new ground rules; a
    ground program without builtins is returned unchanged after one step.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    consts = P.constants()
    if P.is_ground() and not any(isinstance(a, BuiltinAtom) for r in P.rules for a in r.pos):
        return GroundingReport(P, 1, frozenset())
    gr = _Grounder(P, reg)
    current: dict[Rule, None] = {r: None for r in P.rules if r.is_fact and r.is_ground()}
    iterations = 0
    while True:
        gr.set_derivable({h for r in current for h in r.head})
        new = []
        for r in P.rules:
            for g in gr.instances(r):
                if g not in current:
                    new.append(g)
        if not new:
            break
        iterations += 1
        if iterations > max_iter:
            raise GroundingDiverged(max_iter)
        for g in new:
            current.setdefault(g, None)
    rules = sorted(current, key=_rule_key)
    ground = Program(tuple(rules))
    invented = ground.constants() - consts
    return GroundingReport(ground, iterations, frozenset(invented))


def ground_hex(P: Program, reg: OracleRegistry, max_iter: int = DEFAULT_MAX_ITER) -> Program:
    return ground_fixpoint(P, reg, max_iter).program
