"""Answer sets of ground HEX programs.

The main solver is a guess-and-check procedure. Every ground external atom
whose value is not already fixed by the facts gets a replacement variable
that the search guesses freely. Candidates are total assignments that
satisfy all rules and the support condition. Each candidate is then checked
in three steps: the guessed external values must agree with the oracles, the
candidate must be a model, and it must be a minimal model of its FLP reduct.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .core import Atom, ExternalAtom, Program, Rule, body_true, facts_of, is_model, satisfies
from .errors import UniverseTooLarge
from .external import OracleRegistry
from .grounding import ground_hex

BRUTE_FORCE_LIMIT = 24


@dataclass
class SolveStats:
    candidates: int = 0      # search leaves that went through the check pipeline
    deterministic: int = 0   # programs settled by propagation, checked without search
    reduct_checks: int = 0
    oracle_calls: int = 0

    def add(self, other: "SolveStats") -> None:
        self.candidates += other.candidates
        self.deterministic += other.deterministic
        self.reduct_checks += other.reduct_checks
        self.oracle_calls += other.oracle_calls


class _Compiled:
    """Integer encoding of a ground program.

    Variables 0..n-1 are ordinary atoms, n..n+k-1 are external atoms. A rule
    is (head, body) where body is a tuple of (variable, wanted_value).
    """

    def __init__(self, P: Program, reg: OracleRegistry):
        self.reg = reg
        atoms: set[Atom] = set()
        exts: set[ExternalAtom] = set()
        for r in P.rules:
            atoms.update(r.head)
            for a in r.pos + r.neg:
                (exts if isinstance(a, ExternalAtom) else atoms).add(a)
        self.atoms = sorted(atoms)
        self.exts = sorted(exts)
        n = len(self.atoms)
        self.n = n
        idx = {a: i for i, a in enumerate(self.atoms)}
        idx.update({e: n + j for j, e in enumerate(self.exts)})
        self.idx = idx
        self.rules: list[tuple[tuple[int, ...], tuple[tuple[int, bool], ...]]] = []
        for r in P.rules:
            head = tuple(sorted({idx[h] for h in r.head}))
            body = tuple(dict.fromkeys([(idx[a], True) for a in r.pos] + [(idx[a], False) for a in r.neg]))
            self.rules.append((head, body))
        self.head_rules: list[list[int]] = [[] for _ in range(n)]
        for k, (head, _) in enumerate(self.rules):
            for h in head:
                self.head_rules[h].append(k)
        # ordinary atoms each external atom reads
        self.ext_inputs: list[tuple[int, ...]] = []
        for e in self.exts:
            d = reg.check_arity(e)
            preds = set(d.input_predicates(e.inputs))
            self.ext_inputs.append(tuple(i for i, a in enumerate(self.atoms) if (a.pred, a.arity) in preds))

    def oracle(self, j: int, true_atoms: Iterable[int]) -> bool:
        ins = set(self.ext_inputs[j])
        I = frozenset(self.atoms[i] for i in true_atoms if i in ins)
        return self.reg.evaluate(self.exts[j], I)


def _propagate(c: _Compiled, val: list) -> bool:
    """Unit and support propagation to fixpoint. Returns False on conflict."""
    n = c.n
    changed = True
    while changed:
        changed = False
        for head, body in c.rules:
            unknown_lit = None
            n_unknown = 0
            sat = False
            for v, want in body:
                x = val[v]
                if x is None:
                    n_unknown += 1
                    unknown_lit = (v, want)
                elif x != want:
                    sat = True
                    break
            if sat:
                continue
            unknown_head = None
            n_head_unknown = 0
            for h in head:
                x = val[h]
                if x is True:
                    sat = True
                    break
                if x is None:
                    n_head_unknown += 1
                    unknown_head = h
            if sat:
                continue
            total = n_unknown + n_head_unknown
            if total == 0:
                return False
            if total == 1:
                if unknown_head is not None:
                    val[unknown_head] = True
                else:
                    v, want = unknown_lit
                    val[v] = not want
                changed = True
        for a in range(n):
            if val[a] is False:
                continue
            supported = False
            for k in c.head_rules[a]:
                head, body = c.rules[k]
                if any(val[v] is not None and val[v] != want for v, want in body):
                    continue
                if any(h != a and val[h] is True for h in head):
                    continue
                supported = True
                break
            if not supported:
                if val[a] is True:
                    return False
                val[a] = False
                changed = True
    return True


def _fix_externals(c: _Compiled, val: list, evaluated: set[int]) -> Optional[bool]:
    """Evaluate external atoms whose inputs are all fixed.

    Returns None on a clash with a value forced by propagation, else whether
    anything new was assigned.
    """
    changed = False
    for j in range(len(c.exts)):
        v = c.n + j
        if v in evaluated or not all(val[i] is not None for i in c.ext_inputs[j]):
            continue
        x = c.oracle(j, [i for i in c.ext_inputs[j] if val[i]])
        evaluated.add(v)
        if val[v] is None:
            val[v] = x
            changed = True
        elif val[v] != x:
            return None
    return changed


def _find_smaller_model(c: _Compiled, I: frozenset, ext_val: dict) -> bool:
    """Search for J strictly inside I that models the FLP reduct of I."""
    true_atoms = sorted(I)
    reduct = []
    for head, body in c.rules:
        ok = True
        for v, want in body:
            x = (v in I) if v < c.n else ext_val[v]
            if x != want:
                ok = False
                break
        if ok:
            reduct.append((head, body))
    if not reduct:
        return bool(true_atoms)
    # quick pass: drop a single atom
    for a in true_atoms:
        J = I - {a}
        if _models(c, J, reduct):
            return True
    if len(true_atoms) <= 1:
        return False
    val: dict[int, Optional[bool]] = {a: None for a in true_atoms}
    return _dpll_smaller(c, I, reduct, val, true_atoms)


def _lit_value(c: _Compiled, v: int, val: dict, I: frozenset) -> Optional[bool]:
    if v < c.n:
        if v not in I:
            return False
        return val[v]
    j = v - c.n
    ins = c.ext_inputs[j]
    if any(i in I and val[i] is None for i in ins):
        return None
    return c.oracle(j, [i for i in ins if i in I and val[i]])


def _models(c: _Compiled, J: frozenset, rules) -> bool:
    for head, body in rules:
        if any(h in J for h in head):
            continue
        fired = True
        for v, want in body:
            x = (v in J) if v < c.n else c.oracle(v - c.n, [i for i in c.ext_inputs[v - c.n] if i in J])
            if x != want:
                fired = False
                break
        if fired:
            return False
    return True


def _dpll_smaller(c: _Compiled, I: frozenset, reduct, val: dict, order: list[int]) -> bool:
    # propagate
    changed = True
    while changed:
        changed = False
        for head, body in reduct:
            n_unknown, last = 0, None
            sat = False
            for h in head:
                if h in I:
                    x = val[h]
                    if x is True:
                        sat = True
                        break
                    if x is None:
                        n_unknown += 1
                        last = ("h", h)
            if sat:
                continue
            for v, want in body:
                x = _lit_value(c, v, val, I)
                if x is None:
                    n_unknown += 1
                    last = ("b", v, want) if v < c.n else ("x",)
                elif x != want:
                    sat = True
                    break
            if sat:
                continue
            if n_unknown == 0:
                return False
            if n_unknown == 1 and last[0] != "x":
                if last[0] == "h":
                    val[last[1]] = True
                else:
                    val[last[1]] = not last[2]
                changed = True
        unknown = [a for a in order if val[a] is None]
        if not unknown and all(val[a] for a in order):
            return False
        if len(unknown) == 1 and all(val[a] for a in order if a != unknown[0]):
            val[unknown[0]] = False
            changed = True
    unknown = [a for a in order if val[a] is None]
    if not unknown:
        J = frozenset(a for a in order if val[a])
        return J != I and _models(c, J, reduct)
    a = unknown[0]
    for choice in (False, True):
        v2 = dict(val)
        v2[a] = choice
        if _dpll_smaller(c, I, reduct, v2, order):
            return True
    return False


def iter_answer_sets(P: Program, reg: OracleRegistry, stats: Optional[SolveStats] = None) -> Iterator[frozenset]:
    """Enumerate answer sets of a ground program in a fixed deterministic order."""
    stats = stats if stats is not None else SolveStats()
    calls0 = reg.calls
    c = _Compiled(P, reg)
    n, k = c.n, len(c.exts)
    val: list = [None] * (n + k)
    for a in range(n):
        if not c.head_rules[a]:
            val[a] = False
    # settle everything the facts already decide
    fixed_exts: set[int] = set()
    while True:
        consistent = _propagate(c, val)
        changed = _fix_externals(c, val, fixed_exts) if consistent else None
        if changed is None:
            stats.oracle_calls += reg.calls - calls0
            return
        if not changed:
            break
    if all(x is not None for x in val):
        stats.deterministic += 1
        I = frozenset(c.atoms[a] for a in range(n) if val[a])
        ok = is_model(I, P.rules, reg)
        if ok:
            stats.reduct_checks += 1
            Iidx = frozenset(a for a in range(n) if val[a])
            ok = not _find_smaller_model(c, Iidx, {n + j: val[n + j] for j in range(k)})
        stats.oracle_calls += reg.calls - calls0
        if ok:
            yield I
        return

    def leaf(val: list) -> Optional[frozenset]:
        stats.candidates += 1
        true_atoms = [a for a in range(n) if val[a]]
        for j in range(k):
            v = n + j
            if v not in fixed_exts and c.oracle(j, true_atoms) != val[v]:
                return None
        Iset = frozenset(true_atoms)
        stats.reduct_checks += 1
        ext_val = {n + j: val[n + j] for j in range(k)}
        if _find_smaller_model(c, Iset, ext_val):
            return None
        return frozenset(c.atoms[a] for a in true_atoms)

    stack = [val]
    while stack:
        cur = stack.pop()
        if not _propagate(c, cur):
            continue
        free = next((v for v in range(n + k) if cur[v] is None), None)
        if free is None:
            I = leaf(cur)
            if I is not None:
                stats.oracle_calls += reg.calls - calls0
                calls0 = reg.calls
                yield I
            continue
        for choice in (False, True):  # pushed so that True is explored first
            nxt = list(cur)
            nxt[free] = choice
            stack.append(nxt)
    stats.oracle_calls += reg.calls - calls0


def evaluate_ground_hex(P: Program, reg: OracleRegistry, stats: Optional[SolveStats] = None) -> set[frozenset]:
    return set(iter_answer_sets(P, reg, stats))


def check_answer_set(P: Program, I: Iterable[Atom], reg: OracleRegistry) -> bool:
    I = frozenset(I)
    if not is_model(I, P.rules, reg):
        return False
    c = _Compiled(P, reg)
    if any(a not in c.idx for a in I):
        return False  # atoms that no rule can derive are never in a minimal model
    Iidx = frozenset(c.idx[a] for a in I)
    ext_val = {c.n + j: c.oracle(j, Iidx) for j in range(len(c.exts))}
    return not _find_smaller_model(c, Iidx, ext_val)


def evaluate_lde_safe(u: Iterable[Rule], I: Iterable[Atom], reg: OracleRegistry,
                      stats: Optional[SolveStats] = None, max_iter: int = 64) -> list[frozenset]:
    """Answer sets of ``u`` extended by the facts ``I``, with ``I`` removed."""
    return list(iter_lde_safe(u, I, reg, stats, max_iter))


def iter_lde_safe(u: Iterable[Rule], I: Iterable[Atom], reg: OracleRegistry,
                  stats: Optional[SolveStats] = None, max_iter: int = 64) -> Iterator[frozenset]:
    """Lazy variant of :func:`evaluate_lde_safe`; grounding happens on first use."""
    I = frozenset(I)
    prog = Program(tuple(u) + facts_of(I).rules)
    ground = ground_hex(prog, reg, max_iter)
    for M in iter_answer_sets(ground, reg, stats):
        yield M - I


def enumerate_answer_sets_bruteforce(P: Program, reg: OracleRegistry) -> set[frozenset]:
    """Reference implementation straight from the definition of FLP answer sets."""
    heads = sorted({h for r in P.rules for h in r.head})
    if len(heads) > BRUTE_FORCE_LIMIT:
        raise UniverseTooLarge(f"{len(heads)} head atoms exceed the brute-force guard")
    # atoms of single-head facts belong to every model, so only the rest is enumerated
    facts = frozenset(r.head[0] for r in P.rules if r.is_fact and len(r.head) == 1)
    free = [h for h in heads if h not in facts]
    out = set()
    for mask in range(1 << len(free)):
        I = facts | {h for i, h in enumerate(free) if mask >> i & 1}
        if not all(satisfies(I, r, reg) for r in P.rules):
            continue
        reduct = [r for r in P.rules if body_true(I, r, reg)]
        members = sorted(I - facts)
        minimal = True
        for k in range(len(members)):
            for J in itertools.combinations(members, k):
                J = facts | frozenset(J)
                if all(satisfies(J, r, reg) for r in reduct):
                    minimal = False
                    break
            if not minimal:
                break
        if minimal:
            out.add(I)
    return out
