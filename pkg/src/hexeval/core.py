"""Abstract syntax for HEX programs plus the basic semantic operators.

Terms are plain strings. A term is a variable when it starts with an
uppercase letter or an underscore; everything else (lowercase identifiers,
quoted strings, integers) is a constant.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

Term = str


def is_var(t: Term) -> bool:
    return t[:1].isupper() or t[:1] == "_"


def _sub(t: Term, theta: Mapping[str, str]) -> Term:
    return theta.get(t, t) if is_var(t) else t


@dataclass(frozen=True, order=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return not any(is_var(a) for a in self.args)

    def variables(self) -> set[str]:
        return {a for a in self.args if is_var(a)}

    def subst(self, theta: Mapping[str, str]) -> "Atom":
        return Atom(self.pred, tuple(_sub(a, theta) for a in self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True, order=True)
class ExternalAtom:
    name: str
    inputs: tuple[Term, ...] = ()
    outputs: tuple[Term, ...] = ()

    def is_ground(self) -> bool:
        return not any(is_var(a) for a in self.inputs + self.outputs)

    def variables(self) -> set[str]:
        return {a for a in self.inputs + self.outputs if is_var(a)}

    def subst(self, theta: Mapping[str, str]) -> "ExternalAtom":
        return ExternalAtom(
            self.name,
            tuple(_sub(a, theta) for a in self.inputs),
            tuple(_sub(a, theta) for a in self.outputs),
        )

    def __str__(self) -> str:
        return f"&{self.name}[{','.join(self.inputs)}]({','.join(self.outputs)})"


@dataclass(frozen=True, order=True)
class BuiltinAtom:
    op: str  # "=" or "!="
    left: Term
    right: Term

    def is_ground(self) -> bool:
        return not (is_var(self.left) or is_var(self.right))

    def variables(self) -> set[str]:
        return {a for a in (self.left, self.right) if is_var(a)}

    def subst(self, theta: Mapping[str, str]) -> "BuiltinAtom":
        return BuiltinAtom(self.op, _sub(self.left, theta), _sub(self.right, theta))

    def holds(self) -> bool:
        same = self.left == self.right
        return same if self.op == "=" else not same

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


BodyAtom = Union[Atom, ExternalAtom, BuiltinAtom]
Interpretation = frozenset  # frozenset[Atom]


@dataclass(frozen=True)
class Rule:
    head: tuple[Atom, ...] = ()
    pos: tuple[BodyAtom, ...] = ()
    neg: tuple[Union[Atom, ExternalAtom], ...] = ()

    @property
    def is_constraint(self) -> bool:
        return not self.head and bool(self.pos or self.neg)

    @property
    def is_fact(self) -> bool:
        return bool(self.head) and not self.pos and not self.neg

    def body(self) -> tuple:
        return self.pos + self.neg

    def is_ground(self) -> bool:
        return all(a.is_ground() for a in self.head + self.pos + self.neg)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for a in self.head + self.pos + self.neg:
            out |= a.variables()
        return out

    def has_external(self) -> bool:
        return any(isinstance(a, ExternalAtom) for a in self.pos + self.neg)

    def subst(self, theta: Mapping[str, str]) -> "Rule":
        return Rule(
            tuple(a.subst(theta) for a in self.head),
            tuple(a.subst(theta) for a in self.pos),
            tuple(a.subst(theta) for a in self.neg),
        )

    def constants(self) -> set[str]:
        out: set[str] = set()
        for a in self.head + self.pos + self.neg:
            if isinstance(a, Atom):
                out.add(a.pred)
                out.update(t for t in a.args if not is_var(t))
            elif isinstance(a, ExternalAtom):
                out.update(t for t in a.inputs + a.outputs if not is_var(t))
            else:
                out.update(t for t in (a.left, a.right) if not is_var(t))
        return out

    def __str__(self) -> str:
        head = " | ".join(str(a) for a in self.head)
        body = [str(a) for a in self.pos] + [f"not {a}" for a in self.neg]
        if not body:
            return f"{head}."
        return f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}."


@dataclass(frozen=True)
class Program:
    """An ordered, duplicate-free collection of rules."""

    rules: tuple[Rule, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(dict.fromkeys(self.rules)))

    @classmethod
    def of(cls, rules: Iterable[Rule]) -> "Program":
        return cls(tuple(rules))

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __contains__(self, r: object) -> bool:
        return r in self.rules

    def constants(self) -> set[str]:
        out: set[str] = set()
        for r in self.rules:
            out |= r.constants()
        return out

    def is_ground(self) -> bool:
        return all(r.is_ground() for r in self.rules)

    def __str__(self) -> str:
        return "\n".join(str(r) for r in self.rules)


def canonical(I: Iterable[Atom]) -> list[Atom]:
    return sorted(I)


def format_interpretation(I: Iterable[Atom]) -> str:
    return "{" + ", ".join(str(a) for a in canonical(I)) + "}"


def body_true(I: frozenset, r: Rule, reg) -> bool:
    for a in r.pos:
        if isinstance(a, Atom):
            if a not in I:
                return False
        elif isinstance(a, ExternalAtom):
            if not reg.evaluate(a, I):
                return False
        elif not a.holds():
            return False
    for a in r.neg:
        if isinstance(a, Atom):
            if a in I:
                return False
        elif reg.evaluate(a, I):
            return False
    return True


def satisfies(I: frozenset, r: Rule, reg) -> bool:
    """I |= r for a ground rule r."""
    if not body_true(I, r, reg):
        return True
    return any(h in I for h in r.head)


def is_model(I: frozenset, P: Iterable[Rule], reg) -> bool:
    return all(satisfies(I, r, reg) for r in P)


def flp_reduct(P: Program, I: frozenset, reg) -> Program:
    return Program(tuple(r for r in P.rules if body_true(I, r, reg)))


def ground_rule(r: Rule, consts: Iterable[str]) -> set[Rule]:
    vs = sorted(r.variables())
    if not vs:
        inst = [r]
    else:
        cs = sorted(consts)
        inst = (r.subst(dict(zip(vs, combo))) for combo in itertools.product(cs, repeat=len(vs)))
    out = set()
    for g in inst:
        builtins = [a for a in g.pos if isinstance(a, BuiltinAtom)]
        if not all(b.holds() for b in builtins):
            continue
        if builtins:
            g = Rule(g.head, tuple(a for a in g.pos if not isinstance(a, BuiltinAtom)), g.neg)
        out.add(g)
    return out


def ground_heads(P: Iterable[Rule], consts: Iterable[str]) -> set[Atom]:
    consts = list(consts)
    out: set[Atom] = set()
    for r in P:
        if not r.head:
            continue
        # only head variables and builtin filters decide which head instances exist
        skeleton = Rule(r.head, tuple(a for a in r.pos if isinstance(a, BuiltinAtom)))
        for g in ground_rule(skeleton, consts):
            out.update(g.head)
    return out


def facts_of(I: Iterable[Atom]) -> Program:
    return Program(tuple(Rule((a,)) for a in canonical(I)))
