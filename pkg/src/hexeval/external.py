"""External predicates: signatures, oracles, projections and table oracles.

An external predicate is described by its extensional behaviour: given the
input constants and, for predicate-typed positions, the projection of the
interpretation onto that predicate, it either enumerates the output tuples
(``outputs``) or decides membership of one output tuple (``check``). Because
both callables only ever see projections, every oracle built this way is
extensional by construction.
"""
from __future__ import annotations

import itertools
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

from .core import Atom, ExternalAtom, is_var
from .errors import (
    ArityMismatch,
    InfiniteOutputGuard,
    ParseDiagnostic,
    ParseError,
    SignatureConflict,
    UniverseTooLarge,
    UnknownExternalPredicate,
)

log = logging.getLogger(__name__)

CONST = "const"
InputType = Union[str, int]  # "const" or a predicate arity

Projection = Union[str, frozenset]
OutputsFn = Callable[[tuple, tuple], Iterable[tuple]]
CheckFn = Callable[[tuple, tuple, tuple], bool]


def project(t: InputType, I: Iterable[Atom], p: str) -> Projection:
    if t == CONST:
        return p
    return frozenset((p,) + a.args for a in I if a.pred == p and len(a.args) == t)


@dataclass(frozen=True)
class ExternalPredicateDef:
    name: str
    signature: tuple[InputType, ...]
    out_arity: int
    monotonic: bool
    outputs: Optional[OutputsFn] = field(default=None, compare=False)
    check: Optional[CheckFn] = field(default=None, compare=False)

    @property
    def in_arity(self) -> int:
        return len(self.signature)

    def projections(self, I: Iterable[Atom], ins: tuple) -> tuple:
        I = I if isinstance(I, (set, frozenset)) else frozenset(I)
        return tuple(project(t, I, y) for t, y in zip(self.signature, ins))

    def decide(self, ins: tuple, projs: tuple, outs: tuple) -> bool:
        if self.check is not None:
            return bool(self.check(ins, projs, outs))
        return tuple(outs) in set(map(tuple, self.outputs(ins, projs)))

    def enumerate(self, ins: tuple, projs: tuple) -> set[tuple]:
        if self.outputs is None:
            raise InfiniteOutputGuard(f"&{self.name} cannot enumerate outputs for {ins}")
        return set(map(tuple, self.outputs(ins, projs)))

    def oracle(self, I: Iterable[Atom], ins: tuple, outs: tuple) -> bool:
        return self.decide(tuple(ins), self.projections(I, tuple(ins)), tuple(outs))

    def input_predicates(self, ins: tuple) -> list[tuple[str, int]]:
        """(predicate, arity) pairs read by an atom with the given inputs."""
        return [(y, t) for t, y in zip(self.signature, ins) if t != CONST and not is_var(y)]


class OracleRegistry:
    def __init__(self, defs: Iterable[ExternalPredicateDef] = ()):
        self._defs: dict[str, ExternalPredicateDef] = {}
        self.calls = 0
        for d in defs:
            self.register(d)

    def register(self, d: ExternalPredicateDef) -> None:
        old = self._defs.get(d.name)
        if old is not None and old is not d:
            raise SignatureConflict(f"&{d.name} is already registered")
        self._defs[d.name] = d

    def __contains__(self, name: str) -> bool:
        return name in self._defs

    def names(self) -> list[str]:
        return sorted(self._defs)

    def get(self, name: str) -> ExternalPredicateDef:
        try:
            return self._defs[name]
        except KeyError:
            raise UnknownExternalPredicate(f"&{name} is not registered") from None

    def check_arity(self, a: ExternalAtom) -> ExternalPredicateDef:
        d = self.get(a.name)
        if len(a.inputs) != d.in_arity or len(a.outputs) != d.out_arity:
            raise ArityMismatch(
                f"&{a.name} expects {d.in_arity} inputs and {d.out_arity} outputs, "
                f"got {len(a.inputs)} and {len(a.outputs)}"
            )
        return d

    def evaluate(self, a: ExternalAtom, I: Iterable[Atom]) -> bool:
        d = self.check_arity(a)
        self.calls += 1
        return d.oracle(I, a.inputs, a.outputs)


def eval_oracle(reg: OracleRegistry, g: str, I: Iterable[Atom], ins, outs) -> bool:
    return reg.evaluate(ExternalAtom(g, tuple(ins), tuple(outs)), I)


def extensional_eval(reg: OracleRegistry, g: str, ins: tuple, projections: tuple) -> set[tuple]:
    d = reg.get(g)
    if len(ins) != d.in_arity or len(projections) != d.in_arity:
        raise ArityMismatch(f"&{g} expects {d.in_arity} inputs")
    reg.calls += 1
    return d.enumerate(tuple(ins), tuple(projections))


def _universe_constants(universe: Iterable[Atom]) -> list[str]:
    cs: set[str] = set()
    for a in universe:
        cs.add(a.pred)
        cs.update(a.args)
    return sorted(cs)


def check_monotonic(reg: OracleRegistry, g: str, universe: Iterable[Atom]) -> bool:
    """Exhaustively test f(I) => f(I') for I subset of I' over ``universe``.

    Only pairs differing in one atom are evaluated; monotonicity along those
    covering pairs implies it for all pairs.
    """
    d = reg.get(g)
    atoms = sorted(set(universe))
    if 3 ** len(atoms) > 2 ** 16:
        raise UniverseTooLarge(f"{len(atoms)} atoms exceed the subset-pair guard")
    consts = _universe_constants(atoms)
    in_tuples = list(itertools.product(consts, repeat=d.in_arity))
    out_tuples = None if d.outputs is not None else list(itertools.product(consts, repeat=d.out_arity))
    n = len(atoms)
    for mask in range(1 << n):
        I = frozenset(atoms[i] for i in range(n) if mask >> i & 1)
        for i in range(n):
            if mask >> i & 1:
                continue
            J = I | {atoms[i]}
            for ins in in_tuples:
                pi, pj = d.projections(I, ins), d.projections(J, ins)
                if pi == pj:
                    continue
                if out_tuples is None:
                    if not d.enumerate(ins, pi) <= d.enumerate(ins, pj):
                        return False
                else:
                    for outs in out_tuples:
                        if d.decide(ins, pi, outs) and not d.decide(ins, pj, outs):
                            return False
    return True


# -- built-in oracle families -------------------------------------------------


def _unquote(c: str) -> str:
    return c[1:-1] if len(c) >= 2 and c[0] == c[-1] == '"' else c


_PLAIN = re.compile(r"[a-z][A-Za-z0-9_]*\Z|[0-9]+\Z")


def concat_constants(a: str, b: str) -> str:
    s = _unquote(a) + _unquote(b)
    return s if _PLAIN.match(s) else '"' + s.replace('"', "") + '"'


def concat_def() -> ExternalPredicateDef:
    return ExternalPredicateDef(
        "concat", (CONST, CONST), 1, True,
        outputs=lambda ins, projs: {(concat_constants(ins[0], ins[1]),)},
    )


def not_def() -> ExternalPredicateDef:
    """&not[p](c) is true iff p(c) is false."""
    return ExternalPredicateDef(
        "not", (1,), 1, False,
        check=lambda ins, projs, outs: (ins[0],) + tuple(outs) not in projs[0],
    )


def reach_outputs(ins: tuple, projs: tuple) -> set[tuple]:
    succ: dict[str, list[str]] = {}
    for _, x, y in projs[0]:
        succ.setdefault(x, []).append(y)
    seen: set[str] = set()
    todo = deque(succ.get(ins[1], ()))
    while todo:
        x = todo.popleft()
        if x in seen:
            continue
        seen.add(x)
        todo.extend(succ.get(x, ()))
    return {(x,) for x in seen}


def reach_def() -> ExternalPredicateDef:
    """&reach[edge,a](X): X is reachable from a by a non-empty edge path."""
    return ExternalPredicateDef("reach", (2, CONST), 1, True, outputs=reach_outputs)


def builtin_registry() -> OracleRegistry:
    return OracleRegistry([concat_def(), not_def(), reach_def()])


# -- table oracles -------------------------------------------------------------


@dataclass(frozen=True)
class Guard:
    position: int  # 1-based input position
    positive: bool
    args: tuple[str, ...]


@dataclass(frozen=True)
class TableRow:
    emit: tuple[str, ...]
    guards: tuple[Guard, ...] = ()


@dataclass(frozen=True)
class ConditionalTableOracle:
    name: str
    signature: tuple[InputType, ...]
    out_arity: int
    monotonic: bool
    rows: tuple[TableRow, ...]

    def outputs(self, ins: tuple, projs: tuple) -> set[tuple]:
        out = set()
        for row in self.rows:
            ok = True
            for gd in row.guards:
                present = (ins[gd.position - 1],) + gd.args in projs[gd.position - 1]
                if present != gd.positive:
                    ok = False
                    break
            if ok:
                out.add(row.emit)
        return out

    def definition(self) -> ExternalPredicateDef:
        return ExternalPredicateDef(self.name, self.signature, self.out_arity, self.monotonic, outputs=self.outputs)


_TERM = r'"[^"]*"|[A-Za-z0-9_]+'
_HEADER = re.compile(r"&([a-z][A-Za-z0-9_]*)\s+in=\(([^)]*)\)\s+out=(\d+)\s+monotonic=(yes|no)\s*\Z")
_TUPLE = re.compile(r"\(\s*((?:" + _TERM + r")(?:\s*,\s*(?:" + _TERM + r"))*)?\s*\)")
_ROW = re.compile(r"emit\s*(\([^)]*\))\s*(?:\.|if\s+(.*))\Z")
_GUARD = re.compile(r"(has|hasnot)\s+(\d+)\s*(\([^)]*\))\Z")


def _tuple(text: str) -> Optional[tuple[str, ...]]:
    m = _TUPLE.fullmatch(text.strip())
    if not m:
        return None
    inner = m.group(1)
    return tuple(re.findall(_TERM, inner)) if inner else ()


def parse_table_oracle(text: str) -> ConditionalTableOracle:
    header = None
    rows: list[TableRow] = []
    diags: list[ParseDiagnostic] = []
    nonmono_guard = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if line.startswith("&"):
            if header is not None:
                raise SignatureConflict(f"line {lineno}: second declaration in one table")
            m = _HEADER.match(line)
            if not m:
                diags.append(ParseDiagnostic(lineno, 1, "malformed table header"))
                break
            types: list[InputType] = []
            for t in (x.strip() for x in m.group(2).split(",")):
                if not t:
                    continue
                if t == CONST:
                    types.append(CONST)
                elif t.isdigit():
                    types.append(int(t))
                else:
                    diags.append(ParseDiagnostic(lineno, 1, f"bad input type {t!r}"))
            header = (m.group(1), tuple(types), int(m.group(3)), m.group(4) == "yes")
            continue
        if header is None:
            diags.append(ParseDiagnostic(lineno, 1, "row before table header"))
            continue
        line = line.rstrip()
        m = _ROW.match(line)
        emit = _tuple(m.group(1)) if m else None
        if not m or emit is None:
            diags.append(ParseDiagnostic(lineno, 1, "malformed row"))
            continue
        if len(emit) != header[2]:
            diags.append(ParseDiagnostic(lineno, 1, f"emit tuple has {len(emit)} values, expected {header[2]}"))
            continue
        guards = []
        if m.group(2) is not None:
            cond = m.group(2).rstrip(".").strip()
            for part in re.split(r"\s+and\s+", cond):
                gm = _GUARD.match(part.strip())
                args = _tuple(gm.group(3)) if gm else None
                if not gm or args is None:
                    diags.append(ParseDiagnostic(lineno, 1, f"malformed guard {part!r}"))
                    continue
                pos = int(gm.group(2))
                if not 1 <= pos <= len(header[1]) or header[1][pos - 1] == CONST:
                    diags.append(ParseDiagnostic(lineno, 1, f"guard position {pos} is not a predicate input"))
                    continue
                if len(args) != header[1][pos - 1]:
                    diags.append(ParseDiagnostic(lineno, 1, f"guard tuple arity differs from input type"))
                    continue
                positive = gm.group(1) == "has"
                nonmono_guard |= not positive
                guards.append(Guard(pos, positive, args))
        rows.append(TableRow(emit, tuple(guards)))
    if header is None and not diags:
        diags.append(ParseDiagnostic(1, 1, "missing table header"))
    if diags:
        raise ParseError(diags)
    name, sig, out, mono = header
    if mono and nonmono_guard:
        log.warning("&%s declared monotonic but uses hasnot guards; treating as nonmonotonic", name)
        mono = False
    return ConditionalTableOracle(name, sig, out, mono, tuple(rows))


def load_table_oracle(path: Union[str, Path]) -> ExternalPredicateDef:
    return parse_table_oracle(Path(path).read_text(encoding="utf-8")).definition()
