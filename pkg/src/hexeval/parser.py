"""Recursive-descent parser for the ``.hex`` surface syntax."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .core import Atom, BuiltinAtom, ExternalAtom, Program, Rule, is_var
from .errors import ParseDiagnostic, ParseError

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|%[^\n]*)
  | (?P<nl>\n)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>[0-9]+)
  | (?P<op>:-|!=|[=|(),.\[\]&])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


class _Abort(Exception):
    pass


def tokenize(text: str) -> tuple[list[Token], list[ParseDiagnostic]]:
    toks: list[Token] = []
    diags: list[ParseDiagnostic] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            if text[pos] == '"':
                diags.append(ParseDiagnostic(line, col, "unterminated string"))
            else:
                diags.append(ParseDiagnostic(line, col, f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(Token(kind, m.group(), line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks, diags


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0
        self.diags: list[ParseDiagnostic] = []
        self.arity: dict[str, int] = {}

    # helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text == text

    def fail(self, tok: Token, msg: str):
        self.diags.append(ParseDiagnostic(tok.line, tok.col, msg))
        raise _Abort

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.peek()
            self.fail(t, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def recover(self) -> None:
        while self.peek().kind != "eof":
            if self.next().text == ".":
                return

    # grammar
    def term(self) -> str:
        t = self.peek()
        if t.kind in ("ident", "string", "number"):
            self.i += 1
            return t.text
        self.fail(t, f"expected a term, found {t.text or 'end of input'!r}")

    def terms_until(self, close: str) -> tuple[str, ...]:
        out = []
        if self.at(close):
            self.next()
            return ()
        while True:
            out.append(self.term())
            if self.at(","):
                self.next()
                continue
            self.expect(close)
            return tuple(out)

    def atom(self) -> Atom:
        t = self.peek()
        if t.kind != "ident":
            self.fail(t, f"expected an atom, found {t.text or 'end of input'!r}")
        if is_var(t.text):
            nxt = self.peek(1)
            if nxt.kind == "op" and nxt.text == "(":
                self.fail(t, f"higher-order atom with variable predicate {t.text!r}")
            self.fail(t, f"predicate {t.text!r} must start with a lowercase letter")
        self.next()
        args: tuple[str, ...] = ()
        if self.at("("):
            self.next()
            args = self.terms_until(")")
        known = self.arity.setdefault(t.text, len(args))
        if known != len(args):
            self.diags.append(ParseDiagnostic(
                t.line, t.col, f"predicate {t.text!r} used with arities {known} and {len(args)}", "warning"))
        return Atom(t.text, args)

    def external(self) -> ExternalAtom:
        amp = self.expect("&")
        name = self.peek()
        if name.kind != "ident" or is_var(name.text):
            self.fail(name, "expected external predicate name after '&'")
        self.next()
        ins: tuple[str, ...] = ()
        outs: tuple[str, ...] = ()
        if self.at("["):
            self.next()
            ins = self.terms_until("]")
        if self.at("("):
            self.next()
            outs = self.terms_until(")")
        return ExternalAtom(name.text, ins, outs)

    def literal(self):
        t = self.peek()
        if t.kind == "ident" and t.text == "not" and not (self.peek(1).kind == "op" and self.peek(1).text in "(,.=!="):
            self.next()
            if self.at("&"):
                return False, self.external()
            return False, self.atom()
        if self.at("&"):
            return True, self.external()
        nxt = self.peek(1)
        if t.kind in ("ident", "string", "number") and nxt.kind == "op" and nxt.text in ("=", "!="):
            left = self.term()
            op = self.next().text
            return True, BuiltinAtom(op, left, self.term())
        return True, self.atom()

    def statement(self) -> Rule:
        head: list[Atom] = []
        if not self.at(":-"):
            head.append(self.atom())
            while True:
                if self.at("|"):
                    self.next()
                elif self.peek().kind == "ident" and self.peek().text == "v" and self.peek(1).kind == "ident":
                    self.next()
                else:
                    break
                head.append(self.atom())
        pos, neg = [], []
        if self.at(":-"):
            start = self.next()
            if self.at("."):
                self.fail(start, "empty rule body")
            while True:
                positive, lit = self.literal()
                (pos if positive else neg).append(lit)
                if self.at(","):
                    self.next()
                    continue
                break
        if not self.at("."):
            t = self.peek()
            msg = "unterminated rule (missing '.')" if t.kind == "eof" else f"expected '.', found {t.text!r}"
            self.fail(t, msg)
        self.next()
        return Rule(tuple(head), tuple(pos), tuple(neg))

    def program(self) -> list[Rule]:
        rules = []
        while self.peek().kind != "eof":
            try:
                rules.append(self.statement())
            except _Abort:
                self.recover()
        return rules


def parse_with_diagnostics(text: str) -> tuple[Optional[Program], list[ParseDiagnostic]]:
    toks, diags = tokenize(text)
    p = _Parser(toks)
    rules = p.program()
    diags = diags + p.diags
    if any(d.severity == "error" for d in diags):
        return None, diags
    return Program(tuple(rules)), diags


def parse_program(text: str) -> Program:
    prog, diags = parse_with_diagnostics(text)
    if prog is None:
        raise ParseError([d for d in diags if d.severity == "error"])
    return prog


def parse_rule(text: str) -> Rule:
    prog = parse_program(text)
    if len(prog) != 1:
        raise ValueError(f"expected exactly one rule, got {len(prog)}")
    return prog.rules[0]


def format_program(P) -> str:
    return "".join(str(r) + "\n" for r in P)
