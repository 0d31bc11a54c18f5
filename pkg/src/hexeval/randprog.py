"""Seeded random HEX programs for property tests and experiments."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .core import Atom, BuiltinAtom, ExternalAtom, Program, Rule
from .external import ConditionalTableOracle, Guard, OracleRegistry, TableRow, builtin_registry


@dataclass
class RandomConfig:
    max_rules: int = 6
    constants: tuple[str, ...] = ("a", "b", "c")
    predicates: tuple[str, ...] = ("p", "q", "r")
    max_externals: int = 2
    max_head: int = 2
    max_body: int = 3
    p_neg: float = 0.3
    p_var: float = 0.5
    invent: tuple[str, ...] = ("d",)


def random_table(rng: random.Random, name: str, pred_arity: int, constants, out_arity: int,
                 monotonic: bool) -> ConditionalTableOracle:
    rows = []
    for _ in range(rng.randint(0, 3)):
        guards = []
        for _ in range(rng.randint(0, 2)):
            args = tuple(rng.choice(constants) for _ in range(pred_arity))
            guards.append(Guard(1, monotonic or rng.random() < 0.5, args))
        emit = tuple(rng.choice(constants) for _ in range(out_arity))
        rows.append(TableRow(emit, tuple(guards)))
    mono = monotonic or all(g.positive for r in rows for g in r.guards)
    return ConditionalTableOracle(name, (pred_arity,), out_arity, mono, tuple(rows))


def random_ground_program(rng: random.Random, max_atoms: int = 10, max_rules: int = 8,
                          max_externals: int = 2) -> tuple[Program, OracleRegistry]:
    """Ground program over at most ``max_atoms`` head atoms and few external atoms."""
    consts = ["a", "b"]
    pool = [Atom("p", (c,)) for c in consts] + [Atom("q", (c,)) for c in consts] + [Atom(x) for x in "rstuvw"]
    pool = pool[:max_atoms]
    reg = builtin_registry()
    exts = []
    for k in range(rng.randint(0, max_externals)):
        pred = rng.choice(["p", "q"])
        out = rng.randint(0, 1)
        tab = random_table(rng, f"t{k}", 1, consts, out, rng.random() < 0.5)
        reg.register(tab.definition())
        exts.append(ExternalAtom(tab.name, (pred,), tuple(rng.choice(consts) for _ in range(out))))
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        head = tuple(rng.sample(pool, rng.randint(0, 2)))
        lits = [rng.choice(pool + exts) for _ in range(rng.randint(0 if head else 1, 3))] if pool else []
        pos, neg = [], []
        for l in lits:
            (neg if rng.random() < 0.35 else pos).append(l)
        if not head and not pos and not neg:
            continue
        rules.append(Rule(head, tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg))))
    return Program(tuple(rules)), reg


def _random_atom(rng: random.Random, cfg: RandomConfig, vars_: list[str], allow_var: bool) -> Atom:
    pred = rng.choice(cfg.predicates)
    arity = 1 if pred != cfg.predicates[-1] else 0
    args = tuple(
        rng.choice(vars_) if allow_var and vars_ and rng.random() < cfg.p_var else rng.choice(cfg.constants)
        for _ in range(arity)
    )
    return Atom(pred, args)


def random_program(rng: random.Random, cfg: RandomConfig | None = None) -> tuple[Program, OracleRegistry]:
    """Small safe non-ground program with table-oracle external atoms.

    Predicates except the last are unary; the last one is propositional. The
    tables may emit a constant outside the program (value invention).
    """
    cfg = cfg or RandomConfig()
    reg = builtin_registry()
    out_consts = list(cfg.constants) + list(cfg.invent)
    ext_templates = []
    for k in range(rng.randint(0, cfg.max_externals)):
        tab = random_table(rng, f"t{k}", 1, out_consts, 1, rng.random() < 0.6)
        reg.register(tab.definition())
        ext_templates.append((tab.name, rng.choice(cfg.predicates[:-1])))
    rules = []
    n_ext_atoms = 0
    for _ in range(rng.randint(1, cfg.max_rules)):
        vars_: list[str] = []
        pos: list = []
        neg: list = []
        for _ in range(rng.randint(0, cfg.max_body - 1)):
            a = _random_atom(rng, cfg, ["X", "Y"], True)
            vars_.extend(v for v in a.variables() if v not in vars_)
            pos.append(a)
        if ext_templates and n_ext_atoms < cfg.max_externals and rng.random() < 0.4:
            name, pred = rng.choice(ext_templates)
            outv = "Z" if rng.random() < 0.6 else rng.choice(out_consts)
            e = ExternalAtom(name, (pred,), (outv,))
            n_ext_atoms += 1
            if rng.random() < 0.75:
                pos.append(e)
                if outv == "Z":
                    vars_.append("Z")
            else:
                neg.append(ExternalAtom(name, (pred,), (rng.choice(out_consts),)))
        for _ in range(rng.randint(0, 1)):
            if rng.random() < cfg.p_neg:
                neg.append(_random_atom(rng, cfg, vars_, True))
        if len(vars_) >= 2 and rng.random() < 0.3:
            pos.append(BuiltinAtom("!=", vars_[0], vars_[1]))
        n_head = rng.randint(0 if (pos or neg) else 1, cfg.max_head)
        head = tuple(dict.fromkeys(_random_atom(rng, cfg, vars_, True) for _ in range(n_head)))
        rules.append(Rule(head, tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg))))
    return Program(tuple(rules)), reg


def program_constants_with_invention(P: Program, reg: OracleRegistry) -> set[str]:
    """Constants of P plus every constant a table oracle used in P could emit."""
    consts = set(P.constants())
    for r in P.rules:
        for a in r.pos + r.neg:
            if isinstance(a, ExternalAtom):
                d = reg.get(a.name)
                owner = getattr(d.outputs, "__self__", None)
                if isinstance(owner, ConditionalTableOracle):
                    for row in owner.rows:
                        consts.update(row.emit)
    return consts
