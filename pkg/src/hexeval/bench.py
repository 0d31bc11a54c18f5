"""Desk-scale benchmark instances: reviewer selection (rs) and multi-context systems (mcs).

Every generator returns the program text and the table text for one
external predicate, so an instance is always a ``.hex``/``.etab`` pair.
Output depends only on (kind, size, seed).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import SizeTooLarge


@dataclass(frozen=True)
class RSConfig:
    tracks: int
    papers: int = 2
    reviewers: int = 3
    max_tracks: int = 4
    max_papers: int = 4


@dataclass(frozen=True)
class MCSConfig:
    contexts: int
    atoms: int = 2
    max_contexts: int = 4
    max_atoms: int = 3


def generate_rs(size: int, seed: int, papers: int = 2, reviewers: int = 3) -> tuple[str, str]:
    """Reviewer selection with one track per unit of ``size``.

    Each paper gets exactly one reviewer from its track and a reviewer takes
    at most one paper. Known conflicts are left out of a paper's choices;
    further conflicts are only visible through the ``&xconf`` table.
    """
    cfg = RSConfig(size, papers, reviewers)
    if not 1 <= cfg.tracks <= cfg.max_tracks or not 1 <= cfg.papers <= cfg.max_papers:
        raise SizeTooLarge(f"rs: tracks must be in 1..{cfg.max_tracks}, papers in 1..{cfg.max_papers}")
    rng = random.Random(f"rs/{size}/{seed}/{papers}/{reviewers}")
    hex_lines = [f"% reviewer selection, {size} track(s), seed {seed}"]
    rows = ["&xconf in=(2) out=0 monotonic=yes"]
    for t in range(1, cfg.tracks + 1):
        ps = [f"p{t}_{j}" for j in range(1, cfg.papers + 1)]
        rs = [f"r{t}_{j}" for j in range(1, cfg.reviewers + 1)]
        hex_lines.append("")
        hex_lines.append(f"% track {t}")
        hex_lines.extend(f"paper_t{t}({p})." for p in ps)
        hex_lines.extend(f"reviewer_t{t}({r})." for r in rs)
        for p in ps:
            allowed = list(rs)
            if rng.random() < 0.5:
                allowed.remove(rng.choice(rs))  # known conflict: never offered
            head = " | ".join(f"asg_t{t}({p},{r})" for r in allowed)
            hex_lines.append(f"{head} :- paper_t{t}({p}).")
        hex_lines.append(f":- asg_t{t}(P1,R), asg_t{t}(P2,R), P1 != P2.")
        hex_lines.append(f":- &xconf[asg_t{t}]().")
        pairs = list(itertools.product(ps, rs))
        for p, r in sorted(rng.sample(pairs, rng.randint(1, 2))):
            rows.append(f"emit () if has 1 ({p},{r})")
    return "\n".join(hex_lines) + "\n", "\n".join(rows) + "\n"


def generate_mcs(size: int, seed: int, atoms: int = 2) -> tuple[str, str]:
    """Multi-context system with ``size`` contexts of ``atoms`` guessed beliefs each.

    Acceptable belief states of a context are rows of the nonmonotonic
    ``&lc`` table; each row is anchored on the context's marker atom so rows
    of one context never fire for another.
    """
    cfg = MCSConfig(size, atoms)
    if not 1 <= cfg.contexts <= cfg.max_contexts or not 1 <= cfg.atoms <= cfg.max_atoms:
        raise SizeTooLarge(f"mcs: contexts must be in 1..{cfg.max_contexts}, atoms in 1..{cfg.max_atoms}")
    rng = random.Random(f"mcs/{size}/{seed}/{atoms}")
    hex_lines = [f"% multi-context system, {size} context(s), seed {seed}"]
    rows = ["&lc in=(1) out=0 monotonic=no"]
    for c in range(1, cfg.contexts + 1):
        names = [f"c{c}_a{i}" for i in range(1, cfg.atoms + 1)]
        hex_lines.append("")
        hex_lines.append(f"% context {c}")
        hex_lines.append(f"bel_c{c}(c{c}_ctx).")
        for a in names:
            hex_lines.append(f"bel_c{c}({a}) | nbel_c{c}({a}).")
        hex_lines.append(f":- not &lc[bel_c{c}]().")
        if c > 1:
            src = rng.choice([f"c{c - 1}_a{i}" for i in range(1, cfg.atoms + 1)])
            hex_lines.append(f"bel_c{c}({rng.choice(names)}) :- bel_c{c - 1}({src}).")
        states = list(itertools.product((True, False), repeat=cfg.atoms))
        for state in sorted(rng.sample(states, rng.randint(1, max(1, len(states) // 2)))):
            guards = [f"has 1 (c{c}_ctx)"]
            guards += [f"{'has' if on else 'hasnot'} 1 ({a})" for a, on in zip(names, state)]
            rows.append("emit () if " + " and ".join(guards))
    return "\n".join(hex_lines) + "\n", "\n".join(rows) + "\n"


GENERATORS = {"rs": generate_rs, "mcs": generate_mcs}


def bench_generate(kind: str, size: int, seed: int, out_dir: str | Path) -> tuple[Path, Path]:
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown instance kind {kind!r}") from None
    program, table = gen(size, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{kind}_s{size}_seed{seed}"
    hex_path, etab_path = out / f"{stem}.hex", out / f"{stem}.etab"
    hex_path.write_text(program, encoding="utf-8")
    etab_path.write_text(table, encoding="utf-8")
    return hex_path, etab_path
