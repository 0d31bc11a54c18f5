from pathlib import Path

import networkx as nx
import pytest

from hexeval.core import Atom
from hexeval.evalgraph import EvaluationGraph
from hexeval.external import builtin_registry, load_table_oracle
from hexeval.parser import parse_program

DATA = Path(__file__).resolve().parent.parent / "data"
LABELS = ["r1", "r2", "r3", "r4", "r5", "c6", "c7", "c8"]

EXPECTED_SWIM = frozenset({
    Atom("swim", ("outd",)), Atom("goto", ("altD",)), Atom("ngoto", ("gansD",)),
    Atom("go"), Atom("need", ("loc", "yogamat")),
})


def swim_program():
    return parse_program((DATA / "pswim.hex").read_text())


def swim_registry():
    reg = builtin_registry()
    reg.register(load_table_oracle(DATA / "rq.etab"))
    return reg


def swim_rules(P):
    """Map r1..c8 to the rules of the fixture; the four location facts come first."""
    rules = [r for r in P.rules if not r.is_fact or r.head[0].pred != "location"]
    return dict(zip(LABELS, rules))


def edb_rules(P):
    return [r for r in P.rules if r.is_fact and r.head[0].pred == "location"]


def strip_edb(I):
    return frozenset(a for a in I if a.pred != "location")


def make_e1(P):
    R, edb = swim_rules(P), edb_rules(P)
    units = {
        1: frozenset([R["r1"], R["r3"], R["r4"], R["c6"], R["c7"], *edb]),
        2: frozenset([R["r2"], R["r5"]]),
        3: frozenset([R["c8"]]),
    }
    return EvaluationGraph(units, {(2, 1), (3, 2)})


def make_e2(P, share_c8=True):
    R, edb = swim_rules(P), edb_rules(P)
    units = {
        1: frozenset([R["r1"], *edb]),
        2: frozenset([R["r2"], R["c8"]] if share_c8 else [R["r2"]]),
        3: frozenset([R["r3"], R["r4"], R["c6"], R["c7"]]),
        4: frozenset([R["r5"], R["c8"]]),
    }
    return EvaluationGraph(units, {(2, 1), (3, 1), (4, 2), (4, 3)})


@pytest.fixture
def pswim():
    return swim_program()


@pytest.fixture
def rq_reg():
    return swim_registry()


@pytest.fixture
def R(pswim):
    return swim_rules(pswim)


def A(p, *args):
    return Atom(p, tuple(args))


SW_IN, SW_OUT = A("swim", "ind"), A("swim", "outd")
GO = A("go")


def u3(first, second):
    return frozenset({A("goto", first), A("ngoto", second), GO})


# the interpretation graph of the worked example: id -> (unit, type, content, successors)
APP_A = {
    1: (1, "i", frozenset(), ()),
    2: (1, "o", {SW_IN}, (1,)),
    3: (1, "o", {SW_OUT}, (1,)),
    4: (2, "i", {SW_IN}, (2,)),
    5: (2, "i", {SW_OUT}, (3,)),
    6: (2, "o", frozenset(), (5,)),
    7: (3, "i", {SW_IN}, (2,)),
    8: (3, "i", {SW_OUT}, (3,)),
    9: (3, "o", u3("margB", "amalB"), (7,)),
    10: (3, "o", u3("amalB", "margB"), (7,)),
    11: (3, "o", u3("altD", "gansD"), (8,)),
    12: (3, "o", u3("gansD", "altD"), (8,)),
    13: (4, "i", u3("altD", "gansD"), (6, 11)),
    14: (4, "i", u3("gansD", "altD"), (6, 12)),
    15: (4, "o", {A("need", "loc", "yogamat")}, (13,)),
}


def app_a_digraph(vertices):
    g = nx.DiGraph()
    for vid, (unit, t, content, succ) in vertices.items():
        g.add_node(vid, key=(unit, t, strip_edb(content)))
        g.add_edges_from((vid, s) for s in succ)
    return g
