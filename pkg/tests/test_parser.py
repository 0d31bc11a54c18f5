import pytest

from hexeval.core import Atom, ExternalAtom, Rule
from hexeval.errors import ParseError
from hexeval.parser import format_program, parse_program, parse_rule, parse_with_diagnostics


def test_rule_with_external_atom():
    r = parse_rule("need(loc,C) :- &rq[goto](C).")
    assert r == Rule((Atom("need", ("loc", "C")),), (ExternalAtom("rq", ("goto",), ("C",)),))


def test_empty_text():
    assert parse_program("").rules == ()


def test_swim_file_shape(pswim):
    facts = [r for r in pswim.rules if r.is_fact and len(r.head) == 1]
    constraints = [r for r in pswim.rules if r.is_constraint]
    assert len(facts) == 4
    assert len(constraints) == 3
    assert len(pswim.rules) - len(facts) - len(constraints) == 5


def test_swim_constants(pswim):
    # the constants listed for the running example, without the two invented ones
    want = {"swim", "goto", "ngoto", "need", "location", "go", "ind", "outd", "gansD", "altD", "margB",
            "amalB", "money", "inoutd", "loc"}
    assert pswim.constants() == want


def test_disjunction_alias_and_builtin():
    r = parse_rule("a(X) v b(X) :- c(X), X != d.")
    assert len(r.head) == 2 and len(r.pos) == 2


def test_round_trip(pswim):
    assert parse_program(format_program(pswim)) == pswim


@pytest.mark.parametrize("text,line", [
    ("a :- b\n", 2),
    ("a.\nb :- .\n", 2),
    ("a.\nX(a).\n", 2),
])
def test_errors_have_locations(text, line):
    P, diags = parse_with_diagnostics(text)
    errs = [d for d in diags if d.severity == "error"]
    assert P is None and errs and errs[0].line == line


def test_recovery_reports_several_errors():
    _, diags = parse_with_diagnostics("a :- .\nb.\nc :- .\n")
    assert len([d for d in diags if d.severity == "error"]) == 2


def test_parse_program_raises():
    with pytest.raises(ParseError):
        parse_program("p(a")


def test_arity_mismatch_is_warning():
    P, diags = parse_with_diagnostics("p(a).\np(a,b).\n")
    assert P is not None
    assert diags and all(d.severity == "warning" for d in diags)
