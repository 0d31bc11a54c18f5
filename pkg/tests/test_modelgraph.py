import networkx as nx
import pytest

from hexeval.core import Atom, Program
from hexeval.errors import DuplicateExpandedInterpretation, IncompleteGraph, JoinUndefined
from hexeval.evalgraph import EvaluationGraph, add_final_unit, heuristic_monolithic
from hexeval.external import builtin_registry
from hexeval.grounding import ground_hex
from hexeval.modelgraph import (INPUT, OUTPUT, AnswerSetGraph, RunStats, add_i_interpretation,
                                add_o_interpretation, answer_set_graph_dot, answer_sets_from_complete_graph,
                                answer_sets_on_demand, build_answer_set_graph, build_answer_sets,
                                expanded_interpretation, join, validate_answer_set_graph)
from hexeval.parser import parse_program, parse_rule
from hexeval.solver import evaluate_ground_hex

from conftest import APP_A, EXPECTED_SWIM, GO, SW_IN, SW_OUT, A, app_a_digraph, make_e2, strip_edb, u3


@pytest.fixture
def built(pswim, rq_reg):
    E = add_final_unit(make_e2(pswim))
    A_, sets = build_answer_set_graph(E, rq_reg, debug=True)
    return E, A_, sets


def test_worked_example_graph(built):
    E, G, sets = built
    mine = {v.id: (v.unit, v.type, v.int, v.succ) for v in G.vertices.values() if v.unit != E.final}
    assert nx.is_isomorphic(app_a_digraph(mine), app_a_digraph(APP_A), node_match=lambda a, b: a["key"] == b["key"])
    assert {strip_edb(s) for s in sets} == {EXPECTED_SWIM}


def _find(G, unit, type_, content):
    return next(v.id for v in G.vertices.values()
                if v.unit == unit and v.type == type_ and strip_edb(v.int) == frozenset(content))


def test_expanded_interpretations(built):
    E, G, _ = built
    m13 = _find(G, 4, INPUT, u3("altD", "gansD"))
    assert strip_edb(expanded_interpretation(G, m13)) == u3("altD", "gansD") | {SW_OUT}
    m1 = _find(G, 1, INPUT, ())
    assert expanded_interpretation(G, m1) == frozenset()
    m15 = _find(G, 4, OUTPUT, {A("need", "loc", "yogamat")})
    assert strip_edb(expanded_interpretation(G, m15)) == EXPECTED_SWIM


def test_joins_at_u4(built):
    E, G, _ = built
    m6 = _find(G, 2, OUTPUT, ())
    m9, m10 = _find(G, 3, OUTPUT, u3("margB", "amalB")), _find(G, 3, OUTPUT, u3("amalB", "margB"))
    m11, m12 = _find(G, 3, OUTPUT, u3("altD", "gansD")), _find(G, 3, OUTPUT, u3("gansD", "altD"))
    assert join(E, G, 4, (m6, m11)) == u3("altD", "gansD")
    assert join(E, G, 4, (m6, m12)) is not None
    assert join(E, G, 4, (m6, m9)) is None
    assert join(E, G, 4, (m6, m10)) is None
    assert join(E, G, 1, ()) == frozenset()


def test_undefined_join_is_rejected(built):
    E, G, _ = built
    m6, m9 = _find(G, 2, OUTPUT, ()), _find(G, 3, OUTPUT, u3("margB", "amalB"))
    with pytest.raises(JoinUndefined):
        add_i_interpretation(E, G, 4, (m6, m9))


def test_duplicate_vertices_are_rejected(built):
    E, G, _ = built
    m6, m11 = _find(G, 2, OUTPUT, ()), _find(G, 3, OUTPUT, u3("altD", "gansD"))
    with pytest.raises(DuplicateExpandedInterpretation):
        add_i_interpretation(E, G, 4, (m6, m11))
    m13 = _find(G, 4, INPUT, u3("altD", "gansD"))
    with pytest.raises(DuplicateExpandedInterpretation):
        add_o_interpretation(G, 4, m13, {A("need", "loc", "yogamat")})


def test_worked_example_validates(built, rq_reg):
    E, G, _ = built
    assert validate_answer_set_graph(G, E, rq_reg) == []
    assert validate_answer_set_graph(AnswerSetGraph(), E, rq_reg) == []


def test_ig_f_violation_detected(built, rq_reg):
    E, G, _ = built
    m6, m9 = _find(G, 2, OUTPUT, ()), _find(G, 3, OUTPUT, u3("margB", "amalB"))
    G.add_vertex(4, INPUT, G.vertices[m6].int | G.vertices[m9].int, (m6, m9))
    problems = validate_answer_set_graph(G, E, rq_reg, semantic=False)
    assert any(p.startswith("(IG-F)") for p in problems)


def test_manual_construction_follows_join_rules(pswim, rq_reg):
    E = add_final_unit(make_e2(pswim))
    G = AnswerSetGraph()
    m1 = add_i_interpretation(E, G, 1, ())
    assert m1 == 1
    m2 = add_o_interpretation(G, 1, m1, {SW_OUT})
    assert validate_answer_set_graph(G, E, rq_reg, semantic=False) == []
    with pytest.raises(ValueError):
        add_o_interpretation(G, 1, m2, set())


def test_complete_graph_reading(built):
    E, G, sets = built
    assert answer_sets_from_complete_graph(G, E) == sets


def test_complete_graph_single_unit():
    reg = builtin_registry()
    P = parse_program("a | b.")
    E = add_final_unit(heuristic_monolithic(P))
    G, sets = build_answer_set_graph(E, reg)
    assert len(answer_sets_from_complete_graph(G, E)) == 2 == len(sets)


def test_incomplete_graph_is_refused(pswim):
    E = add_final_unit(make_e2(pswim))
    with pytest.raises(IncompleteGraph):
        answer_sets_from_complete_graph(AnswerSetGraph(), E)


def test_monolithic_matches_ground_solver(pswim, rq_reg):
    E = add_final_unit(heuristic_monolithic(pswim))
    assert build_answer_sets(E, rq_reg) == evaluate_ground_hex(ground_hex(pswim, rq_reg), rq_reg)


def test_unsatisfiable_variant(pswim, rq_reg):
    P = Program(pswim.rules + (parse_rule(":- swim(outd)."),))
    E = add_final_unit(make_e2(pswim))
    extra = parse_rule(":- swim(outd).")
    E.units[1] = E.units[1] | {extra}
    assert build_answer_sets(E, rq_reg, debug=True) == set()
    assert evaluate_ground_hex(ground_hex(P, rq_reg), rq_reg) == set()


def test_final_inputs_are_already_expanded(built):
    E, G, _ = built
    for m in G.i_ints(E.final):
        assert G.vertices[m].int == G.expanded(m)


def test_stream_on_worked_example(pswim, rq_reg):
    E = add_final_unit(make_e2(pswim))
    s = answer_sets_on_demand(E, rq_reg)
    first = s.next()
    assert strip_edb(first) == EXPECTED_SWIM
    assert s.next() is None and s.next() is None and s.done


def test_stream_retained_graph_validates(pswim, rq_reg):
    E = add_final_unit(make_e2(pswim))
    s = answer_sets_on_demand(E, rq_reg, retain=True)
    list(s)
    assert validate_answer_set_graph(s.graph, E, rq_reg) == []
    assert max(s.max_live_i.values()) == 1 and max(s.max_live_o.values()) == 1


def test_stream_of_empty_program():
    E = add_final_unit(EvaluationGraph({}))
    s = answer_sets_on_demand(E, builtin_registry())
    assert s.next() == frozenset() and s.next() is None


def test_stats_are_consistent(pswim, rq_reg):
    stats = RunStats()
    build_answer_sets(add_final_unit(make_e2(pswim)), rq_reg, stats)
    assert 0 < stats.joins_defined <= stats.joins_attempted
    assert stats.unit_evaluations == 1 + 2 + 2 + 2


def test_dot_dump(built):
    _, G, _ = built
    dot = answer_set_graph_dot(G)
    assert dot.startswith("digraph") and dot.count("->") == sum(len(v.succ) for v in G.vertices.values())
