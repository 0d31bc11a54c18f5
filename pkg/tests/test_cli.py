import io
from pathlib import Path

import pytest

from hexeval.bench import bench_generate, generate_mcs, generate_rs
from hexeval.cli import RunConfig, compare_heuristics, load_program, load_registry, main, run, solve
from hexeval.core import format_interpretation
from hexeval.errors import SizeTooLarge
from hexeval.parser import parse_program

from conftest import DATA, EXPECTED_SWIM, strip_edb

GOLDEN = Path(__file__).resolve().parent / "golden"
SWIM = [str(DATA / "pswim.hex")]
RQ = [str(DATA / "rq.etab")]


def _run(cfg):
    out, err = io.StringIO(), io.StringIO()
    code = run(cfg, out, err)
    return code, out.getvalue().splitlines(), err.getvalue()


def _parse_line(line):
    # an output line is a brace-wrapped list of ground atoms; reading it back as facts recovers the set
    assert line.startswith("{") and line.endswith("}")
    body = line[1:-1]
    if not body:
        return frozenset()
    P = parse_program(body.replace("), ", "). ").replace(", ", ". ") + ".")
    return frozenset(r.head[0] for r in P.rules)


def test_swim_one_line():
    code, lines, _ = _run(RunConfig(SWIM, RQ, "greedy", share_constraints=True))
    assert code == 0 and len(lines) == 1
    assert strip_edb(_parse_line(lines[0])) == EXPECTED_SWIM


def test_lines_match_library():
    P, reg = load_program(SWIM), load_registry(RQ)
    sets, _, _ = solve(P, reg, "trivial")
    _, lines, _ = _run(RunConfig(SWIM, RQ, "trivial"))
    assert {_parse_line(l) for l in lines} == set(sets)
    assert lines == [format_interpretation(m) for m in sets]


def test_limit_with_stream(tmp_path):
    f = tmp_path / "ab.hex"
    f.write_text("a | b.\n")
    assert len(_run(RunConfig([str(f)]))[1]) == 2
    code, lines, _ = _run(RunConfig([str(f)], stream=True, limit=1))
    assert code == 0 and len(lines) == 1


def test_no_answer_sets_exit_zero():
    code, lines, _ = _run(RunConfig([str(DATA / "flp.hex")]))
    assert code == 0 and lines == []


def test_ground_only_concat_dom():
    code, lines, err = _run(RunConfig([str(DATA / "concat_dom.hex")], ground_only=True, stats=True))
    assert code == 0 and len(lines) == 5
    assert "iterations: 2" in err


def test_parse_error_exit_code(tmp_path):
    f = tmp_path / "bad.hex"
    f.write_text("p(a) :- .\n")
    code, _, err = _run(RunConfig([str(f)]))
    assert code == 2 and str(f) in err


def test_unsafe_input_exit_code(tmp_path):
    f = tmp_path / "unsafe.hex"
    f.write_text("p(X) :- not q(X).\n")
    code, _, err = _run(RunConfig([str(f)]))
    assert code == 2 and "unsafe" in err


def test_missing_file_exit_code(tmp_path):
    assert _run(RunConfig([str(tmp_path / "nope.hex")]))[0] == 2


def test_divergence_exit_code(tmp_path):
    f = tmp_path / "grow.hex"
    f.write_text("s(a).\ns(Y) :- s(X), &concat[X,x](Y).\n")
    code, _, err = _run(RunConfig([str(f)], max_ground_iter=5))
    assert code == 3 and "diverged" in err


def test_config_rejects_bad_limit():
    with pytest.raises(ValueError):
        RunConfig(SWIM, limit=0)
    assert main(["solve", *SWIM, "-n", "0"]) == 2
    assert main(["solve", *SWIM, "--heuristic", "clever"]) == 2


def test_dot_exports(tmp_path):
    d, e, m = tmp_path / "d.dot", tmp_path / "e.dot", tmp_path / "m.dot"
    code = main(["solve", *SWIM, "--oracle", *RQ, "--dot-deps", str(d), "--dot-eval", str(e),
                 "--trace-model-graph", str(m)])
    assert code == 0
    for p in (d, e, m):
        assert p.read_text().startswith("digraph")


def test_stream_trace_export(tmp_path):
    m = tmp_path / "m.dot"
    assert main(["solve", *SWIM, "--oracle", *RQ, "--stream", "--trace-model-graph", str(m)]) == 0
    assert "->" in m.read_text()


def test_gen_golden(tmp_path):
    h, e = bench_generate("rs", 2, 7, tmp_path)
    assert h.read_bytes() == (GOLDEN / "rs_s2_seed7.hex").read_bytes()
    assert e.read_bytes() == (GOLDEN / "rs_s2_seed7.etab").read_bytes()


@pytest.mark.parametrize("kind", ["rs", "mcs"])
def test_gen_deterministic(kind, tmp_path):
    a = bench_generate(kind, 3, 11, tmp_path / "a")
    b = bench_generate(kind, 3, 11, tmp_path / "b")
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]
    assert {generate_rs(3, s)[0] for s in range(5)} != {generate_rs(3, 11)[0]}


def test_gen_guards(tmp_path):
    with pytest.raises(SizeTooLarge):
        generate_rs(5, 0)
    with pytest.raises(SizeTooLarge):
        generate_rs(2, 0, papers=5)
    with pytest.raises(SizeTooLarge):
        generate_mcs(0, 0)
    with pytest.raises(SizeTooLarge):
        generate_mcs(1, 0, atoms=4)
    assert main(["gen", "rs", "--size", "9", "--out", str(tmp_path)]) == 2


def test_mcs_size_one_solvable(tmp_path):
    h, e = bench_generate("mcs", 1, 0, tmp_path)
    code, lines, _ = _run(RunConfig([str(h)], [str(e)]))
    assert code == 0 and len(lines) >= 1


def test_generated_rs_solves_via_cli(tmp_path):
    h, e = bench_generate("rs", 1, 3, tmp_path)
    _, batch, _ = _run(RunConfig([str(h)], [str(e)]))
    _, streamed, _ = _run(RunConfig([str(h)], [str(e)], stream=True))
    assert sorted(batch) == sorted(streamed)


def test_compare_heuristics_swim():
    stats = compare_heuristics(load_program(SWIM), load_registry(RQ))
    assert set(stats) == {"monolithic", "trivial", "greedy", "greedy+sharing"}
    for s in stats.values():
        assert 0 <= s.joins_defined <= s.joins_attempted
    assert stats["monolithic"].units == 2  # the program plus the final unit
