"""Evaluation of HEX programs through evaluation graphs and answer set graphs."""
from .core import Atom, BuiltinAtom, ExternalAtom, Program, Rule, format_interpretation
from .errors import HexError
from .evalgraph import EvaluationGraph, add_final_unit, build_evaluation_graph
from .external import OracleRegistry, builtin_registry, load_table_oracle, parse_table_oracle
from .grounding import ground_fixpoint, ground_hex
from .modelgraph import AnswerSetGraph, answer_sets_on_demand, build_answer_sets
from .parser import parse_program
from .solver import evaluate_ground_hex

__all__ = [
    "Atom", "BuiltinAtom", "ExternalAtom", "Program", "Rule", "format_interpretation", "HexError",
    "EvaluationGraph", "add_final_unit", "build_evaluation_graph", "OracleRegistry", "builtin_registry",
    "load_table_oracle", "parse_table_oracle", "ground_fixpoint", "ground_hex", "AnswerSetGraph",
    "answer_sets_on_demand", "build_answer_sets", "parse_program", "evaluate_ground_hex",
]
__version__ = "0.1.0"
