"""Polylog-bounded second-order logic: formulas, evaluation, machines and their compilation."""
from .errors import *  # noqa: F401,F403
from .evaluate import EvalConfig, Valuation, check_witness, enumerate_relations, evaluate, find_witness  # noqa: F401
from .formula import classify, desugar, parse, pretty, to_snf  # noqa: F401
from .structure import (  # noqa: F401
    Structure,
    Vocabulary,
    all_structures,
    decode_bin,
    dump_structure,
    encode_bin,
    make_structure,
    parse_structure,
    word_model,
)

__version__ = "0.1.0"
