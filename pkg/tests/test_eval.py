import itertools

import pytest

from conftest import RandomSentences, UNARY, unary_family
from soplog.errors import BoundViolation, FormulaError, ResourceExceeded
from soplog.evaluate import (
    EvalConfig,
    Valuation,
    check_witness,
    enumerate_relations,
    evaluate,
    find_witness,
    relation_count,
)
from soplog.formula import parse
from soplog.formula.ast import SOVar
from soplog.macros import clique_formula
from soplog.structure import Vocabulary, make_structure

ENUM = EvalConfig(strategy="enumerate")
GRAPH = Vocabulary.of({"V": 1, "E": 2})


def graph(n, edges):
    sym = set(edges) | {(b, a) for a, b in edges}
    return make_structure(GRAPH, n, {"V": {(i,) for i in range(n)}, "E": sym})


def test_simple_truths():
    s = make_structure(Vocabulary(), 4)
    assert evaluate(s, parse("Ex x . x = 0"))
    assert evaluate(s, parse("SEx X^{2,1} . X(0, 1)"))
    assert evaluate(s, parse("SEx X^{2,1} . X(0, 1)"), cfg=ENUM)


@pytest.mark.parametrize("args,count", [((4, 1, 0), 5), ((4, 2, 1), 137), ((2, 1, 1), 3)])
def test_enumerate_counts(args, count):
    rels = list(enumerate_relations(*args))
    assert len(rels) == count == relation_count(*args)
    assert len(set(rels)) == count


def test_enumerate_order():
    rels = list(enumerate_relations(4, 1, 1))
    assert rels[0] == frozenset()
    assert [len(r) for r in rels] == sorted(len(r) for r in rels)
    assert rels[1:5] == [frozenset({(i,)}) for i in range(4)]


def test_enumerate_ceiling():
    with pytest.raises(ResourceExceeded):
        list(enumerate_relations(8, 2, 2, EvalConfig(max_candidates=1000)))
    with pytest.raises(ValueError):
        EvalConfig(max_candidates=0)
    s = make_structure(Vocabulary(), 8)
    with pytest.raises(ResourceExceeded):
        evaluate(s, parse("SEx X^{2,2} . X(0, 1)"), cfg=EvalConfig(strategy="enumerate", max_candidates=1000))


def test_depth_ceiling():
    s = make_structure(Vocabulary(), 2)
    with pytest.raises(ResourceExceeded):
        evaluate(s, parse("Ex x . Ex y . Ex z . x = y"), cfg=EvalConfig(max_depth=2))


def test_unassigned_and_oversized():
    s = make_structure(Vocabulary(), 4)
    X = SOVar("X", 1, 1)
    with pytest.raises(FormulaError):
        evaluate(s, parse("x = 0"))
    with pytest.raises(BoundViolation):
        evaluate(s, parse("X^{1,1}(0)"), Valuation({}, {X: frozenset({(0,), (1,), (2,)})}))


def brute_clique(n, edges, size):
    adj = set(edges) | {(b, a) for a, b in edges}
    return any(all((a, b) in adj for a, b in itertools.combinations(c, 2))
               for c in itertools.combinations(range(n), size))


def test_clique_on_all_4_graphs():
    f = clique_formula(1)
    pairs = list(itertools.combinations(range(4), 2))
    for mask in range(64):
        edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
        assert evaluate(graph(4, edges), f) == brute_clique(4, edges, 2)


def test_find_witness_clique():
    f = clique_formula(1)
    s = graph(4, [(1, 3)])
    w = find_witness(s, f)
    S = next(v for v in w.so if v.name.startswith("S"))
    assert w.so[S] == {(1,), (3,)}
    assert check_witness(s, f, w)


def test_find_witness_unsatisfiable():
    s = make_structure(Vocabulary(), 4)
    f = parse("SEx X^{1,1} . X(0) & ~X(0)")
    assert find_witness(s, f) is None
    assert find_witness(s, f, ENUM) is None


def test_check_witness_errors_and_wrong_guess():
    s = make_structure(Vocabulary(), 4)
    X = SOVar("X", 1, 1)
    f = parse("SEx X^{1,1} . X(0)")
    assert check_witness(s, f, Valuation({}, {X: frozenset({(0,)})}))
    assert not check_witness(s, f, Valuation({}, {X: frozenset({(1,)})}))
    assert find_witness(s, f) is not None
    with pytest.raises(BoundViolation):
        check_witness(s, f, Valuation({}, {X: frozenset({(0,), (1,), (2,)})}))
    with pytest.raises(BoundViolation):
        check_witness(s, f, Valuation())
    with pytest.raises(FormulaError):
        find_witness(s, parse("SAll X^{1,1} . X(0)"))


def sigma1_corpus():
    gen = RandomSentences(31, sugar=False, max_so=0)
    out = []
    for body in gen.sentences(40, max_depth=3):
        out.append(parse(f"SEx W^{{1,1}} . W(0) | ({_pretty(body)})"))
        out.append(parse(f"SEx W^{{1,1}} . All x in W . ({_pretty(body)})"))
    return out


def _pretty(f):
    from soplog.formula import pretty

    return pretty(f)


def test_witness_iff_truth():
    structures = unary_family((2, 3, 4))
    for f in sigma1_corpus()[:30]:
        for s in structures:
            truth = evaluate(s, f, cfg=ENUM)
            w = find_witness(s, f)
            assert (w is not None) == truth
            if w is not None:
                assert check_witness(s, f, w)


def test_strategies_agree():
    structures = unary_family()
    for f in RandomSentences(41).sentences(80):
        for s in structures:
            assert evaluate(s, f) == evaluate(s, f, cfg=ENUM)


def test_restricted_fast_path_equals_naive():
    naive = EvalConfig(strategy="enumerate", naive_restricted=True)
    structures = unary_family((2, 3, 4))
    for f in RandomSentences(43, max_so=1).sentences(60, max_depth=3):
        for s in structures:
            assert evaluate(s, f, cfg=ENUM) == evaluate(s, f, cfg=naive)


def test_exponent_zero_is_at_most_one_element():
    s_list = unary_family((2, 3, 4))
    f = parse("SEx X^{1,0} . All x in X . R(x)")
    assert all(evaluate(s, f) for s in s_list)
    g = parse("SEx X^{1,0} . X(0) & X(1)")
    assert not any(evaluate(s, g, cfg=ENUM) for s in s_list)
    # unbounded universal through an exponent-0 variable
    h = parse("SAll U^{1,0} . All x in U . R(x)")
    for s in s_list:
        assert evaluate(s, h) == evaluate(s, parse("All x . R(x)"))


def test_deterministic():
    s = graph(4, [(0, 2), (2, 3)])
    f = clique_formula(1)
    ws = {tuple(sorted((v.name, tuple(sorted(r))) for v, r in find_witness(s, f).so.items())) for _ in range(3)}
    assert len(ws) == 1
