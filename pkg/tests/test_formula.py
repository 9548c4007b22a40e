import pytest

from conftest import RandomSentences, UNARY
from soplog.errors import ArityMismatch, ParseError
from soplog.evaluate import evaluate
from soplog.formula import (
    classify,
    desugar,
    free_vars,
    is_core,
    parse,
    pretty,
    to_snf,
)
from soplog.formula.ast import (
    Eq,
    Exists,
    Forall,
    ForallIn,
    Implies,
    Iff,
    Not,
    SOAtom,
    SOExists,
    SOForall,
    SOVar,
    Var,
    Const,
    walk,
)
from soplog.formula.normal import so_prefix
from soplog.macros import clique_formula, dnf_queries
from soplog.structure import all_structures, make_structure


def test_parse_exists():
    assert parse("Ex x . x = 0") == Exists("x", Eq(Var("x"), Const("0")))


def test_parse_so_exists():
    X = SOVar("X", 1, 1)
    assert parse("SEx X^{1,1} . X(0)") == SOExists(X, SOAtom(X, (Const("0"),)))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as info:
        parse("Ex x")
    assert info.value.pos == 4
    with pytest.raises(ArityMismatch):
        parse("SEx X^{1,1} . X(0, 1)")
    with pytest.raises(ParseError):
        parse("Ex x . x = ")


def test_parse_sugar_and_constants():
    f = parse("All x . R(x) -> (x <= max <-> ~$c = x)")
    assert isinstance(f, Forall)
    assert isinstance(f.body, Implies) and isinstance(f.body.right, Iff)
    g = parse("SEx X^{2,1} . All x y in X . x != y")
    assert isinstance(g.body, ForallIn) and g.body.vars == ("x", "y")


def test_pretty_exists():
    assert pretty(Exists("x", Eq(Var("x"), Const("0")))) == "Ex x . x = 0"


def test_pretty_round_trip_random():
    gen = RandomSentences(11)
    for f in gen.sentences(100):
        assert parse(pretty(f)) == f


@pytest.mark.parametrize("f", [clique_formula(1), clique_formula(2), *dnf_queries()])
def test_pretty_round_trip_macros(f):
    once = pretty(f)
    assert pretty(parse(once)) == once
    assert parse(once) == f


def test_desugar_unbounded_forall():
    g = desugar(parse("All x . R(x)"))
    assert isinstance(g, SOForall) and g.var.arity == 1 and g.var.exponent == 0
    assert isinstance(g.body, ForallIn) and g.body.guard == g.var


def test_desugar_negated_so_exists():
    X = SOVar("X", 1, 1)
    assert desugar(parse("~ SEx X^{1,1} . X(0)")) == SOForall(X, Not(SOAtom(X, (Const("0"),))))


def test_desugar_negated_exists_is_equivalent():
    f = parse("~ Ex x . R(x)")
    g = desugar(f)
    assert isinstance(g, SOForall) and g.var.exponent == 0
    assert isinstance(g.body.body, Not)
    for n in (2, 3):
        for s in all_structures(UNARY, n):
            assert evaluate(s, f) == evaluate(s, g)


def test_core_has_negation_only_on_literals():
    for f in RandomSentences(5).sentences(150):
        g = desugar(f)
        assert is_core(g)
        for h in walk(g):
            if isinstance(h, Not):
                assert not isinstance(h.body, (Not,)) and h.body.__class__.__name__ in ("Eq", "Rel", "SOAtom")
            assert not isinstance(h, (Forall, Implies, Iff))


def test_snf_first_order_over_second_order():
    f = desugar(parse("Ex x . SAll Y^{1,1} . Y(x)"))
    g = to_snf(f)
    prefix, matrix = so_prefix(g)
    assert [q for q, _ in prefix] == ["E", "A"]
    assert prefix[0][1].exponent == 0 and prefix[1][1] == SOVar("Y", 1, 1)
    assert isinstance(matrix, Exists)
    assert str(classify(g)) == "Sigma_2"


def test_snf_identity_up_to_renaming():
    f = clique_formula(1)
    g = to_snf(f)
    assert pretty(g) == pretty(f)


def test_snf_merges_disjoined_blocks():
    g = to_snf(parse("(SEx X^{1,1} . X(0)) | (SEx Y^{1,1} . Y(1))"))
    prefix, _ = so_prefix(g)
    assert [q for q, _ in prefix] == ["E", "E"]
    assert str(classify(g)) == "Sigma_1"


def test_classify_examples():
    assert str(classify(parse("SEx X^{1,1} . SEx Y^{1,1} . X(0) | Y(0)"))) == "Sigma_1"
    assert str(classify(parse("SAll X^{1,1} . SEx Y^{1,1} . X(0) | Y(0)"))) == "Pi_2"
    assert str(classify(parse("Ex x . SEx Y^{1,1} . Y(x)"))) == "not-SNF"
    _, nodnfsat = dnf_queries()
    assert str(classify(to_snf(desugar(nodnfsat)))) == "Pi_2"


def test_classify_after_snf_is_never_not_snf():
    for f in RandomSentences(8).sentences(150):
        assert classify(to_snf(desugar(f))).kind is not None


def test_free_vars_examples():
    X = SOVar("X", 2, 1)
    assert free_vars(parse("X^{2,1}(0, 1)")) == (set(), {X})
    assert free_vars(parse("All x y in X^{2,1} . R(x)")) == (set(), {X})
    assert free_vars(parse("SEx X^{1,1} . X(y)")) == ({"y"}, set())


def test_snf_preserves_truth_small():
    s = make_structure(UNARY, 3, {"R": {(1,)}})
    for f in RandomSentences(21).sentences(60, max_depth=3):
        g = desugar(f)
        assert evaluate(s, g) == evaluate(s, to_snf(g))
