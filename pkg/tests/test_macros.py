import itertools

import pytest

from soplog.errors import MalformedEncoding, OutOfRange
from soplog.evaluate import EvalConfig, Valuation, enumerate_relations, evaluate
from soplog.formula import classify, desugar, is_core, to_snf
from soplog.formula.ast import SOVar, walk, SOAtom
from soplog.macros import (
    DNF_ALPHABET,
    bdiv,
    bin_k,
    bmult,
    bnum,
    bsum,
    capacity,
    card_eq,
    card_leq,
    clique_formula,
    cmp_num,
    decode_number,
    def_k,
    dnf_queries,
    encode_number,
    leq_tuple,
    positions,
    succ_tuple,
)
from soplog.structure import Vocabulary, make_structure, word_model

EMPTY = Vocabulary()


def numbers(k=1):
    return tuple(SOVar(c, k + 1, k) for c in "XYZM")


def holds(n, f, so=None, fo=None):
    return evaluate(make_structure(EMPTY, n), f, Valuation(dict(fo or {}), dict(so or {})))


def test_leq_tuple_k1_is_literal():
    f = leq_tuple(1, ["x"], ["y"])
    assert f.__class__.__name__ == "Rel" and f.name == "LEQ"


@pytest.mark.parametrize("n,k", [(4, 2), (5, 2), (8, 2), (9, 3)])
def test_tuple_order_and_successor(n, k):
    xs, ys = [f"x{i}" for i in range(k)], [f"y{i}" for i in range(k)]
    le, succ = leq_tuple(k, xs, ys), succ_tuple(k, xs, ys)
    pos = positions(n, k)
    s = make_structure(EMPTY, n)
    successors = {}
    for a, b in itertools.product(pos, repeat=2):
        env = Valuation({**dict(zip(xs, a)), **dict(zip(ys, b))})
        assert evaluate(s, le, env) == (a <= b)
        if evaluate(s, succ, env):
            successors.setdefault(a, []).append(b)
    # a bijection from B^k minus its maximum onto B^k minus its minimum
    assert successors == {a: [b] for a, b in zip(pos, pos[1:])}


def test_succ_example():
    f = succ_tuple(2, ["a", "b"], ["c", "d"])
    assert holds(4, f, fo={"a": 0, "b": 1, "c": 1, "d": 0})
    assert not holds(4, f, fo={"a": 0, "b": 1, "c": 0, "d": 1})


def test_def_k_exhaustive_small():
    I = SOVar("I", 1, 1)
    f = def_k(1, I)
    candidates = list(enumerate_relations(4, 1, 1))
    assert len(candidates) == 11
    good = [r for r in candidates if holds(4, f, {I: r})]
    assert good == [frozenset({(0,), (1,)})]


def test_def_k_examples():
    I2 = SOVar("I", 2, 2)
    assert holds(4, def_k(2, I2), {I2: frozenset(positions(4, 2))})
    assert not holds(4, def_k(2, I2), {I2: frozenset()})
    with pytest.raises(ValueError):
        def_k(2, SOVar("I", 1, 2))


def test_bin_k_examples():
    X = SOVar("X", 2, 1)
    f = bin_k(1, X)
    assert holds(4, f, {X: encode_number(4, 1, 2)})
    assert not holds(4, f, {X: frozenset()})
    assert not holds(4, f, {X: frozenset({(0, 0), (0, 1)})})


@pytest.mark.parametrize("n,k", [(4, 1), (8, 1), (4, 2)])
def test_bin_k_accepts_exactly_encodings(n, k):
    X = SOVar("X", k + 1, k)
    f = bin_k(k, X)
    cells = [(*p, b) for p in positions(n, k) for b in (0, 1)]
    bound = len(positions(n, k))
    for size in range(bound + 1):
        for combo in itertools.combinations(cells, size):
            r = frozenset(combo)
            try:
                decode_number(r, n, k)
                valid = True
            except MalformedEncoding:
                valid = False
            assert holds(n, f, {X: r}) == valid


def test_cmp_examples():
    X, Y, _, _ = numbers()
    lt, same = cmp_num(1, X, Y, "lt"), cmp_num(1, X, Y, "eq")
    assert holds(4, lt, {X: encode_number(4, 1, 1), Y: encode_number(4, 1, 2)})
    assert not holds(4, lt, {X: encode_number(4, 1, 3), Y: encode_number(4, 1, 3)})
    for a, b in itertools.product(range(4), repeat=2):
        so = {X: encode_number(4, 1, a), Y: encode_number(4, 1, b)}
        assert holds(4, lt, so) == (a < b)
        assert holds(4, same, so) == (a == b)
    with pytest.raises(ValueError):
        cmp_num(1, X, Y, "gt")


@pytest.mark.parametrize("n,k", [(4, 1), (5, 1), (8, 1), (4, 2)])
def test_bnum_all_values(n, k):
    X = SOVar("X", k + 1, k)
    f = bnum(k, X, "x")
    for value in range(min(capacity(n, k), 16)):
        for x in range(n):
            got = holds(n, f, {X: encode_number(n, k, value)}, {"x": x})
            assert got == (value == x)


def test_bsum_examples():
    X, Y, Z, _ = numbers()
    f = bsum(1, X, Y, Z)
    enc = lambda v: encode_number(4, 1, v)
    assert holds(4, f, {X: enc(1), Y: enc(2), Z: enc(3)})
    for y in range(4):
        assert holds(4, f, {X: enc(0), Y: enc(y), Z: enc(y)})
    assert not any(holds(4, f, {X: enc(2), Y: enc(3), Z: enc(z)}) for z in range(4))


def test_bmult_examples():
    X, Y, Z, _ = numbers()
    f = bmult(1, X, Y, Z)
    enc = lambda v: encode_number(4, 1, v)
    assert holds(4, f, {X: enc(3), Y: enc(1), Z: enc(3)})
    for y in range(4):
        assert holds(4, f, {X: enc(0), Y: enc(y), Z: enc(0)})
    assert not any(holds(4, f, {X: enc(2), Y: enc(2), Z: enc(z)}) for z in range(4))


def test_bmult_k2():
    X, Y, Z, _ = numbers(2)
    f = bmult(2, X, Y, Z)
    enc = lambda v: encode_number(4, 2, v)
    assert holds(4, f, {X: enc(3), Y: enc(5), Z: enc(15)})
    assert not holds(4, f, {X: enc(3), Y: enc(5), Z: enc(14)})


def test_bdiv_examples():
    X, Y, Z, M = numbers()
    f = bdiv(1, X, Y, Z, M)
    enc = lambda v: encode_number(16, 1, v)
    assert holds(16, f, {X: enc(5), Y: enc(2), Z: enc(2), M: enc(1)})
    assert not holds(16, f, {X: enc(5), Y: enc(2), Z: enc(1), M: enc(3)})
    assert holds(16, f, {X: enc(9), Y: enc(9), Z: enc(1), M: enc(0)})
    assert not any(
        holds(16, f, {X: enc(6), Y: enc(0), Z: enc(z), M: enc(m)})
        for z in (0, 3, 6, 15) for m in (0, 6)
    )


def test_card_leq_matches_integers():
    X, Y = SOVar("X", 1, 1), SOVar("Y", 1, 1)
    f = card_leq(X, Y)
    e = card_eq(X, Y)
    rels = list(enumerate_relations(4, 1, 1))
    for a, b in itertools.product(rels, repeat=2):
        so = {X: a, Y: b}
        assert holds(4, f, so) == (len(a) <= len(b))
        assert holds(4, e, so) == (len(a) == len(b))


def test_card_leq_examples():
    X, Y = SOVar("X", 1, 1), SOVar("Y", 1, 1)
    f = card_leq(X, Y)
    assert holds(4, f, {X: frozenset(), Y: frozenset({(3,)})})
    assert not holds(4, f, {X: frozenset({(0,), (1,)}), Y: frozenset({(2,)})})
    with pytest.raises(ValueError):
        card_leq(X, SOVar("Y", 1, 2))


def graph(n, edges):
    sym = set(edges) | {(b, a) for a, b in edges}
    return make_structure(Vocabulary.of({"V": 1, "E": 2}), n, {"V": {(i,) for i in range(n)}, "E": sym})


def test_clique_examples():
    f1 = clique_formula(1)
    assert evaluate(graph(4, [(0, 1)]), f1)
    assert not evaluate(graph(4, []), f1)
    assert evaluate(graph(8, [(2, 5), (5, 7), (2, 7), (0, 1)]), f1)
    assert not evaluate(graph(8, [(2, 5), (5, 7), (0, 1), (1, 3)]), f1)
    assert str(classify(f1)) == "Sigma_1"


def dnf(word):
    return word_model(DNF_ALPHABET, word)


def test_dnf_examples():
    sat, nosat = dnf_queries()
    assert evaluate(dnf("(X1)"), sat)
    assert evaluate(dnf("(X1∧¬X1)"), nosat)
    s = dnf("(X1∧¬X1)∨(X0)")
    assert evaluate(s, sat) and not evaluate(s, nosat)
    s = dnf("(X1∧¬X10)")
    assert evaluate(s, sat) and not evaluate(s, nosat)


def test_dnf_classes():
    sat, nosat = dnf_queries()
    assert str(classify(to_snf(desugar(sat)))) == "Sigma_2"
    assert str(classify(to_snf(desugar(nosat)))) == "Pi_2"


def test_number_encoding_examples():
    assert encode_number(4, 1, 2) == {(0, 0), (1, 1)}
    assert encode_number(4, 1, 0) == {(0, 0), (1, 0)}
    with pytest.raises(OutOfRange):
        encode_number(4, 1, 4)
    assert decode_number(frozenset({(0, 1), (1, 0)}), 4, 1) == 1
    with pytest.raises(MalformedEncoding):
        decode_number(frozenset({(0, 0)}), 4, 1)


@pytest.mark.parametrize("n,k", [(4, 1), (8, 1), (4, 2), (8, 2)])
def test_number_round_trip(n, k):
    for v in range(capacity(n, k)):
        assert decode_number(encode_number(n, k, v), n, k) == v


def test_emitted_formulas_are_well_formed():
    X, Y, Z, M = numbers()
    made = [
        def_k(1, SOVar("I", 1, 1)),
        bin_k(1, X),
        cmp_num(1, X, Y),
        bnum(1, X, "x"),
        bsum(1, X, Y, Z),
        bmult(1, X, Y, Z),
        bdiv(1, X, Y, Z, M),
        card_leq(SOVar("A", 1, 1), SOVar("B", 1, 1)),
        clique_formula(2),
        *dnf_queries(),
    ]
    for f in made:
        g = desugar(f)
        assert is_core(g)
        for h in walk(g):
            if isinstance(h, SOAtom):
                assert len(h.args) == h.var.arity
