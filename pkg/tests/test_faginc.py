import pytest

from conftest import UNARY, unary_family
from soplog.errors import ExponentTooSmall, MachineNotNormalized, TraceNotAccepting
from soplog.evaluate import Valuation, check_witness, evaluate
from soplog.faginc import (
    check_normalized,
    compile_machine,
    compile_plan,
    extract_witness,
    toy_machines,
    verify_capture,
)
from soplog.formula import classify
from soplog.ground import GroundedBlock
from soplog.evaluate import sigma1_form
from soplog.macros import decode_number
from soplog.ratm import Builder, parse_machine
from soplog.structure import Vocabulary, all_structures, encode_bin, make_structure

TOYS = toy_machines()


def compiled(name, vocab=UNARY):
    m, k, k2 = TOYS[name]
    plan = compile_plan(m, k, k2, vocab)
    return plan, compile_machine(m, k, k2, vocab, plan=plan)


def r3(bits):
    return make_structure(UNARY, 3, {"R": {(i,) for i, b in enumerate(bits) if b == "1"}})


def decide(s, f):
    block, matrix = sigma1_form(f)
    with GroundedBlock(s, block, matrix, True) as gb:
        return gb.holds()


@pytest.mark.parametrize("name", sorted(TOYS))
def test_sentence_is_sigma1(name):
    _, f = compiled(name)
    assert str(classify(f)) == "Sigma_1"


def test_universal_states_rejected():
    m = parse_machine("format v1\ntapes 0\nstart q\nstate q universal\nstate a accept\nrule q -> a")
    with pytest.raises(MachineNotNormalized):
        check_normalized(m)
    with pytest.raises(MachineNotNormalized):
        compile_machine(m, 1, 1, UNARY)


def test_wide_alphabet_rejected():
    b = Builder(1, alphabet=("0", "1", "_", "x"))
    b.accept("a")
    b.on("q", "a", write={0: "x"})
    with pytest.raises(MachineNotNormalized):
        check_normalized(b.build("q"))


@pytest.mark.parametrize("name", sorted(TOYS))
def test_capture_small_sizes(name):
    m, k, k2 = TOYS[name]
    report = verify_capture(m, k, k2, UNARY, unary_family())
    assert report.agreement, [r for r in report.rows if not r.agrees]


def test_first_bit_verdicts():
    plan, f = compiled("first-bit")
    assert decide(r3("100"), f) and not decide(r3("011"), f)
    w = extract_witness(plan, r3("101"))
    assert check_witness(r3("101"), f, w)


def _shift(plan, w, name, change):
    var = plan[name]
    return Valuation({}, {**w.so, var: frozenset(change(t) for t in w.so[var])})


def test_corrupted_witness_fails():
    plan, f = compiled("one-of-two")
    s = r3("010")
    w = extract_witness(plan, s)
    assert check_witness(s, f, w)
    flip = lambda t: (*t[:-1], 1 - t[-1])
    assert not check_witness(s, f, _shift(plan, w, "AH", flip))
    S = plan.state_pred("q")
    wrong = Valuation({}, {**w.so, S: frozenset()})
    assert not check_witness(s, f, wrong)
    assert not check_witness(s, f, _shift(plan, w, "M1", lambda t: t if t[0] else (t[0], 1 - t[1])))


def test_corrupted_work_tape_head():
    plan, f = compiled("copy")
    s = r3("100")
    w = extract_witness(plan, s)
    assert check_witness(s, f, w)
    assert not check_witness(s, f, _shift(plan, w, "H_0", lambda t: (*t[:-1], 1 - t[-1])))


def test_rejecting_input_has_no_witness():
    plan, f = compiled("first-bit")
    with pytest.raises(TraceNotAccepting):
        extract_witness(plan, r3("011"))
    with pytest.raises(TraceNotAccepting):
        extract_witness(plan, make_structure(UNARY, 2, {"R": set()}))


def test_always_reject_is_unsatisfiable():
    _, f = compiled("never")
    for s in unary_family((2, 3)):
        assert not decide(s, f)


def test_exact_size_two_lists_accepted_structures():
    _, f = compiled("first-bit")
    for s in all_structures(UNARY, 2):
        assert evaluate(s, f) == encode_bin(s).startswith("1")


def test_witness_numbers_decode():
    m, _, _ = TOYS["first-bit"]
    vocab = Vocabulary.of({"R": 1, "E": 2}, ["c"])
    plan = compile_plan(m, 2, 2, vocab)
    s = make_structure(vocab, 3, {"R": {(0,)}, "E": {(1, 2)}, "c": 2})
    assert encode_bin(s)[0] == "1"
    w = extract_witness(plan, s)
    f = compile_machine(m, 2, 2, vocab, plan=plan)
    assert check_witness(s, f, w)
    value = lambda name: decode_number(w.so[plan[name]], 3, 2)
    assert value("M0") == 1 and value("MX") == 2 and value("M1") == 3 and value("M2") == 9
    assert (value("P0"), value("P1"), value("P2")) == (0, 3, 12)
    assert (value("N0"), value("N1")) == (0, 2)
    assert value("PN") == len(encode_bin(s)) == 14
    assert value("NM1") == 13


def test_constant_vocabulary_capture():
    m, _, _ = TOYS["first-bit"]
    vocab = Vocabulary.of({"R": 1}, ["c"])
    structures = list(all_structures(vocab, 3))
    report = verify_capture(m, 1, 2, vocab, structures)
    assert report.agreement and len(report.rows) == len(structures)


def test_exponent_too_small_is_reported():
    m, _, _ = TOYS["first-bit"]
    plan = compile_plan(m, 1, 1, UNARY)
    with pytest.raises(ExponentTooSmall):
        plan.check_size(8)
    s = make_structure(UNARY, 8, {"R": {(0,)}})
    report = verify_capture(m, 1, 1, UNARY, [s])
    assert not report.agreement and report.rows[0].error


def test_inventory_roles():
    plan, _ = compiled("copy")
    names = [row[0] for row in plan.inventory()]
    assert {"I", "J", "AC", "AH", "AB", "CH", "H_0", "T0_0", "M1", "NM1"} <= set(names)
    assert len(names) == len(set(names))
    assert plan.horizon(4) == 2 ** 2 - 1
