import itertools
import random
from pathlib import Path

import pytest

from soplog.formula.ast import (
    Exists,
    Forall,
    ForallIn,
    Iff,
    Implies,
    Not,
    SOAtom,
    SOExists,
    SOForall,
    SOVar,
    conj,
    disj,
    eq,
    rel,
)
from soplog.structure import Vocabulary, all_structures

DATA = Path(__file__).parent / "data"
UNARY = Vocabulary.of({"R": 1})


@pytest.fixture
def data_dir():
    return DATA


def unary_family(sizes=(2, 3)):
    """Every structure over one unary relation at the given sizes."""
    return [s for n in sizes for s in all_structures(UNARY, n)]


class RandomSentences:
    """Random closed formulas over one unary relation ``R``.

    Surface sugar (negation anywhere, implications, unbounded universals) is
    switched on with ``sugar=True``.
    """

    def __init__(self, seed, sugar=True, max_so=2):
        self.rng = random.Random(seed)
        self.sugar = sugar
        self.max_so = max_so
        self.count = itertools.count()

    def term(self, fo):
        choices = ["0", "1", "max", "logn"] + fo
        return self.rng.choice(choices)

    def atom(self, fo, so):
        r = self.rng.random()
        if so and r < 0.35:
            var = self.rng.choice(so)
            return SOAtom(var, tuple(_t(self.term(fo)) for _ in range(var.arity)))
        if r < 0.6:
            return rel("R", self.term(fo))
        if r < 0.8:
            return eq(self.term(fo), self.term(fo))
        name = self.rng.choice(["LEQ", "SUCC", "BIT"])
        return rel(name, self.term(fo), self.term(fo))

    def literal(self, fo, so):
        a = self.atom(fo, so)
        return Not(a) if self.rng.random() < 0.4 else a

    def formula(self, depth, fo=(), so=()):
        fo, so = list(fo), list(so)
        if depth == 0:
            return self.literal(fo, so)
        kinds = ["and", "or", "ex", "allin"]
        if len(so) < self.max_so:
            kinds += ["sex", "sall"]
        if self.sugar:
            kinds += ["not", "imp", "all", "iff"]
        kind = self.rng.choice(kinds)
        d = depth - 1
        if kind in ("and", "or"):
            parts = (self.formula(d, fo, so), self.formula(self.rng.randint(0, d), fo, so))
            return (conj if kind == "and" else disj)(*parts)
        if kind == "not":
            return Not(self.formula(d, fo, so))
        if kind == "imp":
            return Implies(self.formula(d, fo, so), self.formula(d, fo, so))
        if kind == "iff":
            return Iff(self.formula(self.rng.randint(0, d), fo, so), self.formula(self.rng.randint(0, d), fo, so))
        if kind in ("ex", "all"):
            x = f"x{next(self.count)}"
            body = self.formula(d, fo + [x], so)
            return (Exists if kind == "ex" else Forall)(x, body)
        if kind == "allin":
            guards = [v for v in so if v.arity == 1]
            if not guards:
                return self.formula(d, fo, so)
            x = f"x{next(self.count)}"
            return ForallIn((x,), self.rng.choice(guards), self.formula(d, fo + [x], so))
        var = SOVar(f"X{next(self.count)}", self.rng.choice([1, 1, 2]), self.rng.choice([0, 1]))
        body = self.formula(d, fo, so + [var])
        return (SOExists if kind == "sex" else SOForall)(var, body)

    def sentences(self, count, max_depth=4):
        out = []
        while len(out) < count:
            out.append(self.formula(self.rng.randint(1, max_depth)))
        return out


def _t(x):
    from soplog.formula.ast import as_term

    return as_term(x)


# -- acceptance report -------------------------------------------------------------

ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    ACCEPTANCE[number] = (rep.passed, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[number]
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
