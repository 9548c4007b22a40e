"""Small oracle suites behind ``soplog selftest``.

Each suite compares the library against a direct computation and returns a
``SuiteResult``.  The sizes are chosen to finish in seconds; the test suite
runs the exhaustive versions.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass

from .evaluate import Valuation, evaluate
from .formula.ast import SOVar
from .macros import bmult, bsum, clique_formula, encode_number
from .structure import Vocabulary, all_structures, clog2, decode_bin, encode_bin, make_structure


@dataclass
class SuiteResult:
    name: str
    checked: int
    failures: int
    seconds: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.checked > 0


def _timed(name, fn) -> SuiteResult:
    start = time.perf_counter()
    checked, failures, note = fn()
    return SuiteResult(name, checked, failures, time.perf_counter() - start, note)


def _arithmetic():
    n, k = 4, 1
    X, Y, Z = (SOVar(c, k + 1, k) for c in "XYZ")
    s = make_structure(Vocabulary(), n)
    cap = 2 ** clog2(n) ** k
    plus, times = bsum(k, X, Y, Z), bmult(k, X, Y, Z)
    checked = failures = 0
    for a, b, c in itertools.product(range(cap), repeat=3):
        val = Valuation({}, {X: encode_number(n, k, a), Y: encode_number(n, k, b), Z: encode_number(n, k, c)})
        for f, want in ((plus, a + b == c), (times, a * b == c)):
            checked += 1
            failures += evaluate(s, f, val) != want
    return checked, failures, "bsum and bmult at n=4"


def _sat():
    from .ratm.example5 import brute_force_sat, encode_cnf, polylogcnfsat_machine
    from .ratm.machine import RunBudget, accepts

    m = polylogcnfsat_machine(1)
    lits = [1, -1, 2, -2]
    clauses = [c for r in (1, 2) for c in itertools.combinations(lits, r) if not any(-x in c for x in c)]
    checked = failures = 0
    for count in (1, 2):
        for cnf in itertools.combinations(clauses, count):
            checked += 1
            failures += accepts(m, encode_cnf(cnf), RunBudget(100_000)) != brute_force_sat(cnf)
    return checked, failures, "example machine against truth tables, 2 variables"


def _clique():
    from .structure import Vocabulary as V

    vocab = V.of({"V": 1, "E": 2})
    f = clique_formula(1)
    checked = failures = 0
    pairs = list(itertools.combinations(range(4), 2))
    for mask in range(0, 64, 5):
        edges = {p for i, p in enumerate(pairs) if mask >> i & 1}
        sym = edges | {(b, a) for a, b in edges}
        s = make_structure(vocab, 4, {"V": {(i,) for i in range(4)}, "E": sym})
        checked += 1
        failures += evaluate(s, f) != bool(edges)
    return checked, failures, "2-cliques on 4-vertex graphs"


def _capture():
    from .faginc import toy_machines, verify_capture

    vocab = Vocabulary.of({"R": 1})
    checked = failures = 0
    for m, k, k2 in toy_machines().values():
        structures = [*all_structures(vocab, 2), *all_structures(vocab, 3)]
        report = verify_capture(m, k, k2, vocab, structures)
        checked += len(report.rows)
        failures += sum(not r.agrees for r in report.rows)
    return checked, failures, "toy machines at n=2 and n=3"


def _encoding():
    rng = random.Random(7)
    checked = failures = 0
    for _ in range(30):
        n = rng.randint(2, 6)
        vocab = Vocabulary.of({"A": 1, "B": 2}, ["c"])
        interps = {
            "A": {(i,) for i in range(n) if rng.random() < 0.5},
            "B": {t for t in itertools.product(range(n), repeat=2) if rng.random() < 0.3},
            "c": rng.randrange(n),
        }
        s = make_structure(vocab, n, interps)
        checked += 1
        failures += decode_bin(vocab, n, encode_bin(s)) != s
    return checked, failures, "random structures"


SUITES = {
    "arithmetic": _arithmetic,
    "sat": _sat,
    "clique": _clique,
    "capture": _capture,
    "encoding": _encoding,
}


def run_selftest(names=None) -> list[SuiteResult]:
    names = list(names or SUITES)
    return [_timed(name, SUITES[name]) for name in names]


def format_table(results) -> str:
    rows = [f"{'suite':<12} {'checked':>8} {'failed':>7} {'seconds':>8}  result"]
    for r in results:
        rows.append(f"{r.name:<12} {r.checked:>8} {r.failures:>7} {r.seconds:>8.2f}  {'pass' if r.passed else 'FAIL'}  {r.note}")
    return "\n".join(rows)
