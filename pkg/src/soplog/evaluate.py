"""Model checking over finite ordered structures.

Second-order quantifiers range over relations with at most ``ceil(log2 n)^k``
tuples.  Two strategies decide them:

* ``enumerate`` walks every candidate relation (size first, then
  lexicographic) and is the literal semantics;
* ``auto`` (default) hands a block of like quantifiers whose body has no
  further second-order quantifiers to a SAT solver, and enumerates otherwise.

Both agree; the tests cross-check them.
"""
from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Iterator

from .errors import BoundViolation, FormulaError, ResourceExceeded
from .formula.ast import (
    And,
    Eq,
    Exists,
    Forall,
    ForallIn,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    SOAtom,
    SOExists,
    SOForall,
    SOVar,
    Var,
    walk,
)
from .formula.normal import classify, desugar, free_vars, is_core, so_prefix, to_snf
from .ground import GroundedBlock, solve_two_blocks
from .structure import Structure, clog2

STRATEGIES = ("auto", "enumerate")


@dataclass(frozen=True)
class EvalConfig:
    # threads is accepted for interface stability; evaluation runs in one thread
    max_candidates: int = 1_000_000
    max_depth: int = 100_000
    strategy: str = "auto"
    naive_restricted: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.max_candidates < 1 or self.max_depth < 1 or self.threads < 1:
            raise ValueError("evaluation ceilings must be positive")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


DEFAULT_CONFIG = EvalConfig()


@dataclass
class Valuation:
    """First-order and second-order variable assignment."""

    fo: dict = field(default_factory=dict)
    so: dict = field(default_factory=dict)

    def bind(self, name_or_var, value) -> "Valuation":
        if isinstance(name_or_var, SOVar):
            return Valuation(dict(self.fo), {**self.so, name_or_var: frozenset(value)})
        return Valuation({**self.fo, name_or_var: value}, dict(self.so))

    def check(self, n: int):
        """Raise if an assigned relation breaks its arity or size bound."""
        for var, rel in self.so.items():
            for t in rel:
                if len(t) != var.arity or not all(0 <= a < n for a in t):
                    raise BoundViolation(f"tuple {t} does not fit {var}")
            if len(rel) > clog2(n) ** var.exponent:
                raise BoundViolation(
                    f"{var} holds {len(rel)} tuples but the bound at n={n} is {clog2(n) ** var.exponent}"
                )
        for name, value in self.fo.items():
            if not 0 <= value < n:
                raise BoundViolation(f"{name}={value} is outside the domain")


def relation_count(n: int, r: int, k: int) -> int:
    cells = n**r
    bound = min(clog2(n) ** k, cells)
    return sum(math.comb(cells, i) for i in range(bound + 1))


def enumerate_relations(n: int, r: int, k: int, cfg: EvalConfig | None = None) -> Iterator[frozenset]:
    """Every relation of arity ``r`` with at most ``ceil(log n)^k`` tuples, by size then lexicographically."""
    cfg = cfg or DEFAULT_CONFIG
    if n < 2:
        raise ValueError("structures have at least two elements")
    total = relation_count(n, r, k)
    if total > cfg.max_candidates:
        raise ResourceExceeded(
            f"{total} candidate relations for arity {r}, exponent {k} at n={n} exceed the ceiling {cfg.max_candidates}"
        )
    cells = list(itertools.product(range(n), repeat=r))
    bound = min(clog2(n) ** k, len(cells))
    for size in range(bound + 1):
        for combo in itertools.combinations(cells, size):
            yield frozenset(combo)


def _has_so_quantifier(f) -> bool:
    return any(isinstance(g, (SOExists, SOForall)) for g in walk(f))


class _Evaluator:
    def __init__(self, s: Structure, cfg: EvalConfig):
        self.s = s
        self.cfg = cfg
        self.n = s.n
        self.depth = 0
        self._so_free: dict = {}

    def so_free(self, f) -> bool:
        key = id(f)
        if key not in self._so_free:
            self._so_free[key] = (not _has_so_quantifier(f), f)
        return self._so_free[key][0]

    def term(self, t, fo) -> int:
        if isinstance(t, Var):
            try:
                return fo[t.name]
            except KeyError:
                raise FormulaError(f"free variable {t.name} is not assigned") from None
        try:
            return self.s.constant(t.name)
        except KeyError:
            raise FormulaError(f"constant {t.name} is not in the vocabulary") from None

    def ev(self, f, fo: dict, so: dict) -> bool:
        if isinstance(f, Eq):
            return self.term(f.left, fo) == self.term(f.right, fo)
        if isinstance(f, Rel):
            args = tuple(self.term(a, fo) for a in f.args)
            try:
                return self.s.holds(f.name, args)
            except KeyError:
                raise FormulaError(f"relation {f.name} is not in the vocabulary") from None
        if isinstance(f, SOAtom):
            try:
                rel = so[f.var]
            except KeyError:
                raise FormulaError(f"second-order variable {f.var} is not assigned") from None
            return tuple(self.term(a, fo) for a in f.args) in rel
        self.depth += 1
        if self.depth > self.cfg.max_depth:
            raise ResourceExceeded(f"evaluation nesting exceeds {self.cfg.max_depth}")
        try:
            return self._compound(f, fo, so)
        finally:
            self.depth -= 1

    def _compound(self, f, fo, so) -> bool:
        if isinstance(f, Not):
            return not self.ev(f.body, fo, so)
        if isinstance(f, And):
            return all(self.ev(a, fo, so) for a in f.args)
        if isinstance(f, Or):
            return any(self.ev(a, fo, so) for a in f.args)
        if isinstance(f, Implies):
            return (not self.ev(f.left, fo, so)) or self.ev(f.right, fo, so)
        if isinstance(f, Iff):
            return self.ev(f.left, fo, so) == self.ev(f.right, fo, so)
        if isinstance(f, Exists):
            return any(self.ev(f.body, {**fo, f.var: a}, so) for a in range(self.n))
        if isinstance(f, Forall):
            return all(self.ev(f.body, {**fo, f.var: a}, so) for a in range(self.n))
        if isinstance(f, ForallIn):
            try:
                rel = so[f.guard]
            except KeyError:
                raise FormulaError(f"second-order variable {f.guard} is not assigned") from None
            if self.cfg.naive_restricted:
                return all(
                    t not in rel or self.ev(f.body, {**fo, **dict(zip(f.vars, t))}, so)
                    for t in itertools.product(range(self.n), repeat=len(f.vars))
                )
            return all(self.ev(f.body, {**fo, **dict(zip(f.vars, t))}, so) for t in sorted(rel))
        if isinstance(f, (SOExists, SOForall)):
            return self.so_quantifier(f, fo, so)
        raise TypeError(f"not a formula: {f!r}")

    def so_quantifier(self, f, fo, so) -> bool:
        existential = isinstance(f, SOExists)
        if self.cfg.strategy == "auto":
            block, body = [], f
            while type(body) is type(f):
                block.append(body.var)
                body = body.body
            if self.so_free(body):
                return self.solve_block(block, body, fo, so, existential)
            if isinstance(body, (SOExists, SOForall)):
                inner, matrix = [], body
                while type(matrix) is type(body):
                    inner.append(matrix.var)
                    matrix = matrix.body
                if self.so_free(matrix):
                    fixed = {v: r for v, r in so.items() if v not in block and v not in inner}
                    return solve_two_blocks(self.s, block, inner, matrix, existential, fixed, fo)
        candidates = enumerate_relations(self.n, f.var.arity, f.var.exponent, self.cfg)
        if existential:
            return any(self.ev(f.body, fo, {**so, f.var: rel}) for rel in candidates)
        return all(self.ev(f.body, fo, {**so, f.var: rel}) for rel in candidates)

    def solve_block(self, block, body, fo, so, existential) -> bool:
        fixed = {v: r for v, r in so.items() if v not in block}
        with GroundedBlock(self.s, block, body, existential, fixed=fixed, env=fo) as gb:
            return gb.holds()


def evaluate(s: Structure, f, val: Valuation | None = None, cfg: EvalConfig | None = None) -> bool:
    """Truth of ``f`` in ``s`` under ``val``; surface sugar uses its usual meaning."""
    val = val or Valuation()
    cfg = cfg or DEFAULT_CONFIG
    val.check(s.n)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20_000))
    try:
        return _Evaluator(s, cfg).ev(f, dict(val.fo), dict(val.so))
    finally:
        sys.setrecursionlimit(limit)


# -- Σ1 witnesses -------------------------------------------------------------


def sigma1_form(f):
    """Return ``(block, matrix)`` for ``f`` brought into SNF; it must be Σ1.

    A leading existential block over a matrix free of second-order quantifiers
    is used as is, sugar included: the matrix is evaluated with first-order
    semantics, so rewriting its unbounded universals would only add a block.
    """
    prefix, matrix = so_prefix(f)
    if all(q == "E" for q, _ in prefix) and not _has_so_quantifier(matrix):
        return [v for _, v in prefix], matrix
    g = f
    if not is_core(g):
        g = desugar(g)
    label = classify(g)
    if not (label.kind == "Sigma" and label.m == 1):
        g = to_snf(g)
        label = classify(g)
    if not (label.kind == "Sigma" and label.m == 1):
        raise FormulaError(f"expected a Sigma_1 sentence, got {label}")
    prefix, matrix = so_prefix(g)
    return [v for _, v in prefix], matrix


def find_witness(s: Structure, f, cfg: EvalConfig | None = None, val: Valuation | None = None):
    """A valuation of the leading existential block making the matrix true, or None."""
    cfg = cfg or DEFAULT_CONFIG
    val = val or Valuation()
    block, matrix = sigma1_form(f)
    if cfg.strategy == "enumerate":
        ev = _Evaluator(s, cfg)
        ranges = [enumerate_relations(s.n, v.arity, v.exponent, cfg) for v in block]
        lists = [list(r) for r in ranges]
        for combo in itertools.product(*lists):
            so = {**val.so, **dict(zip(block, combo))}
            if ev.ev(matrix, dict(val.fo), so):
                return Valuation(dict(val.fo), so)
        return None
    with GroundedBlock(s, block, matrix, True, fixed=dict(val.so), env=val.fo) as gb:
        w = gb.witness()
    if w is None:
        return None
    return Valuation(dict(val.fo), {**val.so, **w})


def check_witness(s: Structure, f, w: Valuation, cfg: EvalConfig | None = None) -> bool:
    """Evaluate the matrix of Σ1 sentence ``f`` under the guessed valuation ``w``."""
    block, matrix = sigma1_form(f)
    missing = [v for v in block if v not in w.so]
    if missing:
        raise BoundViolation(f"witness does not assign {', '.join(map(str, missing))}")
    w.check(s.n)
    return evaluate(s, matrix, w, cfg)
