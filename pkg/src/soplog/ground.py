"""Propositional grounding of second-order-free bodies over a fixed structure.

Relation variables become one boolean per candidate tuple; the size bound of
each quantified variable becomes a cardinality constraint.  The solver then
decides a whole block of like second-order quantifiers at once.
"""
from __future__ import annotations

import itertools

from pysat.card import CardEnc, EncType
from pysat.formula import IDPool
from pysat.solvers import Solver

from .errors import BoundViolation, FormulaError
from .formula.ast import (
    And,
    Const,
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
)
from .structure import Structure

SOLVER_NAME = "g3"
_GROUNDER_IDS = itertools.count()


def bound_of(var: SOVar, n: int) -> int:
    from .structure import clog2

    return clog2(n) ** var.exponent


class Grounder:
    """Tseitin translation of a first-order body.

    ``fixed`` maps second-order variables to known tuple sets (folded into
    constants); ``symbolic`` second-order variables get one SAT variable per
    tuple of ``A^arity``.
    """

    def __init__(self, s: Structure, fixed: dict | None = None, symbolic=(), pool: IDPool | None = None):
        self.s = s
        self.n = s.n
        self.fixed = dict(fixed or {})
        # grounders sharing a pool agree on the literals of common symbolic variables
        self.pool = pool if pool is not None else IDPool()
        self._token = next(_GROUNDER_IDS)
        self.clauses: list[list[int]] = []
        self.symbolic = {}
        for var in symbolic:
            self.add_symbolic(var)
        self._memo: dict = {}
        self._free: dict = {}
        self._gates: dict = {}
        self._keep: list = []
        self._gate_ids = itertools.count()

    # -- variables ------------------------------------------------------------

    def add_symbolic(self, var: SOVar):
        if var in self.symbolic:
            return
        tuples = list(itertools.product(range(self.n), repeat=var.arity))
        self.symbolic[var] = {t: self.pool.id((var, t)) for t in tuples}

    def tuple_lit(self, var: SOVar, t: tuple):
        if var in self.symbolic:
            return self.symbolic[var][t]
        if var in self.fixed:
            return t in self.fixed[var]
        raise FormulaError(f"second-order variable {var} is not assigned")

    def cardinality_clauses(self, var: SOVar) -> list[list[int]]:
        lits = list(self.symbolic[var].values())
        bound = bound_of(var, self.n)
        if bound >= len(lits):
            return []
        if bound == 0:
            return [[-lit] for lit in lits]
        enc = CardEnc.atmost(lits=lits, bound=bound, vpool=self.pool, encoding=EncType.seqcounter)
        return enc.clauses

    def assumptions(self, var: SOVar, tuples) -> list[int]:
        tuples = set(tuples)
        return [lit if t in tuples else -lit for t, lit in self.symbolic[var].items()]

    def decode(self, model_set: set, var: SOVar) -> frozenset:
        return frozenset(t for t, lit in self.symbolic[var].items() if lit in model_set)

    # -- gates ----------------------------------------------------------------

    def _fresh(self) -> int:
        return self.pool.id(("gate", self._token, next(self._gate_ids)))

    def gate_and(self, lits) -> int | bool:
        out = []
        for lit in lits:
            if lit is False:
                return False
            if lit is True:
                continue
            out.append(lit)
        if not out:
            return True
        key = ("and", frozenset(out))
        if len(key[1]) == 1:
            return out[0]
        if any(-lit in key[1] for lit in key[1]):
            return False
        cached = self._gates.get(key)
        if cached is not None:
            return cached
        v = self._fresh()
        self._gates[key] = v
        for lit in key[1]:
            self.clauses.append([-v, lit])
        self.clauses.append([v] + [-lit for lit in key[1]])
        return v

    def gate_or(self, lits) -> int | bool:
        res = self.gate_and(_neg(lit) for lit in lits)
        return _neg(res)

    # -- translation ----------------------------------------------------------

    def term(self, t, env) -> int:
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise FormulaError(f"free variable {t.name} is not assigned") from None
        return self.s.constant(t.name)

    def free_fo(self, f) -> tuple:
        key = id(f)
        got = self._free.get(key)
        if got is None:
            from .formula.normal import free_vars

            got = tuple(sorted(free_vars(f)[0]))
            self._free[key] = got
            self._keep.append(f)
        return got

    def ground(self, f, env: dict):
        if isinstance(f, Eq):
            return self.term(f.left, env) == self.term(f.right, env)
        if isinstance(f, Rel):
            args = tuple(self.term(a, env) for a in f.args)
            try:
                return self.s.holds(f.name, args)
            except KeyError:
                raise FormulaError(f"relation {f.name} is not in the vocabulary") from None
        if isinstance(f, SOAtom):
            return self.tuple_lit(f.var, tuple(self.term(a, env) for a in f.args))
        if isinstance(f, Not):
            return _neg(self.ground(f.body, env))

        names = self.free_fo(f)
        try:
            key = (id(f), tuple(env[v] for v in names))
        except KeyError as exc:
            raise FormulaError(f"free variable {exc.args[0]} is not assigned") from None
        got = self._memo.get(key)
        if got is not None:
            return got
        got = self._ground_compound(f, env)
        self._memo[key] = got
        return got

    def _lazy_and(self, items):
        lits = []
        for lit in items:
            if lit is False:
                return False
            if lit is not True:
                lits.append(lit)
        return self.gate_and(lits)

    def _lazy_or(self, items):
        lits = []
        for lit in items:
            if lit is True:
                return True
            if lit is not False:
                lits.append(lit)
        return self.gate_or(lits)

    def _ground_compound(self, f, env):
        if isinstance(f, And):
            return self._lazy_and(self.ground(a, env) for a in f.args)
        if isinstance(f, Or):
            return self._lazy_or(self.ground(a, env) for a in f.args)
        if isinstance(f, Implies):
            return self._lazy_or((_neg(self.ground(f.left, env)), self.ground(f.right, env)))
        if isinstance(f, Iff):
            a, b = self.ground(f.left, env), self.ground(f.right, env)
            return self._lazy_or(
                (self._lazy_and((a, b)), self._lazy_and((_neg(a), _neg(b))))
            )
        if isinstance(f, Exists):
            return self._lazy_or(
                self.ground(f.body, {**env, f.var: a}) for a in range(self.n)
            )
        if isinstance(f, Forall):
            return self._lazy_and(
                self.ground(f.body, {**env, f.var: a}) for a in range(self.n)
            )
        if isinstance(f, ForallIn):
            var = f.guard
            if var in self.fixed and var not in self.symbolic:
                # restricted universal: only the tuples actually in the guard
                return self._lazy_and(
                    self.ground(f.body, {**env, **dict(zip(f.vars, t))})
                    for t in sorted(self.fixed[var])
                )

            def parts():
                for t in itertools.product(range(self.n), repeat=var.arity):
                    member = self.tuple_lit(var, t)
                    if member is False:
                        continue
                    body = self.ground(f.body, {**env, **dict(zip(f.vars, t))})
                    yield self._lazy_or((_neg(member), body))

            return self._lazy_and(parts())
        if isinstance(f, (SOExists, SOForall)):
            raise FormulaError("grounding needs a body free of second-order quantifiers")
        raise TypeError(f"not a formula: {f!r}")


def _neg(lit):
    if lit is True:
        return False
    if lit is False:
        return True
    return -lit


class GroundedBlock:
    """A block ``Q X1..Xm . body`` grounded once, queried under many assignments.

    ``free`` second-order variables stay symbolic and are fixed per query by
    solver assumptions, so repeated checks reuse one grounding.
    """

    def __init__(self, s: Structure, block, body, existential=True, free=(), fixed=None, env=None):
        self.s = s
        self.block = tuple(block)
        self.free = tuple(free)
        self.existential = existential
        self.g = Grounder(s, fixed=fixed, symbolic=self.block + self.free)
        self.root = self.g.ground(body, dict(env or {}))
        clauses = list(self.g.clauses)
        for var in self.block + self.free:
            clauses.extend(self.g.cardinality_clauses(var))
        self.solver = Solver(name=SOLVER_NAME, bootstrap_with=clauses)

    def close(self):
        self.solver.delete()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _assume(self, assignment):
        assumptions = []
        for var in self.free:
            tuples = assignment[var]
            if len(tuples) > bound_of(var, self.s.n):
                raise BoundViolation(f"{var} has {len(tuples)} tuples, bound is {bound_of(var, self.s.n)}")
            assumptions.extend(self.g.assumptions(var, tuples))
        return assumptions

    def _solve(self, target: bool, assignment) -> bool:
        root = self.root if target else _neg(self.root)
        if root is False:
            return False
        assumptions = self._assume(assignment or {})
        if root is not True:
            assumptions.append(root)
        return self.solver.solve(assumptions=assumptions)

    def holds(self, assignment=None) -> bool:
        """Truth of the quantified block under ``assignment`` of the free variables."""
        if self.existential:
            return self._solve(True, assignment)
        return not self._solve(False, assignment)

    def witness(self, assignment=None) -> dict | None:
        """Values of the block variables that make the body true (or false for ∀)."""
        if not self._solve(self.existential, assignment):
            return None
        model = set(lit for lit in self.solver.get_model() if lit > 0)
        return {var: self.g.decode(model, var) for var in self.block}

    def models(self, var: SOVar, assignment=None, limit=None):
        """All distinct values of block variable ``var`` in satisfying assignments."""
        if var not in self.block:
            raise ValueError(f"{var} is not in the block")
        seen = []
        root = self.root if self.existential else _neg(self.root)
        if root is False:
            return seen
        base = self._assume(assignment or {})
        if root is not True:
            base.append(root)
        lits = self.g.symbolic[var]
        # blocking clauses hang off a selector so later queries see every model again
        selector = self.g._fresh()
        while self.solver.solve(assumptions=base + [selector]):
            model = set(lit for lit in self.solver.get_model() if lit > 0)
            value = self.g.decode(model, var)
            seen.append(value)
            if limit is not None and len(seen) >= limit:
                break
            self.solver.add_clause([-selector] + [-lit if t in value else lit for t, lit in lits.items()])
        self.solver.add_clause([-selector])
        return seen


def solve_two_blocks(s: Structure, outer, inner, body, outer_existential: bool, fixed=None, env=None) -> bool:
    """Decide ``Q1 outer . Q2 inner . body`` (opposite quantifiers, ``body`` free of them).

    Counterexample-guided: propose values for the outer block that survive
    every inner counterexample seen so far, then ask the solver for a new
    counterexample against the proposal.
    """
    fixed = dict(fixed or {})
    env = dict(env or {})
    outer, inner = tuple(outer), tuple(inner)
    # the proposals look for outer values making body (or its negation) hold for every stored inner value
    want = outer_existential
    pool = IDPool()
    base = Grounder(s, fixed=fixed, symbolic=outer, pool=pool)
    proposals = Solver(name=SOLVER_NAME)
    try:
        for var in outer:
            proposals.append_formula(base.cardinality_clauses(var))
        while proposals.solve():
            model = set(lit for lit in proposals.get_model() if lit > 0)
            guess = {var: base.decode(model, var) for var in outer}
            with GroundedBlock(s, inner, body, existential=not want, fixed={**fixed, **guess}, env=env) as check:
                counter = check.witness()
            if counter is None:
                return want
            g = Grounder(s, fixed={**fixed, **counter}, symbolic=outer, pool=pool)
            root = g.ground(body, env)
            root = root if want else _neg(root)
            if root is False:
                return not want
            proposals.append_formula(g.clauses)
            if root is not True:
                proposals.add_clause([root])
        return not want
    finally:
        proposals.delete()
