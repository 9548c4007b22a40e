"""Immutable AST for SO^plog formulas.

Surface formulas may use ``Not`` anywhere, ``Implies``, ``Iff`` and the
unbounded ``Forall``.  Core formulas use only literals, ``And``, ``Or``,
``Exists``, ``ForallIn`` (the restricted universal) and the two second-order
quantifiers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """A constant symbol: one of ``0 1 logn max`` or an input constant."""

    name: str

    def __str__(self):
        return self.name


Term = Union[Var, Const]


def as_term(t) -> Term:
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, int):
        if t in (0, 1):
            return Const(str(t))
        raise ValueError(f"only 0 and 1 are numeric constants, got {t}")
    if t in ("0", "1", "logn", "max"):
        return Const(t)
    return Var(str(t))


@dataclass(frozen=True)
class SOVar:
    name: str
    arity: int
    exponent: int

    def __post_init__(self):
        if self.arity < 1 or self.exponent < 0:
            raise ValueError(f"bad second-order variable {self.name}^{{{self.arity},{self.exponent}}}")

    def __str__(self):
        return f"{self.name}^{{{self.arity},{self.exponent}}}"


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple


@dataclass(frozen=True)
class SOAtom(Formula):
    var: SOVar
    args: tuple

    def __post_init__(self):
        if len(self.args) != self.var.arity:
            from ..errors import ArityMismatch

            raise ArityMismatch(
                f"{self.var.name} has arity {self.var.arity} but got {len(self.args)} arguments"
            )


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __post_init__(self):
        if len(self.args) == 1:
            raise ValueError("And needs zero or at least two operands; use conj()")


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __post_init__(self):
        if len(self.args) == 1:
            raise ValueError("Or needs zero or at least two operands; use disj()")


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    """Unbounded first-order universal; surface sugar only."""

    var: str
    body: Formula


@dataclass(frozen=True)
class ForallIn(Formula):
    """Restricted universal: for all tuples ``vars`` in ``guard``, ``body``."""

    vars: tuple
    guard: SOVar
    body: Formula

    def __post_init__(self):
        if len(self.vars) != self.guard.arity:
            from ..errors import ArityMismatch

            raise ArityMismatch(
                f"guard {self.guard.name} has arity {self.guard.arity}, got {len(self.vars)} variables"
            )
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("restricted universal needs distinct variables")


@dataclass(frozen=True)
class SOExists(Formula):
    var: SOVar
    body: Formula


@dataclass(frozen=True)
class SOForall(Formula):
    var: SOVar
    body: Formula


TRUE = And(())
FALSE = Or(())

LITERAL_TYPES = (Eq, Rel, SOAtom)
SO_QUANTIFIERS = (SOExists, SOForall)


# -- constructors -------------------------------------------------------------


def _flatten(kind, parts: Iterable[Formula]):
    out = []
    for p in parts:
        if type(p) is kind:
            out.extend(p.args)
        else:
            out.append(p)
    return out


def conj(*parts: Formula) -> Formula:
    if len(parts) == 1 and not isinstance(parts[0], Formula):
        parts = tuple(parts[0])
    items = [p for p in _flatten(And, parts) if p != TRUE]
    if any(p == FALSE for p in items):
        return FALSE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(*parts: Formula) -> Formula:
    if len(parts) == 1 and not isinstance(parts[0], Formula):
        parts = tuple(parts[0])
    items = [p for p in _flatten(Or, parts) if p != FALSE]
    if any(p == TRUE for p in items):
        return TRUE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def neg(f: Formula) -> Formula:
    return f.body if isinstance(f, Not) else Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return Iff(a, b)


def exists(names: Sequence[str] | str, body: Formula) -> Formula:
    if isinstance(names, str):
        names = [names]
    for name in reversed(list(names)):
        body = Exists(name, body)
    return body


def forall(names: Sequence[str] | str, body: Formula) -> Formula:
    if isinstance(names, str):
        names = [names]
    for name in reversed(list(names)):
        body = Forall(name, body)
    return body


def forall_in(names: Sequence[str], guard: SOVar, body: Formula) -> Formula:
    return ForallIn(tuple(names), guard, body)


def so_exists(vars_: Sequence[SOVar], body: Formula) -> Formula:
    for v in reversed(list(vars_)):
        body = SOExists(v, body)
    return body


def so_forall(vars_: Sequence[SOVar], body: Formula) -> Formula:
    for v in reversed(list(vars_)):
        body = SOForall(v, body)
    return body


def eq(a, b) -> Formula:
    return Eq(as_term(a), as_term(b))


def rel(name: str, *args) -> Formula:
    return Rel(name, tuple(as_term(a) for a in args))


def atom(var: SOVar, *args) -> Formula:
    return SOAtom(var, tuple(as_term(a) for a in args))


def is_literal(f: Formula) -> bool:
    return isinstance(f, LITERAL_TYPES) or (isinstance(f, Not) and isinstance(f.body, LITERAL_TYPES))


def children(f: Formula) -> tuple:
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, (Not, Exists, Forall, ForallIn, SOExists, SOForall)):
        return (f.body,)
    if isinstance(f, (Implies, Iff)):
        return (f.left, f.right)
    return ()


def walk(f: Formula):
    """Pre-order traversal."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def size(f: Formula) -> int:
    return sum(1 for _ in walk(f))
