"""Concrete syntax (``.sop``) for SO^plog formulas.

::

    SEx X^{r,k} . phi        SAll X^{r,k} . phi
    Ex x y . phi             All x . phi            (unbounded, sugar)
    All x y in X . phi       (restricted universal over the tuples of X)
    ~ phi   phi & psi   phi | psi   phi -> psi   phi <-> psi
    R(t, ...)   X(t, ...)   X^{r,k}(t, ...)   t = t   t != t   t <= t
    true   false

Terms are variables, ``0``, ``1``, ``logn``, ``max`` or ``$c`` for an input
constant ``c``.  A bare ``X(...)`` is a second-order atom when ``X`` is bound
by an enclosing ``SEx``/``SAll``; otherwise it names a relation symbol.  Free
second-order variables are written with their signature, ``X^{r,k}(...)``.
"""
from __future__ import annotations

import re

from ..errors import ArityMismatch, ParseError
from .ast import (
    FALSE,
    TRUE,
    And,
    Const,
    Eq,
    Exists,
    Forall,
    ForallIn,
    Formula,
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
    is_literal,
)

KEYWORDS = {"Ex", "All", "SEx", "SAll", "in", "true", "false", "logn", "max"}
BUILTIN_TERMS = {"0", "1", "logn", "max"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<op><->|->|!=|<=|[()&|~=.,^{}])
  | (?P<const>\$[A-Za-z_][A-Za-z0-9_']*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


def tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, free_so: dict | None):
        self.toks = tokenize(text)
        self.i = 0
        self.scope: list[dict] = [dict(free_so or {})]

    # token helpers
    def peek(self, offset=0):
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def at(self, value, offset=0):
        kind, text, _ = self.peek(offset)
        return text == value and kind in ("op", "name")

    def take(self, value=None, kind=None):
        tok = self.peek()
        if value is not None and not (tok[1] == value and tok[0] in ("op", "name")):
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def lookup_so(self, name):
        for frame in reversed(self.scope):
            if name in frame:
                return frame[name]
        return None

    # grammar
    def formula(self) -> Formula:
        return self.iff()

    def iff(self):
        left = self.imp()
        while self.at("<->"):
            self.take()
            left = Iff(left, self.imp())
        return left

    def imp(self):
        left = self.disj()
        if self.at("->"):
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self):
        parts = [self.conj()]
        while self.at("|"):
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.at("&"):
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        if self.at("~"):
            self.take()
            return Not(self.unary())
        return self.primary()

    def primary(self):
        kind, text, pos = self.peek()
        if kind == "name" and text in ("Ex", "All"):
            return self.fo_quantifier()
        if kind == "name" and text in ("SEx", "SAll"):
            return self.so_quantifier()
        if self.at("("):
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if kind == "name" and text == "true":
            self.take()
            return TRUE
        if kind == "name" and text == "false":
            self.take()
            return FALSE
        return self.atom()

    def varlist(self):
        names = []
        while True:
            kind, text, pos = self.peek()
            if kind != "name" or text in KEYWORDS:
                break
            self.take()
            names.append(text)
            if self.at(","):
                self.take()
        if not names:
            raise ParseError("expected a variable", self.peek()[2])
        return names

    def fo_quantifier(self):
        kw = self.take()[1]
        names = self.varlist()
        if kw == "All" and self.at("in"):
            self.take()
            guard = self.so_ref(len(names))
            self.take(".")
            return ForallIn(tuple(names), guard, self.formula())
        self.take(".")
        body = self.formula()
        cls = Exists if kw == "Ex" else Forall
        for name in reversed(names):
            body = cls(name, body)
        return body

    def signature(self):
        self.take("^")
        self.take("{")
        r = int(self.take(kind="num")[1])
        self.take(",")
        k = int(self.take(kind="num")[1])
        self.take("}")
        return r, k

    def so_quantifier(self):
        kw = self.take()[1]
        kind, name, pos = self.take(kind="name")
        if name in KEYWORDS:
            raise ParseError(f"{name!r} is reserved", pos)
        r, k = self.signature()
        try:
            var = SOVar(name, r, k)
        except ValueError as exc:
            raise ParseError(str(exc), pos) from None
        self.take(".")
        self.scope.append({name: var})
        body = self.formula()
        self.scope.pop()
        return (SOExists if kw == "SEx" else SOForall)(var, body)

    def so_ref(self, arity):
        kind, name, pos = self.take(kind="name")
        if self.at("^"):
            r, k = self.signature()
            var = SOVar(name, r, k)
        else:
            var = self.lookup_so(name)
            if var is None:
                raise ParseError(f"guard {name!r} is not a second-order variable in scope", pos)
        if var.arity != arity:
            raise ArityMismatch(f"guard {name} has arity {var.arity}, got {arity} variables (at position {pos})")
        return var

    def term(self):
        kind, text, pos = self.peek()
        if kind == "num":
            if text not in ("0", "1"):
                raise ParseError(f"only 0 and 1 are numeric constants, got {text}", pos)
            self.take()
            return Const(text)
        if kind == "const":
            self.take()
            return Const(text[1:])
        if kind == "name":
            if text in ("logn", "max"):
                self.take()
                return Const(text)
            if text in KEYWORDS:
                raise ParseError(f"unexpected keyword {text!r}", pos)
            self.take()
            return Var(text)
        raise ParseError(f"expected a term, found {text or 'end of input'!r}", pos)

    def atom(self):
        kind, text, pos = self.peek()
        if kind == "name" and text not in KEYWORDS and (self.at("(", 1) or self.at("^", 1)):
            self.take()
            var = None
            if self.at("^"):
                r, k = self.signature()
                var = SOVar(text, r, k)
                bound = self.lookup_so(text)
                if bound is not None and bound != var:
                    raise ParseError(f"signature of {text} conflicts with its binder", pos)
            else:
                var = self.lookup_so(text)
            self.take("(")
            args = [self.term()]
            while self.at(","):
                self.take()
                args.append(self.term())
            self.take(")")
            if var is not None:
                if len(args) != var.arity:
                    raise ArityMismatch(
                        f"{text} has arity {var.arity} but got {len(args)} arguments (at position {pos})"
                    )
                return SOAtom(var, tuple(args))
            return Rel(text, tuple(args))
        left = self.term()
        op = self.peek()
        if op[1] == "=":
            self.take()
            return Eq(left, self.term())
        if op[1] == "!=":
            self.take()
            return Not(Eq(left, self.term()))
        if op[1] == "<=":
            self.take()
            return Rel("LEQ", (left, self.term()))
        raise ParseError(f"expected '=', '!=' or '<=', found {op[1] or 'end of input'!r}", op[2])


def parse(text: str, free_so: dict | None = None) -> Formula:
    """Parse ``.sop`` text.  ``free_so`` maps names to free second-order variables."""
    if free_so is not None and not isinstance(free_so, dict):
        free_so = {v.name: v for v in free_so}
    p = _Parser(text, free_so)
    f = p.formula()
    kind, tok, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {tok!r}", pos)
    return f


# -- pretty printer -----------------------------------------------------------


def _term(t) -> str:
    if isinstance(t, Const) and t.name not in BUILTIN_TERMS:
        return "$" + t.name
    return t.name


class _Printer:
    def __init__(self, free_so=()):
        self.bound: list[SOVar] = []
        self.plain = set(free_so)

    def so_name(self, var: SOVar) -> str:
        for b in reversed(self.bound):
            if b.name == var.name:
                return var.name if b == var else str(var)
        return var.name if var in self.plain else str(var)

    def atomic(self, f) -> bool:
        return is_literal(f) or f in (TRUE, FALSE)

    def sub(self, f) -> str:
        s = self.fmt(f)
        return s if self.atomic(f) else f"({s})"

    def fmt(self, f: Formula) -> str:
        if isinstance(f, Eq):
            return f"{_term(f.left)} = {_term(f.right)}"
        if isinstance(f, Rel):
            if f.name == "LEQ" and len(f.args) == 2:
                return f"{_term(f.args[0])} <= {_term(f.args[1])}"
            return f"{f.name}({', '.join(_term(a) for a in f.args)})"
        if isinstance(f, SOAtom):
            return f"{self.so_name(f.var)}({', '.join(_term(a) for a in f.args)})"
        if f == TRUE:
            return "true"
        if f == FALSE:
            return "false"
        if isinstance(f, Not):
            if isinstance(f.body, Eq):
                return f"{_term(f.body.left)} != {_term(f.body.right)}"
            if isinstance(f.body, Rel) and f.body.name == "LEQ":
                return f"~({self.fmt(f.body)})"
            if self.atomic(f.body) or isinstance(f.body, Not):
                return "~" + self.fmt(f.body)
            return f"~({self.fmt(f.body)})"
        if isinstance(f, And):
            return " & ".join(self.sub(a) for a in f.args)
        if isinstance(f, Or):
            return " | ".join(self.sub(a) for a in f.args)
        if isinstance(f, Implies):
            return f"{self.sub(f.left)} -> {self.sub(f.right)}"
        if isinstance(f, Iff):
            return f"{self.sub(f.left)} <-> {self.sub(f.right)}"
        if isinstance(f, (Exists, Forall)):
            kw = "Ex" if isinstance(f, Exists) else "All"
            names = [f.var]
            body = f.body
            while type(body) is type(f):
                names.append(body.var)
                body = body.body
            return f"{kw} {' '.join(names)} . {self.fmt(body)}"
        if isinstance(f, ForallIn):
            return f"All {' '.join(f.vars)} in {self.so_name(f.guard)} . {self.fmt(f.body)}"
        if isinstance(f, (SOExists, SOForall)):
            kw = "SEx" if isinstance(f, SOExists) else "SAll"
            self.bound.append(f.var)
            try:
                body = self.fmt(f.body)
            finally:
                self.bound.pop()
            return f"{kw} {f.var} . {body}"
        raise TypeError(f"not a formula: {f!r}")


def pretty(f: Formula, free_so=()) -> str:
    """Render ``f``; ``parse(pretty(f))`` rebuilds the same AST."""
    return _Printer(free_so).fmt(f)
