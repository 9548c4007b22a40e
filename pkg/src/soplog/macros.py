"""Formula generators for bounded arithmetic, cardinality, clique and DNF queries.

Binary numbers below ``2^(ceil(log n)^k)`` live in relations of arity ``k+1``:
the tuple ``(a, b)`` says that the bit at position ``a`` (a k-tuple over
``B = {0..ceil(log n)-1}``, ordered numerically) is ``b``.  Position ``0..0``
holds the least significant bit.

Every generator returns a core formula.  Macros come in two flavours:
``name_with(...)`` takes its auxiliary relations as free variables so larger
formulas can share them, and ``name(k, ...)`` closes them with existential
second-order quantifiers.  A :class:`Num` names a number stored in a whole
relation or in one section ``R|prefix`` of a wider relation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import MalformedEncoding, OutOfRange
from .formula.ast import (
    Const,
    Exists,
    Forall,
    ForallIn,
    Formula,
    Not,
    SOAtom,
    SOForall,
    SOVar,
    Var,
    as_term,
    conj,
    disj,
    eq,
    exists,
    rel,
    so_exists,
)
from .formula.normal import Namer
from .structure import clog2

ZERO = Const("0")
ONE = Const("1")
LOGN = Const("logn")


class MacroContext:
    """Source of fresh variable names shared by nested macro calls."""

    def __init__(self, taken=()):
        self.namer = Namer(taken)

    def fo(self, base: str = "y", count: int = 1) -> list[str]:
        return [self.namer.fresh(base) for _ in range(count)]

    def so(self, base: str, arity: int, exponent: int) -> SOVar:
        return SOVar(self.namer.fresh(base), arity, exponent)

    def index_set(self, k: int) -> SOVar:
        return self.so("I", k, k)

    def number(self, base: str, k: int) -> SOVar:
        return self.so(base, k + 1, k)


def _ctx(ctx: MacroContext | None, *vars_) -> MacroContext:
    if ctx is not None:
        return ctx
    vars_ = [v.var if isinstance(v, Num) else v for v in vars_]
    return MacroContext(v.name for v in vars_ if isinstance(v, SOVar))


@dataclass(frozen=True)
class Num:
    """A number held in ``var`` restricted to tuples starting with ``prefix``."""

    var: SOVar
    prefix: tuple = ()

    def at(self, pos: Sequence, bit) -> Formula:
        args = tuple(as_term(t) for t in (*self.prefix, *pos, bit))
        return SOAtom(self.var, args)


def num(x) -> Num:
    return x if isinstance(x, Num) else Num(x)


def _section(x, xs) -> Num:
    """Section ``x|xs`` of a relation (or of a section)."""
    x = num(x)
    return Num(x.var, (*x.prefix, *_terms(xs)))


def _terms(xs) -> list:
    return [as_term(x) for x in xs]


# -- tuple order --------------------------------------------------------------


def zero_tuple(xs) -> Formula:
    return conj(eq(x, 0) for x in xs)


def max_tuple(xs) -> Formula:
    """Every component equals ``logn - 1``."""
    return conj(rel("SUCC", x, "logn") for x in xs)


def leq_tuple(k: int, xs, ys) -> Formula:
    """Numerical order on k-tuples, most significant component first."""
    xs, ys = _terms(xs), _terms(ys)
    if len(xs) != k or len(ys) != k:
        raise ValueError("tuple length must equal k")
    if k == 1:
        return rel("LEQ", xs[0], ys[0])
    head = conj(rel("LEQ", xs[0], ys[0]), Not(eq(xs[0], ys[0])))
    return disj(head, conj(eq(xs[0], ys[0]), leq_tuple(k - 1, xs[1:], ys[1:])))


def lt_tuple(k: int, xs, ys) -> Formula:
    xs, ys = _terms(xs), _terms(ys)
    head = conj(rel("LEQ", xs[0], ys[0]), Not(eq(xs[0], ys[0])))
    if k == 1:
        return head
    return disj(head, conj(eq(xs[0], ys[0]), lt_tuple(k - 1, xs[1:], ys[1:])))


def succ_tuple(k: int, xs, ys) -> Formula:
    """``ys`` is the successor of ``xs`` in the numerical order of ``B^k``."""
    xs, ys = _terms(xs), _terms(ys)
    if len(xs) != k or len(ys) != k:
        raise ValueError("tuple length must equal k")
    below = conj(rel("LEQ", ys[0], LOGN), Not(eq(ys[0], LOGN)))
    if k == 1:
        return conj(below, rel("SUCC", xs[0], ys[0]))
    same = conj(eq(ys[0], xs[0]), succ_tuple(k - 1, xs[1:], ys[1:]))
    carry = conj(
        rel("SUCC", xs[0], ys[0]),
        max_tuple(xs[1:]),
        zero_tuple(ys[1:]),
    )
    return conj(below, disj(same, carry))


def def_k(k: int, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    """``I`` is exactly ``B^k``: it contains 0..0 and is closed under successor."""
    if I.arity != k:
        raise ValueError(f"{I} must have arity {k}")
    ctx = _ctx(ctx, I)
    ys = ctx.fo("y", k)
    zs = ctx.fo("z", k)
    closed = disj(max_tuple(ys), exists(zs, conj(succ_tuple(k, ys, zs), SOAtom(I, tuple(_terms(zs))))))
    return conj(SOAtom(I, (ZERO,) * k), ForallIn(tuple(ys), I, closed))


# -- numbers ------------------------------------------------------------------


def bin_with(X, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    """Every position in ``I`` carries a bit; with the size bound, exactly one."""
    X = num(X)
    ctx = _ctx(ctx, X.var, I)
    xs = ctx.fo("x", I.arity)
    return ForallIn(tuple(xs), I, disj(X.at(xs, ZERO), X.at(xs, ONE)))


def bin_k(k: int, X: SOVar, ctx: MacroContext | None = None) -> Formula:
    ctx = _ctx(ctx, X)
    I = ctx.index_set(k)
    return so_exists([I], conj(def_k(k, I, ctx), bin_with(X, I, ctx)))


def _same_bit(X: Num, Y: Num, pos, ctx) -> Formula:
    (z,) = ctx.fo("b")
    return Exists(z, conj(X.at(pos, z), Y.at(pos, z)))


def eq_with(X, Y, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    X, Y = num(X), num(Y)
    ctx = _ctx(ctx, X.var, Y.var, I)
    xs = ctx.fo("x", I.arity)
    return ForallIn(tuple(xs), I, _same_bit(X, Y, xs, ctx))


def lt_with(X, Y, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    """At some position X has 0 and Y has 1, and above it they agree."""
    X, Y = num(X), num(Y)
    ctx = _ctx(ctx, X.var, Y.var, I)
    k = I.arity
    xs = ctx.fo("x", k)
    ys = ctx.fo("y", k)
    above = ForallIn(tuple(ys), I, disj(leq_tuple(k, ys, xs), _same_bit(X, Y, ys, ctx)))
    return exists(xs, conj(SOAtom(I, tuple(_terms(xs))), X.at(xs, ZERO), Y.at(xs, ONE), above))


def le_with(X, Y, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    ctx = _ctx(ctx, num(X).var, num(Y).var, I)
    return disj(lt_with(X, Y, I, ctx), eq_with(X, Y, I, ctx))


def nonzero_with(X, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    """Some bit is 1 (the negation of BNUM(X, 0) for a well-formed X)."""
    X = num(X)
    ctx = _ctx(ctx, X.var, I)
    xs = ctx.fo("x", I.arity)
    return exists(xs, conj(SOAtom(I, tuple(_terms(xs))), X.at(xs, ONE)))


def cmp_num(k: int, X: SOVar, Y: SOVar, mode: str = "eq", ctx: MacroContext | None = None) -> Formula:
    if mode not in ("eq", "lt"):
        raise ValueError("mode is 'eq' or 'lt'")
    ctx = _ctx(ctx, X, Y)
    I = ctx.index_set(k)
    body = (eq_with if mode == "eq" else lt_with)(X, Y, I, ctx)
    return so_exists([I], conj(def_k(k, I, ctx), bin_with(X, I, ctx), bin_with(Y, I, ctx), body))


def bnum_with(X, x, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    """``X`` holds the binary representation of the element ``x``.

    Only positions whose leading components are all 0 may carry bits of
    ``x``; for k = 1 that prefix condition is empty.
    """
    X = num(X)
    ctx = _ctx(ctx, X.var, I)
    k = I.arity
    x = as_term(x)
    ys = _terms(ctx.fo("y", k))
    bit = rel("BIT", x, ys[-1])
    match = disj(conj(X.at(ys, ONE), bit), conj(X.at(ys, ZERO), Not(bit)))
    cases = [conj(zero_tuple(ys[:-1]), match)]
    if k > 1:
        cases.append(conj(disj(Not(eq(y, 0)) for y in ys[:-1]), X.at(ys, ZERO)))
    return ForallIn(tuple(t.name for t in ys), I, disj(cases))


def bnum(k: int, X: SOVar, x, ctx: MacroContext | None = None) -> Formula:
    ctx = _ctx(ctx, X)
    I = ctx.index_set(k)
    return so_exists([I], conj(def_k(k, I, ctx), bin_with(X, I, ctx), bnum_with(X, x, I, ctx)))


# -- addition -----------------------------------------------------------------


def _bits(*values):
    return tuple(ONE if v else ZERO for v in values)


def bsum_with(X, Y, Z, W, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    """``X + Y = Z`` by ripple carry; ``W`` holds the carry into each position.

    Overflow is excluded by requiring ``X <= Z`` and ``Y <= Z``.
    """
    X, Y, Z, W = num(X), num(Y), num(Z), num(W)
    ctx = _ctx(ctx, X.var, Y.var, Z.var, W.var, I)
    k = I.arity
    zero = (ZERO,) * k
    xs = ctx.fo("x", k)
    ys = ctx.fo("y", k)

    # first position: no carry in
    first = disj(
        conj(X.at(zero, bx), Y.at(zero, by), Z.at(zero, _bits((a + b) % 2)[0]))
        for (a, b) in itertools.product((0, 1), repeat=2)
        for bx, by in [_bits(a, b)]
    )
    # carry into xs from the preceding position ys
    carry = disj(
        conj(W.at(ys, bw), X.at(ys, bx), Y.at(ys, by), W.at(xs, _bits(c + a + b >= 2)[0]))
        for (c, a, b) in itertools.product((0, 1), repeat=3)
        for bw, bx, by in [_bits(c, a, b)]
    )
    # sum bit at xs
    digit = disj(
        conj(W.at(xs, bw), X.at(xs, bx), Y.at(xs, by), Z.at(xs, _bits((c + a + b) % 2)[0]))
        for (c, a, b) in itertools.product((0, 1), repeat=3)
        for bw, bx, by in [_bits(c, a, b)]
    )
    step = disj(
        conj(zero_tuple(xs), first),
        conj(exists(ys, conj(succ_tuple(k, ys, xs), carry)), digit),
    )
    return conj(
        bin_with(X, I, ctx),
        bin_with(Y, I, ctx),
        bin_with(Z, I, ctx),
        bin_with(W, I, ctx),
        W.at(zero, ZERO),
        le_with(X, Z, I, ctx),
        le_with(Y, Z, I, ctx),
        ForallIn(tuple(xs), I, step),
    )


def bsum(k: int, X: SOVar, Y: SOVar, Z: SOVar, ctx: MacroContext | None = None) -> Formula:
    ctx = _ctx(ctx, X, Y, Z)
    I = ctx.index_set(k)
    W = ctx.number("W", k)
    return so_exists([I, W], conj(def_k(k, I, ctx), bsum_with(X, Y, Z, W, I, ctx)))


# -- multiplication -----------------------------------------------------------


def _section_copy(A: Num, B: Num, I: SOVar, ctx) -> Formula:
    return eq_with(A, B, I, ctx)


def shift_with(S, X, I: SOVar, ctx: MacroContext | None = None) -> Formula:
    """Section ``S|a`` of the i-th position ``a`` holds ``X`` shifted left by i bits (truncated)."""
    X = num(X)
    ctx = _ctx(ctx, S, X.var, I)
    k = I.arity
    xs = ctx.fo("x", k)
    ys = ctx.fo("y", k)
    zs = ctx.fo("z", k)
    zps = ctx.fo("z", k)
    (b,) = ctx.fo("b")
    sx, sy = _section(S, xs), _section(S, ys)
    inner = ForallIn(
        tuple(zs),
        I,
        disj(
            conj(zero_tuple(zs), sx.at(zs, ZERO)),
            exists(zps + [b], conj(succ_tuple(k, zps, zs), sy.at(zps, b), sx.at(zs, b))),
        ),
    )
    return ForallIn(
        tuple(xs),
        I,
        disj(
            conj(zero_tuple(xs), _section_copy(sx, X, I, ctx)),
            exists(ys, conj(succ_tuple(k, ys, xs), inner)),
        ),
    )


def bmult_with(X, Y, Z, I: SOVar, I2: SOVar, R, S, W, ctx: MacroContext | None = None) -> Formula:
    """``X * Y = Z`` by shift-and-add over partial products.

    ``R|a`` is the running product after the multiplier bits up to ``a``,
    ``S|a`` the shifted multiplicand and ``W|a`` the carries of step ``a``.
    """
    X, Y, Z = num(X), num(Y), num(Z)
    ctx = _ctx(ctx, X.var, Y.var, Z.var, I, I2, R, S, W)
    k = I.arity
    xs = ctx.fo("x", k)
    ys = ctx.fo("y", k)
    rx, ry = _section(R, xs), _section(R, ys)
    sx, wx = _section(S, xs), _section(W, xs)

    ws = ctx.fo("w", k)
    case_a = conj(zero_tuple(xs), Y.at(xs, ZERO), ForallIn(tuple(ws), I, rx.at(ws, ZERO)))
    case_b = conj(zero_tuple(xs), Y.at(xs, ONE), eq_with(rx, X, I, ctx))
    case_c = conj(Y.at(xs, ZERO), exists(ys, conj(succ_tuple(k, ys, xs), eq_with(rx, ry, I, ctx))))
    case_d = conj(
        Y.at(xs, ONE),
        exists(ys, conj(succ_tuple(k, ys, xs), bsum_with(ry, sx, rx, wx, I, ctx))),
    )
    steps = ForallIn(tuple(xs), I, disj(case_a, case_b, case_c, case_d))

    # the shift must not drop a 1 below a multiplier bit that is still used
    us = ctx.fo("u", k)
    ps = ctx.fo("y", k)
    ls = ctx.fo("l", k)
    vs = ctx.fo("x", k)
    sp = _section(S, ps)
    lossless = ForallIn(
        tuple(vs),
        I,
        disj(
            zero_tuple(vs),
            exists(ps, conj(succ_tuple(k, ps, vs), exists(ls, conj(max_tuple(ls), sp.at(ls, ZERO))))),
            ForallIn(tuple(us), I, disj(lt_tuple(k, us, vs), Y.at(us, ZERO))),
        ),
    )

    # the product is the last section of R
    top = ctx.fo("l", k)
    result = exists(top, conj(max_tuple(top), eq_with(_section(R, top), Z, I, ctx)))

    return conj(
        bin_with(X, I, ctx),
        bin_with(Y, I, ctx),
        bin_with(Z, I, ctx),
        def_k(2 * k, I2, ctx),
        bin_with(R, I2, ctx),
        bin_with(S, I2, ctx),
        bin_with(W, I2, ctx),
        shift_with(S, X, I, ctx),
        lossless,
        steps,
        result,
    )


def mult_aux_vars(k: int, ctx: MacroContext) -> tuple:
    return (
        ctx.so("J", 2 * k, 2 * k),
        ctx.so("R", 2 * k + 1, 2 * k),
        ctx.so("S", 2 * k + 1, 2 * k),
        ctx.so("W", 2 * k + 1, 2 * k),
    )


def bmult(k: int, X: SOVar, Y: SOVar, Z: SOVar, ctx: MacroContext | None = None) -> Formula:
    ctx = _ctx(ctx, X, Y, Z)
    I = ctx.index_set(k)
    I2, R, S, W = mult_aux_vars(k, ctx)
    return so_exists(
        [I, I2, R, S, W],
        conj(def_k(k, I, ctx), bmult_with(X, Y, Z, I, I2, R, S, W, ctx)),
    )


# -- division -----------------------------------------------------------------


def bdiv_with(X, Y, Z, M, I: SOVar, I2: SOVar, A, R, S, W, W2,
              ctx: MacroContext | None = None) -> Formula:
    """``Y * Z + M = X`` with ``M < Y``; ``A`` holds the product ``Y * Z``."""
    ctx = _ctx(ctx, X, Y, Z, M, I, I2, A, R, S, W, W2)
    return conj(
        bin_with(X, I, ctx),
        bin_with(Y, I, ctx),
        bin_with(Z, I, ctx),
        bin_with(M, I, ctx),
        bin_with(A, I, ctx),
        nonzero_with(Y, I, ctx),
        lt_with(M, Y, I, ctx),
        bmult_with(Z, Y, A, I, I2, R, S, W, ctx),
        bsum_with(A, M, X, W2, I, ctx),
    )


def div_aux_vars(k: int, ctx: MacroContext) -> tuple:
    I2, R, S, W = mult_aux_vars(k, ctx)
    return ctx.number("A", k), I2, R, S, W, ctx.number("V", k)


def bdiv(k: int, X: SOVar, Y: SOVar, Z: SOVar, M: SOVar, ctx: MacroContext | None = None) -> Formula:
    ctx = _ctx(ctx, X, Y, Z, M)
    I = ctx.index_set(k)
    A, I2, R, S, W, W2 = div_aux_vars(k, ctx)
    return so_exists(
        [I, A, I2, R, S, W, W2],
        conj(def_k(k, I, ctx), bdiv_with(X, Y, Z, M, I, I2, A, R, S, W, W2, ctx)),
    )


# -- cardinality, clique, DNF ----------------------------------------------------


def card_leq_with(X: SOVar, Y: SOVar, R: SOVar, ctx: MacroContext | None = None) -> Formula:
    """``R`` maps ``X`` injectively into ``Y``."""
    ctx = _ctx(ctx, X, Y, R)
    xs = ctx.fo("x", X.arity)
    ys = ctx.fo("y", Y.arity)
    zs = ctx.fo("z", X.arity)
    same = conj(eq(a, b) for a, b in zip(zs, xs))
    unique = ForallIn(tuple(zs), X, disj(same, Not(SOAtom(R, tuple(_terms(zs + ys))))))
    return ForallIn(
        tuple(xs),
        X,
        exists(ys, conj(SOAtom(Y, tuple(_terms(ys))), SOAtom(R, tuple(_terms(xs + ys))), unique)),
    )


def injection_var(X: SOVar, Y: SOVar, ctx: MacroContext) -> SOVar:
    if X.exponent != Y.exponent:
        raise ValueError("cardinality comparison needs equal exponents")
    return ctx.so("R", X.arity + Y.arity, X.exponent)


def card_leq(X: SOVar, Y: SOVar, ctx: MacroContext | None = None) -> Formula:
    """``|X| <= |Y|``: some relation maps ``X`` injectively into ``Y``."""
    ctx = _ctx(ctx, X, Y)
    R = injection_var(X, Y, ctx)
    return so_exists([R], card_leq_with(X, Y, R, ctx))


def card_eq(X: SOVar, Y: SOVar, ctx: MacroContext | None = None) -> Formula:
    ctx = _ctx(ctx, X, Y)
    R1, R2 = injection_var(X, Y, ctx), injection_var(Y, X, ctx)
    return so_exists([R1, R2], conj(card_leq_with(X, Y, R1, ctx), card_leq_with(Y, X, R2, ctx)))


def clique_formula(k: int) -> Formula:
    """Sentence over unary ``V`` and binary ``E``: a clique of exactly ``ceil(log n)^k`` vertices exists.

    The two injections behind ``|S| = |I|`` join the leading block, so the
    sentence is already in Sigma_1 normal form.
    """
    ctx = MacroContext()
    I = ctx.so("I", k, k)
    S = ctx.so("S", 1, k)
    R1, R2 = injection_var(S, I, ctx), injection_var(I, S, ctx)
    x, y = ctx.fo("x", 2)
    adjacent = ForallIn((y,), S, disj(eq(x, y), conj(rel("E", x, y), rel("E", y, x))))
    body = conj(
        def_k(k, I, ctx),
        card_leq_with(S, I, R1, ctx),
        card_leq_with(I, S, R2, ctx),
        ForallIn((x,), S, conj(rel("V", x), adjacent)),
    )
    return so_exists([I, S, R1, R2], body)


DNF_ALPHABET = ("(", ")", "∧", "∨", "¬", "0", "1", "X")


def _between(lo, x, hi) -> Formula:
    return conj(rel("LEQ", lo, x), rel("LEQ", x, hi))


def _strictly_between(lo, x, hi) -> Formula:
    return conj(rel("LEQ", lo, x), Not(eq(lo, x)), rel("LEQ", x, hi), Not(eq(x, hi)))


class _DnfParts:
    """Pieces of the DNF queries over clause endpoints ``xb`` and ``xc``.

    Both a piece and its dual are written positively.  Each dual relies on a
    neighbouring position existing, which holds whenever the position lies
    strictly inside a clause.
    """

    def __init__(self, ctx: MacroContext, xb: str, xc: str):
        self.ctx, self.xb, self.xc = ctx, xb, xc

    def inside(self, x) -> Formula:
        return _strictly_between(self.xb, x, self.xc)

    def outside(self, x) -> Formula:
        return disj(Not(rel("LEQ", self.xb, x)), eq(self.xb, x), Not(rel("LEQ", x, self.xc)), eq(x, self.xc))

    def after(self, x, test) -> Formula:
        (q,) = self.ctx.fo("q")
        return Exists(q, conj(rel("SUCC", x, q), test(q)))

    def before(self, x, test) -> Formula:
        (p,) = self.ctx.fo("p")
        return Exists(p, conj(rel("SUCC", p, x), test(p)))

    def negated(self, x) -> Formula:
        return self.before(x, lambda p: rel("I_neg", p))

    def plain(self, x) -> Formula:
        return self.before(x, lambda p: Not(rel("I_neg", p)))

    def name_ends(self, x) -> Formula:
        return self.after(x, lambda q: conj(Not(rel("I_0", q)), Not(rel("I_1", q))))

    def name_goes_on(self, x) -> Formula:
        return self.after(x, lambda q: disj(rel("I_0", q), rel("I_1", q)))

    @staticmethod
    def same_char(x, x2) -> Formula:
        return disj(conj(rel(s, x), rel(s, x2)) for s in ("I_X", "I_0", "I_1"))

    @staticmethod
    def different_char(x, x2) -> Formula:
        return conj(disj(Not(rel(s, x)), Not(rel(s, x2))) for s in ("I_X", "I_0", "I_1"))

    def clause(self) -> Formula:
        """``xb..xc`` is a pair of matching parentheses with none in between."""
        (y,) = self.ctx.fo("y")
        return conj(
            rel("I_lp", self.xb),
            rel("I_rp", self.xc),
            rel("LEQ", self.xb, self.xc),
            Not(eq(self.xb, self.xc)),
            Forall(y, disj(self.outside(y), conj(Not(rel("I_lp", y)), Not(rel("I_rp", y))))),
        )

    def not_clause(self) -> Formula:
        (y,) = self.ctx.fo("y")
        return disj(
            Not(rel("I_lp", self.xb)),
            Not(rel("I_rp", self.xc)),
            Not(rel("LEQ", self.xb, self.xc)),
            eq(self.xb, self.xc),
            Exists(y, conj(self.inside(y), disj(rel("I_lp", y), rel("I_rp", y)))),
        )

    def pair(self):
        """``(H, (a, a2), start, chain)`` for a complementary pair starting at ``a``, ``a2``.

        ``H`` matches the characters of the two variable names one by one,
        starting at their ``X`` and stopping where both names end.
        """
        ctx = self.ctx
        H = ctx.so("H", 2, 2)
        a, a2 = ctx.fo("a", 2)
        x, x2 = ctx.fo("x", 2)
        y, y2 = ctx.fo("y", 2)
        start = conj(
            self.inside(a),
            self.inside(a2),
            rel("I_X", a),
            rel("I_X", a2),
            disj(conj(self.negated(a), self.plain(a2)), conj(self.plain(a), self.negated(a2))),
        )
        no_start = disj(
            self.outside(a),
            self.outside(a2),
            Not(rel("I_X", a)),
            Not(rel("I_X", a2)),
            conj(self.negated(a), self.negated(a2)),
            conj(self.plain(a), self.plain(a2)),
        )
        h_next = SOAtom(H, (Var(y), Var(y2)))
        step = conj(rel("SUCC", x, y), rel("SUCC", x2, y2))
        chain = ForallIn(
            (x, x2),
            H,
            conj(
                self.inside(x),
                self.inside(x2),
                self.same_char(x, x2),
                disj(conj(self.name_ends(x), self.name_ends(x2)), exists([y, y2], conj(step, h_next))),
            ),
        )
        broken = exists(
            [x, x2],
            conj(
                SOAtom(H, (Var(x), Var(x2))),
                disj(
                    self.outside(x),
                    self.outside(x2),
                    self.different_char(x, x2),
                    conj(
                        disj(self.name_goes_on(x), self.name_goes_on(x2)),
                        exists([y, y2], conj(step, Not(h_next))),
                    ),
                ),
            ),
        )
        return H, (a, a2), start, no_start, chain, broken


def dnf_queries() -> tuple[Formula, Formula]:
    """``(DNFSAT, NODNFSAT)`` over word models of the DNF alphabet.

    NODNFSAT: every clause holds two literals with the same variable name and
    opposite signs.  DNFSAT: some clause holds no such pair.  Unbounded
    universals over positions are surface sugar; the inner second-order
    quantifier ranges over the bijection ``H`` between the two names.
    """
    ctx = MacroContext()
    xb, xc = ctx.fo("c", 2)
    parts = _DnfParts(ctx, xb, xc)
    H, (a, a2), start, no_start, chain, broken = parts.pair()
    linked = SOAtom(H, (Var(a), Var(a2)))
    complementary = so_exists([H], exists([a, a2], conj(start, linked, chain)))
    # for every H: no linked pair starts a match, or H breaks somewhere
    clean = SOForall(H, disj(ForallIn((a, a2), H, no_start), broken))
    nodnfsat = Forall(xb, Forall(xc, disj(parts.not_clause(), complementary)))
    dnfsat = exists([xb, xc], conj(parts.clause(), clean))
    return dnfsat, nodnfsat


# -- data-level numbers and witnesses ----------------------------------------------


def positions(n: int, k: int) -> list[tuple]:
    """``B^k`` in numerical order."""
    return list(itertools.product(range(clog2(n)), repeat=k))


def index_relation(n: int, k: int) -> frozenset:
    return frozenset(positions(n, k))


def capacity(n: int, k: int) -> int:
    return 2 ** (clog2(n) ** k)


def encode_number(n: int, k: int, value: int, prefix: tuple = ()) -> frozenset:
    if not 0 <= value < capacity(n, k):
        raise OutOfRange(f"{value} does not fit in {clog2(n) ** k} bits")
    return frozenset((*prefix, *pos, (value >> i) & 1) for i, pos in enumerate(positions(n, k)))


def decode_number(rel_: frozenset, n: int, k: int) -> int:
    pos = positions(n, k)
    index = {p: i for i, p in enumerate(pos)}
    bits: dict = {}
    for t in rel_:
        if len(t) != k + 1 or t[:k] not in index or t[k] not in (0, 1):
            raise MalformedEncoding(f"tuple {t} is not a position/bit pair")
        if t[:k] in bits:
            raise MalformedEncoding(f"position {t[:k]} carries two bits")
        bits[t[:k]] = t[k]
    missing = [p for p in pos if p not in bits]
    if missing:
        raise MalformedEncoding(f"position {missing[0]} has no bit")
    return sum(bits[p] << i for i, p in enumerate(pos))


def sum_carries(n: int, k: int, a: int, b: int, prefix: tuple = ()) -> frozenset:
    """Carry relation witnessing ``a + b`` (carry into each position)."""
    bits = clog2(n) ** k
    carries, c = [], 0
    for i in range(bits):
        carries.append(c)
        c = (((a >> i) & 1) + ((b >> i) & 1) + c) >= 2
    return frozenset((*prefix, *pos, int(carries[i])) for i, pos in enumerate(positions(n, k)))


def mult_witness(n: int, k: int, a: int, b: int, prefix: tuple = ()) -> dict:
    """Auxiliary relations ``I2, R, S, W`` witnessing ``a * b`` (multiplicand ``a``)."""
    cap = capacity(n, k)
    R, S, W = set(), set(), set()
    partial = 0
    for i, pos in enumerate(positions(n, k)):
        shifted = (a << i) % cap
        previous = partial
        if (b >> i) & 1:
            partial = previous + shifted if i else a
        at = (*prefix, *pos)
        R |= encode_number(n, k, partial % cap, at)
        S |= encode_number(n, k, shifted, at)
        if i and (b >> i) & 1:
            W |= sum_carries(n, k, previous % cap, shifted, at)
        else:
            W |= encode_number(n, k, 0, at)
    return {
        "I2": index_relation(n, 2 * k),
        "R": frozenset(R),
        "S": frozenset(S),
        "W": frozenset(W),
    }


def div_witness(n: int, k: int, x: int, y: int, prefix: tuple = ()) -> dict:
    """Auxiliary relations for ``x = y * q + m``: ``A``, the product ones, and ``V`` for the final sum."""
    q, m = divmod(x, y)
    out = mult_witness(n, k, q, y, prefix)
    out["A"] = encode_number(n, k, q * y, prefix)
    out["V"] = sum_carries(n, k, q * y, m, prefix)
    return out
