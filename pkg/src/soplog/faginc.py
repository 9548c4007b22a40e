"""Compile a nondeterministic random-access machine into an existential sentence.

``compile_machine(m, k, k2, vocab)`` returns a sentence ``SEx X1 .. Xm . phi``
with a first-order ``phi`` (restricted universals only) such that a
structure ``A`` satisfies it iff ``m`` accepts ``bin(A)`` within
``ceil(log n)^k - 1`` steps.

Time instants and work-tape cells are k-tuples over ``B = {0..ceil(log n)-1}``;
numbers (the address, section offsets, ``n^i``) have ``ceil(log n)^k2`` bits.
The address tape content at time ``t`` is the number ``AC|t``, so tape cell
``i`` is number position ``L - 1 - i`` where ``L`` is the address length;
``top`` names position ``L - 1``.  ``AH`` holds the address head as a number
position and ``AB`` marks the head on the boundary cell.

At sizes listed in ``exact_sizes`` (default: n = 2, where ``B`` has a single
element and no run fits) the sentence instead lists the accepted structures.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ExponentTooSmall, MachineNotNormalized, TraceNotAccepting
from .evaluate import EvalConfig, Valuation, check_witness
from .formula.ast import (
    FALSE,
    Const,
    Formula,
    ForallIn,
    Not,
    SOAtom,
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
from .ground import GroundedBlock
from .macros import (
    MacroContext,
    Num,
    bmult_with,
    bnum_with,
    bsum_with,
    capacity,
    def_k,
    encode_number,
    index_relation,
    le_with,
    leq_tuple,
    lt_with,
    max_tuple,
    mult_witness,
    positions,
    succ_tuple,
    sum_carries,
    zero_tuple,
)
from .ratm.machine import (
    ACCEPT,
    ANY,
    BLANK,
    ENDMARK,
    REJECT,
    MachineSpec,
    RunBudget,
    accepting_run,
    accepts,
    address_length,
    read_input,
    work_alphabet,
)
from .structure import Structure, Vocabulary, all_structures, clog2, encode_bin

SYMBOLS = ("0", "1", BLANK)
READS = ("0", "1", ENDMARK)
DEFAULT_EXACT_STEPS = 64


def _terms(xs):
    return tuple(as_term(x) for x in xs)


def _atom(var: SOVar, *parts) -> Formula:
    args = []
    for p in parts:
        args.extend(p if isinstance(p, (list, tuple)) else [p])
    return SOAtom(var, _terms(args))


def _same(xs, ys) -> Formula:
    return conj(eq(a, b) for a, b in zip(_terms(xs), _terms(ys)))


def _differs(xs, ys) -> Formula:
    return disj(Not(eq(a, b)) for a, b in zip(_terms(xs), _terms(ys)))


def _exactly_one(parts) -> Formula:
    parts = list(parts)
    pairs = [disj(Not(a), Not(b)) for a, b in itertools.combinations(parts, 2)]
    return conj(disj(parts), *pairs)


# -- normalization ----------------------------------------------------------------


def check_normalized(m: MachineSpec):
    """Raise MachineNotNormalized unless ``m`` is existential, binary-branching and binary-alphabet."""
    if m.universal_states:
        raise MachineNotNormalized(f"universal states present: {', '.join(m.universal_states)}")
    extra = work_alphabet(m) - set(SYMBOLS)
    if extra:
        raise MachineNotNormalized(f"work tape symbols {sorted(extra)} outside 0, 1, blank")
    for state, mode in m.states.items():
        if mode in (ACCEPT, REJECT):
            continue
        for key in _keys(m.tapes):
            if len(m.applicable(state, *key)) > 2:
                raise MachineNotNormalized(f"state {state} branches more than two ways on {key}")


def _keys(tapes: int):
    for read, addr in itertools.product(READS, SYMBOLS):
        for work in itertools.product(SYMBOLS, repeat=tapes):
            yield read, addr, work


# -- the plan -----------------------------------------------------------------------


@dataclass
class PredicateInfo:
    var: SOVar
    role: str


@dataclass
class CompilationPlan:
    machine: MachineSpec
    k: int
    k2: int
    vocab: Vocabulary
    exact_sizes: tuple = (2,)
    exact_steps: int = DEFAULT_EXACT_STEPS
    predicates: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1 or self.k2 < 1:
            raise ValueError("exponents must be at least 1")
        if not self.vocab.relations and not self.vocab.constants:
            raise ValueError("the vocabulary must have an input symbol")
        check_normalized(self.machine)
        self.state_names = list(self.machine.states)
        self.arities = [a for _, a in self.vocab.relations]
        self.r = max(self.arities, default=0)
        self.p = len(self.arities)
        self.q = len(self.vocab.constants)
        self.ctx = MacroContext()
        self._declare_all()
        self.top = self.ctx.fo("top", self.k2)

    # naming
    def _add(self, name, arity, exponent, role) -> SOVar:
        var = SOVar(self.ctx.namer.claim(name), arity, exponent)
        self.predicates[name] = PredicateInfo(var, role)
        return var

    def __getitem__(self, name) -> SOVar:
        return self.predicates[name].var

    def state_pred(self, state) -> SOVar:
        return self[f"S{self.state_names.index(state)}"]

    def _declare_all(self):
        k, k2, w = self.k, self.k2, self.machine.tapes
        num, tnum, tmul = (k2 + 1, k2), (k + k2 + 1, k + k2), (k + 2 * k2 + 1, k + 2 * k2)
        add = self._add
        add("I", k, k, "time and work-tape index set")
        add("J", k2, k2, "number position index set")
        add("J2", 2 * k2, 2 * k2, "pair index set for products")
        for i, s in enumerate(self.state_names):
            add(f"S{i}", k, k, f"state {s}")
        for j in range(w):
            for s in range(3):
                add(f"T{s}_{j}", 2 * k, 2 * k, f"tape {j + 1} holds {SYMBOLS[s]}")
            add(f"H_{j}", 2 * k, 2 * k, f"tape {j + 1} head")
        for s in range(3):
            add(f"L{s}", k, k, f"reads {READS[s]}")
        add("CH", k, k, "second rule chosen")
        add("AC", k + k2 + 1, k + k2, "address content per time")
        add("AH", k + k2, k + k2, "address head position per time")
        add("AB", k, k, "address head on boundary")
        # global numbers
        add("M0", *num, "1")
        add("MX", *num, "n - 1")
        add("M1", *num, "n")
        add("W_M1", *num, "carries")
        for i in range(2, self.r + 1):
            add(f"M{i}", *num, f"n^{i}")
            for part in "RSW":
                add(f"{part}_M{i}", 2 * k2 + 1, 2 * k2, "product auxiliary")
        add("P0", *num, "section 0 offset")
        for i in range(1, self.p + 1):
            add(f"P{i}", *num, f"offset after relation {i}")
            add(f"W_P{i}", *num, "carries")
        if self.q:
            add("N0", *num, "0")
            add("N1", *num, "log n")
            for i in range(2, self.q + 1):
                add(f"N{i}", *num, f"{i} log n")
                add(f"W_N{i}", *num, "carries")
            add("PN", *num, "input length")
            add("W_PN", *num, "carries")
            add("LM1", *num, "log n - 1")
            add("W_LM1", *num, "carries")
            for j in range(1, self.q):
                add(f"CB{j}", *num, f"start of constant {j + 1}")
                add(f"W_CB{j}", *num, "carries")
        add("NM1", *num, "input length - 1")
        add("W_NM1", *num, "carries")
        # per-time auxiliaries
        if self.p:
            add("D", *tnum, "offset inside a relation section")
            add("DW", *tnum, "carries")
            for j in range(1, self.r + 1):
                add(f"X{j}", *tnum, f"tuple component {j}")
            for j in range(2, self.r + 1):
                add(f"U{j}", *tnum, "Horner product")
                for part in "RSW":
                    add(f"{part}_U{j}", *tmul, "product auxiliary")
                add(f"VW{j}", *tnum, "carries")
            for j in range(2, self.r):
                add(f"V{j}", *tnum, "Horner partial value")
        if self.q:
            add("Y", *tnum, "offset inside a constant")
            add("YW", *tnum, "carries")
            add("Z", *tnum, "bit index")
            add("ZW", *tnum, "carries")

    # names for numbers
    def pn(self):
        return self["PN"] if self.q else self[f"P{self.p}"]

    def constant_start(self, j):
        if j == 0:
            return self[f"P{self.p}"]
        if j == self.q:
            return self.pn()
        return self[f"CB{j}"]

    # sizes
    def horizon(self, n: int) -> int:
        return clog2(n) ** self.k - 1

    def input_length(self, n: int) -> int:
        return self.vocab.encoded_length(n)

    def budget(self, n: int) -> RunBudget:
        if n in self.exact_sizes:
            return RunBudget(self.exact_steps)
        return RunBudget(self.horizon(n))

    def check_size(self, n: int):
        """Raise ExponentTooSmall when numbers or the address do not fit at size ``n``."""
        if n in self.exact_sizes:
            return
        cap = capacity(n, self.k2)
        n_hat = self.input_length(n)
        biggest = max(n_hat, n**self.r, n)
        if biggest >= cap:
            raise ExponentTooSmall(f"numbers up to {biggest} need more than {clog2(n) ** self.k2} bits (k2={self.k2}, n={n})")
        if address_length(n_hat) > clog2(n) ** self.k2:
            raise ExponentTooSmall(f"address length {address_length(n_hat)} exceeds the position range at n={n}")

    def inventory(self) -> list:
        return [(name, info.var.arity, info.var.exponent, info.role) for name, info in self.predicates.items()]


# -- sentence -----------------------------------------------------------------------


class _Compiler:
    def __init__(self, plan: CompilationPlan):
        self.plan = plan
        self.m = plan.machine
        self.ctx = plan.ctx
        self.k, self.k2 = plan.k, plan.k2
        self.I, self.J, self.J2 = plan["I"], plan["J"], plan["J2"]
        self.top = plan.top

    def fo(self, base, count):
        return self.ctx.fo(base, count)

    # -- arithmetic shared by every time instant
    def global_arith(self) -> Formula:
        P, J, J2, ctx = self.plan, self.J, self.J2, self.ctx
        parts = [
            def_k(self.k, self.I, ctx),
            def_k(self.k2, J, ctx),
            def_k(2 * self.k2, J2, ctx),
            bnum_with(P["M0"], Const("1"), J, ctx),
            bnum_with(P["MX"], Const("max"), J, ctx),
            bsum_with(P["MX"], P["M0"], P["M1"], P["W_M1"], J, ctx),
        ]
        for i in range(2, P.r + 1):
            parts.append(bmult_with(P["M1"], P[f"M{i - 1}"], P[f"M{i}"], J, J2,
                                    P[f"R_M{i}"], P[f"S_M{i}"], P[f"W_M{i}"], ctx))
        parts.append(bnum_with(P["P0"], Const("0"), J, ctx))
        for i, a in enumerate(P.arities, start=1):
            parts.append(bsum_with(P[f"P{i - 1}"], P[f"M{a}"], P[f"P{i}"], P[f"W_P{i}"], J, ctx))
        if P.q:
            parts.append(bnum_with(P["N0"], Const("0"), J, ctx))
            parts.append(bnum_with(P["N1"], Const("logn"), J, ctx))
            for i in range(2, P.q + 1):
                parts.append(bsum_with(P[f"N{i - 1}"], P["N1"], P[f"N{i}"], P[f"W_N{i}"], J, ctx))
            parts.append(bsum_with(P[f"P{P.p}"], P[f"N{P.q}"], P["PN"], P["W_PN"], J, ctx))
            parts.append(bsum_with(P["LM1"], P["M0"], P["N1"], P["W_LM1"], J, ctx))
            for j in range(1, P.q):
                parts.append(bsum_with(P[f"P{P.p}"], P[f"N{j}"], P[f"CB{j}"], P[f"W_CB{j}"], J, ctx))
        parts.append(bsum_with(P["NM1"], P["M0"], P.pn(), P["W_NM1"], J, ctx))
        return conj(parts)

    def top_is_address_msb(self) -> Formula:
        """``top`` is the highest 1 of n_hat - 1, or position 0 when that number is 0."""
        g = self.fo("g", self.k2)
        nm1 = self.plan["NM1"]
        return conj(
            _atom(self.J, self.top),
            disj(_atom(nm1, self.top, Const("1")), zero_tuple(self.top)),
            ForallIn(tuple(g), self.J, disj(leq_tuple(self.k2, g, self.top), _atom(nm1, g, Const("0")))),
        )

    # -- initial configuration and acceptance
    def initial(self) -> Formula:
        P, zero = self.plan, (Const("0"),) * self.k
        parts = [_atom(P.state_pred(self.m.start), zero)]
        for j in range(self.m.tapes):
            ps = self.fo("p", self.k)
            parts.append(_atom(P[f"H_{j}"], zero, zero))
            parts.append(ForallIn(tuple(ps), self.I, _atom(P[f"T2_{j}"], zero, ps)))
        es = self.fo("e", self.k2)
        parts.append(ForallIn(tuple(es), self.J, _atom(P["AC"], zero, es, Const("0"))))
        parts.append(_atom(P["AH"], zero, self.top))
        parts.append(Not(_atom(P["AB"], zero)))
        return conj(parts)

    def acceptance(self) -> Formula:
        tf = self.fo("tf", self.k)
        t = self.fo("t", self.k)
        accepting = [self.plan.state_pred(s) for s, mode in self.m.states.items() if mode == ACCEPT]
        return exists(tf, conj(
            _atom(self.I, tf),
            ForallIn(tuple(t), self.I, leq_tuple(self.k, t, tf)),
            disj(_atom(S, tf) for S in accepting),
        ))

    # -- per-time consistency
    def consistency(self, t) -> Formula:
        P, parts = self.plan, []
        parts.append(_exactly_one(_atom(P.state_pred(s), t) for s in self.m.states))
        for s, mode in self.m.states.items():
            if mode == REJECT:
                parts.append(Not(_atom(P.state_pred(s), t)))
        for j in range(self.m.tapes):
            ps, ps2 = self.fo("p", self.k), self.fo("p", self.k)
            parts.append(ForallIn(tuple(ps), self.I, _exactly_one(_atom(P[f"T{s}_{j}"], t, ps) for s in range(3))))
            H = P[f"H_{j}"]
            parts.append(exists(ps, conj(_atom(self.I, ps), _atom(H, t, ps))))
            parts.append(ForallIn(tuple(ps), self.I, disj(
                Not(_atom(H, t, ps)),
                ForallIn(tuple(ps2), self.I, disj(Not(_atom(H, t, ps2)), _same(ps, ps2))),
            )))
        es, es2 = self.fo("e", self.k2), self.fo("e", self.k2)
        AC, AH, AB = P["AC"], P["AH"], P["AB"]
        parts.append(ForallIn(tuple(es), self.J, _exactly_one([_atom(AC, t, es, Const("0")), _atom(AC, t, es, Const("1"))])))
        parts.append(disj(_atom(AB, t), exists(es, conj(_atom(self.J, es), _atom(AH, t, es)))))
        parts.append(ForallIn(tuple(es), self.J, disj(
            Not(_atom(AH, t, es)),
            conj(Not(_atom(AB, t)), ForallIn(tuple(es2), self.J, disj(Not(_atom(AH, t, es2)), _same(es, es2)))),
        )))
        parts.append(_exactly_one(_atom(P[f"L{s}"], t) for s in range(3)))
        return conj(parts)

    # -- what the input holds at the address
    def reading(self, t) -> Formula:
        P, J, ctx = self.plan, self.J, self.ctx
        addr = Num(P["AC"], _terms(t))
        sec = lambda name: Num(P[name], _terms(t))  # noqa: E731
        L0, L1, L2 = (_atom(P[f"L{s}"], t) for s in range(3))
        parts = [disj(lt_with(addr, P.pn(), J, ctx), L2)]
        for i, (name, arity) in enumerate(self.plan.vocab.relations, start=1):
            xs = self.fo("x", arity)
            if arity == 1:
                decode = bnum_with(sec("D"), Var(xs[0]), J, ctx)
            else:
                decode = [bnum_with(sec(f"X{j}"), Var(xs[j - 1]), J, ctx) for j in range(1, arity + 1)]
                value = sec("X1")
                for j in range(2, arity + 1):
                    nxt = sec("D") if j == arity else sec(f"V{j}")
                    decode.append(bmult_with(value, P["M1"], sec(f"U{j}"), J, self.J2,
                                             sec(f"R_U{j}"), sec(f"S_U{j}"), sec(f"W_U{j}"), ctx))
                    decode.append(bsum_with(sec(f"U{j}"), sec(f"X{j}"), nxt, sec(f"VW{j}"), J, ctx))
                    value = nxt
                decode = conj(decode)
            bit = rel(name, *xs)
            inside = conj(
                bsum_with(P[f"P{i - 1}"], sec("D"), addr, sec("DW"), J, ctx),
                exists(xs, conj(decode, disj(conj(L1, bit), conj(L0, Not(bit))))),
            )
            parts.append(disj(lt_with(addr, P[f"P{i - 1}"], J, ctx), le_with(P[f"P{i}"], addr, J, ctx), inside))
        for j, cname in enumerate(self.plan.vocab.constants):
            lo, hi = P.constant_start(j), P.constant_start(j + 1)
            (z,) = self.fo("z", 1)
            bit = rel("BIT", Const(cname), Var(z))
            inside = conj(
                bsum_with(lo, sec("Y"), addr, sec("YW"), J, ctx),
                bsum_with(sec("Y"), sec("Z"), P["LM1"], sec("ZW"), J, ctx),
                exists([z], conj(bnum_with(sec("Z"), Var(z), J, ctx), disj(conj(L1, bit), conj(L0, Not(bit))))),
            )
            parts.append(disj(lt_with(addr, lo, J, ctx), le_with(hi, addr, J, ctx), inside))
        return conj(parts)

    # -- one step
    def step(self, t, t2) -> Formula:
        P = self.plan
        heads = [self.fo("h", self.k) for _ in range(self.m.tapes)]
        e = self.fo("e", self.k2)
        AB = P["AB"]
        located = [conj(_atom(self.I, h), _atom(P[f"H_{j}"], t, h)) for j, h in enumerate(heads)]
        located.append(conj(_atom(self.J, e), disj(_atom(AB, t), _atom(P["AH"], t, e))))
        frames = [self.tape_frame(j, t, t2, h) for j, h in enumerate(heads)]
        frames.append(self.address_frame(t, t2, e))
        rules = []
        for state, mode in self.m.states.items():
            S = P.state_pred(state)
            if mode == ACCEPT:
                rules.append(disj(Not(_atom(S, t)), self.stay(state, t, t2, heads, e)))
            elif mode != REJECT:
                rules.append(disj(Not(_atom(S, t)), self.state_rules(state, t, t2, heads, e)))
        flat = [v for h in heads for v in h] + e
        return exists(flat, conj(*located, *frames, *rules))

    def tape_frame(self, j, t, t2, h) -> Formula:
        ps = self.fo("p", self.k)
        keep = disj(conj(_atom(self.plan[f"T{s}_{j}"], t, ps), _atom(self.plan[f"T{s}_{j}"], t2, ps)) for s in range(3))
        return ForallIn(tuple(ps), self.I, disj(_same(ps, h), keep))

    def address_frame(self, t, t2, e) -> Formula:
        es = self.fo("e", self.k2)
        AC = self.plan["AC"]
        keep = disj(conj(_atom(AC, t, es, Const(b)), _atom(AC, t2, es, Const(b))) for b in "01")
        return ForallIn(tuple(es), self.J, disj(conj(Not(_atom(self.plan["AB"], t)), _same(es, e)), keep))

    def trigger_misses(self, t, heads, e, key) -> Formula:
        """Negation of "the symbols under the heads are ``key``" as a disjunction of literals."""
        read, addr, work = key
        P = self.plan
        out = [Not(_atom(P[f"L{READS.index(read)}"], t))]
        if addr == BLANK:
            out.append(Not(_atom(P["AB"], t)))
        else:
            out += [_atom(P["AB"], t), Not(_atom(P["AC"], t, e, Const(addr)))]
        for j, sym in enumerate(work):
            out.append(Not(_atom(P[f"T{SYMBOLS.index(sym)}_{j}"], t, heads[j])))
        return disj(out)

    def state_rules(self, state, t, t2, heads, e) -> Formula:
        parts = []
        CH = _atom(self.plan["CH"], t)
        for key in _keys(self.m.tapes):
            rules = self.m.applicable(state, *key)
            if not rules:
                effect = FALSE
            elif len(rules) == 1:
                effect = self.effect(rules[0], key, t, t2, heads, e)
            else:
                effect = disj(
                    conj(Not(CH), self.effect(rules[0], key, t, t2, heads, e)),
                    conj(CH, self.effect(rules[1], key, t, t2, heads, e)),
                )
            parts.append(disj(self.trigger_misses(t, heads, e, key), effect))
        return conj(parts)

    def head_move(self, H, t2, h, move, k) -> Formula:
        h2 = self.fo("h", k)
        if move == "S":
            return _atom(H, t2, h)
        if move == "R":
            return exists(h2, conj(succ_tuple(k, h, h2), _atom(H, t2, h2)))
        return disj(conj(zero_tuple(h), _atom(H, t2, h)), exists(h2, conj(succ_tuple(k, h2, h), _atom(H, t2, h2))))

    def effect(self, rule, key, t, t2, heads, e) -> Formula:
        P = self.plan
        _, addr, work = key
        parts = [_atom(P.state_pred(rule.target), t2)]
        for j, h in enumerate(heads):
            sym = work[j] if rule.writes[j] == ANY else rule.writes[j]
            parts.append(_atom(P[f"T{SYMBOLS.index(sym)}_{j}"], t2, h))
            parts.append(self.head_move(P[f"H_{j}"], t2, h, rule.moves[j], self.k))
        AH, AB = P["AH"], P["AB"]
        if addr == BLANK:
            parts.append({"R": _atom(AB, t2), "S": _atom(AB, t2),
                          "L": _atom(AH, t2, (Const("0"),) * self.k2)}[rule.amove])
        else:
            bit = addr if rule.awrite == ANY else rule.awrite
            parts.append(_atom(P["AC"], t2, e, Const(bit)))
            parts.append(self.address_move(t2, e, rule.amove))
        return conj(parts)

    def address_move(self, t2, e, move) -> Formula:
        """Tape moves on number positions: right lowers the position, left raises it up to ``top``."""
        AH, AB = self.plan["AH"], self.plan["AB"]
        e2 = self.fo("e", self.k2)
        if move == "S":
            return _atom(AH, t2, e)
        if move == "R":
            return disj(conj(zero_tuple(e), _atom(AB, t2)), exists(e2, conj(succ_tuple(self.k2, e2, e), _atom(AH, t2, e2))))
        return disj(
            conj(_same(e, self.top), _atom(AH, t2, e)),
            conj(_differs(e, self.top), exists(e2, conj(succ_tuple(self.k2, e, e2), _atom(AH, t2, e2)))),
        )

    def stay(self, state, t, t2, heads, e) -> Formula:
        """Accept states loop without changing anything."""
        P = self.plan
        parts = [_atom(P.state_pred(state), t2)]
        for j, h in enumerate(heads):
            parts.append(disj(conj(_atom(P[f"T{s}_{j}"], t, h), _atom(P[f"T{s}_{j}"], t2, h)) for s in range(3)))
            parts.append(_atom(P[f"H_{j}"], t2, h))
        AC, AH, AB = P["AC"], P["AH"], P["AB"]
        keep = disj(conj(_atom(AC, t, e, Const(b)), _atom(AC, t2, e, Const(b))) for b in "01")
        parts.append(disj(conj(_atom(AB, t), _atom(AB, t2)), conj(Not(_atom(AB, t)), keep, _atom(AH, t2, e))))
        return conj(parts)

    # -- assembly
    def transitions(self) -> Formula:
        t, t2 = self.fo("t", self.k), self.fo("t", self.k)
        return ForallIn(tuple(t), self.I, disj(max_tuple(t), exists(t2, conj(succ_tuple(self.k, t, t2), self.step(t, t2)))))

    def per_time(self) -> Formula:
        t = self.fo("t", self.k)
        return ForallIn(tuple(t), self.I, conj(self.consistency(t), self.reading(t)))

    def main(self) -> Formula:
        return exists(self.top, conj(
            self.global_arith(),
            self.top_is_address_msb(),
            self.initial(),
            self.per_time(),
            self.transitions(),
            self.acceptance(),
        ))


def _size_is(n: int, body) -> Formula:
    """``exists e0..e_{n-1}`` naming the elements of a size-``n`` structure, then ``body(es)``."""
    es = [f"el_{i}" for i in range(n)]
    chain = [eq(es[0], 0), eq(es[-1], "max")]
    chain += [rel("SUCC", a, b) for a, b in zip(es, es[1:])]
    return exists(es, conj(*chain, body(es)))


def _diagram(s: Structure, es) -> Formula:
    parts = []
    for name, arity in s.vocab.relations:
        for tup in itertools.product(range(s.n), repeat=arity):
            atom = rel(name, *(es[i] for i in tup))
            parts.append(atom if tup in s.relations[name] else Not(atom))
    for c in s.vocab.constants:
        parts.append(eq(Const(c), es[s.constant(c)]))
    return conj(parts)


def exact_part(plan: CompilationPlan) -> Formula:
    """Case analysis for the sizes where runs are not encoded."""
    cases = []
    for n in plan.exact_sizes:
        accepted = [s for s in all_structures(plan.vocab, n) if accepts(plan.machine, encode_bin(s), plan.budget(n))]
        cases.append(_size_is(n, lambda es, acc=accepted: disj(_diagram(s, es) for s in acc)))
    return disj(cases)


def _not_exact(plan: CompilationPlan) -> Formula:
    return conj(_size_is_not(n) for n in plan.exact_sizes)


def _size_is_not(n: int) -> Formula:
    # the domain is not 0..n-1: the element after n-2 steps from 0 is not max
    es = [f"ne_{i}" for i in range(n)]
    if n == 1:
        return Not(eq("0", "max"))
    chain = [eq(es[0], 0)] + [rel("SUCC", a, b) for a, b in zip(es, es[1:])]
    return exists(es, conj(*chain, Not(eq(es[-1], "max"))))


def compile_plan(m: MachineSpec, k: int, k2: int, vocab: Vocabulary, exact_sizes=(2,),
                 exact_steps: int = DEFAULT_EXACT_STEPS) -> CompilationPlan:
    return CompilationPlan(m, k, k2, vocab, tuple(exact_sizes), exact_steps)


def compile_matrix(plan: CompilationPlan) -> Formula:
    main = _Compiler(plan).main()
    if not plan.exact_sizes:
        return main
    return disj(exact_part(plan), conj(_not_exact(plan), main))


def compile_machine(m: MachineSpec, k: int, k2: int, vocab: Vocabulary, exact_sizes=(2,),
                    exact_steps: int = DEFAULT_EXACT_STEPS, plan: CompilationPlan | None = None) -> Formula:
    """The existential sentence for ``m``; see the module docstring."""
    plan = plan or compile_plan(m, k, k2, vocab, exact_sizes, exact_steps)
    return so_exists([info.var for info in plan.predicates.values()], compile_matrix(plan))


def transition_axioms(m: MachineSpec, plan: CompilationPlan) -> Formula:
    """The step axioms alone; free variables are the plan's predicates and ``top``."""
    if m is not plan.machine:
        raise ValueError("plan was built for a different machine")
    c = _Compiler(plan)
    return c.transitions()


# -- witnesses ----------------------------------------------------------------------


def _padded_run(plan: CompilationPlan, text: str, n: int):
    steps = plan.horizon(n)
    run = accepting_run(plan.machine, text, steps)
    if run is None:
        raise TraceNotAccepting(f"no accepting run within {steps} steps")
    return run


def extract_witness(plan: CompilationPlan, s: Structure, trace=None) -> Valuation:
    """Values for every predicate of the sentence built from an accepting run on ``bin(s)``."""
    n = s.n
    P = plan
    empty = {info.var: frozenset() for info in P.predicates.values()}
    text = encode_bin(s)
    if n in P.exact_sizes:
        if not accepts(P.machine, text, P.budget(n)):
            raise TraceNotAccepting("the machine rejects this structure")
        return Valuation({}, empty)
    P.check_size(n)
    trace = trace if trace is not None else _padded_run(P, text, n)
    if not trace or trace[-1][1] is not None or P.machine.mode(trace[-1][0].state) != ACCEPT:
        raise TraceNotAccepting("trace does not end in an accept state")
    horizon = P.horizon(n)
    if len(trace) - 1 > horizon:
        raise TraceNotAccepting(f"trace takes {len(trace) - 1} steps, more than {horizon}")
    configs = [c for c, _ in trace]
    choices = [ch for _, ch in trace]
    while len(configs) < horizon + 1:
        configs.append(configs[-1])
        choices.append(None)

    k, k2 = P.k, P.k2
    times, cells, spots = positions(n, k), positions(n, k), positions(n, k2)
    val: dict = {name: set() for name in P.predicates}

    def number(name, value, prefix=()):
        val[name] |= encode_number(n, k2, value, prefix)

    val["I"] = set(index_relation(n, k))
    val["J"] = set(index_relation(n, k2))
    val["J2"] = set(index_relation(n, 2 * k2))
    n_hat = len(text)
    width = address_length(n_hat)
    ell = clog2(n)
    for i, (c, ch) in enumerate(zip(configs, choices)):
        t = times[i]
        val[f"S{P.state_names.index(c.state)}"].add(t)
        for j in range(P.machine.tapes):
            tape, head = c.work[j], c.heads[j]
            if head >= len(cells):
                raise ExponentTooSmall(f"tape {j + 1} head leaves the {len(cells)} modelled cells")
            for idx, p in enumerate(cells):
                sym = tape[idx] if idx < len(tape) else BLANK
                val[f"T{SYMBOLS.index(sym)}_{j}"].add((*t, *p))
            val[f"H_{j}"].add((*t, *cells[head]))
        a = c.address()
        number("AC", a, t)
        if c.ahead < width:
            val["AH"].add((*t, *spots[width - 1 - c.ahead]))
        else:
            val["AB"].add(t)
        val[f"L{READS.index(read_input(text, c.addr))}"].add(t)
        if ch == 1:
            val["CH"].add(t)
        _reading_witness(P, n, a, t, number, val)

    # global numbers
    offsets = [0]
    for arity in P.arities:
        offsets.append(offsets[-1] + n**arity)
    number("M0", 1)
    number("MX", n - 1)
    number("M1", n)
    val["W_M1"] |= sum_carries(n, k2, n - 1, 1)
    for i in range(2, P.r + 1):
        number(f"M{i}", n**i)
        aux = mult_witness(n, k2, n, n ** (i - 1))
        for part in "RSW":
            val[f"{part}_M{i}"] |= aux[part]
    for i, v in enumerate(offsets):
        number(f"P{i}", v)
        if i:
            val[f"W_P{i}"] |= sum_carries(n, k2, offsets[i - 1], n ** P.arities[i - 1])
    if P.q:
        for i in range(P.q + 1):
            number(f"N{i}", i * ell)
            if i >= 2:
                val[f"W_N{i}"] |= sum_carries(n, k2, (i - 1) * ell, ell)
        number("PN", n_hat)
        val["W_PN"] |= sum_carries(n, k2, offsets[-1], P.q * ell)
        number("LM1", ell - 1)
        val["W_LM1"] |= sum_carries(n, k2, ell - 1, 1)
        for j in range(1, P.q):
            number(f"CB{j}", offsets[-1] + j * ell)
            val[f"W_CB{j}"] |= sum_carries(n, k2, offsets[-1], j * ell)
    number("NM1", n_hat - 1)
    val["W_NM1"] |= sum_carries(n, k2, n_hat - 1, 1)

    return Valuation({}, {P[name]: frozenset(v) for name, v in val.items()})


def _reading_witness(P: CompilationPlan, n: int, a: int, t: tuple, number, val):
    k2 = P.k2
    ell = clog2(n)
    offsets = [0]
    for arity in P.arities:
        offsets.append(offsets[-1] + n**arity)
    for i, arity in enumerate(P.arities, start=1):
        lo = offsets[i - 1]
        if not lo <= a < offsets[i]:
            continue
        d = a - lo
        number("D", d, t)
        val["DW"] |= sum_carries(n, k2, lo, d, t)
        if arity == 1:
            return
        digits = [(d // n ** (arity - j)) % n for j in range(1, arity + 1)]
        for j, x in enumerate(digits, start=1):
            number(f"X{j}", x, t)
        value = digits[0]
        for j in range(2, arity + 1):
            aux = mult_witness(n, k2, value, n, t)
            for part in "RSW":
                val[f"{part}_U{j}"] |= aux[part]
            number(f"U{j}", value * n, t)
            val[f"VW{j}"] |= sum_carries(n, k2, value * n, digits[j - 1], t)
            value = value * n + digits[j - 1]
            if j < arity:
                number(f"V{j}", value, t)
        return
    base = offsets[-1]
    for j in range(P.q):
        lo = base + j * ell
        if lo <= a < lo + ell:
            y = a - lo
            number("Y", y, t)
            val["YW"] |= sum_carries(n, k2, lo, y, t)
            number("Z", ell - 1 - y, t)
            val["ZW"] |= sum_carries(n, k2, y, ell - 1 - y, t)
            return


# -- checking the capture -------------------------------------------------------------


@dataclass
class CaptureRow:
    text: str
    n: int
    machine_accepts: bool | None
    sentence_holds: bool | None
    method: str
    error: str | None = None

    @property
    def agrees(self) -> bool:
        return self.error is None and self.machine_accepts == self.sentence_holds


@dataclass
class CaptureReport:
    rows: list
    predicates: int
    sentence_size: int

    @property
    def agreement(self) -> bool:
        return bool(self.rows) and all(r.agrees for r in self.rows)

    def summary(self) -> str:
        ok = sum(r.agrees for r in self.rows)
        return f"{ok}/{len(self.rows)} structures agree"


def verify_capture(m: MachineSpec, k: int, k2: int, vocab: Vocabulary, structures, cfg: EvalConfig | None = None,
                   exact_sizes=(2,), decide: str = "sat") -> CaptureReport:
    """Compare the machine and the compiled sentence on ``structures``.

    Accepted structures are checked through the witness built from the run.
    With ``decide="sat"`` every structure is also decided by the solver,
    which settles rejections; with ``decide="witness"`` rejections are not
    re-examined and their sentence verdict is left as None.
    """
    from .formula.ast import size as formula_size
    from .evaluate import sigma1_form

    plan = compile_plan(m, k, k2, vocab, exact_sizes)
    f = compile_machine(m, k, k2, vocab, plan=plan)
    block, matrix = sigma1_form(f)
    rows = []
    for s in structures:
        text = encode_bin(s)
        try:
            plan.check_size(s.n)
            accepted = accepts(m, text, plan.budget(s.n))
            holds, method = None, []
            if accepted:
                holds = check_witness(s, f, extract_witness(plan, s), cfg)
                method.append("witness")
            if decide == "sat":
                with GroundedBlock(s, block, matrix, True) as gb:
                    decided = gb.holds()
                method.append("sat")
                holds = decided if holds is None else (holds and decided)
            rows.append(CaptureRow(text, s.n, accepted, holds, "+".join(method)))
        except ExponentTooSmall as exc:
            rows.append(CaptureRow(text, s.n, None, None, "-", str(exc)))
    return CaptureReport(rows, len(plan.predicates), formula_size(f))


# -- small machines used by tests and the self-check ---------------------------------


def toy_machines() -> dict:
    """Name -> (machine, k, k2) for a handful of tiny normalized machines over one unary relation."""
    from .ratm.builder import Builder

    out = {}
    b = Builder(0, name="first-bit")
    b.accept("yes"), b.reject("no")
    b.on("q", "yes", read="1")
    b.otherwise("q", "no")
    out["first-bit"] = (b.build("q"), 1, 1)

    b = Builder(0, name="never")
    b.reject("no")
    b.goto("q", "no")
    out["never"] = (b.build("q"), 1, 1)

    b = Builder(0, name="always")
    b.accept("yes")
    b.goto("q", "yes")
    out["always"] = (b.build("q"), 1, 1)

    # guess between the first bit and the second one
    b = Builder(0, name="one-of-two")
    b.accept("yes"), b.reject("no")
    b.on("q", "yes", read="1", choice=True)
    b.on("q", "a2", amove="R", choice=True)
    b.on("a2", "a3", awrite="1")
    b.on("a3", "yes", read="1")
    b.otherwise("a3", "no")
    out["one-of-two"] = (b.build("q"), 2, 1)

    # copy the first bit to a work tape, then test the copy
    b = Builder(1, name="copy")
    b.accept("yes"), b.reject("no")
    b.on("q", "c", read="0", write={0: "0"})
    b.on("q", "c", read="1", write={0: "1"})
    b.otherwise("q", "no")
    b.on("c", "yes", when={0: "1"})
    b.otherwise("c", "no")
    out["copy"] = (b.build("q"), 2, 1)
    return out
