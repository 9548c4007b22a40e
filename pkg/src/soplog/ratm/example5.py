"""A nondeterministic random-access machine for CNF satisfiability with few clauses.

Input layout (``encode_cnf``): ``c`` clause pointers of ``l`` bits each,
where ``l`` is the address length for the whole input, then the clauses.  A
clause is ``#`` followed by literals, a literal is ``+`` or ``-`` followed by
its variable id in binary.  The first ``#`` ends the pointer block.

The machine

1. finds ``n - 1`` by binary search on the address tape, using the endmark,
   and lays out unary rulers of length ``l``;
2. copies the pointers to a work tape, counting them on a ``k``-digit
   base-``l`` odometer (more than ``l**k`` pointers reject), and checks that
   every pointer lands on a ``#``;
3. for each clause in turn, guesses an address bit by bit while two flags
   keep it inside the clause (at least its pointer, below the next pointer,
   or at most ``n - 1`` for the last clause);
4. checks that the address holds ``+`` or ``-``;
5. copies that literal and rejects if an earlier chosen literal is its
   complement;
6. accepts after the last clause.

Work tapes use ``#`` (rulers, odometer digits, ``nmax``) or ``+`` (lists) as
the left marker.  Signs are stored as bits on the literal tapes.
"""
from __future__ import annotations

from ..structure import clog2
from .builder import Builder
from .machine import ENDMARK, MachineSpec, address_length

INPUT_ALPHABET = ("0", "1", "#", "+", "-", ENDMARK)
WORK_ALPHABET = ("0", "1", "_", "#", "+", "-")
BITS = ("0", "1")


# -- reusable fragments ------------------------------------------------------------


def rewind(b: Builder, label, tape, marker, nxt):
    """Move ``tape``'s head to the cell just right of its left marker."""
    b.on(label, nxt, when={tape: marker}, move={tape: "R"})
    b.otherwise(label, label, move={tape: "L"})


def chain(b: Builder, label, steps, nxt):
    """Run ``rewind``-style fragments one after another."""
    for i, (fn, args) in enumerate(steps):
        target = nxt if i == len(steps) - 1 else b.fresh(f"{label}_")
        fn(b, label, *args, target)
        label = target


def park(b: Builder, label, nxt):
    """Move the address head (synced with the ruler) to the least significant bit."""
    b.on(label, nxt, when={"ruler": "_"}, amove="L", move={"ruler": "L"})
    b.otherwise(label, label, amove="R", move={"ruler": "R"})


def to_msb(b: Builder, label, nxt):
    """Move the address head to the most significant bit."""
    b.on(label, nxt, when={"ruler": "#"}, move={"ruler": "R"})
    b.otherwise(label, label, amove="L", move={"ruler": "L"})


def increment(b: Builder, label, done, overflow):
    """Add one to the address (head parked at the LSB, and parked again after)."""
    back, wrapped = b.fresh(f"{label}_back"), b.fresh(f"{label}_wrap")
    b.on(label, wrapped, when={"ruler": "#"}, move={"ruler": "R"})
    b.on(label, label, addr="1", when={"ruler": "1"}, awrite="0", amove="L", move={"ruler": "L"})
    b.on(label, back, addr="0", when={"ruler": "1"}, awrite="1")
    park(b, back, done)
    park(b, wrapped, overflow)


def odometer(b: Builder, label, k, done, overflow):
    """Count one on the digit tapes ``d1..dk``; each head position is one base-l digit."""
    for j in range(1, k + 1):
        tape = f"d{j}"
        check = b.fresh(f"{label}_chk")
        b.on(label, check, move={tape: "R"})
        b.on(check, done, when={tape: "1"})
        if j == k:
            b.on(check, overflow, when={tape: "_"})
        else:
            carry = b.fresh(f"{label}_carry")
            b.on(check, carry, when={tape: "_"})
            label = b.fresh(f"{label}_d")
            rewind(b, carry, tape, "#", label)


# -- the machine -------------------------------------------------------------------


def polylogcnfsat_machine(k: int = 1) -> MachineSpec:
    if k < 1:
        raise ValueError("k must be at least 1")
    digits = [f"d{j}" for j in range(1, k + 1)]
    tapes = ["ruler", "bits", "nmax", "idx", "idx2", "cur", "lit", *digits]
    b = Builder(tapes, WORK_ALPHABET, INPUT_ALPHABET, name=f"polylogcnfsat_k{k}")
    b.accept("accept")
    b.reject("reject")
    markers = {"ruler": "#", "bits": "#", "nmax": "#", "idx": "+", "idx2": "+", "cur": "+", "lit": "+"}
    markers.update({d: "#" for d in digits})

    # phase 1: markers, then the binary search for n - 1, laying out rulers as we go
    b.on("start", "search", write=markers, move={t: "R" for t in tapes})
    b.on("search", "zero", addr="_", amove="L", move={"ruler": "L"})
    b.on("search", "probe", addr="0", awrite="1")
    ones = {t: "1" for t in ("ruler", "bits", *digits)}
    step = {t: "R" for t in ("ruler", "bits", "nmax", *digits)}
    b.on("probe", "search", read=ENDMARK, awrite="0", write={**ones, "nmax": "0"}, move=step, amove="R")
    b.otherwise("probe", "search", write={**ones, "nmax": "1"}, move=step, amove="R")
    # clear the address back to zero and park it
    b.on("zero", "zero_park", when={"ruler": "#"}, move={"ruler": "R"})
    b.otherwise("zero", "zero", awrite="0", amove="L", move={"ruler": "L"})
    park(b, "zero_park", "rulers")
    chain(b, "rulers", [(rewind, (t, "#")) for t in ("bits", *digits)], "p2_first")

    # phase 2: copy pointers, l bits each, counting them
    for sym in BITS:
        b.on("p2_first", "p2_copy", read=sym)
        b.on("p2_next", "p2_count", read=sym)
    b.otherwise("p2_first", "reject")
    b.on("p2_next", "p2_done", read="#")
    b.otherwise("p2_next", "reject")
    odometer(b, "p2_count", k, "p2_copy", "reject")
    for sym in BITS:
        b.on("p2_copy", "p2_inc", read=sym, when={"bits": "1"}, write={"idx": sym}, move={"idx": "R", "bits": "R"})
    b.on("p2_copy", "p2_bits", when={"bits": "_"}, write={"idx": "#"}, move={"idx": "R"})
    b.otherwise("p2_copy", "reject")
    increment(b, "p2_inc", "p2_copy", "reject")
    rewind(b, "p2_bits", "bits", "#", "p2_next")
    rewind(b, "p2_done", "idx", "+", "p2_msb")
    to_msb(b, "p2_msb", "ptr_first")

    # every pointer must land on '#'; pointers 2..c also go to idx2
    for sym in BITS:
        b.on("ptr_first", "ptr_first", when={"idx": sym}, awrite=sym, amove="R", move={"idx": "R", "ruler": "R"})
        b.on("ptr_rest", "ptr_rest", when={"idx": sym}, awrite=sym, amove="R",
             write={"idx2": sym}, move={"idx": "R", "idx2": "R", "ruler": "R"})
    b.on("ptr_first", "ptr_first_msb", read="#", when={"idx": "#"}, move={"idx": "R"})
    b.on("ptr_rest", "ptr_rest_msb", read="#", when={"idx": "#"}, write={"idx2": "#"}, move={"idx": "R", "idx2": "R"})
    b.on("ptr_rest", "nmax_rewind", when={"idx": "_"})
    b.otherwise("ptr_first", "reject")
    b.otherwise("ptr_rest", "reject")
    to_msb(b, "ptr_first_msb", "ptr_rest")
    to_msb(b, "ptr_rest_msb", "ptr_rest")
    # idx2 ends with n - 1, the bound for the last clause
    rewind(b, "nmax_rewind", "nmax", "#", "nmax_copy")
    for sym in BITS:
        b.on("nmax_copy", "nmax_copy", when={"nmax": sym}, write={"idx2": sym}, move={"nmax": "R", "idx2": "R"})
    b.on("nmax_copy", "lists", when={"nmax": "_"})
    chain(b, "lists", [(rewind, ("idx", "+")), (rewind, ("idx2", "+"))], "guess_TT")

    # phases 3 and 4: guess an address inside the current clause
    for lo in "TL":
        for hi in "TL":
            label = f"guess_{lo}{hi}"
            for x in BITS:
                for y in BITS:
                    for bit in BITS:
                        if (lo == "T" and bit < x) or (hi == "T" and bit > y):
                            continue
                        nlo = "T" if lo == "T" and bit == x else "L"
                        nhi = "T" if hi == "T" and bit == y else "L"
                        b.on(label, f"guess_{nlo}{nhi}", when={"idx": x, "idx2": y}, awrite=bit, amove="R",
                             move={"idx": "R", "idx2": "R", "ruler": "R"}, choice=True)
            # phase 5: the guessed cell must start a literal
            for end in ("#", "_"):
                if hi == "T" and end == "#":
                    continue  # equal to the next clause's pointer
                for sign in ("+", "-"):
                    b.on(label, f"lit_{sign}", read=sign, when={"idx": "#", "idx2": end},
                         move={"idx": "R", "idx2": "R"})

    # phase 6: copy the literal, compare with earlier choices, append
    for sign, bit in (("+", "1"), ("-", "0")):
        rewind(b, f"lit_{sign}", "cur", "+", f"lit_{sign}_put")
        b.on(f"lit_{sign}_put", "id_inc", write={"cur": bit}, move={"cur": "R", "ruler": "L"}, amove="L")
    increment(b, "id_inc", "id_read", "id_end")
    for sym in BITS:
        b.on("id_read", "id_inc", read=sym, write={"cur": sym}, move={"cur": "R"})
    b.otherwise("id_read", "id_end")
    b.on("id_end", "cmp_start", write={"cur": "#"})
    chain(b, "cmp_start", [(rewind, ("lit", "+")), (rewind, ("cur", "+"))], "cmp")

    b.on("cmp", "append", when={"lit": "_"})
    for s in BITS:
        for t in BITS:
            if s == t:
                b.on("cmp", "skip", when={"lit": s, "cur": t})
            else:
                b.on("cmp", "cmp_id", when={"lit": s, "cur": t}, move={"lit": "R", "cur": "R"})
    for sym in BITS:
        b.on("cmp_id", "cmp_id", when={"lit": sym, "cur": sym}, move={"lit": "R", "cur": "R"})
    b.on("cmp_id", "reject", when={"lit": "#", "cur": "#"})
    b.otherwise("cmp_id", "skip")
    b.on("skip", "skip_cur", when={"lit": "#"}, move={"lit": "R"})
    b.otherwise("skip", "skip", move={"lit": "R"})
    rewind(b, "skip_cur", "cur", "+", "cmp")

    rewind(b, "append", "cur", "+", "app")
    for sym in BITS:
        b.on("app", "app", when={"cur": sym}, write={"lit": sym}, move={"lit": "R", "cur": "R"})
    b.on("app", "next_clause", when={"cur": "#"}, write={"lit": "#"}, move={"lit": "R"})
    b.on("next_clause", "accept", when={"idx": "_"})
    b.otherwise("next_clause", "next_msb")
    to_msb(b, "next_msb", "guess_TT")
    return b.build("start")


# -- inputs ------------------------------------------------------------------------


def _literal(lit: int) -> str:
    if lit == 0:
        raise ValueError("literals are nonzero integers")
    return ("+" if lit > 0 else "-") + format(abs(lit), "b")


def cnf_body(clauses) -> str:
    return "".join("#" + "".join(_literal(x) for x in clause) for clause in clauses)


def pointer_width(c: int, body_len: int) -> int:
    """Smallest ``l`` with ``address_length(c * l + body_len) <= l``; equality then holds."""
    width = 1
    while address_length(c * width + body_len) > width:
        width += 1
    return width


def encode_cnf(clauses) -> str:
    """Input string for ``polylogcnfsat_machine``; literals are nonzero ints (sign = polarity)."""
    clauses = [list(c) for c in clauses]
    body = cnf_body(clauses)
    width = pointer_width(len(clauses), len(body))
    start = len(clauses) * width
    pointers, pos = [], start
    for clause in clauses:
        pointers.append(format(pos, f"0{width}b"))
        pos += 1 + sum(len(_literal(x)) for x in clause)
    return "".join(pointers) + body


def growth_instance(length: int):
    """A satisfiable CNF whose encoding has exactly ``length`` symbols (a power of two >= 16).

    It has ``log2(length)`` clauses ``(+i)``; the last clause is padded with extra literals.
    """
    width = clog2(length)
    if 2**width != length or width < 4:
        raise ValueError("length must be a power of two, at least 16")
    clauses = [[i] for i in range(1, width + 1)]
    room = length - width * width - len(cnf_body(clauses))
    if room < 0:
        raise ValueError("length too small for the instance family")
    pad = []
    if room % 2:
        pad.append(2)  # '+10'
        room -= 3
    pad += [1] * (room // 2)
    clauses[-1] += pad
    text = encode_cnf(clauses)
    assert len(text) == length
    return clauses, text


def brute_force_sat(clauses) -> bool:
    """Reference answer by trying every assignment."""
    import itertools

    variables = sorted({abs(x) for c in clauses for x in c})
    for values in itertools.product((False, True), repeat=len(variables)):
        val = dict(zip(variables, values))
        if all(any(val[abs(x)] == (x > 0) for x in c) for c in clauses):
            return True
    return False


class GrowthFit:
    """Least-squares fit of ``steps = C * ceil(log n)^c`` in log-log space."""

    def __init__(self, lengths, steps):
        import numpy as np

        self.lengths = list(lengths)
        self.steps = list(steps)
        x = np.log([address_length(n) for n in self.lengths])
        y = np.log(self.steps)
        self.c, log_c = np.polyfit(x, y, 1)
        self.C = float(np.exp(log_c))
        self.c = float(self.c)
        predicted = self.C * np.exp(self.c * x)
        self.residuals = [float(r) for r in np.abs(np.asarray(self.steps) - predicted) / predicted]

    @property
    def max_residual(self) -> float:
        return max(self.residuals)

    @property
    def monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.steps, self.steps[1:]))

    def __str__(self):
        return f"steps ~ {self.C:.2f} * ceil(log n)^{self.c:.2f} (max relative residual {self.max_residual:.1%})"


def measure_growth(k: int = 1, lengths=(64, 128, 256, 512, 1024, 2048, 4096)) -> GrowthFit:
    """Run the machine on ``growth_instance`` inputs and fit the step counts."""
    from .machine import RunBudget, measure

    m = polylogcnfsat_machine(k)
    steps = []
    for length in lengths:
        _, text = growth_instance(length)
        r = measure(m, text, RunBudget(10**7))
        if not r.accepted:
            raise RuntimeError(f"growth instance of length {length} was rejected")
        steps.append(r.steps)
    return GrowthFit(lengths, steps)
