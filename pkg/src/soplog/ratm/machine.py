"""Random-access alternating Turing machines with step and alternation budgets.

The input tape is read-only and addressed by the address tape: the symbol
read in every step is the input cell whose index is the address tape's
content read most significant bit first, or the endmark once that index
reaches the input length.  The address tape has ``max(1, ceil(log2 n))``
cells followed by one boundary cell that always reads blank and ignores
writes, so a machine can find the end of its address.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

from ..errors import MachineFormatError, NoStep
from ..structure import clog2

ENDMARK = "◁"
BLANK = "_"
ANY = "*"
MOVES = ("L", "R", "S")

EXISTENTIAL = "existential"
UNIVERSAL = "universal"
ACCEPT = "accept"
REJECT = "reject"
MODES = (EXISTENTIAL, UNIVERSAL, ACCEPT, REJECT)
FINAL = (ACCEPT, REJECT)


@dataclass(frozen=True)
class Rule:
    """One transition.  ``*`` in a trigger matches anything; ``*`` as a write keeps the cell."""

    source: str
    read: str
    addr: str
    work: tuple
    target: str
    writes: tuple
    moves: tuple
    awrite: str = ANY
    amove: str = "S"

    def matches(self, read: str, addr: str, work: tuple) -> bool:
        if self.read != ANY and self.read != read:
            return False
        if self.addr != ANY and self.addr != addr:
            return False
        return all(p == ANY or p == s for p, s in zip(self.work, work))


@dataclass
class MachineSpec:
    states: dict
    start: str
    tapes: int
    rules: list = field(default_factory=list)
    time_bound: tuple | None = None  # (C, e): at most C * ceil(log n)^e steps
    name: str = "machine"

    def __post_init__(self):
        self.validate()
        self._by_state: dict = {}
        for r in self.rules:
            self._by_state.setdefault(r.source, []).append(r)
        self._cache: dict = {}

    def validate(self):
        if self.start not in self.states:
            raise MachineFormatError(f"start state {self.start!r} is not declared")
        for name, mode in self.states.items():
            if mode not in MODES:
                raise MachineFormatError(f"state {name!r} has unknown mode {mode!r}")
        for r in self.rules:
            for s in (r.source, r.target):
                if s not in self.states:
                    raise MachineFormatError(f"rule mentions undeclared state {s!r}")
            if self.states[r.source] in FINAL:
                raise MachineFormatError(f"final state {r.source!r} has an outgoing rule")
            if len(r.work) != self.tapes or len(r.writes) != self.tapes or len(r.moves) != self.tapes:
                raise MachineFormatError(f"rule from {r.source!r} does not cover {self.tapes} work tapes")
            if any(m not in MOVES for m in (*r.moves, r.amove)):
                raise MachineFormatError(f"rule from {r.source!r} has a bad head move")
            if r.awrite not in ("0", "1", ANY):
                raise MachineFormatError("the address tape holds only 0 and 1")

    def mode(self, state: str) -> str:
        return self.states[state]

    def applicable(self, state: str, read: str, addr: str, work: tuple) -> list:
        key = (state, read, addr, work)
        got = self._cache.get(key)
        if got is None:
            got = [r for r in self._by_state.get(state, ()) if r.matches(read, addr, work)]
            self._cache[key] = got
        return got

    @property
    def universal_states(self) -> list:
        return [s for s, m in self.states.items() if m == UNIVERSAL]


@dataclass(frozen=True)
class Configuration:
    state: str
    addr: tuple
    ahead: int
    work: tuple
    heads: tuple

    def symbols(self) -> tuple:
        return tuple(t[h] if h < len(t) else BLANK for t, h in zip(self.work, self.heads))

    def addr_symbol(self) -> str:
        return self.addr[self.ahead] if self.ahead < len(self.addr) else BLANK

    def address(self) -> int:
        return int("".join(self.addr), 2)


def address_length(n_hat: int) -> int:
    return max(1, clog2(max(n_hat, 1)))


def initial(m: MachineSpec, n_hat: int) -> Configuration:
    return Configuration(
        m.start,
        ("0",) * address_length(n_hat),
        0,
        tuple(() for _ in range(m.tapes)),
        (0,) * m.tapes,
    )


def read_input(text: str, addr) -> str:
    """Input symbol at the address (a bit string, MSB first), or the endmark past the end."""
    a = int("".join(addr), 2) if len(addr) else 0
    return text[a] if a < len(text) else ENDMARK


def _move(pos: int, d: str, limit: int | None = None) -> int:
    if d == "L":
        return max(0, pos - 1)
    if d == "R":
        return pos + 1 if limit is None else min(limit, pos + 1)
    return pos


def apply(rule: Rule, c: Configuration) -> Configuration:
    work, heads = [], []
    for tape, h, w, mv in zip(c.work, c.heads, rule.writes, rule.moves):
        if w != ANY:
            tape = tape + (BLANK,) * (h + 1 - len(tape)) if h >= len(tape) else tape
            tape = tape[:h] + (w,) + tape[h + 1 :]
        work.append(tape)
        heads.append(_move(h, mv))
    addr = c.addr
    if rule.awrite != ANY and c.ahead < len(addr):
        addr = addr[: c.ahead] + (rule.awrite,) + addr[c.ahead + 1 :]
    return Configuration(rule.target, addr, _move(c.ahead, rule.amove, len(addr)), tuple(work), tuple(heads))


def successors(m: MachineSpec, c: Configuration, text: str) -> list:
    if m.mode(c.state) in FINAL:
        raise NoStep(f"{c.state} is final")
    rules = m.applicable(c.state, read_input(text, c.addr), c.addr_symbol(), c.symbols())
    return [apply(r, c) for r in rules]


def step(m: MachineSpec, c: Configuration, text: str) -> list:
    """All configurations one rule away (empty when no rule applies, which rejects)."""
    return successors(m, c, text)


@dataclass(frozen=True)
class RunBudget:
    max_steps: int
    max_alternations: int | None = None

    def __post_init__(self):
        if self.max_steps < 0 or (self.max_alternations is not None and self.max_alternations < 0):
            raise ValueError("budgets are non-negative")

    @classmethod
    def polylog(cls, n_hat: int, c: int, e: int, alternations: int | None = None) -> "RunBudget":
        return cls(c * address_length(n_hat) ** e, alternations)


class Measurement(NamedTuple):
    accepted: bool
    steps: int
    alternations: int


class _Explorer:
    """Depth-first evaluation of the computation tree.

    Deterministic stretches run in a loop.  Branch points are memoized per
    configuration: an acceptance needing ``s`` steps and ``a`` alternations
    stays valid with larger budgets, a rejection stays valid with smaller ones.
    """

    def __init__(self, m: MachineSpec, text: str, budget: RunBudget):
        self.m = m
        self.text = text
        self.budget = budget
        self.accepted_memo: dict = {}
        self.rejected_memo: dict = {}

    def run(self) -> Measurement:
        alts = self.budget.max_alternations
        return self.explore(initial(self.m, len(self.text)), self.budget.max_steps, alts, None)

    def explore(self, c, steps_left, alts_left, last) -> Measurement:
        used, switched = 0, 0
        while True:
            mode = self.m.mode(c.state)
            if mode == ACCEPT:
                return Measurement(True, used, switched)
            if mode == REJECT:
                return Measurement(False, used, switched)
            if last is not None and mode != last:
                if alts_left is not None and alts_left == 0:
                    return Measurement(False, used, switched)
                if alts_left is not None:
                    alts_left -= 1
                switched += 1
            last = mode
            nxt = successors(self.m, c, self.text)
            if not nxt:
                return Measurement(False, used, switched)
            if steps_left == 0:
                return Measurement(False, used, switched)
            if len(nxt) == 1:
                c = nxt[0]
                steps_left -= 1
                used += 1
                continue
            sub = self.branch(c, nxt, mode, steps_left - 1, alts_left)
            return Measurement(sub.accepted, used + 1 + sub.steps, switched + sub.alternations)

    def branch(self, c, nxt, mode, steps_left, alts_left) -> Measurement:
        key = c
        inf = float("inf")
        a_left = inf if alts_left is None else alts_left
        for need_s, need_a, res in self.accepted_memo.get(key, ()):
            if need_s <= steps_left and need_a <= a_left:
                return res
        for had_s, had_a, res in self.rejected_memo.get(key, ()):
            if steps_left <= had_s and a_left <= had_a:
                return res
        results = []
        out = None
        for s in nxt:
            r = self.explore(s, steps_left, alts_left, mode)
            results.append(r)
            if mode == EXISTENTIAL and r.accepted:
                out = r
                break
            if mode == UNIVERSAL and not r.accepted:
                out = r
                break
        if out is None:
            out = Measurement(
                mode == UNIVERSAL,
                max(r.steps for r in results),
                max(r.alternations for r in results),
            )
        if out.accepted:
            self.accepted_memo.setdefault(key, []).append((out.steps, out.alternations, out))
        else:
            self.rejected_memo.setdefault(key, []).append((steps_left, a_left, out))
        return out


def measure(m: MachineSpec, text: str, budget: RunBudget) -> Measurement:
    """Acceptance plus the steps and alternations of the accepting subtree.

    On rejection the counts describe the deepest path explored.  Running out
    of steps or alternations rejects.
    """
    return _Explorer(m, text, budget).run()


def accepts(m: MachineSpec, text: str, budget: RunBudget) -> bool:
    return measure(m, text, budget).accepted


def accepting_run(m: MachineSpec, text: str, max_steps: int):
    """An accepting path ``[(configuration, choice index), ...]`` ending in an accept state.

    Only for machines without universal states.  Returns None when every
    path rejects within ``max_steps``.
    """
    if m.universal_states:
        raise ValueError("accepting runs are defined for existential machines only")
    failed: dict = {}

    def go(c, left):
        path = []
        while True:
            mode = m.mode(c.state)
            if mode == ACCEPT:
                path.append((c, None))
                return path
            if mode == REJECT or left == 0:
                return None
            nxt = successors(m, c, text)
            if not nxt:
                return None
            if len(nxt) == 1:
                path.append((c, 0))
                c, left = nxt[0], left - 1
                continue
            if failed.get(c, -1) >= left:
                return None
            for i, s in enumerate(nxt):
                rest = go(s, left - 1)
                if rest is not None:
                    return path + [(c, i)] + rest
            failed[c] = left
            return None

    return go(initial(m, len(text)), max_steps)


def tree_size(m: MachineSpec, text: str, max_steps: int, cap: int = 10_000) -> int:
    """Number of nodes in the computation tree cut at ``max_steps`` (up to ``cap``)."""
    count = 0
    stack = [(initial(m, len(text)), 0)]
    while stack and count < cap:
        c, depth = stack.pop()
        count += 1
        if m.mode(c.state) in FINAL or depth == max_steps:
            continue
        stack.extend((s, depth + 1) for s in successors(m, c, text))
    return count


def work_alphabet(m: MachineSpec) -> set:
    out = {BLANK}
    for r in m.rules:
        out.update(s for s in (*r.work, *r.writes) if s != ANY)
    return out


def concrete_keys(m: MachineSpec, read_symbols=("0", "1", ENDMARK), addr_symbols=("0", "1", BLANK)):
    """Every concrete trigger ``(state, read, addr, work symbols)`` of a non-final state."""
    alphabet = sorted(work_alphabet(m))
    for state, mode in m.states.items():
        if mode in FINAL:
            continue
        for read, addr in itertools.product(read_symbols, addr_symbols):
            for work in itertools.product(alphabet, repeat=m.tapes):
                yield state, read, addr, work
