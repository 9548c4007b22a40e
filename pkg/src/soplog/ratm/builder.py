"""A small builder for writing machines, compiled to raw rules.

Programs name their work tapes, add rules per label, and use three helpers
that raw tables lack:

* ``otherwise(label, ...)`` fills in every trigger that the label's other
  rules leave uncovered (over the symbols those rules actually test);
* ``guess(label, targets)`` branches nondeterministically to any number of
  targets, compiled into a chain of binary choices;
* ``on(..., choice=True)`` marks two overlapping rules as an intended binary
  choice.  Any other overlap is an error, so compiled machines are
  deterministic except where asked.

The ``.mb`` text form mirrors the API::

    format v1
    tapes 1
    alphabet 0 1 _
    start q
    accept yes
    reject no
    on q read=1 -> yes
    otherwise q -> no
    guess r -> a b c
"""
from __future__ import annotations

import itertools

from ..errors import MachineFormatError
from .fileformat import FORMAT_HEADER, _parse_rule, _strip_comment
from .machine import ACCEPT, ANY, ENDMARK, EXISTENTIAL, MODES, REJECT, UNIVERSAL, MachineSpec, Rule

INPUT_SYMBOLS = ("0", "1", ENDMARK)
ADDR_SYMBOLS = ("0", "1", "_")


class Builder:
    def __init__(self, tapes, alphabet=("0", "1", "_"), input_alphabet=INPUT_SYMBOLS, name="machine"):
        if isinstance(tapes, int):
            tapes = [f"t{i + 1}" for i in range(tapes)]
        self.tape_names = list(tapes)
        self.index = {t: i for i, t in enumerate(self.tape_names)}
        self.alphabet = tuple(alphabet)
        self.input_alphabet = tuple(input_alphabet)
        self.name = name
        self.modes: dict = {}
        self.rules: dict = {}
        self.choices: dict = {}
        self.defaults: dict = {}
        self.guesses: dict = {}
        self._fresh = itertools.count(1)
        self.time_bound = None

    # -- declarations ----------------------------------------------------------

    def fresh(self, base: str = "s") -> str:
        while True:
            name = f"{base}{next(self._fresh)}"
            if name not in self.modes:
                return name

    def declare(self, label: str, mode: str = EXISTENTIAL) -> str:
        if mode not in MODES:
            raise MachineFormatError(f"unknown mode {mode!r}")
        old = self.modes.get(label)
        if old is not None and old != mode and mode != EXISTENTIAL:
            if old != EXISTENTIAL:
                raise MachineFormatError(f"label {label!r} declared {old} and {mode}")
        if old is None or mode != EXISTENTIAL:
            self.modes[label] = mode
        return label

    def accept(self, label: str = "accept") -> str:
        return self.declare(label, ACCEPT)

    def reject(self, label: str = "reject") -> str:
        return self.declare(label, REJECT)

    def universal(self, label: str) -> str:
        return self.declare(label, UNIVERSAL)

    # -- rules -----------------------------------------------------------------

    def _rule(self, label, target, read, addr, when, write, move, awrite, amove) -> Rule:
        n = len(self.tape_names)
        work, writes, moves = [ANY] * n, [ANY] * n, ["S"] * n
        for t, s in (when or {}).items():
            work[self._tape(t)] = s
        for t, s in (write or {}).items():
            writes[self._tape(t)] = s
        for t, d in (move or {}).items():
            moves[self._tape(t)] = d
        self.declare(label)
        self.declare(target)
        return Rule(label, read, addr, tuple(work), target, tuple(writes), tuple(moves), awrite, amove)

    def _tape(self, t) -> int:
        if isinstance(t, int):
            return t
        try:
            return self.index[t]
        except KeyError:
            raise MachineFormatError(f"no work tape named {t!r}") from None

    def on(self, label, target, read=ANY, addr=ANY, when=None, write=None, move=None, awrite=ANY, amove="S",
           choice=False):
        rule = self._rule(label, target, read, addr, when, write, move, awrite, amove)
        self.rules.setdefault(label, []).append(rule)
        if choice:
            self.choices.setdefault(label, []).append(rule)
        return rule

    def goto(self, label, target, **actions):
        return self.on(label, target, **actions)

    def otherwise(self, label, target, write=None, move=None, awrite=ANY, amove="S"):
        self.defaults[label] = self._rule(label, target, ANY, ANY, None, write, move, awrite, amove)

    def guess(self, label, targets):
        targets = list(targets)
        if not targets:
            raise MachineFormatError("guess needs at least one target")
        self.declare(label)
        for t in targets:
            self.declare(t)
        self.guesses[label] = targets

    # -- compilation -----------------------------------------------------------

    def _dims(self, rules):
        dims = []
        if any(r.read != ANY for r in rules):
            dims.append(("read", self.input_alphabet))
        if any(r.addr != ANY for r in rules):
            dims.append(("addr", ADDR_SYMBOLS))
        for i in range(len(self.tape_names)):
            if any(r.work[i] != ANY for r in rules):
                dims.append((i, self.alphabet))
        return dims

    @staticmethod
    def _key_matches(rule, key: dict) -> bool:
        for dim, sym in key.items():
            want = rule.read if dim == "read" else rule.addr if dim == "addr" else rule.work[dim]
            if want != ANY and want != sym:
                return False
        return True

    @staticmethod
    def _overlap(a: Rule, b: Rule) -> bool:
        pairs = [(a.read, b.read), (a.addr, b.addr), *zip(a.work, b.work)]
        return all(x == ANY or y == ANY or x == y for x, y in pairs)

    def _expand_default(self, label, rules, default):
        dims = self._dims(rules)
        out = []
        for combo in itertools.product(*(alpha for _, alpha in dims)):
            key = {d: s for (d, _), s in zip(dims, combo)}
            if any(self._key_matches(r, key) for r in rules):
                continue
            work = list(default.work)
            read, addr = ANY, ANY
            for d, s in key.items():
                if d == "read":
                    read = s
                elif d == "addr":
                    addr = s
                else:
                    work[d] = s
            out.append(Rule(label, read, addr, tuple(work), default.target, default.writes, default.moves,
                            default.awrite, default.amove))
        return out

    def _guess_rules(self, label, targets):
        n = len(self.tape_names)
        keep, stay = (ANY,) * n, ("S",) * n

        def nop(src, dst):
            return Rule(src, ANY, ANY, (ANY,) * n, dst, keep, stay)

        out = []
        current = label
        rest = list(targets)
        while len(rest) > 2:
            nxt = self.fresh(f"{label}_or")
            self.modes[nxt] = self.modes[label]
            out.append(nop(current, rest.pop(0)))
            out.append(nop(current, nxt))
            current = nxt
        out.extend(nop(current, t) for t in rest)
        return out

    def build(self, start: str) -> MachineSpec:
        self.declare(start)
        raw = []
        for label in list(self.modes):
            rules = list(self.rules.get(label, ()))
            if label in self.guesses:
                if rules or label in self.defaults:
                    raise MachineFormatError(f"label {label!r} mixes guess with other rules")
                raw.extend(self._guess_rules(label, self.guesses[label]))
                continue
            chosen = self.choices.get(label, [])
            for a, b in itertools.combinations(rules, 2):
                if self._overlap(a, b) and not (a in chosen and b in chosen):
                    raise MachineFormatError(f"label {label!r} has overlapping rules to {a.target!r} and {b.target!r}")
            if label in self.defaults:
                rules += self._expand_default(label, rules, self.defaults[label])
            raw.extend(rules)
        self._check_fanout(raw)
        return MachineSpec(dict(self.modes), start, len(self.tape_names), raw, self.time_bound, self.name)

    def _check_fanout(self, raw):
        by_label: dict = {}
        for r in raw:
            by_label.setdefault(r.source, []).append(r)
        for label, rules in by_label.items():
            for trio in itertools.combinations(rules, 3):
                if _common(*trio):
                    raise MachineFormatError(f"label {label!r} branches more than two ways")


def _common(*rules) -> bool:
    """Some concrete trigger matches all of ``rules``."""
    fields = [(r.read, r.addr, *r.work) for r in rules]
    for column in zip(*fields):
        fixed = {s for s in column if s != ANY}
        if len(fixed) > 1:
            return False
    return True


# -- .mb text ---------------------------------------------------------------------


def parse_program(text: str, name: str = "program") -> MachineSpec:
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(_strip_comment(line))
    if not lines or lines[0] != FORMAT_HEADER:
        raise MachineFormatError(f"builder programs start with {FORMAT_HEADER!r}")
    tapes, alphabet, inputs, start = None, ("0", "1", "_"), INPUT_SYMBOLS, None
    body = []
    for lineno, line in enumerate(lines[1:], start=2):
        words = line.split()
        if words[0] == "tapes":
            tapes = int(words[1])
        elif words[0] == "alphabet":
            alphabet = tuple(words[1:])
        elif words[0] == "input":
            inputs = tuple(ENDMARK if w == "end" else w for w in words[1:])
        else:
            body.append((lineno, words))
    if tapes is None:
        raise MachineFormatError("missing 'tapes'")
    b = Builder(tapes, alphabet, inputs, name)
    for lineno, words in body:
        head = words[0]
        try:
            if head == "start":
                start = words[1]
            elif head == "budget":
                b.time_bound = (int(words[1]), int(words[2]))
            elif head in ("accept", "reject", "universal", "existential"):
                for w in words[1:]:
                    b.declare(w, head if head in MODES else EXISTENTIAL)
            elif head in ("on", "choose"):
                rule = _parse_rule(lineno, words[1:], tapes)
                b.declare(rule.source)
                b.declare(rule.target)
                b.rules.setdefault(rule.source, []).append(rule)
                if head == "choose":
                    b.choices.setdefault(rule.source, []).append(rule)
            elif head == "otherwise":
                rule = _parse_rule(lineno, words[1:], tapes)
                if rule.read != ANY or rule.addr != ANY or any(s != ANY for s in rule.work):
                    raise MachineFormatError(f"line {lineno}: 'otherwise' takes no triggers")
                b.declare(rule.source)
                b.declare(rule.target)
                b.defaults[rule.source] = rule
            elif head == "guess":
                if words[2] != "->":
                    raise MachineFormatError(f"line {lineno}: expected 'guess LABEL -> T1 T2 ...'")
                b.guess(words[1], words[3:])
            else:
                raise MachineFormatError(f"line {lineno}: unknown directive {head!r}")
        except (IndexError, ValueError):
            raise MachineFormatError(f"line {lineno}: malformed {head!r} line") from None
    if start is None:
        raise MachineFormatError("missing 'start'")
    return b.build(start)
