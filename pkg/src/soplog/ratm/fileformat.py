"""Text format for raw machines (``.mach``).

::

    format v1
    tapes 1
    start q0
    budget 2 1                      # optional: at most 2 * ceil(log n)^1 steps
    state q0 existential
    state yes accept
    state no reject
    rule q0 read=1 -> yes
    rule q0 read=0 wt1=_ -> no write1=1 move1=R awrite=1 amove=R

Lines starting with ``#`` are comments, as is anything after a `` # ``.
Omitted triggers match anything, omitted writes keep the cell and omitted
moves stay.  The endmark is written ``end``; ``_`` is the blank.
"""
from __future__ import annotations

import re

from ..errors import MachineFormatError
from .machine import ANY, ENDMARK, MODES, MachineSpec, Rule

FORMAT_HEADER = "format v1"
_KEY = re.compile(r"^(read|addr|awrite|amove|wt(\d+)|write(\d+)|move(\d+))=(\S+)$")


def _symbol(tok: str) -> str:
    if tok == "end":
        return ENDMARK
    if tok == "−":
        return "-"
    return tok


def _token(sym: str) -> str:
    return "end" if sym == ENDMARK else sym


def parse_machine(text: str, name: str = "machine") -> MachineSpec:
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(_strip_comment(line))
    if not lines or lines[0] != FORMAT_HEADER:
        raise MachineFormatError(f"machine files start with {FORMAT_HEADER!r}")
    states: dict = {}
    start = None
    tapes = None
    bound = None
    pending = []
    for lineno, line in enumerate(lines[1:], start=2):
        words = line.split()
        head = words[0]
        try:
            if head == "tapes":
                tapes = int(words[1])
                if tapes < 0:
                    raise ValueError
            elif head == "start":
                start = words[1]
            elif head == "budget":
                bound = (int(words[1]), int(words[2]))
            elif head == "state":
                if words[2] not in MODES:
                    raise MachineFormatError(f"line {lineno}: unknown mode {words[2]!r}")
                if words[1] in states:
                    raise MachineFormatError(f"line {lineno}: state {words[1]!r} declared twice")
                states[words[1]] = words[2]
            elif head == "rule":
                pending.append((lineno, words[1:]))
            else:
                raise MachineFormatError(f"line {lineno}: unknown directive {head!r}")
        except (IndexError, ValueError):
            raise MachineFormatError(f"line {lineno}: malformed {head!r} line") from None
    if tapes is None or start is None:
        raise MachineFormatError("missing 'tapes' or 'start'")
    rules = [_parse_rule(lineno, words, tapes) for lineno, words in pending]
    return MachineSpec(states, start, tapes, rules, bound, name)


def _strip_comment(line: str) -> str:
    # '#' is also a machine symbol, so a trailing comment needs whitespace around its '#'
    return re.split(r"\s#(\s|$)", line, maxsplit=1)[0].strip()


def _parse_rule(lineno: int, words: list, tapes: int) -> Rule:
    if "->" not in words or not words:
        raise MachineFormatError(f"line {lineno}: a rule needs 'FROM ... -> TO ...'")
    arrow = words.index("->")
    if arrow == 0 or arrow + 1 >= len(words):
        raise MachineFormatError(f"line {lineno}: a rule needs 'FROM ... -> TO ...'")
    source, target = words[0], words[arrow + 1]
    fields = {"read": ANY, "addr": ANY, "awrite": ANY, "amove": "S"}
    work, writes, moves = [ANY] * tapes, [ANY] * tapes, ["S"] * tapes
    for side, toks in (("when", words[1:arrow]), ("then", words[arrow + 2 :])):
        for tok in toks:
            m = _KEY.match(tok)
            if not m:
                raise MachineFormatError(f"line {lineno}: cannot read {tok!r}")
            key, value = m.group(1), _symbol(m.group(5))
            allowed = ("read", "addr") if side == "when" else ("awrite", "amove")
            if key in allowed:
                fields[key] = value
                continue
            idx = m.group(2) if side == "when" else (m.group(3) or m.group(4))
            if idx is None or (side == "when") != key.startswith("wt"):
                raise MachineFormatError(f"line {lineno}: {tok!r} is on the wrong side of '->'")
            i = int(idx) - 1
            if not 0 <= i < tapes:
                raise MachineFormatError(f"line {lineno}: no work tape {idx}")
            (work if key.startswith("wt") else writes if key.startswith("write") else moves)[i] = value
    return Rule(source, fields["read"], fields["addr"], tuple(work), target, tuple(writes), tuple(moves),
                fields["awrite"], fields["amove"])


def dump_machine(m: MachineSpec) -> str:
    out = [FORMAT_HEADER, f"tapes {m.tapes}", f"start {m.start}"]
    if m.time_bound:
        out.append(f"budget {m.time_bound[0]} {m.time_bound[1]}")
    out += [f"state {s} {mode}" for s, mode in m.states.items()]
    for r in m.rules:
        parts = ["rule", r.source]
        if r.read != ANY:
            parts.append(f"read={_token(r.read)}")
        if r.addr != ANY:
            parts.append(f"addr={r.addr}")
        parts += [f"wt{i + 1}={s}" for i, s in enumerate(r.work) if s != ANY]
        parts += ["->", r.target]
        parts += [f"write{i + 1}={s}" for i, s in enumerate(r.writes) if s != ANY]
        parts += [f"move{i + 1}={d}" for i, d in enumerate(r.moves) if d != "S"]
        if r.awrite != ANY:
            parts.append(f"awrite={r.awrite}")
        if r.amove != "S":
            parts.append(f"amove={r.amove}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"
