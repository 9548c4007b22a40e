"""Finite ordered structures, the bin(A) encoding, and word models.

Domains are always ``0..n-1``.  Every vocabulary implicitly carries the
built-in symbols ``LEQ``, ``SUCC``, ``BIT`` and the constants ``0``, ``1``,
``logn`` and ``max``; they are computed from ``n`` and never encoded.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    InterpretationError,
    LengthMismatch,
    OutOfRange,
    SizeTooSmall,
    StructureError,
    TextTooShort,
    UnknownCharacter,
)

BUILTIN_RELATIONS = {"LEQ": 2, "SUCC": 2, "BIT": 2}
BUILTIN_CONSTANTS = ("0", "1", "logn", "max")

FORMAT_HEADER = "format v1"


def clog2(n: int) -> int:
    """ceil(log2 n) for n >= 1."""
    if n < 1:
        raise ValueError("clog2 needs n >= 1")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class Vocabulary:
    """Input vocabulary; order of ``relations`` and ``constants`` fixes bin(A)."""

    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple((str(r), int(a)) for r, a in self.relations))
        object.__setattr__(self, "constants", tuple(str(c) for c in self.constants))
        names = [r for r, _ in self.relations] + list(self.constants)
        if len(set(names)) != len(names):
            raise StructureError("vocabulary symbol names must be unique")
        for name in names:
            if name in BUILTIN_RELATIONS or name in BUILTIN_CONSTANTS:
                raise StructureError(f"{name!r} is a built-in symbol")
        for name, arity in self.relations:
            if arity < 1:
                raise StructureError(f"relation {name} must have arity >= 1")

    @classmethod
    def of(cls, relations: Mapping[str, int] | Iterable = (), constants: Iterable[str] = ()):
        if isinstance(relations, Mapping):
            relations = relations.items()
        return cls(tuple(relations), tuple(constants))

    def arity(self, name: str) -> int:
        if name in BUILTIN_RELATIONS:
            return BUILTIN_RELATIONS[name]
        for r, a in self.relations:
            if r == name:
                return a
        raise KeyError(name)

    def encoded_length(self, n: int) -> int:
        return sum(n**a for _, a in self.relations) + len(self.constants) * clog2(n)


@dataclass(frozen=True)
class Structure:
    vocab: Vocabulary
    n: int
    relations: Mapping[str, frozenset] = field(repr=False)
    constants: Mapping[str, int]

    @property
    def logn(self) -> int:
        return clog2(self.n)

    @property
    def domain(self) -> range:
        return range(self.n)

    def holds(self, name: str, args: tuple) -> bool:
        return tuple(args) in self.relations[name]

    def constant(self, name: str) -> int:
        return self.constants[name]

    def input_relations(self) -> dict:
        return {r: self.relations[r] for r, _ in self.vocab.relations}

    def input_constants(self) -> dict:
        return {c: self.constants[c] for c in self.vocab.constants}

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and self.n == other.n
            and self.input_relations() == other.input_relations()
            and self.input_constants() == other.input_constants()
        )

    def __hash__(self):
        rels = tuple(sorted((k, tuple(sorted(v))) for k, v in self.input_relations().items()))
        return hash((self.vocab, self.n, rels, tuple(sorted(self.input_constants().items()))))


def builtin_relations(n: int) -> dict[str, frozenset]:
    dom = range(n)
    return {
        "LEQ": frozenset((i, j) for i in dom for j in dom if i <= j),
        "SUCC": frozenset((i, i + 1) for i in range(n - 1)),
        "BIT": frozenset((i, j) for i in dom for j in dom if (i >> j) & 1),
    }


def builtin_constants(n: int) -> dict[str, int]:
    return {"0": 0, "1": 1, "logn": clog2(n), "max": n - 1}


def make_structure(vocab: Vocabulary, n: int, input_interps: Mapping | None = None) -> Structure:
    input_interps = dict(input_interps or {})
    if n < 2:
        raise SizeTooSmall(f"structures need at least two elements, got n={n}")
    expected = {r for r, _ in vocab.relations} | set(vocab.constants)
    missing = expected - input_interps.keys()
    extra = input_interps.keys() - expected
    if missing:
        raise InterpretationError(f"missing interpretation for {sorted(missing)}")
    if extra:
        raise InterpretationError(f"no such input symbol: {sorted(extra)}")

    rels = builtin_relations(n)
    for name, arity in vocab.relations:
        tuples = set()
        for t in input_interps[name]:
            t = (t,) if isinstance(t, int) else tuple(t)
            if len(t) != arity or not all(isinstance(a, int) and 0 <= a < n for a in t):
                raise OutOfRange(f"tuple {t} is not in {{0..{n - 1}}}^{arity} for {name}")
            tuples.add(t)
        rels[name] = frozenset(tuples)
    consts = builtin_constants(n)
    for name in vocab.constants:
        value = input_interps[name]
        if not isinstance(value, int) or not 0 <= value < n:
            raise OutOfRange(f"constant {name}={value} out of range 0..{n - 1}")
        consts[name] = value
    return Structure(vocab, n, rels, consts)


def encode_bin(s: Structure) -> str:
    """bin(A): relation bitmaps (lexicographic tuple order) then constants MSB-first."""
    out = []
    for name, arity in s.vocab.relations:
        rel = s.relations[name]
        out.extend("1" if t in rel else "0" for t in itertools.product(range(s.n), repeat=arity))
    width = s.logn
    for name in s.vocab.constants:
        out.append(format(s.constants[name], f"0{width}b") if width else "")
    return "".join(out)


def decode_bin(vocab: Vocabulary, n: int, bits: str) -> Structure:
    if n < 2:
        raise SizeTooSmall(f"structures need at least two elements, got n={n}")
    expected = vocab.encoded_length(n)
    if len(bits) != expected:
        raise LengthMismatch(f"expected {expected} bits for n={n}, got {len(bits)}")
    if set(bits) - {"0", "1"}:
        raise LengthMismatch("bit string may contain only 0 and 1")
    interps = {}
    pos = 0
    for name, arity in vocab.relations:
        tuples = set()
        for t in itertools.product(range(n), repeat=arity):
            if bits[pos] == "1":
                tuples.add(t)
            pos += 1
        interps[name] = tuples
    width = clog2(n)
    for name in vocab.constants:
        value = int(bits[pos:pos + width], 2)
        pos += width
        if value >= n:
            raise OutOfRange(f"decoded constant {name}={value} >= n={n}")
        interps[name] = value
    return make_structure(vocab, n, interps)


_DEFAULT_LETTER_NAMES = {
    "(": "lp",
    ")": "rp",
    "∧": "and",
    "∨": "or",
    "¬": "neg",
    "&": "and",
    "|": "or",
    "~": "neg",
}


def letter_relation(symbol: str) -> str:
    """Relation name ``I_<tag>`` used by word models for an alphabet symbol."""
    if symbol in _DEFAULT_LETTER_NAMES:
        return "I_" + _DEFAULT_LETTER_NAMES[symbol]
    if symbol.isalnum():
        return "I_" + symbol
    return "I_u%04x" % ord(symbol)


def word_model(alphabet: Iterable[str], text: str) -> Structure:
    alphabet = list(alphabet)
    if len(text) < 2:
        raise TextTooShort("word models need at least two positions")
    for i, ch in enumerate(text):
        if ch not in alphabet:
            raise UnknownCharacter(f"character {ch!r} at position {i} is not in the alphabet")
    vocab = Vocabulary(tuple((letter_relation(a), 1) for a in alphabet))
    interps = {letter_relation(a): {(i,) for i, ch in enumerate(text) if ch == a} for a in alphabet}
    return make_structure(vocab, len(text), interps)


# -- text file format ---------------------------------------------------------


def parse_structure(text: str) -> Structure:
    """Read the line-oriented ``.fstruct`` format."""
    n = None
    relations: list[tuple[str, int]] = []
    constants: list[str] = []
    interps: dict = {}
    current = None
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if lines and lines[0] == FORMAT_HEADER:
        lines = lines[1:]
    for lineno, line in enumerate(lines, 1):
        words = line.split()
        try:
            if words[0] == "format":
                raise StructureError(f"unsupported format line {line!r}")
            if words[0] == "size":
                n = int(words[1])
            elif words[0] == "rel":
                name, arity = words[1], int(words[2])
                relations.append((name, arity))
                interps[name] = set()
                current = (name, arity)
            elif words[0] == "tuple":
                if current is None:
                    raise StructureError("tuple outside of rel block")
                t = tuple(int(w) for w in words[1:])
                if len(t) != current[1]:
                    raise StructureError(f"tuple arity {len(t)} != {current[1]}")
                interps[current[0]].add(t)
            elif words[0] == "const":
                constants.append(words[1])
                interps[words[1]] = int(words[2])
                current = None
            else:
                raise StructureError(f"unknown directive {words[0]!r}")
        except (IndexError, ValueError) as exc:
            raise StructureError(f"line {lineno}: malformed {line!r}") from exc
    if n is None:
        raise StructureError("missing 'size' line")
    return make_structure(Vocabulary(tuple(relations), tuple(constants)), n, interps)


def dump_structure(s: Structure) -> str:
    lines = [FORMAT_HEADER, f"size {s.n}"]
    for name, arity in s.vocab.relations:
        lines.append(f"rel {name} {arity}")
        for t in sorted(s.relations[name]):
            lines.append("tuple " + " ".join(map(str, t)))
    for name in s.vocab.constants:
        lines.append(f"const {name} {s.constants[name]}")
    return "\n".join(lines) + "\n"


def all_structures(vocab: Vocabulary, n: int):
    """Every structure over ``vocab`` with domain size ``n`` (exponential)."""
    length = vocab.encoded_length(n)
    for bits in itertools.product("01", repeat=length):
        try:
            yield decode_bin(vocab, n, "".join(bits))
        except OutOfRange:
            continue
