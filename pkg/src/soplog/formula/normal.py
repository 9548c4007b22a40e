"""Desugaring, prenex (SNF) conversion and fragment classification."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ast import (
    FALSE,
    LITERAL_TYPES,
    TRUE,
    And,
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
    conj,
    disj,
    walk,
)


def free_vars(f: Formula) -> tuple[set, set]:
    """Free first-order variable names and free second-order variables of ``f``."""
    fo: set = set()
    so: set = set()

    def terms(args, bound):
        for t in args:
            if isinstance(t, Var) and t.name not in bound:
                fo.add(t.name)

    def go(g, bound, sbound):
        if isinstance(g, Eq):
            terms((g.left, g.right), bound)
        elif isinstance(g, Rel):
            terms(g.args, bound)
        elif isinstance(g, SOAtom):
            terms(g.args, bound)
            if g.var not in sbound:
                so.add(g.var)
        elif isinstance(g, Not):
            go(g.body, bound, sbound)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                go(a, bound, sbound)
        elif isinstance(g, (Implies, Iff)):
            go(g.left, bound, sbound)
            go(g.right, bound, sbound)
        elif isinstance(g, (Exists, Forall)):
            go(g.body, bound | {g.var}, sbound)
        elif isinstance(g, ForallIn):
            if g.guard not in sbound:
                so.add(g.guard)
            go(g.body, bound | set(g.vars), sbound)
        elif isinstance(g, (SOExists, SOForall)):
            go(g.body, bound, sbound | {g.var})
        else:
            raise TypeError(f"not a formula: {g!r}")

    go(f, frozenset(), frozenset())
    return fo, so


def all_names(f: Formula) -> set:
    names = set()
    for g in walk(f):
        if isinstance(g, (Exists, Forall)):
            names.add(g.var)
        elif isinstance(g, ForallIn):
            names.update(g.vars)
            names.add(g.guard.name)
        elif isinstance(g, (SOExists, SOForall)):
            names.add(g.var.name)
        elif isinstance(g, SOAtom):
            names.add(g.var.name)
        if isinstance(g, (Eq, Rel, SOAtom)):
            args = (g.left, g.right) if isinstance(g, Eq) else g.args
            names.update(t.name for t in args if isinstance(t, Var))
    return names


class Namer:
    """Deterministic fresh names: ``base_1``, ``base_2``, ... avoiding ``taken``."""

    def __init__(self, taken=()):
        self.taken = set(taken)
        self.counters: dict = {}

    def fresh(self, base: str) -> str:
        base = base.split("_")[0] or "v"
        i = self.counters.get(base, 0)
        while True:
            i += 1
            name = f"{base}_{i}"
            if name not in self.taken:
                break
        self.counters[base] = i
        self.taken.add(name)
        return name

    def claim(self, name: str) -> str:
        """Reuse ``name`` if unused, else a fresh variant."""
        if name not in self.taken:
            self.taken.add(name)
            return name
        return self.fresh(name)


def is_core(f: Formula) -> bool:
    for g in walk(f):
        if isinstance(g, (Implies, Iff, Forall)):
            return False
        if isinstance(g, Not) and not isinstance(g.body, LITERAL_TYPES):
            return False
    return True


# -- desugaring ---------------------------------------------------------------


class _Desugarer:
    def __init__(self, f: Formula):
        self.namer = Namer(all_names(f))

    def unbounded_forall(self, name: str, body: Formula) -> Formula:
        # unbounded ∀x φ  ==  ∀X^{1,0} ∀x (X(x) -> φ)
        guard = SOVar(self.namer.fresh("U"), 1, 0)
        return SOForall(guard, ForallIn((name,), guard, body))

    def negate_exists(self, names: list, body: Formula) -> Formula:
        """NNF of ¬∃names.body, preferring a guarded ∀ over the unbounded-universal encoding."""
        core = self.nnf(body, True)
        parts = core.args if isinstance(core, And) else (core,)
        for idx, part in enumerate(parts):
            if (
                isinstance(part, SOAtom)
                and all(isinstance(t, Var) for t in part.args)
                and len({t.name for t in part.args}) == len(part.args)
                and {t.name for t in part.args} <= set(names)
            ):
                guard_vars = tuple(t.name for t in part.args)
                rest_names = [n for n in names if n not in guard_vars]
                rest = conj(*(parts[:idx] + parts[idx + 1:]))
                if rest_names:
                    inner = self.negate_exists(rest_names, rest)
                else:
                    inner = self.nnf(rest, False)
                return ForallIn(guard_vars, part.var, inner)
        out = self.nnf(core, False)
        for name in reversed(names):
            out = self.unbounded_forall(name, out)
        return out

    def nnf(self, f: Formula, pos: bool) -> Formula:
        if isinstance(f, LITERAL_TYPES):
            return f if pos else Not(f)
        if isinstance(f, Not):
            return self.nnf(f.body, not pos)
        if isinstance(f, And):
            parts = [self.nnf(a, pos) for a in f.args]
            return conj(*parts) if pos else disj(*parts)
        if isinstance(f, Or):
            parts = [self.nnf(a, pos) for a in f.args]
            return disj(*parts) if pos else conj(*parts)
        if isinstance(f, Implies):
            if pos:
                return disj(self.nnf(f.left, False), self.nnf(f.right, True))
            return conj(self.nnf(f.left, True), self.nnf(f.right, False))
        if isinstance(f, Iff):
            a, b = self.nnf(f.left, True), self.nnf(f.right, True)
            na, nb = self.nnf(f.left, False), self.nnf(f.right, False)
            if pos:
                return disj(conj(a, b), conj(na, nb))
            return disj(conj(a, nb), conj(na, b))
        if isinstance(f, Exists):
            if pos:
                return Exists(f.var, self.nnf(f.body, True))
            names = [f.var]
            body = f.body
            while isinstance(body, Exists):
                names.append(body.var)
                body = body.body
            return self.negate_exists(names, body)
        if isinstance(f, Forall):
            if pos:
                return self.unbounded_forall(f.var, self.nnf(f.body, True))
            return Exists(f.var, self.nnf(f.body, False))
        if isinstance(f, ForallIn):
            if pos:
                return ForallIn(f.vars, f.guard, self.nnf(f.body, True))
            names = list(f.vars)
            guard = SOAtom(f.guard, tuple(Var(n) for n in names))
            body: Formula = conj(guard, self.nnf(f.body, False))
            for name in reversed(names):
                body = Exists(name, body)
            return body
        if isinstance(f, (SOExists, SOForall)):
            keep = isinstance(f, SOExists) == pos
            cls = SOExists if keep else SOForall
            return cls(f.var, self.nnf(f.body, pos))
        raise TypeError(f"not a formula: {f!r}")


def desugar(f: Formula) -> Formula:
    """Expand ->/<->, push negation to literals and encode unbounded ∀."""
    return _Desugarer(f).nnf(f, True)


def negate(f: Formula) -> Formula:
    """Core formula equivalent to ¬f."""
    return _Desugarer(f).nnf(f, False)


# -- prenex / SNF -------------------------------------------------------------


def _rename_apart(f: Formula, namer: Namer) -> Formula:
    def term(t, env):
        if isinstance(t, Var) and t.name in env:
            return Var(env[t.name])
        return t

    def go(g, env, senv):
        if isinstance(g, Eq):
            return Eq(term(g.left, env), term(g.right, env))
        if isinstance(g, Rel):
            return Rel(g.name, tuple(term(t, env) for t in g.args))
        if isinstance(g, SOAtom):
            return SOAtom(senv.get(g.var, g.var), tuple(term(t, env) for t in g.args))
        if isinstance(g, Not):
            return Not(go(g.body, env, senv))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(a, env, senv) for a in g.args))
        if isinstance(g, Exists):
            new = namer.claim(g.var)
            return Exists(new, go(g.body, {**env, g.var: new}, senv))
        if isinstance(g, ForallIn):
            new = [namer.claim(v) for v in g.vars]
            env2 = {**env, **dict(zip(g.vars, new))}
            return ForallIn(tuple(new), senv.get(g.guard, g.guard), go(g.body, env2, senv))
        if isinstance(g, (SOExists, SOForall)):
            v = g.var
            new = SOVar(namer.claim(v.name), v.arity, v.exponent)
            return type(g)(new, go(g.body, env, {**senv, v: new}))
        raise TypeError(f"to_snf needs a core formula, got {type(g).__name__}")

    return go(f, {}, {})


def _blocks(prefix):
    return [(q, list(vs)) for q, vs in itertools.groupby(prefix, key=lambda p: p[0])]


def _merge_prefixes(prefixes):
    """Interleave independent prefixes, keeping the number of blocks small."""
    queues = [[(q, [v for _, v in vs]) for q, vs in _blocks(p)] for p in prefixes if p]
    out = []
    while queues:
        longest = max(queues, key=len)
        q = longest[0][0]
        for queue in queues:
            if queue[0][0] == q:
                out.extend((q, v) for v in queue.pop(0)[1])
        queues = [queue for queue in queues if queue]
    return out


class _Prenexer:
    def __init__(self, namer: Namer):
        self.namer = namer

    def run(self, f):
        if isinstance(f, LITERAL_TYPES) or isinstance(f, Not):
            return [], f
        if isinstance(f, (And, Or)):
            parts = [self.run(a) for a in f.args]
            prefix = _merge_prefixes([p for p, _ in parts])
            matrix = (conj if isinstance(f, And) else disj)(*[m for _, m in parts])
            return prefix, matrix
        if isinstance(f, Exists):
            prefix, matrix = self.run(f.body)
            if not prefix:
                return [], Exists(f.var, matrix)
            # ∃x Q̄ M  ==  ∃X^{1,0} Q̄ ∃x (X(x) ∧ M)
            lift = SOVar(self.namer.fresh("E"), 1, 0)
            body = Exists(f.var, conj(SOAtom(lift, (Var(f.var),)), matrix))
            return [("E", lift)] + prefix, body
        if isinstance(f, ForallIn):
            prefix, matrix = self.run(f.body)
            if not prefix:
                return [], ForallIn(f.vars, f.guard, matrix)
            # ∀x̄∈X Q̄ M  ==  ∀Z^{r,0} Q̄ ∀x̄∈Z (¬X(x̄) ∨ M)
            lift = SOVar(self.namer.fresh("A"), len(f.vars), 0)
            guard_atom = SOAtom(f.guard, tuple(Var(v) for v in f.vars))
            body = ForallIn(f.vars, lift, disj(Not(guard_atom), matrix))
            return [("A", lift)] + prefix, body
        if isinstance(f, (SOExists, SOForall)):
            prefix, matrix = self.run(f.body)
            q = "E" if isinstance(f, SOExists) else "A"
            return [(q, f.var)] + prefix, matrix
        raise TypeError(f"to_snf needs a core formula, got {type(f).__name__}")


def prenex_parts(f: Formula):
    """Return ``(prefix, matrix)`` of the SNF of core formula ``f``."""
    if not is_core(f):
        raise TypeError("to_snf needs a core formula; call desugar first")
    fo, so = free_vars(f)
    namer = Namer(fo | {v.name for v in so})
    renamed = _rename_apart(f, namer)
    return _Prenexer(namer).run(renamed)


def to_snf(f: Formula) -> Formula:
    prefix, matrix = prenex_parts(f)
    for q, v in reversed(prefix):
        matrix = (SOExists if q == "E" else SOForall)(v, matrix)
    return matrix


# -- classification -----------------------------------------------------------


@dataclass(frozen=True)
class FragmentLabel:
    kind: str | None  # "Sigma", "Pi" or None for not-SNF
    m: int = 0

    def __str__(self):
        if self.kind is None:
            return "not-SNF"
        return f"{self.kind}_{self.m}"


NOT_SNF = FragmentLabel(None)


def so_prefix(f: Formula):
    prefix = []
    while isinstance(f, (SOExists, SOForall)):
        prefix.append(("E" if isinstance(f, SOExists) else "A", f.var))
        f = f.body
    return prefix, f


def classify(f: Formula) -> FragmentLabel:
    prefix, matrix = so_prefix(f)
    if any(isinstance(g, (SOExists, SOForall)) for g in walk(matrix)):
        return NOT_SNF
    if not prefix:
        return FragmentLabel("Sigma", 1)
    blocks = _blocks(prefix)
    return FragmentLabel("Sigma" if blocks[0][0] == "E" else "Pi", len(blocks))
