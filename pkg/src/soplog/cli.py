"""Command-line interface: ``soplog COMMAND [options]``.

Exit codes: 0 success, 1 negative verification verdict, 2 usage or input
error, 3 resource ceiling reached.  Answers go to standard output and
diagnostics to standard error.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import macros
from .errors import ResourceExceeded, SoplogError
from .evaluate import EvalConfig, Valuation, evaluate, find_witness
from .formula import FragmentLabel, SOVar, classify, desugar, free_vars, is_core, parse, pretty, to_snf
from .ratm import RunBudget, accepts, load_machine, measure
from .structure import Vocabulary, decode_bin, dump_structure, encode_bin, parse_structure

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
THREADS_ENV = "SOPLOG_THREADS"
DEFAULT_MAX_STEPS = 100_000
FORMAT_HEADER = "format v1"


class UsageError(Exception):
    pass


# -- input helpers -------------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _formula_text(args) -> str:
    if getattr(args, "text", None):
        return args.text
    if getattr(args, "formula", None):
        text = _read(args.formula)
        lines = text.splitlines()
        if lines and lines[0].strip() == FORMAT_HEADER:
            text = "\n".join(lines[1:])
        return "\n".join(ln for ln in text.splitlines() if not ln.lstrip().startswith("#"))
    raise UsageError("give --formula FILE or --text FORMULA")


def _formula(args):
    return parse(_formula_text(args))


def _vocab(spec_rel: str | None, spec_const: str | None) -> Vocabulary:
    rels = []
    for item in filter(None, (spec_rel or "").split(",")):
        name, _, arity = item.partition(":")
        if not arity.isdigit():
            raise UsageError(f"relation {item!r} should look like NAME:ARITY")
        rels.append((name.strip(), int(arity)))
    consts = [c.strip() for c in (spec_const or "").split(",") if c.strip()]
    return Vocabulary(tuple(rels), tuple(consts))


def _config(args) -> EvalConfig:
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return EvalConfig(max_candidates=args.max_candidates, threads=threads, strategy=args.strategy)


def _tuples(text: str) -> frozenset:
    """``"0 1;1 0"`` -> {(0, 1), (1, 0)}; an empty string is the empty relation."""
    out = set()
    for chunk in text.split(";"):
        if chunk.strip():
            out.add(tuple(int(x) for x in chunk.replace(",", " ").split()))
    return frozenset(out)


def _valuation(f, args) -> Valuation:
    fo_free, so_free = free_vars(f)
    so_by_name = {v.name: v for v in so_free}
    so, fo = {}, {}
    for item in args.so or ():
        name, _, tuples = item.partition("=")
        if name not in so_by_name:
            raise UsageError(f"{name!r} is not a free second-order variable of the formula")
        so[so_by_name[name]] = _tuples(tuples)
    for item in args.fo or ():
        name, _, value = item.partition("=")
        if not value.strip().lstrip("-").isdigit():
            raise UsageError(f"--fo expects NAME=ELEMENT, got {item!r}")
        fo[name] = int(value)
    missing = sorted({v.name for v in so_free} - {v.name for v in so}) + sorted(set(fo_free) - set(fo))
    if missing:
        raise UsageError(f"unassigned free variables: {', '.join(missing)}")
    return Valuation(fo, so)


def _input_bits(args) -> str:
    if args.structure:
        return encode_bin(parse_structure(_read(args.structure)))
    if args.input is None:
        raise UsageError("give --input BITS or --structure FILE")
    if set(args.input) - {"0", "1", "#", "+", "-"}:
        raise UsageError("input strings use 0, 1, #, + and -")
    return args.input


def dump_valuation(val: Valuation) -> str:
    out = [FORMAT_HEADER]
    for name, value in sorted(val.fo.items()):
        out.append(f"fo {name} {value}")
    for var, rel in sorted(val.so.items(), key=lambda kv: kv[0].name):
        out.append(f"so {var.name} {var.arity} {var.exponent}")
        out.extend("tuple " + " ".join(map(str, t)) for t in sorted(rel))
    return "\n".join(out) + "\n"


# -- commands ------------------------------------------------------------------------


def cmd_parse(args, out):
    out(pretty(_formula(args)))
    return EXIT_OK


def cmd_check(args, out):
    f = _formula(args)
    fo_free, so_free = free_vars(f)
    problems = []
    if args.structure:
        vocab = parse_structure(_read(args.structure)).vocab
        from .formula.ast import Const, Rel, walk
        from .structure import BUILTIN_CONSTANTS

        for g in walk(f):
            if isinstance(g, Rel):
                try:
                    want = vocab.arity(g.name)
                except KeyError:
                    problems.append(f"relation {g.name} is not in the vocabulary")
                    continue
                if want != len(g.args):
                    problems.append(f"relation {g.name} used with {len(g.args)} arguments, arity is {want}")
            for t in getattr(g, "args", ()):
                if isinstance(t, Const) and t.name not in BUILTIN_CONSTANTS and t.name not in vocab.constants:
                    problems.append(f"constant {t.name} is not in the vocabulary")
    out(f"core: {'yes' if is_core(f) else 'no'}")
    out(f"free first-order: {' '.join(sorted(fo_free)) or '-'}")
    out(f"free second-order: {' '.join(sorted(str(v) for v in so_free)) or '-'}")
    for p in sorted(set(problems)):
        out(f"problem: {p}")
    return EXIT_NEGATIVE if problems else EXIT_OK


def _snf(f):
    return to_snf(f if is_core(f) else desugar(f))


def cmd_normalize(args, out):
    f = _formula(args)
    _, so_free = free_vars(f)
    out(pretty(_snf(f), so_free))
    return EXIT_OK


def cmd_classify(args, out):
    label: FragmentLabel = classify(_snf(_formula(args)))
    out(str(label))
    return EXIT_OK


def cmd_eval(args, out):
    s = parse_structure(_read(args.structure))
    f = _formula(args)
    out("true" if evaluate(s, f, _valuation(f, args), _config(args)) else "false")
    return EXIT_OK


def cmd_witness(args, out):
    s = parse_structure(_read(args.structure))
    f = _formula(args)
    w = find_witness(s, f, _config(args))
    if w is None:
        out("none")
        return EXIT_NEGATIVE
    out(dump_valuation(w).rstrip("\n"))
    return EXIT_OK


def cmd_encode(args, out):
    out(encode_bin(parse_structure(_read(args.structure))))
    return EXIT_OK


def cmd_decode(args, out):
    vocab = _vocab(args.relations, args.constants)
    out(dump_structure(decode_bin(vocab, args.size, args.bits)).rstrip("\n"))
    return EXIT_OK


def _machine(args):
    return load_machine(_read(args.machine), os.path.basename(args.machine))


def cmd_simulate(args, out):
    m = _machine(args)
    ok = accepts(m, _input_bits(args), RunBudget(args.max_steps, args.max_alternations))
    out("true" if ok else "false")
    return EXIT_OK


def cmd_measure(args, out):
    m = _machine(args)
    r = measure(m, _input_bits(args), RunBudget(args.max_steps, args.max_alternations))
    out(f"accepted {'true' if r.accepted else 'false'}")
    out(f"steps {r.steps}")
    out(f"alternations {r.alternations}")
    return EXIT_OK


def _compile(args):
    from .faginc import compile_machine, compile_plan

    m = _machine(args)
    vocab = _vocab(args.relations, args.constants)
    plan = compile_plan(m, args.k, args.k2, vocab, tuple(args.exact_sizes))
    return plan, compile_machine(m, args.k, args.k2, vocab, plan=plan)


def manifest_text(plan) -> str:
    out = [FORMAT_HEADER, f"k {plan.k}", f"k2 {plan.k2}", f"exact-sizes {' '.join(map(str, plan.exact_sizes))}"]
    for i, s in enumerate(plan.state_names):
        out.append(f"state S{i} {s}")
    for name, arity, exponent, role in plan.inventory():
        out.append(f"predicate {name} {arity} {exponent}  # {role}")
    return "\n".join(out) + "\n"


def cmd_compile_machine(args, out):
    plan, f = _compile(args)
    text = pretty(f) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        manifest = args.manifest or os.path.splitext(args.out)[0] + ".manifest"
    else:
        out(text.rstrip("\n"))
        manifest = args.manifest
    if manifest:
        with open(manifest, "w", encoding="utf-8") as fh:
            fh.write(manifest_text(plan))
    out(f"# {len(plan.predicates)} predicates, classified {classify(f)}", err=True)
    return EXIT_OK


def cmd_verify_capture(args, out):
    from .faginc import verify_capture
    from .structure import all_structures

    m = _machine(args)
    vocab = _vocab(args.relations, args.constants)
    if args.structure:
        structures = [parse_structure(_read(p)) for p in args.structure]
        vocab = structures[0].vocab
    else:
        structures = [s for n in args.sizes for s in all_structures(vocab, n)]
    report = verify_capture(m, args.k, args.k2, vocab, structures, _config(args), tuple(args.exact_sizes))
    for r in report.rows:
        verdicts = f"machine={_tf(r.machine_accepts)} sentence={_tf(r.sentence_holds)}"
        extra = f" ({r.error})" if r.error else ""
        out(f"n={r.n} bin={r.text} {verdicts} via {r.method} {'agree' if r.agrees else 'DISAGREE'}{extra}")
    out(report.summary())
    return EXIT_OK if report.agreement else EXIT_NEGATIVE


def _tf(v):
    return "-" if v is None else ("true" if v else "false")


def cmd_selftest(args, out):
    from .selftest import SUITES, format_table, run_selftest

    names = args.suite or list(SUITES)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s): {', '.join(unknown)}")
    results = run_selftest(names)
    out(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_NEGATIVE


MACROS = ("leq", "succ", "def", "bin", "eq", "lt", "bnum", "bsum", "bmult", "bdiv", "card-leq", "clique",
          "dnfsat", "nodnfsat")


def cmd_macro(args, out):
    k = args.k
    X, Y, Z, M = (SOVar(c, k + 1, k) for c in "XYZM")
    xs, ys = [f"x{i}" for i in range(k)], [f"y{i}" for i in range(k)]
    name = args.name
    if name == "leq":
        f = macros.leq_tuple(k, xs, ys)
    elif name == "succ":
        f = macros.succ_tuple(k, xs, ys)
    elif name == "def":
        f = macros.def_k(k, SOVar("I", k, k))
    elif name == "bin":
        f = macros.bin_k(k, X)
    elif name in ("eq", "lt"):
        f = macros.cmp_num(k, X, Y, name)
    elif name == "bnum":
        f = macros.bnum(k, X, "x")
    elif name == "bsum":
        f = macros.bsum(k, X, Y, Z)
    elif name == "bmult":
        f = macros.bmult(k, X, Y, Z)
    elif name == "bdiv":
        f = macros.bdiv(k, X, Y, Z, M)
    elif name == "card-leq":
        f = macros.card_leq(SOVar("X", 1, k), SOVar("Y", 1, k))
    elif name == "clique":
        f = macros.clique_formula(k)
    else:
        dnfsat, nodnfsat = macros.dnf_queries()
        f = dnfsat if name == "dnfsat" else nodnfsat
    out(pretty(f, ()))
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def _formula_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--formula", "-f", help="formula file (.sop), '-' for stdin")
    g.add_argument("--text", "-t", help="formula given inline")


def _limits(p):
    p.add_argument("--max-candidates", type=int, default=1_000_000, help="ceiling on candidate relations per quantifier")
    p.add_argument("--threads", type=int, default=None, help=f"worker cap (default ${THREADS_ENV} or 1)")
    p.add_argument("--strategy", choices=("auto", "enumerate"), default="auto",
                   help="second-order blocks: solver (auto) or explicit enumeration")


def _machine_args(p, needs_input=True):
    p.add_argument("--machine", "-m", required=True, help="machine file (.mach raw table or .mb builder program)")
    if needs_input:
        p.add_argument("--input", "-i", help="input string")
        p.add_argument("--structure", "-s", help="use bin() of this structure as input")
        p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
        p.add_argument("--max-alternations", type=int, default=None)


def _vocab_args(p):
    p.add_argument("--relations", "-r", default="", help="NAME:ARITY,... in encoding order")
    p.add_argument("--constants", "-c", default="", help="NAME,... in encoding order")


def _compile_args(p):
    _machine_args(p, needs_input=False)
    _vocab_args(p)
    p.add_argument("--k", type=int, required=True, help="time and work-tape exponent")
    p.add_argument("--k2", type=int, required=True, help="address and arithmetic exponent")
    p.add_argument("--exact-sizes", type=int, nargs="*", default=[2], help="sizes handled by listing structures")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="soplog", description="Polylog-bounded second-order logic toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a formula and print it back")
    _formula_args(p)
    p = sub.add_parser("check", help="report core form, free variables and vocabulary problems")
    _formula_args(p)
    p.add_argument("--structure", "-s")
    p = sub.add_parser("normalize", help="print the prenex normal form")
    _formula_args(p)
    p = sub.add_parser("classify", help="print the fragment of the normal form")
    _formula_args(p)
    for name, helptext in (("eval", "truth value on a structure"), ("witness", "witness for an existential sentence")):
        p = sub.add_parser(name, help=helptext)
        _formula_args(p)
        p.add_argument("--structure", "-s", required=True)
        _limits(p)
        if name == "eval":
            p.add_argument("--so", action="append", help="NAME=a b;c d  value of a free second-order variable")
            p.add_argument("--fo", action="append", help="NAME=ELEMENT  value of a free first-order variable")
    p = sub.add_parser("encode", help="print bin() of a structure")
    p.add_argument("--structure", "-s", required=True)
    p = sub.add_parser("decode", help="rebuild a structure from bin()")
    _vocab_args(p)
    p.add_argument("--size", "-n", type=int, required=True)
    p.add_argument("--bits", "-b", required=True)
    p = sub.add_parser("simulate", help="run a machine")
    _machine_args(p)
    p = sub.add_parser("measure", help="run a machine and report steps and alternations")
    _machine_args(p)
    p = sub.add_parser("compile-machine", help="emit the existential sentence of a machine")
    _compile_args(p)
    p.add_argument("--out", "-o", help="write the sentence here (manifest next to it)")
    p.add_argument("--manifest", help="manifest path")
    p = sub.add_parser("verify-capture", help="compare a machine with its compiled sentence")
    _compile_args(p)
    p.add_argument("--sizes", type=int, nargs="*", default=[2, 3])
    p.add_argument("--structure", "-s", action="append", help="check these structures instead of all of --sizes")
    _limits(p)
    p = sub.add_parser("selftest", help="run the built-in oracle suites")
    p.add_argument("suite", nargs="*")
    p = sub.add_parser("macro", help="print a named formula generator's output")
    p.add_argument("name", choices=MACROS)
    p.add_argument("--k", type=int, default=1)
    return ap


COMMANDS = {
    "parse": cmd_parse,
    "check": cmd_check,
    "normalize": cmd_normalize,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "witness": cmd_witness,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "simulate": cmd_simulate,
    "measure": cmd_measure,
    "compile-machine": cmd_compile_machine,
    "verify-capture": cmd_verify_capture,
    "selftest": cmd_selftest,
    "macro": cmd_macro,
}


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    def out(line, err=False):
        print(line, file=stderr if err else stdout)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except ResourceExceeded as exc:
        out(f"soplog: resource limit: {exc}", err=True)
        return EXIT_RESOURCE
    except (SoplogError, UsageError, ValueError) as exc:
        out(f"soplog: {type(exc).__name__}: {exc}", err=True)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
