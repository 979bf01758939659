"""Command-line front end: ``coderoute <group> <command> ...``.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 capability error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from typing import Sequence

from . import formula as fm
from .compilers import (
    IndicatorError,
    bench_library,
    compile_formula,
    compile_garden_hose_example,
    compile_theorem1_indicator,
    compile_theorem2,
    parse_assignment,
)
from .evaluators import ArityError, EVALUATORS, FanInError, evaluate_tape
from .protocol import (
    TapeError,
    entanglement_cost,
    load_tape,
    save_tape,
    size_H,
    validate_and_build_tree,
    weighted_size_Htilde,
)
from .qsim import CapabilityError, QsimError, run_quantum_tape
from .span import (
    SpanProgramError,
    all_inputs,
    decompose,
    evaluate,
    load_span_program,
    truth_table,
)
from .zp import FieldError

EXIT_USAGE, EXIT_VALIDATION, EXIT_CAPABILITY = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_bits(text: str) -> tuple[int, ...]:
    text = text.strip()
    if any(c not in "01" for c in text):
        raise UsageError(f"bit string expected, got {text!r}")
    return tuple(int(c) for c in text)


def bits_str(bits: Sequence[int]) -> str:
    return "".join(map(str, bits))


def fixed_json(d: dict) -> str:
    """JSON object text with floats in fixed 6-decimal notation."""
    parts = []
    for k, v in d.items():
        val = f"{round(v, 6) + 0.0:.6f}" if isinstance(v, float) else json.dumps(v)
        parts.append(f"{json.dumps(k)}: {val}")
    return "{" + ", ".join(parts) + "}"


# -- sp --------------------------------------------------------------------------

def cmd_sp_eval(a, out):
    sp = load_span_program(a.file)
    z = parse_bits(a.input)
    print(evaluate(sp, z), file=out)


def cmd_sp_table(a, out):
    sp = load_span_program(a.file)
    for z, v in zip(all_inputs(sp.num_inputs), truth_table(sp)):
        print(f"{bits_str(z)} {v}", file=out)


def cmd_sp_decompose(a, out):
    sp = load_span_program(a.file)
    res = decompose(sp)
    data = res.msp.to_dict()
    data["g"] = [{"source": k, "negated": neg} for k, neg in res.g_map]
    with open(a.output, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    names = [f"z{k}" if k <= sp.num_inputs else "b" for k, _ in res.g_map]
    g = ", ".join(f"!{n}" if neg else n for n, (_, neg) in zip(names, res.g_map))
    print(f"g(z,b) = ({g})", file=out)
    print(f"size {res.original_size} -> msp size {res.msp_size} (original + 1)", file=out)


# -- compile ------------------------------------------------------------------------

def _wrote(tape, path, out):
    save_tape(tape, path)
    print(f"wrote {path}: {len(tape.records)} records", file=out)


def cmd_compile_theorem2(a, out):
    _wrote(compile_theorem2(load_span_program(a.file), a.left, a.right), a.output, out)


def cmd_compile_formula(a, out):
    _wrote(compile_formula(a.expr), a.output, out)


def cmd_compile_indicator(a, out):
    try:
        bits = parse_assignment(a.bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _wrote(compile_theorem1_indicator(load_span_program(a.file), bits), a.output, out)


def cmd_compile_gh(a, out):
    _wrote(compile_garden_hose_example(a.function, a.x, a.y), a.output, out)


# -- tape ------------------------------------------------------------------------------

def cmd_tape_eval(a, out):
    tree = validate_and_build_tree(load_tape(a.file))
    bit, audit = evaluate_tape(tree, parse_bits(a.x), parse_bits(a.y), a.evaluator, a.p)
    extra = " ".join(f"{k}={v}" for k, v in audit.items())
    print(f"owner={bit} {extra}".rstrip(), file=out)


def cmd_tape_cost(a, out):
    tree = validate_and_build_tree(load_tape(a.file))
    if (a.x is None) != (a.y is None):
        raise UsageError("give both --x and --y or neither")
    x = parse_bits(a.x) if a.x is not None else None
    y = parse_bits(a.y) if a.y is not None else None
    e = entanglement_cost(tree, x, y)
    print(f"E={e} H={size_H(tree)} H~={weighted_size_Htilde(tree)}", file=out)


# -- qsim ---------------------------------------------------------------------------------

def cmd_qsim_run(a, out):
    tree = validate_and_build_tree(load_tape(a.file))
    rep = run_quantum_tape(tree, parse_bits(a.x), parse_bits(a.y), seed=a.seed, max_qudits=a.max_qudits)
    print(fixed_json(rep.to_dict()), file=out)


def cmd_qsim_sweep(a, out):
    tree = validate_and_build_tree(load_tape(a.file))
    t = tree.tape
    for x, y in itertools.product(all_inputs(t.left_bits), all_inputs(t.right_bits)):
        rep = run_quantum_tape(tree, x, y, seed=a.seed, max_qudits=a.max_qudits)
        print(fixed_json(rep.to_dict()), file=out)


# -- bench ---------------------------------------------------------------------------------

def cmd_bench_library(a, out):
    header = ("function", "formula", "span", "msp", "E(thm2)", "E(formula)", "E(gh)")
    rows = [
        (r.name, r.formula_size, r.span_size, r.msp_size, r.e_theorem2, r.e_formula,
         "-" if r.e_garden_hose is None else r.e_garden_hose)
        for r in bench_library()
    ]
    widths = [max(len(str(v)) for v in col) for col in zip(header, *rows)]
    for row in (header, *rows):
        print("  ".join(str(v).rjust(w) for v, w in zip(row, widths)).rstrip(), file=out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coderoute", description="Code-routing protocols for f-routing.")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    sp = groups.add_parser("sp", help="span programs").add_subparsers(dest="cmd", required=True)
    c = sp.add_parser("eval", help="evaluate on one input")
    c.add_argument("file")
    c.add_argument("--input", required=True)
    c.set_defaults(func=cmd_sp_eval)
    c = sp.add_parser("table", help="full truth table")
    c.add_argument("file")
    c.set_defaults(func=cmd_sp_table)
    c = sp.add_parser("decompose", help="write the monotone program and describe g")
    c.add_argument("file")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_sp_decompose)

    co = groups.add_parser("compile", help="emit protocol tapes").add_subparsers(dest="cmd", required=True)
    c = co.add_parser("theorem2", help="general protocol from any span program")
    c.add_argument("file")
    c.add_argument("--left", type=int, required=True)
    c.add_argument("--right", type=int, required=True)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_compile_theorem2)
    c = co.add_parser("formula", help="concatenated threshold codes")
    c.add_argument("expr")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_compile_formula)
    c = co.add_parser("indicator", help="single Smith-code encoding")
    c.add_argument("file")
    c.add_argument("--bits", required=True, help="comma-separated x<i>, y<i>, !x<i>, 0, 1")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_compile_indicator)
    c = co.add_parser("gh", help="garden-hose AND/OR example for one input")
    c.add_argument("function", choices=["AND", "OR"], type=str.upper)
    c.add_argument("--x", type=int, choices=[0, 1], required=True)
    c.add_argument("--y", type=int, choices=[0, 1], required=True)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_compile_gh)

    tp = groups.add_parser("tape", help="evaluate and cost tapes").add_subparsers(dest="cmd", required=True)
    c = tp.add_parser("eval", help="side that ends up holding Q")
    c.add_argument("file")
    c.add_argument("--x", required=True)
    c.add_argument("--y", required=True)
    c.add_argument("--evaluator", choices=EVALUATORS, default="getowner")
    c.add_argument("--p", type=int, default=3)
    c.set_defaults(func=cmd_tape_eval)
    c = tp.add_parser("cost", help="E, H and weighted H")
    c.add_argument("file")
    c.add_argument("--x")
    c.add_argument("--y")
    c.set_defaults(func=cmd_tape_cost)

    qs = groups.add_parser("qsim", help="quantum verification").add_subparsers(dest="cmd", required=True)
    for name, func in (("run", cmd_qsim_run), ("sweep", cmd_qsim_sweep)):
        c = qs.add_parser(name)
        c.add_argument("file")
        if name == "run":
            c.add_argument("--x", required=True)
            c.add_argument("--y", required=True)
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--max-qudits", type=int, default=12)
        c.set_defaults(func=func)

    bn = groups.add_parser("bench", help="benchmarks").add_subparsers(dest="cmd", required=True)
    bn.add_parser("library", help="costs for the built-in programs").set_defaults(func=cmd_bench_library)
    return p


VALIDATION_ERRORS = (
    SpanProgramError, TapeError, FieldError, fm.FormulaSyntaxError, IndicatorError,
    json.JSONDecodeError, OSError,
)
CAPABILITY_ERRORS = (CapabilityError, FanInError, ArityError, QsimError)


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VALIDATION_ERRORS as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CAPABILITY_ERRORS as exc:
        print(f"not supported: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    return 0


if __name__ == "__main__":
    sys.exit(main())
