"""Command-line interface.

Exit codes: 0 ok, 1 usage error, 2 validation error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import lab
from .alphabet import Alphabet, Word, render
from .counter_machine import naive_mode_machine, run as run_machine
from .errors import LimitmonError, ValidationError
from .formula import FormulaMonitor, formula_symbols, parse_formula
from .markov import load_chain, sample, stationary, trace_from_states
from .monitors import MONITORS

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_tokens(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.read().split()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read().split()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _load_chain(path: str):
    try:
        return load_chain(path)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def cmd_generate(args) -> None:
    chain = _load_chain(args.chain)
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    trace = sample(chain, args.steps, args.seed)
    out = sys.stdout
    if args.states:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["step", "state", "symbol"])
        for i, q in enumerate(trace.states, 1):
            w.writerow([i, chain.states[q], chain.alphabet.symbols[chain.labels[q]]])
    elif args.steps:
        out.write(" ".join(trace.word.symbols()) + "\n")


def cmd_monitor(args) -> None:
    algo = args.algorithm
    if (algo == "formula") != (args.formula is not None):
        raise UsageError("--formula is required with --algorithm formula and only allowed there")
    if algo == "median" and args.order is None:
        raise UsageError("--algorithm median needs --order")
    if algo == "formula":
        parse_formula(args.formula)  # report syntax errors even on empty input
    tokens = _read_tokens(args.input)
    outputs = _monitor_outputs(args, tokens) if tokens else []
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["pos", "input", "output"])
    for pos, (tok, out) in enumerate(zip(tokens, outputs), 1):
        w.writerow([pos, tok, render(out)])


def _monitor_outputs(args, tokens):
    algo = args.algorithm
    if args.order is not None:
        alphabet = Alphabet(tuple(s for s in args.order.split(",") if s), ordered=True)
    else:
        extra = formula_symbols(args.formula) if algo == "formula" else []
        alphabet = Alphabet.infer(tokens + extra)
    word = Word.from_symbols(alphabet, tokens)

    if algo == "naive-mode":
        outputs, _ = run_machine(naive_mode_machine(alphabet), word)
    elif algo == "formula":
        m = FormulaMonitor(parse_formula(args.formula, alphabet), alphabet)
        outputs = [m.next(s) for s in word.letters]
    else:
        m = MONITORS[algo](alphabet, word.letters[0])
        first = [alphabet.symbols[m.x]]
        outputs = first + [alphabet.symbols[m.next(s)] for s in word.letters[1:]]
    return outputs


def cmd_stationary(args) -> None:
    chain = _load_chain(args.chain)
    st = stationary(chain)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kind", "name", "value"])
    for name, v in st.state_frequency.items():
        w.writerow(["state", name, lab.format_float(v)])
    for name, v in st.return_time.items():
        w.writerow(["return", name, lab.format_float(v)])
    for name, v in st.letter_frequency.items():
        w.writerow(["letter", name, lab.format_float(v)])


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required here")


def _word_or_seed(args):
    """The supplied word, or None after checking a seed was given."""
    if args.word is not None:
        tokens = _read_tokens(args.word)
        return tokens
    _need(args, "chain", "seed")
    return None


def cmd_lab(args) -> None:
    exp = args.experiment
    if exp in ("prefix", "infix"):
        _need(args, "sigma")
        tokens = _word_or_seed(args)
        chain = _load_chain(args.chain) if args.chain else None
        word = None
        if tokens is not None:
            alphabet = chain.alphabet if chain else Alphabet.infer(tokens + [args.sigma])
            word = Word.from_symbols(alphabet, tokens)
        if exp == "prefix":
            if args.steps is None:
                if word is None:
                    raise UsageError("--steps is required here")
                args.steps = len(word)
            series = lab.prefix_convergence(chain, args.sigma, args.steps, args.seed, word)
        else:
            if args.levels is None:
                if word is None:
                    raise UsageError("--levels is required here")
                args.levels = _complete_levels(len(word))
            series = lab.infix_convergence(chain, args.sigma, args.levels, args.seed, word)
    elif exp == "first-visit":
        _need(args, "chain", "state")
        chain = _load_chain(args.chain)
        tokens = _word_or_seed(args)
        trace = trace_from_states(chain, tokens) if tokens is not None else None
        if args.levels is None:
            if trace is None:
                raise UsageError("--levels is required here")
            args.levels = _complete_levels(len(trace))
        series = lab.first_visit_ratio(chain, args.state, args.levels, args.seed, trace)
    elif exp == "lln":
        _need(args, "dist", "levels", "seed")
        series = lab.triangular_lln(lab.FiniteDistribution.parse(args.dist), args.levels, args.seed)
    else:
        _need(args, "pa", "n", "trials", "seed")
        series = lab.mode_rate_series(args.pa, args.n, args.trials, args.seed)
    if args.out == "-":
        lab.emit_csv(series, sys.stdout)
    else:
        lab.emit_csv(series, args.out)


def _complete_levels(length: int) -> int:
    n = 0
    while (n + 1) * (n + 2) // 2 <= length:
        n += 1
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="limitmon", description="Limit monitoring of frequency statistics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a word from a Markov chain")
    g.add_argument("--chain", required=True)
    g.add_argument("--steps", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--states", action="store_true", help="emit CSV step,state,symbol")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("monitor", help="run a monitor over a symbol stream")
    m.add_argument("--algorithm", required=True, choices=["mode", "median", "naive-mode", "formula"])
    m.add_argument("--formula")
    m.add_argument("--order", help="comma-separated symbol order (fixes the alphabet)")
    m.add_argument("--input", default="-")
    m.set_defaults(func=cmd_monitor)

    s = sub.add_parser("stationary", help="exact stationary analysis of a chain")
    s.add_argument("--chain", required=True)
    s.set_defaults(func=cmd_stationary)

    lb = sub.add_parser("lab", help="run an experiment and write CSV")
    lb.add_argument("experiment", choices=["prefix", "infix", "lln", "first-visit", "mode-rate"])
    lb.add_argument("--chain")
    lb.add_argument("--word", help="file with a fixed word (symbols; states for first-visit)")
    lb.add_argument("--sigma")
    lb.add_argument("--state")
    lb.add_argument("--steps", type=int)
    lb.add_argument("--levels", type=int)
    lb.add_argument("--dist", help='finite distribution such as "0:0.5,1:0.5"')
    lb.add_argument("--pa", type=float)
    lb.add_argument("--n", type=int)
    lb.add_argument("--trials", type=int)
    lb.add_argument("--seed", type=int)
    lb.add_argument("--out", default="-")
    lb.set_defaults(func=cmd_lab)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(f"limitmon: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LimitmonError as exc:
        print(f"limitmon: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        print(f"limitmon: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK
