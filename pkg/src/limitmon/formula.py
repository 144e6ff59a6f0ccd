"""Frequency formulas and their four-counter limit monitor.

A frequency formula is a Boolean combination of atoms ``sum_s a_s*f(s) > a``
with integer coefficients. Over a finite word, ``f(s)`` is the count of ``s``
divided by the length, so an atom holds iff ``sum_s a_s*count_s > a*len``.

Concrete syntax::

    formula := or
    or      := and { "|" and }
    and     := unary { "&" unary }
    unary   := "!" unary | "(" formula ")" | atom
    atom    := linexpr (">" | "<") linexpr
    linexpr := ["-"] term { ("+" | "-") term }
    term    := INT | INT "*" "f(" SYMBOL ")" | "f(" SYMBOL ")"

Only strict comparisons are accepted: the monitor's convergence argument
needs the inequality to hold with a margin in the limit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .alphabet import Alphabet, Word, counts
from .counter_machine import GT, LE, Comparison, CounterMonitor, Edge, OutputRule, const, reg
from .errors import FormulaSyntaxError, ValidationError

COEFF_LIMIT = 2**63


@dataclass(frozen=True)
class Atom:
    """``sum(c * f(s) for s, c in coefficients) > rhs``."""

    coefficients: tuple = ()  # ((symbol, int), ...), zero entries dropped, sorted
    rhs: int = 0

    def __post_init__(self):
        items = dict(self.coefficients)
        for s, c in items.items():
            if abs(c) >= COEFF_LIMIT:
                raise ValidationError(f"coefficient of f({s}) exceeds 64-bit range")
        if abs(self.rhs) >= COEFF_LIMIT:
            raise ValidationError("constant exceeds 64-bit range")
        object.__setattr__(
            self, "coefficients", tuple(sorted((s, int(c)) for s, c in items.items() if c))
        )

    @classmethod
    def of(cls, rhs: int = 0, **coefficients: int) -> "Atom":
        return cls(tuple(coefficients.items()), rhs)

    def coefficient(self, symbol: str) -> int:
        return dict(self.coefficients).get(symbol, 0)

    def symbols(self):
        return [s for s, _ in self.coefficients]


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValidationError("And needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValidationError("Or needs at least two children")


def atoms(phi) -> list[Atom]:
    """Atom occurrences in left-to-right order, duplicates kept."""
    out = []

    def walk(node):
        if isinstance(node, Atom):
            out.append(node)
        elif isinstance(node, Not):
            walk(node.child)
        else:
            for c in node.children:
                walk(c)

    walk(phi)
    return out


def evaluate_truths(phi, truths: Sequence[bool]) -> bool:
    """Evaluate ``phi`` given the truth value of each atom occurrence."""
    it = iter(truths)

    def ev(node):
        if isinstance(node, Atom):
            return next(it)
        if isinstance(node, Not):
            return not ev(node.child)
        # evaluate every child so the iterator stays aligned
        values = [ev(c) for c in node.children]
        return all(values) if isinstance(node, And) else any(values)

    return ev(phi)


def eval_atom_counts(atom: Atom, letter_counts: Mapping[str, int], length: int) -> bool:
    """Exact integer form of the atom on a word with the given counts."""
    if length < 1:
        raise ValidationError("frequencies are undefined on the empty word")
    lhs = sum(c * letter_counts.get(s, 0) for s, c in atom.coefficients)
    return lhs > atom.rhs * length


def eval_formula(phi, w: Word) -> bool:
    """Reference value of ``phi`` on the whole word ``w``."""
    if len(w) == 0:
        raise ValidationError("frequency formulas are undefined on the empty word")
    c = dict(zip(w.alphabet.symbols, counts(w)))
    return evaluate_truths(phi, [eval_atom_counts(a, c, len(w)) for a in atoms(phi)])


def check_symbols(phi, alphabet: Alphabet) -> None:
    for a in atoms(phi):
        for s in a.symbols():
            if s not in alphabet:
                raise ValidationError(f"formula mentions unknown symbol {s!r}")


# printing

def _format_linexpr(atom: Atom) -> str:
    parts = []
    for s, c in atom.coefficients:
        mag = abs(c)
        term = f"f({s})" if mag == 1 else f"{mag}*f({s})"
        if not parts:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(f"{'+' if c > 0 else '-'} {term}")
    return " ".join(parts) if parts else "0"


def to_text(phi) -> str:
    """Parenthesized canonical form; parses back to an equal tree."""
    if isinstance(phi, Atom):
        return f"{_format_linexpr(phi)} > {phi.rhs}"
    if isinstance(phi, Not):
        return f"!({to_text(phi.child)})"
    op = " & " if isinstance(phi, And) else " | "
    return op.join(f"({to_text(c)})" for c in phi.children)


# parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<func>f\(\s*(?P<sym>[^\s()]+)\s*\))
  | (?P<int>\d+)
  | (?P<nonstrict>>=|<=|==|!=|=)
  | (?P<op>[()!&|<>+\-*])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup if m.lastgroup != "sym" else "func"
        if kind == "ws":
            for k, ch in enumerate(m.group(), pos):
                if ch == "\n":
                    line, line_start = line + 1, k + 1
        elif kind == "func":
            toks.append(_Tok("func", m.group("sym"), line, col))
        elif kind == "nonstrict":
            raise FormulaSyntaxError(
                f"comparator {m.group()!r} is not allowed; only strict '>' and '<' "
                "inequalities stabilize over frequencies",
                line,
                col,
            )
        else:
            toks.append(_Tok(kind if kind == "int" else m.group(), m.group(), line, col))
        pos = m.end()
    end_col = pos - line_start + 1
    toks.append(_Tok("eof", "", line, end_col))
    return toks


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet | None):
        self.toks = _tokenize(text)
        self.pos = 0
        self.alphabet = alphabet

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {kind!r}", tok)
        return self.take()

    def fail(self, message, tok):
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise FormulaSyntaxError(f"{message}, found {found}", tok.line, tok.col)

    def parse(self):
        node = self.disjunction()
        if self.peek().kind != "eof":
            self.fail("expected '&', '|' or end of input", self.peek())
        return node

    def disjunction(self):
        items = [self.conjunction()]
        while self.peek().kind == "|":
            self.take()
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self):
        items = [self.unary()]
        while self.peek().kind == "&":
            self.take()
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self):
        tok = self.peek()
        if tok.kind == "!":
            self.take()
            return Not(self.unary())
        if tok.kind == "(":
            self.take()
            node = self.disjunction()
            self.expect(")")
            return node
        return self.atom()

    def atom(self):
        left = self.linexpr()
        tok = self.peek()
        if tok.kind not in (">", "<"):
            self.fail("expected comparator '>' or '<'", tok)
        self.take()
        right = self.linexpr()
        lc, lk = left
        rc, rk = right
        keys = set(lc) | set(rc)
        if tok.kind == ">":
            coeffs = {s: lc.get(s, 0) - rc.get(s, 0) for s in keys}
            rhs = rk - lk
        else:
            coeffs = {s: rc.get(s, 0) - lc.get(s, 0) for s in keys}
            rhs = lk - rk
        try:
            return Atom(tuple(coeffs.items()), rhs)
        except ValidationError as exc:
            raise FormulaSyntaxError(str(exc), tok.line, tok.col) from None

    def linexpr(self):
        coeffs: dict[str, int] = {}
        const = 0
        sign = 1
        if self.peek().kind == "-":
            self.take()
            sign = -1
        while True:
            sym, value = self.term()
            if sym is None:
                const += sign * value
            else:
                coeffs[sym] = coeffs.get(sym, 0) + sign * value
            if self.peek().kind in ("+", "-"):
                sign = 1 if self.take().kind == "+" else -1
            else:
                return coeffs, const

    def term(self):
        tok = self.peek()
        if tok.kind == "func":
            self.take()
            return self.symbol(tok), 1
        if tok.kind == "int":
            self.take()
            value = int(tok.text)
            if value >= COEFF_LIMIT:
                raise FormulaSyntaxError(f"integer {tok.text} exceeds 64-bit range", tok.line, tok.col)
            if self.peek().kind == "*":
                self.take()
                ftok = self.expect("func")
                return self.symbol(ftok), value
            return None, value
        self.fail("expected an integer or f(symbol)", tok)

    def symbol(self, tok):
        if self.alphabet is not None and tok.text not in self.alphabet:
            raise FormulaSyntaxError(f"unknown symbol {tok.text!r}", tok.line, tok.col)
        return tok.text


def parse_formula(text: str, alphabet: Alphabet | None = None):
    """Parse formula text; with an alphabet, every f(symbol) must belong to it."""
    return _Parser(text, alphabet).parse()


def formula_symbols(text: str) -> list[str]:
    """Symbols mentioned in formula text, in order of first appearance."""
    return list(dict.fromkeys(t.text for t in _tokenize(text) if t.kind == "func"))


# example formulas

def _require_two(alphabet: Alphabet):
    if len(alphabet) < 2:
        raise ValidationError("this formula needs an alphabet with at least two symbols")


def _conj(items):
    return items[0] if len(items) == 1 else And(tuple(items))


def mode_existence_formula(alphabet: Alphabet):
    """Some symbol is strictly more frequent than every other symbol."""
    _require_two(alphabet)
    syms = alphabet.symbols
    return Or(tuple(
        _conj([Atom(((a, 1), (s, -1)), 0) for s in syms if s != a]) for a in syms
    ))


def disproportion_formula(alphabet: Alphabet, factor: int = 100):
    """No symbol is ``factor`` times as frequent as another: f(a) < factor*f(b)."""
    _require_two(alphabet)
    syms = alphabet.symbols
    return _conj([Atom(((b, factor), (a, -1)), 0) for a in syms for b in syms if a != b])


# monitor

class FormulaMonitor:
    """Limit monitor for a frequency formula with four counters.

    The stream is cut into infixes; level ``n`` consists of ``k`` consecutive
    infixes of length ``n``, one per atom occurrence. Over the infix of atom
    ``j`` each letter ``s`` adds ``a_s - a`` to ``c_pos`` (if positive) or its
    magnitude to ``c_neg``; at the end of the infix the atom's truth is
    ``c_pos > c_neg``. When a level completes, the formula is evaluated on the
    cached truths and becomes the output. The output is False before the first
    level completes.

    ``atom_index``, ``truth_cache`` and ``current_output`` are bounded by the
    formula and form the finite-state part.
    """

    COUNTERS = ("c_pos", "c_neg", "n", "i")
    FINITE_STATE = ("atom_index", "truth_cache", "current_output")
    __slots__ = COUNTERS + FINITE_STATE + ("formula", "alphabet", "_inc", "_k")

    def __init__(self, phi, alphabet: Alphabet):
        check_symbols(phi, alphabet)
        occ = atoms(phi)
        if not occ:
            raise ValidationError("formula has no atoms")
        self.formula = phi
        self.alphabet = alphabet
        self._inc = tuple(
            tuple(a.coefficient(s) - a.rhs for s in alphabet.symbols) for a in occ
        )
        self._k = len(occ)
        self.c_pos = self.c_neg = 0
        self.n = self.i = 1
        self.atom_index = 0
        self.truth_cache = [False] * self._k
        self.current_output = False

    def next(self, s: int) -> bool:
        d = self._inc[self.atom_index][s]
        if d > 0:
            self.c_pos += d
        else:
            self.c_neg -= d
        if self.i == self.n:
            self.truth_cache[self.atom_index] = self.c_pos > self.c_neg
            self.c_pos = self.c_neg = 0
            self.i = 1
            if self.atom_index == self._k - 1:
                self.current_output = evaluate_truths(self.formula, self.truth_cache)
                self.atom_index = 0
                self.n += 1
            else:
                self.atom_index += 1
        else:
            self.i += 1
        return self.current_output

    @property
    def output(self) -> bool:
        return self.current_output


def formula_monitor_init(phi, alphabet: Alphabet):
    m = FormulaMonitor(phi, alphabet)
    return m, m.current_output


def formula_monitor_next(m: FormulaMonitor, symbol: str):
    return m, m.next(m.alphabet.index(symbol))


def run_formula_monitor(phi, w: Word) -> list[bool]:
    m = FormulaMonitor(phi, w.alphabet)
    step = m.next
    return [step(s) for s in w.letters]


def compile_formula_machine(phi, alphabet: Alphabet, max_atoms: int = 10) -> CounterMonitor:
    """The formula monitor as a generic counter monitor with four registers.

    Registers ``c_pos``, ``c_neg``, ``n`` and ``i`` start at zero, so ``n``
    holds the infix length minus one and ``i`` the letters already read in
    the current infix. Locations encode (atom index, cached truths, output)
    and only reachable ones are built, which is exponential in the number of
    atoms; ``max_atoms`` guards against that.
    """
    check_symbols(phi, alphabet)
    occ = atoms(phi)
    k = len(occ)
    if not 1 <= k <= max_atoms:
        raise ValidationError(f"formula has {k} atoms; compilation supports 1..{max_atoms}")

    def name(loc):
        j, cache, out = loc
        bits = "".join("1" if b else "0" for b in cache)
        return f"j={j};cache={bits};out={int(out)}"

    start = (0, (False,) * k, False)
    seen = {start}
    order = [start]
    edges = []
    infix_open = (Comparison(reg("n"), GT, reg("i")),)
    infix_done = Comparison(reg("n"), LE, reg("i"))
    while order:
        loc = order.pop()
        j, cache, out = loc
        atom = occ[j]
        for s in alphabet.symbols:
            d = atom.coefficient(s) - atom.rhs
            dpos, dneg = (d, 0) if d > 0 else (0, -d)
            edges.append(Edge(
                name(loc), s, infix_open,
                {"c_pos": reg("c_pos", dpos), "c_neg": reg("c_neg", dneg), "i": reg("i", 1)},
                name(loc),
            ))
            for truth in (True, False):
                new_cache = cache[:j] + (truth,) + cache[j + 1 :]
                if j == k - 1:
                    nxt = (0, new_cache, evaluate_truths(phi, new_cache))
                    n_term = reg("n", 1)
                else:
                    nxt = (j + 1, new_cache, out)
                    n_term = reg("n")
                test = Comparison(reg("c_pos", dpos), GT if truth else LE, reg("c_neg", dneg))
                edges.append(Edge(
                    name(loc), s, (infix_done, test),
                    {"c_pos": const(0), "c_neg": const(0), "i": const(0), "n": n_term},
                    name(nxt),
                ))
                if nxt not in seen:
                    seen.add(nxt)
                    order.append(nxt)
    locations = sorted((name(l) for l in seen))
    return CounterMonitor(
        input_alphabet=alphabet,
        output_alphabet=(False, True),
        registers=("c_pos", "c_neg", "n", "i"),
        locations=tuple(locations),
        initial=name(start),
        edges=tuple(edges),
        output={name(l): OutputRule(l[2]) for l in seen},
    )
