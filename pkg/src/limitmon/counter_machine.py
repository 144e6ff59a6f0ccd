"""Deterministic counter monitors over the signature (0, +1, <=).

A machine has finitely many control locations and natural-valued registers.
Edges are guarded by conjunctions of comparisons between terms ``r + k`` or
``0 + k`` and update registers simultaneously from the old valuation. The
output after each event is chosen by a per-location rule: an ordered list of
guarded cases with a default.

Determinism (exactly one enabled edge per location, event and valuation) is
checked while running, on every step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional

from .alphabet import BOT, BOT_TEXT, Alphabet, Word
from .errors import DeterminismError, ValidationError

LE = "<="
GT = ">"


@dataclass(frozen=True)
class Term:
    """``register + add``, or the constant ``add`` when register is None."""

    register: Optional[str] = None
    add: int = 0

    def __post_init__(self):
        if self.add < 0:
            raise ValidationError(f"term increment must be natural, got {self.add}")

    def value(self, valuation: Mapping[str, int]) -> int:
        base = 0 if self.register is None else valuation[self.register]
        return base + self.add

    def __str__(self):
        if self.register is None:
            return str(self.add)
        return self.register if self.add == 0 else f"{self.register}+{self.add}"


def reg(name: str, add: int = 0) -> Term:
    return Term(name, add)


def const(k: int) -> Term:
    return Term(None, k)


@dataclass(frozen=True)
class Comparison:
    lhs: Term
    op: str
    rhs: Term

    def __post_init__(self):
        if self.op not in (LE, GT):
            raise ValidationError(f"unknown comparison {self.op!r}")

    def holds(self, valuation: Mapping[str, int]) -> bool:
        le = self.lhs.value(valuation) <= self.rhs.value(valuation)
        return le if self.op == LE else not le


Guard = tuple  # tuple[Comparison, ...]; empty means true


def guard_holds(guard: Iterable[Comparison], valuation: Mapping[str, int]) -> bool:
    return all(c.holds(valuation) for c in guard)


@dataclass(frozen=True)
class Edge:
    source: str
    event: str
    guard: tuple = ()
    update: Mapping[str, Term] = field(default_factory=dict)
    target: str = ""


@dataclass(frozen=True)
class OutputRule:
    default: Any
    cases: tuple = ()  # ((guard, value), ...), first match wins

    def evaluate(self, valuation: Mapping[str, int]):
        for guard, value in self.cases:
            if guard_holds(guard, valuation):
                return value
        return self.default


@dataclass(frozen=True)
class Configuration:
    location: str
    valuation: Mapping[str, int]

    def __eq__(self, other):
        return (
            isinstance(other, Configuration)
            and self.location == other.location
            and dict(self.valuation) == dict(other.valuation)
        )

    def __hash__(self):
        return hash((self.location, tuple(sorted(self.valuation.items()))))


@dataclass(frozen=True)
class CounterMonitor:
    input_alphabet: Alphabet
    output_alphabet: tuple
    registers: tuple
    locations: tuple
    initial: str
    edges: tuple
    output: Mapping[str, OutputRule]

    def __post_init__(self):
        for name in ("output_alphabet", "registers", "locations", "edges"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(set(self.registers)) != len(self.registers):
            raise ValidationError("duplicate register names")
        if len(set(self.locations)) != len(self.locations):
            raise ValidationError("duplicate location names")
        locs = set(self.locations)
        regs = set(self.registers)
        if self.initial not in locs:
            raise ValidationError(f"initial location {self.initial!r} is not declared")

        def check_term(t):
            if t.register is not None and t.register not in regs:
                raise ValidationError(f"unknown register {t.register!r}")

        def check_guard(g):
            for c in g:
                check_term(c.lhs)
                check_term(c.rhs)

        by_key = {}
        for e in self.edges:
            if e.source not in locs or e.target not in locs:
                raise ValidationError(f"edge {e.source!r} -> {e.target!r} uses an unknown location")
            if e.event not in self.input_alphabet:
                raise ValidationError(f"edge on unknown event {e.event!r}")
            check_guard(e.guard)
            for r, t in e.update.items():
                if r not in regs:
                    raise ValidationError(f"update of unknown register {r!r}")
                check_term(t)
            by_key.setdefault((e.source, e.event), []).append(e)
        outputs = set(self.output_alphabet)
        for loc in self.locations:
            if loc not in self.output:
                raise ValidationError(f"location {loc!r} has no output rule")
        for loc, rule in self.output.items():
            if loc not in locs:
                raise ValidationError(f"output rule for unknown location {loc!r}")
            for g, value in rule.cases:
                check_guard(g)
                if value not in outputs:
                    raise ValidationError(f"output value {value!r} not in output alphabet")
            if rule.default not in outputs:
                raise ValidationError(f"output value {rule.default!r} not in output alphabet")
        object.__setattr__(self, "_by_key", by_key)

    def initial_configuration(self) -> Configuration:
        return Configuration(self.initial, {r: 0 for r in self.registers})

    def output_of(self, c: Configuration):
        return self.output[c.location].evaluate(c.valuation)


def step(m: CounterMonitor, c: Configuration, event: str) -> Configuration:
    """Take the unique enabled edge from ``c`` on ``event``."""
    if event not in m.input_alphabet:
        raise ValidationError(f"unknown event {event!r}")
    v = c.valuation
    enabled = [e for e in m._by_key.get((c.location, event), ()) if guard_holds(e.guard, v)]
    if len(enabled) != 1:
        raise DeterminismError(c.location, event, v, len(enabled))
    e = enabled[0]
    new = dict(v)
    for r, t in e.update.items():
        new[r] = t.value(v)
    return Configuration(e.target, new)


def run(m: CounterMonitor, w: Word | Iterable[str]):
    """Run ``m`` on ``w``; return (output after each event, final configuration)."""
    symbols = w.symbols() if isinstance(w, Word) else list(w)
    c = m.initial_configuration()
    outputs = []
    for event in symbols:
        c = step(m, c, event)
        outputs.append(m.output_of(c))
    return outputs, c


def evaluate(m: CounterMonitor, w) -> Any:
    """The statistic computed by ``m``: output of the final configuration."""
    outputs, final = run(m, w)
    return m.output_of(final)


def register_count(m) -> int:
    """Number of unbounded counters used by a machine or a streaming monitor."""
    if isinstance(m, CounterMonitor):
        return len(m.registers)
    return len(type(m).COUNTERS)


def naive_mode_machine(alphabet: Alphabet) -> CounterMonitor:
    """Real-time mode monitor with one counter per symbol."""
    names = [f"cnt[{s}]" for s in alphabet.symbols]
    edges = [
        Edge("q", s, (), {r: reg(r, 1)}, "q") for s, r in zip(alphabet.symbols, names)
    ]
    cases = []
    for a, ra in zip(alphabet.symbols, names):
        guard = tuple(Comparison(reg(rb, 1), LE, reg(ra)) for rb in names if rb != ra)
        cases.append((guard, a))
    if len(alphabet) == 1:
        # a lone symbol is the mode only once it has occurred
        cases = [((Comparison(const(1), LE, reg(names[0])),), alphabet.symbols[0])]
    return CounterMonitor(
        input_alphabet=alphabet,
        output_alphabet=tuple(alphabet.symbols) + (BOT,),
        registers=tuple(names),
        locations=("q",),
        initial="q",
        edges=tuple(edges),
        output={"q": OutputRule(BOT, tuple(cases))},
    )


# JSON (de)serialization

def _term_json(t: Term):
    return {"reg": t.register, "add": t.add}


def _guard_json(g):
    return [{"lhs": _term_json(c.lhs), "op": c.op, "rhs": _term_json(c.rhs)} for c in g]


def _value_json(v):
    return BOT_TEXT if v is BOT else v


def _term_from(d) -> Term:
    return Term(d.get("reg"), int(d.get("add", 0)))


def _guard_from(items) -> tuple:
    return tuple(Comparison(_term_from(c["lhs"]), c["op"], _term_from(c["rhs"])) for c in items)


def _value_from(v):
    return BOT if v == BOT_TEXT else v


def to_json(m: CounterMonitor) -> str:
    doc = {
        "input_alphabet": list(m.input_alphabet.symbols),
        "ordered": m.input_alphabet.ordered,
        "output_alphabet": [_value_json(v) for v in m.output_alphabet],
        "registers": list(m.registers),
        "locations": list(m.locations),
        "initial": m.initial,
        "edges": [
            {
                "from": e.source,
                "event": e.event,
                "guard": _guard_json(e.guard),
                "update": {r: _term_json(t) for r, t in e.update.items()},
                "to": e.target,
            }
            for e in m.edges
        ],
        "output": {
            loc: {
                "default": _value_json(rule.default),
                "cases": [
                    {"guard": _guard_json(g), "value": _value_json(v)} for g, v in rule.cases
                ],
            }
            for loc, rule in m.output.items()
        },
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def from_json(text: str) -> CounterMonitor:
    try:
        doc = json.loads(text)
        return CounterMonitor(
            input_alphabet=Alphabet(tuple(doc["input_alphabet"]), bool(doc.get("ordered", False))),
            output_alphabet=tuple(_value_from(v) for v in doc["output_alphabet"]),
            registers=tuple(doc["registers"]),
            locations=tuple(doc["locations"]),
            initial=doc["initial"],
            edges=tuple(
                Edge(
                    e["from"],
                    e["event"],
                    _guard_from(e.get("guard", [])),
                    {r: _term_from(t) for r, t in e.get("update", {}).items()},
                    e["to"],
                )
                for e in doc["edges"]
            ),
            output={
                loc: OutputRule(
                    _value_from(rule["default"]),
                    tuple((_guard_from(c["guard"]), _value_from(c["value"])) for c in rule.get("cases", [])),
                )
                for loc, rule in doc["output"].items()
            },
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed machine document: {exc}") from exc
