"""Limit monitoring of frequency statistics over event streams."""

from .alphabet import BOT, Alphabet, Word, count, infix, median, mode, prefix
from .counter_machine import CounterMonitor, naive_mode_machine, register_count, run, step
from .errors import DeterminismError, FormulaSyntaxError, LimitmonError, ValidationError
from .formula import FormulaMonitor, eval_formula, mode_existence_formula, parse_formula
from .markov import MarkovChain, parse_chain, sample, stationary
from .monitors import MedianMonitor, ModeMonitor, run_monitor, schedule_offset

__version__ = "0.1.0"

__all__ = [
    "BOT", "Alphabet", "Word", "count", "infix", "median", "mode", "prefix",
    "CounterMonitor", "naive_mode_machine", "register_count", "run", "step",
    "DeterminismError", "FormulaSyntaxError", "LimitmonError", "ValidationError",
    "FormulaMonitor", "eval_formula", "mode_existence_formula", "parse_formula",
    "MarkovChain", "parse_chain", "sample", "stationary",
    "MedianMonitor", "ModeMonitor", "run_monitor", "schedule_offset",
]
