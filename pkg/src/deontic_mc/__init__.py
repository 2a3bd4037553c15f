"""Dominance-act-utilitarian obligations: stit models, automata, model checking.

The short tour:

* :mod:`deontic_mc.formula` -- statement syntax (``parse``, ``render``) and
  structural transformations.
* :mod:`deontic_mc.tree_model` -- explicit finite stit models, the complete
  satisfaction relation, dominance-optimal actions.
* :mod:`deontic_mc.automaton` -- weighted stit automata, products, unrolling,
  extremal bottleneck values.
* :mod:`deontic_mc.ctlstar` -- CTL*/LTL model checking over the unweighted
  view of an automaton.
* :mod:`deontic_mc.mc` -- deciding an ought statement at an automaton's root.
* :mod:`deontic_mc.rss` -- executable right-of-way / safe-driving rules and
  the worked fixtures.
"""

from .errors import (
    AutomatonError,
    DeonticError,
    GrammarError,
    ModelError,
    ParseError,
    ResourceLimitError,
)
from .formula import parse, parse_formula, parse_obligation, parse_ought, render
from .tree_model import ExplicitStitModel, load_model, save_model
from .automaton import StitAutomaton, load_automaton, save_automaton, unroll
from .mc import check_conditional_ought, check_ought, check_ought_statement

__all__ = [
    "AutomatonError",
    "DeonticError",
    "ExplicitStitModel",
    "GrammarError",
    "ModelError",
    "ParseError",
    "ResourceLimitError",
    "StitAutomaton",
    "check_conditional_ought",
    "check_ought",
    "check_ought_statement",
    "load_automaton",
    "load_model",
    "parse",
    "parse_formula",
    "parse_obligation",
    "parse_ought",
    "render",
    "save_automaton",
    "save_model",
    "unroll",
]

__version__ = "0.1.0"
