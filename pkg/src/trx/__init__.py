"""trx: a PEG engine with certified termination and step-exact semantics.

Grammars are statically checked for well-formedness (no reachable left
recursion or nullable repetition); passing the check issues a
Certificate that gates the total parse entry point.  The interpreter
follows the step-counted operational semantics exactly, in plain or
packrat mode, and a deliberately naive fueled oracle provides an
independent reference for differential testing.  Grammars can be built
through the embedded API (with arbitrary semantic actions) or loaded
from the bootstrapped .peg textual format (tree-shaping actions only).
"""

from .analysis import (Certificate, ExprSet, NotWellFormed, Offender, Props,
                       PropertyTable, WfReport, certify, check_well_formed,
                       expression_set, infer_properties, wf_measure)
from .exprs import (ANY, Action, ActionRef, And, AnyChar, CharClass, Choice,
                    Drop, DuplicateRule, EMPTY, Empty, EmptyClass,
                    EmptyLiteral, Expr, Grammar, GrammarError, InvalidRange,
                    Literal, NonTerminal, Not, Optional, Plus, Range, Seq,
                    Star, Terminal, UndefinedNonterminal, UnknownStart,
                    build_grammar, desugar, expr_text, iter_subexprs)
from .interp import (CertificateMismatch, InvariantViolation, MemoTable,
                     ParseOutcome, eval_expr, memo_stats, parse,
                     parse_to_tree)
from .meta import (GrammarSource, PegSyntaxError, builtin_meta_grammar,
                   dump_grammar, load_grammar, load_grammar_source, tree_wrap)
from .oracle import (EXHAUSTED, FuelExhausted, all_inputs,
                     enumerate_small_cases, oracle_eval, oracle_parse,
                     random_grammar, small_grammars)
from .values import (CHAR, Char, Lst, Opt, Str, TreeNode, Tup, UNIT, Unit,
                     User, Value, tree_to_json, tuple_items)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
