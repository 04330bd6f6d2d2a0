r"""The textual .peg grammar format, bootstrapped through the engine.

The loader is the interpreter itself: a built-in grammar for the .peg
syntax parses grammar text into a tree, and the tree is lowered to
surface expressions and rebuilt into a Grammar.  The bundled peg.peg
file is the same grammar written in its own notation; loading it must
reproduce the built-in grammar exactly.

Grammars loaded from text carry only the built-in tree shapers: every
nonterminal produces a TreeNode, terminals/classes/literals contribute
leaf spans (adjacent leaves coalesce), and ``~`` drops a subtree.  The
value-shaping actions that desugaring installs (tuple2str, cons,
some/none) are removed by the tree transform since the tree collector
subsumes them; arbitrary semantic actions are available only through
the embedded API.

Format summary (see the bundled peg.peg for the authoritative version):
rules ``name <- expr ;``; choice ``/``; sequence by juxtaposition;
postfix ``*`` ``+`` ``?`` bind tightest, then prefix ``!`` ``&`` ``~``,
then sequence, then choice; literals in single or double quotes with
escapes ``\n \t \r \\ \' \" \xHH``; classes ``[a-z0-9_]`` with ``\]``;
``.`` is any char; ``eps`` the empty expression; ``#`` starts a line
comment; the first rule is the start unless ``@start name ;`` appears.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import Certificate, certify
from .exprs import (ANY, Action, ActionRef, And, AnyChar, CharClass, Choice,
                    Drop, EMPTY, Expr, Grammar, Literal, NonTerminal, Not,
                    Optional, Plus, Range, Seq, Star, Terminal, build_grammar,
                    expr_text)
from .interp import parse
from .values import LeafRun, Lst, Opt, TreeNode, Tup


class PegSyntaxError(Exception):
    """Grammar text rejected by the meta-grammar, with the farthest
    failure position as line:column."""

    def __init__(self, data: bytes, pos: int, path: str | None = None):
        self.pos = max(pos, 0)
        self.path = path
        self.line, self.col = line_col(data, self.pos)
        snippet = _context_line(data, self.pos)
        where = "%s:%d:%d" % (path or "<grammar>", self.line, self.col)
        super().__init__("%s: syntax error\n%s" % (where, snippet))


def line_col(data: bytes, pos: int) -> tuple[int, int]:
    """1-based line and byte column of a byte offset."""
    pos = min(pos, len(data))
    line = data.count(b"\n", 0, pos) + 1
    nl = data.rfind(b"\n", 0, pos)
    return line, pos - nl


def _context_line(data: bytes, pos: int) -> str:
    start = data.rfind(b"\n", 0, pos) + 1
    end = data.find(b"\n", pos)
    if end < 0:
        end = len(data)
    text = data[start:end].decode("utf-8", "replace")
    caret = " " * (pos - start) + "^"
    return "  %s\n  %s" % (text, caret)


# ---------------------------------------------------------------------------
# Tree shaping.

def _leaf_fn(v, start, end):
    return TreeNode("", start, end, ())


LEAF = ActionRef("tree.leaf", _leaf_fn, span_aware=True)

_NODE_PREFIX = "tree.node:"


def node_action(rule: str) -> ActionRef:
    """Collect the TreeNode children out of a production's raw value.

    Walks pairs/lists/options in parse order, keeps nodes, expands leaf
    runs, and coalesces adjacent leaves; Unit and other scalars carry no
    tree content.  One iterative pass, since this runs once per
    nonterminal application.
    """
    def fn(v, start, end):
        children = []
        stack = [v]
        while stack:
            x = stack.pop()
            t = type(x)
            if t is Tup or t is Lst:
                items = x.items
                for i in range(len(items) - 1, -1, -1):
                    stack.append(items[i])
            elif t is TreeNode:
                if (x.rule == "" and children
                        and (last := children[-1]).rule == ""
                        and last.end == x.start):
                    children[-1] = TreeNode("", last.start, x.end, ())
                else:
                    children.append(x)
            elif t is LeafRun:
                if x.end > x.start:
                    if (children and (last := children[-1]).rule == ""
                            and last.end == x.start):
                        children[-1] = TreeNode("", last.start, x.end, ())
                    else:
                        children.append(TreeNode("", x.start, x.end, ()))
            elif t is Opt:
                if x.item is not None:
                    stack.append(x.item)
        return TreeNode(rule, start, end, tuple(children))
    return ActionRef(_NODE_PREFIX + rule, fn, span_aware=True)


_STRIP_LABELS = ("tuple2str", "cons", "some", "none")


def _tree_wrap_expr(e: Expr) -> Expr:
    t = type(e)
    if t in (Terminal, Range, AnyChar):
        return Action(e, LEAF)
    if t is Seq:
        return Seq(_tree_wrap_expr(e.left), _tree_wrap_expr(e.right))
    if t is Choice:
        return Choice(_tree_wrap_expr(e.first), _tree_wrap_expr(e.second))
    if t is Star:
        return Star(_tree_wrap_expr(e.inner))
    if t is Not:
        # Lookahead values are discarded; leave the inside untouched.
        return e
    if t is Action:
        label = e.ref.label
        if label in _STRIP_LABELS:
            return _tree_wrap_expr(e.inner)
        if label == "drop" or label == "tree.leaf" \
                or label.startswith(_NODE_PREFIX):
            return e
        raise ValueError("textual grammars carry only built-in tree-shaping "
                         "actions, not %r" % label)
    return e  # Empty, NonTerminal


def tree_wrap(g: Grammar) -> Grammar:
    """Install the built-in tree shapers on every production (idempotent)."""
    productions = {}
    for name in g.nonterminals:
        body = g.productions[name]
        if (type(body) is Action and body.ref.label == _NODE_PREFIX + name):
            productions[name] = body
        else:
            productions[name] = Action(_tree_wrap_expr(body),
                                       node_action(name))
    return Grammar(productions, g.start, tree_shaped=True)


# ---------------------------------------------------------------------------
# The built-in meta-grammar (hand-built mirror of grammars/peg.peg).

def _seq(*parts: Expr) -> Expr:
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Seq(p, out)
    return out


def _ch(*alts: Expr) -> Expr:
    out = alts[-1]
    for a in reversed(alts[:-1]):
        out = Choice(a, out)
    return out


def _nt(name: str) -> Expr:
    return NonTerminal(name)


def _d(e: Expr) -> Expr:
    return Drop(e)


def _lit(s: str) -> Expr:
    return Literal(s)


_IDENT_START = CharClass([("a", "z"), ("A", "Z"), "_"])
_IDENT_CONT = CharClass([("a", "z"), ("A", "Z"), ("0", "9"), "_"])
_HEX = CharClass([("0", "9"), ("a", "f"), ("A", "F")])
_ESC_CODES = CharClass(["n", "t", "r", "'", '"', "[", "]", "\\", "-"])
_WS_CHARS = CharClass([" ", "\t", "\r", "\n"])


def _meta_rules():
    def quoted(q: str) -> Expr:
        return _seq(_d(_lit(q)),
                    Star(_ch(_nt("escape"),
                             _seq(Not(_lit(q)), Not(_lit("\\")), ANY))),
                    _d(_lit(q)), _d(_nt("spacing")))

    return [
        ("grammar", _seq(_d(_nt("spacing")), Plus(_nt("definition")),
                         Not(ANY))),
        ("definition", _ch(_nt("pragma"), _nt("rule"))),
        ("pragma", _seq(_d(_lit("@start")), _d(_nt("spacing")),
                        _nt("identifier"), _d(_lit(";")), _d(_nt("spacing")))),
        ("rule", _seq(_nt("identifier"), _d(_lit("<-")), _d(_nt("spacing")),
                      _nt("expression"), _d(_lit(";")), _d(_nt("spacing")))),
        ("expression", _seq(_nt("sequence"),
                            Star(_seq(_d(_lit("/")), _d(_nt("spacing")),
                                      _nt("sequence"))))),
        ("sequence", Plus(_nt("prefixed"))),
        ("prefixed", _seq(Star(_ch(_nt("notop"), _nt("andop"),
                                   _nt("dropop"))),
                          _nt("suffixed"))),
        ("suffixed", _seq(_nt("primary"),
                          Star(_ch(_nt("starop"), _nt("plusop"),
                                   _nt("questionop"))))),
        ("primary", _ch(_nt("epsilon"),
                        _seq(_nt("identifier"), Not(_lit("<-"))),
                        _seq(_d(_lit("(")), _d(_nt("spacing")),
                             _nt("expression"),
                             _d(_lit(")")), _d(_nt("spacing"))),
                        _nt("literal"), _nt("charclass"), _nt("anychar"))),
        ("notop", _seq(_d(_lit("!")), _d(_nt("spacing")))),
        ("andop", _seq(_d(_lit("&")), _d(_nt("spacing")))),
        ("dropop", _seq(_d(_lit("~")), _d(_nt("spacing")))),
        ("starop", _seq(_d(_lit("*")), _d(_nt("spacing")))),
        ("plusop", _seq(_d(_lit("+")), _d(_nt("spacing")))),
        ("questionop", _seq(_d(_lit("?")), _d(_nt("spacing")))),
        ("epsilon", _seq(_d(_lit("eps")), Not(_IDENT_CONT),
                         _d(_nt("spacing")))),
        ("anychar", _seq(_d(_lit(".")), _d(_nt("spacing")))),
        ("identifier", _seq(_IDENT_START, Star(_IDENT_CONT),
                            _d(_nt("spacing")))),
        ("literal", _ch(quoted("'"), quoted('"'))),
        ("charclass", _seq(_d(_lit("[")),
                           Plus(_seq(Not(_lit("]")), _nt("classitem"))),
                           _d(_lit("]")), _d(_nt("spacing")))),
        ("classitem", _ch(_seq(_nt("classchar"), _d(_lit("-")),
                               _nt("classchar")),
                          _nt("classchar"))),
        ("classchar", _ch(_nt("escape"),
                          _seq(Not(_lit("]")), Not(_lit("\\")), ANY))),
        ("escape", _seq(_lit("\\"), _ch(_seq(_lit("x"), _HEX, _HEX),
                                        _ESC_CODES))),
        ("spacing", Star(_ch(_WS_CHARS, _nt("comment")))),
        ("comment", _seq(_lit("#"), Star(_seq(Not(_lit("\n")), ANY)))),
    ]


_builtin: tuple[Grammar, Certificate] | None = None


def builtin_meta_grammar() -> tuple[Grammar, Certificate]:
    """The hand-built .peg meta-grammar, tree-shaped and certified."""
    global _builtin
    if _builtin is None:
        g = tree_wrap(build_grammar(_meta_rules(), "grammar"))
        _builtin = (g, certify(g))
    return _builtin


# ---------------------------------------------------------------------------
# Lowering parse trees of .peg text to surface expressions.

_ESCAPE_DECODE = {
    ord("n"): 0x0A, ord("t"): 0x09, ord("r"): 0x0D,
    ord("'"): 0x27, ord('"'): 0x22, ord("["): 0x5B, ord("]"): 0x5D,
    ord("\\"): 0x5C, ord("-"): 0x2D,
}


def _decode_escape(raw: bytes) -> int:
    if raw[1:2] == b"x":
        return int(raw[2:4], 16)
    return _ESCAPE_DECODE[raw[1]]


def _leaf_bytes(node: TreeNode, data: bytes) -> bytes:
    return b"".join(data[c.start:c.end] for c in node.children if c.is_leaf())


def _ident_text(node: TreeNode, data: bytes) -> str:
    return _leaf_bytes(node, data).decode("ascii")


def _lower_literal(node: TreeNode, data: bytes) -> Expr:
    out = bytearray()
    for child in node.children:
        if child.is_leaf():
            out.extend(data[child.start:child.end])
        else:  # escape
            out.append(_decode_escape(data[child.start:child.end]))
    return Literal(bytes(out))


def _classchar_byte(node: TreeNode, data: bytes) -> int:
    child = node.children[0]
    if child.is_leaf():
        return data[child.start]
    return _decode_escape(data[child.start:child.end])


def _lower_charclass(node: TreeNode, data: bytes) -> Expr:
    items = []
    for item in node.children:  # classitem nodes
        chars = [_classchar_byte(c, data) for c in item.children]
        if len(chars) == 1:
            items.append(chars[0])
        else:
            items.append((chars[0], chars[1]))
    return CharClass(items)


def _lower_primary(node: TreeNode, data: bytes) -> Expr:
    child = node.children[0]
    rule = child.rule
    if rule == "epsilon":
        return EMPTY
    if rule == "identifier":
        return NonTerminal(_ident_text(child, data))
    if rule == "expression":
        return _lower_expression(child, data)
    if rule == "literal":
        return _lower_literal(child, data)
    if rule == "charclass":
        return _lower_charclass(child, data)
    if rule == "anychar":
        return ANY
    raise AssertionError("unexpected primary %r" % rule)


_POSTFIX = {"starop": Star, "plusop": Plus, "questionop": Optional}
_PREFIX = {"notop": Not, "andop": And, "dropop": Drop}


def _lower_suffixed(node: TreeNode, data: bytes) -> Expr:
    e = _lower_primary(node.children[0], data)
    for op in node.children[1:]:
        e = _POSTFIX[op.rule](e)
    return e


def _lower_prefixed(node: TreeNode, data: bytes) -> Expr:
    e = _lower_suffixed(node.children[-1], data)
    for op in reversed(node.children[:-1]):
        e = _PREFIX[op.rule](e)
    return e


def _lower_sequence(node: TreeNode, data: bytes) -> Expr:
    parts = [_lower_prefixed(c, data) for c in node.children]
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Seq(p, out)
    return out


def _lower_expression(node: TreeNode, data: bytes) -> Expr:
    alts = [_lower_sequence(c, data) for c in node.children]
    out = alts[-1]
    for a in reversed(alts[:-1]):
        out = Choice(a, out)
    return out


@dataclass
class GrammarSource:
    """A grammar resolved from text, with source spans for diagnostics."""

    text: bytes
    path: str | None
    grammar: Grammar
    rule_positions: dict  # name -> (line, col) of the defining rule


def load_grammar_source(text, path: str | None = None) -> GrammarSource:
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    meta, cert = builtin_meta_grammar()
    out = parse(meta, cert, data)
    if not out.ok:
        raise PegSyntaxError(data, out.farthest, path)
    rules = []
    positions = {}
    start = None
    for definition in out.value.children:
        node = definition.children[0]
        if node.rule == "pragma":
            start = _ident_text(node.children[0], data)
        else:
            name = _ident_text(node.children[0], data)
            rules.append((name, _lower_expression(node.children[1], data)))
            positions.setdefault(name, line_col(data, node.start))
    if not rules:
        raise PegSyntaxError(data, 0, path)
    grammar = tree_wrap(build_grammar(rules, start or rules[0][0]))
    return GrammarSource(data, path, grammar, positions)


def load_grammar(text) -> Grammar:
    """Parse .peg text into a tree-shaped Grammar.

    Raises PegSyntaxError for malformed text, then any grammar
    construction error (duplicate rules, undefined references, unknown
    start, bad ranges, empty literals).
    """
    return load_grammar_source(text).grammar


def dump_grammar(g: Grammar) -> str:
    """Canonical .peg text for a grammar; reloading yields the same
    structure (modulo the canonical tree shaping that loading applies)."""
    lines = []
    if g.nonterminals and g.start != g.nonterminals[0]:
        lines.append("@start %s ;" % g.start)
    for name in g.nonterminals:
        body = g.productions[name]
        if (type(body) is Action and body.ref.label == _NODE_PREFIX + name):
            body = body.inner
        lines.append("%s <- %s ;" % (name, expr_text(body)))
    return "\n".join(lines) + "\n"
