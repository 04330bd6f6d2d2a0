"""Step-counted interpreter for certified grammars.

Every outcome carries the exact step index of its derivation: leaves
cost one step, and each composite rule adds one to the sum of its
sub-derivations (sequences and failing choices run both parts, a
succeeding choice only the first).  Plain and packrat modes return
byte-identical outcomes, steps included; packrat memoizes nonterminal
outcomes keyed by (production, position).

Evaluation runs on an explicit heap-allocated frame stack, so input
nesting depth is bounded by memory, not the Python recursion limit;
deeply nested multi-hundred-kilobyte inputs are fine.  Input is an
immutable byte buffer addressed by position; the "remaining string" of
the semantics is represented as the next position.

The compiler folds hot shapes into superinstructions (byte matchers
with lookahead guards, literal runs, repetition scans) whose step
arithmetic is precomputed; the oracle differential suite pins their
equivalence with the plain rule-by-rule evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import Certificate
from .exprs import (Action, AnyChar, Choice, Empty, Expr, Grammar,
                    NonTerminal, Not, Range, Seq, Star, Terminal, desugar)
from .values import CHAR, LeafRun, Lst, Str, TreeNode, Tup, UNIT, Value


class InvariantViolation(AssertionError):
    """A semantic invariant the certificate should rule out was violated.

    Raised, never returned: seeing this on a certified grammar is a bug
    in the engine (or a forged certificate), not a parse failure.
    """


class CertificateMismatch(Exception):
    def __init__(self):
        super().__init__("certificate was not issued for this grammar")


@dataclass(frozen=True)
class ParseOutcome:
    """Fail or Ok(next position, value), plus the exact step count.

    ``farthest`` is diagnostic metadata (the rightmost input position at
    which any terminal, range or any-char match was attempted, -1 if
    none) and does not participate in equality.
    """

    ok: bool
    pos: int
    value: Value | None
    steps: int
    farthest: int = field(default=-1, compare=False)

    def __repr__(self):
        if self.ok:
            return "Ok(pos=%d, %r, steps=%d)" % (self.pos, self.value, self.steps)
        return "Fail(steps=%d, farthest=%d)" % (self.steps, self.farthest)


class MemoTable:
    """Per-parse memo of nonterminal body outcomes keyed by (production, pos).

    Entries are written once and never contradicted; hits + misses is
    the number of memoized nonterminal evaluations.
    """

    __slots__ = ("entries", "hits", "misses")

    def __init__(self):
        self.entries = {}
        self.hits = 0
        self.misses = 0


def memo_stats(table: MemoTable) -> dict:
    return {"entries": len(table.entries), "hits": table.hits,
            "misses": table.misses}


# Opcodes.  The first ten mirror the core constructors; the rest are
# compiler-derived superinstructions.
(_K_EMPTY, _K_ANY, _K_TERM, _K_RANGE, _K_NT, _K_SEQ, _K_CHOICE, _K_STAR,
 _K_NOT, _K_ACT, _K_MATCH1, _K_PRED, _K_LIT, _K_SCAN) = range(14)

# Value plans for superinstructions.
_V_CHAR, _V_LEAF, _V_CONST, _V_STR1, _V_CHARSPINE = range(5)


class _Program:
    """Grammar flattened into parallel per-node arrays for the VM."""

    __slots__ = ("kind", "a", "b", "act", "extra", "prod_body", "prod_names",
                 "prod_index", "start_prod")

    def __init__(self):
        self.kind = []
        self.a = []
        self.b = []
        self.act = []
        self.extra = []
        self.prod_body = []
        self.prod_names = []
        self.prod_index = {}
        self.start_prod = -1


# --- Superinstruction descriptors --------------------------------------
#
# matcher: (preds, branches, fail_steps, vkind, vconst)
#   consumes exactly one byte on success.  ``branches`` is a tuple of
#   (lo, hi, steps_ok) tried in order; a byte matching none (or end of
#   input) fails in ``fail_steps``.  ``preds`` are zero-width guards
#   evaluated at the same position; the step folding follows the
#   right-nested Seq shape they were compiled from.
# pred: ("nm", matcher) | ("nl", lit) | ("np", pred)   -- all negations
# lit:  (bytes, ok_steps, fail_steps_per_prefix, vkind, vconst)
#   matches a fixed byte string (a right-nested terminal chain).


def _as_matcher(e: Expr):
    t = type(e)
    if t is Terminal:
        return ((), ((e.code, e.code, 1),), 1, _V_CHAR, None)
    if t is Range:
        return ((), ((e.lo, e.hi, 1),), 1, _V_CHAR, None)
    if t is AnyChar:
        return ((), ((0, 255, 1),), 1, _V_CHAR, None)
    if t is Action:
        m = _as_matcher(e.inner)
        if m is None:
            return None
        preds, branches, fail, vkind, vconst = m
        if preds:
            return None
        label = e.ref.label
        if label == "tree.leaf":
            nvkind, nvconst = _V_LEAF, None
        elif label == "drop":
            nvkind, nvconst = _V_CONST, UNIT
        elif label == "tuple2str":
            if vkind != _V_CHAR:
                return None
            if len(branches) == 1 and branches[0][0] == branches[0][1]:
                nvkind, nvconst = _V_CONST, Str(bytes([branches[0][0]]))
            else:
                nvkind, nvconst = _V_STR1, None
        else:
            return None
        return ((), tuple((lo, hi, s + 1) for lo, hi, s in branches),
                fail + 1, nvkind, nvconst)
    if t is Choice:
        a = _as_matcher(e.first)
        b = _as_matcher(e.second)
        if a is None or b is None or a[0] or b[0]:
            return None
        if a[3] != b[3] or a[4] != b[4]:
            return None
        fa = a[2]
        branches = tuple((lo, hi, s + 1) for lo, hi, s in a[1]) \
            + tuple((lo, hi, fa + s + 1) for lo, hi, s in b[1])
        return ((), branches, fa + b[2] + 1, a[3], a[4])
    if t is Seq:
        p = _as_pred(e.left)
        if p is None:
            return None
        rest = _as_matcher(e.right)
        if rest is None:
            return None
        return ((p,) + rest[0], rest[1], rest[2], rest[3], rest[4])
    return None


def _as_pred(e: Expr):
    if type(e) is not Not:
        return None
    inner = e.inner
    m = _as_matcher(inner)
    if m is not None and not m[0]:
        return ("nm", m)
    lit = _as_lit(inner)
    if lit is not None:
        return ("nl", lit)
    p = _as_pred(inner)
    if p is not None:
        return ("np", p)
    return None


def _chain_elements(e: Expr):
    """Terminal elements of a right-nested Seq spine, or None."""
    out = []
    while type(e) is Seq:
        if type(e.left) is not Terminal:
            return None
        out.append(e.left.code)
        e = e.right
    if type(e) is not Terminal:
        return None
    out.append(e.code)
    return out


def _as_lit(e: Expr):
    t = type(e)
    if t is Action:
        inner = _as_lit(e.inner)
        if inner is None:
            return None
        data, ok, fails, vkind, vconst = inner
        label = e.ref.label
        if label == "drop":
            nvkind, nvconst = _V_CONST, UNIT
        elif label == "tuple2str" and vkind == _V_CHARSPINE:
            nvkind, nvconst = _V_CONST, Str(data)
        else:
            return None
        return (data, ok + 1, tuple(f + 1 for f in fails), nvkind, nvconst)
    codes = _chain_elements(e)
    if codes is None or not codes:
        return None
    k = len(codes)
    ok = 2 * k - 1
    fails = tuple((1 if j == k - 1 else 2) + 2 * j for j in range(k))
    return (bytes(codes), ok, fails, _V_CHARSPINE, None)


def _make_value(vkind, vconst, byte, pos):
    if vkind == _V_CHAR:
        return CHAR[byte]
    if vkind == _V_LEAF:
        return TreeNode("", pos, pos + 1, ())
    if vkind == _V_CONST:
        return vconst
    return Str(bytes([byte]))  # _V_STR1


def _spine_value(data: bytes):
    out = CHAR[data[-1]]
    for b in reversed(data[:-1]):
        out = Tup((CHAR[b], out))
    return out


_EMPTY_LST = Lst(())


def _scan_descriptor(matcher, tree_mode: bool):
    """Extend a matcher into a Star-scan descriptor.

    In tree-shaped grammars the per-item values are only ever seen by
    the node collector, so a run of leaf values compacts to a LeafRun
    and node-free values to an empty list; embedded grammars keep the
    exact per-item values.  When the shape is "anything but byte c"
    (a guarded any-char), the scan reduces to bytes.find with
    precomputed step constants.
    """
    preds, branches, fail, vkind, vconst = matcher
    treerun = tree_mode and (vkind == _V_LEAF or
                             (vkind == _V_CONST and vconst is UNIT)
                             or vkind == _V_CHAR or vkind == _V_STR1)
    find = None
    if (treerun and len(preds) == 1 and preds[0][0] == "nm"
            and len(branches) == 1 and branches[0][:2] == (0, 255)):
        pm = preds[0][1]
        p_branches, p_fail = pm[1], pm[2]
        if len(p_branches) == 1 and p_branches[0][0] == p_branches[0][1]:
            c = p_branches[0][0]
            s_pass = p_fail + 1             # guard passes: its matcher missed
            s_block = p_branches[0][2] + 1  # guard blocks: its matcher hit
            s_item = branches[0][2] + s_pass + 1 + 1   # item + star rule
            f_blocked = s_block + 1 + 1                # seq fail + star base
            f_eof = (fail + s_pass + 1) + 1            # any-char fails at eof
            find = (c, s_item, f_blocked, f_eof)
    return (preds, branches, fail, vkind, vconst, treerun, find)


def _compile(g: Grammar | None, roots=()) -> tuple[_Program, list[int]]:
    prog = _Program()
    index = {}
    tree_mode = bool(g is not None and g.tree_shaped)

    if g is not None:
        for i, name in enumerate(g.nonterminals):
            prog.prod_index[name] = i
            prog.prod_names.append(name)
        prog.prod_body = [-1] * len(g.nonterminals)

    def emit(kind, a, b, act, extra=None) -> int:
        prog.kind.append(kind)
        prog.a.append(a)
        prog.b.append(b)
        prog.act.append(act)
        prog.extra.append(extra)
        return len(prog.kind) - 1

    def visit(e: Expr) -> int:
        key = id(e)
        got = index.get(key)
        if got is not None:
            return got
        t = type(e)
        node = None
        if t is Star:
            m = _as_matcher(e.inner)
            if m is not None:
                node = emit(_K_SCAN, -1, -1, None,
                            _scan_descriptor(m, tree_mode))
        elif t is Not:
            p = _as_pred(e)
            if p is not None:
                node = emit(_K_PRED, -1, -1, None, p)
        elif t in (Terminal, Range, AnyChar, Action, Choice, Seq):
            m = _as_matcher(e)
            if m is not None:
                node = emit(_K_MATCH1, -1, -1, None, m)
            else:
                lit = _as_lit(e)
                if lit is not None:
                    node = emit(_K_LIT, -1, -1, None, lit)
        if node is None:
            if t is Seq:
                ia, ib = visit(e.left), visit(e.right)
                node = emit(_K_SEQ, ia, ib, None)
            elif t is Choice:
                ia, ib = visit(e.first), visit(e.second)
                node = emit(_K_CHOICE, ia, ib, None)
            elif t is Star:
                node = emit(_K_STAR, visit(e.inner), -1, None)
            elif t is Not:
                node = emit(_K_NOT, visit(e.inner), -1, None)
            elif t is Action:
                node = emit(_K_ACT, visit(e.inner), -1, e.ref)
            elif t is Empty:
                node = emit(_K_EMPTY, -1, -1, None)
            elif t is AnyChar:
                node = emit(_K_ANY, -1, -1, None)
            elif t is Terminal:
                node = emit(_K_TERM, e.code, -1, None)
            elif t is Range:
                node = emit(_K_RANGE, e.lo, e.hi, None)
            elif t is NonTerminal:
                p = prog.prod_index.get(e.name)
                if p is None:
                    raise KeyError("nonterminal %r is not in the grammar"
                                   % e.name)
                node = emit(_K_NT, p, -1, None)
            else:
                raise TypeError("interpreter needs a core expression; "
                                "desugar first: %r" % (e,))
        index[key] = node
        return node

    if g is not None:
        for i, name in enumerate(g.nonterminals):
            prog.prod_body[i] = visit(g.productions[name])
        prog.start_prod = prog.prod_index[g.start]
    root_ids = [visit(r) for r in roots]
    return prog, root_ids


def _program_for(g: Grammar) -> _Program:
    prog = g._program
    if prog is None:
        prog, _ = _compile(g)
        g._program = prog
    return prog


def _eval_pred(p, data, pos, n):
    """Zero-width guard; returns (passed, steps, max_attempted_pos)."""
    tag, desc = p
    if tag == "nm":
        _, branches, fail, _, _ = desc
        b = data[pos] if pos < n else -1
        for lo, hi, s in branches:
            if lo <= b <= hi:
                return False, s + 1, pos
        return True, fail + 1, pos
    if tag == "nl":
        lbytes, ok, fails, _, _ = desc
        k = len(lbytes)
        limit = min(k, n - pos)
        j = 0
        while j < limit and data[pos + j] == lbytes[j]:
            j += 1
        if j == k:
            return False, ok + 1, pos + k - 1
        return True, fails[j] + 1, pos + j
    # "np": double negation
    passed, steps, att = _eval_pred(desc, data, pos, n)
    return (not passed), steps + 1, att


def _run(prog: _Program, data: bytes, root: int, pos0: int,
         memo: MemoTable | None):
    """Evaluate node ``root`` at ``pos0``; returns (ok, pos, value, steps,
    farthest)."""
    kind = prog.kind
    aa = prog.a
    bb = prog.b
    acts = prog.act
    extra = prog.extra
    prod_body = prog.prod_body
    chars = CHAR
    n = len(data)
    farthest = -1

    memo_entries = memo.entries if memo is not None else None

    stack = []
    push = stack.append
    pop = stack.pop

    cur = root
    cpos = pos0
    ok = False
    rpos = -1
    val = None
    steps = 0

    while True:
        # Descend until a primitive (or superinstruction) yields a result.
        while True:
            k = kind[cur]
            if k == _K_MATCH1:
                preds, branches, fail, vkind, vconst = extra[cur]
                if preds:
                    acc = None
                    blocked = -1
                    for p in preds:
                        passed, s, att = _eval_pred(p, data, cpos, n)
                        if att > farthest:
                            farthest = att
                        if not passed:
                            blocked = s
                            break
                        if acc is None:
                            acc = [s]
                        else:
                            acc.append(s)
                    if blocked >= 0:
                        t = blocked + 1
                        if acc:
                            for s in reversed(acc):
                                t += s + 1
                        ok = False
                        rpos = -1
                        val = None
                        steps = t
                        break
                else:
                    acc = None
                if cpos > farthest:
                    farthest = cpos
                b = data[cpos] if cpos < n else -1
                t = -1
                for lo, hi, s in branches:
                    if lo <= b <= hi:
                        t = s
                        break
                if t >= 0:
                    ok = True
                    rpos = cpos + 1
                    val = _make_value(vkind, vconst, b, cpos)
                else:
                    ok = False
                    rpos = -1
                    val = None
                    t = fail
                if acc:
                    if ok:
                        for s in reversed(acc):
                            t += s + 1
                            val = Tup((UNIT, val))
                    else:
                        for s in reversed(acc):
                            t += s + 1
                steps = t
                break
            if k == _K_SCAN:
                preds, branches, fail, vkind, vconst, treerun, find = extra[cur]
                p = cpos
                if find is not None:
                    c, s_item, f_blocked, f_eof = find
                    p = data.find(c, cpos)
                    if p < 0:
                        p = n
                        steps = (p - cpos) * s_item + f_eof
                    else:
                        steps = (p - cpos) * s_item + f_blocked
                    if p > farthest:
                        farthest = p
                    ok = True
                    rpos = p
                    val = LeafRun(cpos, p) if vkind == _V_LEAF else _EMPTY_LST
                    break
                vals = None if treerun else []
                acc_steps = 0
                if not preds and len(branches) == 1:
                    lo, hi, s_ok = branches[0]
                    if treerun:
                        while p < n and lo <= data[p] <= hi:
                            p += 1
                        acc_steps = (p - cpos) * (s_ok + 1)
                        if p > farthest:
                            farthest = p
                    else:
                        while True:
                            if p > farthest:
                                farthest = p
                            if p < n and lo <= data[p] <= hi:
                                vals.append(_make_value(vkind, vconst,
                                                        data[p], p))
                                acc_steps += s_ok + 1
                                p += 1
                            else:
                                break
                    steps = acc_steps + fail + 1
                else:
                    while True:
                        blocked = -1
                        acc = None
                        for pr in preds:
                            passed, s, att = _eval_pred(pr, data, p, n)
                            if att > farthest:
                                farthest = att
                            if not passed:
                                blocked = s
                                break
                            if acc is None:
                                acc = [s]
                            else:
                                acc.append(s)
                        if blocked >= 0:
                            t = blocked + 1
                            if acc:
                                for s in reversed(acc):
                                    t += s + 1
                            steps = acc_steps + t + 1
                            break
                        if p > farthest:
                            farthest = p
                        b = data[p] if p < n else -1
                        mt = -1
                        for lo, hi, s in branches:
                            if lo <= b <= hi:
                                mt = s
                                break
                        if mt < 0:
                            t = fail
                            if acc:
                                for s in reversed(acc):
                                    t += s + 1
                            steps = acc_steps + t + 1
                            break
                        t = mt
                        if vals is None:
                            if acc:
                                for s in acc:
                                    t += s + 1
                        else:
                            v = _make_value(vkind, vconst, b, p)
                            if acc:
                                for s in reversed(acc):
                                    t += s + 1
                                    v = Tup((UNIT, v))
                            vals.append(v)
                        acc_steps += t + 1
                        p += 1
                ok = True
                rpos = p
                if vals is not None:
                    val = Lst(tuple(vals))
                elif vkind == _V_LEAF:
                    val = LeafRun(cpos, p)
                else:
                    val = _EMPTY_LST
                break
            if k == _K_PRED:
                passed, s, att = _eval_pred(extra[cur], data, cpos, n)
                if att > farthest:
                    farthest = att
                if passed:
                    ok = True
                    rpos = cpos
                    val = UNIT
                else:
                    ok = False
                    rpos = -1
                    val = None
                steps = s
                break
            if k == _K_LIT:
                lbytes, ok_steps, fails, vkind, vconst = extra[cur]
                klen = len(lbytes)
                limit = n - cpos
                if klen < limit:
                    limit = klen
                j = 0
                while j < limit and data[cpos + j] == lbytes[j]:
                    j += 1
                if j == klen:
                    att = cpos + klen - 1
                    if att > farthest:
                        farthest = att
                    ok = True
                    rpos = cpos + klen
                    val = vconst if vkind == _V_CONST \
                        else _spine_value(lbytes)
                    steps = ok_steps
                else:
                    att = cpos + j
                    if att > farthest:
                        farthest = att
                    ok = False
                    rpos = -1
                    val = None
                    steps = fails[j]
                break
            if k == _K_TERM:
                if cpos > farthest:
                    farthest = cpos
                if cpos < n and data[cpos] == aa[cur]:
                    ok = True
                    rpos = cpos + 1
                    val = chars[aa[cur]]
                else:
                    ok = False
                    rpos = -1
                    val = None
                steps = 1
                break
            if k == _K_RANGE:
                if cpos > farthest:
                    farthest = cpos
                if cpos < n and aa[cur] <= data[cpos] <= bb[cur]:
                    ok = True
                    rpos = cpos + 1
                    val = chars[data[cpos]]
                else:
                    ok = False
                    rpos = -1
                    val = None
                steps = 1
                break
            if k == _K_ANY:
                if cpos > farthest:
                    farthest = cpos
                if cpos < n:
                    ok = True
                    rpos = cpos + 1
                    val = chars[data[cpos]]
                else:
                    ok = False
                    rpos = -1
                    val = None
                steps = 1
                break
            if k == _K_EMPTY:
                ok = True
                rpos = cpos
                val = UNIT
                steps = 1
                break
            if k == _K_NT:
                p = aa[cur]
                if memo_entries is not None:
                    hit = memo_entries.get((p, cpos))
                    if hit is not None:
                        memo.hits += 1
                        ok, rpos, val, steps = hit
                        steps += 1
                        break
                    memo.misses += 1
                push([8, p, cpos])
                cur = prod_body[p]
                continue
            if k == _K_SEQ:
                push([1, cur, cpos])
                cur = aa[cur]
                continue
            if k == _K_CHOICE:
                push([3, cur, cpos])
                cur = aa[cur]
                continue
            if k == _K_STAR:
                push([5, cur, cpos, [], 0])
                cur = aa[cur]
                continue
            if k == _K_NOT:
                push([6, cur, cpos])
                cur = aa[cur]
                continue
            # _K_ACT
            push([7, cur, cpos])
            cur = aa[cur]
            continue

        # Unwind completed results into waiting frames.
        descend = False
        while True:
            if not stack:
                return ok, rpos, val, steps, farthest
            f = stack[-1]
            st = f[0]
            if st == 1:                      # Seq, left finished
                if ok:
                    f[0] = 2
                    f.append(steps)
                    f.append(val)
                    cur = bb[f[1]]
                    cpos = rpos
                    descend = True
                    break
                steps += 1
                pop()
            elif st == 2:                    # Seq, right finished
                steps += f[3] + 1
                if ok:
                    if rpos < f[2] or rpos > n:
                        raise InvariantViolation("sequence moved backwards")
                    val = Tup((f[4], val))
                pop()
            elif st == 3:                    # Choice, first finished
                if ok:
                    steps += 1
                    pop()
                else:
                    f[0] = 4
                    f.append(steps)
                    cur = bb[f[1]]
                    cpos = f[2]
                    descend = True
                    break
            elif st == 4:                    # Choice, second finished
                steps += f[3] + 1
                pop()
            elif st == 5:                    # Star, one iteration finished
                if ok:
                    if rpos == f[2]:
                        raise InvariantViolation(
                            "repetition body succeeded without consuming "
                            "input on a certified grammar")
                    if rpos < f[2] or rpos > n:
                        raise InvariantViolation("repetition moved backwards")
                    f[3].append(val)
                    f[4] += steps + 1
                    f[2] = rpos
                    cur = aa[f[1]]
                    cpos = rpos
                    descend = True
                    break
                ok = True
                rpos = f[2]
                val = Lst(tuple(f[3]))
                steps += f[4] + 1
                pop()
            elif st == 6:                    # Not
                if ok:
                    ok = False
                    rpos = -1
                    val = None
                else:
                    ok = True
                    rpos = f[2]
                    val = UNIT
                steps += 1
                pop()
            elif st == 7:                    # Action
                if ok:
                    ref = acts[f[1]]
                    if ref.span_aware:
                        val = ref.fn(val, f[2], rpos)
                    else:
                        val = ref.fn(val)
                steps += 1
                pop()
            else:                            # 8: NonTerminal return
                if memo_entries is not None:
                    memo_entries[(f[1], f[2])] = (ok, rpos, val, steps)
                steps += 1
                if ok and (rpos < f[2] or rpos > n):
                    raise InvariantViolation("nonterminal moved backwards")
                pop()
        if descend:
            continue


def parse(g: Grammar, cert: Certificate, data, mode: str = "plain",
          memo: MemoTable | None = None) -> ParseOutcome:
    """Run the start production on the whole input.

    ``cert`` must have been issued for ``g``; that is what makes this
    entry point total.  ``mode`` is "plain" or "packrat"; both return
    identical outcomes, steps included.  Passing a fresh MemoTable in
    ``memo`` exposes the packrat statistics to the caller (in plain mode
    it stays empty).
    """
    if not isinstance(cert, Certificate) or cert.grammar is not g:
        raise CertificateMismatch()
    if isinstance(data, str):
        data = data.encode("utf-8")
    if mode == "packrat":
        if memo is None:
            memo = MemoTable()
        active = memo
    elif mode == "plain":
        active = None
    else:
        raise ValueError("mode must be 'plain' or 'packrat', got %r" % mode)
    prog = _program_for(g)
    ok, rpos, val, steps, far = _run(prog, data,
                                     prog.prod_body[prog.start_prod], 0,
                                     active)
    steps += 1  # the start nonterminal's own rule application
    if ok and not 0 <= rpos <= len(data):
        raise InvariantViolation("result position out of bounds")
    return ParseOutcome(ok, rpos if ok else -1, val if ok else None, steps,
                        farthest=far)


def parse_to_tree(g: Grammar, cert: Certificate, data, mode: str = "plain",
                  memo: MemoTable | None = None) -> ParseOutcome:
    """parse(), asserting the grammar is tree-shaped so Ok values are trees."""
    out = parse(g, cert, data, mode=mode, memo=memo)
    if out.ok and not isinstance(out.value, TreeNode):
        raise TypeError("grammar does not carry the built-in tree-shaping "
                        "actions; load it from .peg text")
    return out


def eval_expr(e: Expr, data, pos: int = 0, g: Grammar | None = None,
              mode: str = "plain", memo: MemoTable | None = None) -> ParseOutcome:
    """Evaluate a single (core or surface) expression at a position.

    This is the uncertified internal entry point used by tests and the
    analyses' property checks; nonterminals resolve against ``g``.
    Surface sugar is desugared on the way in.  Termination is NOT
    guaranteed here unless the caller knows the expression terminates;
    use the fueled oracle for arbitrary expressions.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    if not 0 <= pos <= len(data):
        raise ValueError("position out of range")
    if mode == "packrat":
        active = memo if memo is not None else MemoTable()
    else:
        active = None
    prog, roots = _compile(g, roots=(desugar(e),))
    ok, rpos, val, steps, far = _run(prog, data, roots[0], pos, active)
    return ParseOutcome(ok, rpos if ok else -1, val if ok else None, steps,
                        farthest=far)
