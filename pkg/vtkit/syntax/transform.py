"""Generic traversals over expressions and statements."""
import itertools
from dataclasses import replace
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from vtkit.syntax.ast import (
    Assign,
    Binary,
    BoolLit,
    Call,
    CharLit,
    Cond,
    Expr,
    Field,
    If,
    Index,
    IntLit,
    Lambda,
    Let,
    PairLit,
    Program,
    PureDef,
    Quant,
    Return,
    SeqLit,
    Stmt,
    StrLit,
    Unary,
    Var,
    While,
)

LEAVES = (IntLit, BoolLit, CharLit, StrLit, Var)


def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, LEAVES):
        return ()
    if isinstance(e, Unary):
        return (e.operand,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Index):
        return (e.seq, e.index)
    if isinstance(e, Field):
        return (e.target,)
    if isinstance(e, SeqLit):
        return e.elems
    if isinstance(e, PairLit):
        return (e.fst, e.snd)
    if isinstance(e, Call):
        return e.args
    if isinstance(e, (Lambda, Quant)):
        return (e.body,)
    if isinstance(e, Cond):
        return (e.cond, e.then, e.orelse)
    raise TypeError(f"not an expression: {e!r}")


def with_children(e: Expr, kids: Sequence[Expr]) -> Expr:
    """Rebuild `e` around new children given in the order `children` returns them."""
    if isinstance(e, LEAVES):
        return e
    if isinstance(e, Unary):
        return replace(e, operand=kids[0])
    if isinstance(e, Binary):
        return replace(e, left=kids[0], right=kids[1])
    if isinstance(e, Index):
        return replace(e, seq=kids[0], index=kids[1])
    if isinstance(e, Field):
        return replace(e, target=kids[0])
    if isinstance(e, SeqLit):
        return replace(e, elems=tuple(kids))
    if isinstance(e, PairLit):
        return replace(e, fst=kids[0], snd=kids[1])
    if isinstance(e, Call):
        return replace(e, args=tuple(kids))
    if isinstance(e, (Lambda, Quant)):
        return replace(e, body=kids[0])
    if isinstance(e, Cond):
        return replace(e, cond=kids[0], then=kids[1], orelse=kids[2])
    raise TypeError(f"not an expression: {e!r}")


def iter_subexprs(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over `e` and all of its subexpressions."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(children(x)))


def bound_var(e: Expr) -> Optional[str]:
    if isinstance(e, Quant):
        return e.var
    if isinstance(e, Lambda):
        return e.param
    return None


def free_vars(e: Expr) -> Set[str]:
    """Variable names occurring unbound in `e`. Zero-argument defs are referenced
    as variables too; callers that care filter them out against the program."""
    if isinstance(e, Var):
        return {e.name}
    out: Set[str] = set()
    for c in children(e):
        out |= free_vars(c)
    bv = bound_var(e)
    if bv is not None:
        out.discard(bv)
    return out


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    for n in itertools.count(1):
        candidate = f"{base}_{n}"
        if candidate not in avoid:
            return candidate
    raise AssertionError("unreachable")


def subst(e: Expr, mapping: Dict[str, Expr]) -> Expr:
    """Capture-avoiding substitution of free variables."""
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    bv = bound_var(e)
    if bv is None:
        return with_children(e, [subst(c, mapping) for c in children(e)])
    inner = {k: v for k, v in mapping.items() if k != bv}
    if not inner:
        return e
    incoming: Set[str] = set()
    for v in inner.values():
        incoming |= free_vars(v)
    body = e.body
    if bv in incoming:
        new = fresh_name(bv, incoming | free_vars(body) | set(inner))
        body = subst(body, {bv: Var(new)})
        e = replace(e, var=new) if isinstance(e, Quant) else replace(e, param=new)
    return replace(e, body=subst(body, inner))


def map_expr(e: Expr, fn: Callable[[Expr], Expr]) -> Expr:
    """Bottom-up rewrite."""
    return fn(with_children(e, [map_expr(c, fn) for c in children(e)]))


def conjuncts(e: Expr) -> List[Expr]:
    if isinstance(e, Binary) and e.op == "and":
        return conjuncts(e.left) + conjuncts(e.right)
    if isinstance(e, BoolLit) and e.value:
        return []
    return [e]


def assigned_vars(stmts: Sequence[Stmt]) -> List[str]:
    """Names assigned anywhere in `stmts`, in first-assignment order."""
    out: List[str] = []

    def walk(block):
        for s in block:
            if isinstance(s, Assign) and s.name not in out:
                out.append(s.name)
            elif isinstance(s, If):
                walk(s.then)
                walk(s.orelse)
            elif isinstance(s, While):
                walk(s.body)

    walk(stmts)
    return out


def stmt_exprs(s: Stmt) -> Iterator[Expr]:
    """Every expression held directly or transitively by a statement."""
    if isinstance(s, (Let, Assign)):
        yield s.value
    elif isinstance(s, Return):
        yield from s.values
    elif isinstance(s, If):
        yield s.cond
        for x in s.then + s.orelse:
            yield from stmt_exprs(x)
    elif isinstance(s, While):
        yield s.guard
        for inv in s.invariants:
            yield inv.formula
        if s.decreasing is not None:
            yield s.decreasing
        for x in s.body:
            yield from stmt_exprs(x)


def _fold(e: Expr) -> Expr:
    if isinstance(e, Unary) and e.op == "not" and isinstance(e.operand, BoolLit):
        return BoolLit(not e.operand.value, loc=e.loc)
    if isinstance(e, Unary) and e.op == "neg" and isinstance(e.operand, IntLit):
        return IntLit(-e.operand.value, loc=e.loc)
    if isinstance(e, Cond) and isinstance(e.cond, BoolLit):
        return e.then if e.cond.value else e.orelse
    if not isinstance(e, Binary):
        return e
    l, r = e.left, e.right
    if isinstance(l, IntLit) and isinstance(r, IntLit):
        a, b = l.value, r.value
        if e.op in ("/", "%") and (a < 0 or b < 0):
            return e
        folded = {
            "+": lambda: IntLit(a + b),
            "-": lambda: IntLit(max(a - b, 0) if e.nat else a - b),
            "*": lambda: IntLit(a * b),
            "/": lambda: IntLit(a // b if b else 0),
            "%": lambda: IntLit(a % b if b else a),
            "=": lambda: BoolLit(a == b),
            "!=": lambda: BoolLit(a != b),
            "<": lambda: BoolLit(a < b),
            "<=": lambda: BoolLit(a <= b),
            ">": lambda: BoolLit(a > b),
            ">=": lambda: BoolLit(a >= b),
        }.get(e.op)
        return folded() if folded else e
    lb = l.value if isinstance(l, BoolLit) else None
    rb = r.value if isinstance(r, BoolLit) else None
    if e.op == "and":
        if lb is False or rb is False:
            return BoolLit(False, loc=e.loc)
        if lb is True:
            return r
        if rb is True:
            return l
    elif e.op == "or":
        if lb is True or rb is True:
            return BoolLit(True, loc=e.loc)
        if lb is False:
            return r
        if rb is False:
            return l
    elif e.op == "implies":
        if lb is False or rb is True:
            return BoolLit(True, loc=e.loc)
        if lb is True:
            return r
    elif e.op == "iff" and lb is not None and rb is not None:
        return BoolLit(lb == rb, loc=e.loc)
    return e


def fold_constants(e: Expr) -> Expr:
    """Literal-only folding; structurally equal operands such as `n = n` are kept."""
    return map_expr(e, _fold)


def inline_call(d: PureDef, call: Call) -> Expr:
    return subst(d.body, {p.name: a for p, a in zip(d.params, call.args)})


def inline_defs(program: Program, e: Expr, depth: int, only_truth: bool = False) -> Expr:
    """Unfold non-recursive definition applications up to `depth` levels."""
    if depth <= 0:
        return e

    def unfold(x: Expr) -> Expr:
        d = None
        if isinstance(x, Call):
            d = program.find_def(x.name)
        elif isinstance(x, Var):
            d = program.find_def(x.name)
            if d is not None and d.params:
                d = None
            if d is not None:
                x = Call(d.name, (), loc=x.loc)
        if d is None or d.recursive:
            return x
        if only_truth and not d.result.is_truth:
            return x
        return inline_defs(program, inline_call(d, x), depth - 1, only_truth)

    return map_expr(e, unfold)
