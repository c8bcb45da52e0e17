"""Deterministic source printer; `parse(print_program(p)) == p` for checked programs."""
import json
from typing import List

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
    Method,
    PairLit,
    Program,
    PureDef,
    Quant,
    Return,
    SemType,
    SeqLit,
    Stmt,
    StrLit,
    Unary,
    Var,
    While,
)

INDENT = "  "

# binding strength, loosest first; matches grammar.lark
_LEVEL = {
    "iff": 1,
    "implies": 2,
    "or": 3,
    "and": 4,
    "=": 6, "!=": 6, "<": 6, "<=": 6, ">": 6, ">=": 6,
    "+": 7, "-": 7,
    "*": 8, "/": 8, "%": 8,
}
_NOT, _NEG, _POSTFIX, _ATOM = 5, 9, 10, 11

_SYMBOL = {
    "iff": "↔",
    "implies": "→",
    "or": "∨",
    "and": "∧",
    "!=": "≠",
    "<=": "≤",
    ">=": "≥",
}


def print_type(t: SemType) -> str:
    return str(t)


def _char(c: str) -> str:
    escaped = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\t": "\\t"}.get(c, c)
    return f"'{escaped}'"


def _operands(op: str):
    level = _LEVEL[op]
    if op == "implies":
        return level + 1, level
    if op == "iff" or level == 6:
        return level + 1, level + 1
    return level, level + 1


def _level(e: Expr) -> int:
    if isinstance(e, Binary):
        return _LEVEL[e.op]
    if isinstance(e, Unary):
        return _NOT if e.op == "not" else _NEG
    if isinstance(e, (Index, Field)):
        return _POSTFIX
    if isinstance(e, (Quant, Cond, Lambda)):
        # these extend to the right as far as possible
        return 0
    return _ATOM


def print_expr(e: Expr, ctx: int = 0) -> str:
    text = _render(e)
    if _level(e) < ctx:
        return f"({text})"
    return text


def _render(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, CharLit):
        return _char(e.value)
    if isinstance(e, StrLit):
        return json.dumps(e.value, ensure_ascii=False)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "not":
            return "¬" + print_expr(e.operand, _NOT)
        inner = print_expr(e.operand, _NEG)
        return "-" + (f"({inner})" if inner.startswith("-") else inner)
    if isinstance(e, Binary):
        lc, rc = _operands(e.op)
        return f"{print_expr(e.left, lc)} {_SYMBOL.get(e.op, e.op)} {print_expr(e.right, rc)}"
    if isinstance(e, Index):
        return f"{print_expr(e.seq, _POSTFIX)}[{print_expr(e.index)}]!"
    if isinstance(e, Field):
        return f"{print_expr(e.target, _POSTFIX)}.{e.name}"
    if isinstance(e, SeqLit):
        opener = "#[" if e.kind == "Array" else "["
        return opener + ", ".join(print_expr(x) for x in e.elems) + "]"
    if isinstance(e, PairLit):
        return f"({print_expr(e.fst)}, {print_expr(e.snd)})"
    if isinstance(e, Call):
        return f"{e.name}(" + ", ".join(print_expr(a) for a in e.args) + ")"
    if isinstance(e, Lambda):
        return f"fun {e.param} => {print_expr(e.body)}"
    if isinstance(e, Quant):
        binder = "∀" if e.kind == "forall" else "∃"
        return f"{binder} {e.var} : {print_type(e.type)}, {print_expr(e.body)}"
    if isinstance(e, Cond):
        return f"if {print_expr(e.cond)} then {print_expr(e.then)} else {print_expr(e.orelse)}"
    raise TypeError(f"cannot print {e!r}")


def print_stmt(s: Stmt, depth: int = 0) -> List[str]:
    pad = INDENT * depth
    if isinstance(s, Let):
        mut = "mut " if s.mutable else ""
        typ = f" : {print_type(s.type)}" if s.type is not None else ""
        return [f"{pad}let {mut}{s.name}{typ} := {print_expr(s.value)}"]
    if isinstance(s, Assign):
        return [f"{pad}{s.name} := {print_expr(s.value)}"]
    if isinstance(s, Return):
        return [f"{pad}return " + ", ".join(print_expr(v) for v in s.values)]
    if isinstance(s, If):
        lines = [f"{pad}if {print_expr(s.cond)} then"]
        lines += print_block(s.then, depth + 1)
        if s.orelse:
            lines.append(f"{pad}else")
            lines += print_block(s.orelse, depth + 1)
        lines.append(f"{pad}end")
        return lines
    if isinstance(s, While):
        lines = [f"{pad}while {print_expr(s.guard)}"]
        for inv in s.invariants:
            lines.append(f"{pad}{INDENT}invariant {json.dumps(inv.label)} {print_expr(inv.formula)}")
        if s.decreasing is not None:
            lines.append(f"{pad}{INDENT}decreasing {print_expr(s.decreasing)}")
        lines.append(f"{pad}do")
        lines += print_block(s.body, depth + 1)
        lines.append(f"{pad}end")
        return lines
    raise TypeError(f"cannot print {s!r}")


def print_block(stmts, depth: int) -> List[str]:
    lines: List[str] = []
    for s in stmts:
        lines += print_stmt(s, depth)
    return lines


def _params(params) -> str:
    return "".join(f" ({p.name} : {print_type(p.type)})" for p in params)


def print_def(d: PureDef) -> str:
    return f"def {d.name}{_params(d.params)} : {print_type(d.result)} :=\n{INDENT}{print_expr(d.body)}\n"


def print_method(m: Method) -> str:
    lines = [f"method {m.name}{_params(m.params)}"]
    if m.returns:
        lines.append(f"{INDENT}return{_params(m.returns)}")
    lines += [f"{INDENT}require {print_expr(f)}" for f in m.requires]
    lines += [f"{INDENT}ensures {print_expr(f)}" for f in m.ensures]
    lines.append("do")
    lines += print_block(m.body, 1)
    lines.append("end")
    return "\n".join(lines) + "\n"


def print_program(p: Program) -> str:
    parts = [print_def(d) for d in p.defs] + [print_method(m) for m in p.methods]
    return "\n".join(parts)
