import ast as pyast
import logging
from pathlib import Path
from typing import List, Optional

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError

from vtkit.errors import DuplicateNameError, Loc, VtError, VtSyntaxError
from vtkit.syntax.ast import (
    Assign,
    Binary,
    BoolLit,
    Call,
    CharLit,
    Cond,
    Field,
    If,
    Index,
    IntLit,
    Invariant,
    Lambda,
    Let,
    Method,
    NAT,
    Param,
    PairLit,
    Program,
    PureDef,
    Quant,
    Return,
    SemType,
    SeqLit,
    StrLit,
    Unary,
    Var,
    While,
    array_of,
    list_of,
    pair_of,
)

log = logging.getLogger(__name__)

_GRAMMAR_PATH = Path(__file__).with_name("grammar.lark")

FIELD_NAMES = ("size", "fst", "snd")

_parser: Optional[Lark] = None


def _lark() -> Lark:
    global _parser
    if _parser is None:
        _parser = Lark(
            _GRAMMAR_PATH.read_text(encoding="utf-8"),
            parser="lalr",
            start=["program", "type"],
            propagate_positions=True,
            maybe_placeholders=True,
        )
    return _parser


def _meta_loc(meta) -> Optional[Loc]:
    if getattr(meta, "empty", True):
        return None
    return Loc(meta.line, meta.column)


def _tok_loc(tok: Token) -> Loc:
    return Loc(tok.line, tok.column)


# int() refuses longer digit strings under the default interpreter limit
DIGIT_CHUNK = 4000


def read_int(digits: str) -> int:
    value = 0
    for start in range(0, len(digits), DIGIT_CHUNK):
        chunk = digits[start:start + DIGIT_CHUNK]
        value = value * 10 ** len(chunk) + int(chunk)
    return value


class _Returns(list):
    pass


class _Clause:
    def __init__(self, kind: str, formula):
        self.kind = kind
        self.formula = formula


class _Decreasing:
    def __init__(self, expr):
        self.expr = expr


def _binary(op: str):
    @v_args(meta=True)
    def build(self, meta, children):
        left, right = children
        return Binary(op, left, right, loc=_meta_loc(meta))

    return build


class _Builder(Transformer):
    """Turns the lark parse tree into the frozen AST of vtkit.syntax.ast."""

    # program structure

    def program(self, children):
        defs = tuple(c for c in children if isinstance(c, PureDef))
        methods = tuple(c for c in children if isinstance(c, Method))
        return Program(defs, methods)

    @v_args(meta=True)
    def puredef(self, meta, children):
        name, *groups, result, body = children
        params = tuple(p for g in groups for p in g)
        return PureDef(str(name), params, result, body, loc=_meta_loc(meta))

    @v_args(meta=True)
    def method(self, meta, children):
        name = children[0]
        params, returns, requires, ensures, body = [], (), [], [], ()
        for c in children[1:]:
            if isinstance(c, _Returns):
                returns = tuple(c)
            elif isinstance(c, list):
                params.extend(c)
            elif isinstance(c, _Clause):
                (requires if c.kind == "requires" else ensures).append(c.formula)
            elif isinstance(c, tuple):
                body = c
        return Method(str(name), tuple(params), returns, tuple(requires), tuple(ensures), body,
                      loc=_meta_loc(meta))

    def returns(self, children):
        return _Returns(p for g in children for p in g)

    def requires_clause(self, children):
        return _Clause("requires", children[0])

    def ensures_clause(self, children):
        return _Clause("ensures", children[0])

    def param_group(self, children):
        return [p for c in children for p in c]

    def param(self, children):
        *names, typ = children
        return [Param(str(n), typ, loc=_tok_loc(n)) for n in names]

    # types

    def bool_type(self, _):
        return SemType("Bool")

    def nat_type(self, _):
        return SemType("Nat")

    def int_type(self, _):
        return SemType("Int")

    def char_type(self, _):
        return SemType("Char")

    def string_type(self, _):
        return SemType("String")

    def prop_type(self, _):
        return SemType("Prop")

    def pair_type(self, children):
        return pair_of(children[0], children[1])

    def array_type(self, children):
        return array_of(children[0])

    def list_type(self, children):
        return list_of(children[0])

    # statements

    def stmts(self, children):
        return tuple(children)

    @v_args(meta=True)
    def let_stmt(self, meta, children):
        mut, name, typ, value = children
        return Let(str(name), mut is not None, typ, value, loc=_meta_loc(meta))

    @v_args(meta=True)
    def assign_stmt(self, meta, children):
        name, value = children
        return Assign(str(name), value, loc=_meta_loc(meta))

    @v_args(meta=True)
    def if_stmt(self, meta, children):
        cond, then, orelse = children
        return If(cond, then, orelse or (), loc=_meta_loc(meta))

    @v_args(meta=True)
    def while_stmt(self, meta, children):
        guard, body = children[0], children[-1]
        invariants: List[Invariant] = []
        decreasing = None
        for c in children[1:-1]:
            if isinstance(c, _Decreasing):
                decreasing = c.expr
            else:
                invariants.append(c)
        labelled = []
        seen = set()
        for k, inv in enumerate(invariants, start=1):
            label = inv.label or f"invariant_{k}"
            if label in seen:
                raise DuplicateNameError(label, inv.loc, what="invariant label")
            seen.add(label)
            labelled.append(Invariant(label, inv.formula, loc=inv.loc))
        return While(guard, tuple(labelled), decreasing, body, loc=_meta_loc(meta))

    @v_args(meta=True)
    def return_stmt(self, meta, children):
        return Return(tuple(children), loc=_meta_loc(meta))

    @v_args(meta=True)
    def invariant(self, meta, children):
        label, formula = children
        return Invariant(pyast.literal_eval(str(label)) if label is not None else "", formula,
                         loc=_meta_loc(meta))

    def decreasing(self, children):
        return _Decreasing(children[0])

    # expressions

    iff = _binary("iff")
    implies = _binary("implies")
    or_ = _binary("or")
    and_ = _binary("and")
    eq = _binary("=")
    ne = _binary("!=")
    lt = _binary("<")
    le = _binary("<=")
    gt = _binary(">")
    ge = _binary(">=")
    add = _binary("+")
    sub = _binary("-")
    mul = _binary("*")
    div = _binary("/")
    mod = _binary("%")

    @v_args(meta=True)
    def not_(self, meta, children):
        return Unary("not", children[0], loc=_meta_loc(meta))

    @v_args(meta=True)
    def neg(self, meta, children):
        return Unary("neg", children[0], loc=_meta_loc(meta))

    @v_args(meta=True)
    def index(self, meta, children):
        return Index(children[0], children[1], loc=_meta_loc(meta))

    @v_args(meta=True)
    def field(self, meta, children):
        target, name = children
        if str(name) not in FIELD_NAMES:
            raise VtSyntaxError(name.line, name.column, f"unknown field '.{name}'")
        return Field(target, str(name), loc=_meta_loc(meta))

    def int_lit(self, children):
        tok = children[0]
        return IntLit(read_int(str(tok)), loc=_tok_loc(tok))

    @v_args(meta=True)
    def true_lit(self, meta, _):
        return BoolLit(True, loc=_meta_loc(meta))

    @v_args(meta=True)
    def false_lit(self, meta, _):
        return BoolLit(False, loc=_meta_loc(meta))

    def char_lit(self, children):
        tok = children[0]
        return CharLit(pyast.literal_eval(str(tok)), loc=_tok_loc(tok))

    def str_lit(self, children):
        tok = children[0]
        return StrLit(pyast.literal_eval(str(tok)), loc=_tok_loc(tok))

    def var(self, children):
        tok = children[0]
        return Var(str(tok), loc=_tok_loc(tok))

    @v_args(meta=True)
    def call(self, meta, children):
        name, *args = children
        return Call(str(name), tuple(args), loc=_meta_loc(meta))

    @v_args(meta=True)
    def array_lit(self, meta, children):
        return SeqLit("Array", tuple(children), loc=_meta_loc(meta))

    @v_args(meta=True)
    def list_lit(self, meta, children):
        return SeqLit("List", tuple(children), loc=_meta_loc(meta))

    @v_args(meta=True)
    def pair_lit(self, meta, children):
        return PairLit(children[0], children[1], loc=_meta_loc(meta))

    def _quant(self, kind, meta, children):
        *names, typ, body = children
        typ = typ or NAT
        loc = _meta_loc(meta)
        for n in reversed(names):
            body = Quant(kind, str(n), typ, body, loc=loc)
        return body

    @v_args(meta=True)
    def forall_q(self, meta, children):
        return self._quant("forall", meta, children)

    @v_args(meta=True)
    def exists_q(self, meta, children):
        return self._quant("exists", meta, children)

    @v_args(meta=True)
    def cond(self, meta, children):
        return Cond(children[0], children[1], children[2], loc=_meta_loc(meta))

    @v_args(meta=True)
    def lam(self, meta, children):
        return Lambda(str(children[0]), children[1], loc=_meta_loc(meta))


def _syntax_error(e: UnexpectedInput) -> VtSyntaxError:
    line = getattr(e, "line", -1)
    col = getattr(e, "column", -1)
    if isinstance(e, UnexpectedEOF):
        return VtSyntaxError(max(line, 0), max(col, 0), "unexpected end of input")
    if isinstance(e, UnexpectedCharacters):
        return VtSyntaxError(line, col, f"unexpected character {e.char!r}")
    token = getattr(e, "token", None)
    expected = sorted(getattr(e, "expected", None) or [])
    msg = f"unexpected token {str(token)!r}" if token is not None else "unexpected input"
    if expected:
        msg += f" (expected one of: {', '.join(expected[:8])})"
    return VtSyntaxError(line, col, msg)


def _visit_pos(obj) -> tuple:
    if isinstance(obj, Token):
        return obj.line or 1, obj.column or 1
    loc = _meta_loc(getattr(obj, "meta", None))
    return (loc.line, loc.col) if loc is not None else (1, 1)


def _build(text: str, start: str):
    try:
        tree = _lark().parse(text, start=start)
    except UnexpectedInput as e:
        raise _syntax_error(e) from None
    try:
        return _Builder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, VtError):
            raise e.orig_exc from None
        line, col = _visit_pos(e.obj)
        raise VtSyntaxError(line, col, f"cannot read {e.rule or 'input'}: {e.orig_exc}") from None


def parse_untyped(source: str) -> Program:
    """Parse without resolution or type checking."""
    return _build(source, "program")


def parse(source: str, source_name: Optional[str] = None) -> Program:
    """Parse, resolve and type check a whole .vt source unit."""
    from vtkit.syntax.typecheck import check_program

    program = parse_untyped(source)
    program = check_program(program)
    if source_name is not None:
        program = Program(program.defs, program.methods, source_name=source_name)
    log.debug("parsed %d defs, %d methods", len(program.defs), len(program.methods))
    return program


def parse_type(text: str) -> SemType:
    return _build(text, "type")
