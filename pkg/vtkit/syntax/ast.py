from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union

from vtkit.errors import Loc


@dataclass(frozen=True)
class SemType:
    """A semantic type. `kind` is one of the KINDS below; `args` holds the
    component types of Pair/Array/List."""

    kind: str
    args: Tuple["SemType", ...] = ()

    def __str__(self) -> str:
        if self.kind == "Pair":
            return f"({self.args[0]} × {self.args[1]})"
        if self.kind in ("Array", "List"):
            inner = str(self.args[0])
            if self.args[0].kind in ("Array", "List"):
                inner = f"({inner})"
            return f"{self.kind} {inner}"
        return self.kind

    @property
    def elem(self) -> "SemType":
        if self.kind == "String":
            return CHAR
        return self.args[0]

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("Nat", "Int")

    @property
    def is_sequence(self) -> bool:
        return self.kind in ("Array", "List", "String")

    @property
    def is_truth(self) -> bool:
        return self.kind in ("Bool", "Prop")


KINDS = ("Bool", "Nat", "Int", "Char", "String", "Pair", "Array", "List", "Prop")

BOOL = SemType("Bool")
NAT = SemType("Nat")
INT = SemType("Int")
CHAR = SemType("Char")
TEXT = SemType("String")
PROP = SemType("Prop")


def pair_of(a: SemType, b: SemType) -> SemType:
    return SemType("Pair", (a, b))


def array_of(t: SemType) -> SemType:
    return SemType("Array", (t,))


def list_of(t: SemType) -> SemType:
    return SemType("List", (t,))


def _loc():
    return field(default=None, compare=False, repr=False)


# Expressions and formulas share one node family; the type checker decides
# which positions require a Prop and which a value.


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class CharLit:
    value: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class StrLit:
    value: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Var:
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "neg"
    operand: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    # set by the type checker on Nat subtraction, which truncates at zero
    nat: bool = field(default=False, repr=False)
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Index:
    seq: "Expr"
    index: "Expr"
    elem_type: Optional[SemType] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Field:
    target: "Expr"
    name: str  # "size" | "fst" | "snd"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class SeqLit:
    kind: str  # "Array" | "List"
    elems: Tuple["Expr", ...]
    elem_type: Optional[SemType] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PairLit:
    fst: "Expr"
    snd: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expr", ...]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Lambda:
    param: str
    body: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Quant:
    kind: str  # "forall" | "exists"
    var: str
    type: SemType
    body: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Cond:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    loc: Optional[Loc] = _loc()


Expr = Union[IntLit, BoolLit, CharLit, StrLit, Var, Unary, Binary, Index, Field,
             SeqLit, PairLit, Call, Lambda, Quant, Cond]
Formula = Expr

ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("and", "or", "implies", "iff")

# name -> arity
BUILTINS = {"range": 2, "countRange": 3, "sum": 1}


# Statements


@dataclass(frozen=True)
class Let:
    name: str
    mutable: bool
    type: Optional[SemType]
    value: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Invariant:
    label: str
    formula: Formula
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class While:
    guard: Expr
    invariants: Tuple[Invariant, ...]
    decreasing: Optional[Expr]
    body: Tuple["Stmt", ...]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Return:
    values: Tuple[Expr, ...]
    loc: Optional[Loc] = _loc()


Stmt = Union[Let, Assign, If, While, Return]


@dataclass(frozen=True)
class Param:
    name: str
    type: SemType
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PureDef:
    name: str
    params: Tuple[Param, ...]
    result: SemType
    body: Expr
    recursive: bool = field(default=False, compare=False)
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Method:
    name: str
    params: Tuple[Param, ...]
    returns: Tuple[Param, ...]
    requires: Tuple[Formula, ...]
    ensures: Tuple[Formula, ...]
    body: Tuple[Stmt, ...]
    # filled in by the type checker: every param, return and local name -> type
    local_types: Dict[str, SemType] = field(default_factory=dict, compare=False, hash=False, repr=False)
    loc: Optional[Loc] = _loc()

    @property
    def pre(self) -> Formula:
        return conj(self.requires)

    @property
    def post(self) -> Formula:
        return conj(self.ensures)

    def loops(self) -> Iterable[While]:
        return iter_loops(self.body)


@dataclass(frozen=True)
class Program:
    defs: Tuple[PureDef, ...]
    methods: Tuple[Method, ...]
    source_name: Optional[str] = field(default=None, compare=False, repr=False)

    def find_def(self, name: str) -> Optional[PureDef]:
        for d in self.defs:
            if d.name == name:
                return d
        return None

    def find_method(self, name: str) -> Optional[Method]:
        for m in self.methods:
            if m.name == name:
                return m
        return None


def conj(parts: Iterable[Expr]) -> Expr:
    parts = list(parts)
    if not parts:
        return BoolLit(True)
    result = parts[0]
    for p in parts[1:]:
        result = Binary("and", result, p)
    return result


def iter_loops(stmts: Iterable[Stmt]) -> Iterable[While]:
    """Loops in source order, outer loops before the loops nested in them."""
    for s in stmts:
        if isinstance(s, While):
            yield s
            yield from iter_loops(s.body)
        elif isinstance(s, If):
            yield from iter_loops(s.then)
            yield from iter_loops(s.orelse)
