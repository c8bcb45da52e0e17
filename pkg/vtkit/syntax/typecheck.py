"""Name resolution and type checking.

The checker rebuilds the tree it is given: empty sequence literals get their
element type, each PureDef learns whether it is self-recursive and each
Method records the type of every name it binds.
"""
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

from vtkit.errors import DuplicateNameError, UnresolvedNameError, VtTypeError
from vtkit.syntax.ast import (
    ARITH_OPS,
    BOOL,
    BUILTINS,
    CHAR,
    CMP_OPS,
    INT,
    NAT,
    PROP,
    TEXT,
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
    Invariant,
    Lambda,
    Let,
    Method,
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
    list_of,
    pair_of,
)


class Binding:
    __slots__ = ("type", "mutable")

    def __init__(self, type: SemType, mutable: bool = False):
        self.type = type
        self.mutable = mutable


Scope = Dict[str, Binding]


def assignable(found: SemType, expected: SemType) -> bool:
    """Nat flows into Int and Bool into Prop, element-wise inside collections."""
    if found == expected:
        return True
    if found.kind == "Nat" and expected.kind == "Int":
        return True
    if found.kind == "Bool" and expected.kind == "Prop":
        return True
    if found.kind == expected.kind and found.kind in ("Array", "List", "Pair"):
        return all(assignable(f, e) for f, e in zip(found.args, expected.args))
    return False


def join(a: SemType, b: SemType) -> Optional[SemType]:
    if assignable(a, b):
        return b
    if assignable(b, a):
        return a
    return None


def _is_value(t: SemType) -> bool:
    return t.kind != "Prop"


class Checker:
    def __init__(self, defs: Dict[str, PureDef]):
        self.defs = defs
        self.current_def: Optional[str] = None
        self.in_body = False

    # expressions

    def expr(self, e: Expr, scope: Scope, expected: Optional[SemType] = None) -> Tuple[Expr, SemType]:
        method = getattr(self, "_" + type(e).__name__.lower())
        e2, t = method(e, scope, expected)
        if self.in_body and t.kind == "Prop":
            raise VtTypeError(e.loc, "a value", "Prop", "propositions are not executable")
        return e2, t

    def truth(self, e: Expr, scope: Scope) -> Tuple[Expr, SemType]:
        e2, t = self.expr(e, scope)
        if not t.is_truth:
            raise VtTypeError(e.loc, "Bool or Prop", str(t))
        return e2, t

    def value(self, e: Expr, scope: Scope, expected: SemType) -> Expr:
        e2, t = self.expr(e, scope, expected)
        if not assignable(t, expected):
            raise VtTypeError(e.loc, str(expected), str(t))
        return e2

    def numeric(self, e: Expr, scope: Scope) -> Tuple[Expr, SemType]:
        e2, t = self.expr(e, scope)
        if not t.is_numeric:
            raise VtTypeError(e.loc, "Nat or Int", str(t))
        return e2, t

    def _intlit(self, e, scope, expected):
        return e, NAT

    def _boollit(self, e, scope, expected):
        return e, BOOL

    def _charlit(self, e, scope, expected):
        return e, CHAR

    def _strlit(self, e, scope, expected):
        return e, TEXT

    def _var(self, e: Var, scope, expected):
        if e.name in scope:
            return e, scope[e.name].type
        d = self.defs.get(e.name)
        if d is not None and not d.params:
            return e, d.result
        raise UnresolvedNameError(e.name, e.loc)

    def _unary(self, e: Unary, scope, expected):
        if e.op == "not":
            operand, t = self.truth(e.operand, scope)
            return replace(e, operand=operand), t
        operand, _ = self.numeric(e.operand, scope)
        return replace(e, operand=operand), INT

    def _binary(self, e: Binary, scope, expected):
        if e.op in ARITH_OPS:
            left, lt = self.numeric(e.left, scope)
            right, rt = self.numeric(e.right, scope)
            t = join(lt, rt)
            return replace(e, left=left, right=right, nat=(e.op == "-" and t == NAT)), t
        if e.op in ("=", "!="):
            left, lt = self.expr(e.left, scope)
            right, rt = self.expr(e.right, scope, lt)
            if lt.kind == "Prop" or rt.kind == "Prop" or join(lt, rt) is None:
                raise VtTypeError(e.right.loc, str(lt), str(rt), f"cannot compare {lt} with {rt}")
            if isinstance(left, SeqLit) and not left.elems:
                left, _ = self.expr(e.left, scope, rt)
            return replace(e, left=left, right=right), BOOL
        if e.op in CMP_OPS:
            left, lt = self.expr(e.left, scope)
            right, rt = self.expr(e.right, scope)
            ordered = (lt.is_numeric and rt.is_numeric) or (lt.kind == rt.kind == "Char")
            if not ordered:
                raise VtTypeError(e.loc, "numbers or characters", f"{lt} and {rt}")
            return replace(e, left=left, right=right), BOOL
        left, lt = self.truth(e.left, scope)
        right, rt = self.truth(e.right, scope)
        t = PROP if PROP in (lt, rt) else BOOL
        return replace(e, left=left, right=right), t

    def _index(self, e: Index, scope, expected):
        seq, st = self.expr(e.seq, scope)
        if not st.is_sequence:
            raise VtTypeError(e.seq.loc, "Array, List or String", str(st))
        index, _ = self.numeric(e.index, scope)
        return replace(e, seq=seq, index=index, elem_type=st.elem), st.elem

    def _field(self, e: Field, scope, expected):
        target, t = self.expr(e.target, scope)
        if e.name == "size":
            if not t.is_sequence:
                raise VtTypeError(e.target.loc, "Array, List or String", str(t))
            return replace(e, target=target), NAT
        if t.kind != "Pair":
            raise VtTypeError(e.target.loc, "a pair", str(t))
        return replace(e, target=target), t.args[0] if e.name == "fst" else t.args[1]

    def _seqlit(self, e: SeqLit, scope, expected):
        hint = expected.elem if expected is not None and expected.kind == e.kind else None
        elems = []
        elem_type = hint
        for x in e.elems:
            x2, xt = self.expr(x, scope, hint)
            if not _is_value(xt):
                raise VtTypeError(x.loc, "a value", "Prop")
            elem_type = xt if elem_type is None else join(elem_type, xt)
            if elem_type is None:
                raise VtTypeError(x.loc, "elements of one type", str(xt))
            elems.append(x2)
        elem_type = elem_type or NAT
        return replace(e, elems=tuple(elems), elem_type=elem_type), SemType(e.kind, (elem_type,))

    def _pairlit(self, e, scope, expected):
        hint = expected.args if expected is not None and expected.kind == "Pair" else (None, None)
        fst, ft = self.expr(e.fst, scope, hint[0])
        snd, st = self.expr(e.snd, scope, hint[1])
        if not (_is_value(ft) and _is_value(st)):
            raise VtTypeError(e.loc, "a value pair", "Prop")
        return replace(e, fst=fst, snd=snd), pair_of(ft, st)

    def _lambda(self, e, scope, expected):
        raise VtTypeError(e.loc, "an expression", "a lambda", "lambdas are only allowed as the predicate of countRange")

    def _quant(self, e: Quant, scope, expected):
        if e.type.kind == "Prop":
            raise VtTypeError(e.loc, "a value type", "Prop")
        inner = dict(scope)
        inner[e.var] = Binding(e.type)
        body, _ = self.truth(e.body, inner)
        return replace(e, body=body), PROP

    def _cond(self, e: Cond, scope, expected):
        cond, _ = self.truth(e.cond, scope)
        then, tt = self.expr(e.then, scope, expected)
        orelse, et = self.expr(e.orelse, scope, expected)
        t = join(tt, et)
        if t is None:
            raise VtTypeError(e.orelse.loc, str(tt), str(et))
        return replace(e, cond=cond, then=then, orelse=orelse), t

    def _call(self, e: Call, scope, expected):
        if e.name in BUILTINS:
            if len(e.args) != BUILTINS[e.name]:
                raise VtTypeError(e.loc, f"{BUILTINS[e.name]} arguments", f"{len(e.args)}")
            return getattr(self, "_builtin_" + e.name)(e, scope)
        d = self.defs.get(e.name)
        if d is None:
            raise UnresolvedNameError(e.name, e.loc)
        if len(e.args) != len(d.params):
            raise VtTypeError(e.loc, f"{len(d.params)} arguments", f"{len(e.args)}")
        args = tuple(self.value(a, scope, p.type) for a, p in zip(e.args, d.params))
        if e.name == self.current_def:
            _check_decreasing_call(d, args, e)
        return replace(e, args=args), d.result

    def _builtin_range(self, e: Call, scope):
        lo, _ = self.numeric(e.args[0], scope)
        hi, _ = self.numeric(e.args[1], scope)
        return replace(e, args=(lo, hi)), list_of(NAT)

    def _builtin_countRange(self, e: Call, scope):
        lo, _ = self.numeric(e.args[0], scope)
        hi, _ = self.numeric(e.args[1], scope)
        pred = e.args[2]
        if not isinstance(pred, Lambda):
            raise VtTypeError(pred.loc, "fun k => predicate", type(pred).__name__)
        inner = dict(scope)
        inner[pred.param] = Binding(NAT)
        body, _ = self.truth(pred.body, inner)
        return replace(e, args=(lo, hi, replace(pred, body=body))), NAT

    def _builtin_sum(self, e: Call, scope):
        seq, st = self.expr(e.args[0], scope)
        if not (st.is_sequence and st.elem.is_numeric):
            raise VtTypeError(e.args[0].loc, "a collection of numbers", str(st))
        return replace(e, args=(seq,)), st.elem

    # statements

    def method(self, m: Method) -> Method:
        declared: Dict[str, SemType] = {}
        for p in m.params + m.returns:
            if p.type.kind == "Prop":
                raise VtTypeError(p.loc, "a value type", "Prop")
            if p.name in declared or p.name in self.defs:
                raise DuplicateNameError(p.name, p.loc)
            declared[p.name] = p.type
        params = {p.name: Binding(p.type) for p in m.params}
        requires = tuple(self.truth(f, params)[0] for f in m.requires)
        post_scope = dict(params)
        post_scope.update({r.name: Binding(r.type) for r in m.returns})
        ensures = tuple(self.truth(f, post_scope)[0] for f in m.ensures)
        if not m.returns:
            raise VtTypeError(m.loc, "at least one return value", "none")
        self.returns = m.returns
        self.declared = declared
        body = self.block(m.body, dict(params))
        if not _always_returns(body):
            raise VtTypeError(m.loc, "a return on every path", "a path that falls through")
        return replace(m, requires=requires, ensures=ensures, body=body, local_types=dict(declared))

    def block(self, stmts: Sequence[Stmt], scope: Scope) -> Tuple[Stmt, ...]:
        scope = dict(scope)
        return tuple(self.stmt(s, scope) for s in stmts)

    def stmt(self, s: Stmt, scope: Scope) -> Stmt:
        self.in_body = True
        try:
            return getattr(self, "_stmt_" + type(s).__name__.lower())(s, scope)
        finally:
            self.in_body = False

    def _stmt_let(self, s: Let, scope):
        if s.name in self.declared or s.name in self.defs or s.name in BUILTINS:
            raise DuplicateNameError(s.name, s.loc)
        if s.type is not None:
            if s.type.kind == "Prop":
                raise VtTypeError(s.loc, "a value type", "Prop")
            value = self.value(s.value, scope, s.type)
            t = s.type
        else:
            value, t = self.expr(s.value, scope)
        self.declared[s.name] = t
        scope[s.name] = Binding(t, s.mutable)
        return replace(s, value=value)

    def _stmt_assign(self, s: Assign, scope):
        b = scope.get(s.name)
        if b is None:
            raise VtTypeError(s.loc, "a mutable local", f"undeclared name '{s.name}'")
        if not b.mutable:
            raise VtTypeError(s.loc, "a mutable local", f"immutable name '{s.name}'")
        return replace(s, value=self.value(s.value, scope, b.type))

    def _stmt_if(self, s: If, scope):
        cond = self.value(s.cond, scope, BOOL)
        return replace(s, cond=cond, then=self.block(s.then, scope), orelse=self.block(s.orelse, scope))

    def _stmt_while(self, s: While, scope):
        guard = self.value(s.guard, scope, BOOL)
        self.in_body = False
        invariants = tuple(Invariant(i.label, self.truth(i.formula, scope)[0], loc=i.loc) for i in s.invariants)
        decreasing = None
        if s.decreasing is not None:
            decreasing, _ = self.numeric(s.decreasing, scope)
        self.in_body = True
        body = self.block(s.body, scope)
        return replace(s, guard=guard, invariants=invariants, decreasing=decreasing, body=body)

    def _stmt_return(self, s: Return, scope):
        if len(s.values) != len(self.returns):
            raise VtTypeError(s.loc, f"{len(self.returns)} return values", f"{len(s.values)}")
        return replace(s, values=tuple(self.value(v, scope, r.type) for v, r in zip(s.values, self.returns)))

    # definitions

    def puredef(self, d: PureDef) -> PureDef:
        scope: Scope = {}
        for p in d.params:
            if p.type.kind == "Prop":
                raise VtTypeError(p.loc, "a value type", "Prop")
            if p.name in scope:
                raise DuplicateNameError(p.name, p.loc)
            scope[p.name] = Binding(p.type)
        self.current_def = d.name
        # register before checking the body so that self calls resolve
        self.defs[d.name] = d
        try:
            if d.result.kind == "Prop":
                body, _ = self.truth(d.body, scope)
            else:
                body = self.value(d.body, scope, d.result)
        finally:
            self.current_def = None
        return replace(d, body=body, recursive=_calls(body, d.name))


def _check_decreasing_call(d: PureDef, args: Sequence[Expr], call: Call) -> None:
    """A self call must pass `p - k` (k a positive literal) for some Nat parameter p."""
    for p, a in zip(d.params, args):
        if (p.type.kind == "Nat" and isinstance(a, Binary) and a.op == "-"
                and a.left == Var(p.name) and isinstance(a.right, IntLit) and a.right.value > 0):
            return
    raise VtTypeError(call.loc, "a structurally decreasing argument", f"recursive call to {d.name}")


def _calls(e, name: str) -> bool:
    from vtkit.syntax.transform import iter_subexprs

    return any(isinstance(x, Call) and x.name == name for x in iter_subexprs(e))


def _always_returns(stmts: Sequence[Stmt]) -> bool:
    for s in stmts:
        if isinstance(s, Return):
            return True
        if isinstance(s, If) and _always_returns(s.then) and _always_returns(s.orelse):
            return True
    return False


def check_program(p: Program) -> Program:
    names = set()
    for item in p.defs + p.methods:
        if item.name in names or item.name in BUILTINS:
            raise DuplicateNameError(item.name, item.loc)
        names.add(item.name)
    checker = Checker({})
    defs = tuple(checker.puredef(d) for d in p.defs)
    methods = tuple(checker.method(m) for m in p.methods)
    return Program(defs, methods, source_name=p.source_name)


def infer_type(program: Program, e: Expr, env_types: Dict[str, SemType]) -> SemType:
    """Type of an already checked expression under the given variable types."""
    checker = Checker({d.name: d for d in program.defs})
    _, t = checker.expr(e, {n: Binding(t) for n, t in env_types.items()})
    return t
