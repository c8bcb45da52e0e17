"""SMT-LIB v2 encoding of verification conditions.

Scalars map to Int or Bool (Char becomes its code point). A sequence binder
`a` becomes a length constant `a__len` and an uninterpreted function
`a__sel`; out-of-range reads go through an ite that yields the default
element, so array reads stay quantifier free. Pair binders become two
constants. Non-recursive definitions are inlined; recursive ones are only
accepted on closed arguments, which are evaluated up front.
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from vtkit.errors import Unencodable
from vtkit.sem.evaluator import Evaluator, Fuel, QuantBounds, finite_domain
from vtkit.syntax.ast import (
    Binary,
    BoolLit,
    Call,
    CharLit,
    Cond,
    Expr,
    Field,
    Index,
    IntLit,
    Lambda,
    PairLit,
    Program,
    Quant,
    SemType,
    SeqLit,
    StrLit,
    Unary,
    Var,
)
from vtkit.syntax.transform import fold_constants, free_vars, inline_defs, subst
from vtkit.syntax.typecheck import infer_type
from vtkit.util.config import VerifyConfig
from vtkit.vcgen import VerificationCondition

log = logging.getLogger(__name__)

SCALARS = ("Bool", "Nat", "Int", "Char")
DEFAULT_CHAR = ord("A")
_SIMPLE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_CMP = {"=": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}
_LOGIC = {"and": "and", "or": "or", "implies": "=>"}


def symbol(name: str) -> str:
    return name if _SIMPLE.match(name) else f"|{name}|"


def _int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def _sort(t: SemType) -> str:
    return "Bool" if t.kind == "Bool" else "Int"


def _default(t: SemType) -> str:
    if t.kind == "Bool":
        return "false"
    if t.kind == "Char":
        return str(DEFAULT_CHAR)
    return "0"


@dataclass
class _Seq:
    length: str
    select: Callable[[str], str]
    elem: SemType


@dataclass
class Script:
    logic: str
    text: str
    declarations: List[str] = field(default_factory=list)


class _Encoder:
    def __init__(self, program: Program, vc: VerificationCondition, cfg: VerifyConfig):
        self.program = program
        self.vc = vc
        self.cfg = cfg
        self.types: Dict[str, SemType] = dict(vc.binder_types)
        self.decls: List[str] = []
        self.side: List[str] = []
        self.quantified = False
        self.nonlinear = False
        self.uf = False
        self._bound: Dict[str, str] = {}
        self._counter = 0
        self._declare_binders()

    # declarations

    def _declare_binders(self) -> None:
        for b in self.vc.binders:
            t, name = b.type, b.name
            if t.kind in SCALARS:
                self._const(symbol(name), t)
            elif t.kind == "Pair" and all(a.kind in SCALARS for a in t.args):
                self._const(symbol(f"{name}__fst"), t.args[0])
                self._const(symbol(f"{name}__snd"), t.args[1])
            elif t.is_sequence and t.elem.kind in SCALARS:
                length = symbol(f"{name}__len")
                self.decls.append(f"(declare-const {length} Int)")
                self.side.append(f"(>= {length} 0)")
                self.decls.append(f"(declare-fun {symbol(name + '__sel')} (Int) {_sort(t.elem)})")
                self.uf = True
            else:
                raise Unencodable(f"binder {name} of type {t}", self.vc.loc)

    def _const(self, sym: str, t: SemType) -> None:
        self.decls.append(f"(declare-const {sym} {_sort(t)})")
        if t.kind in ("Nat", "Char"):
            self.side.append(f"(>= {sym} 0)")

    # types

    def type_of(self, e: Expr) -> SemType:
        try:
            return infer_type(self.program, e, self.types)
        except Exception as exc:
            raise Unencodable(f"untyped expression ({exc})", getattr(e, "loc", None)) from None

    # formulas

    def prepare(self, e: Expr) -> Expr:
        return fold_constants(inline_defs(self.program, e, self.cfg.inline_depth))

    def formula(self, e: Expr) -> str:
        return self.scalar(self.prepare(e))

    def scalar(self, e: Expr) -> str:
        if isinstance(e, IntLit):
            return _int(e.value)
        if isinstance(e, BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, CharLit):
            return str(ord(e.value))
        if isinstance(e, Var):
            if e.name in self._bound:
                return self._bound[e.name]
            if e.name in self.types and self.types[e.name].kind in SCALARS:
                return symbol(e.name)
            if self.program.find_def(e.name) is not None:
                return self._closed_call(Call(e.name, (), loc=e.loc))
            raise Unencodable(f"non-scalar variable {e.name} in scalar position", e.loc)
        if isinstance(e, Unary):
            inner = self.scalar(e.operand)
            return f"(not {inner})" if e.op == "not" else f"(- {inner})"
        if isinstance(e, Binary):
            return self._binary(e)
        if isinstance(e, Cond):
            return f"(ite {self.scalar(e.cond)} {self.scalar(e.then)} {self.scalar(e.orelse)})"
        if isinstance(e, Index):
            return self._index(e)
        if isinstance(e, Field):
            return self._field(e)
        if isinstance(e, Quant):
            return self._quant(e)
        if isinstance(e, Call):
            return self._call(e)
        raise Unencodable(type(e).__name__.lower(), getattr(e, "loc", None))

    def _binary(self, e: Binary) -> str:
        op = e.op
        if op in _LOGIC:
            return f"({_LOGIC[op]} {self.scalar(e.left)} {self.scalar(e.right)})"
        if op == "iff":
            return f"(= {self.scalar(e.left)} {self.scalar(e.right)})"
        if op in ("=", "!="):
            eq = self._equal(e.left, e.right, e)
            return eq if op == "=" else f"(not {eq})"
        a, b = self.scalar(e.left), self.scalar(e.right)
        if op in _CMP:
            return f"({_CMP[op]} {a} {b})"
        if op == "+":
            return f"(+ {a} {b})"
        if op == "-":
            return f"(ite (>= {a} {b}) (- {a} {b}) 0)" if e.nat else f"(- {a} {b})"
        if op == "*":
            if not (isinstance(e.left, IntLit) or isinstance(e.right, IntLit)):
                self.nonlinear = True
            return f"(* {a} {b})"
        if op in ("/", "%"):
            if not isinstance(e.right, IntLit):
                self.nonlinear = True
            if op == "/":
                return f"(ite (= {b} 0) 0 (div {a} {b}))"
            return f"(ite (= {b} 0) {a} (mod {a} {b}))"
        raise Unencodable(f"operator {op}", e.loc)

    def _equal(self, left: Expr, right: Expr, e: Binary) -> str:
        t = self.type_of(left) if not self._mentions_bound(left) else None
        if t is not None and t.kind == "Pair":
            (a1, a2), (b1, b2) = self._pair(left), self._pair(right)
            return f"(and (= {a1} {b1}) (= {a2} {b2}))"
        if t is not None and t.is_sequence:
            raise Unencodable("equality of collections", e.loc)
        return f"(= {self.scalar(left)} {self.scalar(right)})"

    def _mentions_bound(self, e: Expr) -> bool:
        return bool(free_vars(e) & set(self._bound))

    def _pair(self, e: Expr) -> Tuple[str, str]:
        if isinstance(e, PairLit):
            return self.scalar(e.fst), self.scalar(e.snd)
        if isinstance(e, Var) and e.name in self.types and self.types[e.name].kind == "Pair":
            return symbol(f"{e.name}__fst"), symbol(f"{e.name}__snd")
        raise Unencodable("pair-valued expression", getattr(e, "loc", None))

    def _field(self, e: Field) -> str:
        if e.name == "size":
            return self._seq(e.target).length
        fst, snd = self._pair(e.target)
        return fst if e.name == "fst" else snd

    def _seq(self, e: Expr) -> _Seq:
        if isinstance(e, Var) and e.name in self.types and self.types[e.name].is_sequence:
            t = self.types[e.name]
            if t.elem.kind not in SCALARS:
                raise Unencodable(f"collection of {t.elem}", e.loc)
            sel = symbol(f"{e.name}__sel")
            return _Seq(symbol(f"{e.name}__len"), lambda i: f"({sel} {i})", t.elem)
        if isinstance(e, StrLit):
            codes = [str(ord(c)) for c in e.value]
            return _Seq(str(len(codes)), _literal_select(codes, str(DEFAULT_CHAR)), SemType("Char"))
        if isinstance(e, SeqLit) and e.elem_type is not None and e.elem_type.kind in SCALARS:
            items = [self.scalar(x) for x in e.elems]
            return _Seq(str(len(items)), _literal_select(items, _default(e.elem_type)), e.elem_type)
        raise Unencodable("collection-valued expression", getattr(e, "loc", None))

    def _index(self, e: Index) -> str:
        seq = self._seq(e.seq)
        i = self.scalar(e.index)
        return f"(ite (and (<= 0 {i}) (< {i} {seq.length})) {seq.select(i)} {_default(seq.elem)})"

    # quantifiers

    def _quant(self, q: Quant) -> str:
        joiner = "and" if q.kind == "forall" else "or"
        values = self._unroll_values(q)
        if values is not None:
            parts = [self.scalar(fold_constants(subst(q.body, {q.var: v}))) for v in values]
            if not parts:
                return "true" if q.kind == "forall" else "false"
            return parts[0] if len(parts) == 1 else f"({joiner} {' '.join(parts)})"
        if q.type.kind not in ("Nat", "Int"):
            raise Unencodable(f"quantifier over {q.type}", q.loc)
        self.quantified = True
        self._counter += 1
        sym = symbol(f"{q.var}__q{self._counter}")
        saved = self._bound.get(q.var)
        self._bound[q.var] = sym
        try:
            body = self.scalar(q.body)
        finally:
            if saved is None:
                del self._bound[q.var]
            else:
                self._bound[q.var] = saved
        if q.type.kind == "Nat":
            body = f"(=> (>= {sym} 0) {body})" if q.kind == "forall" else f"(and (>= {sym} 0) {body})"
        return f"({q.kind} (({sym} Int)) {body})"

    def _unroll_values(self, q: Quant) -> Optional[List[Expr]]:
        finite = finite_domain(q.type)
        if finite is not None and q.type.kind == "Bool":
            return [BoolLit(v) for v in finite]
        if not q.type.is_numeric:
            return None
        lo, hi = self._constant_range(q)
        if q.type.kind == "Nat":
            lo = max(lo if lo is not None else 0, 0)
        if lo is None or hi is None or hi - lo > self.cfg.unroll_depth:
            return None
        return [IntLit(v) for v in range(lo, max(lo, hi))]

    def _constant_range(self, q: Quant) -> Tuple[Optional[int], Optional[int]]:
        los, his = [], []
        for side, bound, offset in QuantBounds(self.program, q, self.cfg.inline_depth).candidates:
            bound = fold_constants(bound)
            if isinstance(bound, IntLit):
                (his if side == "hi" else los).append(bound.value + offset)
        return (max(los) if los else None), (min(his) if his else None)

    # calls

    def _call(self, e: Call) -> str:
        if e.name == "countRange":
            return self._count_range(e)
        if e.name in ("range", "sum"):
            raise Unencodable(e.name, e.loc)
        d = self.program.find_def(e.name)
        if d is None:
            raise Unencodable(f"call to {e.name}", e.loc)
        if d.result.kind not in SCALARS and d.result.kind != "Prop":
            raise Unencodable(f"{e.name} returning {d.result}", e.loc)
        return self._closed_call(e)

    def _closed_call(self, e: Call) -> str:
        """Recursive (or too deeply nested) applications with closed arguments."""
        if free_vars(e) - {d.name for d in self.program.defs}:
            raise Unencodable(f"recursive definition {e.name} on symbolic arguments", e.loc)
        evaluator = Evaluator(self.program, Fuel(10 ** 6), self.cfg.inline_depth)
        try:
            value = evaluator.eval(e, {})
        except Exception as exc:
            raise Unencodable(f"{e.name} ({exc})", e.loc) from None
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return _int(value)
        raise Unencodable(f"{e.name} returning a non-scalar value", e.loc)

    def _count_range(self, e: Call) -> str:
        lo, hi, pred = (fold_constants(a) for a in e.args)
        if not (isinstance(lo, IntLit) and isinstance(hi, IntLit) and isinstance(pred, Lambda)):
            raise Unencodable("countRange with symbolic bounds", e.loc)
        lo_v = max(lo.value, 0)
        if hi.value - lo_v > self.cfg.exhaustive_budget:
            raise Unencodable("countRange over a large range", e.loc)
        terms = [
            f"(ite {self.scalar(fold_constants(subst(pred.body, {pred.param: IntLit(k)})))} 1 0)"
            for k in range(lo_v, hi.value)
        ]
        if not terms:
            return "0"
        return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"

    def logic(self) -> str:
        prefix = "" if self.quantified else "QF_"
        return f"{prefix}{'UF' if self.uf else ''}{'N' if self.nonlinear else 'L'}IA"


def _literal_select(items: List[str], default: str) -> Callable[[str], str]:
    def select(i: str) -> str:
        term = default
        for k in reversed(range(len(items))):
            term = f"(ite (= {i} {k}) {items[k]} {term})"
        return term

    return select


def emit_smtlib(vc: VerificationCondition, program: Program, cfg: Optional[VerifyConfig] = None) -> Script:
    """Encode `vc` so that `unsat` means the condition is valid.

    Raises Unencodable for constructs outside the supported fragment.
    """
    cfg = cfg or VerifyConfig()
    enc = _Encoder(program, vc, cfg)
    hyps = [(h.label, enc.formula(h.formula)) for h in vc.hypotheses]
    goal = enc.formula(vc.goal)
    lines = [f"; vc {vc.id}", f"(set-logic {enc.logic()})"]
    lines += enc.decls
    lines += [f"(assert {s})" for s in enc.side]
    for label, h in hyps:
        lines.append(f"; {label}")
        lines.append(f"(assert {h})")
    lines.append(f"(assert (not {goal}))")
    lines.append("(check-sat)")
    lines.append("(exit)")
    log.debug("%s encoded in %s", vc.id, enc.logic())
    return Script(enc.logic(), "\n".join(lines) + "\n", list(enc.decls))
