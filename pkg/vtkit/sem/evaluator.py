"""Total evaluation of expressions and formulas over concrete values.

Quantifiers are evaluated by enumeration. Bool (and pairs of finite types)
enumerate directly; Nat and Int variables need a finite range, which
`QuantBounds` reads off comparison conjuncts of the quantifier body. A
conjunct `x < e` of an existential body (or an antecedent of a universal
one) makes every x >= e falsify (resp. trivially satisfy) the body, so
enumerating below e gives the classical answer.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from vtkit.errors import ArityMismatch, FuelExhausted, Loc, VtTypeError
from vtkit.sem.values import Value, default_payload, payload_fits
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
from vtkit.syntax.transform import conjuncts, free_vars, inline_defs

log = logging.getLogger(__name__)

DEFAULT_FUEL = 10 ** 6
INLINE_DEPTH = 4

UNBOUNDED_QUANTIFIER = "UnboundedQuantifier"
FUEL_EXHAUSTED = "FuelExhausted"


class Fuel:
    """One shared budget of loop iterations, calls and enumeration steps."""

    def __init__(self, budget: int = DEFAULT_FUEL):
        if budget <= 0:
            raise ValueError("fuel must be positive")
        self.budget = budget
        self.left = budget

    def spend(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise FuelExhausted(self.budget)


class Unbounded(Exception):
    def __init__(self, quant: Quant):
        self.quant = quant
        super().__init__(f"no finite range for '{quant.var}'")


@dataclass(frozen=True)
class EvalError:
    kind: str
    detail: str
    loc: Optional[Loc] = None


@dataclass(frozen=True)
class EvalOutcome:
    value: Optional[bool] = None
    error: Optional[EvalError] = None

    @property
    def is_true(self) -> bool:
        return self.value is True

    @property
    def is_false(self) -> bool:
        return self.value is False

    @property
    def is_error(self) -> bool:
        return self.error is not None

    def __str__(self):
        if self.error is not None:
            return f"Error({self.error.kind}: {self.error.detail})"
        return str(self.value)


def ediv(a: int, b: int) -> int:
    if b == 0:
        return 0
    return (a - emod(a, b)) // b


def emod(a: int, b: int) -> int:
    if b == 0:
        return a
    return a % abs(b)


def finite_domain(t: SemType) -> Optional[List[Any]]:
    if t.kind == "Bool":
        return [False, True]
    if t.kind == "Pair":
        a, b = finite_domain(t.args[0]), finite_domain(t.args[1])
        if a is None or b is None:
            return None
        return list(itertools.product(a, b))
    return None


_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}


class QuantBounds:
    """Syntactic bound candidates for one quantifier.

    Each candidate is (side, expr, offset): side "hi" means var < expr + offset
    and side "lo" means var >= expr + offset.
    """

    def __init__(self, program: Program, q: Quant, inline_depth: int = INLINE_DEPTH):
        self.quant = q
        self.candidates: List[Tuple[str, Expr, int]] = []
        inner_vars = set()
        for fact in self._facts(q.kind, q.body, inner_vars):
            fact = inline_defs(program, fact, inline_depth, only_truth=True)
            for c in conjuncts(fact):
                self._match(c, q.var)

    def _facts(self, kind: str, body: Expr, shadow: set) -> Iterable[Expr]:
        """Conjuncts (exists) or antecedents (forall) that every relevant witness satisfies."""
        var = self.quant.var
        if kind == "forall":
            while isinstance(body, Binary) and body.op == "implies":
                for c in conjuncts(body.left):
                    if not (free_vars(c) & shadow):
                        yield c
                body = body.right
            if isinstance(body, Quant) and body.kind == kind and body.var != var:
                yield from self._facts(kind, body.body, shadow | {body.var})
            return
        for c in conjuncts(body):
            if isinstance(c, Quant) and c.kind == kind and c.var != var:
                yield from self._facts(kind, c.body, shadow | {c.var})
            elif not (free_vars(c) & shadow):
                yield c

    def _match(self, c: Expr, var: str) -> None:
        if not (isinstance(c, Binary) and c.op in _FLIP):
            return
        op, left, right = c.op, c.left, c.right
        k = _offset_of(left, var)
        if k is None:
            k = _offset_of(right, var)
            if k is None:
                return
            op, left, right = _FLIP[op], right, left
        if var in free_vars(right):
            return
        if op == "<":
            self.candidates.append(("hi", right, -k))
        elif op == "<=":
            self.candidates.append(("hi", right, 1 - k))
        elif op == ">":
            self.candidates.append(("lo", right, 1 - k))
        elif op == ">=":
            self.candidates.append(("lo", right, -k))
        else:
            self.candidates.append(("hi", right, 1 - k))
            self.candidates.append(("lo", right, -k))


def _offset_of(e: Expr, var: str) -> Optional[int]:
    """k when e is `var` (k = 0) or `var + k` / `k + var` for a literal k."""
    if isinstance(e, Var) and e.name == var:
        return 0
    if isinstance(e, Binary) and e.op == "+":
        if isinstance(e.left, Var) and e.left.name == var and isinstance(e.right, IntLit):
            return e.right.value
        if isinstance(e.right, Var) and e.right.name == var and isinstance(e.left, IntLit):
            return e.left.value
    return None


class Evaluator:
    def __init__(self, program: Program, fuel: Optional[Fuel] = None, inline_depth: int = INLINE_DEPTH):
        self.program = program
        self.fuel = fuel or Fuel()
        self.inline_depth = inline_depth
        self._defs = {d.name: d for d in program.defs}
        self._bounds: Dict[int, QuantBounds] = {}

    # bounds

    def bounds_for(self, q: Quant) -> QuantBounds:
        qb = self._bounds.get(id(q))
        if qb is None or qb.quant is not q:
            qb = QuantBounds(self.program, q, self.inline_depth)
            self._bounds[id(q)] = qb
        return qb

    def range_for(self, q: Quant, env: Mapping[str, Any]) -> Optional[Tuple[Optional[int], Optional[int]]]:
        """(lo, hi) from the evaluable candidates; None for either side when absent."""
        his, los = [], []
        for side, e, offset in self.bounds_for(q).candidates:
            if not free_vars(e) <= set(env) | set(self._defs):
                continue
            try:
                value = self.eval(e, env)
            except Unbounded:
                continue
            if isinstance(value, bool) or not isinstance(value, int):
                continue
            (his if side == "hi" else los).append(value + offset)
        lo = max(los) if los else None
        hi = min(his) if his else None
        return lo, hi

    def domain(self, q: Quant, env: Mapping[str, Any]) -> Iterable[Any]:
        finite = finite_domain(q.type)
        if finite is not None:
            return finite
        if not q.type.is_numeric:
            raise Unbounded(q)
        lo, hi = self.range_for(q, env)
        if q.type.kind == "Nat":
            lo = max(lo or 0, 0)
        if lo is None or hi is None:
            raise Unbounded(q)
        return range(lo, max(lo, hi))

    # evaluation

    def eval(self, e: Expr, env: Mapping[str, Any]) -> Any:
        if isinstance(e, (IntLit, BoolLit, CharLit, StrLit)):
            return e.value
        if isinstance(e, Var):
            if e.name in env:
                return env[e.name]
            return self.call(e.name, [])
        if isinstance(e, Binary):
            return self._binary(e, env)
        if isinstance(e, Unary):
            v = self.eval(e.operand, env)
            return (not v) if e.op == "not" else -v
        if isinstance(e, Index):
            seq = self.eval(e.seq, env)
            i = self.eval(e.index, env)
            if 0 <= i < len(seq):
                return seq[i]
            return self._default_elem(e, seq)
        if isinstance(e, Field):
            target = self.eval(e.target, env)
            if e.name == "size":
                return len(target)
            return target[0] if e.name == "fst" else target[1]
        if isinstance(e, SeqLit):
            return tuple(self.eval(x, env) for x in e.elems)
        if isinstance(e, PairLit):
            return (self.eval(e.fst, env), self.eval(e.snd, env))
        if isinstance(e, Cond):
            return self.eval(e.then if self.eval(e.cond, env) else e.orelse, env)
        if isinstance(e, Quant):
            return self._quant(e, env)
        if isinstance(e, Call):
            return self._call_expr(e, env)
        if isinstance(e, Lambda):
            raise VtTypeError(e.loc, "an expression", "a lambda")
        raise TypeError(f"cannot evaluate {e!r}")

    def _default_elem(self, e: Index, seq: Any) -> Any:
        if isinstance(seq, str):
            return default_payload(SemType("Char"))
        if e.elem_type is not None:
            return default_payload(e.elem_type)
        if seq:
            return _zero_like(seq[0])
        # out of range on an empty collection of unknown element type
        return 0

    def _binary(self, e: Binary, env) -> Any:
        op = e.op
        if op == "and":
            return bool(self.eval(e.left, env)) and bool(self.eval(e.right, env))
        if op == "or":
            return bool(self.eval(e.left, env)) or bool(self.eval(e.right, env))
        if op == "implies":
            return (not self.eval(e.left, env)) or bool(self.eval(e.right, env))
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if op == "iff":
            return bool(a) == bool(b)
        if op == "+":
            return a + b
        if op == "-":
            return max(a - b, 0) if e.nat else a - b
        if op == "*":
            return a * b
        if op == "/":
            return ediv(a, b)
        if op == "%":
            return emod(a, b)
        if op == "=":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise TypeError(f"unknown operator {op}")

    def _quant(self, q: Quant, env) -> bool:
        want = q.kind == "exists"
        inner = dict(env)
        for v in self.domain(q, env):
            self.fuel.spend()
            inner[q.var] = v
            if bool(self.eval(q.body, inner)) == want:
                return want
        return not want

    def _call_expr(self, e: Call, env) -> Any:
        if e.name == "countRange":
            lo = self.eval(e.args[0], env)
            hi = self.eval(e.args[1], env)
            pred: Lambda = e.args[2]
            inner = dict(env)
            count = 0
            for k in range(max(lo, 0), hi):
                self.fuel.spend()
                inner[pred.param] = k
                if self.eval(pred.body, inner):
                    count += 1
            return count
        if e.name == "range":
            lo = self.eval(e.args[0], env)
            hi = self.eval(e.args[1], env)
            lo = max(lo, 0)
            self.fuel.spend(max(hi - lo, 0))
            return tuple(range(lo, hi))
        if e.name == "sum":
            seq = self.eval(e.args[0], env)
            self.fuel.spend(len(seq))
            return sum(seq)
        return self.call(e.name, [self.eval(a, env) for a in e.args])

    def call(self, name: str, args: List[Any]) -> Any:
        d = self._defs.get(name)
        if d is None:
            raise KeyError(name)
        if len(args) != len(d.params):
            raise ArityMismatch(f"{name} expects {len(d.params)} arguments, got {len(args)}")
        self.fuel.spend()
        return self.eval(d.body, {p.name: a for p, a in zip(d.params, args)})

    def outcome(self, f: Expr, env: Mapping[str, Any]) -> EvalOutcome:
        """Reify every evaluation failure."""
        try:
            return EvalOutcome(bool(self.eval(f, env)))
        except Unbounded as e:
            q = e.quant
            return EvalOutcome(error=EvalError(UNBOUNDED_QUANTIFIER, f"no finite range for '{q.var}'", q.loc))
        except FuelExhausted as e:
            return EvalOutcome(error=EvalError(FUEL_EXHAUSTED, str(e)))
        except RecursionError:
            return EvalOutcome(error=EvalError(FUEL_EXHAUSTED, "evaluation nested too deeply"))


def _zero_like(p: Any) -> Any:
    if isinstance(p, bool):
        return False
    if isinstance(p, int):
        return 0
    if isinstance(p, str):
        return "A" if len(p) == 1 else ""
    if isinstance(p, tuple) and len(p) == 2 and not isinstance(p[0], tuple):
        return (_zero_like(p[0]), _zero_like(p[1]))
    return ()


def payload_env(env: Mapping[str, Any]) -> Dict[str, Any]:
    """Accept either Values or raw payloads."""
    return {k: (v.payload if isinstance(v, Value) else v) for k, v in env.items()}


def eval_formula(program: Program, env: Mapping[str, Any], f: Expr, fuel: int = DEFAULT_FUEL) -> EvalOutcome:
    return Evaluator(program, Fuel(fuel)).outcome(f, payload_env(env))


def eval_expr(program: Program, env: Mapping[str, Any], e: Expr, fuel: int = DEFAULT_FUEL) -> Any:
    """Evaluate to a payload; raises FuelExhausted or Unbounded."""
    return Evaluator(program, Fuel(fuel)).eval(e, payload_env(env))


def eval_pure(program: Program, name: str, args: List[Value], fuel: int = DEFAULT_FUEL) -> Value:
    d = program.find_def(name)
    if d is None:
        raise KeyError(f"no definition named {name}")
    if len(args) != len(d.params):
        raise ArityMismatch(f"{name} expects {len(d.params)} arguments, got {len(args)}")
    for a, p in zip(args, d.params):
        if not payload_fits(p.type, a.payload):
            raise VtTypeError(None, str(p.type), str(a.type))
    ev = Evaluator(program, Fuel(fuel))
    try:
        result = ev.call(name, [a.payload for a in args])
    except RecursionError:
        raise FuelExhausted(fuel) from None
    return Value(d.result, result)


def _find_quant(f: Expr, var: str) -> Optional[Quant]:
    from vtkit.syntax.transform import iter_subexprs

    for x in iter_subexprs(f):
        if isinstance(x, Quant) and x.var == var:
            return x
    return None


def infer_bound(program: Program, f: Expr, var: str, env: Mapping[str, Any]) -> Optional[int]:
    """Smallest exclusive upper bound for the quantified `var` inside `f`."""
    q = f if isinstance(f, Quant) and f.var == var else _find_quant(f, var)
    if q is None:
        return None
    _, hi = Evaluator(program).range_for(q, payload_env(env))
    return hi
