"""Verification condition generation.

Methods are executed symbolically, forwards: a state maps each program
variable to an expression over the VC binders and carries the labelled
hypotheses of its path. Conditionals split the path. A loop contributes
entry VCs, then continues from a state in which every variable assigned in
its body is replaced by a fresh binder and the invariants are assumed.
"""
import enum
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from vtkit.errors import Loc, MissingDecreasing, UnsupportedConstruct
from vtkit.syntax.ast import (
    INT,
    Assign,
    Binary,
    BoolLit,
    Expr,
    If,
    IntLit,
    Let,
    Method,
    Program,
    Return,
    SemType,
    Stmt,
    Unary,
    Var,
    While,
    conj,
)
from vtkit.syntax.printer import print_expr, print_type
from vtkit.syntax.transform import assigned_vars, fold_constants, free_vars, subst
from vtkit.syntax.typecheck import infer_type

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    PARTIAL = "partial"
    TOTAL = "total"


class VcKind(enum.Enum):
    INVARIANT_ENTRY = "InvariantEntry"
    INVARIANT_PRESERVED = "InvariantPreserved"
    POST_ON_EXIT = "PostOnExit"
    POST_ON_RETURN = "PostOnReturn"
    MEASURE_DECREASES = "MeasureDecreases"
    MEASURE_NON_NEGATIVE = "MeasureNonNegative"


@dataclass(frozen=True)
class Hypothesis:
    label: str
    formula: Expr


@dataclass(frozen=True)
class Binder:
    name: str
    type: SemType


@dataclass(frozen=True)
class VerificationCondition:
    id: str
    method: str
    kind: VcKind
    hypotheses: Tuple[Hypothesis, ...]
    goal: Expr
    binders: Tuple[Binder, ...]
    loc: Optional[Loc] = field(default=None, compare=False)
    source_name: Optional[str] = field(default=None, compare=False)

    @property
    def premise(self) -> Expr:
        return conj(h.formula for h in self.hypotheses)

    @property
    def formula(self) -> Expr:
        """The closed-over-hypotheses implication, binders left free."""
        if not self.hypotheses:
            return self.goal
        return Binary("implies", self.premise, self.goal)

    @property
    def binder_types(self) -> Dict[str, SemType]:
        return {b.name: b.type for b in self.binders}


@dataclass
class _State:
    sigma: Dict[str, Expr]
    hyps: List[Hypothesis]
    binders: Dict[str, SemType]
    exited: bool = False

    def copy(self) -> "_State":
        return _State(dict(self.sigma), list(self.hyps), dict(self.binders), self.exited)

    def assume(self, label: str, f: Expr) -> "_State":
        f = fold_constants(f)
        st = self.copy()
        if not (isinstance(f, BoolLit) and f.value):
            st.hyps.append(Hypothesis(label, f))
        return st


def _unique_labels(hyps: Sequence[Hypothesis]) -> Tuple[Hypothesis, ...]:
    seen: Counter = Counter()
    out = []
    for h in hyps:
        seen[h.label] += 1
        label = h.label if seen[h.label] == 1 else f"{h.label}_{seen[h.label]}"
        out.append(Hypothesis(label, h.formula))
    return tuple(out)


class _Generator:
    def __init__(self, program: Program, method: Method, mode: Mode):
        self.program = program
        self.method = method
        self.mode = mode
        self.vcs: List[VerificationCondition] = []
        self._ids: Counter = Counter()
        self._fresh: Counter = Counter()
        self._taken = set(method.local_types) | {d.name for d in program.defs}
        self._loop_index: Dict[int, int] = {}
        self._return_index: Dict[int, int] = {}
        self._number(method.body)

    def _number(self, stmts: Sequence[Stmt]) -> None:
        for s in stmts:
            if isinstance(s, While):
                self._loop_index[id(s)] = len(self._loop_index) + 1
                self._number(s.body)
            elif isinstance(s, If):
                self._number(s.then)
                self._number(s.orelse)
            elif isinstance(s, Return):
                self._return_index[id(s)] = len(self._return_index) + 1

    def fresh(self, var: str) -> str:
        while True:
            self._fresh[var] += 1
            name = f"{var}_{self._fresh[var]}"
            if name not in self._taken:
                self._taken.add(name)
                return name

    def emit(self, base: str, kind: VcKind, st: _State, goal: Expr, loc: Optional[Loc]) -> None:
        self._ids[base] += 1
        vc_id = f"{self.method.name}.{base}.p{self._ids[base]}"
        goal = fold_constants(goal)
        hyps = _unique_labels(st.hyps)
        used = free_vars(goal)
        for h in hyps:
            used |= free_vars(h.formula)
        binders = tuple(Binder(n, t) for n, t in st.binders.items() if n in used)
        self.vcs.append(VerificationCondition(vc_id, self.method.name, kind, hyps, goal, binders, loc,
                                              self.program.source_name))

    def block(self, stmts: Sequence[Stmt], states: List[_State]) -> List[_State]:
        for s in stmts:
            nxt: List[_State] = []
            for st in states:
                nxt.extend(self.stmt(s, st))
            states = nxt
        return states

    def stmt(self, s: Stmt, st: _State) -> List[_State]:
        if isinstance(s, (Let, Assign)):
            st = st.copy()
            st.sigma[s.name] = subst(s.value, st.sigma)
            return [st]
        if isinstance(s, If):
            cond = fold_constants(subst(s.cond, st.sigma))
            out = []
            if cond != BoolLit(False):
                out += self.block(s.then, [st.assume("if_pos", cond)])
            if cond != BoolLit(True):
                out += self.block(s.orelse, [st.assume("if_neg", Unary("not", cond))])
            return out
        if isinstance(s, Return):
            self.on_return(s, st)
            return []
        if isinstance(s, While):
            return self.loop(s, st)
        raise UnsupportedConstruct(f"cannot generate conditions for {type(s).__name__}", getattr(s, "loc", None))

    def on_return(self, s: Return, st: _State) -> None:
        mapping = dict(st.sigma)
        for r, v in zip(self.method.returns, s.values):
            mapping[r.name] = subst(v, st.sigma)
        goal = subst(self.method.post, mapping)
        k = self._return_index[id(s)]
        if st.exited:
            self.emit(f"ret{k}.post_exit", VcKind.POST_ON_EXIT, st, goal, s.loc)
        else:
            self.emit(f"ret{k}.post_return", VcKind.POST_ON_RETURN, st, goal, s.loc)

    def loop(self, s: While, st: _State) -> List[_State]:
        j = self._loop_index[id(s)]
        for inv in s.invariants:
            self.emit(f"loop{j}.{inv.label}.entry", VcKind.INVARIANT_ENTRY, st, subst(inv.formula, st.sigma), inv.loc)

        head = st.copy()
        for x in assigned_vars(s.body):
            if x not in head.sigma:
                continue
            b = self.fresh(x)
            head.binders[b] = self.method.local_types[x]
            head.sigma[x] = Var(b)
        for inv in s.invariants:
            head = head.assume(f"invariant_{inv.label}", subst(inv.formula, head.sigma))
        guard = subst(s.guard, head.sigma)

        body_in = head.assume("guard", guard)
        measure = None
        if self.mode is Mode.TOTAL:
            measure = subst(s.decreasing, head.sigma)
            if self._measure_type(s) == INT:
                self.emit(f"loop{j}.measure.nonneg", VcKind.MEASURE_NON_NEGATIVE, body_in,
                          Binary("<=", IntLit(0), measure), s.decreasing.loc)
        for end in self.block(s.body, [body_in]):
            for inv in s.invariants:
                self.emit(f"loop{j}.{inv.label}.preserved", VcKind.INVARIANT_PRESERVED, end,
                          subst(inv.formula, end.sigma), inv.loc)
            if measure is not None:
                self.emit(f"loop{j}.measure.decreases", VcKind.MEASURE_DECREASES, end,
                          Binary("<", subst(s.decreasing, end.sigma), measure), s.decreasing.loc)

        done = head.assume("done", Unary("not", guard))
        done.exited = True
        return [done]

    def _measure_type(self, s: While) -> SemType:
        return infer_type(self.program, s.decreasing, self.method.local_types)

    def run(self) -> List[VerificationCondition]:
        st = _State({p.name: Var(p.name) for p in self.method.params}, [],
                    {p.name: p.type for p in self.method.params})
        for f in self.method.requires:
            st = st.assume("require", f)
        self.block(self.method.body, [st])
        return self.vcs


def generate_vcs(program: Program, method: str, mode: Mode = Mode.PARTIAL) -> List[VerificationCondition]:
    m = program.find_method(method)
    if m is None:
        raise KeyError(f"no method named {method}")
    if mode is Mode.TOTAL:
        for loop in m.loops():
            if loop.decreasing is None:
                raise MissingDecreasing(f"loop in {m.name} has no decreasing clause (required in total mode)",
                                        loop.loc)
    vcs = _Generator(program, m, mode).run()
    log.debug("%s: %d verification conditions (%s)", method, len(vcs), mode.value)
    return vcs


def render_vc(vc: VerificationCondition) -> str:
    lines = [f"vc {vc.id}", f"kind: {vc.kind.value}", f"method: {vc.method}"]
    if vc.source_name is not None or vc.loc is not None:
        where = vc.source_name or "<input>"
        if vc.loc is not None:
            where += f":{vc.loc.line}"
        lines.append(f"from: {where}")
    lines.append("binders:")
    lines += [f"  {b.name} : {print_type(b.type)}" for b in vc.binders]
    lines.append("hypotheses:")
    lines += [f"  {h.label} : {print_expr(h.formula)}" for h in vc.hypotheses]
    lines.append(f"goal: {print_expr(vc.goal)}")
    return "\n".join(lines) + "\n"
