"""Randomized testing of whole methods and of single verification conditions.

Method trials run the interpreter with a monitor that checks, inline, every
invariant at loop entry and after each iteration, the postcondition at each
return and, in total mode, the termination measure.
"""
import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from vtkit.errors import FuelExhausted, PreconditionExhausted
from vtkit.gen import Rng, sample_payload, sample_satisfying, shrink_payloads, shrink_values
from vtkit.sem.evaluator import Evaluator, Fuel
from vtkit.sem.interp import Env, Interpreter, Monitor
from vtkit.sem.values import Value, to_tagged_json
from vtkit.spectest import Status
from vtkit.syntax.ast import Method, Program, Return, While
from vtkit.util.config import GenConfig
from vtkit.vcgen import Mode, VerificationCondition

log = logging.getLogger(__name__)

# share of discarded trials above which a run is inconclusive
DISCARD_LIMIT = 0.10


class FailureKind(enum.Enum):
    INVARIANT_AT_ENTRY = "InvariantAtEntry"
    INVARIANT_NOT_PRESERVED = "InvariantNotPreserved"
    POSTCONDITION_FAILED = "PostconditionFailed"
    MEASURE_VIOLATED = "MeasureViolated"
    FUEL_EXHAUSTED = "FuelExhausted"


@dataclass(frozen=True)
class TrialFailure:
    kind: FailureKind
    label: Optional[str]
    iteration: int
    input: Tuple[Value, ...] = ()
    trial: int = 0

    @property
    def key(self) -> Tuple[FailureKind, Optional[str]]:
        return (self.kind, self.label)

    def describe(self) -> str:
        what = {
            FailureKind.INVARIANT_AT_ENTRY: f'invariant "{self.label}" does not hold at loop entry',
            FailureKind.INVARIANT_NOT_PRESERVED:
                f'invariant "{self.label}" not preserved by iteration {self.iteration}',
            FailureKind.POSTCONDITION_FAILED: "postcondition failed",
            FailureKind.MEASURE_VIOLATED: f"termination measure violated at iteration {self.iteration}",
            FailureKind.FUEL_EXHAUSTED: "fuel exhausted (possible non-termination)",
        }[self.kind]
        return what

    def to_json(self, names: Sequence[str]) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "kind": self.kind.value,
            "iteration": self.iteration,
            "trial": self.trial,
            "input": {n: to_tagged_json(v) for n, v in zip(names, self.input)},
        }
        if self.label is not None:
            out["label"] = self.label
        return out


@dataclass(frozen=True)
class HarnessReport:
    method: str
    mode: Mode
    trials: int
    seed: int
    failures: Tuple[TrialFailure, ...] = ()
    discarded: int = 0
    cfg: GenConfig = field(default_factory=GenConfig)

    @property
    def status(self) -> Status:
        if self.failures:
            return Status.FAIL
        if self.discarded > DISCARD_LIMIT * self.trials:
            return Status.INCONCLUSIVE
        return Status.PASS

    def to_json(self, names: Sequence[str]) -> Dict[str, Any]:
        return {
            "method": self.method,
            "mode": self.mode.value,
            "status": self.status.value,
            "trials": self.trials,
            "discarded": self.discarded,
            "seed": self.seed,
            "failures": [f.to_json(names) for f in self.failures],
        }


class _Violation(Exception):
    def __init__(self, kind: FailureKind, label: Optional[str], iteration: int):
        self.kind = kind
        self.label = label
        self.iteration = iteration


class Unevaluable(Exception):
    pass


class CheckingMonitor(Monitor):
    """Raises _Violation at the first failed annotation."""

    def __init__(self, program: Program, method: Method, mode: Mode, fuel: int):
        self.method = method
        self.mode = mode
        self.evaluator = Evaluator(program, Fuel(fuel))
        self.fuel = fuel
        self._heads: Dict[int, Any] = {}

    def _holds(self, f, env: Dict[str, Any]) -> bool:
        self.evaluator.fuel = Fuel(self.fuel)
        outcome = self.evaluator.outcome(f, env)
        if outcome.is_error:
            raise Unevaluable(outcome.error.detail)
        return outcome.is_true

    def _measure(self, loop: While, env: Env) -> int:
        self.evaluator.fuel = Fuel(self.fuel)
        return self.evaluator.eval(loop.decreasing, env.values)

    def _checks_measure(self, loop: While) -> bool:
        return self.mode is Mode.TOTAL and loop.decreasing is not None

    def loop_entry(self, loop: While, env: Env) -> None:
        for inv in loop.invariants:
            if not self._holds(inv.formula, env.values):
                raise _Violation(FailureKind.INVARIANT_AT_ENTRY, inv.label, 0)

    def iteration_head(self, loop: While, env: Env, iteration: int) -> None:
        if not self._checks_measure(loop):
            return
        m = self._measure(loop, env)
        if m < 0:
            raise _Violation(FailureKind.MEASURE_VIOLATED, None, iteration)
        self._heads[id(loop)] = m

    def after_iteration(self, loop: While, env: Env, iteration: int) -> None:
        for inv in loop.invariants:
            if not self._holds(inv.formula, env.values):
                raise _Violation(FailureKind.INVARIANT_NOT_PRESERVED, inv.label, iteration)
        if self._checks_measure(loop) and not self._measure(loop, env) < self._heads[id(loop)]:
            raise _Violation(FailureKind.MEASURE_VIOLATED, None, iteration)

    def on_return(self, ret: Return, values: List[Any], env: Env) -> None:
        scope = env.snapshot()
        scope.update({r.name: v for r, v in zip(self.method.returns, values)})
        if not self._holds(self.method.post, scope):
            raise _Violation(FailureKind.POSTCONDITION_FAILED, None, 0)


def replay(program: Program, method: Method, inputs: Sequence[Value], mode: Mode,
           cfg: GenConfig) -> Optional[TrialFailure]:
    """Run once with checks; None when every check passes.

    Raises Unevaluable, and FuelExhausted in partial mode, for trials that
    have to be discarded.
    """
    monitor = CheckingMonitor(program, method, mode, cfg.fuel)
    try:
        Interpreter(program, Fuel(cfg.fuel), monitor).run(method, [v.payload for v in inputs])
    except _Violation as v:
        return TrialFailure(v.kind, v.label, v.iteration, tuple(inputs))
    except FuelExhausted:
        if mode is Mode.TOTAL:
            return TrialFailure(FailureKind.FUEL_EXHAUSTED, None, 0, tuple(inputs))
        raise
    return None


def _same_failure(program, method, mode, cfg, key) -> Any:
    pre_eval = Evaluator(program, Fuel(cfg.fuel))

    def failing(values: List[Value]) -> bool:
        pre_eval.fuel = Fuel(cfg.fuel)
        env = {p.name: v.payload for p, v in zip(method.params, values)}
        if not pre_eval.outcome(method.pre, env).is_true:
            return False
        try:
            got = replay(program, method, values, mode, cfg)
        except (FuelExhausted, Unevaluable):
            return False
        return got is not None and got.key == key

    return failing


def test_method(program: Program, name: str, rng: Rng, cfg: GenConfig, mode: Mode = Mode.PARTIAL,
                keep_going: bool = False) -> HarnessReport:
    method = program.find_method(name)
    if method is None:
        raise KeyError(f"no method named {name}")
    params = [(p.name, p.type) for p in method.params]
    failures: List[TrialFailure] = []
    seen = set()
    discarded = 0
    trials_run = 0
    for trial in range(cfg.trials):
        trials_run += 1
        r = rng.split(trial)
        try:
            inputs = sample_satisfying(program, params, method.pre, r, cfg)
        except PreconditionExhausted:
            if trial == 0:
                raise
            discarded += 1
            continue
        try:
            failure = replay(program, method, inputs, mode, cfg)
        except (FuelExhausted, Unevaluable) as e:
            log.info("%s trial %d discarded: %s", name, trial, e)
            discarded += 1
            continue
        if failure is None or failure.key in seen:
            continue
        shrunk = shrink_values(inputs, _same_failure(program, method, mode, cfg, failure.key))
        final = replay(program, method, shrunk, mode, cfg) or failure
        failures.append(TrialFailure(final.kind, final.label, final.iteration, tuple(shrunk), trial))
        seen.add(failure.key)
        log.info("%s: %s on trial %d", name, final.describe(), trial)
        if not keep_going:
            break
    return HarnessReport(name, mode, trials_run, rng.seed, tuple(failures), discarded, cfg)


# single verification conditions


@dataclass(frozen=True)
class VcTestResult:
    status: Status
    assignment: Optional[Dict[str, Value]] = None
    trials: int = 0
    vacuous: int = 0
    errors: int = 0

    @property
    def discarded(self) -> int:
        return self.vacuous + self.errors


def test_vc(program: Program, vc: VerificationCondition, rng: Rng, cfg: GenConfig) -> VcTestResult:
    """Search for a binder assignment that satisfies every hypothesis and falsifies the goal."""
    names = [b.name for b in vc.binders]
    types = [b.type for b in vc.binders]
    evaluator = Evaluator(program, Fuel(cfg.fuel))

    def check(payloads) -> Optional[bool]:
        """False: counterexample; True: goal holds; None: vacuous or unevaluable."""
        env = dict(zip(names, payloads))
        evaluator.fuel = Fuel(cfg.fuel)
        premise = evaluator.outcome(vc.premise, env)
        if not premise.is_true:
            return None
        evaluator.fuel = Fuel(cfg.fuel)
        goal = evaluator.outcome(vc.goal, env)
        return None if goal.is_error else goal.value

    vacuous = errors = survivors = 0
    trials = cfg.trials if names else 1
    for trial in range(trials):
        r = rng.split(trial)
        payloads = [sample_payload(t, r, cfg) for t in types]
        env = dict(zip(names, payloads))
        evaluator.fuel = Fuel(cfg.fuel)
        premise = evaluator.outcome(vc.premise, env)
        if premise.is_error:
            errors += 1
            continue
        if premise.is_false:
            vacuous += 1
            continue
        evaluator.fuel = Fuel(cfg.fuel)
        goal = evaluator.outcome(vc.goal, env)
        if goal.is_error:
            errors += 1
            continue
        if goal.is_false:
            shrunk = shrink_payloads(types, payloads, lambda ps: check(ps) is False)
            assignment = {n: Value(t, p) for n, t, p in zip(names, types, shrunk)}
            return VcTestResult(Status.FAIL, assignment, trial + 1, vacuous, errors)
        survivors += 1
    status = Status.PASS if survivors else Status.INCONCLUSIVE
    return VcTestResult(status, None, trials, vacuous, errors)


# keep pytest from collecting these when imported into test modules
test_method.__test__ = False  # type: ignore[attr-defined]
test_vc.__test__ = False  # type: ignore[attr-defined]
