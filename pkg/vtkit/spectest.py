"""Specification quality checks over user supplied test cases.

For a case (i, o) three checks run in order: the input satisfies the
precondition, the intended output satisfies the postcondition, and no other
output does. The last one assumes a deterministic intended output and is a
bounded search, so a pass only means no counterexample was found.
"""
import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from vtkit.errors import ValueDecodeError
from vtkit.gen import Rng, iter_mutants, shrink
from vtkit.sem.evaluator import EvalOutcome, Evaluator, Fuel
from vtkit.sem.values import Value, decode_args, decode_value, to_tagged_json
from vtkit.syntax.ast import Call, Expr, Program, SemType, Var
from vtkit.util.config import GenConfig

log = logging.getLogger(__name__)


class Status(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class SpecUnderTest:
    name: str
    inputs: Tuple[Tuple[str, SemType], ...]
    output: Tuple[str, SemType]
    pre: Expr
    post: Expr
    program: Program = field(compare=False, repr=False)


@dataclass(frozen=True)
class TestCase:
    input: Tuple[Value, ...]
    expected: Value

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class CheckResult:
    check: str
    status: Status
    detail: str = ""
    counterexample: Optional[Value] = None
    trials: int = 0

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"check": self.check, "status": self.status.value}
        if self.detail:
            out["detail"] = self.detail
        if self.counterexample is not None:
            out["counterexample"] = to_tagged_json(self.counterexample)
        if self.trials:
            out["trials"] = self.trials
        return out


@dataclass(frozen=True)
class CaseVerdict:
    index: int
    pre: CheckResult
    post: CheckResult
    uniqueness: CheckResult

    @property
    def checks(self) -> Tuple[CheckResult, ...]:
        return (self.pre, self.post, self.uniqueness)

    @property
    def status(self) -> Status:
        statuses = {c.status for c in self.checks}
        if Status.FAIL in statuses:
            return Status.FAIL
        if Status.INCONCLUSIVE in statuses:
            return Status.INCONCLUSIVE
        return Status.PASS


@dataclass(frozen=True)
class SpecReport:
    spec: str
    seed: int
    trials: int
    cases: Tuple[CaseVerdict, ...]

    @property
    def status(self) -> Status:
        if not self.cases:
            return Status.INCONCLUSIVE
        statuses = {c.status for c in self.cases}
        for s in (Status.FAIL, Status.INCONCLUSIVE):
            if s in statuses:
                return s
        return Status.PASS

    def to_json(self) -> Dict[str, Any]:
        return {
            "spec": self.spec,
            "seed": self.seed,
            "trials": self.trials,
            "status": self.status.value,
            "cases": [
                {"index": c.index, "status": c.status.value, "checks": [x.to_json() for x in c.checks]}
                for c in self.cases
            ],
        }


# building specs


def _apply(name: str, args: Sequence[str]) -> Expr:
    return Call(name, tuple(Var(a) for a in args))


def spec_from_defs(program: Program, pre_name: str, post_name: str, name: Optional[str] = None) -> SpecUnderTest:
    """Pair a precondition def over the inputs with a postcondition def whose
    last parameter is the output."""
    pre_def = program.find_def(pre_name)
    post_def = program.find_def(post_name)
    if pre_def is None or post_def is None:
        missing = pre_name if pre_def is None else post_name
        raise KeyError(f"no definition named {missing}")
    if not post_def.params:
        raise ValueError(f"{post_name} must take the output as its last parameter")
    inputs = tuple((p.name, p.type) for p in post_def.params[:-1])
    out = post_def.params[-1]
    if len(pre_def.params) != len(inputs):
        raise ValueError(f"{pre_name} and {post_name} disagree on the number of inputs")
    pre = Call(pre_name, tuple(Var(n) for n, _ in inputs))
    return SpecUnderTest(name or post_name, inputs, (out.name, out.type), pre,
                         _apply(post_name, [n for n, _ in inputs] + [out.name]), program)


def spec_by_convention(program: Program, name: str) -> SpecUnderTest:
    return spec_from_defs(program, f"{name}_pre", f"{name}_post", name)


def spec_from_method(program: Program, method: str) -> SpecUnderTest:
    m = program.find_method(method)
    if m is None:
        raise KeyError(f"no method named {method}")
    if len(m.returns) != 1:
        raise ValueError(f"{method} must have exactly one return value to be tested as a spec")
    r = m.returns[0]
    return SpecUnderTest(method, tuple((p.name, p.type) for p in m.params), (r.name, r.type), m.pre, m.post,
                         program)


def load_cases(spec: SpecUnderTest, data: Any) -> List[TestCase]:
    """Decode `[{"input": [...], "expected": ...}, ...]`."""
    if not isinstance(data, list):
        raise ValueDecodeError("test cases must be a JSON array")
    cases = []
    for k, entry in enumerate(data):
        if not isinstance(entry, dict) or set(entry) != {"input", "expected"}:
            raise ValueDecodeError(f"case {k}: expected an object with keys 'input' and 'expected'")
        values = decode_args([t for _, t in spec.inputs], entry["input"])
        cases.append(TestCase(tuple(values), decode_value(spec.output[1], entry["expected"])))
    return cases


# checks


def _env(spec: SpecUnderTest, case: TestCase, output: Optional[Value] = None) -> Dict[str, Any]:
    env = {n: v.payload for (n, _), v in zip(spec.inputs, case.input)}
    if output is not None:
        env[spec.output[0]] = output.payload
    return env


def _eval(spec: SpecUnderTest, f: Expr, env: Dict[str, Any], fuel: int) -> EvalOutcome:
    return Evaluator(spec.program, Fuel(fuel)).outcome(f, env)


def _verdict(check: str, outcome: EvalOutcome, fail_detail: str) -> CheckResult:
    if outcome.is_error:
        return CheckResult(check, Status.INCONCLUSIVE, f"{outcome.error.kind}: {outcome.error.detail}")
    if outcome.is_true:
        return CheckResult(check, Status.PASS)
    return CheckResult(check, Status.FAIL, fail_detail)


def check_pre(spec: SpecUnderTest, case: TestCase, fuel: int = GenConfig.fuel) -> CheckResult:
    outcome = _eval(spec, spec.pre, _env(spec, case), fuel)
    return _verdict("pre", outcome, "the input does not satisfy the precondition")


def check_post_sound(spec: SpecUnderTest, case: TestCase, fuel: int = GenConfig.fuel) -> CheckResult:
    outcome = _eval(spec, spec.post, _env(spec, case, case.expected), fuel)
    return _verdict("post", outcome, "the postcondition rejects the expected output")


def check_uniqueness(spec: SpecUnderTest, case: TestCase, rng: Rng, cfg: GenConfig) -> CheckResult:
    expected = case.expected
    evaluator = Evaluator(spec.program, Fuel(cfg.fuel))

    def accepts(o: Value) -> EvalOutcome:
        evaluator.fuel = Fuel(cfg.fuel)
        return evaluator.outcome(spec.post, _env(spec, case, o))

    errors = 0
    stream = iter_mutants(expected, rng, cfg)
    for trial in range(1, cfg.trials + 1):
        candidate = next(stream)
        outcome = accepts(candidate)
        if outcome.is_error:
            errors += 1
            continue
        if outcome.is_true:
            witness = shrink(candidate, lambda o: o != expected and accepts(o).is_true)
            log.info("%s: postcondition also accepts %s", spec.name, witness)
            return CheckResult("uniqueness", Status.FAIL, f"the postcondition also accepts {witness}",
                               witness, trial)
    if errors:
        return CheckResult("uniqueness", Status.INCONCLUSIVE,
                           f"{errors} of {cfg.trials} candidates could not be evaluated", trials=cfg.trials)
    return CheckResult("uniqueness", Status.PASS, f"no counterexample in {cfg.trials} trials", trials=cfg.trials)


def _skipped(check: str, reason: str) -> CheckResult:
    return CheckResult(check, Status.SKIPPED, reason)


def run_case(spec: SpecUnderTest, case: TestCase, index: int, rng: Rng, cfg: GenConfig,
             skip_uniqueness: bool = False) -> CaseVerdict:
    pre = check_pre(spec, case, cfg.fuel)
    if pre.status is not Status.PASS:
        return CaseVerdict(index, pre, _skipped("post", "precondition check did not pass"),
                           _skipped("uniqueness", "precondition check did not pass"))
    post = check_post_sound(spec, case, cfg.fuel)
    if post.status is not Status.PASS:
        return CaseVerdict(index, pre, post, _skipped("uniqueness", "postcondition check did not pass"))
    if skip_uniqueness:
        return CaseVerdict(index, pre, post, _skipped("uniqueness", "disabled"))
    return CaseVerdict(index, pre, post, check_uniqueness(spec, case, rng, cfg))


def run_spec_suite(spec: SpecUnderTest, cases: Sequence[TestCase], rng: Rng, cfg: GenConfig,
                   skip_uniqueness: bool = False) -> SpecReport:
    verdicts = tuple(run_case(spec, c, k, rng.split(k), cfg, skip_uniqueness) for k, c in enumerate(cases))
    return SpecReport(spec.name, rng.seed, cfg.trials, verdicts)
