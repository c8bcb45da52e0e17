"""Tiered discharge of verification conditions.

Each condition goes through the tiers in a fixed order: concrete
evaluation, exhaustive enumeration, randomized refutation, SMT, and
finally export as a residual obligation. The first tier that decides wins.
A refuted condition never reaches the solver.
"""
import enum
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from vtkit import __version__
from vtkit.dispatch.smtlib import emit_smtlib
from vtkit.dispatch.solver import SmtSolver, SolverAnswer, transcript_digest
from vtkit.errors import MissingDecreasing, SolverError, SolverUnavailable, Unencodable, UnsupportedConstruct
from vtkit.gen import Rng
from vtkit.harness import test_vc
from vtkit.sem.evaluator import Evaluator, Fuel, Unbounded, finite_domain
from vtkit.sem.values import Value, to_tagged_json
from vtkit.spectest import Status
from vtkit.syntax.ast import Binary, BoolLit, Expr, Program, Quant
from vtkit.syntax.transform import fold_constants, free_vars, map_expr
from vtkit.util.config import GenConfig, VerifyConfig
from vtkit.vcgen import Mode, VerificationCondition, generate_vcs, render_vc

log = logging.getLogger(__name__)


class Tier(enum.Enum):
    CONCRETE_EVAL = "ConcreteEval"
    EXHAUSTIVE = "Exhaustive"
    SMT = "Smt"


class OutcomeStatus(enum.Enum):
    DISCHARGED = "Discharged"
    REFUTED = "Refuted"
    RESIDUAL = "Residual"


@dataclass(frozen=True)
class DischargeOutcome:
    vc_id: str
    kind: str
    status: OutcomeStatus
    tier: Optional[Tier] = None
    evidence: Optional[str] = None
    assignment: Optional[Dict[str, Value]] = None

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"id": self.vc_id, "kind": self.kind, "status": self.status.value}
        if self.tier is not None:
            out["tier"] = self.tier.value
        if self.assignment is not None:
            out["evidence"] = {k: to_tagged_json(v) for k, v in sorted(self.assignment.items())}
        elif self.evidence is not None:
            out["evidence"] = self.evidence
        return out


def discharged(vc: VerificationCondition, tier: Tier, evidence: str) -> DischargeOutcome:
    return DischargeOutcome(vc.id, vc.kind.value, OutcomeStatus.DISCHARGED, tier, evidence)


def refuted(vc: VerificationCondition, assignment: Dict[str, Value],
            tier: Optional[Tier] = None) -> DischargeOutcome:
    return DischargeOutcome(vc.id, vc.kind.value, OutcomeStatus.REFUTED, tier, assignment=assignment)


def residual(vc: VerificationCondition, evidence: Optional[str] = None) -> DischargeOutcome:
    return DischargeOutcome(vc.id, vc.kind.value, OutcomeStatus.RESIDUAL, evidence=evidence)


# verdicts


class VerdictKind(enum.Enum):
    FULLY_PROVEN = "FullyProven"
    PARTIALLY_PROVEN = "PartiallyProven"
    REFUTED = "Refuted"
    SYNTHESIS_FAILURE = "SynthesisFailure"


EXIT_CODES = {
    VerdictKind.FULLY_PROVEN: 0,
    VerdictKind.REFUTED: 1,
    VerdictKind.SYNTHESIS_FAILURE: 2,
    VerdictKind.PARTIALLY_PROVEN: 3,
}
# most severe first
SEVERITY = (VerdictKind.SYNTHESIS_FAILURE, VerdictKind.REFUTED, VerdictKind.PARTIALLY_PROVEN,
            VerdictKind.FULLY_PROVEN)


@dataclass(frozen=True)
class MethodVerdict:
    kind: VerdictKind
    residual: Tuple[str, ...] = ()
    refuted: Optional[str] = None
    reason: str = ""

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.kind]

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"kind": self.kind.value}
        if self.residual:
            out["residual"] = list(self.residual)
        if self.refuted is not None:
            out["refuted"] = self.refuted
        if self.reason:
            out["reason"] = self.reason
        return out


def method_verdict(outcomes: Iterable[DischargeOutcome]) -> MethodVerdict:
    outcomes = sorted(outcomes, key=lambda o: o.vc_id)
    bad = [o.vc_id for o in outcomes if o.status is OutcomeStatus.REFUTED]
    if bad:
        return MethodVerdict(VerdictKind.REFUTED, refuted=bad[0])
    open_ids = tuple(o.vc_id for o in outcomes if o.status is OutcomeStatus.RESIDUAL)
    if open_ids:
        return MethodVerdict(VerdictKind.PARTIALLY_PROVEN, residual=open_ids)
    return MethodVerdict(VerdictKind.FULLY_PROVEN)


def most_severe(verdicts: Iterable[VerdictKind]) -> Optional[VerdictKind]:
    present = set(verdicts)
    for kind in SEVERITY:
        if kind in present:
            return kind
    return None


# tiers 1 to 3


_REFLEXIVE = ("=", "<=", ">=", "iff", "implies")


def _reflexive(e: Expr) -> Expr:
    if isinstance(e, Binary) and e.op in _REFLEXIVE and e.left == e.right:
        return BoolLit(True, loc=e.loc)
    return e


def normalize(e: Expr) -> Expr:
    """Literal folding plus reflexivity of structurally equal operands."""
    return fold_constants(map_expr(e, _reflexive))


def _concrete(program: Program, vc: VerificationCondition, fuel: int) -> Optional[DischargeOutcome]:
    formula = normalize(vc.formula)
    if free_vars(formula) & set(vc.binder_types):
        return None
    outcome = Evaluator(program, Fuel(fuel)).outcome(formula, {})
    if outcome.is_true:
        return discharged(vc, Tier.CONCRETE_EVAL, "evaluates to true")
    if outcome.is_false:
        return refuted(vc, {}, Tier.CONCRETE_EVAL)
    return None


class _OverBudget(Exception):
    pass


def _exhaustive(program: Program, vc: VerificationCondition, budget: int,
                fuel: int) -> Optional[DischargeOutcome]:
    """Enumerate every binder assignment when each binder has a finite range.

    Numeric ranges are read off the hypotheses the same way quantifier
    ranges are, so a binder may be bounded by earlier ones.
    """
    binders = vc.binders
    if not binders or not all(b.type.is_numeric or finite_domain(b.type) is not None for b in binders):
        return None
    levels: List[Quant] = []
    body = vc.formula
    for b in reversed(binders):
        body = Quant("forall", b.name, b.type, body)
        levels.append(body)
    levels.reverse()
    evaluator = Evaluator(program, Fuel(fuel))
    points = 0

    def walk(k: int, env: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        nonlocal points
        if k == len(binders):
            points += 1
            if points > budget:
                raise _OverBudget()
            evaluator.fuel = Fuel(fuel)
            outcome = evaluator.outcome(vc.formula, env)
            if outcome.is_error:
                raise _OverBudget()
            return None if outcome.is_true else dict(env)
        for v in evaluator.domain(levels[k], env):
            env[binders[k].name] = v
            found = walk(k + 1, env)
            if found is not None:
                return found
        env.pop(binders[k].name, None)
        return None

    try:
        counterexample = walk(0, {})
    except (_OverBudget, Unbounded):
        return None
    if counterexample is None:
        return discharged(vc, Tier.EXHAUSTIVE, f"{points} points")
    return refuted(vc, {b.name: Value(b.type, counterexample[b.name]) for b in binders}, Tier.EXHAUSTIVE)


def decide_without_solver(program: Program, vc: VerificationCondition, rng: Rng, gen_cfg: GenConfig,
                          verify_cfg: VerifyConfig) -> Optional[DischargeOutcome]:
    """Tiers that need no external process; None when all of them are undecided."""
    outcome = _concrete(program, vc, gen_cfg.fuel)
    if outcome is None:
        outcome = _exhaustive(program, vc, verify_cfg.exhaustive_budget, gen_cfg.fuel)
    if outcome is None:
        tested = test_vc(program, vc, rng, gen_cfg)
        if tested.status is Status.FAIL:
            outcome = refuted(vc, tested.assignment)
    if outcome is not None:
        log.info("%s: %s%s", vc.id, outcome.status.value, f" ({outcome.tier.value})" if outcome.tier else "")
    return outcome


# tier 4 and residual export


def _from_answer(vc: VerificationCondition, answer: Union[SolverAnswer, Exception]) -> Optional[DischargeOutcome]:
    """None when the solver tier had nothing to say."""
    if isinstance(answer, SolverUnavailable):
        log.warning("%s", answer)
        return None
    if isinstance(answer, SolverError):
        log.warning("%s: %s", vc.id, answer)
        return residual(vc, transcript_digest(answer.transcript))
    if isinstance(answer, Exception):
        raise answer
    if answer.proved:
        return discharged(vc, Tier.SMT, answer.digest)
    log.info("%s: solver answered %s", vc.id, answer.verdict)
    return residual(vc, answer.digest)


def obligation_name(vc: VerificationCondition) -> str:
    return f"{vc.id}.obligation.txt"


def export_residual(vc: VerificationCondition, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    where = vc.source_name or "<input>"
    if vc.loc is not None:
        where += f":{vc.loc.line}"
    header = [
        "# residual obligation: no automated tier closed this condition",
        f"# source: {where}",
        f"# method: {vc.method}",
        "",
    ]
    path = directory / obligation_name(vc)
    path.write_text("\n".join(header) + render_vc(vc))
    return path


def discharge(program: Program, vc: VerificationCondition, rng: Rng, gen_cfg: Optional[GenConfig] = None,
              verify_cfg: Optional[VerifyConfig] = None, solver: Optional[SmtSolver] = None,
              residual_dir: Optional[Union[str, Path]] = None) -> DischargeOutcome:
    gen_cfg = gen_cfg or GenConfig()
    verify_cfg = verify_cfg or VerifyConfig()
    outcome = decide_without_solver(program, vc, rng, gen_cfg, verify_cfg)
    if outcome is None and solver is not None:
        try:
            script = emit_smtlib(vc, program, verify_cfg)
        except Unencodable as e:
            log.info("%s: %s", vc.id, e)
        else:
            outcome = _from_answer(vc, solver.run_all([script.text])[0])
    return _finish(vc, outcome, residual_dir)


def _finish(vc: VerificationCondition, outcome: Optional[DischargeOutcome],
            residual_dir: Optional[Union[str, Path]]) -> DischargeOutcome:
    if outcome is not None and outcome.status is not OutcomeStatus.RESIDUAL:
        return outcome
    evidence = outcome.evidence if outcome is not None else None
    if residual_dir is not None:
        path = export_residual(vc, residual_dir)
        evidence = path.name
    return residual(vc, evidence)


# whole methods


@dataclass(frozen=True)
class MethodReport:
    method: str
    mode: Mode
    verdict: MethodVerdict
    outcomes: Tuple[DischargeOutcome, ...]
    seed: int

    def to_json(self, gen_cfg: GenConfig, verify_cfg: VerifyConfig) -> Dict[str, Any]:
        return {
            "method": self.method,
            "mode": self.mode.value,
            "verdict": self.verdict.kind.value,
            "detail": self.verdict.to_json(),
            "vcs": [o.to_json() for o in self.outcomes],
            "seed": self.seed,
            "config": {"gen": asdict(gen_cfg), "verify": asdict(verify_cfg)},
            "version": __version__,
        }


def dump_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def synthesis_failure(method: str, mode: Mode, seed: int, reason: str) -> MethodReport:
    return MethodReport(method, mode, MethodVerdict(VerdictKind.SYNTHESIS_FAILURE, reason=reason), (), seed)


def verify_method(program: Program, method: str, mode: Mode = Mode.PARTIAL, seed: int = 0,
                  gen_cfg: Optional[GenConfig] = None, verify_cfg: Optional[VerifyConfig] = None,
                  solver: Optional[SmtSolver] = None, out_dir: Optional[Union[str, Path]] = None) -> MethodReport:
    """Generate and discharge every condition of `method`.

    With `out_dir`, writes `<out_dir>/<method>/verify.json` and one obligation
    file per residual condition next to it.
    """
    gen_cfg = gen_cfg or GenConfig()
    verify_cfg = verify_cfg or VerifyConfig()
    try:
        vcs = generate_vcs(program, method, mode)
    except (MissingDecreasing, UnsupportedConstruct) as e:
        report = synthesis_failure(method, mode, seed, str(e))
        _write(report, out_dir, gen_cfg, verify_cfg)
        return report

    rng = Rng(seed)
    decided: Dict[str, DischargeOutcome] = {}
    for k, vc in enumerate(vcs):
        outcome = decide_without_solver(program, vc, rng.split(k), gen_cfg, verify_cfg)
        if outcome is not None:
            decided[vc.id] = outcome

    pending = [vc for vc in vcs if vc.id not in decided]
    any_refuted = any(o.status is OutcomeStatus.REFUTED for o in decided.values())
    if solver is not None and pending and (verify_cfg.keep_going or not any_refuted):
        decided.update(_run_solver(program, pending, solver, verify_cfg))

    residual_dir = Path(out_dir) / method if out_dir is not None else None
    outcomes = tuple(sorted((_finish(vc, decided.get(vc.id), residual_dir) for vc in vcs), key=lambda o: o.vc_id))
    report = MethodReport(method, mode, method_verdict(outcomes), outcomes, seed)
    log.info("%s: %s", method, report.verdict.kind.value)
    _write(report, out_dir, gen_cfg, verify_cfg)
    return report


def _run_solver(program: Program, pending: Sequence[VerificationCondition], solver: SmtSolver,
                verify_cfg: VerifyConfig) -> Dict[str, DischargeOutcome]:
    encoded = []
    for vc in pending:
        try:
            encoded.append((vc, emit_smtlib(vc, program, verify_cfg)))
        except Unencodable as e:
            log.info("%s: %s", vc.id, e)
    answers = solver.run_all([script.text for _, script in encoded])
    out = {}
    for (vc, _), answer in zip(encoded, answers):
        outcome = _from_answer(vc, answer)
        if outcome is not None:
            out[vc.id] = outcome
    return out


def _write(report: MethodReport, out_dir, gen_cfg: GenConfig, verify_cfg: VerifyConfig) -> None:
    if out_dir is None:
        return
    target = Path(out_dir) / report.method
    target.mkdir(parents=True, exist_ok=True)
    (target / "verify.json").write_text(dump_json(report.to_json(gen_cfg, verify_cfg)))
