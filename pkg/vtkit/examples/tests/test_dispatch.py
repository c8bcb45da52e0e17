import json
import shlex
import shutil

import pytest

from vtkit.dispatch.pipeline import (
    EXIT_CODES,
    DischargeOutcome,
    OutcomeStatus,
    Tier,
    VerdictKind,
    discharge,
    export_residual,
    method_verdict,
    most_severe,
    normalize,
    verify_method,
)
from vtkit.dispatch.smtlib import emit_smtlib
from vtkit.dispatch.solver import SmtSolver, SolverAnswer, parse_answer
from vtkit.errors import SolverError, SolverUnavailable, Unencodable
from vtkit.gen import Rng
from vtkit.syntax.ast import BoolLit
from vtkit.syntax.parser import parse
from vtkit.test import fake_solver, load_fixture
from vtkit.util.config import GenConfig, VerifyConfig
from vtkit.vcgen import Mode, VcKind, generate_vcs


def only_vc(source: str, method: str):
    program = parse(source)
    (vc,) = generate_vcs(program, method)
    return program, vc


class RecordingSolver(SmtSolver):
    """Answers every script with a fixed verdict without starting a process."""

    def __init__(self, verdict: str = "unsat"):
        super().__init__("recording")
        self.verdict = verdict
        self.scripts = []

    def run_all(self, scripts):
        self.scripts.extend(scripts)
        return [SolverAnswer(self.verdict, s) for s in scripts]


class TestTiers:
    def test_closed_arithmetic(self):
        program, vc = only_vc("method K (n : Nat) return (r : Nat) ensures 2 + 2 = 4 do return n end", "K")
        outcome = discharge(program, vc, Rng(0))
        assert outcome.status is OutcomeStatus.DISCHARGED
        assert outcome.tier is Tier.CONCRETE_EVAL

    def test_closed_falsehood(self):
        program, vc = only_vc("method K (n : Nat) return (r : Nat) ensures 2 + 2 = 5 do return n end", "K")
        outcome = discharge(program, vc, Rng(0))
        assert outcome.status is OutcomeStatus.REFUTED
        assert outcome.tier is Tier.CONCRETE_EVAL

    def test_reflexive_goal(self):
        program = load_fixture("id.vt")
        (vc,) = generate_vcs(program, "Id")
        assert normalize(vc.formula) == BoolLit(True)
        assert discharge(program, vc, Rng(0)).tier is Tier.CONCRETE_EVAL

    def test_bool_binder_is_enumerated(self):
        program, vc = only_vc("method B (b : Bool) return (r : Bool) ensures r ∨ ¬ r do return b end", "B")
        outcome = discharge(program, vc, Rng(0))
        assert outcome.status is OutcomeStatus.DISCHARGED
        assert outcome.tier is Tier.EXHAUSTIVE
        assert outcome.evidence == "2 points"

    def test_bounded_ints_are_enumerated(self):
        program = load_fixture("arith.vt")
        for vc in generate_vcs(program, "Max"):
            outcome = discharge(program, vc, Rng(0))
            assert outcome.tier is Tier.EXHAUSTIVE, vc.id

    def test_exhaustive_counterexample(self):
        program, vc = only_vc("""
        method Half (x : Int) return (r : Int)
          require 0 ≤ x ∧ x ≤ 9
          ensures 2 * r = x
        do
          return x / 2
        end
        """, "Half")
        outcome = discharge(program, vc, Rng(0))
        assert outcome.status is OutcomeStatus.REFUTED
        assert outcome.tier is Tier.EXHAUSTIVE
        assert outcome.assignment["x"].payload == 1

    def test_over_budget_falls_through(self):
        program = load_fixture("arith.vt")
        vc = generate_vcs(program, "Max")[0]
        outcome = discharge(program, vc, Rng(0), verify_cfg=VerifyConfig(exhaustive_budget=10))
        assert outcome.tier is not Tier.EXHAUSTIVE

    def test_false_entry_condition_is_refuted(self):
        program = load_fixture("sorted_rotated_bad_inv.vt")
        (vc,) = [vc for vc in generate_vcs(program, "CheckSortedAndRotated") if vc.kind is VcKind.INVARIANT_ENTRY
                 and "inv_drops_count" in vc.id]
        outcome = discharge(program, vc, Rng(0))
        assert outcome.status is OutcomeStatus.REFUTED
        assert outcome.tier is None
        assert len(outcome.assignment["nums"].payload) >= 2

    def test_undecided_without_solver_is_residual(self, tmp_path):
        program = load_fixture("sorted_rotated.vt")
        vc = next(vc for vc in generate_vcs(program, "CheckSortedAndRotated") if vc.kind is VcKind.POST_ON_EXIT)
        outcome = discharge(program, vc, Rng(0), residual_dir=tmp_path)
        assert outcome.status is OutcomeStatus.RESIDUAL
        assert outcome.evidence == f"{vc.id}.obligation.txt"
        assert (tmp_path / outcome.evidence).exists()

    def test_solver_tier(self):
        program = load_fixture("sorted_rotated.vt")
        vc = next(vc for vc in generate_vcs(program, "CheckSortedAndRotated")
                  if vc.id == "CheckSortedAndRotated.loop1.inv_bounds.entry.p1")
        solver = RecordingSolver("unsat")
        outcome = discharge(program, vc, Rng(0), solver=solver)
        assert outcome.tier is Tier.SMT
        assert outcome.evidence.startswith("sha256:")
        assert len(solver.scripts) == 1

    def test_sat_answer_leaves_residual(self):
        program = load_fixture("sorted_rotated.vt")
        vc = next(vc for vc in generate_vcs(program, "CheckSortedAndRotated")
                  if vc.id == "CheckSortedAndRotated.loop1.inv_bounds.entry.p1")
        outcome = discharge(program, vc, Rng(0), solver=RecordingSolver("sat"))
        assert outcome.status is OutcomeStatus.RESIDUAL


class TestSmtLib:
    def test_id(self):
        program = load_fixture("id.vt")
        (vc,) = generate_vcs(program, "Id")
        script = emit_smtlib(vc, program)
        assert script.logic == "QF_LIA"
        assert "(declare-const n Int)" in script.text
        assert "(assert (>= n 0))" in script.text
        assert "(assert (not (= n n)))" in script.text
        assert script.text.endswith("(check-sat)\n(exit)\n")

    def test_nat_side_condition_for_havoc_binder(self):
        program = load_fixture("arith.vt")
        (vc,) = [vc for vc in generate_vcs(program, "SumTo") if vc.id == "SumTo.loop1.bound.preserved.p1"]
        script = emit_smtlib(vc, program)
        assert "(assert (>= k_1 0))" in script.text
        assert "; invariant_bound" in script.text
        assert script.logic == "QF_NIA"

    def test_sequence_binder(self):
        program = load_fixture("sorted_rotated.vt")
        vc = next(vc for vc in generate_vcs(program, "CheckSortedAndRotated")
                  if vc.id == "CheckSortedAndRotated.loop1.inv_bounds.entry.p1")
        text = emit_smtlib(vc, program).text
        assert "(declare-const nums__len Int)" in text
        assert "(assert (>= nums__len 0))" in text

    def test_quantified_hypothesis(self):
        program = load_fixture("bounded_exists.vt")
        vc = next(vc for vc in generate_vcs(program, "FindPositive") if vc.kind is VcKind.POST_ON_EXIT)
        script = emit_smtlib(vc, program)
        assert script.logic == "UFLIA"
        assert "(forall " in script.text

    def test_count_range_with_symbolic_bounds(self):
        program = load_fixture("is_non_prime.vt")
        vc = next(vc for vc in generate_vcs(program, "IsNonPrime") if vc.kind is VcKind.POST_ON_EXIT)
        with pytest.raises(Unencodable):
            emit_smtlib(vc, program)

    def test_recursive_definition_on_symbolic_argument(self):
        program, vc = only_vc("""
        def fact (n : Nat) : Nat := if n = 0 then 1 else n * fact(n - 1)
        method F (n : Nat) return (r : Nat) ensures fact(r) ≥ 1 do return n end
        """, "F")
        with pytest.raises(Unencodable):
            emit_smtlib(vc, program)

    def test_recursive_definition_on_constant(self):
        program, vc = only_vc("""
        def fact (n : Nat) : Nat := if n = 0 then 1 else n * fact(n - 1)
        method F (n : Nat) return (r : Nat) ensures r + fact(4) ≥ 24 do return n end
        """, "F")
        assert "fact" not in emit_smtlib(vc, program).text

    def test_deterministic(self):
        program = load_fixture("arith.vt")
        for vc in generate_vcs(program, "SumTo", Mode.TOTAL):
            assert emit_smtlib(vc, program).text == emit_smtlib(vc, program).text


class TestResidualExport:
    def test_deterministic(self, tmp_path):
        program = load_fixture("sorted_rotated.vt")
        vc = generate_vcs(program, "CheckSortedAndRotated")[-1]
        a = export_residual(vc, tmp_path / "a").read_text()
        b = export_residual(vc, tmp_path / "b").read_text()
        assert a == b
        assert "# method: CheckSortedAndRotated" in a
        assert f"vc {vc.id}" in a


class TestVerdicts:
    def outcome(self, vc_id, status):
        return DischargeOutcome(vc_id, "PostOnReturn", status)

    def test_method_verdict(self):
        proved = self.outcome("M.a", OutcomeStatus.DISCHARGED)
        open_ = self.outcome("M.b", OutcomeStatus.RESIDUAL)
        bad = self.outcome("M.c", OutcomeStatus.REFUTED)
        assert method_verdict([proved]).kind is VerdictKind.FULLY_PROVEN
        assert method_verdict([]).kind is VerdictKind.FULLY_PROVEN
        assert method_verdict([proved, open_]).residual == ("M.b",)
        assert method_verdict([open_, bad, proved]).kind is VerdictKind.REFUTED
        assert method_verdict([open_, bad]).refuted == "M.c"

    def test_most_severe(self):
        assert most_severe([VerdictKind.FULLY_PROVEN, VerdictKind.PARTIALLY_PROVEN]) is VerdictKind.PARTIALLY_PROVEN
        assert most_severe([VerdictKind.PARTIALLY_PROVEN, VerdictKind.REFUTED]) is VerdictKind.REFUTED
        assert most_severe([VerdictKind.REFUTED, VerdictKind.SYNTHESIS_FAILURE]) is VerdictKind.SYNTHESIS_FAILURE
        assert most_severe([]) is None

    def test_exit_codes(self):
        assert [EXIT_CODES[k] for k in VerdictKind] == [0, 3, 1, 2]


class TestVerifyMethod:
    def test_id_fully_proven(self, tmp_path):
        report = verify_method(load_fixture("id.vt"), "Id", out_dir=tmp_path)
        assert report.verdict.kind is VerdictKind.FULLY_PROVEN
        assert [o.tier for o in report.outcomes] == [Tier.CONCRETE_EVAL]
        data = json.loads((tmp_path / "Id" / "verify.json").read_text())
        assert data["verdict"] == "FullyProven"
        assert data["config"]["verify"]["exhaustive_budget"] == 10 ** 4

    @pytest.mark.parametrize("method", ["Abs", "Max"])
    def test_bounded_methods_fully_proven(self, method):
        report = verify_method(load_fixture("arith.vt"), method)
        assert report.verdict.kind is VerdictKind.FULLY_PROVEN
        assert {o.tier for o in report.outcomes} == {Tier.EXHAUSTIVE}

    def test_sorted_rotated_partially_proven(self, tmp_path):
        report = verify_method(load_fixture("sorted_rotated.vt"), "CheckSortedAndRotated", Mode.TOTAL,
                               seed=7, out_dir=tmp_path)
        assert report.verdict.kind is VerdictKind.PARTIALLY_PROVEN
        assert report.verdict.residual
        for vc_id in report.verdict.residual:
            assert (tmp_path / "CheckSortedAndRotated" / f"{vc_id}.obligation.txt").exists()
        assert [o.vc_id for o in report.outcomes] == sorted(o.vc_id for o in report.outcomes)

    def test_bad_invariant_refuted(self, tmp_path):
        report = verify_method(load_fixture("sorted_rotated_bad_inv.vt"), "CheckSortedAndRotated",
                               out_dir=tmp_path)
        assert report.verdict.kind is VerdictKind.REFUTED
        assert report.verdict.refuted == "CheckSortedAndRotated.loop1.inv_drops_count.entry.p1"
        assert not list((tmp_path / "CheckSortedAndRotated").glob("*inv_drops_count.entry*.obligation.txt"))

    def test_missing_decreasing_is_synthesis_failure(self, tmp_path):
        program = parse("""
        method M (n : Nat) return (r : Nat) do
          let mut i : Nat := 0
          while i < n do i := i + 1 end
          return i
        end
        """)
        report = verify_method(program, "M", Mode.TOTAL, out_dir=tmp_path)
        assert report.verdict.kind is VerdictKind.SYNTHESIS_FAILURE
        assert report.outcomes == ()
        assert "decreasing" in report.verdict.reason
        assert (tmp_path / "M" / "verify.json").exists()

    def test_json_is_deterministic(self, tmp_path):
        program = load_fixture("sorted_rotated.vt")
        for d in ("a", "b"):
            verify_method(program, "CheckSortedAndRotated", Mode.TOTAL, seed=7, out_dir=tmp_path / d)
        a = (tmp_path / "a" / "CheckSortedAndRotated" / "verify.json").read_text()
        b = (tmp_path / "b" / "CheckSortedAndRotated" / "verify.json").read_text()
        assert a == b

    def test_solver_closes_encodable_conditions(self):
        solver = RecordingSolver("unsat")
        report = verify_method(load_fixture("sorted_rotated.vt"), "CheckSortedAndRotated", Mode.TOTAL,
                               solver=solver)
        tiers = {o.tier for o in report.outcomes}
        assert Tier.SMT in tiers
        assert solver.scripts
        # conditions mentioning countRange over the loop counter stay open
        assert report.verdict.kind is VerdictKind.PARTIALLY_PROVEN

    def test_no_solver_calls_after_refutation(self):
        solver = RecordingSolver("unsat")
        verify_method(load_fixture("sorted_rotated_bad_inv.vt"), "CheckSortedAndRotated", solver=solver)
        assert solver.scripts == []

    def test_keep_going_still_calls_solver(self):
        solver = RecordingSolver("unsat")
        report = verify_method(load_fixture("sorted_rotated_bad_inv.vt"), "CheckSortedAndRotated",
                               solver=solver, verify_cfg=VerifyConfig(keep_going=True))
        assert solver.scripts
        assert report.verdict.kind is VerdictKind.REFUTED

    def test_unavailable_solver_is_skipped(self, tmp_path):
        solver = SmtSolver(shlex.quote(str(tmp_path / "missing-solver")))
        report = verify_method(load_fixture("sorted_rotated.vt"), "CheckSortedAndRotated", solver=solver,
                               gen_cfg=GenConfig(trials=50))
        assert report.verdict.kind is VerdictKind.PARTIALLY_PROVEN
        assert Tier.SMT not in {o.tier for o in report.outcomes}


class TestSolverProcess:
    def test_parse_answer(self):
        assert parse_answer("\nunsat\n") == "unsat"
        assert parse_answer("unknown\n") == "unknown"
        with pytest.raises(ValueError):
            parse_answer('(error "line 3: unknown constant")\n')
        with pytest.raises(ValueError):
            parse_answer("")

    def test_empty_command(self):
        with pytest.raises(SolverUnavailable):
            SmtSolver("  ")

    @pytest.mark.asyncio
    async def test_unsat(self, tmp_path):
        answer = await SmtSolver(fake_solver(tmp_path, "unsat")).check("(check-sat)\n")
        assert answer.proved
        assert answer.digest.startswith("sha256:")
        assert "(check-sat)" in answer.transcript

    @pytest.mark.asyncio
    async def test_sat(self, tmp_path):
        answer = await SmtSolver(fake_solver(tmp_path, "sat")).check("(check-sat)\n")
        assert answer.verdict == "sat"
        assert not answer.proved

    @pytest.mark.asyncio
    async def test_error_output(self, tmp_path):
        solver = SmtSolver(fake_solver(tmp_path, '(error "unsupported logic")', exit_code=1))
        with pytest.raises(SolverError) as e:
            await solver.check("(check-sat)\n")
        assert "unsupported logic" in e.value.transcript

    @pytest.mark.asyncio
    async def test_timeout(self, tmp_path):
        solver = SmtSolver(fake_solver(tmp_path, "unsat", delay=2), timeout=0.2)
        answer = await solver.check("(check-sat)\n")
        assert answer.verdict == "timeout"
        assert not answer.proved

    @pytest.mark.asyncio
    async def test_missing_executable(self, tmp_path):
        solver = SmtSolver(shlex.quote(str(tmp_path / "no-such-solver")))
        with pytest.raises(SolverUnavailable):
            await solver.check("(check-sat)\n")

    @pytest.mark.asyncio
    async def test_check_all_keeps_order(self, tmp_path):
        script = tmp_path / "picky-solver"
        script.write_text("#!/bin/sh\nif grep -q want-sat; then echo sat; else echo unsat; fi\n")
        script.chmod(0o755)
        solver = SmtSolver(shlex.quote(str(script)), jobs=2)
        answers = await solver.check_all(["; want-sat\n", "; other\n", "; want-sat\n", "; other\n"])
        assert [a.verdict for a in answers] == ["sat", "unsat", "sat", "unsat"]

    @pytest.mark.asyncio
    async def test_check_all_returns_errors_in_place(self, tmp_path):
        good = SmtSolver(fake_solver(tmp_path, "unsat"))
        answers = await good.check_all(["a\n", "b\n"])
        assert all(isinstance(a, SolverAnswer) for a in answers)
        missing = SmtSolver(shlex.quote(str(tmp_path / "gone")))
        answers = await missing.check_all(["a\n"])
        assert isinstance(answers[0], SolverUnavailable)

    def test_run_all_through_pipeline(self, tmp_path):
        report = verify_method(load_fixture("sorted_rotated.vt"), "CheckSortedAndRotated",
                               solver=SmtSolver(fake_solver(tmp_path, "unsat"), jobs=2))
        assert Tier.SMT in {o.tier for o in report.outcomes}


@pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not installed")
class TestZ3:
    @pytest.fixture
    def solver(self):
        return SmtSolver("z3 -in", timeout=20)

    def test_successor_is_larger(self, solver):
        program, vc = only_vc("method S (n : Nat) return (r : Nat) ensures n + 1 > n do return n end", "S")
        outcome = discharge(program, vc, Rng(0), solver=solver)
        assert outcome.status is OutcomeStatus.DISCHARGED
        assert outcome.tier is Tier.SMT

    @pytest.mark.parametrize("fixture", ["arith.vt", "id.vt", "sorted_rotated.vt", "bounded_exists.vt"])
    def test_scripts_are_accepted(self, solver, fixture):
        program = load_fixture(fixture)
        scripts = []
        for m in program.methods:
            for vc in generate_vcs(program, m.name, Mode.TOTAL):
                try:
                    scripts.append(emit_smtlib(vc, program, VerifyConfig()).text)
                except Unencodable:
                    pass
        assert scripts
        for answer in solver.run_all(scripts):
            assert isinstance(answer, SolverAnswer), answer
            assert answer.verdict in ("sat", "unsat", "unknown", "timeout")
