import json

import pytest
from click.testing import CliRunner

from vtkit.cmds.cli import cli
from vtkit.test import fixture_path


@pytest.fixture
def runner():
    return CliRunner()


def vt(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


class TestCheck:
    def test_ok(self, runner):
        result = vt(runner, "check", fixture_path("is_non_prime.vt"))
        assert result.exit_code == 0
        assert "1 method, 2 defs, 2 invariants" in result.output

    def test_missing_file(self, runner, tmp_path):
        result = vt(runner, "check", tmp_path / "nope.vt")
        assert result.exit_code == 2

    def test_duplicate_labels(self, runner, tmp_path):
        source = tmp_path / "dup.vt"
        source.write_text(
            "method M (n : Nat) return (r : Nat) do\n"
            "  let mut i : Nat := 0\n"
            '  while i < n invariant "a" i <= n invariant "a" i >= 0 do i := i + 1 end\n'
            "  return i\n"
            "end\n"
        )
        result = vt(runner, "check", source)
        assert result.exit_code == 1
        assert f"{source}:3:" in result.output

    def test_syntax_error(self, runner, tmp_path):
        source = tmp_path / "bad.vt"
        source.write_text("method M (n : Nat) return (r : Nat) do\n  return n +\nend\n")
        result = vt(runner, "check", source)
        assert result.exit_code == 1
        assert "error" in result.output


class TestRun:
    @pytest.mark.parametrize("n,expected", [("42", "true"), ("7", "false"), ("1", "true")])
    def test_is_non_prime(self, runner, n, expected):
        result = vt(runner, "run", fixture_path("is_non_prime.vt"), "IsNonPrime", n)
        assert result.exit_code == 0
        assert result.output.strip() == expected

    def test_source_syntax_argument(self, runner):
        result = vt(runner, "run", fixture_path("sorted_rotated.vt"), "CheckSortedAndRotated", "#[4, 1, 2, 3]")
        assert result.exit_code == 0
        assert result.output.strip() == "true"

    def test_json_arguments(self, runner):
        result = vt(runner, "run", fixture_path("sorted_rotated.vt"), "CheckSortedAndRotated",
                    "--args-json", "[[2, 1, 3, 4]]")
        assert result.exit_code == 0
        assert result.output.strip() == "false"

    def test_id(self, runner):
        result = vt(runner, "run", fixture_path("id.vt"), "Id", "0")
        assert result.output.strip() == "0"

    def test_bad_argument(self, runner):
        result = vt(runner, "run", fixture_path("id.vt"), "Id", "--args-json", "[-3]")
        assert result.exit_code == 1

    def test_unknown_method(self, runner):
        result = vt(runner, "run", fixture_path("id.vt"), "Nope")
        assert result.exit_code == 2


class TestTestSpec:
    def cases(self):
        return fixture_path("sorted_rotated_cases.json")

    def test_weak_spec_fails(self, runner):
        result = vt(runner, "test-spec", fixture_path("sorted_rotated_spec.vt"), "weak", "-c", self.cases())
        assert result.exit_code == 1
        assert "the postcondition also accepts false" in result.output

    def test_strong_spec_passes(self, runner):
        result = vt(runner, "test-spec", fixture_path("sorted_rotated_spec.vt"), "strong", "-c", self.cases(),
                    "--trials", "50")
        assert result.exit_code == 0

    def test_explicit_pre_and_post(self, runner):
        result = vt(runner, "test-spec", fixture_path("sorted_rotated_spec.vt"), "--pre", "strong_pre",
                    "--post", "strong_post", "-c", self.cases(), "--trials", "20")
        assert result.exit_code == 0

    def test_no_cases(self, runner):
        result = vt(runner, "test-spec", fixture_path("sorted_rotated_spec.vt"), "strong", "-c", "[]")
        assert result.exit_code == 2
        assert "no cases" in result.output

    def test_json_report(self, runner, tmp_path):
        result = vt(runner, "test-spec", fixture_path("sorted_rotated_spec.vt"), "weak", "-c", self.cases(),
                    "--format", "json", "-o", tmp_path)
        data = json.loads(result.output)
        assert data["status"] == "fail"
        assert (tmp_path / "weak.spec.json").exists()

    def test_unknown_spec(self, runner):
        result = vt(runner, "test-spec", fixture_path("sorted_rotated_spec.vt"), "medium", "-c", self.cases())
        assert result.exit_code == 2


class TestTest:
    def test_correct_method(self, runner):
        result = vt(runner, "test", fixture_path("sorted_rotated.vt"), "--trials", "100")
        assert result.exit_code == 0
        assert "PASS" in result.output

    def test_bad_invariant(self, runner, tmp_path):
        result = vt(runner, "test", fixture_path("sorted_rotated_bad_inv.vt"), "--trials", "200", "-o", tmp_path)
        assert result.exit_code == 1
        assert 'invariant "inv_drops_count"' in result.output
        data = json.loads((tmp_path / "CheckSortedAndRotated.test.json").read_text())
        assert data["failures"][0]["label"] == "inv_drops_count"

    def test_seed_from_environment(self, runner):
        args = ["test", fixture_path("arith.vt"), "-m", "Max", "--trials", "20", "--format", "json"]
        a = runner.invoke(cli, args, env={"VTKIT_SEED": "9"})
        b = runner.invoke(cli, args + ["--seed", "9"])
        assert json.loads(a.output)[0]["seed"] == 9
        assert a.output == b.output

    def test_unknown_method(self, runner):
        result = vt(runner, "test", fixture_path("arith.vt"), "-m", "Nope")
        assert result.exit_code == 2


class TestVcgen:
    def test_print(self, runner):
        result = vt(runner, "vcgen", fixture_path("id.vt"))
        assert result.exit_code == 0
        assert "vc Id.ret1.post_return.p1" in result.output
        assert "goal: n = n" in result.output

    def test_write(self, runner, tmp_path):
        result = vt(runner, "vcgen", fixture_path("is_non_prime.vt"), "--mode", "total", "-o", tmp_path)
        assert result.exit_code == 0
        index = json.loads((tmp_path / "vcs.json").read_text())
        assert len(index) == 11
        assert f"wrote {len(index)} verification conditions" in result.output
        for entry in index:
            assert (tmp_path / f"{entry['id']}.vc.txt").exists()

    def test_missing_decreasing(self, runner, tmp_path):
        source = tmp_path / "loop.vt"
        source.write_text(
            "method M (n : Nat) return (r : Nat) do\n"
            "  let mut i : Nat := 0\n"
            "  while i < n do i := i + 1 end\n"
            "  return i\n"
            "end\n"
        )
        assert vt(runner, "vcgen", source).exit_code == 0
        assert vt(runner, "vcgen", source, "--mode", "total").exit_code == 1


class TestVerify:
    def test_fully_proven(self, runner, tmp_path):
        result = vt(runner, "verify", fixture_path("id.vt"), "-o", tmp_path)
        assert result.exit_code == 0
        assert "FullyProven" in result.output
        assert (tmp_path / "Id" / "verify.json").exists()

    def test_refuted(self, runner, tmp_path):
        result = vt(runner, "verify", fixture_path("sorted_rotated_bad_inv.vt"), "-o", tmp_path)
        assert result.exit_code == 1
        assert "Refuted" in result.output
        assert "nums = #[" in result.output

    def test_partially_proven(self, runner, tmp_path):
        result = vt(runner, "verify", fixture_path("sorted_rotated.vt"), "-o", tmp_path, "--mode", "total")
        assert result.exit_code == 3
        assert list((tmp_path / "CheckSortedAndRotated").glob("*.obligation.txt"))

    def test_json_is_deterministic(self, runner, tmp_path):
        outputs = [
            vt(runner, "verify", fixture_path("sorted_rotated.vt"), "-o", tmp_path / d, "--seed", "7",
               "--format", "json").output
            for d in ("a", "b")
        ]
        assert outputs[0] == outputs[1]
        (data,) = json.loads(outputs[0])
        assert data["seed"] == 7

    def test_most_severe_exit_code(self, runner, tmp_path):
        result = vt(runner, "verify", fixture_path("arith.vt"), "-m", "Abs", "-m", "SumTo", "-o", tmp_path)
        assert result.exit_code in (0, 3)
        statuses = {m: json.loads((tmp_path / m / "verify.json").read_text())["verdict"] for m in ("Abs", "SumTo")}
        assert statuses["Abs"] == "FullyProven"
        assert result.exit_code == (0 if statuses["SumTo"] == "FullyProven" else 3)

    def test_type_error_is_synthesis_failure(self, runner, tmp_path):
        source = tmp_path / "bad.vt"
        source.write_text("method M (n : Nat) return (r : Bool) do return n end\n")
        result = vt(runner, "verify", source, "-o", tmp_path / "out")
        assert result.exit_code == 2

    def test_fake_solver(self, runner, tmp_path):
        from vtkit.test import fake_solver

        result = vt(runner, "verify", fixture_path("sorted_rotated.vt"), "-o", tmp_path / "out",
                    "--smt-cmd", fake_solver(tmp_path, "unsat"), "--format", "json")
        (data,) = json.loads(result.output)
        assert "Smt" in {vc.get("tier") for vc in data["vcs"]}


class TestReport:
    def test_summary(self, runner, tmp_path):
        vt(runner, "verify", fixture_path("id.vt"), "-o", tmp_path)
        vt(runner, "verify", fixture_path("sorted_rotated_bad_inv.vt"), "-o", tmp_path)
        result = vt(runner, "report", tmp_path, "--format", "json")
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["total"] == 2
        assert data["counts"]["FullyProven"] == 1
        assert data["counts"]["Refuted"] == 1

    def test_human(self, runner, tmp_path):
        vt(runner, "verify", fixture_path("id.vt"), "-o", tmp_path)
        result = vt(runner, "report", tmp_path)
        assert "fully proven" in result.output
        assert "100.0%" in result.output

    def test_nothing_found(self, runner, tmp_path):
        result = vt(runner, "report", tmp_path)
        assert result.exit_code == 2


class TestConfigFile:
    def test_unknown_key(self, runner, tmp_path):
        cfg = tmp_path / "vtkit.toml"
        cfg.write_text("[gen]\ntrails = 5\n")
        result = vt(runner, "--config", cfg, "test", fixture_path("id.vt"))
        assert result.exit_code == 2
        assert "configuration error" in result.output

    def test_values_are_used(self, runner, tmp_path):
        cfg = tmp_path / "vtkit.toml"
        cfg.write_text("[gen]\ntrials = 7\n")
        result = vt(runner, "--config", cfg, "test", fixture_path("id.vt"), "--format", "json")
        assert json.loads(result.output)[0]["trials"] == 7

    def test_flags_override_file(self, runner, tmp_path):
        cfg = tmp_path / "vtkit.toml"
        cfg.write_text("[gen]\ntrials = 7\n")
        result = vt(runner, "--config", cfg, "test", fixture_path("id.vt"), "--trials", "3", "--format", "json")
        assert json.loads(result.output)[0]["trials"] == 3

    def test_rejection_budget_flag(self, runner):
        result = runner.invoke(cli, ["test", "--stdin", "--rejection-budget", "5"],
                               input="method M (n : Nat) return (r : Nat) require n > 1000 do return n end\n")
        assert result.exit_code == 2
        assert "in 5 attempts" in result.output


class TestStdin:
    SOURCE = fixture_path("is_non_prime.vt")

    def source(self):
        with open(self.SOURCE, encoding="utf8") as fh:
            return fh.read()

    def test_check(self, runner):
        result = runner.invoke(cli, ["check", "--stdin"], input=self.source())
        assert result.exit_code == 0
        assert "<stdin>: 1 method, 2 defs, 2 invariants" in result.output

    def test_run(self, runner):
        result = runner.invoke(cli, ["run", "--stdin", "IsNonPrime", "42"], input=self.source())
        assert result.exit_code == 0
        assert result.output.strip() == "true"

    def test_test_spec(self, runner):
        with open(fixture_path("sorted_rotated_spec.vt"), encoding="utf8") as fh:
            source = fh.read()
        result = runner.invoke(cli, ["test-spec", "--stdin", "weak", "-c", fixture_path("sorted_rotated_cases.json")],
                               input=source)
        assert result.exit_code == 1

    def test_verify(self, runner, tmp_path):
        result = runner.invoke(cli, ["verify", "--stdin", "-o", str(tmp_path)], input="method Id (n : Nat)\n"
                               "  return (r : Nat) ensures r = n do return n end\n")
        assert result.exit_code == 0
        assert (tmp_path / "Id" / "verify.json").exists()

    def test_diagnostics_name_stdin(self, runner):
        result = runner.invoke(cli, ["check", "--stdin"], input="method M (n : Nat) return (r : Bool) do\n  return n\nend\n")
        assert result.exit_code == 1
        assert "<stdin>:2:" in result.output

    def test_file_and_stdin_conflict(self, runner):
        result = runner.invoke(cli, ["check", "--stdin", self.SOURCE], input=self.source())
        assert result.exit_code == 2

    def test_neither_file_nor_stdin(self, runner):
        assert runner.invoke(cli, ["check"]).exit_code == 2


class TestLargeIntegers:
    DIGITS = "9" * 5000

    def test_check_long_literal(self, runner, tmp_path):
        source = tmp_path / "big.vt"
        source.write_text(f"def f : Nat := {self.DIGITS}\n")
        result = vt(runner, "check", source)
        assert result.exit_code == 0
        assert "0 methods, 1 def" in result.output

    def test_run_long_argument(self, runner):
        result = vt(runner, "run", fixture_path("id.vt"), "Id", self.DIGITS)
        assert result.exit_code == 0
        assert result.output.strip() == self.DIGITS
