import pytest

from vtkit.errors import DuplicateNameError, UnresolvedNameError, VtError, VtSyntaxError, VtTypeError
from vtkit.sem.evaluator import eval_pure
from vtkit.syntax.ast import BoolLit, IntLit, Unary, Var
from vtkit.syntax.parser import parse
from vtkit.syntax.printer import print_program
from vtkit.syntax.transform import fold_constants, free_vars, subst
from vtkit.test import load_fixture

ID_SOURCE = "method Id (n : Nat) return (r : Nat) ensures r = n do return n"


class TestParse:
    def test_minimal_method(self):
        program = parse(ID_SOURCE)
        assert len(program.methods) == 1
        assert program.methods[0].name == "Id"
        assert list(program.methods[0].loops()) == []

    def test_long_integer_literal(self):
        big = 10 ** 5000 - 1
        program = parse("def f : Nat := " + "9" * 5000)
        assert program.defs[0].body == IntLit(big)
        assert eval_pure(program, "f", []).payload == big

    def test_is_non_prime_has_two_invariants(self):
        program = load_fixture("is_non_prime.vt")
        (loop,) = program.find_method("IsNonPrime").loops()
        assert [inv.label for inv in loop.invariants] == ["inv_i", "inv_found"]
        assert loop.decreasing is not None

    def test_assignment_to_undeclared_name(self):
        with pytest.raises((VtSyntaxError, VtTypeError)):
            parse("method M (n : Nat) return (r : Nat) do x := 1 return n end")

    def test_assignment_to_immutable_local(self):
        with pytest.raises(VtTypeError):
            parse("method M (n : Nat) return (r : Nat) do let x := 1 x := 2 return x end")

    def test_syntax_error_has_position(self):
        with pytest.raises(VtSyntaxError) as e:
            parse("method M (n : Nat) return (r : Nat) do return n +\nend")
        assert e.value.line == 2

    def test_duplicate_invariant_labels(self):
        source = """
        method M (n : Nat) return (r : Nat) do
          let mut i : Nat := 0
          while i < n invariant "a" i ≤ n invariant "a" i ≥ 0 do i := i + 1 end
          return i
        end
        """
        with pytest.raises(DuplicateNameError):
            parse(source)

    def test_unlabelled_invariants_are_numbered(self):
        source = """
        method M (n : Nat) return (r : Nat) do
          let mut i : Nat := 0
          while i < n invariant i ≤ n invariant i ≥ 0 do i := i + 1 end
          return i
        end
        """
        (loop,) = parse(source).methods[0].loops()
        assert [inv.label for inv in loop.invariants] == ["invariant_1", "invariant_2"]

    def test_unresolved_name(self):
        with pytest.raises(UnresolvedNameError):
            parse("method M (n : Nat) return (r : Nat) ensures r = m do return n end")

    def test_requires_cannot_mention_returns(self):
        with pytest.raises(UnresolvedNameError):
            parse("method M (n : Nat) return (r : Nat) require r = 0 do return n end")

    def test_quantifier_not_allowed_in_body(self):
        with pytest.raises(VtTypeError):
            parse("method M (n : Nat) return (r : Bool) do return ∀ i, i < n → i ≥ 0 end")

    def test_missing_return_path(self):
        with pytest.raises(VtTypeError):
            parse("method M (n : Nat) return (r : Nat) do if n > 0 then return n end end")

    def test_recursion_must_decrease(self):
        ok = "def fact (n : Nat) : Nat := if n = 0 then 1 else n * fact(n - 1)"
        assert parse(ok).find_def("fact").recursive
        with pytest.raises(VtTypeError):
            parse("def loop (n : Nat) : Nat := loop(n + 1)")

    def test_ascii_operators(self):
        a = parse("def f (a b : Bool) : Bool := not a && b || a -> b <-> a")
        b = parse("def f (a b : Bool) : Bool := ¬ a ∧ b ∨ a → b ↔ a")
        assert a == b

    def test_quantifier_type_defaults_to_nat(self):
        program = parse("def p (n : Nat) : Prop := ∀ i, i < n → i ≥ 0")
        assert str(program.find_def("p").body.type) == "Nat"

    @pytest.mark.parametrize("fixture", [
        "id.vt", "is_non_prime.vt", "sorted_rotated.vt", "sorted_rotated_bad_inv.vt",
        "sorted_rotated_spec.vt", "arith.vt", "bounded_exists.vt",
    ])
    def test_fixtures_type_check(self, fixture):
        try:
            load_fixture(fixture)
        except VtError as e:
            pytest.fail(f"{fixture}: {e}")


class TestPrint:
    @pytest.mark.parametrize("fixture", ["id.vt", "is_non_prime.vt", "sorted_rotated.vt", "arith.vt"])
    def test_round_trip(self, fixture):
        program = load_fixture(fixture)
        assert parse(print_program(program)) == program

    def test_deterministic(self):
        program = load_fixture("sorted_rotated.vt")
        assert print_program(program) == print_program(program)

    def test_invariant_labels_in_order(self):
        text = print_program(load_fixture("sorted_rotated.vt"))
        positions = [text.index(f'"{label}"') for label in
                     ("inv_bounds", "inv_n_def", "inv_n_pos", "inv_drops_count")]
        assert positions == sorted(positions)


class TestTransform:
    def test_free_vars(self):
        program = parse("method Id (n : Nat) return (r : Nat) ensures r = n do return n end")
        assert free_vars(program.methods[0].post) == {"r", "n"}

    def test_free_vars_skip_bound_names(self):
        body = load_fixture("sorted_rotated.vt").find_def("rotSortedProp").body
        assert free_vars(body) == {"nums"}

    def test_closed_formula(self):
        program = parse("def p : Prop := 2 + 2 = 4")
        assert free_vars(program.find_def("p").body) == set()

    def test_subst_avoids_capture(self):
        body = parse("def p (n : Nat) : Prop := ∃ i, i < n").find_def("p").body
        renamed = subst(body, {"n": Var("i")})
        assert free_vars(renamed) == {"i"}
        assert renamed.var != "i"

    def test_fold_negative_literal(self):
        assert fold_constants(Unary("neg", IntLit(20))) == IntLit(-20)

    def test_fold_nat_subtraction_truncates(self):
        body = parse("def z : Nat := 2 - 5").find_def("z").body
        assert fold_constants(body) == IntLit(0)
        body = parse("def z : Int := -2 - 3").find_def("z").body
        assert fold_constants(body) == IntLit(-5)

    def test_fold_connectives(self):
        body = parse("def p (b : Bool) : Bool := true ∧ b").find_def("p").body
        assert fold_constants(body) == Var("b")
        body = parse("def p (b : Bool) : Bool := false → b").find_def("p").body
        assert fold_constants(body) == BoolLit(True)
