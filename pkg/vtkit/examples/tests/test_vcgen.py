import pytest

from vtkit.errors import MissingDecreasing
from vtkit.sem.evaluator import Evaluator, Fuel
from vtkit.syntax.parser import parse
from vtkit.syntax.transform import free_vars
from vtkit.test import Box, load_fixture, vc_counterexample
from vtkit.vcgen import Mode, VcKind, generate_vcs, render_vc


@pytest.fixture(scope="module")
def non_prime():
    return load_fixture("is_non_prime.vt")


@pytest.fixture(scope="module")
def sorted_rotated():
    return load_fixture("sorted_rotated.vt")


class TestGenerate:
    def test_id(self):
        (vc,) = generate_vcs(load_fixture("id.vt"), "Id")
        assert vc.id == "Id.ret1.post_return.p1"
        assert vc.kind is VcKind.POST_ON_RETURN
        assert vc.hypotheses == ()
        assert "goal: n = n" in render_vc(vc)

    def test_is_non_prime_ids(self, non_prime):
        ids = [vc.id for vc in generate_vcs(non_prime, "IsNonPrime", Mode.TOTAL)]
        assert ids == [
            "IsNonPrime.ret1.post_return.p1",
            "IsNonPrime.loop1.inv_i.entry.p1",
            "IsNonPrime.loop1.inv_found.entry.p1",
            "IsNonPrime.loop1.measure.nonneg.p1",
            "IsNonPrime.loop1.inv_i.preserved.p1",
            "IsNonPrime.loop1.inv_found.preserved.p1",
            "IsNonPrime.loop1.measure.decreases.p1",
            "IsNonPrime.loop1.inv_i.preserved.p2",
            "IsNonPrime.loop1.inv_found.preserved.p2",
            "IsNonPrime.loop1.measure.decreases.p2",
            "IsNonPrime.ret2.post_exit.p1",
        ]

    def test_is_non_prime_kinds(self, non_prime):
        kinds = {vc.kind for vc in generate_vcs(non_prime, "IsNonPrime", Mode.TOTAL)}
        assert kinds == {
            VcKind.POST_ON_RETURN,
            VcKind.INVARIANT_ENTRY,
            VcKind.INVARIANT_PRESERVED,
            VcKind.POST_ON_EXIT,
            VcKind.MEASURE_DECREASES,
            VcKind.MEASURE_NON_NEGATIVE,
        }

    def test_partial_mode_has_no_measure_conditions(self, non_prime):
        kinds = {vc.kind for vc in generate_vcs(non_prime, "IsNonPrime", Mode.PARTIAL)}
        assert VcKind.MEASURE_DECREASES not in kinds
        assert VcKind.MEASURE_NON_NEGATIVE not in kinds

    def test_nat_measure_needs_no_nonneg_condition(self):
        kinds = {vc.kind for vc in generate_vcs(load_fixture("arith.vt"), "SumTo", Mode.TOTAL)}
        assert VcKind.MEASURE_DECREASES in kinds
        assert VcKind.MEASURE_NON_NEGATIVE not in kinds

    def test_is_non_prime_conditions_hold(self, non_prime):
        box = Box(nat_hi=30, int_lo=-2, int_hi=8)
        for vc in generate_vcs(non_prime, "IsNonPrime", Mode.TOTAL):
            assert vc_counterexample(non_prime, vc, box) is None, vc.id

    def test_havoc_binders(self, non_prime):
        vc = next(vc for vc in generate_vcs(non_prime, "IsNonPrime") if vc.kind is VcKind.POST_ON_EXIT)
        assert [b.name for b in vc.binders] == ["n", "found_1", "i_1"]
        assert [h.label for h in vc.hypotheses] == ["if_neg", "invariant_inv_i", "invariant_inv_found", "done"]

    def test_false_entry_condition(self):
        program = load_fixture("sorted_rotated_bad_inv.vt")
        (vc,) = [vc for vc in generate_vcs(program, "CheckSortedAndRotated")
                 if vc.id == "CheckSortedAndRotated.loop1.inv_drops_count.entry.p1"]
        evaluator = Evaluator(program, Fuel(10 ** 4))
        env = {"nums": (1, 2)}
        assert evaluator.outcome(vc.premise, env).is_true
        assert evaluator.outcome(vc.goal, env).is_false

    def test_sorted_rotated_conditions_hold(self, sorted_rotated):
        box = Box(nat_hi=4, int_lo=0, int_hi=4, max_len=3, elems=(0, 1, 2))
        for vc in generate_vcs(sorted_rotated, "CheckSortedAndRotated", Mode.TOTAL):
            assert vc_counterexample(sorted_rotated, vc, box) is None, vc.id

    def test_missing_decreasing(self):
        program = parse("""
        method M (n : Nat) return (r : Nat) do
          let mut i : Nat := 0
          while i < n do i := i + 1 end
          return i
        end
        """)
        assert len(generate_vcs(program, "M", Mode.PARTIAL)) == 1
        with pytest.raises(MissingDecreasing):
            generate_vcs(program, "M", Mode.TOTAL)

    def test_unknown_method(self, non_prime):
        with pytest.raises(KeyError):
            generate_vcs(non_prime, "Nope")

    def test_constant_branch_is_pruned(self):
        program = parse("""
        method C (n : Nat) return (r : Nat) ensures r = n do
          if 1 < 2 then return n else return 0 end
        end
        """)
        (vc,) = generate_vcs(program, "C")
        assert vc.id == "C.ret1.post_return.p1"


class TestRender:
    def test_post_exit_mentions_invariants(self, sorted_rotated):
        vcs = generate_vcs(sorted_rotated, "CheckSortedAndRotated")
        (exit_vc,) = [vc for vc in vcs if vc.kind is VcKind.POST_ON_EXIT]
        text = render_vc(exit_vc)
        assert "invariant_inv_bounds" in text
        assert "invariant_inv_drops_count" in text
        assert text.startswith(f"vc {exit_vc.id}\n")

    def test_distinct_conditions_render_differently(self, non_prime, sorted_rotated):
        vcs = generate_vcs(non_prime, "IsNonPrime", Mode.TOTAL) + \
            generate_vcs(sorted_rotated, "CheckSortedAndRotated", Mode.TOTAL)
        assert len({render_vc(vc) for vc in vcs}) == len(vcs)

    def test_stable(self, sorted_rotated):
        a = [render_vc(vc) for vc in generate_vcs(sorted_rotated, "CheckSortedAndRotated", Mode.TOTAL)]
        b = [render_vc(vc) for vc in generate_vcs(sorted_rotated, "CheckSortedAndRotated", Mode.TOTAL)]
        assert a == b

    @pytest.mark.parametrize("fixture,method", [
        ("is_non_prime.vt", "IsNonPrime"),
        ("sorted_rotated.vt", "CheckSortedAndRotated"),
        ("arith.vt", "SumTo"),
        ("bounded_exists.vt", "FindFirstPositive"),
    ])
    def test_binders_are_exactly_the_free_variables(self, fixture, method):
        program = load_fixture(fixture)
        for vc in generate_vcs(program, method, Mode.TOTAL):
            assert free_vars(vc.formula) == {b.name for b in vc.binders}, vc.id


FIXTURES = ["id.vt", "arith.vt", "is_non_prime.vt", "sorted_rotated.vt", "sorted_rotated_bad_inv.vt",
            "bounded_exists.vt"]


class TestModes:
    @pytest.mark.parametrize("fixture", FIXTURES)
    def test_partial_conditions_are_among_total_ones(self, fixture):
        program = load_fixture(fixture)
        for m in program.methods:
            partial = {vc.id for vc in generate_vcs(program, m.name, Mode.PARTIAL)}
            try:
                total = {vc.id for vc in generate_vcs(program, m.name, Mode.TOTAL)}
            except MissingDecreasing:
                continue
            assert partial <= total, (m.name, sorted(partial - total))

    def test_total_adds_only_measure_conditions(self, non_prime):
        partial = {vc.id for vc in generate_vcs(non_prime, "IsNonPrime", Mode.PARTIAL)}
        extra = [vc for vc in generate_vcs(non_prime, "IsNonPrime", Mode.TOTAL) if vc.id not in partial]
        assert extra
        assert {vc.kind for vc in extra} <= {VcKind.MEASURE_DECREASES, VcKind.MEASURE_NON_NEGATIVE}
