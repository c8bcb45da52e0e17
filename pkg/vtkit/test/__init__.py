"""Helpers for the test suite.

Packaged fixtures, finite stand-ins for every type, brute-force oracles that
share no code with the interpreter, and a scriptable stand-in for an SMT
solver executable.
"""
import itertools
import shlex
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import pkg_resources

from vtkit.errors import FuelExhausted
from vtkit.harness import TrialFailure, Unevaluable, replay
from vtkit.sem.evaluator import Evaluator, Fuel
from vtkit.sem.values import Value
from vtkit.syntax.ast import Program, SemType
from vtkit.util.config import GenConfig
from vtkit.util.load_program import load_program
from vtkit.vcgen import Mode, VerificationCondition

FIXTURES = "vtkit.examples.vt"


def load_fixture(vt_filename: str) -> Program:
    return load_program(vt_filename, FIXTURES)


def fixture_path(filename: str) -> str:
    return pkg_resources.resource_filename(FIXTURES, filename)


@dataclass(frozen=True)
class Box:
    """A finite range for each type.

    Nat ranges over [0, nat_hi], Int over [int_lo, int_hi], Bool over both
    values, and collections over every sequence of `elems` up to `max_len`.
    """

    nat_hi: int = 6
    int_lo: int = -6
    int_hi: int = 6
    max_len: int = 3
    elems: Tuple[int, ...] = (0, 1, 2)

    def values(self, t: SemType) -> List[Any]:
        kind = t.kind
        if kind == "Bool":
            return [False, True]
        if kind == "Nat":
            return list(range(0, self.nat_hi + 1))
        if kind == "Int":
            return list(range(self.int_lo, self.int_hi + 1))
        if kind == "Pair":
            return list(itertools.product(self.values(t.args[0]), self.values(t.args[1])))
        if kind in ("Array", "List") and t.elem.is_numeric:
            elems = [e for e in self.elems if t.elem.kind == "Int" or e >= 0]
            out: List[Any] = []
            for n in range(self.max_len + 1):
                out.extend(itertools.product(elems, repeat=n))
            return out
        raise ValueError(f"no finite range for {t}")

    def assignments(self, binders: Sequence[Tuple[str, SemType]]) -> Iterator[Dict[str, Any]]:
        names = [n for n, _ in binders]
        for combo in itertools.product(*(self.values(t) for _, t in binders)):
            yield dict(zip(names, combo))


def input_domain(program: Program, method: str, box: Box, fuel: int = 10 ** 4) -> List[List[Value]]:
    """Every input in the box that satisfies the precondition."""
    m = program.find_method(method)
    evaluator = Evaluator(program, Fuel(fuel))
    out = []
    for env in box.assignments([(p.name, p.type) for p in m.params]):
        evaluator.fuel = Fuel(fuel)
        if evaluator.outcome(m.pre, env).is_true:
            out.append([Value(p.type, env[p.name]) for p in m.params])
    return out


def runtime_violations(program: Program, method: str, inputs: Sequence[Sequence[Value]],
                       cfg: GenConfig, mode: Mode = Mode.PARTIAL) -> List[TrialFailure]:
    """Run every input with annotation checks on; runs that cannot finish are skipped."""
    m = program.find_method(method)
    failures = []
    for values in inputs:
        try:
            failure = replay(program, m, values, mode, cfg)
        except (FuelExhausted, Unevaluable):
            continue
        if failure is not None:
            failures.append(failure)
    return failures


def vc_counterexample(program: Program, vc: VerificationCondition, box: Box,
                      fuel: int = 10 ** 4) -> Optional[Dict[str, Any]]:
    """First binder assignment in the box with every hypothesis true and the goal false."""
    evaluator = Evaluator(program, Fuel(fuel))
    for env in box.assignments([(b.name, b.type) for b in vc.binders]):
        evaluator.fuel = Fuel(fuel)
        if not evaluator.outcome(vc.premise, env).is_true:
            continue
        evaluator.fuel = Fuel(fuel)
        if evaluator.outcome(vc.goal, env).is_false:
            return env
    return None


# oracles


def cyclic_drops(nums: Sequence[int]) -> int:
    n = len(nums)
    return sum(1 for k in range(n) if nums[(k + 1) % n] < nums[k])


def is_sorted_rotation(nums: Sequence[int]) -> bool:
    nums = list(nums)
    if not nums:
        return True
    for r in range(len(nums)):
        rotated = nums[r:] + nums[:r]
        if all(a <= b for a, b in zip(rotated, rotated[1:])):
            return True
    return False


def is_non_prime(n: int) -> bool:
    return n < 2 or any(n % d == 0 for d in range(2, n))


# solver stand-in


def fake_solver(directory: Path, answer: str = "unsat", delay: float = 0, exit_code: int = 0) -> str:
    """Write an executable that swallows its stdin and prints `answer`; returns its command line."""
    script = Path(directory) / "fake-solver"
    lines = ["#!/bin/sh", "cat > /dev/null"]
    if delay:
        lines.append(f"sleep {delay}")
    lines += [f"printf '%s\\n' {shlex.quote(answer)}", f"exit {exit_code}"]
    script.write_text("\n".join(lines) + "\n")
    script.chmod(0o755)
    return shlex.quote(str(script))
