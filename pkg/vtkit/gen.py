"""Seeded value generation, type-directed mutation and shrinking."""
import hashlib
import logging
import random
from typing import Any, Callable, Iterator, List, Sequence, Tuple

from vtkit.errors import PreconditionExhausted
from vtkit.sem.evaluator import Evaluator, Fuel
from vtkit.sem.values import Value
from vtkit.syntax.ast import Expr, Program, SemType
from vtkit.util.config import GenConfig

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
DELTAS = (-3, -2, -1, 1, 2, 3)
PRINTABLE_LO, PRINTABLE_SIZE = 32, 95
MAX_SHRINK_STEPS = 1000
MAX_FRESH_RETRIES = 64


class Rng:
    """A deterministic stream that can be split into independent sub-streams."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._random = random.Random(self.seed)

    def split(self, index: int) -> "Rng":
        digest = hashlib.blake2b(f"{self.seed}:{index}".encode(), digest_size=8).digest()
        return Rng(int.from_bytes(digest, "big"))

    def randint(self, lo: int, hi: int) -> int:
        return self._random.randint(lo, hi)

    def random(self) -> float:
        return self._random.random()

    def choice(self, seq: Sequence[Any]) -> Any:
        return self._random.choice(seq)

    def index(self, n: int) -> int:
        return self._random.randrange(n)


# sampling


def sample_payload(t: SemType, rng: Rng, cfg: GenConfig) -> Any:
    kind = t.kind
    if kind == "Bool":
        return rng.random() < 0.5
    if kind == "Nat":
        return rng.randint(0, cfg.int_magnitude)
    if kind == "Int":
        return rng.randint(-cfg.int_magnitude, cfg.int_magnitude)
    if kind == "Char":
        return chr(PRINTABLE_LO + rng.index(PRINTABLE_SIZE))
    if kind == "String":
        return "".join(chr(PRINTABLE_LO + rng.index(PRINTABLE_SIZE)) for _ in range(rng.randint(0, cfg.size_bound)))
    if kind == "Pair":
        return (sample_payload(t.args[0], rng, cfg), sample_payload(t.args[1], rng, cfg))
    if kind in ("Array", "List"):
        return tuple(sample_payload(t.args[0], rng, cfg) for _ in range(rng.randint(0, cfg.size_bound)))
    raise ValueError(f"cannot sample values of type {t}")


def sample(t: SemType, rng: Rng, cfg: GenConfig) -> Value:
    return Value(t, sample_payload(t, rng, cfg))


def sample_satisfying(program: Program, params: Sequence[Tuple[str, SemType]], pre: Expr, rng: Rng,
                      cfg: GenConfig) -> List[Value]:
    """Rejection sampling against `pre`; errors while evaluating count as rejections."""
    evaluator = Evaluator(program, Fuel(cfg.fuel))
    for attempt in range(1, cfg.rejection_budget + 1):
        payloads = [sample_payload(t, rng, cfg) for _, t in params]
        evaluator.fuel = Fuel(cfg.fuel)
        outcome = evaluator.outcome(pre, {name: p for (name, _), p in zip(params, payloads)})
        if outcome.is_true:
            return [Value(t, p) for (_, t), p in zip(params, payloads)]
    log.info("precondition rejected all %d samples", cfg.rejection_budget)
    raise PreconditionExhausted(cfg.rejection_budget)


# mutation


def _delta(rng: Rng) -> int:
    return rng.choice(DELTAS)


def mutate_payload(t: SemType, p: Any, rng: Rng, cfg: GenConfig) -> Any:
    """One type-directed change; the result always differs from `p`."""
    kind = t.kind
    if kind == "Bool":
        return not p
    if kind == "Nat":
        d = _delta(rng)
        return p + d if p + d >= 0 else p + abs(d)
    if kind == "Int":
        if p != 0 and rng.random() < 0.25:
            return -p
        return p + _delta(rng)
    if kind == "Char":
        return chr(PRINTABLE_LO + (ord(p) - PRINTABLE_LO + _delta(rng)) % PRINTABLE_SIZE)
    if kind == "Pair":
        a, b = t.args
        if a == b and p[0] != p[1] and rng.random() < 1 / 3:
            return (p[1], p[0])
        if rng.random() < 0.5:
            return (mutate_payload(a, p[0], rng, cfg), p[1])
        return (p[0], mutate_payload(b, p[1], rng, cfg))
    if kind in ("Array", "List", "String"):
        return _mutate_sequence(t, p, rng, cfg)
    raise ValueError(f"cannot mutate values of type {t}")


def _mutate_sequence(t: SemType, p: Any, rng: Rng, cfg: GenConfig) -> Any:
    items = list(p)
    ops = ["insert"] + (["element", "delete"] if items else [])
    op = rng.choice(ops)
    if op == "element":
        i = rng.index(len(items))
        items[i] = mutate_payload(t.elem, items[i], rng, cfg)
    elif op == "delete":
        del items[rng.index(len(items))]
    else:
        items.insert(rng.index(len(items) + 1), sample_payload(t.elem, rng, cfg))
    return "".join(items) if t.kind == "String" else tuple(items)


def mutate(v: Value, rng: Rng, cfg: GenConfig) -> Value:
    return Value(v.type, mutate_payload(v.type, v.payload, rng, cfg))


def iter_mutants(v: Value, rng: Rng, cfg: GenConfig) -> Iterator[Value]:
    """Endless stream of values other than `v`: mutants of v mixed with fresh samples.

    Candidate i only depends on `rng.split(i)`, so a longer stream extends a
    shorter one.
    """
    index = 0
    while True:
        r = rng.split(index)
        index += 1
        if r.random() < cfg.mutant_ratio:
            yield mutate(v, r, cfg)
            continue
        for _ in range(MAX_FRESH_RETRIES):
            fresh = sample(v.type, r, cfg)
            if fresh != v:
                break
        else:
            fresh = mutate(v, r, cfg)
        yield fresh


def mutant_stream(v: Value, k: int, rng: Rng, cfg: GenConfig) -> List[Value]:
    if k <= 0:
        raise ValueError("k must be positive")
    stream = iter_mutants(v, rng, cfg)
    return [next(stream) for _ in range(k)]


# shrinking


def size_of(t: SemType, p: Any) -> Tuple[int, int, int]:
    """(total collection length, total integer magnitude, negatives and trues)."""
    kind = t.kind
    if kind == "Bool":
        return (0, 0, int(p))
    if kind in ("Nat", "Int"):
        return (0, abs(p), int(p < 0))
    if kind == "Char":
        return (0, 0, 0)
    if kind == "String":
        return (len(p), 0, 0)
    if kind == "Pair":
        return _add(size_of(t.args[0], p[0]), size_of(t.args[1], p[1]))
    total = (len(p), 0, 0)
    for x in p:
        total = _add(total, size_of(t.args[0], x))
    return total


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def shrink_candidates(t: SemType, p: Any) -> Iterator[Any]:
    kind = t.kind
    if kind == "Bool":
        if p:
            yield False
    elif kind in ("Nat", "Int"):
        if p != 0:
            yield 0
            if p < 0:
                yield -p
            yield p // 2 if p > 0 else -(-p // 2)
            yield p - 1 if p > 0 else p + 1
    elif kind == "Pair":
        for a in shrink_candidates(t.args[0], p[0]):
            yield (a, p[1])
        for b in shrink_candidates(t.args[1], p[1]):
            yield (p[0], b)
    elif kind in ("Array", "List", "String"):
        join = "".join if kind == "String" else tuple
        n = len(p)
        if n:
            yield join(())
            half = n // 2
            if half:
                yield join(p[:half])
                yield join(p[half:])
            for i in range(n):
                yield join(p[:i] + p[i + 1:])
            if kind != "String":
                for i in range(n):
                    for x in shrink_candidates(t.args[0], p[i]):
                        yield p[:i] + (x,) + p[i + 1:]


def shrink_payloads(types: Sequence[SemType], payloads: Sequence[Any], failing: Callable[[List[Any]], bool],
                    max_steps: int = MAX_SHRINK_STEPS) -> List[Any]:
    """Greedy descent over a tuple of payloads; every accepted step strictly
    decreases the size order, so the result is a fixpoint or the step cap."""
    current = list(payloads)

    def measure(ps):
        total = (0, 0, 0)
        for t, x in zip(types, ps):
            total = _add(total, size_of(t, x))
        return total

    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        here = measure(current)
        for i, t in enumerate(types):
            for c in shrink_candidates(t, current[i]):
                steps += 1
                candidate = current[:i] + [c] + current[i + 1:]
                if measure(candidate) < here and failing(candidate):
                    current = candidate
                    improved = True
                    break
                if steps >= max_steps:
                    break
            if improved or steps >= max_steps:
                break
    return current


def shrink(v: Value, failing: Callable[[Value], bool], max_steps: int = MAX_SHRINK_STEPS) -> Value:
    result = shrink_payloads([v.type], [v.payload], lambda ps: failing(Value(v.type, ps[0])), max_steps)
    return Value(v.type, result[0])


def shrink_values(values: Sequence[Value], failing: Callable[[List[Value]], bool],
                  max_steps: int = MAX_SHRINK_STEPS) -> List[Value]:
    types = [v.type for v in values]
    result = shrink_payloads(types, [v.payload for v in values],
                             lambda ps: failing([Value(t, p) for t, p in zip(types, ps)]), max_steps)
    return [Value(t, p) for t, p in zip(types, result)]
