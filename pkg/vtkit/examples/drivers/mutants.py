"""Single-token mutants of a method body.

Only executable code is touched: guards, conditions, assigned and returned
expressions. Invariants, measures and the requires/ensures clauses stay as
written, so a mutant asks whether the annotations still describe the code.
"""
import logging
from dataclasses import dataclass, replace
from typing import Iterator, List, Sequence, Tuple

from vtkit.errors import VtError
from vtkit.gen import Rng
from vtkit.syntax.ast import Assign, Binary, Expr, If, IntLit, Let, Program, Return, Stmt, While
from vtkit.syntax.parser import parse
from vtkit.syntax.printer import print_program
from vtkit.syntax.transform import children, with_children

log = logging.getLogger(__name__)

COMPARISON_FLIPS = {"<": "<=", "<=": "<", ">": ">=", ">=": ">", "=": "!=", "!=": "="}
ARITH_FLIPS = {"+": "-", "-": "+", "*": "+"}


@dataclass(frozen=True)
class Mutant:
    method: str
    site: int
    description: str
    program: Program


def _expr_variants(e: Expr) -> Iterator[Tuple[str, Expr]]:
    if isinstance(e, Binary):
        flip = COMPARISON_FLIPS.get(e.op) or ARITH_FLIPS.get(e.op)
        if flip is not None:
            yield f"{e.op} -> {flip}", replace(e, op=flip)
    if isinstance(e, IntLit):
        yield f"{e.value} -> {e.value + 1}", replace(e, value=e.value + 1)
        yield f"{e.value} -> {e.value - 1}", replace(e, value=e.value - 1)
    kids = children(e)
    for i, c in enumerate(kids):
        for desc, m in _expr_variants(c):
            yield desc, with_children(e, kids[:i] + (m,) + kids[i + 1:])


def _stmt_variants(s: Stmt) -> Iterator[Tuple[str, Stmt]]:
    if isinstance(s, (Let, Assign)):
        for desc, m in _expr_variants(s.value):
            yield desc, replace(s, value=m)
    elif isinstance(s, Return):
        for i, v in enumerate(s.values):
            for desc, m in _expr_variants(v):
                yield desc, replace(s, values=s.values[:i] + (m,) + s.values[i + 1:])
    elif isinstance(s, If):
        for desc, m in _expr_variants(s.cond):
            yield desc, replace(s, cond=m)
        for desc, block in _block_variants(s.then):
            yield desc, replace(s, then=block)
        for desc, block in _block_variants(s.orelse):
            yield desc, replace(s, orelse=block)
    elif isinstance(s, While):
        for desc, m in _expr_variants(s.guard):
            yield desc, replace(s, guard=m)
        for desc, block in _block_variants(s.body):
            yield desc, replace(s, body=block)


def _block_variants(stmts: Sequence[Stmt]) -> Iterator[Tuple[str, Tuple[Stmt, ...]]]:
    stmts = tuple(stmts)
    for i, s in enumerate(stmts):
        for desc, m in _stmt_variants(s):
            yield desc, stmts[:i] + (m,) + stmts[i + 1:]


def iter_mutants(program: Program, method: str) -> Iterator[Mutant]:
    """Every well-typed single-token mutant of `method`, in source order.

    Mutants are printed and parsed again so that they are type checked like
    any other source; the ones that no longer type check are dropped.
    """
    m = program.find_method(method)
    if m is None:
        raise KeyError(f"no method named {method}")
    for site, (desc, body) in enumerate(_block_variants(m.body)):
        methods = tuple(replace(x, body=body) if x.name == method else x for x in program.methods)
        source = print_program(replace(program, methods=methods))
        try:
            mutated = parse(source, source_name=f"{program.source_name or method}#mutant{site}")
        except VtError as e:
            log.debug("mutant %d of %s (%s) dropped: %s", site, method, desc, e)
            continue
        yield Mutant(method, site, desc, mutated)


def sample_mutants(program: Program, method: str, rng: Rng, k: int) -> List[Mutant]:
    """At most k mutants chosen by `rng`, returned in source order."""
    pool = list(iter_mutants(program, method))
    if len(pool) <= k:
        return pool
    # partial Fisher-Yates
    for i in range(k):
        j = i + rng.index(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    return sorted(pool[:k], key=lambda x: x.site)
