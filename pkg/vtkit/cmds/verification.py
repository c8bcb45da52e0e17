import hashlib
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click

from vtkit.cmds.common import (
    DEFAULT_OUT,
    configs,
    echo_json,
    format_option,
    gen_options,
    load_source,
    method_names,
    mode_option,
    seed_option,
    stdin_option,
    write_json,
)
from vtkit.dispatch.pipeline import EXIT_CODES, MethodReport, VerdictKind, most_severe, verify_method
from vtkit.dispatch.solver import SmtSolver
from vtkit.errors import MissingDecreasing, SolverUnavailable, UnsupportedConstruct
from vtkit.vcgen import Mode, generate_vcs, render_vc


@click.command("vcgen", short_help="Write the verification conditions of methods as text")
@click.argument("file", type=click.Path(exists=True, dir_okay=False), required=False)
@stdin_option
@click.option("-m", "--method", "methods", multiple=True, help="Method (repeatable, default all)")
@click.option("-o", "--out", type=click.Path(file_okay=False), default=None,
              help="Directory for <vcid>.vc.txt files and vcs.json (default: print)")
@mode_option
def vcgen_cmd(file: Optional[str], from_stdin: bool, methods: Tuple[str, ...], out: Optional[str], mode: str) -> None:
    program = load_source(file, from_stdin=from_stdin)
    index = []
    for name in method_names(program, methods):
        try:
            vcs = generate_vcs(program, name, Mode(mode))
        except (MissingDecreasing, UnsupportedConstruct) as e:
            click.echo(f"{name}: {e}", err=True)
            sys.exit(1)
        for vc in vcs:
            text = render_vc(vc)
            index.append({
                "id": vc.id,
                "kind": vc.kind.value,
                "method": vc.method,
                "sha256": hashlib.sha256(text.encode()).hexdigest(),
            })
            if out is None:
                click.echo(text)
            else:
                target = Path(out)
                target.mkdir(parents=True, exist_ok=True)
                (target / f"{vc.id}.vc.txt").write_text(text)
    if out is not None:
        write_json(Path(out) / "vcs.json", index)
        click.echo(f"wrote {len(index)} verification conditions to {out}")


def _print_report(report: MethodReport) -> None:
    color = {
        VerdictKind.FULLY_PROVEN: "green",
        VerdictKind.PARTIALLY_PROVEN: "yellow",
        VerdictKind.REFUTED: "red",
        VerdictKind.SYNTHESIS_FAILURE: "red",
    }[report.verdict.kind]
    click.echo(f"{report.method}: " + click.style(report.verdict.kind.value, fg=color))
    if report.verdict.reason:
        click.echo(f"  {report.verdict.reason}")
    for o in report.outcomes:
        line = f"  {o.vc_id}: {o.status.value}"
        if o.tier is not None:
            line += f" ({o.tier.value})"
        click.echo(line)
        if o.assignment:
            for k, v in sorted(o.assignment.items()):
                click.echo(f"    {k} = {v}")


@click.command("verify", short_help="Discharge verification conditions and write verify.json")
@click.argument("file", type=click.Path(exists=True, dir_okay=False), required=False)
@stdin_option
@click.option("-m", "--method", "methods", multiple=True, help="Method (repeatable, default all)")
@click.option("-o", "--out", type=click.Path(file_okay=False), default=DEFAULT_OUT, show_default=True,
              help="Directory for reports and obligation files")
@click.option("--smt-cmd", default=None, help='Solver command reading SMT-LIB on stdin, e.g. "z3 -in"')
@click.option("--smt-timeout", default=None, help="Per-call solver timeout such as 10s")
@click.option("-j", "--jobs", type=click.IntRange(min=1), default=None, help="Parallel solver processes")
@click.option("--keep-going", is_flag=True, default=None, help="Still call the solver after a refutation")
@mode_option
@seed_option
@format_option
@gen_options
@click.pass_context
def verify_cmd(ctx: click.Context, file: Optional[str], from_stdin: bool, methods: Tuple[str, ...], out: str,
               smt_cmd: Optional[str], smt_timeout: Optional[str], jobs: Optional[int], keep_going: Optional[bool],
               mode: str, seed: int, fmt: str, **gen_flags) -> None:
    program = load_source(file, exit_code=EXIT_CODES[VerdictKind.SYNTHESIS_FAILURE], from_stdin=from_stdin)
    gen_cfg, verify_cfg = configs(ctx, smt_cmd=smt_cmd, smt_timeout=smt_timeout, jobs=jobs,
                                  keep_going=keep_going or None, **gen_flags)
    solver = None
    if verify_cfg.smt_cmd:
        try:
            solver = SmtSolver(verify_cfg.smt_cmd, verify_cfg.smt_timeout, verify_cfg.jobs)
        except SolverUnavailable as e:
            click.echo(f"warning: {e}; continuing without the SMT tier", err=True)
    reports: List[MethodReport] = []
    for name in method_names(program, methods):
        report = verify_method(program, name, Mode(mode), seed, gen_cfg, verify_cfg, solver, out)
        reports.append(report)
        if fmt == "human":
            _print_report(report)
    if fmt == "json":
        echo_json([r.to_json(gen_cfg, verify_cfg) for r in reports])
    worst = most_severe(r.verdict.kind for r in reports)
    sys.exit(EXIT_CODES[worst] if worst is not None else 0)
