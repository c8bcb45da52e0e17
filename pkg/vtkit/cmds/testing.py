import sys
from pathlib import Path
from typing import Optional, Tuple

import click

from vtkit.cmds.common import (
    EXIT_USAGE,
    configs,
    echo_json,
    format_option,
    gen_options,
    json_or_file,
    load_source,
    method_names,
    mode_option,
    seed_option,
    stdin_option,
    write_json,
)
from vtkit.errors import PreconditionExhausted, ValueDecodeError
from vtkit.gen import Rng
from vtkit.harness import HarnessReport, test_method
from vtkit.spectest import (
    SpecReport,
    Status,
    load_cases,
    run_spec_suite,
    spec_by_convention,
    spec_from_defs,
    spec_from_method,
)
from vtkit.vcgen import Mode

EXIT_CODES = {Status.PASS: 0, Status.FAIL: 1, Status.INCONCLUSIVE: 2, Status.SKIPPED: 2}

STATUS_COLORS = {Status.PASS: "green", Status.FAIL: "red", Status.INCONCLUSIVE: "yellow", Status.SKIPPED: "yellow"}


def _status(status: Status) -> str:
    return click.style(status.value.upper(), fg=STATUS_COLORS[status])


def _print_spec_report(report: SpecReport) -> None:
    click.echo(f"spec {report.spec}: {_status(report.status)} (seed {report.seed}, {report.trials} trials)")
    for case in report.cases:
        click.echo(f"  case {case.index}: {_status(case.status)}")
        for check in case.checks:
            line = f"    {check.check}: {check.status.value}"
            if check.detail:
                line += f" - {check.detail}"
            click.echo(line)


@click.command("test-spec", short_help="Check a pre/postcondition pair against test cases")
@click.argument("file", required=False)
@click.argument("name", required=False)
@stdin_option
@click.option("-c", "--cases", required=True, help="Test cases as a JSON file (or literal)")
@click.option("--pre", default=None, help="Precondition definition (default <name>_pre)")
@click.option("--post", default=None, help="Postcondition definition (default <name>_post)")
@click.option("-m", "--method", default=None, help="Use the requires/ensures of a method instead")
@click.option("--skip-uniqueness", is_flag=True, help="Do not search for other accepted outputs")
@click.option("-o", "--out", type=click.Path(file_okay=False), default=None, help="Also write the JSON report here")
@seed_option
@format_option
@gen_options
@click.pass_context
def test_spec_cmd(ctx: click.Context, file: Optional[str], name: Optional[str], from_stdin: bool, cases: str,
                  pre: Optional[str], post: Optional[str], method: Optional[str], skip_uniqueness: bool,
                  out: Optional[str], seed: int, fmt: str, **gen_flags) -> None:
    if from_stdin and file is not None:
        if name is not None:
            click.echo("with --stdin only NAME is positional", err=True)
            sys.exit(EXIT_USAGE)
        file, name = None, file
    program = load_source(file, from_stdin=from_stdin)
    gen_cfg, _ = configs(ctx, **gen_flags)
    try:
        if method is not None:
            spec = spec_from_method(program, method)
        elif pre is not None and post is not None:
            spec = spec_from_defs(program, pre, post, name)
        elif name is not None:
            spec = spec_by_convention(program, name)
        else:
            raise ValueError("give a spec NAME, --pre and --post, or --method")
        test_cases = load_cases(spec, json_or_file(cases))
    except (KeyError, ValueError, ValueDecodeError) as e:
        click.echo(f"error: {e.args[0] if isinstance(e, KeyError) else e}", err=True)
        sys.exit(EXIT_USAGE)
    if not test_cases:
        click.echo("no cases", err=True)
        sys.exit(EXIT_CODES[Status.INCONCLUSIVE])

    report = run_spec_suite(spec, test_cases, Rng(seed), gen_cfg, skip_uniqueness)
    if out is not None:
        write_json(Path(out) / f"{spec.name}.spec.json", report.to_json())
    if fmt == "json":
        echo_json(report.to_json())
    else:
        _print_spec_report(report)
    sys.exit(EXIT_CODES[report.status])


def _combine(worst: int, code: int) -> int:
    # fail outranks inconclusive
    return 1 if 1 in (worst, code) else max(worst, code)


def _print_harness_report(report: HarnessReport, names) -> None:
    click.echo(f"{report.method} ({report.mode.value}): {_status(report.status)} "
               f"({report.trials} trials, {report.discarded} discarded, seed {report.seed})")
    for f in report.failures:
        click.echo(f"  FAIL: {f.describe()}")
        for n, v in zip(names, f.input):
            click.echo(f"    {n} = {v}")


@click.command("test", short_help="Randomized testing of methods with their annotations")
@click.argument("file", type=click.Path(exists=True, dir_okay=False), required=False)
@stdin_option
@click.option("-m", "--method", "methods", multiple=True, help="Method to test (repeatable, default all)")
@click.option("--keep-going", is_flag=True, help="Report one failure per invariant instead of stopping at the first")
@click.option("-o", "--out", type=click.Path(file_okay=False), default=None, help="Also write JSON reports here")
@mode_option
@seed_option
@format_option
@gen_options
@click.pass_context
def test_cmd(ctx: click.Context, file: Optional[str], from_stdin: bool, methods: Tuple[str, ...], keep_going: bool,
             out: Optional[str], mode: str, seed: int, fmt: str, **gen_flags) -> None:
    program = load_source(file, from_stdin=from_stdin)
    gen_cfg, _ = configs(ctx, **gen_flags)
    worst = 0
    results = []
    for name in method_names(program, methods):
        m = program.find_method(name)
        names = [p.name for p in m.params]
        try:
            report = test_method(program, name, Rng(seed), gen_cfg, Mode(mode), keep_going)
        except PreconditionExhausted as e:
            click.echo(f"{name}: {e}", err=True)
            worst = _combine(worst, EXIT_CODES[Status.INCONCLUSIVE])
            continue
        data = report.to_json(names)
        results.append(data)
        if out is not None:
            write_json(Path(out) / f"{name}.test.json", data)
        if fmt == "human":
            _print_harness_report(report, names)
        worst = _combine(worst, EXIT_CODES[report.status])
    if fmt == "json":
        echo_json(results)
    sys.exit(worst)
