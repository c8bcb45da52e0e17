import json
import logging
import sys
from typing import Optional, Tuple

import click

from vtkit import __version__
from vtkit.cmds import report, testing, verification
from vtkit.cmds.common import EXIT_USAGE, json_or_file, load_source, parse_literal, source_name, stdin_option
from vtkit.errors import RuntimeFault, ValueDecodeError, VtTypeError
from vtkit.sem.evaluator import DEFAULT_FUEL
from vtkit.sem.interp import run_method
from vtkit.sem.values import decode_args, to_json

CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])

LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


@click.group(
    help="\n  Testing and verification toolkit for annotated .vt programs \n",
    context_settings=CONTEXT_SETTINGS,
)
@click.version_option(__version__)
@click.option("-v", "--verbose", count=True, help="More logging (repeatable)")
@click.option("--config", type=click.Path(dir_okay=False), default=None,
              help="TOML configuration file (default ./vtkit.toml when present)")
@click.pass_context
def cli(ctx: click.Context, verbose: int, config: Optional[str]) -> None:
    ctx.ensure_object(dict)
    ctx.obj["config"] = config
    # values are unbounded integers, also in JSON arguments and reports
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    logging.basicConfig(level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)],
                        format="%(levelname)s %(name)s: %(message)s")


def _plural(n: int, word: str) -> str:
    return f"{n} {word}" if n == 1 else f"{n} {word}s"


@cli.command("check", short_help="Parse and type check a .vt file")
@click.argument("file", type=click.Path(exists=True, dir_okay=False), required=False)
@stdin_option
def check_cmd(file: Optional[str], from_stdin: bool) -> None:
    program = load_source(file, from_stdin=from_stdin)
    invariants = sum(len(loop.invariants) for m in program.methods for loop in m.loops())
    counts = [_plural(len(program.methods), "method"), _plural(len(program.defs), "def"),
              _plural(invariants, "invariant")]
    click.echo(f"{source_name(file)}: {', '.join(counts)}")


@cli.command("run", short_help="Execute a method on concrete arguments")
@click.argument("file", required=False)
@click.argument("method", required=False)
@click.argument("args", nargs=-1)
@stdin_option
@click.option("-a", "--args-json", default=None,
              help="All arguments as one JSON array (or a file holding it)")
@click.option("--fuel", type=click.IntRange(min=1), default=DEFAULT_FUEL, show_default=True,
              help="Step budget before giving up")
def run_cmd(file: Optional[str], method: Optional[str], args: Tuple[str, ...], args_json: Optional[str], fuel: int,
            from_stdin: bool) -> None:
    if from_stdin and file is not None:
        # no FILE: the positionals are METHOD ARGS...
        operands = (file,) + ((method,) if method is not None else ()) + args
        file, method, args = None, operands[0], operands[1:]
    if method is None:
        click.echo("missing METHOD", err=True)
        sys.exit(EXIT_USAGE)
    program = load_source(file, from_stdin=from_stdin)
    m = program.find_method(method)
    if m is None:
        click.echo(f"no method named {method}", err=True)
        sys.exit(EXIT_USAGE)
    types = [p.type for p in m.params]
    try:
        if args_json is not None:
            values = decode_args(types, json_or_file(args_json))
        else:
            if len(args) != len(types):
                raise ValueDecodeError(f"{method} expects {len(types)} arguments, got {len(args)}")
            values = [parse_literal(t, a) for t, a in zip(types, args)]
        results = run_method(program, method, values, fuel=fuel)
    except (ValueDecodeError, VtTypeError, RuntimeFault) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    payloads = [to_json(v.type, v.payload) for v in results]
    click.echo(json.dumps(payloads[0] if len(payloads) == 1 else payloads, ensure_ascii=False))


cli.add_command(testing.test_spec_cmd)
cli.add_command(testing.test_cmd)
cli.add_command(verification.vcgen_cmd)
cli.add_command(verification.verify_cmd)
cli.add_command(report.report_cmd)


def main() -> None:
    cli()  # pylint: disable=no-value-for-parameter


if __name__ == "__main__":
    main()
