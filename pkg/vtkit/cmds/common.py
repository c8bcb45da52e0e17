"""Helpers shared by the subcommands: loading sources, configuration and output."""
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Tuple

import click

from vtkit.dispatch.pipeline import dump_json
from vtkit.errors import ConfigError, ValueDecodeError, VtError
from vtkit.sem.evaluator import eval_pure
from vtkit.sem.values import Value, decode_value
from vtkit.syntax.ast import Program, SemType
from vtkit.syntax.parser import parse
from vtkit.syntax.printer import print_type
from vtkit.util.config import GenConfig, VerifyConfig, load_config, override, parse_duration
from vtkit.util.load_program import read_program
from vtkit.vcgen import Mode

log = logging.getLogger(__name__)

DEFAULT_OUT = "vt-out"
EXIT_USAGE = 2
STDIN_NAME = "<stdin>"


def diagnostic(source: str, e: VtError) -> str:
    if e.loc is not None:
        return f"{source}:{e.loc.line}:{e.loc.col}: error: {e.msg}"
    return f"{source}: error: {e.msg}"


stdin_option = click.option(
    "--stdin", "from_stdin", is_flag=True, help="Read the program from standard input instead of FILE"
)


def source_name(path: Optional[str]) -> str:
    return STDIN_NAME if path is None else path


def load_source(path: Optional[str], exit_code: int = 1, from_stdin: bool = False) -> Program:
    """Parse and type check FILE (or standard input), or print diagnostics and exit."""
    if from_stdin == (path is not None):
        click.echo("give either FILE or --stdin", err=True)
        sys.exit(EXIT_USAGE)
    try:
        if from_stdin:
            return parse(click.get_text_stream("stdin").read(), source_name=STDIN_NAME)
        return read_program(path)
    except OSError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_USAGE)
    except VtError as e:
        click.echo(diagnostic(source_name(path), e), err=True)
        sys.exit(exit_code)


def configs(ctx: click.Context, **flags) -> Tuple[GenConfig, VerifyConfig]:
    """Configuration file values with the given command line flags on top."""
    try:
        gen_cfg, verify_cfg = load_config(ctx.obj.get("config"))
        gen_keys = {k: v for k, v in flags.items() if k in GenConfig.__dataclass_fields__}
        verify_keys = {k: v for k, v in flags.items() if k in VerifyConfig.__dataclass_fields__}
        if verify_keys.get("smt_timeout") is not None:
            verify_keys["smt_timeout"] = parse_duration(verify_keys["smt_timeout"])
        return override(gen_cfg, **gen_keys), override(verify_cfg, **verify_keys)
    except ConfigError as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_USAGE)


def echo_json(data: Any) -> None:
    click.echo(dump_json(data), nl=False)


def write_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(data))


def json_or_file(text: str) -> Any:
    """A JSON literal, or the path of a file holding one."""
    candidate = Path(text)
    if not text.lstrip().startswith(("[", "{")) and candidate.is_file():
        text = candidate.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueDecodeError(f"invalid JSON: {e}") from None


def parse_literal(t: SemType, text: str) -> Value:
    """Read an argument as JSON, falling back to source syntax such as `#[4, 1, 2, 3]`."""
    try:
        return decode_value(t, json.loads(text))
    except json.JSONDecodeError:
        pass
    try:
        program = parse(f"def arg__value : {print_type(t)} := {text}")
    except VtError as e:
        raise ValueDecodeError(f"cannot read {text!r} as {t}: {e.msg}") from None
    return Value(t, eval_pure(program, "arg__value", []).payload)


# shared options

mode_option = click.option(
    "--mode",
    type=click.Choice([m.value for m in Mode]),
    default=Mode.PARTIAL.value,
    show_default=True,
    help="Partial or total correctness",
)
seed_option = click.option(
    "--seed",
    type=click.IntRange(min=0),
    envvar="VTKIT_SEED",
    default=0,
    show_default=True,
    help="Random seed (falls back to $VTKIT_SEED)",
)
format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(["human", "json"]),
    default="human",
    show_default=True,
    help="Output format",
)


def gen_options(f: Callable) -> Callable:
    f = click.option("--trials", type=click.IntRange(min=1), default=None, help="Random trials per check")(f)
    f = click.option("--size-bound", type=click.IntRange(min=1), default=None,
                     help="Maximum generated collection length")(f)
    f = click.option("--int-magnitude", type=click.IntRange(min=1), default=None,
                     help="Maximum generated integer magnitude")(f)
    f = click.option("--rejection-budget", type=click.IntRange(min=1), default=None,
                     help="Samples tried per input before the precondition counts as unsatisfiable")(f)
    return f


def method_names(program: Program, selected: Tuple[str, ...]) -> Tuple[str, ...]:
    if not selected:
        return tuple(m.name for m in program.methods)
    for name in selected:
        if program.find_method(name) is None:
            click.echo(f"no method named {name}", err=True)
            sys.exit(EXIT_USAGE)
    return selected
