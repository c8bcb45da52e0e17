import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Dict, List, Tuple

import click

from vtkit.cmds.common import EXIT_USAGE, echo_json, format_option
from vtkit.dispatch.pipeline import VerdictKind

log = logging.getLogger(__name__)

COLUMNS = (
    ("fully proven", VerdictKind.FULLY_PROVEN),
    ("partially proven", VerdictKind.PARTIALLY_PROVEN),
    ("refuted", VerdictKind.REFUTED),
    ("synthesis failure", VerdictKind.SYNTHESIS_FAILURE),
)


def find_reports(paths: Tuple[str, ...]) -> List[Path]:
    found = []
    for p in map(Path, paths):
        if p.is_file():
            found.append(p)
        elif p.is_dir():
            found.extend(sorted(p.glob("**/verify.json")))
    return found


def summarize(reports: List[Path]) -> Dict:
    """Count method verdicts over a set of verify.json reports."""
    counts: Counter = Counter()
    methods = []
    for path in reports:
        try:
            data = json.loads(path.read_text())
            kind = VerdictKind(data["verdict"])
        except (OSError, ValueError, KeyError) as e:
            log.warning("skipping %s: %s", path, e)
            continue
        counts[kind] += 1
        residual = sum(1 for vc in data.get("vcs", []) if vc.get("status") == "Residual")
        methods.append({"method": data.get("method"), "verdict": kind.value, "residual": residual,
                        "path": str(path)})
    total = sum(counts.values())
    return {
        "total": total,
        "counts": {kind.value: counts[kind] for _, kind in COLUMNS},
        "methods": methods,
    }


@click.command("report", short_help="Summarize verify.json results")
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True))
@format_option
def report_cmd(paths: Tuple[str, ...], fmt: str) -> None:
    reports = find_reports(paths)
    if not reports:
        click.echo("no verify.json reports found", err=True)
        sys.exit(EXIT_USAGE)
    summary = summarize(reports)
    if fmt == "json":
        echo_json(summary)
        return
    for m in summary["methods"]:
        extra = f" ({m['residual']} residual)" if m["residual"] else ""
        click.echo(f"{m['method']:<32} {m['verdict']}{extra}")
    total = summary["total"]
    click.echo("-" * 48)
    for label, kind in COLUMNS:
        n = summary["counts"][kind.value]
        share = 100.0 * n / total if total else 0.0
        click.echo(f"{label:<20} {n:>5}  {share:5.1f}%")
    click.echo(f"{'total':<20} {total:>5}")
