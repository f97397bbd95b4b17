"""Command-line harness for the verification suite.

Exit codes: 0 all checks passed, 1 at least one check failed,
2 usage error (unknown example/format/flag).
"""

from __future__ import annotations

import sys

import click

from . import geometries as geo
from . import suite


@click.group()
def main():
    """Numerical verification harness for the CR / fiber-metric /
    tractor-calculus library."""


@main.command("list-examples")
def list_examples():
    """List the built-in example geometries."""
    for ex in geo.builtin_examples():
        click.echo(f"{ex.name:<24} m={ex.m}  {ex.description}")


@main.command("list-checks")
@click.option("--example", default=None, help="restrict to checks applicable to one example")
def list_checks(example):
    """List registered checks with tolerances and coverage topics."""
    checks = suite.CHECKS if example is None else suite.checks_for(example)
    for c in sorted(checks, key=lambda c: c.id):
        scope = ",".join(c.examples) if c.examples else "any"
        click.echo(f"{c.id:<32} tol={c.tolerance:.0e}  [{scope}]")
        click.echo(f"    {c.summary}")
        click.echo(f"    topics: {', '.join(c.topics)}")


@main.command("verify")
@click.option("--example", required=True, help="example geometry name")
@click.option("--suite", "suite_filter", default="all", help="check-id substring filter")
@click.option("--points", default=20, type=int, help="sample points per check")
@click.option("--seed", default=42, type=int, help="sampling seed")
@click.option("--tol", default=None, type=float, help="override all check tolerances")
@click.option("--format", "fmt", default="text", type=click.Choice(["json", "text"]))
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="write report to a file")
def verify(example, suite_filter, points, seed, tol, fmt, out):
    """Run the verification suite against one example geometry."""
    names = [e.name for e in geo.builtin_examples()]
    if example not in names:
        click.echo(f"unknown example {example!r}; choose from {', '.join(names)}", err=True)
        sys.exit(2)
    report = suite.run_suite(example, suite_filter, seed=seed, n_points=points, tol=tol)
    if not report["checks"]:
        click.echo(f"no checks match filter {suite_filter!r}", err=True)
        sys.exit(2)
    payload = suite.emit_report(report, fmt)
    if out:
        with open(out, "wb") as fh:
            fh.write(payload)
        click.echo(f"report written to {out}")
    else:
        click.echo(payload.decode(), nl=False)
    sys.exit(0 if report["meta"]["all_passed"] else 1)


if __name__ == "__main__":
    main()
