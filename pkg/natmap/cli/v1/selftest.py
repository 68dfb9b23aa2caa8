"""`natmap selftest`: the invariant suite at small sizes."""

import typer

from natmap.cli.dependencies import Format, Out, Seed, get_config, write_result
from natmap.services.selftest import run_selftest


def selftest_command(seed: Seed = 0, out: Out = None, format: Format = "json"):
    """Run every invariant check; exits 1 if any fails."""
    config = get_config("selftest", seed=seed, out=out, format=format)
    report = run_selftest(config.seed)
    rows = [[c.name, c.passed, c.value, c.threshold] for c in report.checks]
    write_result(
        config,
        {"passed": report.passed, "checks": [c.model_dump() for c in report.checks]},
        header=["name", "passed", "value", "threshold"],
        rows=rows,
    )
    if not report.passed:
        raise typer.Exit(code=1)
