"""Command-line entry point for natmap."""

import logging
import os
import sys
from typing import List, Optional

import click
import typer
from dotenv import load_dotenv
from pydantic import ValidationError

from natmap.cli.v1 import barycenter
from natmap.cli.v1 import degree
from natmap.cli.v1 import natural_map
from natmap.cli.v1 import ps_check
from natmap.cli.v1 import selftest
from natmap.cli.v1 import volume
from natmap.services.errors import ConvergenceError, NatmapError

load_dotenv()

logging.basicConfig(
    level=os.getenv("NATMAP_LOG_LEVEL", "WARNING").upper(),
    format="%(asctime)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

app = typer.Typer(
    name="natmap",
    help="Natural maps, natural volumes and degree experiments for cocycles on real hyperbolic space.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)

app.command("barycenter")(barycenter.barycenter_command)
app.command("ps-check")(ps_check.ps_check_command)
app.add_typer(natural_map.app, name="natmap")
app.command("jacobian-scan")(natural_map.jacobian_scan_command)
app.command("volume")(volume.volume_command)
app.command("natural-volume")(volume.natural_volume_command)
app.command("degree")(degree.degree_command)
app.command("selftest")(selftest.selftest_command)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and map its outcome to an exit code."""
    try:
        result = app(args=argv, prog_name="natmap", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_INVALID
    except click.Abort:
        return EXIT_INVALID
    except ConvergenceError as exc:
        typer.echo(f"Error: {exc}", err=True)
        return EXIT_NOT_CONVERGED
    except (NatmapError, ValidationError, FileNotFoundError) as exc:
        typer.echo(f"Error: {exc}", err=True)
        return EXIT_INVALID
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
