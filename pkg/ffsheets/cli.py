#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import os
import sys

import click
from numpy.linalg import LinAlgError
from tabulate import tabulate

from ffsheets import api
from ffsheets.exceptions import FFSheetsError, ConfigError, IncompleteSearchError

EXIT_CONFIG = 2
EXIT_INCOMPLETE = 3
EXIT_NUMERIC = 4


def _execute(runner, **kwargs):
    try:
        report = runner(**kwargs)
    except ConfigError as ex:
        click.echo(f"Configuration error in {ex}", err=True)
        sys.exit(EXIT_CONFIG)
    except IncompleteSearchError as ex:
        click.echo(f"Incomplete search: {ex}. A partial report was written.", err=True)
        sys.exit(EXIT_INCOMPLETE)
    except (FFSheetsError, LinAlgError) as ex:
        click.echo(f"Numerical failure: {type(ex).__name__}: {ex}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(tabulate(report.summary(), headers=["item", "value"], tablefmt="psql"))


def run_options(func):
    func = click.option("--log-file", "log_file", default=None,
                        help="Write the log of this run to a file (relative to --out).")(func)
    func = click.option("--silence_tqdm/--no-silence_tqdm", "silence_tqdm", default=False)(func)
    func = click.option("--out", "out", type=click.Path(file_okay=False), default=".",
                        help="Output directory.")(func)
    func = click.option("--jobs", "jobs", type=click.IntRange(min=1), default=os.cpu_count() or 1,
                        help="Worker threads.")(func)
    func = click.option("--config", "config", type=click.Path(exists=True, dir_okay=False),
                        required=True, help="JSON experiment config.")(func)
    return func


@click.group()
def cli():
    pass


@cli.command()
@run_options
def smatrix(config, jobs, out, silence_tqdm, log_file):
    """
    Scan the physical scattering matrix S(E) over an energy grid (smatrix.csv).
    """
    _execute(api.run_smatrix, config=config, out=out, jobs=jobs, silence_tqdm=silence_tqdm,
             log_to_file=log_file or False)


@cli.command()
@run_options
def resonances(config, jobs, out, silence_tqdm, log_file):
    """
    Locate resonances on an unphysical sheet (resonances.json, matches.csv).
    """
    _execute(api.run_resonances, config=config, out=out, jobs=jobs, silence_tqdm=silence_tqdm,
             log_to_file=log_file or False)


@cli.command()
@run_options
def sheetmap(config, jobs, out, silence_tqdm, log_file):
    """
    Sample |det S| on the physical sheet and its continuation over a complex grid (sheetmap.csv).
    """
    _execute(api.run_sheetmap, config=config, out=out, jobs=jobs, silence_tqdm=silence_tqdm,
             log_to_file=log_file or False)


@cli.command()
@run_options
def deform(config, jobs, out, silence_tqdm, log_file):
    """
    Spectra of the contour-deformed Hamiltonian and the contour-independence report.
    """
    _execute(api.run_deform, config=config, out=out, jobs=jobs, silence_tqdm=silence_tqdm,
             log_to_file=log_file or False)


@cli.command()
@run_options
def validate(config, jobs, out, silence_tqdm, log_file):
    """
    Validate the config and the kernel conditions only (validation.json).
    """
    # pylint: disable=unused-argument
    _execute(api.run_validate, config=config, out=out, log_to_file=log_file or False)
