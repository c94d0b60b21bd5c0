#!/usr/bin/env python3
"""
Haar-Ruelle Lab - Main Entry Point
Perron eigenmeasures of Haar-Ruelle operators on symbolic space, from the command line.
"""

import logging
import os
import sys

import click

# Add src directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from errors import HaarRuelleError
from presets import PRESETS
from runner import Command, run_command
from settings import ConfigManager, ExperimentConfig
from symbolic import parse_cylinder

logger = logging.getLogger("haar_ruelle_lab")


EXPERIMENT_OPTIONS = [
    click.option('--config', 'config_file', type=click.Path(dir_okay=False),
                 help='JSON experiment document merged over the defaults.'),
    click.option('--preset', type=click.Choice(sorted(PRESETS)), help='Built-in base document.'),
    click.option('--out', type=click.Path(file_okay=False), help='Output directory.'),
    click.option('--threads', type=click.IntRange(min=1), help='Worker threads across beta values.'),
    click.option('--tolerance', type=float, help='Verification tolerance.'),
    click.option('--beta', 'betas', type=float, multiple=True, help='Inverse temperature (repeatable).'),
]


def experiment_options(fn):
    """Options shared by every experiment command."""
    for option in reversed(EXPERIMENT_OPTIONS):
        fn = option(fn)
    return fn


def load_config(config_file, preset, out, threads, tolerance, betas) -> ExperimentConfig:
    """Layer defaults, preset, document and flags into an ExperimentConfig."""
    manager = ConfigManager(config_file, preset)
    manager.apply_overrides(out=out, threads=threads, tolerance=tolerance, betas=betas)
    logger.debug("merged configuration:\n%s", manager.export_settings())
    return ExperimentConfig.from_manager(manager)


def execute(command: Command, options, **extra):
    """Run a command, echo its summary and turn lab errors into exit codes."""
    try:
        config = load_config(**options)
        summary = run_command(command, config, **extra)
    except HaarRuelleError as e:
        click.echo(f"✗ {type(e).__name__}: {e}", err=True)
        sys.exit(e.exit_code)

    for line in summary.lines:
        click.echo(line)
    click.echo(f"✓ {command.value}: wrote {len(summary.files)} file(s) to {config.output_dir}")


@click.group()
@click.option('-v', '--verbose', count=True, help='-v for progress, -vv for debug output.')
def cli(verbose):
    """Haar-Ruelle Lab: eigenmeasures, histograms and quasi-invariance checks."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@experiment_options
def eigen(**options):
    """Perron eigenvalue, eigenmeasure and eigenfunction per beta."""
    execute(Command.EIGEN, options)


@cli.command()
@experiment_options
def histogram(**options):
    """Ratio-iteration histogram of the eigenmeasure per beta."""
    execute(Command.HISTOGRAM, options)


@cli.command()
@experiment_options
@click.option('--point-mass', 'point_mass', metavar='CYLINDER',
              help='Verify a point mass on this cylinder (e.g. 1,2,1,1,1) instead of the eigenmeasures.')
def verify(point_mass, **options):
    """Quasi-invariance, Haar fixed point and M* transform checks."""
    injected = None
    if point_mass:
        try:
            injected = parse_cylinder(point_mass)
        except HaarRuelleError as e:
            click.echo(f"✗ {e}", err=True)
            sys.exit(e.exit_code)
    execute(Command.VERIFY, options, injected=injected)


@cli.command('reproduce-example3')
@experiment_options
def reproduce_example3(**options):
    """Histograms at beta = 1, 10, 30 (k=5, n=9) plus verification."""
    if not options['config_file'] and not options['preset']:
        options['preset'] = 'example3'
    execute(Command.REPRODUCE_EXAMPLE3, options)


@cli.command('show-config')
@experiment_options
def show_config(**options):
    """Print the merged configuration document."""
    try:
        manager = ConfigManager(options['config_file'], options['preset'])
    except HaarRuelleError as e:
        click.echo(f"✗ {e}", err=True)
        sys.exit(e.exit_code)
    manager.apply_overrides(out=options['out'], threads=options['threads'],
                            tolerance=options['tolerance'], betas=options['betas'])
    click.echo(manager.export_settings())


if __name__ == "__main__":
    cli()
