"""
Haar-Ruelle Lab - Experiment Runner
Coordinates solving, histogram reproduction and verification for one configuration.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, TypeVar

import numpy as np

from cocycles import ModularParameters
from eigensolver import CylinderMeasure, histogram, solve
from errors import DepthError, VerificationError
from operators import Flavor
from quasi_invariance import (compare_eigenmeasures, haar_fixed_point_residual,
                              normalized_fixed_point_residual, point_mass, transform_measure,
                              verify_quasi_invariance)
from reports import ResultWriter, format_beta
from settings import ExperimentConfig
from symbolic import Cylinder, format_cylinder

logger = logging.getLogger(__name__)

T = TypeVar('T')


class Command(Enum):
    EIGEN = "eigen"
    HISTOGRAM = "histogram"
    VERIFY = "verify"
    REPRODUCE_EXAMPLE3 = "reproduce-example3"


@dataclass
class RunSummary:
    """What a command produced: files written, lines for the console and pass/fail."""

    command: Command
    lines: List[str] = field(default_factory=list)
    files: List[str] = field(default_factory=list)
    passed: bool = True
    details: Dict[str, Any] = field(default_factory=dict)


def _map_betas(config: ExperimentConfig, fn: Callable[[float], T]) -> List[T]:
    """fn over the beta list, in order, on the configured thread count."""
    if config.threads <= 1:
        return [fn(beta) for beta in config.beta_list]
    with ThreadPoolExecutor(max_workers=config.threads) as executor:
        return list(executor.map(fn, config.beta_list))


def cmd_eigen(config: ExperimentConfig, writer: Optional[ResultWriter] = None) -> RunSummary:
    """Perron pair per beta; fails when a residual exceeds the verification tolerance."""
    writer = writer or ResultWriter(config.output_dir)
    summary = RunSummary(Command.EIGEN)

    results = _map_betas(config, lambda beta: solve(config.spec(beta), config.cylinder_depth,
                                                    config.eigen_tol, config.max_iter))
    for beta, result in zip(config.beta_list, results):
        writer.write_eigen(beta, result, config.verification_tol)
        writer.write_measure(beta, result.measure)
        writer.write_eigenfunction(beta, result.eigenfunction)
        ok = result.residual <= config.verification_tol
        summary.passed &= ok
        summary.lines.append(f"beta={format_beta(beta)}: rho={result.rho:.12g} lambda={result.lam:.12g} "
                             f"residual={result.residual:.3e} iterations={result.iterations}"
                             f"{'' if result.primitive else ' (not primitive)'} {'ok' if ok else 'FAIL'}")
        summary.details[format_beta(beta)] = result

    summary.files = list(writer.written)
    if not summary.passed:
        raise VerificationError("eigen residual above tolerance:\n" + "\n".join(summary.lines))
    return summary


def cmd_histogram(config: ExperimentConfig, writer: Optional[ResultWriter] = None) -> RunSummary:
    """Ratio-iteration histogram per beta with the Perron oracle alongside."""
    writer = writer or ResultWriter(config.output_dir)
    summary = RunSummary(Command.HISTOGRAM)

    hists = histogram(config.spec(config.beta_list[0]), config.cylinder_depth, config.iteration_steps,
                      config.base_point, config.beta_list, config.method, config.threads,
                      config.eigen_tol, config.max_iter)
    for hist in hists:
        writer.write_histogram(hist)
        writer.write_bars(hist, config.bar_width)
        line = (f"beta={format_beta(hist.beta)}: {len(hist.rows)} cylinders, total={hist.total:.12f}, "
                f"max |ratio - oracle|={hist.max_abs_diff:.3e}")
        if config.relation.d == 2 and config.cylinder_depth >= 2:
            line += f", mass(1,1,...)={hist.prefix_mass((1, 1)):.6f}"
        summary.lines.append(line)
        summary.details[format_beta(hist.beta)] = hist
    if config.plot_script:
        writer.write_plot_script(config.beta_list)

    summary.files = list(writer.written)
    return summary


def _measure_checks(M: CylinderMeasure, config: ExperimentConfig, beta: float) -> Dict[str, Any]:
    spec = config.spec(beta)
    report = verify_quasi_invariance(M, config.relation, ModularParameters(beta, config.cocycle))
    M_star = transform_measure(M, spec, 'forward')
    back = transform_measure(M_star, spec, 'backward')
    checks = report.to_dict()
    checks['haar_fixed_point_residual'] = haar_fixed_point_residual(M, spec)
    checks['normalized_fixed_point_residual'] = normalized_fixed_point_residual(M_star, spec)
    checks['round_trip_error'] = float(np.abs(back.masses - M.masses).max())
    return checks


def _verify_beta(config: ExperimentConfig, beta: float, injected: Optional[Cylinder]) -> Dict[str, Any]:
    if injected is not None:
        measures = {'point_mass': point_mass(config.relation.alphabet, injected)}
    else:
        flavors = [config.flavor]
        if config.cocycle.is_separable:
            flavors = [Flavor.HAAR_RUELLE_SEPARABLE, Flavor.HAAR_RUELLE_GENERAL]
        measures = {flavor.value: solve(config.spec(beta, flavor), config.cylinder_depth,
                                        config.eigen_tol, config.max_iter).measure
                    for flavor in flavors}

    entry: Dict[str, Any] = {'beta': beta,
                             'measures': {name: _measure_checks(M, config, beta)
                                          for name, M in measures.items()}}
    if len(measures) == 2:
        M0, M1 = measures.values()
        entry['eigenmeasure_l1_distance'] = compare_eigenmeasures(M0, M1)
    return entry


def _worst(checks: Dict[str, Any]) -> float:
    return max(checks['max_abs_residual'], checks['haar_fixed_point_residual'],
               checks['normalized_fixed_point_residual'], checks['round_trip_error'])


def cmd_verify(config: ExperimentConfig, injected: Optional[Cylinder] = None,
               writer: Optional[ResultWriter] = None) -> RunSummary:
    """Quasi-invariance suite, Haar fixed point and M* transform for each beta's eigenmeasures."""
    if injected is not None:
        config.relation.alphabet.check_word(injected.word)
        if injected.depth != config.cylinder_depth:
            raise DepthError(f"point mass cylinder {format_cylinder(injected)} must have depth "
                             f"{config.cylinder_depth}")
    writer = writer or ResultWriter(config.output_dir)
    summary = RunSummary(Command.VERIFY)

    entries = _map_betas(config, lambda beta: _verify_beta(config, beta, injected))
    tol = config.verification_tol
    for entry in entries:
        for name, checks in entry['measures'].items():
            ok = _worst(checks) <= tol
            summary.passed &= ok
            summary.lines.append(
                f"beta={format_beta(entry['beta'])} {name}: {checks['tests_run']} tests, "
                f"quasi-invariance {checks['max_abs_residual']:.3e} (worst {checks['worst_test']}), "
                f"haar {checks['haar_fixed_point_residual']:.3e}, "
                f"normalized {checks['normalized_fixed_point_residual']:.3e} {'ok' if ok else 'FAIL'}")
        if 'eigenmeasure_l1_distance' in entry:
            summary.lines.append(f"beta={format_beta(entry['beta'])}: |M0 - M1|_1 = "
                                 f"{entry['eigenmeasure_l1_distance']:.6e}")

    writer.write_verify({'tolerance': tol, 'passed': summary.passed, 'betas': entries})
    summary.files = list(writer.written)
    summary.details['betas'] = entries
    if not summary.passed:
        raise VerificationError("verification failed:\n" + "\n".join(summary.lines))
    return summary


def cmd_reproduce_example3(config: ExperimentConfig, writer: Optional[ResultWriter] = None) -> RunSummary:
    """Histograms and verification for the three-temperature experiment."""
    writer = writer or ResultWriter(config.output_dir)
    hist = cmd_histogram(config, writer)
    verify = cmd_verify(config, writer=writer)
    summary = RunSummary(Command.REPRODUCE_EXAMPLE3, hist.lines + verify.lines, list(writer.written))
    summary.details = {'histogram': hist.details, 'verify': verify.details}
    return summary


def run_command(command: Command, config: ExperimentConfig, **options) -> RunSummary:
    """Dispatch a command to its implementation."""
    if command is Command.EIGEN:
        return cmd_eigen(config)
    elif command is Command.HISTOGRAM:
        return cmd_histogram(config)
    elif command is Command.VERIFY:
        return cmd_verify(config, injected=options.get('injected'))
    elif command is Command.REPRODUCE_EXAMPLE3:
        return cmd_reproduce_example3(config)
    raise ValueError(f"unknown command {command!r}")
