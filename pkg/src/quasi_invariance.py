"""
Haar-Ruelle Lab - Quasi-Invariance
Finite-depth checks of the quasi-invariance equation, the Haar fixed-point
characterization and the e^U reweighting between M and M*.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple, Union

import numpy as np

from cocycles import ModularParameters
from eigensolver import CylinderMeasure, build_matrix
from errors import DepthError
from operators import DepthFunction, Flavor, OperatorSpec, haar_log_normalizer, operator_for
from relations import FreeCoordinateRelation
from symbolic import Alphabet, Cylinder, all_words, cylinder_word, format_cylinder

logger = logging.getLogger(__name__)


def _cylinder_vector(alphabet: Alphabet, depth: int, cylinder: Cylinder) -> np.ndarray:
    """Indicator of a cylinder no deeper than `depth`, over the depth-k words."""
    if cylinder.depth > depth:
        raise DepthError(f"depth-{cylinder.depth} cylinder in a depth-{depth} test")
    words = all_words(alphabet, depth)[:, :cylinder.depth]
    return np.all(words == np.array(cylinder.word), axis=1).astype(float)


@dataclass(frozen=True)
class CylinderPairIndicator:
    """h(x, y) = 1_A(x) 1_B(y)."""

    first: Cylinder
    second: Cylinder

    def matrix(self, alphabet: Alphabet, depth: int) -> np.ndarray:
        """h as a depth-k by depth-k table."""
        return np.outer(_cylinder_vector(alphabet, depth, self.first),
                        _cylinder_vector(alphabet, depth, self.second))

    def describe(self) -> str:
        """Short label for reports."""
        return f"A={format_cylinder(self.first)} B={format_cylinder(self.second)}"


@dataclass(frozen=True, eq=False)
class SeparableProduct:
    """h(x, y) = f(x) g(y)."""

    f: DepthFunction
    g: DepthFunction

    def matrix(self, alphabet: Alphabet, depth: int) -> np.ndarray:
        """h as a depth-k by depth-k table."""
        for fn in (self.f, self.g):
            if fn.depth != depth or fn.alphabet != alphabet:
                raise DepthError(f"product test factors must have depth {depth}")
        return np.outer(self.f.values, self.g.values)

    def describe(self) -> str:
        """Short label for reports."""
        return f"f(x)g(y) at depth {self.f.depth}"


PairTestFunction = Union[CylinderPairIndicator, SeparableProduct]


@dataclass(frozen=True)
class QuasiInvarianceReport:
    max_abs_residual: float
    worst_test: str
    tests_run: int

    def passed(self, tolerance: float) -> bool:
        """True when the worst residual is within tolerance."""
        return self.max_abs_residual <= tolerance

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready summary."""
        return {'max_abs_residual': self.max_abs_residual,
                'tests_run': self.tests_run,
                'worst_test': self.worst_test}


def _class_table(M: CylinderMeasure, relation: FreeCoordinateRelation,
                 params: ModularParameters) -> Tuple[np.ndarray, np.ndarray]:
    """targets[w, t] = index of psi_t(w), weights[w, t] = exp(-beta c(w, psi_t(w)))."""
    if M.alphabet != relation.alphabet:
        raise DepthError("measure and relation use different alphabets")
    op = operator_for(OperatorSpec(relation, params, Flavor.HAAR), M.depth)
    targets = np.array([[col for col, _ in row] for row in op.rows], dtype=np.int64)
    # the Haar rows carry the 1/K class average
    weights = np.array([[w for _, w in row] for row in op.rows]) * relation.class_size
    return targets, weights


def quasi_invariance_sides(M: CylinderMeasure, relation: FreeCoordinateRelation,
                           params: ModularParameters) -> Tuple[np.ndarray, np.ndarray]:
    """Both sides of the quasi-invariance equation for every depth-k pair indicator at once.

    left[A, B]  = sum_w M(w) sum_t 1_A(psi_t w) 1_B(w)
    right[A, B] = sum_w M(w) sum_t 1_A(w) 1_B(psi_t w) exp(-beta c(w, psi_t w))
    """
    targets, weights = _class_table(M, relation, params)
    n = M.masses.shape[0]
    rows = np.arange(n)
    left = np.zeros((n, n))
    right = np.zeros((n, n))
    for t in range(targets.shape[1]):
        np.add.at(left, (targets[:, t], rows), M.masses)
        np.add.at(right, (rows, targets[:, t]), M.masses * weights[:, t])
    return left, right


def quasi_invariance_residual(M: CylinderMeasure, relation: FreeCoordinateRelation,
                              params: ModularParameters, h: PairTestFunction) -> float:
    """|int sum_t h(psi_t x, x) dM - int sum_t h(x, psi_t x) exp(-beta c) dM| for one test function."""
    left, right = quasi_invariance_sides(M, relation, params)
    H = h.matrix(M.alphabet, M.depth)
    return float(abs(np.sum(H * left) - np.sum(H * right)))


def verify_quasi_invariance(M: CylinderMeasure, relation: FreeCoordinateRelation,
                            params: ModularParameters) -> QuasiInvarianceReport:
    """Run every depth-k cylinder-pair indicator and report the worst residual."""
    left, right = quasi_invariance_sides(M, relation, params)
    gap = np.abs(left - right)
    a, b = np.unravel_index(int(np.argmax(gap)), gap.shape)
    worst = CylinderPairIndicator(Cylinder(cylinder_word(int(a), M.depth, M.alphabet)),
                                  Cylinder(cylinder_word(int(b), M.depth, M.alphabet)))
    report = QuasiInvarianceReport(float(gap[a, b]), worst.describe(), gap.size)
    logger.info("quasi-invariance: %d tests, max residual %.3e at %s",
                report.tests_run, report.max_abs_residual, report.worst_test)
    return report


def haar_fixed_point_residual(M: CylinderMeasure, spec: OperatorSpec) -> float:
    """max over basis indicators f of |int f dM - int H(f) dM|."""
    A = build_matrix(spec.with_flavor(Flavor.HAAR), M.depth)
    return float(np.abs(M.masses - A.T @ M.masses).max())


def normalized_fixed_point_residual(M_star: CylinderMeasure, spec: OperatorSpec) -> float:
    """max over basis indicators f of |int f dM* - int H_{-beta c + b}(f) dM*|."""
    A = build_matrix(spec.with_flavor(Flavor.HAAR_NORMALIZED), M_star.depth)
    return float(np.abs(M_star.masses - A.T @ M_star.masses).max())


def transform_measure(M: CylinderMeasure, spec: OperatorSpec, direction: str = 'forward') -> CylinderMeasure:
    """forward: M* proportional to e^U M; backward: M proportional to e^-U M*; U = ln H(1)."""
    if direction not in ('forward', 'backward'):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    U = haar_log_normalizer(spec, M.depth).values
    sign = 1.0 if direction == 'forward' else -1.0
    return CylinderMeasure.normalized(M.alphabet, M.depth, np.exp(sign * U) * M.masses)


def point_mass(alphabet: Alphabet, cylinder: Cylinder) -> CylinderMeasure:
    """All mass on one cylinder, at that cylinder's depth."""
    alphabet.check_word(cylinder.word)
    masses = _cylinder_vector(alphabet, cylinder.depth, cylinder)
    return CylinderMeasure(alphabet, cylinder.depth, masses)


def compare_eigenmeasures(M0: CylinderMeasure, M1: CylinderMeasure) -> float:
    """L1 distance; both may be quasi-invariant without being equal."""
    return M0.l1_distance(M1)
