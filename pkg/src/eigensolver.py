"""
Haar-Ruelle Lab - Eigensolver
Perron eigenpairs of the finite-depth operator matrices and the ratio iteration
B^n(f)(x0) / B^n(1)(x0) that approximates eigenmeasure integrals.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from cocycles import Potential
from errors import ConvergenceError, DepthError
from operators import DepthFunction, Flavor, OperatorSpec, apply, branches_at, operator_for
from symbolic import (Alphabet, Cylinder, Point, cylinder_index, enumerate_cylinders,
                      format_cylinder, t_coordinate)

logger = logging.getLogger(__name__)

RATIO_METHODS = ('tree', 'memo', 'matrix')


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """A probability on X seen through its depth-k cylinders."""

    alphabet: Alphabet
    depth: int
    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        if masses.shape != (self.alphabet.d ** self.depth,):
            raise DepthError(f"a depth-{self.depth} measure needs {self.alphabet.d ** self.depth} masses, "
                             f"got shape {masses.shape}")
        if np.any(masses < 0):
            raise ValueError("cylinder masses must be nonnegative")
        if abs(masses.sum() - 1.0) > 1e-12:
            raise ValueError(f"cylinder masses must sum to 1, got {masses.sum()!r}")
        masses.setflags(write=False)
        object.__setattr__(self, 'masses', masses)

    @classmethod
    def normalized(cls, alphabet: Alphabet, depth: int, weights: np.ndarray) -> 'CylinderMeasure':
        """Scale nonnegative weights to total mass 1."""
        weights = np.asarray(weights, dtype=float)
        return cls(alphabet, depth, weights / weights.sum())

    @classmethod
    def uniform(cls, alphabet: Alphabet, depth: int) -> 'CylinderMeasure':
        """Equal mass on every depth-k cylinder."""
        return cls.normalized(alphabet, depth, np.ones(alphabet.d ** depth))

    def mass(self, cylinder: Cylinder) -> float:
        """Mass of a cylinder no deeper than the measure."""
        m = cylinder.depth
        if m > self.depth:
            raise DepthError(f"depth-{m} cylinder measured by a depth-{self.depth} measure")
        d = self.alphabet.d
        blocks = self.masses.reshape(d ** m, d ** (self.depth - m))
        return float(blocks[cylinder_index(cylinder.word, self.alphabet)].sum())

    def integrate(self, f: DepthFunction) -> float:
        """int f dM for f of the same depth."""
        if f.depth != self.depth or f.alphabet != self.alphabet:
            raise DepthError("function and measure must share alphabet and depth")
        return float(f.values @ self.masses)

    def l1_distance(self, other: 'CylinderMeasure') -> float:
        """Sum of absolute mass differences."""
        return float(np.abs(self.masses - other.masses).sum())


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Perron eigenpair; eigenvalue is that of the matrix solved, rho and lam its B_R and L readings."""

    eigenvalue: float
    rho: float
    lam: float
    measure: CylinderMeasure
    eigenfunction: DepthFunction
    residual: float
    iterations: int
    primitive: bool
    log_eigenvalue: float = math.nan


def build_matrix(spec: OperatorSpec, k: int) -> np.ndarray:
    """A with A @ vec(f) == vec(apply(spec, f)) on depth-k functions."""
    return operator_for(spec, k).matrix()


def is_primitive(A: np.ndarray) -> bool:
    """Some power of A is strictly positive, checked by boolean squaring up to (n-1)^2 + 1."""
    n = A.shape[0]
    bound = (n - 1) ** 2 + 1
    pattern = (A > 0).astype(float)
    power = 1
    while True:
        if np.all(pattern > 0):
            return True
        if power >= bound:
            return False
        pattern = ((pattern @ pattern) > 0).astype(float)
        power *= 2


def perron_pair(A: np.ndarray, tol: float = 1e-13, max_iter: int = 100000,
                alphabet: Optional[Alphabet] = None) -> EigenResult:
    """Right and left Perron vectors of a nonnegative matrix by power iteration.

    Without an alphabet the vectors are read as depth-1 over n symbols.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if np.any(A < 0):
        raise ValueError("perron_pair expects a nonnegative matrix")
    if alphabet is None:
        alphabet = Alphabet(n)
    depth = round(math.log(n, alphabet.d))
    if alphabet.d ** depth != n:
        raise DepthError(f"matrix size {n} is not a power of {alphabet.d}")

    h = np.ones(n)
    mu = np.ones(n) / n
    for iteration in range(1, max_iter + 1):
        h_next = A @ h
        mu_next = A.T @ mu
        if h_next.max() <= 0 or mu_next.sum() <= 0:
            raise ConvergenceError("power iteration collapsed to the zero vector")
        h_next /= h_next.max()
        mu_next /= mu_next.sum()
        delta = max(np.abs(h_next - h).max(), np.abs(mu_next - mu).max())
        h, mu = h_next, mu_next
        if delta < tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations "
                               f"(last step {delta:.3e})")

    Ah = A @ h
    eigenvalue = float(mu @ Ah / (mu @ h))
    h = h / (h @ mu)
    residual = float(max(np.abs(A.T @ mu - eigenvalue * mu).max(),
                         np.abs(A @ h - eigenvalue * h).max()))
    primitive = is_primitive(A)
    if not primitive:
        logger.warning("matrix of size %d is not primitive; the eigenpair may not be unique", n)
    logger.debug("perron pair: eigenvalue=%.15g residual=%.3e after %d iterations",
                 eigenvalue, residual, iteration)
    return EigenResult(eigenvalue=eigenvalue, rho=eigenvalue, lam=eigenvalue,
                       measure=CylinderMeasure.normalized(alphabet, depth, mu),
                       eigenfunction=DepthFunction(alphabet, depth, h),
                       residual=residual, iterations=iteration, primitive=primitive,
                       log_eigenvalue=math.log(eigenvalue) if eigenvalue > 0 else -math.inf)


def solve(spec: OperatorSpec, k: int, tol: float = 1e-13, max_iter: int = 100000) -> EigenResult:
    """Perron pair of the operator at depth k with rho (B_R) and lam (L) side by side."""
    op = operator_for(spec, k)
    result = perron_pair(op.scaled_matrix(), tol, max_iter, spec.alphabet)
    if op.log_scale:
        result = replace(result, eigenvalue=result.eigenvalue * math.exp(-op.log_scale),
                         log_eigenvalue=result.log_eigenvalue - op.log_scale)
    d = spec.alphabet.d
    if spec.flavor is Flavor.HUTCHINSON_BARNSLEY:
        result = replace(result, rho=result.eigenvalue, lam=result.eigenvalue / d)
    elif spec.flavor.extends:
        result = replace(result, rho=result.eigenvalue * d, lam=result.eigenvalue)
    logger.info("%s beta=%g k=%d: rho=%.12g lambda=%.12g residual=%.2e",
                spec.flavor.value, spec.beta, k, result.rho, result.lam, result.residual)
    return result


def gibbs_measure(result: EigenResult) -> CylinderMeasure:
    """h * mu renormalized to mass 1."""
    m = result.measure
    return CylinderMeasure.normalized(m.alphabet, m.depth, result.eigenfunction.values * m.masses)


def eigenfunction_convergence(spec: OperatorSpec, f: DepthFunction, result: EigenResult,
                              steps: int) -> np.ndarray:
    """sup |eigenvalue^-n A^n f - (int f dmu) h| for n = 1..steps."""
    target = result.measure.integrate(f) * result.eigenfunction.values
    distances = np.empty(steps)
    g = f
    for n in range(steps):
        g = apply(spec, g) * (1.0 / result.eigenvalue)
        distances[n] = np.abs(g.values - target).max()
    return distances


def _check_steps(spec: OperatorSpec, n: int):
    if n < 1:
        raise ValueError(f"iteration steps must be >= 1, got {n}")
    if not spec.flavor.extends:
        raise DepthError("the ratio iteration runs on the Haar-Ruelle flavors")


def _ratio_tree(spec: OperatorSpec, f: DepthFunction, x0: Point, n: int) -> float:
    log_scale = spec.log_scale

    # each node returns (numerator, denominator) / denominator and log of the denominator
    def expand(levels: int, x: Point) -> Tuple[np.ndarray, float]:
        if levels == 0:
            return np.array([f(x), 1.0]), 0.0
        children = [(weight, expand(levels - 1, s))
                    for s, weight in branches_at(spec, x, log_scale=log_scale)]
        top = max(scale for _, (_, scale) in children)
        total = np.zeros(2)
        for weight, (pair, scale) in children:
            total += weight * math.exp(scale - top) * pair
        norm = total[1]
        return total / norm, top + math.log(norm)

    pair, _ = expand(n, x0)
    return float(pair[0] / pair[1])


def _ratio_memo(spec: OperatorSpec, f: DepthFunction, x0: Point, n: int) -> float:
    rows = operator_for(spec, f.depth).rows
    memo: Dict[Tuple[int, int], Tuple[float, float]] = {}

    def ratio(levels: int, index: int) -> Tuple[float, float]:
        """(B^levels f / B^levels 1, log B^levels 1) at the cylinder with this index."""
        if levels == 0:
            return float(f.values[index]), 0.0
        key = (levels, index)
        if key in memo:
            return memo[key]
        children = [(weight, ratio(levels - 1, col)) for col, weight in rows[index]]
        top = max(scale for _, (_, scale) in children)
        num = den = 0.0
        for weight, (value, scale) in children:
            w = weight * math.exp(scale - top)
            num += w * value
            den += w
        memo[key] = (num / den, top + math.log(den))
        return memo[key]

    return ratio(n, cylinder_index(x0.word(f.depth), f.alphabet))[0]


def _ratio_matrix(spec: OperatorSpec, f: DepthFunction, x0: Point, n: int) -> float:
    A = operator_for(spec, f.depth).scaled_matrix()
    num = f.values.copy()
    den = np.ones_like(num)
    for _ in range(n):
        num = A @ num
        den = A @ den
        scale = den.max()
        num /= scale
        den /= scale
    index = cylinder_index(x0.word(f.depth), f.alphabet)
    return float(num[index] / den[index])


def ratio_iteration(spec: OperatorSpec, f: DepthFunction, x0: Point, n: int,
                    method: str = 'matrix') -> float:
    """B^n(f)(x0) / B^n(1)(x0); every method gives the same value up to rounding."""
    _check_steps(spec, n)
    spec.check_depth(f.depth)
    if method == 'tree':
        return _ratio_tree(spec, f, x0, n)
    if method == 'memo':
        return _ratio_memo(spec, f, x0, n)
    if method == 'matrix':
        return _ratio_matrix(spec, f, x0, n)
    raise ValueError(f"unknown ratio method {method!r}; choose from {RATIO_METHODS}")


def ratio_iteration_all(spec: OperatorSpec, k: int, x0: Point, n: int) -> CylinderMeasure:
    """The ratio for every depth-k cylinder indicator at once, from the row e_{x0}^T A^n."""
    _check_steps(spec, n)
    A = operator_for(spec, k).scaled_matrix()
    row = np.zeros(A.shape[0])
    row[cylinder_index(x0.word(k), spec.alphabet)] = 1.0
    for _ in range(n):
        row = row @ A
        row /= row.sum()
    return CylinderMeasure.normalized(spec.alphabet, k, row)


@dataclass(frozen=True)
class HistogramRow:
    beta: float
    cylinder: Cylinder
    t: Optional[float]
    mass_ratio_iteration: float
    mass_oracle: float

    @property
    def abs_diff(self) -> float:
        """Absolute difference between the ratio iteration and the oracle."""
        return abs(self.mass_ratio_iteration - self.mass_oracle)

    @property
    def label(self) -> str:
        """Cylinder word as text."""
        return format_cylinder(self.cylinder)


@dataclass(frozen=True)
class Histogram:
    beta: float
    rows: Tuple[HistogramRow, ...]

    @property
    def total(self) -> float:
        """Total ratio-iteration mass."""
        return math.fsum(row.mass_ratio_iteration for row in self.rows)

    @property
    def max_abs_diff(self) -> float:
        """Largest absolute difference to the oracle over all rows."""
        return max(row.abs_diff for row in self.rows)

    def prefix_mass(self, word: Sequence[int], oracle: bool = False) -> float:
        """Mass of the cylinders starting with word."""
        word = tuple(word)
        return math.fsum(row.mass_oracle if oracle else row.mass_ratio_iteration
                         for row in self.rows if row.cylinder.word[:len(word)] == word)


def histogram_for_beta(spec: OperatorSpec, k: int, n: int, x0: Point, method: str = 'matrix',
                       tol: float = 1e-13, max_iter: int = 100000) -> Histogram:
    """Ratio-iteration masses of every depth-k cylinder next to the Perron oracle."""
    alphabet = spec.alphabet
    oracle = solve(spec, k, tol, max_iter).measure
    if method == 'matrix':
        masses = ratio_iteration_all(spec, k, x0, n).masses
    else:
        masses = np.array([ratio_iteration(spec, DepthFunction.indicator(alphabet, c), x0, n, method)
                           for c in enumerate_cylinders(alphabet, k)])
    rows = []
    for index, cylinder in enumerate(enumerate_cylinders(alphabet, k)):
        t = t_coordinate(cylinder, alphabet) if alphabet.d == 2 else None
        rows.append(HistogramRow(spec.beta, cylinder, t, float(masses[index]), float(oracle.masses[index])))
    result = Histogram(spec.beta, tuple(rows))
    logger.info("histogram beta=%g: total=%.15f max |ratio - oracle|=%.3e",
                spec.beta, result.total, result.max_abs_diff)
    return result


def histogram(spec: OperatorSpec, k: int, n: int, x0: Point, beta_list: Sequence[float],
              method: str = 'matrix', threads: int = 1, tol: float = 1e-13,
              max_iter: int = 100000) -> List[Histogram]:
    """One histogram per beta, in beta_list order whatever the thread count."""
    if not beta_list:
        raise ValueError("histogram needs at least one beta")

    def one(beta: float) -> Histogram:
        return histogram_for_beta(spec.with_beta(beta), k, n, x0, method, tol, max_iter)

    if threads <= 1:
        return [one(beta) for beta in beta_list]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(one, beta_list))


def product_form_measure(potential: Potential, beta: float, k: int) -> CylinderMeasure:
    """mu(a_1..a_k) = p(a_1) p(a_2) d^-(k-2) with p(a) proportional to exp(-beta V(a)).

    Closed form of the separable eigenmeasure when V depends on x_1 alone and
    the third coordinate is the only free one.
    """
    if potential.depth > 1:
        raise DepthError(f"the product form needs a potential of depth <= 1, got {potential.depth}")
    if k < 2:
        raise DepthError(f"the product form needs depth >= 2, got {k}")
    alphabet = potential.alphabet
    q = np.array([math.exp(-beta * potential.of_word((a,))) for a in alphabet.symbols])
    p = q / q.sum()
    masses = np.multiply.outer(p, p).ravel()
    masses = np.repeat(masses, alphabet.d ** (k - 2)) / alphabet.d ** (k - 2)
    return CylinderMeasure.normalized(alphabet, k, masses)
