"""
Haar-Ruelle Lab - Transfer Operators
Haar-Ruelle, separable Haar-Ruelle, Hutchinson-Barnsley and Haar operators
realized exactly on functions of the first k coordinates.
"""

import functools
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from cocycles import CocycleSpec, ModularParameters, Potential, evaluate_cocycle
from errors import DepthError, SymbolError
from relations import FreeCoordinateRelation, class_of, psi
from symbolic import (Alphabet, Cylinder, Point, Word, all_words, concat,
                      cylinder_index, point_from_word)

logger = logging.getLogger(__name__)


class Flavor(Enum):
    HAAR_RUELLE_GENERAL = "haar_ruelle_general"
    HAAR_RUELLE_SEPARABLE = "haar_ruelle_separable"
    HUTCHINSON_BARNSLEY = "hutchinson_barnsley"
    HAAR = "haar"
    HAAR_NORMALIZED = "haar_normalized"

    @property
    def extends(self) -> bool:
        """True for the operators that sum over the classes of j*x."""
        return self in (Flavor.HAAR_RUELLE_GENERAL, Flavor.HAAR_RUELLE_SEPARABLE,
                        Flavor.HUTCHINSON_BARNSLEY)

    @property
    def needs_potential(self) -> bool:
        """True for the flavors whose weights come from a potential."""
        return self in (Flavor.HAAR_RUELLE_SEPARABLE, Flavor.HUTCHINSON_BARNSLEY)


@dataclass(frozen=True, eq=False)
class DepthFunction:
    """f : X -> R depending only on the first `depth` coordinates."""

    alphabet: Alphabet
    depth: int
    values: np.ndarray

    def __post_init__(self):
        if self.depth < 1:
            raise DepthError(f"depth functions need depth >= 1, got {self.depth}")
        values = np.array(self.values, dtype=float)
        if values.shape != (self.alphabet.d ** self.depth,):
            raise DepthError(f"a depth-{self.depth} function needs {self.alphabet.d ** self.depth} values, "
                             f"got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def constant(cls, alphabet: Alphabet, depth: int, value: float = 1.0) -> 'DepthFunction':
        """The constant function `value`."""
        return cls(alphabet, depth, np.full(alphabet.d ** depth, float(value)))

    @classmethod
    def indicator(cls, alphabet: Alphabet, cylinder: Cylinder) -> 'DepthFunction':
        """1 on the cylinder, 0 elsewhere, at the cylinder's depth."""
        values = np.zeros(alphabet.d ** cylinder.depth)
        values[cylinder_index(cylinder.word, alphabet)] = 1.0
        return cls(alphabet, cylinder.depth, values)

    @classmethod
    def from_function(cls, alphabet: Alphabet, depth: int, fn: Callable[[Word], float]) -> 'DepthFunction':
        """Tabulate fn over every depth-`depth` word."""
        return cls(alphabet, depth, np.array([fn(tuple(w)) for w in all_words(alphabet, depth)]))

    @classmethod
    def random(cls, alphabet: Alphabet, depth: int, rng: np.random.Generator,
               low: float = -1.0, high: float = 1.0) -> 'DepthFunction':
        """Values drawn uniformly from [low, high)."""
        return cls(alphabet, depth, rng.uniform(low, high, size=alphabet.d ** depth))

    def at(self, word: Word) -> float:
        """Value on the cylinder with this word."""
        return float(self.values[cylinder_index(word[:self.depth], self.alphabet)])

    def __call__(self, x: Point) -> float:
        """Value at x, read from its first `depth` coordinates."""
        return self.at(x.word(self.depth))

    def _compatible(self, other: 'DepthFunction'):
        if other.depth != self.depth or other.alphabet != self.alphabet:
            raise DepthError("depth functions must share alphabet and depth")

    def __add__(self, other: 'DepthFunction') -> 'DepthFunction':
        self._compatible(other)
        return DepthFunction(self.alphabet, self.depth, self.values + other.values)

    def __sub__(self, other: 'DepthFunction') -> 'DepthFunction':
        self._compatible(other)
        return DepthFunction(self.alphabet, self.depth, self.values - other.values)

    def __mul__(self, scalar: float) -> 'DepthFunction':
        return DepthFunction(self.alphabet, self.depth, self.values * float(scalar))

    __rmul__ = __mul__

    def sup_distance(self, other: 'DepthFunction') -> float:
        """Largest absolute difference of values."""
        self._compatible(other)
        return float(np.max(np.abs(self.values - other.values)))


@dataclass(frozen=True)
class OperatorSpec:
    """Relation, inverse temperature, cocycle and operator flavor."""

    relation: FreeCoordinateRelation
    params: ModularParameters
    flavor: Flavor = Flavor.HAAR_RUELLE_SEPARABLE

    @property
    def alphabet(self) -> Alphabet:
        """Symbols of the relation."""
        return self.relation.alphabet

    @property
    def beta(self) -> float:
        """Inverse temperature."""
        return self.params.beta

    @property
    def cocycle(self) -> CocycleSpec:
        """Cocycle of the modular parameters."""
        return self.params.cocycle

    @property
    def potential(self) -> Potential:
        """Potential of a separable cocycle; DepthError for general ones."""
        if not self.cocycle.is_separable:
            raise DepthError(f"the {self.flavor.value} operator needs a separable cocycle")
        return self.cocycle.potential

    def with_flavor(self, flavor: Flavor) -> 'OperatorSpec':
        """Same relation and parameters with another flavor."""
        return replace(self, flavor=flavor)

    def with_beta(self, beta: float) -> 'OperatorSpec':
        """Same relation, cocycle and flavor at another beta."""
        return replace(self, params=replace(self.params, beta=float(beta)))

    @property
    def log_scale(self) -> float:
        """min of beta*V over the table for the potential flavors, else 0.

        Operator rows store weights times exp(log_scale).
        """
        if not self.flavor.needs_potential:
            return 0.0
        return min(self.beta * v for v in self.potential.table)

    def check_depth(self, k: int):
        """Raise DepthError unless the operator maps depth-k functions to depth-k functions."""
        if k < 1:
            raise DepthError(f"depth must be >= 1, got {k}")
        if self.relation.max_free > k:
            raise DepthError(f"free coordinate {self.relation.max_free} lies past depth {k}")
        # arguments of the extending flavors are j*x, one coordinate deeper
        reach = k + 1 if self.flavor.extends else k
        if self.cocycle.depth > reach:
            raise DepthError(f"cocycle depth {self.cocycle.depth} exceeds {reach} for the "
                             f"{self.flavor.value} operator at depth {k}")
        if self.flavor.needs_potential:
            self.potential


def _haar_average(spec: OperatorSpec, x: Point, base: Optional[DepthFunction]) -> float:
    """H_{-beta c}(g)(x) with g = base (1 when base is None)."""
    total = 0.0
    members = class_of(spec.relation, x)
    for s in members:
        g = 1.0 if base is None else base(s)
        total += g * math.exp(-spec.beta * evaluate_cocycle(spec.cocycle, x, s, spec.relation))
    return total / len(members)


def branches_at(spec: OperatorSpec, x: Point, base: Optional[DepthFunction] = None,
                log_scale: float = 0.0) -> List[Tuple[Point, float]]:
    """The points an operator samples at x with their weights, j outer and class index inner.

    Potential-flavor weights are multiplied by exp(log_scale).
    """
    rel = spec.relation
    beta = spec.beta
    branches = []
    if spec.flavor.extends:
        scale = 1.0 / rel.d if spec.flavor is not Flavor.HUTCHINSON_BARNSLEY else 1.0
        for j in rel.alphabet.symbols:
            y = concat(j, x, rel.alphabet)
            for s in class_of(rel, y):
                if spec.flavor is Flavor.HAAR_RUELLE_GENERAL:
                    exponent = -beta * evaluate_cocycle(spec.cocycle, y, s, rel)
                else:
                    exponent = log_scale - beta * spec.potential(s)
                branches.append((s, scale * math.exp(exponent)))
        return branches

    size = rel.class_size
    if spec.flavor is Flavor.HAAR_NORMALIZED:
        log_x = math.log(_haar_average(spec, x, base))
    for s in class_of(rel, x):
        exponent = -beta * evaluate_cocycle(spec.cocycle, x, s, rel)
        if spec.flavor is Flavor.HAAR_NORMALIZED:
            exponent += math.log(_haar_average(spec, s, base)) - log_x
        branches.append((s, math.exp(exponent) / size))
    return branches


class TransferOperator:
    """An operator spec realized on the depth-k function space."""

    def __init__(self, spec: OperatorSpec, depth: int, base: Optional[DepthFunction] = None):
        spec.check_depth(depth)
        if base is not None:
            if spec.flavor is not Flavor.HAAR_NORMALIZED:
                raise DepthError("a base function only applies to the normalized Haar operator")
            if base.depth > depth or np.any(base.values <= 0):
                raise DepthError("the normalizing base must be positive with depth at most the operator depth")
        self.spec = spec
        self.depth = depth
        self.alphabet = spec.alphabet
        self.size = self.alphabet.d ** depth
        self.log_scale = spec.log_scale
        self.rows = []
        for word in all_words(self.alphabet, depth):
            x = point_from_word(tuple(word))
            self.rows.append([(cylinder_index(s.word(depth), self.alphabet), weight)
                              for s, weight in branches_at(spec, x, base, self.log_scale)])
        logger.debug("built %s operator on %d cylinders (%d branches each)",
                     spec.flavor.value, self.size, len(self.rows[0]))

    def apply(self, f: DepthFunction) -> DepthFunction:
        """Operator applied to a depth-k function."""
        if f.depth != self.depth or f.alphabet != self.alphabet:
            raise DepthError(f"operator built at depth {self.depth} applied to a depth-{f.depth} function")
        values = f.values
        out = np.empty(self.size)
        for r, row in enumerate(self.rows):
            total = 0.0
            for col, weight in row:
                total += weight * values[col]
            out[r] = total
        if self.log_scale:
            out *= math.exp(-self.log_scale)
        return DepthFunction(self.alphabet, self.depth, out)

    def scaled_matrix(self) -> np.ndarray:
        """The matrix times exp(log_scale)."""
        A = np.zeros((self.size, self.size))
        for r, row in enumerate(self.rows):
            for col, weight in row:
                A[r, col] += weight
        return A

    def matrix(self) -> np.ndarray:
        """A with A @ f.values == apply(f).values."""
        A = self.scaled_matrix()
        if self.log_scale:
            A *= math.exp(-self.log_scale)
        return A


@functools.lru_cache(maxsize=64)
def operator_for(spec: OperatorSpec, depth: int) -> TransferOperator:
    """Cached TransferOperator for a spec and depth."""
    return TransferOperator(spec, depth)


def apply(spec: OperatorSpec, f: DepthFunction) -> DepthFunction:
    """Apply the operator of spec to f at f's depth."""
    return operator_for(spec, f.depth).apply(f)


def apply_haar_ruelle(spec: OperatorSpec, f: DepthFunction) -> DepthFunction:
    """L_{-beta c}(f)(x) = 1/d sum_j sum_i f(psi_i(j*x)) exp(-beta c(j*x, psi_i(j*x)))."""
    return apply(spec.with_flavor(Flavor.HAAR_RUELLE_GENERAL), f)


def apply_separable_haar_ruelle(spec: OperatorSpec, f: DepthFunction) -> DepthFunction:
    """L_{-beta V}(f)(x) = 1/d sum_j sum_i f(psi_i(j*x)) exp(-beta V(psi_i(j*x)))."""
    return apply(spec.with_flavor(Flavor.HAAR_RUELLE_SEPARABLE), f)


def apply_hutchinson_barnsley(spec: OperatorSpec, f: DepthFunction) -> DepthFunction:
    """B_R(f) = d L_{-beta V}(f)."""
    return apply(spec.with_flavor(Flavor.HUTCHINSON_BARNSLEY), f)


def apply_haar(spec: OperatorSpec, f: DepthFunction) -> DepthFunction:
    """H_{-beta c}(f)(x) = 1/K sum_t f(psi_t(x)) exp(-beta c(x, psi_t(x)))."""
    return apply(spec.with_flavor(Flavor.HAAR), f)


def apply_normalized_haar(spec: OperatorSpec, f: DepthFunction,
                          base: Optional[DepthFunction] = None) -> DepthFunction:
    """H_{-beta c + b}(f) with b(x, s) = ln H(g)(s) - ln H(g)(x); g = base, default 1."""
    spec = spec.with_flavor(Flavor.HAAR_NORMALIZED)
    if base is None:
        return apply(spec, f)
    return TransferOperator(spec, f.depth, base).apply(f)


def haar_log_normalizer(spec: OperatorSpec, depth: int) -> DepthFunction:
    """U = ln H_{-beta c}(1) on depth-k cylinders."""
    one = DepthFunction.constant(spec.alphabet, depth)
    averaged = apply_haar(spec, one)
    return DepthFunction(spec.alphabet, depth, np.log(averaged.values))


def orbit(spec: OperatorSpec, x0: Point, choices: Sequence[Tuple[int, int]]) -> List[Tuple[Point, float]]:
    """Backward orbit x^0, x^{m+1} = psi_i(j * x^m) with cumulative branch weights."""
    if not spec.flavor.extends:
        raise DepthError("orbits follow the Haar-Ruelle branches only")
    rel = spec.relation
    path = [(x0, 1.0)]
    x, weight = x0, 1.0
    for j, i in choices:
        y = concat(j, x, rel.alphabet)
        s = psi(rel, i, y)
        branch = (j - 1) * rel.class_size + (i - 1)
        candidates = branches_at(spec, x)
        if candidates[branch][0] != s:
            raise SymbolError(f"branch ({j}, {i}) is not in canonical order")
        weight *= candidates[branch][1]
        x = s
        path.append((x, weight))
    return path
