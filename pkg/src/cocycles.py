"""
Haar-Ruelle Lab - Cocycles
Potentials, separable and general cocycles, modular weights and regularity constants.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from errors import ConfigError, DepthError, EquivalenceError, SymbolError
from relations import FreeCoordinateRelation, is_equivalent, psi
from symbolic import Alphabet, Point, Word, all_words, cylinder_index, first_difference_grid

logger = logging.getLogger(__name__)


def _quarter_square_first_coord(word: Word) -> float:
    return 0.25 * (word[0] - 1) ** 2


BUILTIN_POTENTIALS: Dict[str, Tuple[int, Callable[[Word], float]]] = {
    'zero': (0, lambda word: 0.0),
    'quarter_square_first_coord': (1, _quarter_square_first_coord),
}


@dataclass(frozen=True)
class Potential:
    """V(x) depending on the first `depth` coordinates, stored as a lexicographic table."""

    alphabet: Alphabet
    depth: int
    table: Tuple[float, ...]

    def __post_init__(self):
        if self.depth < 0:
            raise DepthError(f"potential depth must be >= 0, got {self.depth}")
        table = tuple(float(v) for v in self.table)
        if len(table) != self.alphabet.d ** self.depth:
            raise ConfigError(f"potential table needs {self.alphabet.d ** self.depth} values, got {len(table)}")
        if not all(math.isfinite(v) for v in table):
            raise ConfigError("potential values must be finite")
        object.__setattr__(self, 'table', table)

    @classmethod
    def from_function(cls, alphabet: Alphabet, depth: int, fn: Callable[[Word], float]) -> 'Potential':
        """Tabulate fn over every depth-`depth` word."""
        words = [tuple(w) for w in all_words(alphabet, depth)] if depth else [()]
        return cls(alphabet, depth, tuple(fn(w) for w in words))

    @classmethod
    def zero(cls, alphabet: Alphabet) -> 'Potential':
        """The constant zero potential."""
        return cls(alphabet, 0, (0.0,))

    @classmethod
    def builtin(cls, name: str, alphabet: Alphabet) -> 'Potential':
        """Look up a named potential from BUILTIN_POTENTIALS."""
        if name not in BUILTIN_POTENTIALS:
            raise ConfigError(f"unknown builtin potential {name!r}; choose from {sorted(BUILTIN_POTENTIALS)}")
        depth, fn = BUILTIN_POTENTIALS[name]
        return cls.from_function(alphabet, depth, fn)

    @classmethod
    def from_config(cls, data: Dict[str, Any], alphabet: Alphabet) -> 'Potential':
        """Build from {"depth": 1, "table": {"1": 0.0, "2": 0.25}} or {"builtin": name}."""
        if 'builtin' in data:
            return cls.builtin(data['builtin'], alphabet)
        try:
            depth = int(data['depth'])
            raw = data['table']
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid potential {data!r}: {e}") from None
        if depth == 0:
            values = raw if isinstance(raw, list) else list(raw.values())
            return cls(alphabet, 0, tuple(values))
        table = [0.0] * alphabet.d ** depth
        seen = set()
        try:
            for key, value in raw.items():
                word = tuple(int(part) for part in str(key).split(","))
                if len(word) != depth:
                    raise ConfigError(f"potential key {key!r} is not a depth-{depth} word")
                index = cylinder_index(word, alphabet)
                table[index] = float(value)
                seen.add(index)
        except (AttributeError, ValueError, SymbolError) as e:
            raise ConfigError(f"invalid potential table {raw!r}: {e}") from None
        if len(seen) != len(table):
            raise ConfigError(f"potential table must list all {len(table)} depth-{depth} words")
        return cls(alphabet, depth, tuple(table))

    def to_config(self) -> Dict[str, Any]:
        """Inverse of from_config, always in table form."""
        if self.depth == 0:
            return {'depth': 0, 'table': list(self.table)}
        words = all_words(self.alphabet, self.depth)
        return {'depth': self.depth,
                'table': {",".join(str(a) for a in w): v for w, v in zip(words, self.table)}}

    def of_word(self, word: Word) -> float:
        """V on any word at least `depth` long."""
        if len(word) < self.depth:
            raise DepthError(f"potential of depth {self.depth} evaluated on a length-{len(word)} word")
        return self.table[cylinder_index(word[:self.depth], self.alphabet)]

    def __call__(self, x: Point) -> float:
        """V(x) read from the first `depth` coordinates."""
        return self.of_word(x.word(self.depth))

    def values(self, k: int) -> np.ndarray:
        """V on every depth-k word, k >= depth."""
        return np.array([self.of_word(tuple(w)) for w in all_words(self.alphabet, k)])


class CocycleKind(Enum):
    SEPARABLE = "separable"
    GENERAL = "general"


@dataclass(frozen=True)
class CoboundarySum:
    """c(x, y) = sum_k w_k (V_k(y) - V_k(x))."""

    terms: Tuple[Tuple[float, Potential], ...]

    def __call__(self, x: Point, y: Point) -> float:
        """Weighted sum of the terms at (x, y)."""
        return sum(w * (V(y) - V(x)) for w, V in self.terms)


@dataclass(frozen=True)
class LinearCombination:
    """c(x, y) + alpha b(x, y)."""

    first: 'CocycleSpec'
    alpha: float
    second: 'CocycleSpec'

    def __call__(self, x: Point, y: Point) -> float:
        """c(x, y) + alpha b(x, y) at the pair."""
        return self.first.value(x, y) + self.alpha * self.second.value(x, y)


@dataclass(frozen=True)
class CocycleSpec:
    """A cocycle on the groupoid of a relation, with a declared evaluation depth."""

    kind: CocycleKind
    depth: int
    potential: Optional[Potential] = None
    function: Optional[Callable[[Point, Point], float]] = None

    @classmethod
    def separable(cls, potential: Potential) -> 'CocycleSpec':
        """The coboundary cocycle of a potential."""
        return cls(CocycleKind.SEPARABLE, potential.depth, potential=potential)

    @classmethod
    def general(cls, function: Callable[[Point, Point], float], depth: int) -> 'CocycleSpec':
        """Wrap an arbitrary function of equivalent pairs with its declared depth."""
        if depth < 0:
            raise DepthError(f"cocycle depth must be >= 0, got {depth}")
        return cls(CocycleKind.GENERAL, depth, function=function)

    @classmethod
    def from_config(cls, data: Dict[str, Any], alphabet: Alphabet) -> 'CocycleSpec':
        """Build from {"kind": "separable", "potential": ...} or {"kind": "general", "terms": [...]}."""
        kind = data.get('kind', 'separable')
        if kind == 'separable':
            return cls.separable(Potential.from_config(data.get('potential', {'builtin': 'zero'}), alphabet))
        if kind == 'general':
            terms = []
            for term in data.get('terms', []):
                if not isinstance(term, dict) or 'potential' not in term:
                    raise ConfigError(f"general cocycle term needs a potential, got {term!r}")
                terms.append((float(term.get('weight', 1.0)), Potential.from_config(term['potential'], alphabet)))
            if not terms:
                raise ConfigError("a general cocycle needs at least one term")
            return cls.general(CoboundarySum(tuple(terms)), max(V.depth for _, V in terms))
        raise ConfigError(f"unknown cocycle kind {kind!r}")

    @property
    def is_separable(self) -> bool:
        """True when the cocycle is V(y) - V(x) for a single potential."""
        return self.kind is CocycleKind.SEPARABLE

    def value(self, x: Point, y: Point) -> float:
        """c(x, y) without the equivalence check."""
        if self.is_separable:
            return self.potential(y) - self.potential(x)
        return float(self.function(x, y))


@dataclass(frozen=True)
class ModularParameters:
    """Inverse temperature and cocycle; delta(x, y) = exp(-beta c(x, y))."""

    beta: float
    cocycle: CocycleSpec


def evaluate_cocycle(cocycle: CocycleSpec, x: Point, y: Point, relation: FreeCoordinateRelation) -> float:
    """c(x, y) for an equivalent pair; raises EquivalenceError otherwise."""
    if not is_equivalent(relation, x, y):
        raise EquivalenceError(f"cocycle evaluated on non-equivalent pair {x}, {y}")
    return cocycle.value(x, y)


def modular_function(params: ModularParameters, x: Point, y: Point,
                     relation: FreeCoordinateRelation) -> float:
    """exp(-beta c(x, y))."""
    return math.exp(-params.beta * evaluate_cocycle(params.cocycle, x, y, relation))


def cocycle_identity_residual(cocycle: CocycleSpec, x: Point, y: Point, z: Point,
                              relation: FreeCoordinateRelation) -> float:
    """|c(x, z) - c(x, y) - c(y, z)| for an equivalent triple."""
    xz = evaluate_cocycle(cocycle, x, z, relation)
    xy = evaluate_cocycle(cocycle, x, y, relation)
    yz = evaluate_cocycle(cocycle, y, z, relation)
    return abs(xz - xy - yz)


def combine(first: CocycleSpec, alpha: float, second: CocycleSpec) -> CocycleSpec:
    """first + alpha * second, as a general cocycle."""
    return CocycleSpec.general(LinearCombination(first, float(alpha), second),
                               max(first.depth, second.depth))


def check_cocycle_depth(cocycle: CocycleSpec, relation: FreeCoordinateRelation,
                        samples: int = 200, seed: int = 0) -> bool:
    """Spot check that c ignores coordinates past its declared depth."""
    rng = np.random.default_rng(seed)
    d = relation.d
    m = max(cocycle.depth, relation.max_free)
    for _ in range(samples):
        x = Point(tuple(rng.integers(1, d + 1, size=m + 3)), int(rng.integers(1, d + 1)))
        y = psi(relation, int(rng.integers(1, relation.class_size + 1)), x)
        noise = {k: int(rng.integers(1, d + 1)) for k in range(cocycle.depth + 1, cocycle.depth + 4)
                 if k not in relation.free_set}
        before = cocycle.value(x, y)
        after = cocycle.value(x.with_coords(noise), y.with_coords(noise))
        if abs(before - after) > 1e-12:
            logger.warning("cocycle depends on coordinates past its declared depth %d", cocycle.depth)
            return False
    return True


def holder_estimate(potential: Potential, alpha: float, probe_depth: int) -> float:
    """max |V(x) - V(z)| / d(x, z)^alpha over distinct depth-probe_depth words."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    depth = max(probe_depth, potential.depth, 1)
    words = all_words(potential.alphabet, depth)
    values = potential.values(depth)
    first = first_difference_grid(words)
    distinct = first > 0
    gaps = np.abs(values[:, None] - values[None, :])
    ratios = gaps * np.exp2(alpha * first)
    return float(ratios[distinct].max())


def dini_bound(beta: float, alpha: float, lip: float) -> float:
    """beta * Lip^alpha / alpha; finite means the weights are Dini continuous."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if lip < 0:
        raise ValueError(f"Lipschitz constant must be nonnegative, got {lip}")
    return beta * lip ** alpha / alpha


def truncate_potential(fn: Callable[[Point], float], alphabet: Alphabet, depth: int,
                       holder_constant: float, alpha: float) -> Tuple[Potential, float]:
    """Tabulate an unbounded-depth Holder potential on depth-m words.

    Each word is evaluated at its point with tail 1; the sup distance to the
    original is at most holder_constant * 2^(-alpha * depth).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    potential = Potential.from_function(alphabet, depth, lambda word: fn(Point(word, 1)))
    return potential, holder_constant * 2.0 ** (-alpha * depth)
