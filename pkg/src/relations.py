"""
Haar-Ruelle Lab - Equivalence Relations
Free-coordinate relations, their ordered class enumerations and Lipschitz estimates.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Tuple

import numpy as np

from errors import ConfigError, DepthError, EquivalenceError, SymbolError
from symbolic import Alphabet, Point, all_words, first_difference_grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreeCoordinateRelation:
    """x ~ y iff x_i = y_i for every coordinate i outside the finite free set."""

    alphabet: Alphabet
    free_set: Tuple[int, ...] = ()

    def __post_init__(self):
        free = tuple(sorted(set(int(s) for s in self.free_set)))
        if any(s < 1 for s in free):
            raise SymbolError(f"free coordinates are 1-based, got {free}")
        object.__setattr__(self, 'free_set', free)

    @classmethod
    def identity(cls, d: int) -> 'FreeCoordinateRelation':
        """S empty: every class is a singleton."""
        return cls(Alphabet(d), ())

    @classmethod
    def first_coordinate_free(cls, d: int) -> 'FreeCoordinateRelation':
        """The relation x ~ y iff shift(x) = shift(y)."""
        return cls(Alphabet(d), (1,))

    @classmethod
    def from_config(cls, data: Dict[str, Any]) -> 'FreeCoordinateRelation':
        """Build from {"d": 2, "free_set": [3]}."""
        try:
            return cls(Alphabet(int(data['d'])), tuple(int(s) for s in data.get('free_set', [])))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid relation {data!r}: {e}") from None

    def to_config(self) -> Dict[str, Any]:
        """Inverse of from_config."""
        return {'d': self.alphabet.d, 'free_set': list(self.free_set)}

    @property
    def d(self) -> int:
        """Alphabet size."""
        return self.alphabet.d

    @property
    def class_size(self) -> int:
        """K = d^|S|, the cardinality of every class."""
        return self.alphabet.d ** len(self.free_set)

    @property
    def max_free(self) -> int:
        """Largest free coordinate, 0 for the identity relation."""
        return self.free_set[-1] if self.free_set else 0

    def assignment(self, a: int) -> Tuple[int, ...]:
        """Symbols placed on the free coordinates by the a-th class member (1-based)."""
        if not 1 <= a <= self.class_size:
            raise SymbolError(f"class index {a} outside 1..{self.class_size}")
        digits = []
        index = a - 1
        for _ in self.free_set:
            index, r = divmod(index, self.d)
            digits.append(r + 1)
        return tuple(reversed(digits))

    def assignments(self) -> Iterator[Tuple[int, ...]]:
        """All free-coordinate assignments, smallest coordinate most significant."""
        return itertools.product(self.alphabet.symbols, repeat=len(self.free_set))


@dataclass(frozen=True)
class ClassEnumeration:
    """Ordered members psi_1, ..., psi_K of one equivalence class."""

    members: Tuple[Point, ...]
    index_of_base: int

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, a: int) -> Point:
        """1-based access, psi_a."""
        if not 1 <= a <= len(self.members):
            raise SymbolError(f"class index {a} outside 1..{len(self.members)}")
        return self.members[a - 1]


@dataclass(frozen=True)
class GroupoidElement:
    """An ordered pair (source, target) of equivalent points."""

    source: Point
    target: Point

    @classmethod
    def checked(cls, relation: FreeCoordinateRelation, source: Point, target: Point) -> 'GroupoidElement':
        """Build an element after checking that source and target are equivalent."""
        if not is_equivalent(relation, source, target):
            raise EquivalenceError(f"{source} and {target} are not equivalent")
        return cls(source, target)


def is_equivalent(relation: FreeCoordinateRelation, x: Point, y: Point) -> bool:
    """True when x and y agree off the free coordinates."""
    horizon = max(x.horizon, y.horizon, relation.max_free + 1)
    free = set(relation.free_set)
    return all(x.coord(k) == y.coord(k) for k in range(1, horizon + 1) if k not in free)


def psi(relation: FreeCoordinateRelation, a: int, x: Point) -> Point:
    """The a-th member of the class of x."""
    return x.with_coords(dict(zip(relation.free_set, relation.assignment(a))))


def class_of(relation: FreeCoordinateRelation, x: Point) -> ClassEnumeration:
    """Every point obtained by substituting symbols on the free coordinates of x."""
    members = tuple(x.with_coords(dict(zip(relation.free_set, assignment)))
                    for assignment in relation.assignments())
    return ClassEnumeration(members, members.index(x) + 1)


def check_word_continuity(relation: FreeCoordinateRelation, x: Point, z: Point, n: int) -> bool:
    """If x and z agree on their first n > max(S) coordinates, so do their class members."""
    if n <= relation.max_free or x.word(n) != z.word(n):
        return True
    return all(u.word(n) == v.word(n)
               for u, v in zip(class_of(relation, x), class_of(relation, z)))


def lipschitz_estimate(relation: FreeCoordinateRelation, j: int, a: int, probe_depth: int) -> float:
    """Worst ratio d(psi_a(j*x), psi_a(j*z)) / d(x, z) over distinct depth-probe_depth words."""
    if probe_depth < relation.max_free + 2:
        raise DepthError(f"probe depth {probe_depth} must be at least max(S) + 2 = {relation.max_free + 2}")
    relation.alphabet.check(j)
    words = all_words(relation.alphabet, probe_depth)
    images = np.empty((words.shape[0], probe_depth + 1), dtype=np.int64)
    images[:, 0] = j
    images[:, 1:] = words
    for s, symbol in zip(relation.free_set, relation.assignment(a)):
        # coordinates past the word lie on the shared tail and never separate a pair
        if s <= probe_depth + 1:
            images[:, s - 1] = symbol

    source = first_difference_grid(words)
    target = first_difference_grid(images)
    distinct = source > 0
    ratios = np.where(target > 0, np.exp2(source - target.astype(float)), 0.0)
    return float(ratios[distinct].max())


def max_lipschitz(relation: FreeCoordinateRelation, probe_depth: int) -> float:
    """max over j and a of the class-map Lipschitz estimate."""
    best = 0.0
    for j in relation.alphabet.symbols:
        for a in range(1, relation.class_size + 1):
            best = max(best, lipschitz_estimate(relation, j, a, probe_depth))
    logger.debug("max Lipschitz constant for S=%s at probe depth %d: %s",
                 relation.free_set, probe_depth, best)
    return best
