"""
Haar-Ruelle Lab - Symbolic Space
Points, cylinders, the metric and the histogram coordinate on {1,...,d}^N.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from errors import SymbolError

Word = Tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Symbol set {1, ..., d}."""

    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 2:
            raise SymbolError(f"alphabet size must be an integer >= 2, got {self.d!r}")

    @property
    def symbols(self) -> range:
        """1..d in order."""
        return range(1, self.d + 1)

    def check(self, symbol: int) -> int:
        """Return the symbol unchanged, or raise if it is outside 1..d."""
        if not 1 <= symbol <= self.d:
            raise SymbolError(f"symbol {symbol} outside 1..{self.d}")
        return int(symbol)

    def check_word(self, word: Iterable[int]) -> Word:
        """The word as a tuple, or SymbolError if a symbol is outside 1..d."""
        return tuple(self.check(a) for a in word)


@dataclass(frozen=True)
class Point:
    """A sequence given by a finite prefix followed by a constant tail.

    The prefix is stored in canonical form: trailing entries equal to the tail
    are dropped, so two representations of the same sequence compare equal.
    """

    prefix: Word = ()
    tail: int = 1

    def __post_init__(self):
        prefix = tuple(int(a) for a in self.prefix)
        if self.tail < 1 or any(a < 1 for a in prefix):
            raise SymbolError(f"symbols are 1-based, got prefix={prefix} tail={self.tail}")
        while prefix and prefix[-1] == self.tail:
            prefix = prefix[:-1]
        object.__setattr__(self, 'prefix', prefix)
        object.__setattr__(self, 'tail', int(self.tail))

    def coord(self, k: int) -> int:
        """Coordinate k (1-based); total for every k >= 1."""
        if k < 1:
            raise SymbolError(f"coordinates are 1-based, got {k}")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.tail

    def word(self, k: int) -> Word:
        """First k coordinates."""
        return tuple(self.coord(i) for i in range(1, k + 1))

    @property
    def horizon(self) -> int:
        """First coordinate from which the point is constant."""
        return len(self.prefix) + 1

    def with_coords(self, updates: Dict[int, int]) -> 'Point':
        """Return a copy with the given coordinates replaced."""
        if not updates:
            return self
        length = max(len(self.prefix), max(updates))
        coords = list(self.word(length))
        for k, symbol in updates.items():
            if k < 1:
                raise SymbolError(f"coordinates are 1-based, got {k}")
            coords[k - 1] = symbol
        return Point(tuple(coords), self.tail)

    def __str__(self) -> str:
        return format_point(self)


@dataclass(frozen=True)
class Cylinder:
    """The set of points whose first len(word) coordinates equal word."""

    word: Word

    def __post_init__(self):
        word = tuple(int(a) for a in self.word)
        if not word:
            raise SymbolError("a cylinder needs at least one symbol")
        if any(a < 1 for a in word):
            raise SymbolError(f"symbols are 1-based, got {word}")
        object.__setattr__(self, 'word', word)

    @property
    def depth(self) -> int:
        """Number of fixed coordinates."""
        return len(self.word)

    def contains(self, x: Point) -> bool:
        """True when x starts with the cylinder's word."""
        return x.word(self.depth) == self.word

    def __str__(self) -> str:
        return format_cylinder(self)


def concat(i: int, x: Point, alphabet: Optional[Alphabet] = None) -> Point:
    """The point i*x = (i, x_1, x_2, ...)."""
    if alphabet is not None:
        alphabet.check(i)
    elif i < 1:
        raise SymbolError(f"symbols are 1-based, got {i}")
    return Point((i,) + x.prefix, x.tail)


def shift(x: Point) -> Point:
    """Drop the first coordinate."""
    return Point(x.prefix[1:], x.tail)


def first_difference(x: Point, z: Point) -> Optional[int]:
    """Smallest k with x_k != z_k, or None when the points are equal."""
    horizon = max(x.horizon, z.horizon)
    for k in range(1, horizon + 1):
        if x.coord(k) != z.coord(k):
            return k
    return None


def metric(x: Point, z: Point) -> float:
    """d(x, z) = 2^-m with m the first coordinate where x and z differ."""
    m = first_difference(x, z)
    if m is None:
        return 0.0
    return 2.0 ** -m


def t_coordinate(cylinder: Cylinder, alphabet: Alphabet = Alphabet(2)) -> float:
    """Histogram abscissa t = sum a_i 2^-(i+1); defined for d = 2 only."""
    if alphabet.d != 2:
        raise SymbolError(f"the t coordinate is defined for d = 2, got d = {alphabet.d}")
    alphabet.check_word(cylinder.word)
    return sum(a * 2.0 ** -(i + 1) for i, a in enumerate(cylinder.word, start=1))


def enumerate_cylinders(alphabet: Alphabet, k: int) -> List[Cylinder]:
    """All d^k cylinders of depth k in lexicographic order."""
    if k < 1:
        raise SymbolError(f"cylinder depth must be >= 1, got {k}")
    return [Cylinder(w) for w in itertools.product(alphabet.symbols, repeat=k)]


def all_words(alphabet: Alphabet, k: int) -> np.ndarray:
    """Array of shape (d^k, k) listing the depth-k words lexicographically."""
    if k < 1:
        raise SymbolError(f"word length must be >= 1, got {k}")
    return np.array(list(itertools.product(alphabet.symbols, repeat=k)), dtype=np.int64)


def first_difference_grid(words: np.ndarray) -> np.ndarray:
    """Pairwise first differing coordinate (1-based) between rows, 0 where rows are equal."""
    differs = words[:, None, :] != words[None, :, :]
    first = np.argmax(differs, axis=2) + 1
    return np.where(differs.any(axis=2), first, 0)


def cylinder_index(word: Word, alphabet: Alphabet) -> int:
    """Lexicographic rank of a word among the words of its length."""
    index = 0
    for a in word:
        index = index * alphabet.d + (alphabet.check(a) - 1)
    return index


def cylinder_word(index: int, k: int, alphabet: Alphabet) -> Word:
    """Inverse of cylinder_index."""
    if not 0 <= index < alphabet.d ** k:
        raise SymbolError(f"index {index} outside 0..{alphabet.d ** k - 1}")
    digits = []
    for _ in range(k):
        index, r = divmod(index, alphabet.d)
        digits.append(r + 1)
    return tuple(reversed(digits))


def point_from_word(word: Word, tail: int = 1) -> Point:
    """Representative point of a cylinder (tail is irrelevant at the cylinder's depth)."""
    return Point(tuple(word), tail)


def format_cylinder(cylinder: Cylinder) -> str:
    """Cylinder as comma-separated symbols, e.g. 1,1,2."""
    return ",".join(str(a) for a in cylinder.word)


def format_point(x: Point) -> str:
    """Point as prefix|tail, e.g. 1,2|1."""
    return ",".join(str(a) for a in x.prefix) + f"|{x.tail}"


def _parse_symbols(text: str) -> Word:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise SymbolError(f"malformed symbol list {text!r}") from None


def parse_cylinder(text: str, alphabet: Optional[Alphabet] = None) -> Cylinder:
    """Parse "1,1,2" into a cylinder."""
    word = _parse_symbols(text)
    if alphabet is not None:
        alphabet.check_word(word)
    return Cylinder(word)


def parse_point(text: str, alphabet: Optional[Alphabet] = None) -> Point:
    """Parse "1,2|1" (prefix | tail) into a point."""
    if "|" not in text:
        raise SymbolError(f"point text needs a '|tail' part, got {text!r}")
    head, _, tail_text = text.partition("|")
    prefix = _parse_symbols(head)
    tail = _parse_symbols(tail_text)
    if len(tail) != 1:
        raise SymbolError(f"point tail must be a single symbol, got {tail_text!r}")
    if alphabet is not None:
        alphabet.check_word(prefix + tail)
    return Point(prefix, tail[0])
