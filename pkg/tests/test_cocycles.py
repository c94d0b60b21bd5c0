#!/usr/bin/env python3
"""
Haar-Ruelle Lab - Cocycle Tests
Potentials, the cocycle identity, linear combinations and regularity constants.
"""

import itertools
import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from cocycles import (CocycleKind, CocycleSpec, ModularParameters, Potential, check_cocycle_depth,
                      cocycle_identity_residual, combine, dini_bound, evaluate_cocycle, holder_estimate,
                      modular_function, truncate_potential)
from errors import ConfigError, EquivalenceError
from helpers import BINARY, example3_potential, example3_relation, run_tests
from relations import FreeCoordinateRelation, class_of, psi
from symbolic import Point, all_words, point_from_word

V = example3_potential()
EXAMPLE3 = example3_relation()
CLASSICAL = FreeCoordinateRelation.first_coordinate_free(2)


def test_potential_tables():
    assert V.depth == 1 and V.table == (0.0, 0.25)
    assert V(Point((2, 1))) == 0.25 and V(Point((), 1)) == 0.0
    table = Potential.from_config({'depth': 2, 'table': {'1,1': 0.0, '1,2': 1.0, '2,1': 2.0, '2,2': 3.0}}, BINARY)
    assert table.of_word((2, 1, 1)) == 2.0
    assert Potential.from_config(table.to_config(), BINARY) == table
    assert Potential.from_config({'builtin': 'zero'}, BINARY) == Potential.zero(BINARY)
    assert list(V.values(3)) == [0.0] * 4 + [0.25] * 4
    for bad in ({'builtin': 'nope'}, {'depth': 1, 'table': {'1': 0.0}}, {'depth': 1}):
        try:
            Potential.from_config(bad, BINARY)
            raise AssertionError(f"accepted {bad}")
        except ConfigError:
            pass
    print("✓ Potentials tabulate, parse and serialize")


def test_evaluate_separable():
    c = CocycleSpec.separable(V)
    x, y = Point((1, 1, 1)), Point((2, 1, 1))
    relation = CLASSICAL
    assert evaluate_cocycle(c, x, y, relation) == 0.25
    assert evaluate_cocycle(c, x, x, relation) == 0.0
    rng = np.random.default_rng(17)
    for _ in range(200):
        x = Point(tuple(rng.integers(1, 3, size=5)))
        y = psi(relation, int(rng.integers(1, 3)), x)
        assert evaluate_cocycle(c, x, y, relation) == -evaluate_cocycle(c, y, x, relation)
    try:
        evaluate_cocycle(c, Point((1, 1)), Point((1, 2)), relation)
        raise AssertionError("non-equivalent pair accepted")
    except EquivalenceError:
        pass
    assert math.isclose(modular_function(ModularParameters(2.0, c), Point((1,)), Point((2,)), relation),
                        math.exp(-0.5))
    print("✓ Separable cocycles evaluate V(y) - V(x)")


def test_cocycle_identity():
    relation = FreeCoordinateRelation(BINARY, (1, 3))
    rng = np.random.default_rng(19)
    W = Potential.from_function(BINARY, 3, lambda w: float(w[0] * w[2] + w[1]))
    c, b = CocycleSpec.separable(V), CocycleSpec.separable(W)
    for alpha in np.linspace(-3.0, 3.0, 20):
        combined = combine(c, alpha, b)
        assert combined.kind is CocycleKind.GENERAL and combined.depth == 3
        for _ in range(10):
            x = Point(tuple(rng.integers(1, 3, size=5)))
            y, z = psi(relation, int(rng.integers(1, 5)), x), psi(relation, int(rng.integers(1, 5)), x)
            assert cocycle_identity_residual(c, x, y, z, relation) == 0.0
            assert cocycle_identity_residual(combined, x, y, z, relation) < 1e-12
    print("✓ Separable cocycles and their combinations satisfy the cocycle identity")


def test_broken_cocycle_detected():
    broken = CocycleSpec.general(lambda x, y: V(y) * V(x) + 1.0, 1)
    worst = 0.0
    for w in all_words(BINARY, 4):
        x = point_from_word(tuple(w))
        members = list(class_of(CLASSICAL, x))
        for y, z in itertools.product(members, members):
            worst = max(worst, cocycle_identity_residual(broken, x, y, z, CLASSICAL))
    assert worst > 0
    print("✓ A non-cocycle violates the identity")


def test_general_from_config():
    c = CocycleSpec.from_config({'kind': 'general', 'terms': [
        {'weight': 2.0, 'potential': {'builtin': 'quarter_square_first_coord'}}]}, BINARY)
    assert c.kind is CocycleKind.GENERAL and c.depth == 1
    assert c.value(Point((1,)), Point((2,))) == 0.5
    for bad in ({'kind': 'general'}, {'kind': 'other'}, {'kind': 'general', 'terms': [{'weight': 1}]}):
        try:
            CocycleSpec.from_config(bad, BINARY)
            raise AssertionError(f"accepted {bad}")
        except ConfigError:
            pass
    print("✓ General cocycles build from config")


def test_depth_soundness():
    W = Potential.from_function(BINARY, 3, lambda w: float(sum(w)))
    relation = FreeCoordinateRelation(BINARY, (2, 3))
    c = CocycleSpec.separable(W)
    assert check_cocycle_depth(c, relation, samples=100)
    for w in all_words(BINARY, 3):
        x = point_from_word(tuple(w))
        for y in class_of(relation, x):
            for tail in ((1, 2, 2), (2, 1, 2)):
                x2 = Point(x.word(3) + tail, 1)
                y2 = Point(y.word(3) + tail, 1)
                assert evaluate_cocycle(c, x, y, relation) == evaluate_cocycle(c, x2, y2, relation)
    # a cocycle for sigma(x) = sigma(y), but it reads x_2 past its declared depth
    leaky = CocycleSpec.general(lambda x, y: (V(y) - V(x)) * x.coord(2), 1)
    assert not check_cocycle_depth(leaky, CLASSICAL, samples=100)
    print("✓ Cocycle values depend only on their declared depth")


def test_holder_and_dini():
    assert abs(holder_estimate(V, 2.0, 6) - 1.0) < 1e-12
    assert abs(holder_estimate(V, 1.0, 6) - 0.5) < 1e-12
    assert holder_estimate(Potential.zero(BINARY), 1.0, 4) == 0.0
    assert dini_bound(1.0, 2.0, 0.5) == 0.125
    assert dini_bound(0.0, 2.0, 0.5) == 0.0
    assert dini_bound(30.0, 2.0, 0.5) == 3.75
    for args in ((1.0, 0.0, 0.5), (1.0, 2.0, -1.0)):
        try:
            dini_bound(*args)
            raise AssertionError(f"accepted {args}")
        except ValueError:
            pass
    print("✓ Holder and Dini constants match the closed forms")


def test_truncate_potential():
    fn = lambda x: sum(2.0 ** -i * x.coord(i) for i in range(1, 30))
    potential, bound = truncate_potential(fn, BINARY, 6, 2.0, 1.0)
    assert potential.depth == 6 and bound == 2.0 * 2.0 ** -6
    rng = np.random.default_rng(23)
    for _ in range(50):
        x = Point(tuple(rng.integers(1, 3, size=20)), int(rng.integers(1, 3)))
        assert abs(potential(x) - fn(x)) <= bound
    print("✓ Truncated potentials stay within their bound")


def run_all_tests():
    return run_tests("cocycle tests", [
        test_potential_tables,
        test_evaluate_separable,
        test_cocycle_identity,
        test_broken_cocycle_detected,
        test_general_from_config,
        test_depth_soundness,
        test_holder_and_dini,
        test_truncate_potential,
    ])


if __name__ == "__main__":
    sys.exit(0 if run_all_tests() else 1)
