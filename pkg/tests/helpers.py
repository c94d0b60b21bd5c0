"""
Haar-Ruelle Lab - Test Helpers
Common specs and the script-mode runner shared by the test modules.
"""

import os
import sys
from typing import Optional

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from cocycles import CocycleSpec, ModularParameters, Potential
from operators import Flavor, OperatorSpec
from relations import FreeCoordinateRelation
from symbolic import Alphabet

BINARY = Alphabet(2)
TERNARY = Alphabet(3)


def example3_relation() -> FreeCoordinateRelation:
    return FreeCoordinateRelation(BINARY, (3,))


def example3_potential() -> Potential:
    return Potential.builtin('quarter_square_first_coord', BINARY)


def example3_spec(beta: float = 1.0, flavor: Flavor = Flavor.HAAR_RUELLE_SEPARABLE) -> OperatorSpec:
    """d = 2, third coordinate free, V(x) = (x_1 - 1)^2 / 4."""
    return OperatorSpec(example3_relation(),
                        ModularParameters(beta, CocycleSpec.separable(example3_potential())), flavor)


def classical_spec(beta: float = 1.0, flavor: Flavor = Flavor.HAAR_RUELLE_SEPARABLE,
                   potential: Optional[Potential] = None) -> OperatorSpec:
    """sigma(x) = sigma(y) relation; zero potential unless given."""
    potential = potential or Potential.zero(BINARY)
    return OperatorSpec(FreeCoordinateRelation.first_coordinate_free(2),
                        ModularParameters(beta, CocycleSpec.separable(potential)), flavor)


def example31_spec(beta: float = 1.0, flavor: Flavor = Flavor.HAAR_RUELLE_SEPARABLE) -> OperatorSpec:
    """d = 3, first and third coordinates free."""
    potential = Potential.builtin('quarter_square_first_coord', TERNARY)
    return OperatorSpec(FreeCoordinateRelation(TERNARY, (1, 3)),
                        ModularParameters(beta, CocycleSpec.separable(potential)), flavor)


def run_tests(title: str, tests) -> bool:
    """Run test functions in order and print a summary; True when all pass."""
    print(f"🧪 Running {title}...\n")

    passed = 0
    failed = 0

    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"✗ Test {test.__name__} failed: {type(e).__name__}: {e}")
            failed += 1

    print(f"\n📊 Test Results:")
    print(f"  Passed: {passed}")
    print(f"  Failed: {failed}")
    print(f"  Total:  {passed + failed}")

    if failed == 0:
        print("\n🎉 All tests passed!")
        return True
    print(f"\n❌ {failed} test(s) failed.")
    return False
