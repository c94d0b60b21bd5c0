#!/usr/bin/env python3
"""
Haar-Ruelle Lab - Eigensolver Tests
Perron pairs, the ratio iteration and the cylinder histogram.
"""

import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from cocycles import CocycleSpec, ModularParameters, Potential
from eigensolver import (CylinderMeasure, build_matrix, eigenfunction_convergence, gibbs_measure,
                         histogram, is_primitive, perron_pair, product_form_measure, ratio_iteration,
                         ratio_iteration_all, solve)
from errors import ConvergenceError
from helpers import (BINARY, TERNARY, classical_spec, example3_potential, example3_relation,
                     example3_spec, example31_spec, run_tests)
from operators import DepthFunction, Flavor, OperatorSpec, apply
from symbolic import Cylinder, Point

V = example3_potential()
BETAS = (1.0, 10.0, 30.0)


def test_classical_matrix():
    A = build_matrix(classical_spec(), 1)
    assert np.array_equal(A, np.array([[1.0, 1.0], [1.0, 1.0]]))
    rng = np.random.default_rng(71)
    for spec in (example3_spec(1.0), example3_spec(10.0, Flavor.HAAR_RUELLE_GENERAL)):
        A = build_matrix(spec, 5)
        assert A.shape == (32, 32) and np.all(A >= 0)
        for _ in range(100):
            f = DepthFunction.random(BINARY, 5, rng)
            assert np.abs(A @ f.values - apply(spec, f).values).max() < 1e-14
    print("✓ Operator matrices reproduce the operators")


def test_classical_eigenpair():
    for k in range(1, 7):
        result = solve(classical_spec(), k)
        assert abs(result.lam - 2.0) <= 1e-12 and abs(result.rho - 4.0) <= 1e-12
        assert np.abs(result.measure.masses - 2.0 ** -k).max() <= 1e-10
        assert result.residual <= 1e-12 and result.primitive
    print("✓ Classical zero-potential operator has eigenvalue 2 and the uniform measure")


def test_identity_matrix():
    result = perron_pair(np.eye(2))
    assert abs(result.eigenvalue - 1.0) < 1e-15
    assert not result.primitive
    assert abs(result.measure.masses.sum() - 1.0) < 1e-15
    assert not is_primitive(np.eye(4))
    print("✓ Identity matrix: eigenvalue 1, reported non-primitive")


def test_non_convergence_raises():
    try:
        perron_pair(np.array([[0.0, 2.0], [1.0, 0.0]]), max_iter=200)
        raise AssertionError("periodic matrix converged")
    except ConvergenceError:
        pass
    print("✓ Oscillating iteration raises ConvergenceError")


def test_example3_eigenvalues():
    for beta in BETAS:
        expected = 1 + math.exp(-beta / 4)
        sep = solve(example3_spec(beta), 5)
        assert abs(sep.lam - expected) < 1e-12 and abs(sep.rho - 2 * expected) < 1e-12
        hb = solve(example3_spec(beta, Flavor.HUTCHINSON_BARNSLEY), 5)
        assert abs(hb.eigenvalue - 2 * expected) < 1e-12 and abs(hb.lam - hb.rho / 2) < 1e-15
        assert np.abs(hb.measure.masses - sep.measure.masses).max() < 1e-12
        assert np.abs(sep.eigenfunction.values - 1.0).max() < 1e-12
        general = solve(example3_spec(beta, Flavor.HAAR_RUELLE_GENERAL), 5)
        assert abs(general.lam - 2.0) < 1e-12
        assert np.abs(general.measure.masses - 1 / 32).max() < 1e-12
    assert is_primitive(build_matrix(example3_spec(1.0), 5))
    print("✓ Example eigenvalues match 1 + exp(-beta/4) and the general flavor gives 2")


def test_spectral_radius_matches_dense_solver():
    for spec in (example3_spec(10.0), example31_spec(1.0), classical_spec(2.0, potential=V)):
        A = build_matrix(spec, 3)
        radius = float(np.max(np.abs(np.linalg.eigvals(A))))
        assert abs(solve(spec, 3).eigenvalue - radius) < 1e-9
    print("✓ Power iteration agrees with numpy.linalg.eigvals")


def _shifted_spec(beta: float, values, flavor: Flavor = Flavor.HAAR_RUELLE_SEPARABLE) -> OperatorSpec:
    potential = Potential(BINARY, 1, tuple(values))
    return OperatorSpec(example3_relation(), ModularParameters(beta, CocycleSpec.separable(potential)), flavor)


def test_potential_shift_invariance():
    """V + c leaves the measure alone and scales the eigenvalue by exp(-beta c)."""
    beta = 30.0
    for flavor in (Flavor.HAAR_RUELLE_SEPARABLE, Flavor.HUTCHINSON_BARNSLEY):
        base = solve(_shifted_spec(beta, (0.0, 1.0), flavor), 5)
        for c in (5.0, 30.0):
            shifted = solve(_shifted_spec(beta, (c, 1.0 + c), flavor), 5)
            assert np.abs(shifted.measure.masses - base.measure.masses).max() < 1e-12
            assert np.abs(shifted.eigenfunction.values - base.eigenfunction.values).max() < 1e-12
            assert abs(shifted.log_eigenvalue - (base.log_eigenvalue - beta * c)) < 1e-9
        moderate = solve(_shifted_spec(beta, (5.0, 6.0), flavor), 5)
        assert abs(moderate.lam / (base.lam * math.exp(-beta * 5.0)) - 1.0) < 1e-12
    A = build_matrix(_shifted_spec(beta, (5.0, 6.0)), 3)
    assert np.allclose(A, build_matrix(_shifted_spec(beta, (0.0, 1.0)), 3) * math.exp(-150.0),
                       rtol=1e-12, atol=0.0)
    f = DepthFunction.indicator(BINARY, Cylinder((1, 2, 1, 1, 2)))
    for method, n in (('tree', 4), ('memo', 9), ('matrix', 9)):
        far = ratio_iteration(_shifted_spec(beta, (30.0, 31.0)), f, Point(), n, method)
        near = ratio_iteration(_shifted_spec(beta, (0.0, 1.0)), f, Point(), n, method)
        assert abs(far - near) < 1e-12, method
    print("✓ Shifting the potential by a constant only rescales the eigenvalue")


def test_product_form_matches_oracle():
    for beta in BETAS:
        oracle = solve(example3_spec(beta), 5).measure
        closed = product_form_measure(V, beta, 5)
        assert np.abs(oracle.masses - closed.masses).max() < 1e-12
        p1 = 1 / (1 + math.exp(-beta / 4))
        assert abs(closed.mass(Cylinder((1, 1))) - p1 ** 2) < 1e-12
    print("✓ Eigenmeasure is p(a1) p(a2) / 8")


def test_duality_identity():
    rng = np.random.default_rng(73)
    for spec in (example3_spec(10.0), example31_spec(1.0), classical_spec(2.0, potential=V)):
        k = 3
        result = solve(spec, k)
        for _ in range(100):
            f = DepthFunction.random(spec.alphabet, k, rng)
            lhs = result.measure.integrate(apply(spec, f))
            rhs = result.eigenvalue * result.measure.integrate(f)
            assert abs(lhs - rhs) < 1e-9
    print("✓ int L(f) dmu = lambda int f dmu")


def test_gibbs_measure():
    spec = classical_spec(2.0, potential=example3_potential())
    result = solve(spec, 4)
    gibbs = gibbs_measure(result)
    expected = result.eigenfunction.values * result.measure.masses
    assert np.abs(gibbs.masses - expected / expected.sum()).max() < 1e-15
    assert abs(float(result.eigenfunction.values @ result.measure.masses) - 1.0) < 1e-12
    print("✓ Gibbs measure is h * mu")


def test_eigenfunction_convergence():
    rng = np.random.default_rng(79)
    spec = example3_spec(1.0)
    result = solve(spec, 5)
    for _ in range(10):
        f = DepthFunction.random(BINARY, 5, rng)
        distances = eigenfunction_convergence(spec, f, result, 6)
        assert np.all(np.diff(distances) <= 1e-12)
        assert distances[-1] < 1e-12
    print("✓ lambda^-n L^n f approaches (int f dmu) h")


def test_ratio_iteration_basics():
    x0 = Point()
    one = DepthFunction.constant(BINARY, 5)
    for n in (1, 5, 9):
        assert abs(ratio_iteration(example3_spec(10.0), one, x0, n) - 1.0) < 1e-15
    first = DepthFunction.indicator(BINARY, Cylinder((1,)))
    for n in (1, 2, 7):
        for method in ('tree', 'memo', 'matrix'):
            assert abs(ratio_iteration(classical_spec(), first, x0, n, method) - 0.5) < 1e-15
    print("✓ Ratio iteration of 1 is 1 and classical cylinders get 1/2")


def test_ratio_methods_agree():
    rng = np.random.default_rng(83)
    for beta in (1.0, 30.0):
        spec = example3_spec(beta)
        f = DepthFunction.random(BINARY, 5, rng, 0.0, 1.0)
        x0 = Point((2, 1, 2), 1)
        values = [ratio_iteration(spec, f, x0, 4, method) for method in ('tree', 'memo', 'matrix')]
        assert max(values) - min(values) < 1e-12
    print("✓ Tree, memoized and matrix ratio iterations agree")


def test_ratio_iteration_vs_oracle():
    x0 = Point()
    for beta in BETAS:
        spec = example3_spec(beta)
        oracle = solve(spec, 5).measure
        for cylinder in (Cylinder((1, 1, 1, 1, 1)), Cylinder((2, 1, 2, 1, 2)), Cylinder((1, 2, 2, 2, 1))):
            f = DepthFunction.indicator(BINARY, cylinder)
            exact = oracle.mass(cylinder)
            assert abs(ratio_iteration(spec, f, x0, 9) - exact) < 5e-3
            assert abs(ratio_iteration(spec, f, x0, 30, 'memo') - exact) < 1e-8
        all_masses = ratio_iteration_all(spec, 5, x0, 30)
        assert np.abs(all_masses.masses - oracle.masses).max() < 1e-8
    print("✓ Ratio iteration converges to the Perron eigenmeasure")


def test_base_point_independence():
    spec = example3_spec(10.0)
    f = DepthFunction.random(BINARY, 5, np.random.default_rng(89), 0.0, 1.0)
    points = [Point(), Point((), 2), Point((2, 1, 2)), Point((1, 2, 2, 1), 2), Point((2, 2, 1, 1, 2))]
    values = [ratio_iteration(spec, f, x, 30, 'memo') for x in points]
    assert max(values) - min(values) < 1e-6
    print("✓ Ratio iteration limit does not depend on x0")


def test_histogram_example3():
    hists = histogram(example3_spec(), 5, 9, Point(), BETAS)
    assert [h.beta for h in hists] == list(BETAS)
    prefix = []
    for hist in hists:
        assert len(hist.rows) == 32
        assert abs(hist.total - 1.0) <= 1e-9
        assert hist.max_abs_diff < 5e-3
        assert hist.rows[0].t == 31 / 64
        prefix.append(hist.prefix_mass((1, 1)))
    assert prefix[0] < prefix[1] < prefix[2]
    predicted = product_form_measure(V, 30.0, 5).mass(Cylinder((1, 1)))
    assert prefix[2] > 0.99 * predicted
    print(f"  prefix (1,1) mass at beta=1,10,30: {[round(p, 4) for p in prefix]}")
    print("✓ Histogram concentrates on small t as beta grows")


def test_histogram_uniform_at_zero_beta():
    hist, = histogram(example3_spec(), 5, 9, Point(), [0.0])
    assert all(abs(row.mass_ratio_iteration - 1 / 32) < 1e-12 for row in hist.rows)
    print("✓ beta = 0 gives uniform masses")


def test_histogram_threads_and_methods():
    serial = histogram(example3_spec(), 5, 9, Point(), BETAS)
    threaded = histogram(example3_spec(), 5, 9, Point(), BETAS, threads=3)
    for a, b in zip(serial, threaded):
        assert [r.mass_ratio_iteration for r in a.rows] == [r.mass_ratio_iteration for r in b.rows]
    memo, = histogram(example3_spec(), 5, 9, Point(), [10.0], method='memo')
    assert max(abs(r.mass_ratio_iteration - s.mass_ratio_iteration)
               for r, s in zip(memo.rows, serial[1].rows)) < 1e-12
    print("✓ Histogram is identical across thread counts and methods")


def test_histogram_ternary_labels():
    hist, = histogram(example31_spec(), 3, 9, Point(), [1.0])
    assert len(hist.rows) == 27 and all(row.t is None for row in hist.rows)
    assert hist.rows[5].label == "1,2,3"
    assert abs(hist.total - 1.0) < 1e-9
    print("✓ Three-symbol histogram uses cylinder labels")


def test_cylinder_measure_validation():
    m = CylinderMeasure.uniform(TERNARY, 2)
    assert abs(m.mass(Cylinder((2,))) - 1 / 3) < 1e-15
    for bad in (np.array([0.5, 0.6]), np.array([1.5, -0.5])):
        try:
            CylinderMeasure(BINARY, 1, bad)
            raise AssertionError(f"accepted {bad}")
        except ValueError:
            pass
    print("✓ Cylinder measures are probabilities")


def run_all_tests():
    return run_tests("eigensolver tests", [
        test_classical_matrix,
        test_classical_eigenpair,
        test_identity_matrix,
        test_non_convergence_raises,
        test_example3_eigenvalues,
        test_spectral_radius_matches_dense_solver,
        test_potential_shift_invariance,
        test_product_form_matches_oracle,
        test_duality_identity,
        test_gibbs_measure,
        test_eigenfunction_convergence,
        test_ratio_iteration_basics,
        test_ratio_methods_agree,
        test_ratio_iteration_vs_oracle,
        test_base_point_independence,
        test_histogram_example3,
        test_histogram_uniform_at_zero_beta,
        test_histogram_threads_and_methods,
        test_histogram_ternary_labels,
        test_cylinder_measure_validation,
    ])


if __name__ == "__main__":
    sys.exit(0 if run_all_tests() else 1)
