#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import numpy as np
import pytest

from ffsheets.exceptions import SingularMatrixError, RepositionBoxError, DegenerateArcError, \
    EscapedError, StagnationError, ConvergenceError
from ffsheets.numerics import Arc, Box, gauss_legendre, lu_solve, lu_factor, lu_det, eigenvalues, \
    winding_number, newton_refine, bracket_zeros


def test_gauss_legendre_quadrature_anchor():
    rule = gauss_legendre(32, Arc.segment(-1, 1))
    value = rule.integrate(lambda nu: (1 - nu ** 2) ** 2 / (nu - 1j))
    assert abs(value - 1j * (2 * np.pi - 16 / 3)) <= 1e-12


def test_gauss_legendre_spectral_convergence():
    def error(n):
        value = gauss_legendre(n, Arc.segment(-1, 1)).integrate(
            lambda nu: (1 - nu ** 2) ** 2 / (nu - 1j))
        return abs(value - 1j * (2 * np.pi - 16 / 3))
    errors = [error(n) for n in (8, 16, 32)]
    assert errors[0] >= 10 * errors[1]
    assert errors[1] >= 10 * errors[2]


def test_gauss_legendre_weights_sum_to_endpoint_difference():
    rule = gauss_legendre(17, Arc.segment(-1, 0.5 - 0.5j))
    assert np.sum(rule.weights) == pytest.approx(1.5 - 0.5j, rel=1e-13)


def test_gauss_legendre_polynomial_exactness():
    rule = gauss_legendre(5, Arc.segment(0, 2))
    assert rule.integrate(lambda x: x ** 9) == pytest.approx(2 ** 10 / 10, rel=1e-13)


def test_gauss_legendre_on_complex_arc():
    # Half circle from −1 to 1 through −i, analytic integrand
    arc = Arc(point=lambda t: -np.exp(1j * np.pi * t),
              derivative=lambda t: -1j * np.pi * np.exp(1j * np.pi * t))
    rule = gauss_legendre(24, arc)
    assert rule.integrate(lambda z: z ** 2) == pytest.approx(2 / 3, abs=1e-13)
    assert np.all(rule.nodes.imag <= 0)


def test_gauss_legendre_rejects_non_finite_arc():
    arc = Arc(point=lambda t: np.full(np.shape(t), np.nan), derivative=np.ones_like)
    with pytest.raises(DegenerateArcError):
        gauss_legendre(4, arc)


def test_lu_solve_returns_determinant():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    b = rng.normal(size=(6, 2))
    x, det = lu_solve(a, b)
    assert np.allclose(a @ x, b, atol=1e-12)
    assert det == pytest.approx(np.linalg.det(a), rel=1e-12)


def test_lu_det_sign_of_permutation():
    a = np.array([[0, 1], [1, 0]], dtype=complex)
    assert lu_det(*lu_factor(a)) == pytest.approx(-1)


def test_lu_singular():
    with pytest.raises(SingularMatrixError):
        lu_solve(np.zeros((3, 3)), np.ones(3))


def test_lu_solve_random_instances():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(100):
        a = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
        if np.linalg.cond(a) > 1e4:
            continue
        expected = rng.normal(size=(20, 3)) + 1j * rng.normal(size=(20, 3))
        b = a @ expected
        x, _ = lu_solve(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)
        assert np.allclose(x, expected, atol=1e-8)
        checked += 1
    assert checked > 50


def test_eigenvalues_sorted():
    a = np.diag([3, 1 - 1j, 1 + 1j, -2]).astype(complex)
    assert np.allclose(eigenvalues(a), [-2, 1 - 1j, 1 + 1j, 3])


def test_eigenvalues_non_normal():
    a = np.array([[1, 5, 0], [0, 2j, 7], [0, 0, -1]], dtype=complex)
    assert np.allclose(eigenvalues(a), [-1, 2j, 1])


def test_eigenvalues_trace_and_determinant():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
    values = eigenvalues(a)
    assert np.sum(values) == pytest.approx(np.trace(a), rel=1e-8, abs=1e-8 * np.linalg.norm(a))
    assert np.prod(values) == pytest.approx(np.linalg.det(a), rel=1e-8)


def test_eigenvalues_companion_and_nilpotent():
    values = sorted(eigenvalues(np.array([[0, -1], [1, 0]], dtype=complex)), key=lambda v: v.imag)
    assert np.allclose(values, [-1j, 1j])
    assert np.allclose(eigenvalues(np.array([[0, 1], [0, 0]], dtype=complex)), [0, 0])


def test_box_split_and_grid():
    box = Box(0, 2, -1, 1)
    children = box.split()
    assert [c.as_tuple() for c in children] == [(0, 1, -1, 0), (1, 2, -1, 0), (1, 2, 0, 1),
                                                (0, 1, 0, 1)]
    assert len(box.grid(3, 2)) == 6
    with pytest.raises(ValueError):
        Box(1, 1, 0, 1)


def test_box_grow_is_clipped():
    box = Box(0.5, 0.9, -0.2, -0.02)
    assert box.grow(0.1).as_tuple() == pytest.approx((0.4, 1.0, -0.3, 0.08))
    clipped = box.grow(0.1, within=Box(-0.9, 0.9, -0.45, -0.02))
    assert clipped.as_tuple() == pytest.approx((0.4, 0.9, -0.3, -0.02))


@pytest.mark.parametrize("roots, expected", [((0.3 + 0.2j,), 1),
                                             ((0.3 + 0.2j, -0.4 - 0.1j), 2),
                                             ((0.3 + 0.2j, 0.3 + 0.2j, 0.9 + 0.9j), 2),
                                             ((2 + 2j,), 0)],
                         ids=["simple", "two", "double", "outside"])
def test_winding_number_counts_zeros(roots, expected):
    def f(z):
        return np.prod([z - r for r in roots])
    box = Box(-0.5, 0.5, -0.5, 0.5)
    assert winding_number(f, box) == expected
    assert winding_number(f, box, samples_per_side=32) == expected


def test_winding_number_counts_poles_negative():
    assert winding_number(lambda z: 1 / (z - 0.1), Box(-1, 1, -1, 1)) == -1


def test_winding_number_zero_on_boundary():
    with pytest.raises(RepositionBoxError):
        winding_number(lambda z: z - 0.5, Box(-0.5, 0.5, -0.5, 0.5))


def test_winding_number_fast_phase():
    # Eight zeros close to the boundary of the box
    roots = 0.45 * np.exp(2j * np.pi * np.arange(8) / 8)
    assert winding_number(lambda z: np.prod(z - roots), Box(-0.5, 0.5, -0.5, 0.5), 4) == 8


def test_newton_refine_simple():
    result = newton_refine(lambda z: z ** 2 + 1, 0.2 + 0.8j, tol=1e-13)
    assert abs(result.z - 1j) < 1e-12
    assert result.history[-1] <= 1e-13
    assert result.iterations == len(result.history) - 1


def test_newton_refine_double_root():
    result = newton_refine(lambda z: (z - 0.5j) ** 2, 0.1 + 0.3j, tol=1e-14, multiplicity=2)
    assert abs(result.z - 0.5j) < 1e-7


def test_newton_refine_escapes():
    with pytest.raises(EscapedError):
        newton_refine(lambda z: z - 5, 0, region=Box(-1, 1, -1, 1))


def test_newton_refine_stagnates():
    with pytest.raises(StagnationError):
        newton_refine(lambda z: 1 + 0 * z, 0.3)


def test_newton_refine_iteration_cap():
    with pytest.raises(ConvergenceError):
        newton_refine(lambda z: np.exp(z), 0.0, max_iter=5)


def test_bracket_zeros():
    roots = bracket_zeros(np.cos, 0, 10)
    assert np.allclose(roots, [np.pi / 2, 3 * np.pi / 2, 5 * np.pi / 2], atol=1e-13)
