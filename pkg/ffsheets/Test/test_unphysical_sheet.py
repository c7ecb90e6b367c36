#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import itertools

import numpy as np
import pytest

from ffsheets.exceptions import DomainError, AtResonanceError, ContourContaminatedError
from ffsheets.Model.Contour import ContourSpec, build_contour
from ffsheets.PhysicalSheet import smatrix
from ffsheets.UnphysicalSheet import continue_T, continue_S, invert_smatrix, direct_contour, \
    half_on_shell, half_on_shell_check, residue_rank
from ffsheets.Test.reference import closed_D, closed_D_continued, closed_D_continued_prime, \
    Z_RESONANCE, COUPLED_RESONANCES

LAM, MU = 0.3, -0.2
GRID = [complex(x, y) for x, y in itertools.product(np.linspace(-0.7, 0.7, 5),
                                                      np.linspace(-0.6, -0.1, 4))]


def v(x):
    return 1 - x ** 2


@pytest.mark.parametrize("z", GRID)
def test_routes_agree(resonant_kernel, z):
    formula = continue_T(resonant_kernel, z, -1, LAM, MU)
    direct = continue_T(resonant_kernel, z, -1, LAM, MU, route="direct_contour")
    assert formula.point.sheet == direct.point.sheet == -1
    value = formula.value[0, 0]
    assert abs(value - direct.value[0, 0]) <= 1e-7 * abs(value)
    expected = 0.4 * v(LAM) * v(MU) / closed_D_continued(z, 0.4)
    assert value == pytest.approx(expected, rel=1e-9)


def test_direct_route_outside_the_dip_is_physical(resonant_kernel):
    z = 0.2 - 0.6j
    shallow = build_contour(ContourSpec.elliptic_dip(0.3, sign=-1, nodes=64), -1, 1,
                            resonant_kernel.region)
    result = continue_T(resonant_kernel, z, -1, LAM, MU, route="direct_contour", contour=shallow)
    assert result.point.sheet == 0
    expected = 0.4 * v(LAM) * v(MU) / closed_D(z, 0.4)
    assert result.value[0, 0] == pytest.approx(expected, abs=1e-9)


def test_direct_contour_encloses_z(resonant_kernel):
    z = 0.7 - 0.6j
    contour = direct_contour(resonant_kernel, z, -1)
    assert contour.halfplane == -1
    assert contour.contains(z)
    with pytest.raises(DomainError):
        direct_contour(resonant_kernel, 1.2 - 0.3j, -1)


def test_continue_T_rejects_bad_input(resonant_kernel):
    with pytest.raises(DomainError):
        continue_T(resonant_kernel, 0.2 + 0.3j, -1, LAM, MU)
    with pytest.raises(ValueError):
        continue_T(resonant_kernel, 0.2 - 0.3j, -1, LAM, MU, route="straight")


@pytest.mark.parametrize("z, ell", [(0.2 - 0.3j, -1), (-0.5 + 0.1j, 1), (1.2 - 0.4j, -1)])
def test_continued_smatrix_inverts_physical(resonant_kernel, z, ell):
    continued = continue_S(resonant_kernel, z, ell)
    assert continued.check <= 1e-10
    expected = closed_D(z, 0.4) / closed_D_continued(z, 0.4, ell)
    assert continued.value[0, 0] == pytest.approx(expected, rel=1e-9)


def test_continued_smatrix_multichannel(coupled_kernel):
    continued = continue_S(coupled_kernel, -0.1 - 0.4j, -1)
    assert continued.value.shape == (2, 2)
    assert continued.check <= 1e-10


def test_continued_smatrix_grows_at_the_pole(resonant_kernel):
    far = abs(continue_S(resonant_kernel, Z_RESONANCE + 1e-5, -1).value[0, 0])
    near = abs(continue_S(resonant_kernel, Z_RESONANCE + 1e-7, -1).value[0, 0])
    assert near >= 1e5
    assert 90 <= near / far <= 110


def test_invert_refuses_singular_scattering_matrix():
    with pytest.raises(AtResonanceError):
        invert_smatrix(np.diag([1.0, 1e-14]), 0.1 - 0.2j, -1)
    with pytest.raises(AtResonanceError):
        invert_smatrix(np.array([[1e-13]]), 0.1 - 0.2j, -1)
    inverse, condition = invert_smatrix(np.diag([2.0, 0.5]), 0.1 - 0.2j, -1)
    assert np.allclose(inverse, np.diag([0.5, 2.0]))
    assert condition == pytest.approx(4)


def test_half_on_shell(coupled_kernel):
    z, mu = 0.4 - 0.25j, 0.1
    assert half_on_shell_check(coupled_kernel, z, -1, mu) <= 1e-10
    half = half_on_shell(coupled_kernel, z, -1, mu)
    full = continue_T(coupled_kernel, z, -1, z, mu)
    assert np.allclose(half.value, full.value, atol=1e-10)


def test_residue_rank_one(resonant_kernel):
    lams = np.linspace(-0.8, 0.8, 5)
    estimate = residue_rank(resonant_kernel, Z_RESONANCE, -1, 0.03, lams=lams, points=32)
    assert estimate.rank == 1
    assert estimate.gap >= 1e4
    expected = 0.4 * np.outer(v(lams), v(lams)) / closed_D_continued_prime(Z_RESONANCE, 0.4)
    assert np.allclose(estimate.residue[:, :, 0, 0], expected, rtol=1e-7, atol=1e-10)
    assert estimate.error <= 1e-8


def test_residue_at_the_origin(resonant_kernel):
    estimate = residue_rank(resonant_kernel, Z_RESONANCE, -1, 0.03, lams=[0.0], points=32)
    assert estimate.residue[0, 0, 0, 0] == pytest.approx(0.0844258 + 0.116572j, abs=1e-6)


def test_residue_rank_multichannel(coupled_kernel):
    estimate = residue_rank(coupled_kernel, COUPLED_RESONANCES[1], -1, 0.03, points=32)
    assert estimate.residue.shape == (8, 8, 2, 2)
    assert estimate.rank == 1
    assert estimate.gap >= 1e4


def test_residue_circle_must_stay_in_the_half_plane(resonant_kernel):
    with pytest.raises(DomainError):
        residue_rank(resonant_kernel, Z_RESONANCE, -1, 0.2)


def test_residue_circle_contaminated(resonant_kernel):
    with pytest.raises(ContourContaminatedError):
        residue_rank(resonant_kernel, Z_RESONANCE - 0.05, -1, 0.08, lams=[0.0], points=32)


@pytest.mark.parametrize("z", [0.2 - 0.3j, -0.6 - 0.1j, 0.9 - 0.5j])
def test_sheets_mirror_under_conjugation(coupled_kernel, z):
    lower = continue_T(coupled_kernel, z, -1, 0.3 + 0.1j, -0.4)
    upper = continue_T(coupled_kernel, np.conj(z), 1, 0.3 - 0.1j, -0.4)
    assert upper.point.sheet == 1
    assert np.allclose(upper.value, lower.value.conj(), atol=1e-10)
    s_lower = continue_S(coupled_kernel, z, -1).value
    s_upper = continue_S(coupled_kernel, np.conj(z), 1).value
    assert np.allclose(s_upper, s_lower.conj(), atol=1e-10)


@pytest.mark.parametrize("z, ell", [(0.4 - 0.25j, -1), (0.4 + 0.25j, 1), (-0.8 - 0.6j, -1)])
def test_continued_smatrix_is_an_involution(coupled_kernel, z, ell):
    continued = continue_S(coupled_kernel, z, ell)
    assert continued.check <= 1e-10
    physical = smatrix(coupled_kernel, z, ell)
    assert np.allclose(physical @ continued.value, np.eye(2), atol=1e-10)
    assert np.allclose(continued.value @ physical, np.eye(2), atol=1e-10)
