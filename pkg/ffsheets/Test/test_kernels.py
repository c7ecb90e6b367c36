#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import numpy as np
import pytest

from ffsheets import datasets
from ffsheets.exceptions import DomainError, OracleUnavailableError
from ffsheets.Model.Kernel import FiniteRank, FormFactor, HolomorphyRegion, eval_kernel, \
    validate_kernel


def test_reference_kernel_values(unit_kernel):
    assert eval_kernel(unit_kernel, 0.5, -0.5)[0, 0] == pytest.approx(0.75 ** 2)
    assert eval_kernel(unit_kernel, 1j, 0)[0, 0] == pytest.approx(2)


def test_kernel_blocks_shape(coupled_kernel):
    blocks = coupled_kernel.matrix([0.1, 0.2, 0.3], [0.0, 0.5])
    assert blocks.shape == (3, 2, 2, 2)
    v = 0.99 * 0.75
    assert np.allclose(blocks[0, 1], v * np.array([[0.4, 0.02], [0.02, -0.3]]))


@pytest.mark.parametrize("lam, mu, name", [(2.0, 0.0, "lambda"), (0.0, 1.6j, "mu"),
                                           (0.0, -1.5j, "mu")])
def test_kernel_outside_region(unit_kernel, lam, mu, name):
    with pytest.raises(DomainError) as ex:
        eval_kernel(unit_kernel, lam, mu)
    assert ex.value.argument == name


def test_region_must_contain_interval():
    with pytest.raises(DomainError):
        FiniteRank((-2, 1), 1, HolomorphyRegion(-1.5, 1.5, 1), [])


def test_form_factor_must_vanish_at_endpoints():
    with pytest.raises(DomainError) as ex:
        FiniteRank((-1, 1), 1, HolomorphyRegion(-1.5, 1.5, 1), [(1.0, FormFactor(p=0), [[1]])])
    assert ex.value.argument == "terms[0].form_factor"


def test_channel_shape_checked():
    with pytest.raises(DomainError):
        FiniteRank((-1, 1), 2, HolomorphyRegion(-1.5, 1.5, 1), [(1.0, FormFactor(), [[1]])])


def test_form_factor_polynomial():
    factor = FormFactor(p=2, q=1, poly=(1.0, 0.5))
    polynomial = factor.polynomial((-1, 1))
    x = np.array([-0.3, 0.1, 0.7 + 0.2j])
    assert np.allclose(polynomial(x), factor(x, (-1, 1)))


def test_form_factor_exponential_not_polynomial():
    factor = FormFactor(exp=(0.0, 1.0))
    assert not factor.is_polynomial
    with pytest.raises(OracleUnavailableError):
        factor.polynomial((-1, 1))


@pytest.mark.parametrize("kernel", [datasets.reference_kernel(1.0),
                                    datasets.coupled_channel_kernel(),
                                    datasets.random_finite_rank(),
                                    datasets.analytic_product_kernel()],
                         ids=["reference", "coupled", "random", "analytic_product"])
def test_validate_reference_kernels(kernel):
    report = validate_kernel(kernel)
    assert report.ok, report.flags
    assert report.samples == 100


def test_validate_flags_non_hermitian():
    kernel = FiniteRank((-1, 1), 2, HolomorphyRegion(-1.5, 1.5, 1.5),
                        [(1.0, FormFactor(), [[0, 1j], [1j, 0]])])
    report = validate_kernel(kernel)
    assert not report.ok
    assert any("Hermiticity" in flag for flag in report.flags)
    assert report.to_dict()["flags"] == report.flags


def test_validate_is_seeded(unit_kernel):
    assert validate_kernel(unit_kernel, seed=3).to_dict() == \
        validate_kernel(unit_kernel, seed=3).to_dict()


@pytest.mark.parametrize("terms", [
    [(1.0, FormFactor(), [[1.0]])],
    [(0.4, FormFactor(p=2, q=1, poly=(1.0, 0.5)), 1.0), (-0.3, FormFactor(exp=(0.2,)), [[1.0]])],
], ids=["rank_one", "rank_two"])
def test_single_channel_reduces_to_scalar_kernel(terms):
    kernel = FiniteRank((-1, 1), 1, HolomorphyRegion(-1.5, 1.5, 1.5), terms)
    lams = np.array([-0.7, 0.2 + 0.3j, 0.9])
    mus = np.array([0.5, -0.4j])
    expected = sum(g * np.outer(v(lams, (-1, 1)), v(mus, (-1, 1))) for g, v, _ in terms)
    blocks = kernel.matrix(lams, mus)
    assert blocks.shape == (3, 2, 1, 1)
    assert np.allclose(blocks[:, :, 0, 0], expected, atol=1e-14)
    assert eval_kernel(kernel, 0.2 + 0.3j, -0.4j)[0, 0] == pytest.approx(expected[1, 1])
