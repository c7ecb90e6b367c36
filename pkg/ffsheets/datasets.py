#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Named reference kernels on (−1, 1) with the holomorphy region (−1.5, 1.5) × (−1.5, 1.5).
"""

import os

import numpy as np

from ffsheets.auxiliary import get_path
from ffsheets.Model.Kernel import FiniteRank, AnalyticProduct, FormFactor, HolomorphyRegion
from ffsheets.Model.Experiment import ExperimentConfig

INTERVAL = (-1.0, 1.0)
REGION = HolomorphyRegion(-1.5, 1.5, 1.5)
PARABOLA = FormFactor(p=1, q=1)


def reference_kernel(coupling=1.0):
    """V(λ, μ) = g·(1 − λ²)·(1 − μ²)."""
    return FiniteRank(INTERVAL, 1, REGION, [(coupling, PARABOLA, [[1.0]])])


def resonant_kernel():
    """The reference kernel at g = 0.4, with a single resonance under the cut."""
    return reference_kernel(0.4)


def coupled_channel_kernel():
    return FiniteRank(INTERVAL, 2, REGION, [(0.4, PARABOLA, np.diag([1.0, 0.0])),
                                            (-0.3, PARABOLA, np.diag([0.0, 1.0])),
                                            (0.02, PARABOLA, [[0.0, 1.0], [1.0, 0.0]])])


def zero_kernel(internal_dim=1):
    return FiniteRank(INTERVAL, internal_dim, REGION, [])


def random_finite_rank(rank=3, internal_dim=2, seed=0, scale=0.3):
    """
    Finite-rank kernel with random real polynomial form factors and random Hermitian channels.
    """
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(rank):
        factor = FormFactor(p=1, q=1, poly=tuple(rng.uniform(-1, 1, 2)))
        channel = rng.normal(size=(internal_dim, internal_dim)) \
            + 1j * rng.normal(size=(internal_dim, internal_dim))
        channel = (channel + channel.conj().T) / 2
        terms.append((scale * rng.uniform(-1, 1), factor,
                      channel / np.linalg.norm(channel, ord=2)))
    return FiniteRank(INTERVAL, internal_dim, REGION, terms)


def analytic_product_kernel(exponent=0.5, coupling=0.4):
    """V(λ, μ) = g·(1 − λ²)·(1 − μ²)·exp(c·λ·μ), not of finite rank."""
    return AnalyticProduct(INTERVAL, 1, REGION, coupling, PARABOLA, exponent, [[1.0]])


def example_config(name):
    """
    Load one of the bundled experiment configs.

    :param name: File name without extension, e.g. 'k1_smatrix'.
    """
    return ExperimentConfig.from_file(os.path.join(get_path("CONFIGROOT"), f"{name}.json"))
