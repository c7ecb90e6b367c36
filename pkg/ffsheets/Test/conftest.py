#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import os

import pytest

from ffsheets.auxiliary import get_path
from ffsheets import datasets
from ffsheets.Model.Contour import ContourSpec, build_contour


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the slow convergence studies")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: high node-count convergence studies")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def unit_kernel():
    return datasets.reference_kernel(1.0)


@pytest.fixture(scope="session")
def resonant_kernel():
    return datasets.resonant_kernel()


@pytest.fixture(scope="session")
def binding_kernel():
    return datasets.reference_kernel(-1.0)


@pytest.fixture(scope="session")
def coupled_kernel():
    return datasets.coupled_channel_kernel()


@pytest.fixture(scope="session")
def zero_kernel():
    return datasets.zero_kernel()


@pytest.fixture(scope="session")
def real_segment(unit_kernel):
    return build_contour(ContourSpec.real_segment(64), -1, 1, unit_kernel.region)


@pytest.fixture(scope="session")
def dip(unit_kernel):
    return build_contour(ContourSpec.elliptic_dip(1.0, sign=-1, nodes=96), -1, 1,
                         unit_kernel.region)


@pytest.fixture(scope="session")
def deep_dip(unit_kernel):
    return build_contour(ContourSpec.elliptic_dip(1.3, sign=-1, nodes=128), -1, 1,
                         unit_kernel.region)


@pytest.fixture(scope="session")
def config_path():
    def path(name):
        return os.path.join(get_path("CONFIGROOT"), f"{name}.json")
    return path
