#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
ffsheets computes scattering quantities of Friedrichs-Faddeev models on the physical and the
unphysical sheets of the energy Riemann surface.
This module sets up logging and provides the public imports.
"""
# pylint: disable=ungrouped-imports

import logging

__version__ = "0.1.0"

# default loglevel
loglevel = logging.INFO

from ffsheets.auxiliary import CONFIG, get_logger, get_file_handler, get_console_handler, \
    get_path, get_option

# Configure root logger and default handler
rootlogger = logging.getLogger()
rootlogger.setLevel(logging.ERROR)

# Package logger that controls all other loggers
log = get_logger(__name__)
consolehandler = get_console_handler()
log.addHandler(consolehandler)
log.setLevel(loglevel)

try:
    import pytest

    def test_all(runslow=False):
        if runslow:
            pytest.main([get_path("TESTROOT"), "--runslow"])
        else:
            pytest.main([get_path("TESTROOT")])
except ModuleNotFoundError:
    pass

try:
    # pylint: disable=wrong-import-position
    from ffsheets.Model.Kernel import FiniteRank, AnalyticProduct, FormFactor, HolomorphyRegion, \
        eval_kernel, validate_kernel
    from ffsheets.Model.Contour import ContourSpec, build_contour, omega_gamma_contains
    from ffsheets.PhysicalSheet import solve_T_grid, extend_T, smatrix, apply_resolvent, \
        fredholm_det, bound_states
    from ffsheets.UnphysicalSheet import continue_T, continue_S, residue_rank
    from ffsheets.Resonances import SearchRegion, find_resonances, separable_oracle
    from ffsheets.Deformation import build_H_gamma, deformed_spectrum, gamma_independence_check
    from ffsheets.api import run_smatrix, run_resonances, run_sheetmap, run_deform, run_validate
    from ffsheets import datasets
except ModuleNotFoundError:
    log.warning("Unfulfilled requirements. The computational API is not available.")
