#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import copy
import json

import numpy as np
import pytest

from ffsheets import datasets
from ffsheets.exceptions import ConfigError
from ffsheets.Model.Experiment import ExperimentConfig, Grid, SmatrixPlan, SheetmapPlan, \
    energy_grid, sheet_grid
from ffsheets.Model.Kernel import FiniteRank

BASE = {
    "schema": 1,
    "kernel": {
        "interval": [-1.0, 1.0],
        "region": {"re_min": -1.5, "re_max": 1.5, "im_halfwidth": 1.5},
        "family": "finite_rank",
        "terms": [{"coupling": 0.4, "form_factor": {"p": 1, "q": 1}}]
    },
    "contours": {
        "dip": {"kind": "elliptic_dip", "depth": 1.0, "sign": -1, "nodes": 96},
        "up": {"kind": "elliptic_dip", "depth": 1.0, "sign": 1, "nodes": 96}
    },
    "resonances": {
        "sheet": -1,
        "region": {"re_min": 0.5, "re_max": 0.95, "im_min": -0.4, "im_max": -0.02}
    }
}


def modified(path, value):
    raw = copy.deepcopy(BASE)
    *parents, key = path.split(".")
    block = raw
    for parent in parents:
        block = block.setdefault(parent, {})
    block[key] = value
    return raw


@pytest.mark.parametrize("name", ["k1_smatrix", "k1_resonances", "k1_sheetmap", "k1_deform",
                                  "bound_state"])
def test_bundled_configs(config_path, name):
    config = ExperimentConfig.from_file(config_path(name))
    assert isinstance(config.kernel, FiniteRank)
    assert config.source.endswith(f"{name}.json")
    assert len(config.digest) == 64


def test_bundled_plans():
    resonances = datasets.example_config("k1_resonances").resonances
    assert resonances.sheet == -1
    assert resonances.detector == "all"
    assert resonances.contour == "dip"
    assert resonances.region.box.as_tuple() == (-0.9, 0.9, -0.45, -0.02)
    deform = datasets.example_config("k1_deform").deform
    assert deform.contours == ("dip", "deep")
    assert datasets.example_config("bound_state").deform.brackets == ((-1.49, -1.05),)


def test_minimal_config():
    config = ExperimentConfig.from_dict(BASE)
    assert config.seed == 0
    assert config.smatrix is None
    assert config.kernel.n == 1
    assert config.contour("dip").halfplane == -1
    with pytest.raises(ConfigError):
        config.contour("spiral")


@pytest.mark.parametrize("path, value, field", [
    ("schema", 2, "schema"),
    ("kernel.interval", [1.0], "kernel.interval"),
    ("kernel.family", "gaussian", "kernel.family"),
    ("kernel.terms", [{"coupling": 0.4, "form_factor": {"p": 0}}], "kernel.terms[0].form_factor.p"),
    ("kernel.terms", [{"coupling": "strong"}], "kernel.terms[0].coupling"),
    ("contours.dip", {"kind": "elliptic_dip", "depth": 1.6}, "contours.dip.depth"),
    ("contours.dip", {"kind": "spiral"}, "contours.dip.kind"),
    ("resonances.region", {"re_min": 0.5, "re_max": 0.95, "im_min": -0.4, "im_max": 0.1},
     "resonances.region.im_max"),
    ("resonances.sheet", 0, "resonances.sheet"),
    ("resonances.detector", "guess", "resonances.detector"),
    ("seed", -1, "seed"),
    ("sheetmap", {"sheet": -1, "re": {"start": -0.9, "stop": 0.9, "count": 4},
                  "im": {"start": 0.1, "stop": 0.3, "count": 2}}, "sheetmap.im.start"),
    ("smatrix", {"energies": {"start": -1.2, "stop": 0.9, "count": 4}},
     "smatrix.energies.start"),
    ("smatrix", {"energies": {"start": 0.5, "stop": 0.2, "count": 4}}, "smatrix.energies.stop"),
    ("deform", {"contours": ["dip", "ghost"]}, "deform.contours[1]"),
    ("deform", {"contours": ["dip", "up"]}, "deform.contours"),
    ("deform", {"contours": ["dip"], "brackets": [[-1.2, 0.0]]}, "deform.brackets[0]"),
])
def test_config_errors(path, value, field):
    with pytest.raises(ConfigError) as ex:
        ExperimentConfig.from_dict(modified(path, value))
    assert ex.value.field == field


def test_deformation_detector_needs_matching_contour():
    raw = modified("resonances.detector", "deformation")
    with pytest.raises(ConfigError) as ex:
        ExperimentConfig.from_dict(raw)
    assert ex.value.field == "resonances.contour"
    raw["resonances"]["contour"] = "up"
    with pytest.raises(ConfigError) as ex:
        ExperimentConfig.from_dict(raw)
    assert ex.value.field == "resonances.contour"
    raw["resonances"]["contour"] = "dip"
    assert ExperimentConfig.from_dict(raw).resonances.contour == "dip"


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError) as ex:
        ExperimentConfig.from_file(tmp_path / "missing.json")
    assert ex.value.field == "<file>"
    broken = tmp_path / "broken.json"
    broken.write_text("{\"schema\": 1,")
    with pytest.raises(ConfigError) as ex:
        ExperimentConfig.from_file(broken)
    assert ex.value.field == "<file>"


def test_digest_is_stable(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(BASE, indent=4))
    reordered = dict(reversed(list(BASE.items())))
    assert ExperimentConfig.from_file(path).digest == ExperimentConfig.from_dict(reordered).digest
    assert ExperimentConfig.from_dict(modified("seed", 3)).digest != \
        ExperimentConfig.from_dict(BASE).digest


def test_energy_grid_excludes_endpoint_disks():
    kernel = datasets.resonant_kernel()
    energies, excluded = energy_grid(SmatrixPlan(Grid(-0.99, 0.99, 3)), kernel)
    assert np.allclose(energies, [0.0])
    assert excluded == pytest.approx([-0.99, 0.99])


def test_sheet_grid_order_and_exclusions():
    kernel = datasets.resonant_kernel()
    plan = SheetmapPlan(-1, Grid(-1.0, 0.0, 3), Grid(-0.02, -0.01, 2))
    points, excluded = sheet_grid(plan, kernel)
    assert np.allclose(points, [-0.5 - 0.02j, 0.0 - 0.02j, -0.5 - 0.01j, 0.0 - 0.01j])
    assert np.allclose(excluded, [-1.0 - 0.02j, -1.0 - 0.01j])
