#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Experiment configurations: single JSON files with an explicit schema version.

Every violation raises :class:`~ffsheets.exceptions.ConfigError` with the dotted path of the
offending field, e.g. ``resonances.region.im_max``.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ffsheets.auxiliary import get_logger, get_option, digest
from ffsheets.exceptions import ConfigError, DomainError
from ffsheets.Model.Kernel import KernelSpec, FiniteRank, AnalyticProduct, FormFactor, \
    HolomorphyRegion
from ffsheets.Model.Contour import Contour, ContourSpec, build_contour, CONTOUR_KINDS
from ffsheets.Resonances import SearchRegion

log = get_logger(__name__)

SCHEMA_VERSION = 1
DETECTOR_CHOICES = ("smatrix", "oracle", "deformation", "all")


def _get(block: dict, key: str, path: str, default=KeyError):
    if not isinstance(block, dict):
        raise ConfigError(path, "expected an object")
    if key not in block:
        if default is KeyError:
            raise ConfigError(f"{path}.{key}" if path else key, "missing")
        return default
    return block[key]


def _number(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return float(value)


def _integer(value, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {value}")
    return value


def _complex(value, path: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(path, "complex numbers are given as [re, im]")
        return complex(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))
    return complex(_number(value, path))


def _sheet(value, path: str) -> int:
    if value not in (-1, 1) or isinstance(value, bool):
        raise ConfigError(path, f"sheet must be +1 or -1, got {value!r}")
    return int(value)


def _matrix(value, path: str, n: int) -> np.ndarray:
    if n == 1 and not isinstance(value, list):
        return np.array([[_complex(value, path)]])
    if not isinstance(value, list) or len(value) != n:
        raise ConfigError(path, f"expected a {n}x{n} matrix")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise ConfigError(f"{path}[{i}]", f"expected a row of {n} entries")
        rows.append([_complex(entry, f"{path}[{i}][{j}]") for j, entry in enumerate(row)])
    return np.array(rows, dtype=complex)


def _coefficients(value, path: str) -> Tuple[complex, ...]:
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of coefficients")
    return tuple(_complex(c, f"{path}[{k}]") for k, c in enumerate(value))


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int

    @classmethod
    def parse(cls, block, path: str) -> "Grid":
        grid = cls(_number(_get(block, "start", path), f"{path}.start"),
                   _number(_get(block, "stop", path), f"{path}.stop"),
                   _integer(_get(block, "count", path), f"{path}.count", minimum=1))
        if grid.count > 1 and not grid.start < grid.stop:
            raise ConfigError(f"{path}.stop", "must exceed start")
        return grid

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SmatrixPlan:
    energies: Grid
    sheet: int = 1
    nodes: Optional[int] = None
    adaptive: bool = True


@dataclass(frozen=True)
class ResonancePlan:
    sheet: int
    region: SearchRegion
    detector: str = "smatrix"
    contour: Optional[str] = None
    nodes: Optional[int] = None
    samples_per_side: Optional[int] = None
    residues: bool = False


@dataclass(frozen=True)
class SheetmapPlan:
    sheet: int
    re: Grid
    im: Grid
    nodes: Optional[int] = None


@dataclass(frozen=True)
class DeformPlan:
    contours: Tuple[str, ...]
    threshold: Optional[float] = None
    convergence: Tuple[int, ...] = ()
    reference: Tuple[complex, ...] = ()
    brackets: Tuple[Tuple[float, float], ...] = ()


@dataclass
class ExperimentConfig:
    """
    A parsed and validated experiment configuration.
    """
    raw: dict
    kernel: KernelSpec
    contours: Dict[str, ContourSpec] = field(default_factory=dict)
    smatrix: Optional[SmatrixPlan] = None
    resonances: Optional[ResonancePlan] = None
    sheetmap: Optional[SheetmapPlan] = None
    deform: Optional[DeformPlan] = None
    seed: int = 0
    source: Optional[str] = None

    @property
    def digest(self) -> str:
        return digest(self.raw)

    def contour(self, name: str) -> Contour:
        if name not in self.contours:
            raise ConfigError(f"contours.{name}", "undefined contour")
        return build_contour(self.contours[name], self.kernel.a, self.kernel.b,
                             self.kernel.region)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """
        Read and validate a JSON config.

        :param path: Path of the config file.
        """
        try:
            with open(path, "r", encoding="utf-8") as file:
                raw = json.load(file)
        except FileNotFoundError:
            raise ConfigError("<file>", f"{path} does not exist")
        except json.JSONDecodeError as ex:
            raise ConfigError("<file>", f"invalid JSON in {path}: {ex}")
        config = cls.from_dict(raw)
        config.source = str(path)
        log.info(f"Loaded experiment config {path} (digest {config.digest[:12]}).")
        return config

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "expected a JSON object")
        schema = _get(raw, "schema", "")
        if schema != SCHEMA_VERSION:
            raise ConfigError("schema", f"unsupported schema {schema!r}, expected {SCHEMA_VERSION}")
        kernel = parse_kernel(_get(raw, "kernel", ""))
        contours = {}
        contour_blocks = _get(raw, "contours", "", {})
        if not isinstance(contour_blocks, dict):
            raise ConfigError("contours", "expected an object mapping names to contours")
        for name, block in contour_blocks.items():
            contours[name] = parse_contour(block, f"contours.{name}", kernel)
        config = cls(raw, kernel, contours,
                     seed=_integer(_get(raw, "seed", "", 0), "seed", minimum=0))
        if "smatrix" in raw:
            config.smatrix = parse_smatrix(raw["smatrix"], kernel)
        if "resonances" in raw:
            config.resonances = parse_resonances(raw["resonances"], kernel, contours)
        if "sheetmap" in raw:
            config.sheetmap = parse_sheetmap(raw["sheetmap"], kernel)
        if "deform" in raw:
            config.deform = parse_deform(raw["deform"], kernel, contours)
        return config


def parse_form_factor(block, path: str) -> FormFactor:
    return FormFactor(p=_integer(_get(block, "p", path, 1), f"{path}.p", minimum=1),
                      q=_integer(_get(block, "q", path, 1), f"{path}.q", minimum=1),
                      poly=_coefficients(_get(block, "poly", path, [1.0]), f"{path}.poly"),
                      exp=_coefficients(_get(block, "exp", path, []), f"{path}.exp"))


def parse_kernel(block) -> KernelSpec:
    interval = _get(block, "interval", "kernel")
    if not isinstance(interval, list) or len(interval) != 2:
        raise ConfigError("kernel.interval", "expected [a, b]")
    a, b = (_number(x, f"kernel.interval[{k}]") for k, x in enumerate(interval))
    n = _integer(_get(block, "internal_dim", "kernel", 1), "kernel.internal_dim", minimum=1)
    region_block = _get(block, "region", "kernel")
    try:
        region = HolomorphyRegion(
            _number(_get(region_block, "re_min", "kernel.region"), "kernel.region.re_min"),
            _number(_get(region_block, "re_max", "kernel.region"), "kernel.region.re_max"),
            _number(_get(region_block, "im_halfwidth", "kernel.region"),
                    "kernel.region.im_halfwidth"))
        family = _get(block, "family", "kernel")
        if family == "finite_rank":
            terms = []
            for k, term in enumerate(_get(block, "terms", "kernel")):
                path = f"kernel.terms[{k}]"
                terms.append((_number(_get(term, "coupling", path), f"{path}.coupling"),
                              parse_form_factor(_get(term, "form_factor", path, {}),
                                                f"{path}.form_factor"),
                              _matrix(_get(term, "channel", path, np.eye(n).tolist()),
                                      f"{path}.channel", n)))
            return FiniteRank((a, b), n, region, terms)
        if family == "analytic_product":
            product = _get(block, "product", "kernel")
            return AnalyticProduct(
                (a, b), n, region,
                coupling=_number(_get(product, "coupling", "kernel.product"),
                                 "kernel.product.coupling"),
                form_factor=parse_form_factor(_get(product, "form_factor", "kernel.product", {}),
                                              "kernel.product.form_factor"),
                exponent=_number(_get(product, "exponent", "kernel.product"),
                                 "kernel.product.exponent"),
                channel=_matrix(_get(product, "channel", "kernel.product", np.eye(n).tolist()),
                                "kernel.product.channel", n))
        raise ConfigError("kernel.family", f"unknown family {family!r}")
    except DomainError as ex:
        raise ConfigError(f"kernel.{ex.argument}", str(ex)) from ex


def parse_contour(block, path: str, kernel: KernelSpec) -> ContourSpec:
    kind = _get(block, "kind", path)
    if kind not in CONTOUR_KINDS:
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}")
    nodes = _integer(_get(block, "nodes", path, get_option("nodes", int)), f"{path}.nodes",
                     minimum=1)
    try:
        if kind == "elliptic_dip":
            spec = ContourSpec.elliptic_dip(_number(_get(block, "depth", path), f"{path}.depth",
                                                    positive=True),
                                            _sheet(_get(block, "sign", path, -1), f"{path}.sign"),
                                            nodes)
        elif kind == "polyline":
            anchors = _get(block, "anchors", path)
            if not isinstance(anchors, list):
                raise ConfigError(f"{path}.anchors", "expected a list of points")
            spec = ContourSpec.polyline([_complex(p, f"{path}.anchors[{k}]")
                                         for k, p in enumerate(anchors)], nodes)
        else:
            spec = ContourSpec.real_segment(nodes)
        build_contour(spec, kernel.a, kernel.b, kernel.region)
    except DomainError as ex:
        raise ConfigError(f"{path}.{ex.argument}", str(ex)) from ex
    return spec


def _optional_nodes(block, path):
    nodes = _get(block, "nodes", path, None)
    return None if nodes is None else _integer(nodes, f"{path}.nodes", minimum=1)


def parse_smatrix(block, kernel: KernelSpec) -> SmatrixPlan:
    energies = Grid.parse(_get(block, "energies", "smatrix"), "smatrix.energies")
    for key in ("start", "stop"):
        value = getattr(energies, key)
        if not kernel.a < value < kernel.b:
            raise ConfigError(f"smatrix.energies.{key}",
                              f"{value} lies outside the interval ({kernel.a}, {kernel.b})")
    adaptive = _get(block, "adaptive", "smatrix", True)
    if not isinstance(adaptive, bool):
        raise ConfigError("smatrix.adaptive", "expected true or false")
    return SmatrixPlan(energies, _sheet(_get(block, "sheet", "smatrix", 1), "smatrix.sheet"),
                       _optional_nodes(block, "smatrix"), adaptive)


def parse_resonances(block, kernel: KernelSpec, contours: Dict[str, ContourSpec]) -> ResonancePlan:
    sheet = _sheet(_get(block, "sheet", "resonances"), "resonances.sheet")
    region_block = _get(block, "region", "resonances")
    path = "resonances.region"
    subdivision = _get(region_block, "subdivision", path, [2, 2])
    if not isinstance(subdivision, list) or len(subdivision) != 2:
        raise ConfigError(f"{path}.subdivision", "expected [nre, nim]")
    region = SearchRegion(*(_number(_get(region_block, key, path), f"{path}.{key}")
                            for key in ("re_min", "re_max", "im_min", "im_max")),
                          subdivision=tuple(_integer(s, f"{path}.subdivision[{k}]", minimum=1)
                                            for k, s in enumerate(subdivision)))
    try:
        region.validate(kernel, sheet)
    except DomainError as ex:
        raise ConfigError(f"{path}.{ex.argument}", str(ex)) from ex
    detector = _get(block, "detector", "resonances", "smatrix")
    if detector not in DETECTOR_CHOICES:
        raise ConfigError("resonances.detector", f"unknown detector {detector!r}, choose from "
                                                 f"{', '.join(DETECTOR_CHOICES)}")
    contour = _get(block, "contour", "resonances", None)
    if detector in ("deformation", "all"):
        if contour is None:
            raise ConfigError("resonances.contour", "the deformation detector needs a contour")
        if contour not in contours:
            raise ConfigError("resonances.contour", f"undefined contour {contour!r}")
        spec = contours[contour]
        halfplane = build_contour(spec, kernel.a, kernel.b, kernel.region).halfplane
        if halfplane != sheet:
            raise ConfigError("resonances.contour", f"contour {contour!r} does not dip into the "
                                                    f"half-plane of sheet {sheet:+d}")
    samples = _get(block, "samples_per_side", "resonances", None)
    residues = _get(block, "residues", "resonances", False)
    if not isinstance(residues, bool):
        raise ConfigError("resonances.residues", "expected true or false")
    return ResonancePlan(sheet, region, detector, contour, _optional_nodes(block, "resonances"),
                         None if samples is None else
                         _integer(samples, "resonances.samples_per_side", minimum=2),
                         residues)


def parse_sheetmap(block, kernel: KernelSpec) -> SheetmapPlan:
    sheet = _sheet(_get(block, "sheet", "sheetmap"), "sheetmap.sheet")
    re = Grid.parse(_get(block, "re", "sheetmap"), "sheetmap.re")
    im = Grid.parse(_get(block, "im", "sheetmap"), "sheetmap.im")
    for key in ("start", "stop"):
        if not kernel.region.re_min < getattr(re, key) < kernel.region.re_max:
            raise ConfigError(f"sheetmap.re.{key}", "outside the holomorphy region")
        value = getattr(im, key)
        if np.sign(value) != sheet:
            raise ConfigError(f"sheetmap.im.{key}", f"{value} is not in the half-plane of "
                                                    f"sheet {sheet:+d}")
        if abs(value) >= kernel.region.im_halfwidth:
            raise ConfigError(f"sheetmap.im.{key}", "outside the holomorphy region")
    return SheetmapPlan(sheet, re, im, _optional_nodes(block, "sheetmap"))


def parse_deform(block, kernel: KernelSpec, contours: Dict[str, ContourSpec]) -> DeformPlan:
    names = _get(block, "contours", "deform")
    if not isinstance(names, list) or not names:
        raise ConfigError("deform.contours", "expected a non-empty list of contour names")
    for k, name in enumerate(names):
        if name not in contours:
            raise ConfigError(f"deform.contours[{k}]", f"undefined contour {name!r}")
    if len(names) > 1:
        halfplanes = {build_contour(contours[name], kernel.a, kernel.b, kernel.region).halfplane
                      for name in names}
        if len(halfplanes) != 1 or 0 in halfplanes:
            raise ConfigError("deform.contours", "contours compared for independence must dip into "
                                                 "the same half-plane")
    threshold = _get(block, "threshold", "deform", None)
    if threshold is not None:
        threshold = _number(threshold, "deform.threshold", positive=True)
    convergence = tuple(_integer(c, f"deform.convergence[{k}]", minimum=2)
                        for k, c in enumerate(_get(block, "convergence", "deform", [])))
    reference = tuple(_complex(z, f"deform.reference[{k}]")
                      for k, z in enumerate(_get(block, "reference", "deform", [])))
    brackets = []
    for k, bracket in enumerate(_get(block, "brackets", "deform", [])):
        path = f"deform.brackets[{k}]"
        if not isinstance(bracket, list) or len(bracket) != 2:
            raise ConfigError(path, "expected [lo, hi]")
        lo, hi = (_number(x, f"{path}[{j}]") for j, x in enumerate(bracket))
        if not lo < hi or (hi > kernel.a and lo < kernel.b):
            raise ConfigError(path, f"bracket must lie left of {kernel.a} or right of {kernel.b}")
        brackets.append((lo, hi))
    return DeformPlan(tuple(names), threshold, convergence, reference, tuple(brackets))


def energy_grid(plan: SmatrixPlan, kernel: KernelSpec) -> Tuple[np.ndarray, List[float]]:
    """Scan energies with the endpoint disks removed, and the removed energies."""
    radius = get_option("endpoint_exclusion") * (kernel.b - kernel.a)
    energies = plan.energies.values
    keep = (energies - kernel.a > radius) & (kernel.b - energies > radius)
    return energies[keep], energies[~keep].tolist()


def sheet_grid(plan: SheetmapPlan, kernel: KernelSpec) -> Tuple[np.ndarray, List[complex]]:
    """Complex grid points (row-major in Im, then Re) outside the endpoint disks."""
    radius = get_option("endpoint_exclusion") * (kernel.b - kernel.a)
    re, im = np.meshgrid(plan.re.values, plan.im.values)
    points = (re + 1j * im).ravel()
    keep = (np.abs(points - kernel.a) > radius) & (np.abs(points - kernel.b) > radius)
    return points[keep], points[~keep].tolist()
