#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Iterable, List, Union

import numpy as np
from pandas import DataFrame
from tqdm import tqdm

from ffsheets.auxiliary import get_logger
from ffsheets.exceptions import ConfigError, SpectralPointError, AtResonanceError, \
    IncompleteSearchError, OracleUnavailableError
from ffsheets.Model.Experiment import ExperimentConfig, energy_grid, sheet_grid
from ffsheets.Model.Kernel import validate_kernel
from ffsheets.PhysicalSheet import physical_solution, scattering_matrix, phase_shift, \
    unitarity_residual, bound_states
from ffsheets.UnphysicalSheet import invert_smatrix
from ffsheets.Resonances import find_resonances, separable_oracle, resonance_report, \
    oracle_bound_states
from ffsheets.Deformation import deformed_spectrum, deformation_resonances, \
    gamma_independence_check, convergence_study
from ffsheets.Writer import ReportWriter, RunReport

log = get_logger(__name__)


def load_config(config: Union[ExperimentConfig, str, Path]) -> ExperimentConfig:
    if isinstance(config, ExperimentConfig):
        return config
    return ExperimentConfig.from_file(config)


def create_logfile(out: Union[str, Path], log_to_file: Union[bool, str, Path]):
    """
    Attach a file handler to the package logger for one run.

    :param out: Output directory of the run (default location of the logfile).
    :param log_to_file: True for out/ffsheets.log, or a path (relative paths are taken relative
        to out).
    """
    from ffsheets import log as packagelogger
    from ffsheets.auxiliary import get_file_handler
    os.makedirs(out, exist_ok=True)
    if isinstance(log_to_file, bool):
        logfile = os.path.join(out, "ffsheets.log")
    elif os.path.isabs(log_to_file):
        logfile = log_to_file
    else:
        logfile = os.path.join(out, log_to_file)
    handler = get_file_handler(logfile)
    packagelogger.addHandler(handler)
    return handler, packagelogger


@contextmanager
def experiment(command: str, config: ExperimentConfig, out: Union[str, Path],
               log_to_file: Union[bool, str, Path] = False):
    """
    Run context of one command: output writer, run report and optional logfile. The run report is
    written even if the command fails.
    """
    from ffsheets import __version__
    if log_to_file:
        handler, packagelogger = create_logfile(out, log_to_file)
    writer = ReportWriter(out)
    report = RunReport(command, config.digest, __version__)
    start = time.perf_counter()
    log.info(f"Starting {command} ({config.source or 'in-memory config'}).")
    try:
        yield writer, report
    except IncompleteSearchError:
        report.status = "incomplete"
        raise
    except Exception:
        report.status = "failed"
        raise
    finally:
        report.wall_time = time.perf_counter() - start
        report.write(writer)
        log.info(f"Finished {command} in {report.wall_time:.2f} s ({report.status}).")
        if log_to_file:
            packagelogger.removeHandler(handler)
            handler.close()


def parallel_map(func: Callable, items: Iterable, jobs: int = 1, desc: str = None,
                 silence_tqdm: bool = False) -> List:
    """Apply func to all items on a thread pool; results keep the order of items."""
    items = list(items)
    if jobs is None or jobs <= 1:
        return [func(item) for item in tqdm(items, desc=desc, leave=True, disable=silence_tqdm)]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(tqdm(executor.map(func, items), total=len(items), desc=desc, leave=True,
                         disable=silence_tqdm))


def _matrix_columns(s: np.ndarray) -> dict:
    row = {}
    n = len(s)
    for i in range(n):
        for j in range(n):
            row[f"Re_S_{i}{j}"] = s[i, j].real
            row[f"Im_S_{i}{j}"] = s[i, j].imag
    return row


def smatrix_scan(kernel, energies, ell: int = 1, nodes: int = None, adaptive: bool = True,
                 jobs: int = 1, silence_tqdm: bool = False):
    """
    Boundary values S_ℓ(E + iℓ0) over an energy grid.

    :return: DataFrame with columns E, Re_S_ij, Im_S_ij, abs_det_S, phase, unitarity, and the
        list of skipped spectral energies.
    """
    def sample(energy):
        try:
            s = scattering_matrix(physical_solution(kernel, energy, ell, nodes, adaptive), ell)
        except SpectralPointError as ex:
            log.warning(f"Skipping E = {energy}: {ex}")
            return None
        return {"E": float(energy), **_matrix_columns(s),
                "abs_det_S": float(abs(np.linalg.det(s))), "phase": phase_shift(s),
                "unitarity": unitarity_residual(s)}

    rows = parallel_map(sample, energies, jobs, desc="S-matrix scan", silence_tqdm=silence_tqdm)
    skipped = [float(e) for e, row in zip(energies, rows) if row is None]
    return DataFrame([row for row in rows if row is not None]), skipped


def run_smatrix(config, out: Union[str, Path] = ".", jobs: int = 1, silence_tqdm: bool = False,
                log_to_file: Union[bool, str, Path] = False) -> RunReport:
    """
    Scan the physical scattering matrix over the configured energy grid.

    :param config: :class:`~ffsheets.Model.Experiment.ExperimentConfig` or path to a JSON config.
    :param out: Output directory.
    :param jobs: Worker threads.
    :param silence_tqdm: Silence tqdm progress bars.
    :param log_to_file: Pass logging output to a file for this run only.

    :return: :class:`~ffsheets.Writer.RunReport`
    """
    config = load_config(config)
    plan = config.smatrix
    if plan is None:
        raise ConfigError("smatrix", "missing")
    with experiment("smatrix", config, out, log_to_file) as (writer, report):
        energies, excluded = energy_grid(plan, config.kernel)
        frame, skipped = smatrix_scan(config.kernel, energies, plan.sheet, plan.nodes,
                                      plan.adaptive, jobs, silence_tqdm)
        writer.write_csv("smatrix.csv", frame)
        report.excluded_points = len(excluded)
        report.diagnostics = {"rows": len(frame), "skipped_energies": skipped,
                              "max_unitarity_residual":
                                  float(frame["unitarity"].max()) if len(frame) else 0.0}
    return report


def detect_resonances(config: ExperimentConfig, jobs: int = 1) -> dict:
    """
    Run the configured resonance detectors.

    :return: Resonance lists keyed by detector name.
    :raises IncompleteSearchError: with the partial lists of all detectors in ``found``.
    """
    plan, kernel = config.resonances, config.kernel
    if plan.detector == "all":
        detectors = ["smatrix", "oracle", "deformation"]
    else:
        detectors = [plan.detector]
    found = {}
    for detector in detectors:
        if detector == "smatrix":
            try:
                found["smatrix_zero"] = find_resonances(
                    kernel, plan.sheet, plan.region, plan.nodes, plan.samples_per_side, jobs,
                    residues=plan.residues)
            except IncompleteSearchError as ex:
                found["smatrix_zero"] = ex.found
                raise IncompleteSearchError(ex.unresolved, found, ex.expected) from ex
        elif detector == "oracle":
            try:
                found["oracle"] = separable_oracle(kernel, plan.sheet, plan.region,
                                                   plan.samples_per_side)
            except OracleUnavailableError as ex:
                if plan.detector != "all":
                    raise
                log.warning(f"Skipping the oracle detector: {ex}")
        else:
            spectrum = deformed_spectrum(kernel, config.contour(plan.contour))
            inside = [r for r in deformation_resonances(spectrum, kernel, plan.nodes)
                      if plan.region.box.contains(r.z)]
            found["deformation"] = inside
    return found


def run_resonances(config, out: Union[str, Path] = ".", jobs: int = 1,
                   silence_tqdm: bool = False,
                   log_to_file: Union[bool, str, Path] = False) -> RunReport:
    """
    Locate resonances with the configured detectors and pair their results.

    A partial report is written if the argument-principle search is incomplete.
    """
    config = load_config(config)
    plan = config.resonances
    if plan is None:
        raise ConfigError("resonances", "missing")
    with experiment("resonances", config, out, log_to_file) as (writer, report):
        document = {"sheet": plan.sheet, "region": list(plan.region.box.as_tuple()),
                    "detector": plan.detector}
        try:
            found = detect_resonances(config, jobs)
        except IncompleteSearchError as ex:
            document["incomplete"] = {"unresolved": [list(b) for b in ex.unresolved],
                                      "expected": ex.expected}
            document["detectors"] = {name: [r.to_dict() for r in resonances]
                                     for name, resonances in ex.found.items()}
            writer.write_json("resonances.json", document)
            raise
        document["detectors"] = {name: [r.to_dict() for r in resonances]
                                 for name, resonances in found.items()}
        if len(found) > 1:
            match = resonance_report(found, plan.region.diameter)
            document["match"] = match.to_dict()
            writer.write_csv("matches.csv", match.to_frame())
            for first, second in {tuple(p.detectors) for p in match.pairs}:
                report.diagnostics[f"max_distance {first}-{second}"] = \
                    match.max_distance(first, second)
            report.diagnostics["unmatched"] = len(match.unmatched)
        for name, resonances in found.items():
            report.diagnostics[f"count {name}"] = len(resonances)
        writer.write_json("resonances.json", document)
    return report


def sheet_sample(kernel, z: complex, ell: int, nodes: int = None) -> dict:
    """
    |det S_ℓ(z)| on the physical sheet and |det S_ℓ(z)⁻¹| on Π_ℓ at one grid point. Points where
    S_ℓ(z) is not invertible get condition = inf.
    """
    row = {"re": z.real, "im": z.imag, "sheet": ell}
    try:
        s = scattering_matrix(physical_solution(kernel, z, ell, nodes), ell)
    except SpectralPointError as ex:
        log.warning(f"Spectral point in the sheet grid: {ex}")
        return {**row, "abs_det_S": np.nan, "abs_det_continued": np.nan, "product": np.nan,
                "condition": np.inf}
    row.update(_matrix_columns(s))
    row["abs_det_S"] = float(abs(np.linalg.det(s)))
    try:
        inverse, condition = invert_smatrix(s, z, ell)
    except AtResonanceError:
        row.update({"abs_det_continued": np.inf, "product": np.nan, "condition": np.inf})
        return row
    row["abs_det_continued"] = float(abs(np.linalg.det(inverse)))
    row["product"] = row["abs_det_S"] * row["abs_det_continued"]
    row["condition"] = condition
    return row


def run_sheetmap(config, out: Union[str, Path] = ".", jobs: int = 1, silence_tqdm: bool = False,
                 log_to_file: Union[bool, str, Path] = False) -> RunReport:
    """
    Sample |det S| on the physical sheet and |det S continued| on Π_ℓ over a complex grid.
    """
    config = load_config(config)
    plan = config.sheetmap
    if plan is None:
        raise ConfigError("sheetmap", "missing")
    with experiment("sheetmap", config, out, log_to_file) as (writer, report):
        points, excluded = sheet_grid(plan, config.kernel)
        rows = parallel_map(lambda z: sheet_sample(config.kernel, z, plan.sheet, plan.nodes),
                            points, jobs, desc="Sheet map", silence_tqdm=silence_tqdm)
        frame = DataFrame(rows)
        writer.write_csv("sheetmap.csv", frame)
        report.excluded_points = len(excluded)
        finite = frame["product"][np.isfinite(frame["product"])] if len(frame) else []
        report.diagnostics = {"rows": len(frame),
                              "at_resonance":
                                  int(np.isinf(frame["condition"]).sum()) if len(frame) else 0,
                              "max_product_defect":
                                  float(np.max(np.abs(finite - 1))) if len(finite) else 0.0}
    return report


def run_deform(config, out: Union[str, Path] = ".", jobs: int = 1, silence_tqdm: bool = False,
               log_to_file: Union[bool, str, Path] = False) -> RunReport:
    """
    Spectra of the deformed Hamiltonian for the configured contours, the contour-independence
    report for consecutive contour pairs and, optionally, a convergence study.
    """
    config = load_config(config)
    plan, kernel = config.deform, config.kernel
    if plan is None:
        raise ConfigError("deform", "missing")
    with experiment("deform", config, out, log_to_file) as (writer, report):
        contours = {name: config.contour(name) for name in plan.contours}
        spectra = dict(zip(contours, parallel_map(lambda c: deformed_spectrum(kernel, c),
                                                  contours.values(), jobs, desc="Spectra",
                                                  silence_tqdm=silence_tqdm)))
        document = {"contours": {}}
        for name, spectrum in spectra.items():
            writer.write_csv(f"spectrum_{name}.csv", spectrum.to_frame())
            document["contours"][name] = {"tau": spectrum.tau, "node_count": spectrum.node_count,
                                          "resonances": spectrum.resonances,
                                          "bound_states": spectrum.bound_states}
        names = list(contours)
        for first, second in zip(names[:-1], names[1:]):
            match = gamma_independence_check(kernel, contours[first], contours[second],
                                             plan.threshold)
            document.setdefault("independence", {})[f"{first}/{second}"] = match.to_dict()
            report.diagnostics[f"max_distance {first}/{second}"] = match.max_distance()
        if plan.brackets:
            document["bound_states"] = {"fredholm": bound_states(kernel, plan.brackets)}
            try:
                document["bound_states"]["oracle"] = oracle_bound_states(kernel, plan.brackets)
            except OracleUnavailableError as ex:
                log.info(f"No closed-form bound states: {ex}")
        if plan.convergence:
            reference = list(plan.reference) or list(spectra[names[0]].resonances)
            frame = convergence_study(kernel, config.contours[names[0]], plan.convergence,
                                      reference)
            writer.write_csv("convergence.csv", frame)
        writer.write_json("deform.json", document)
    return report


def run_validate(config, out: Union[str, Path] = ".",
                 log_to_file: Union[bool, str, Path] = False) -> RunReport:
    """
    Validate the config and the kernel conditions (Hermiticity, endpoint zeros, Schwarz
    reflection, analyticity) without running a computation.
    """
    config = load_config(config)
    with experiment("validate", config, out, log_to_file) as (writer, report):
        validation = validate_kernel(config.kernel, seed=config.seed)
        writer.write_json("validation.json",
                          {"kernel": validation.to_dict(), "family": config.kernel.family,
                           "contours": sorted(config.contours),
                           "blocks": [block for block in ("smatrix", "resonances", "sheetmap",
                                                          "deform")
                                      if getattr(config, block) is not None]})
        report.diagnostics = {"kernel_ok": validation.ok, "flags": validation.flags}
        if not validation.ok:
            report.status = "flagged"
    return report
