#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
The contour-deformed Hamiltonian

    (H_γ f)(λ) = λ·f(λ) + ∫_γ V(λ, μ)·f(μ) dμ

discretized on the quadrature nodes of γ. Its isolated nonreal eigenvalues inside Ω_γ are the
resonances uncovered by γ; its real eigenvalues outside [a, b] are the bound states.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ffsheets.auxiliary import get_logger, get_option
from ffsheets.exceptions import DomainError, BoundaryAmbiguousError, SingularMatrixError, \
    SpectralPointError, FFSheetsError
from ffsheets.numerics import eigenvalues, lu_solve
from ffsheets.Model.Kernel import KernelSpec
from ffsheets.Model.Contour import Contour, ContourSpec, build_contour, omega_gamma_contains
from ffsheets.PhysicalSheet import smatrix
from ffsheets.Resonances import Resonance, MatchReport, match_points

log = get_logger(__name__)

EIGENVALUE_CLASSES = ("near_contour", "isolated_in_region", "isolated_real", "isolated_offregion")

# Eigenvalues closer than this to the real axis count as real
_REAL_TOLERANCE = 1e-6


def build_H_gamma(kernel: KernelSpec, contour: Contour) -> np.ndarray:
    """
    Dense matrix of H_γ on the contour grid: diag(ν_i)⊗I_n + [V(ν_i, ν_j)·w_j].

    The contour weights are complex, so the matrix is not Hermitian for a deformed contour.
    """
    nodes, n = contour.nodes, kernel.n
    size = len(nodes) * n
    v = kernel.matrix(nodes, nodes).transpose(0, 2, 1, 3).reshape(size, size)
    return np.diag(np.repeat(nodes, n)) + v * np.repeat(contour.weights, n)[None, :]


@dataclass(frozen=True)
class DeformedSpectrum:
    contour: Contour
    eigenvalues: np.ndarray
    classification: Tuple[str, ...]
    distances: np.ndarray
    tau: float
    node_count: int

    def select(self, kind: str) -> np.ndarray:
        if kind not in EIGENVALUE_CLASSES:
            raise ValueError(f"Unknown eigenvalue class '{kind}'.")
        mask = np.array([c == kind for c in self.classification], dtype=bool)
        return self.eigenvalues[mask] if len(mask) else self.eigenvalues[:0]

    @property
    def resonances(self) -> np.ndarray:
        return self.select("isolated_in_region")

    @property
    def bound_states(self) -> np.ndarray:
        return self.select("isolated_real")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"re": self.eigenvalues.real, "im": self.eigenvalues.imag,
                             "classification": list(self.classification),
                             "distance": self.distances},
                            columns=["re", "im", "classification", "distance"])


def _inside(contour: Contour, z: complex) -> bool:
    try:
        return omega_gamma_contains(contour, z)
    except BoundaryAmbiguousError:
        return False


def classify(contour: Contour, values: np.ndarray) -> Tuple[Tuple[str, ...], np.ndarray, float]:
    """
    Classify eigenvalues of H_γ against the contour.

    :return: Class labels, distances to γ and the threshold τ = tau_factor·(arc length)/N.
    """
    tau = get_option("tau_factor") * contour.arc_length / len(contour)
    distances = np.atleast_1d(contour.distance(values)) if len(values) else np.zeros(0)
    labels = []
    for value, distance in zip(values, distances):
        if distance <= tau:
            labels.append("near_contour")
        elif _inside(contour, value):
            labels.append("isolated_in_region")
        elif abs(value.imag) <= _REAL_TOLERANCE:
            labels.append("isolated_real")
        else:
            log.warning(f"Eigenvalue {value} lies off γ, outside Ω_γ and off the real axis.")
            labels.append("isolated_offregion")
    return tuple(labels), distances, tau


def deformed_spectrum(kernel: KernelSpec, contour: Contour) -> DeformedSpectrum:
    """
    Eigenvalues of the discretized H_γ with their classification.

    :param kernel: The potential kernel.
    :param contour: The contour; without a dip every eigenvalue near [a, b] is near_contour.

    :return: :class:`DeformedSpectrum`
    """
    if not contour.is_deformed:
        log.debug(f"{contour} has no dip; no resonances can be uncovered.")
    values = eigenvalues(build_H_gamma(kernel, contour))
    labels, distances, tau = classify(contour, values)
    spectrum = DeformedSpectrum(contour, values, labels, distances, tau, len(contour))
    log.info(f"H_γ on {contour}: {len(spectrum.resonances)} resonance(s), "
             f"{len(spectrum.bound_states)} real eigenvalue(s) off γ (τ = {tau:.3g}).")
    return spectrum


def _resolvent_solve(kernel: KernelSpec, contour: Contour, z: complex, rhs: np.ndarray):
    z = complex(z)
    distance = float(contour.distance(z))
    if distance < contour.standoff:
        raise BoundaryAmbiguousError(z, distance, contour.standoff)
    system = build_H_gamma(kernel, contour) - z * np.eye(len(contour) * kernel.n)
    condition = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > get_option("condition_limit"):
        raise SpectralPointError(z, condition)
    try:
        solution, _ = lu_solve(system, rhs)
    except SingularMatrixError as ex:
        raise SpectralPointError(z, np.inf) from ex
    return solution


def transition_kernel(kernel: KernelSpec, contour: Contour, z: complex, lams, mus) -> np.ndarray:
    """
    T_γ(λ, μ, z) = V(λ, μ) − ∫_γ∫_γ V(λ, ν)·R_γ(ν, ν′, z)·V(ν′, μ) for the pair (H_{0,γ}, H_γ),
    with R_γ(z) = (H_γ − z)⁻¹ applied by a dense solve. Shape (P, Q, n, n).

    Outside Ω_γ this is the physical-sheet T; inside Ω_γ it is the continued T′.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    nodes, n = contour.nodes, kernel.n
    size = len(nodes) * n
    right = kernel.matrix(nodes, mus).transpose(0, 2, 1, 3).reshape(size, len(mus) * n)
    solved = _resolvent_solve(kernel, contour, z, right)
    left = kernel.matrix(lams, nodes).transpose(0, 2, 1, 3).reshape(len(lams) * n, size)
    correction = (left * np.repeat(contour.weights, n)[None, :]) @ solved
    correction = correction.reshape(len(lams), n, len(mus), n).transpose(0, 2, 1, 3)
    return kernel.matrix(lams, mus) - correction


def apply_deformed_resolvent(kernel: KernelSpec, contour: Contour, z: complex, f) -> np.ndarray:
    """
    R_γ(z)f = R_{0,γ}(z)f − R_{0,γ}(z)·T_γ(z)·R_{0,γ}(z)f on the contour grid (node-major vector).
    """
    n = kernel.n
    f = np.asarray(f, dtype=complex).ravel()
    if len(f) != len(contour) * n:
        raise DomainError("f", f.shape, f"Grid vector needs {len(contour) * n} entries, "
                                        f"got {len(f)}.")
    t = transition_kernel(kernel, contour, z, contour.nodes, contour.nodes)
    size = len(f)
    operator = t.transpose(0, 2, 1, 3).reshape(size, size)
    free = 1 / (np.repeat(contour.nodes, n) - complex(z))
    r0f = free * f
    return r0f - free * (operator @ (np.repeat(contour.weights, n) * r0f))


def deformation_resonances(spectrum: DeformedSpectrum, kernel: KernelSpec,
                           nodes: Optional[int] = None) -> List[Resonance]:
    """
    The isolated_in_region eigenvalues as resonances on the sheet uncovered by the contour, with
    |det S_ℓ| evaluated at each.
    """
    ell = spectrum.contour.halfplane
    found = []
    for z in sorted(spectrum.resonances, key=lambda v: (v.real, v.imag)):
        try:
            abs_det = float(abs(np.linalg.det(smatrix(kernel, z, ell, nodes))))
        except (FFSheetsError, np.linalg.LinAlgError) as ex:
            log.warning(f"|det S| not available at deformation resonance {z}: {ex}")
            abs_det = float("nan")
        found.append(Resonance(z, ell, "deformation", abs_det))
    return found


def gamma_independence_check(kernel: KernelSpec, contour1: Contour, contour2: Contour,
                             threshold: Optional[float] = None) -> MatchReport:
    """
    Compare the isolated eigenvalues of H_γ for two contours dipping into the same half-plane.

    Eigenvalues inside both regions and real eigenvalues are paired; eigenvalues in the symmetric
    difference of Ω_γ1 and Ω_γ2 are listed in MatchReport.separate.

    :param threshold: Pairing distance (default: 1e-3·(b − a)).
    """
    if not (contour1.is_deformed and contour1.halfplane == contour2.halfplane):
        raise DomainError("contours", (repr(contour1), repr(contour2)),
                          "Both contours must dip into the same half-plane.")
    threshold = threshold or 1e-3 * (kernel.b - kernel.a)
    spectra = {"gamma1": deformed_spectrum(kernel, contour1),
               "gamma2": deformed_spectrum(kernel, contour2)}
    others = {"gamma1": contour2, "gamma2": contour1}
    shared, separate = {}, []
    for label, spectrum in spectra.items():
        shared[label] = list(spectrum.bound_states)
        for z in spectrum.resonances:
            if _inside(others[label], z):
                shared[label].append(z)
            else:
                separate.append((label, complex(z)))
    report = match_points(shared, threshold)
    report.separate = separate
    log.info(f"Contour independence: {len(report.pairs)} pair(s), max distance "
             f"{report.max_distance():.3g}, {len(separate)} eigenvalue(s) between the contours.")
    return report


def convergence_study(kernel: KernelSpec, spec: ContourSpec, node_counts: Sequence[int],
                      reference: Sequence[complex]) -> pd.DataFrame:
    """
    Distance of the deformation resonances to reference positions for increasing node counts,
    with the empirical order between successive node counts.

    :return: DataFrame with columns nodes, reference_re, reference_im, re, im, error, order.
    """
    rows = []
    for count in node_counts:
        contour = build_contour(spec.with_nodes(count), kernel.a, kernel.b, kernel.region)
        found = deformed_spectrum(kernel, contour).resonances
        for z_ref in reference:
            z_ref = complex(z_ref)
            if len(found):
                z = complex(found[np.argmin(np.abs(found - z_ref))])
            else:
                z = complex(np.nan, np.nan)
            rows.append({"nodes": int(count), "reference_re": z_ref.real,
                         "reference_im": z_ref.imag, "re": z.real, "im": z.imag,
                         "error": abs(z - z_ref)})
    frame = pd.DataFrame(rows, columns=["nodes", "reference_re", "reference_im", "re", "im",
                                        "error"])
    grouped = frame.groupby(["reference_re", "reference_im"], sort=False)
    frame["order"] = -grouped["error"].transform(lambda e: np.log(e).diff()) / \
        grouped["nodes"].transform(lambda n: np.log(n).diff())
    return frame
