#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Continuation of T and S onto the unphysical sheets Π_ℓ from physical-sheet quantities:

    T′(λ, μ, z) = T(λ, μ, z) + 2πiℓ·T(λ, z, z)·S_ℓ(z)⁻¹·T(z, μ, z)
    S_{−ℓ}(z) on Π_ℓ = S_ℓ(z)⁻¹

The direct route solves the Lippmann-Schwinger equation on a contour dipped past z instead.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ffsheets.auxiliary import get_logger, get_option
from ffsheets.exceptions import DomainError, AtResonanceError, ContourContaminatedError
from ffsheets.numerics import lu_solve
from ffsheets.Model.Kernel import KernelSpec
from ffsheets.Model.Contour import Contour, ContourSpec, build_contour, omega_gamma_contains
from ffsheets.PhysicalSheet import SheetPoint, GridSolution, check_sheet, physical_solution, \
    converged_solution, scattering_matrix

log = get_logger(__name__)

ROUTES = ("formula", "direct_contour")


@dataclass
class ContinuedValue:
    point: SheetPoint
    value: np.ndarray
    route: str
    condition: float
    check: Optional[float] = None

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"Unknown route '{self.route}'.")
        if self.route == "formula" and self.point.sheet == 0:
            raise ValueError("The continuation formula yields values on Π±1 only.")
        if not np.isfinite(self.condition):
            raise ValueError("Condition number must be finite.")


def _continuation_point(kernel: KernelSpec, z: complex, ell: int) -> complex:
    ell = check_sheet(ell)
    z = complex(z)
    kernel.region.check("z", z)
    if np.sign(z.imag) != ell:
        raise DomainError("z", z, f"Continuation to Π{ell:+d} needs z in the half-plane "
                                  f"Im z {'>' if ell > 0 else '<'} 0, got {z}.")
    return z


def invert_smatrix(s: np.ndarray, z: complex, ell: int) -> Tuple[np.ndarray, float]:
    """
    S_ℓ(z)⁻¹ with its condition number.

    S is dimensionless (unitary on the real axis), so a smallest singular value below the inverse
    condition limit is refused as well; this covers scalar S, whose condition number is always 1.

    :raises AtResonanceError: if the condition number or ‖S⁻¹‖ exceeds the configured limit.
    """
    limit = get_option("condition_limit")
    singular_values = np.linalg.svd(s, compute_uv=False)
    smallest = float(singular_values[-1])
    condition = float(singular_values[0] / smallest) if smallest > 0 else np.inf
    if not np.isfinite(condition) or condition > limit or smallest < 1 / limit:
        raise AtResonanceError(z, ell, condition if smallest >= 1 / limit else np.inf)
    inverse, _ = lu_solve(s, np.eye(len(s)))
    return inverse, condition


def continued_blocks(solution: GridSolution, ell: int, lams, mus) -> Tuple[np.ndarray, float]:
    """
    Continued kernel T′(λ_p, μ_q, z) from a physical-sheet solution at z, shape (P, Q, n, n).

    :return: The blocks and the condition number of S_ℓ(z).
    """
    z = solution.z
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    inverse, condition = invert_smatrix(scattering_matrix(solution, ell), z, ell)
    off_shell = solution.extend_many(lams, mus)
    left = solution.extend_many(lams, [z])[:, 0]
    right = solution.extend_many([z], mus)[0]
    correction = np.einsum("pab,bc,qcd->pqad", left, inverse, right)
    return off_shell + 2j * np.pi * ell * correction, condition


def direct_contour(kernel: KernelSpec, z: complex, ell: int, nodes: Optional[int] = None) -> Contour:
    """
    Elliptic dip into C^ℓ enclosing z, halfway between the shallowest enclosing dip and the edge
    of the holomorphy region.
    """
    a, b = kernel.interval
    x = (z.real - (a + b) / 2) / ((b - a) / 2)
    if abs(x) >= 1:
        raise DomainError("z", z, f"z = {z} does not lie under the cut ({a}, {b}).")
    needed = abs(z.imag) / np.sqrt(1 - x ** 2)
    standoff = get_option("standoff_fraction") * (b - a)
    if needed + standoff >= kernel.region.im_halfwidth:
        raise DomainError("z", z, f"No elliptic dip inside {kernel.region} encloses z = {z}.")
    depth = 0.5 * (needed + kernel.region.im_halfwidth)
    spec = ContourSpec.elliptic_dip(depth, sign=ell, nodes=nodes or get_option("nodes", int))
    return build_contour(spec, a, b, kernel.region)


def continue_T(kernel: KernelSpec, z: complex, ell: int, lam: complex, mu: complex,
               route: str = "formula", contour: Optional[Contour] = None,
               nodes: Optional[int] = None, adaptive: bool = True) -> ContinuedValue:
    """
    T′(λ, μ, z) on the sheet Π_ℓ.

    :param kernel: The potential kernel.
    :param z: Energy in Ω ∩ C^ℓ.
    :param ell: Sheet index ±1.
    :param lam: First argument in Ω.
    :param mu: Second argument in Ω.
    :param route: 'formula' assembles T′ from physical-sheet solves. 'direct_contour' solves on a
        contour dipped into C^ℓ; if the given contour does not enclose z, the result is the
        physical-sheet value and is labelled accordingly.
    :param contour: Contour for the direct route (default: a dip enclosing z).

    :return: :class:`ContinuedValue`
    """
    z = _continuation_point(kernel, z, ell)
    if route == "formula":
        solution = physical_solution(kernel, z, ell, nodes, adaptive)
        blocks, condition = continued_blocks(solution, ell, [lam], [mu])
        return ContinuedValue(SheetPoint(z, ell), blocks[0, 0], route, condition)
    if route == "direct_contour":
        if contour is None:
            contour = direct_contour(kernel, z, ell, nodes)
        inside = omega_gamma_contains(contour, z)
        solution = converged_solution(kernel, contour, z, unphysical=inside, adaptive=adaptive)
        return ContinuedValue(SheetPoint(z, ell if inside else 0), solution.extend(lam, mu),
                              route, solution.condition)
    raise ValueError(f"Unknown route '{route}'. Valid routes: {', '.join(ROUTES)}.")


def continue_S(kernel: KernelSpec, z: complex, ell: int, nodes: Optional[int] = None,
               adaptive: bool = True) -> ContinuedValue:
    """
    The scattering matrix S_{−ℓ} continued to Π_ℓ, i.e. S_ℓ(z)⁻¹ on the physical sheet.

    The residual ‖S_ℓ(z)·S_ℓ(z)⁻¹ − I‖ is stored in ContinuedValue.check.
    """
    z = _continuation_point(kernel, z, ell)
    s = scattering_matrix(physical_solution(kernel, z, ell, nodes, adaptive), ell)
    inverse, condition = invert_smatrix(s, z, ell)
    check = float(np.max(np.abs(s @ inverse - np.eye(len(s)))))
    return ContinuedValue(SheetPoint(z, ell), inverse, "formula", condition, check)


def half_on_shell(kernel: KernelSpec, z: complex, ell: int, mu: complex,
                  nodes: Optional[int] = None) -> ContinuedValue:
    """T′(z, μ, z) = S_ℓ(z)⁻¹·T(z, μ, z)."""
    z = _continuation_point(kernel, z, ell)
    solution = physical_solution(kernel, z, ell, nodes)
    inverse, condition = invert_smatrix(scattering_matrix(solution, ell), z, ell)
    return ContinuedValue(SheetPoint(z, ell), inverse @ solution.extend(z, mu), "formula",
                          condition)


def half_on_shell_check(kernel: KernelSpec, z: complex, ell: int, mu: complex,
                        nodes: Optional[int] = None) -> float:
    """
    ‖S_ℓ(z)·T′(z, μ, z) − T(z, μ, z)‖ with T′ from the continuation formula at λ = z.
    """
    z = _continuation_point(kernel, z, ell)
    solution = physical_solution(kernel, z, ell, nodes)
    continued, _ = continued_blocks(solution, ell, [z], [mu])
    s = scattering_matrix(solution, ell)
    return float(np.max(np.abs(s @ continued[0, 0] - solution.extend(z, mu))))


@dataclass
class ResidueEstimate:
    residue: np.ndarray
    rank: int
    singular_values: np.ndarray
    error: float
    radius: float

    @property
    def gap(self) -> float:
        """Ratio of the largest singular value to the first discarded one."""
        if self.rank >= len(self.singular_values):
            return np.inf
        return float(self.singular_values[0] / max(self.singular_values[self.rank], 1e-300))


def _residue(kernel, z0, ell, radius, lams, mus, points, nodes):
    theta = 2 * np.pi * np.arange(points) / points
    total = 0
    for angle in theta:
        zeta = z0 + radius * np.exp(1j * angle)
        solution = physical_solution(kernel, zeta, ell, nodes)
        blocks, _ = continued_blocks(solution, ell, lams, mus)
        total = total + blocks * np.exp(1j * angle)
    return radius / points * total


def residue_rank(kernel: KernelSpec, resonance_z: complex, ell: int, circle_radius: float,
                 lams=None, mus=None, points: Optional[int] = None, nodes: Optional[int] = None,
                 contamination_tolerance: float = 1e-6) -> ResidueEstimate:
    """
    Residue of the continued T′ at a resonance, sampled on a (λ, μ) grid, by the trapezoid rule on
    a circle around the resonance. The rule is repeated with twice the points (error estimate) and
    with half the radius (contamination check).

    :param kernel: The potential kernel.
    :param resonance_z: The resonance position on the physical sheet (Im z has sign ℓ).
    :param ell: Sheet index ±1.
    :param circle_radius: Radius of the circle; it must stay in C^ℓ and exclude other resonances.
    :param lams: First-argument sample points (default: 8 interior points of (a, b)).
    :param mus: Second-argument sample points (default: lams).
    :param points: Trapezoid points on the circle.

    :return: :class:`ResidueEstimate` with rank = number of singular values above 1e-6·max.
    """
    z0 = _continuation_point(kernel, resonance_z, ell)
    if abs(z0.imag) <= circle_radius:
        raise DomainError("circle_radius", circle_radius, f"Circle around {z0} crosses the real "
                                                          f"axis.")
    points = points or get_option("residue_points", int)
    if lams is None:
        lams = np.linspace(kernel.a, kernel.b, 10)[1:-1]
    mus = lams if mus is None else mus
    residue = _residue(kernel, z0, ell, circle_radius, lams, mus, points, nodes)
    fine = _residue(kernel, z0, ell, circle_radius, lams, mus, 2 * points, nodes)
    half = _residue(kernel, z0, ell, circle_radius / 2, lams, mus, points, nodes)
    scale = float(np.max(np.abs(residue)))
    deviation = float(np.max(np.abs(half - residue)))
    if deviation > contamination_tolerance * scale + 1e-12:
        raise ContourContaminatedError(circle_radius, deviation)
    error = float(np.max(np.abs(fine - residue)))
    p, q, n, _ = residue.shape
    matrix = residue.transpose(0, 2, 1, 3).reshape(p * n, q * n)
    singular_values = np.linalg.svd(matrix, compute_uv=False)
    rank = int(np.count_nonzero(singular_values > 1e-6 * singular_values[0])) \
        if singular_values[0] > 0 else 0
    log.info(f"Residue at {z0} (sheet {ell:+d}): rank {rank}, error estimate {error:.2e}.")
    return ResidueEstimate(residue, rank, singular_values, error, circle_radius)
