#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Nyström solution of the Lippmann-Schwinger equation

    T(λ, μ, z) = V(λ, μ) − ∫_γ V(λ, ν) T(ν, μ, z) / (ν − z) dν

on the real interval or a deformed contour γ, its extension to arbitrary arguments in Ω and the
scattering matrices S_ℓ(z) = I − 2πiℓ·T(z, z, z).
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from ffsheets.auxiliary import get_logger, get_option
from ffsheets.exceptions import DomainError, SingularMatrixError, SpectralPointError, \
    BoundaryAmbiguousError
from ffsheets.numerics import lu_solve, lu_factor, lu_det, bracket_zeros
from ffsheets.Model.Kernel import KernelSpec
from ffsheets.Model.Contour import Contour, ContourSpec, build_contour, omega_gamma_contains

log = get_logger(__name__)

SHEET_LABELS = {0: "physical", 1: "Pi+1", -1: "Pi-1"}


def check_sheet(ell: int) -> int:
    if ell not in (-1, 1):
        raise DomainError("sheet", ell, f"Sheet index must be +1 or -1, got {ell}.")
    return int(ell)


@dataclass(frozen=True)
class SheetPoint:
    """A complex energy tagged with its Riemann sheet (0: physical, ±1: Π±1)."""
    z: complex
    sheet: int = 0

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        if self.sheet not in SHEET_LABELS:
            raise DomainError("sheet", self.sheet, f"Unknown sheet {self.sheet}.")
        if self.sheet and np.sign(self.z.imag) != self.sheet:
            raise DomainError("z", self.z, f"Points of {SHEET_LABELS[self.sheet]} must lie in "
                                           f"the half-plane Im z {'>' if self.sheet > 0 else '<'} 0.")

    @property
    def label(self) -> str:
        return SHEET_LABELS[self.sheet]


def boundary_dip(kernel: KernelSpec, ell: int, nodes: Optional[int] = None) -> ContourSpec:
    """
    Elliptic dip into C^{−ℓ} used for physical-sheet values seen from C^ℓ, including the boundary
    values at E + iℓ0. Depth min(h/2, (b − a)/4).
    """
    nodes = nodes or get_option("nodes", int)
    depth = min(0.5 * kernel.region.im_halfwidth, 0.25 * (kernel.b - kernel.a))
    return ContourSpec.elliptic_dip(depth, sign=-check_sheet(ell), nodes=nodes)


def _assemble(kernel: KernelSpec, contour: Contour, z: complex):
    nodes, weights, n = contour.nodes, contour.weights, kernel.n
    size = len(nodes) * n
    v = kernel.matrix(nodes, nodes).transpose(0, 2, 1, 3).reshape(size, size)
    g = weights / (nodes - z)
    system = np.eye(size, dtype=complex) + v * np.repeat(g, n)[None, :]
    return system, v, g


def _on_real_cut(kernel: KernelSpec, z: complex) -> bool:
    return z.imag == 0 and kernel.a < z.real < kernel.b


@dataclass
class GridSolution:
    """
    Nyström solution T(ν_i, ν_j, z) on the nodes of a contour.

    blocks has shape (N, N, n, n). With unphysical=True the contour passes below (above) z and the
    blocks belong to the kernel continued through the cut.
    """
    kernel: KernelSpec
    contour: Contour
    z: complex
    blocks: np.ndarray
    residual: float
    determinant: complex
    condition: float
    unphysical: bool = False

    @property
    def nodes(self) -> np.ndarray:
        return self.contour.nodes

    @property
    def g(self) -> np.ndarray:
        return self.contour.weights / (self.contour.nodes - self.z)

    def operator(self) -> np.ndarray:
        """The blocks as one (N·n) × (N·n) matrix."""
        size = len(self.nodes) * self.kernel.n
        return self.blocks.transpose(0, 2, 1, 3).reshape(size, size)

    def first_argument(self, lams) -> np.ndarray:
        """T(λ_p, ν_j, z) from the first Lippmann-Schwinger equation, shape (P, N, n, n)."""
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        v = self.kernel.matrix(lams, self.nodes)
        return v - np.einsum("pjab,j,jkbc->pkac", v, self.g, self.blocks)

    def extend_many(self, lams, mus) -> np.ndarray:
        """T(λ_p, μ_q, z) for all pairs, shape (P, Q, n, n)."""
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        mus = np.atleast_1d(np.asarray(mus, dtype=complex))
        left = self.first_argument(lams)
        v = self.kernel.matrix(self.nodes, mus)
        return self.kernel.matrix(lams, mus) - np.einsum("pjab,j,jqbc->pqac", left, self.g, v)

    def extend(self, lam: complex, mu: complex) -> np.ndarray:
        return self.extend_many([lam], [mu])[0, 0]

    def on_shell(self) -> np.ndarray:
        return self.extend(self.z, self.z)


def solve_T_grid(kernel: KernelSpec, contour: Contour, z: complex,
                 unphysical: bool = False) -> GridSolution:
    """
    Solve (I + K(z))·T = V with K_ij = V(ν_i, ν_j)·w_j / (ν_j − z).

    :param kernel: The potential kernel.
    :param contour: Integration contour; the physical-sheet kernel requires z outside Ω_γ.
    :param z: Energy. Real z inside (a, b) on a deformed contour gives the boundary value from
        the half-plane opposite to the dip.
    :param unphysical: Solve past the pole, i.e. for z inside Ω_γ (continued kernel T′).

    :return: :class:`GridSolution`
    """
    z = complex(z)
    if contour.is_deformed and _on_real_cut(kernel, z):
        distance = contour.distance(z)
        if distance < contour.standoff:
            raise BoundaryAmbiguousError(z, distance, contour.standoff)
        inside = False
    else:
        inside = omega_gamma_contains(contour, z)
    if inside and not unphysical:
        raise DomainError("z", z, f"z = {z} lies inside Ω_γ of {contour}; the physical-sheet "
                                  f"kernel needs a contour not enclosing z.")
    if unphysical and not inside:
        raise DomainError("z", z, f"z = {z} is not enclosed by {contour}; cannot solve past the "
                                  f"pole.")

    system, v, _ = _assemble(kernel, contour, z)
    condition = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > get_option("condition_limit"):
        raise SpectralPointError(z, condition)
    try:
        x, det = lu_solve(system, v)
    except SingularMatrixError as ex:
        raise SpectralPointError(z, np.inf) from ex
    residual = float(np.max(np.abs(system @ x - v))) if x.size else 0.0
    size, n = len(contour), kernel.n
    blocks = x.reshape(size, n, size, n).transpose(0, 2, 1, 3)
    log.debug(f"Solved Lippmann-Schwinger system at z={z} on {contour}: "
              f"residual {residual:.2e}, condition {condition:.2e}.")
    return GridSolution(kernel, contour, z, blocks, residual, det, condition, unphysical)


def extend_T(solution: GridSolution, lam: complex, mu: complex) -> np.ndarray:
    """
    T(λ, μ, z) for arguments off the grid, by the Nyström extension in the first and then in the
    second argument. Reproduces the grid blocks at grid points.

    :raises DomainError: if λ or μ lies outside the holomorphy region.
    """
    return solution.extend(lam, mu)


def physical_solution(kernel: KernelSpec, z: complex, ell: int, nodes: Optional[int] = None,
                      adaptive: bool = True) -> GridSolution:
    """
    Physical-sheet solution for z ∈ C^ℓ ∩ Ω (or the boundary value at E + iℓ0) on a contour dipped
    into C^{−ℓ}. With adaptive=True the node count is doubled until the on-shell value changes by
    less than the refinement tolerance.
    """
    ell = check_sheet(ell)
    z = complex(z)
    if z.imag != 0 and np.sign(z.imag) != ell:
        raise DomainError("z", z, f"z = {z} is not in the half-plane of sheet {ell:+d}.")
    nodes = nodes or get_option("nodes", int)
    contour = build_contour(boundary_dip(kernel, ell, nodes), kernel.a, kernel.b, kernel.region)
    return converged_solution(kernel, contour, z, adaptive=adaptive)


def converged_solution(kernel: KernelSpec, contour: Contour, z: complex,
                       unphysical: bool = False, adaptive: bool = True) -> GridSolution:
    """
    :func:`solve_T_grid`, repeated with doubled node counts until the on-shell value T(z, z, z)
    changes by less than the refinement tolerance (at most max_nodes per segment).
    """
    solution = solve_T_grid(kernel, contour, z, unphysical)
    if not adaptive:
        return solution
    tolerance, max_nodes = get_option("refine_tolerance"), get_option("max_nodes", int)
    previous = solution.on_shell()
    nodes = contour.spec.nodes_per_segment
    while 2 * nodes <= max_nodes:
        nodes *= 2
        refined = solve_T_grid(kernel, contour.with_nodes(nodes), z, unphysical)
        value = refined.on_shell()
        change = float(np.max(np.abs(value - previous)))
        solution, previous = refined, value
        if change < tolerance:
            log.debug(f"On-shell T at z={z} converged with {nodes} nodes per segment.")
            return solution
    log.warning(f"On-shell T at z={z} not converged to {tolerance:.0e} with "
                f"{nodes} nodes per segment.")
    return solution


def smatrix(kernel: KernelSpec, z: complex, ell: int, nodes: Optional[int] = None,
            adaptive: bool = True) -> np.ndarray:
    """
    Scattering matrix S_ℓ(z) = I − 2πiℓ·T(z, z, z) on the physical sheet.

    :param kernel: The potential kernel.
    :param z: Energy in C^ℓ ∩ Ω, or a real energy E in (a, b) for the boundary value S_ℓ(E + iℓ0).
    :param ell: Sheet index ±1.
    :param nodes: Initial node count.
    :param adaptive: Double the node count until the on-shell value is converged.
    """
    solution = physical_solution(kernel, z, ell, nodes, adaptive)
    return scattering_matrix(solution, ell)


def scattering_matrix(solution: GridSolution, ell: int) -> np.ndarray:
    return np.eye(solution.kernel.n) - 2j * np.pi * ell * solution.on_shell()


def phase_shift(s: np.ndarray) -> float:
    """δ = arg det S / 2 (the phase shift for scalar kernels)."""
    return float(np.angle(np.linalg.det(np.atleast_2d(s))) / 2)


def unitarity_residual(s: np.ndarray) -> float:
    s = np.atleast_2d(s)
    return float(np.linalg.norm(s @ s.conj().T - np.eye(len(s)), ord=2))


def _grid_vector(kernel: KernelSpec, contour: Contour, f) -> np.ndarray:
    f = np.asarray(f, dtype=complex).ravel()
    if len(f) != len(contour) * kernel.n:
        raise DomainError("f", f.shape, f"Grid vector needs {len(contour) * kernel.n} entries, "
                                        f"got {len(f)}.")
    return f


def apply_hamiltonian(kernel: KernelSpec, contour: Contour, u) -> np.ndarray:
    """(H u)(ν_i) = ν_i·u_i + Σ_j V(ν_i, ν_j)·w_j·u_j by quadrature on the contour."""
    u = _grid_vector(kernel, contour, u)
    n = kernel.n
    size = len(u)
    v = kernel.matrix(contour.nodes, contour.nodes).transpose(0, 2, 1, 3).reshape(size, size)
    return np.repeat(contour.nodes, n) * u + v @ (np.repeat(contour.weights, n) * u)


def apply_resolvent(kernel: KernelSpec, z: complex, f, contour: Optional[Contour] = None,
                    nodes: Optional[int] = None) -> np.ndarray:
    """
    R(z)f = R₀(z)f − R₀(z)·T(z)·R₀(z)f on the grid of the solve contour.

    :param kernel: The potential kernel.
    :param z: Energy off the real interval and off the point spectrum.
    :param f: Grid vector (node-major, N·n entries).
    :param contour: Solve contour (default: the real segment).
    """
    z = complex(z)
    if contour is None:
        contour = build_contour(ContourSpec.real_segment(nodes or get_option("nodes", int)),
                                kernel.a, kernel.b, kernel.region)
    f = _grid_vector(kernel, contour, f)
    solution = solve_T_grid(kernel, contour, z)
    n = kernel.n
    free = 1 / (np.repeat(contour.nodes, n) - z)
    weights = np.repeat(contour.weights, n)
    r0f = free * f
    return r0f - free * (solution.operator() @ (weights * r0f))


def fredholm_det(kernel: KernelSpec, contour: Contour, z: complex) -> complex:
    """
    det(I + K(z)) of the discretized Lippmann-Schwinger operator.

    z does not have to lie in the holomorphy region; only kernel values on the contour are needed.
    """
    z = complex(z)
    contour.check_standoff(z)
    system, _, _ = _assemble(kernel, contour, z)
    try:
        return lu_det(*lu_factor(system))
    except SingularMatrixError:
        return 0j


def bound_states(kernel: KernelSpec, search: Iterable[Tuple[float, float]],
                 nodes: Optional[int] = None, samples: int = 200) -> List[float]:
    """
    Real zeros of the Fredholm determinant outside [a, b].

    :param kernel: The potential kernel.
    :param search: Brackets (lo, hi), each left of a or right of b.
    :param nodes: Node count on the real segment.
    :param samples: Sign-change samples per bracket.

    :return: Sorted bound-state energies.
    """
    contour = build_contour(ContourSpec.real_segment(nodes or get_option("nodes", int)),
                            kernel.a, kernel.b, kernel.region)
    a, b = kernel.interval
    gap = 2 * contour.standoff
    energies = []
    for lo, hi in search:
        lo, hi = float(lo), float(hi)
        if lo >= hi or (hi > a and lo < b):
            raise DomainError("search", (lo, hi), f"Bracket ({lo}, {hi}) overlaps the interval "
                                                  f"[{a}, {b}].")
        hi = min(hi, a - gap) if hi <= a else hi
        lo = max(lo, b + gap) if lo >= b else lo
        if lo >= hi:
            continue
        found = bracket_zeros(lambda x: fredholm_det(kernel, contour, x).real, lo, hi, samples)
        log.info(f"{len(found)} bound state(s) in ({lo}, {hi}).")
        energies.extend(found)
    return sorted(energies)
