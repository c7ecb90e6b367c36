#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Dense complex linear algebra, quadrature and scalar root utilities shared by all solvers.

The functions in this module are pure; they may be called concurrently.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg
from scipy.optimize import brentq

from ffsheets.auxiliary import get_logger
from ffsheets.exceptions import DegenerateArcError, SingularMatrixError, ConvergenceError, \
    RepositionBoxError, StagnationError, EscapedError

log = get_logger(__name__)


@dataclass(frozen=True)
class Arc:
    """
    A smooth arc γ(t), t ∈ [0, 1], given by vectorized callables for γ and γ′.
    """
    point: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]

    @property
    def start(self) -> complex:
        return complex(self.point(np.array([0.0]))[0])

    @property
    def end(self) -> complex:
        return complex(self.point(np.array([1.0]))[0])

    @classmethod
    def segment(cls, z0: complex, z1: complex) -> "Arc":
        z0, z1 = complex(z0), complex(z1)
        return cls(point=lambda t: z0 + (z1 - z0) * np.asarray(t, dtype=float),
                   derivative=lambda t: np.full(np.shape(t), z1 - z0, dtype=complex))


@dataclass(frozen=True)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray
    segment_map: np.ndarray

    def __post_init__(self):
        if len(self.nodes) != len(self.weights) or len(self.nodes) != len(self.segment_map):
            raise ValueError("Nodes, weights and segment map must have equal length.")

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> complex:
        return complex(np.sum(self.weights * f(self.nodes)))

    @classmethod
    def concatenate(cls, rules: List["Quadrature"]) -> "Quadrature":
        return cls(nodes=np.concatenate([r.nodes for r in rules]),
                   weights=np.concatenate([r.weights for r in rules]),
                   segment_map=np.concatenate([np.full(len(r), k, dtype=int)
                                               for k, r in enumerate(rules)]))


def gauss_legendre(n: int, arc: Arc) -> Quadrature:
    """
    Gauss-Legendre rule with n nodes mapped onto an arc.

    :param n: Number of nodes (>= 1).
    :param arc: The arc, parametrized on [0, 1].

    :return: Nodes γ(t_k) and weights γ′(t_k)·w_k/2.
    """
    if n < 1:
        raise ValueError(f"Gauss-Legendre rule needs at least one node, got {n}.")
    x, w = leggauss(n)
    t = (x + 1) / 2
    nodes = np.asarray(arc.point(t), dtype=complex)
    weights = np.asarray(arc.derivative(t), dtype=complex) * w / 2
    bad = ~(np.isfinite(nodes) & np.isfinite(weights))
    if bad.any():
        raise DegenerateArcError(float(t[np.argmax(bad)]))
    return Quadrature(nodes=nodes, weights=weights, segment_map=np.zeros(n, dtype=int))


def lu_factor(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    LU factorization with partial pivoting.

    :raises SingularMatrixError: if a pivot is exactly zero.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {A.shape}.")
    lu, piv = linalg.lu_factor(A, check_finite=True)
    zero = np.flatnonzero(np.diag(lu) == 0)
    if len(zero):
        raise SingularMatrixError(int(zero[0]))
    return lu, piv


def lu_det(lu: np.ndarray, piv: np.ndarray) -> complex:
    sign = (-1) ** np.count_nonzero(piv != np.arange(len(piv)))
    return complex(sign * np.prod(np.diag(lu)))


def lu_solve(A: np.ndarray, B: np.ndarray) -> Tuple[np.ndarray, complex]:
    """
    Solve A·X = B.

    :return: X and det(A) from the same factorization.
    """
    B = np.asarray(B, dtype=complex)
    lu, piv = lu_factor(A)
    if B.shape[0] != lu.shape[0]:
        raise ValueError(f"Right-hand side has {B.shape[0]} rows, matrix has {lu.shape[0]}.")
    return linalg.lu_solve((lu, piv), B, check_finite=False), lu_det(lu, piv)


def eigenvalues(A: np.ndarray) -> np.ndarray:
    """
    Eigenvalues of a dense complex matrix (Hessenberg reduction and shifted QR, LAPACK).

    :return: Eigenvalues sorted by real, then imaginary part.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {A.shape}.")
    try:
        values = linalg.eigvals(A, check_finite=True)
    except linalg.LinAlgError as ex:
        raise ConvergenceError(f"QR iteration failed: {ex}") from ex
    return values[np.lexsort((values.imag, values.real))]


@dataclass(frozen=True)
class Box:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"Degenerate box {self}.")

    @property
    def center(self) -> complex:
        return complex((self.re_min + self.re_max) / 2, (self.im_min + self.im_max) / 2)

    @property
    def size(self) -> float:
        return max(self.re_max - self.re_min, self.im_max - self.im_min)

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.re_max - self.re_min, self.im_max - self.im_min))

    @property
    def corners(self) -> Tuple[complex, complex, complex, complex]:
        """Counter-clockwise, starting at the lower left corner."""
        return (complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max))

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.re_min - margin <= z.real <= self.re_max + margin
                and self.im_min - margin <= z.imag <= self.im_max + margin)

    def split(self, at: Optional[complex] = None) -> List["Box"]:
        """Quadrisect the box at the given point (default: the center)."""
        at = self.center if at is None else at
        if not self.contains(at) or at.real in (self.re_min, self.re_max) \
                or at.imag in (self.im_min, self.im_max):
            raise ValueError(f"Split point {at} not inside {self}.")
        return [Box(self.re_min, at.real, self.im_min, at.imag),
                Box(at.real, self.re_max, self.im_min, at.imag),
                Box(at.real, self.re_max, at.imag, self.im_max),
                Box(self.re_min, at.real, at.imag, self.im_max)]

    def grid(self, nre: int, nim: int) -> List["Box"]:
        re = np.linspace(self.re_min, self.re_max, nre + 1)
        im = np.linspace(self.im_min, self.im_max, nim + 1)
        return [Box(re[i], re[i + 1], im[j], im[j + 1]) for j in range(nim) for i in range(nre)]

    def shrink(self, amount: float) -> "Box":
        return Box(self.re_min + amount, self.re_max - amount,
                   self.im_min + amount, self.im_max - amount)

    def grow(self, amount: float, within: Optional["Box"] = None) -> "Box":
        """The box widened by amount on every side, clipped to within if given."""
        grown = Box(self.re_min - amount, self.re_max + amount,
                    self.im_min - amount, self.im_max + amount)
        if within is None:
            return grown
        return Box(max(grown.re_min, within.re_min), min(grown.re_max, within.re_max),
                   max(grown.im_min, within.im_min), min(grown.im_max, within.im_max))

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return self.re_min, self.re_max, self.im_min, self.im_max


def _edge_samples(z0: complex, z1: complex, samples: int) -> np.ndarray:
    # Shared edges of neighbouring boxes yield identical sample points (cache hits)
    if (z0.real, z0.imag) <= (z1.real, z1.imag):
        return z0 + (z1 - z0) * np.linspace(0, 1, samples + 1)
    return (z1 + (z0 - z1) * np.linspace(0, 1, samples + 1))[::-1]


def winding_number(f: Callable[[complex], complex], box: Box, samples_per_side: int = 16,
                   threshold: float = 1e-8, max_step: float = np.pi / 4,
                   max_depth: int = 12) -> int:
    """
    Number of zeros minus poles of f inside a rectangle, by phase accumulation along the
    counter-clockwise boundary. Steps with a phase change above max_step are bisected.

    :param f: Scalar complex function, analytic near the boundary.
    :param box: The rectangle.
    :param samples_per_side: Initial number of steps per edge.
    :param threshold: Minimum admissible |f| on the boundary.

    :raises RepositionBoxError: if |f| drops below threshold on the boundary.
    :raises ConvergenceError: if the boundary cannot be resolved within max_depth bisections.
    """
    minimum = [np.inf]

    def value(z):
        fz = complex(f(z))
        minimum[0] = min(minimum[0], abs(fz))
        if abs(fz) < threshold or not np.isfinite(fz):
            raise RepositionBoxError(box, abs(fz))
        return fz

    def phase(z0, z1, f0, f1, depth):
        step = np.angle(f1 / f0)
        if abs(step) <= max_step:
            return step
        if depth == 0:
            raise ConvergenceError(f"Unresolved phase jump between {z0} and {z1}.", max_depth)
        zm = (z0 + z1) / 2
        fm = value(zm)
        return phase(z0, zm, f0, fm, depth - 1) + phase(zm, z1, fm, f1, depth - 1)

    corners = box.corners
    total = 0.0
    for k in range(4):
        points = _edge_samples(corners[k], corners[(k + 1) % 4], samples_per_side)
        values = [value(z) for z in points]
        for j in range(samples_per_side):
            total += phase(points[j], points[j + 1], values[j], values[j + 1], max_depth)
    count = int(round(total / (2 * np.pi)))
    log.debug(f"Winding number {count} on {box.as_tuple()} (min |f| = {minimum[0]:.3g}).")
    return count


@dataclass
class NewtonResult:
    z: complex
    iterations: int
    residual: float
    history: List[float] = field(default_factory=list)


def central_difference(f: Callable[[complex], complex], z: complex) -> complex:
    h = max(1e-6, 1e-6 * abs(z))
    return (f(z + h) - f(z - h)) / (2 * h)


def newton_refine(f: Callable[[complex], complex], z0: complex, tol: float = 1e-10,
                  max_iter: int = 50, region: Optional[Box] = None, multiplicity: int = 1,
                  min_derivative: float = 1e-14) -> NewtonResult:
    """
    Newton iteration with a central-difference derivative.

    :param f: Analytic scalar function.
    :param z0: Starting point.
    :param tol: Target for |f(z*)|.
    :param max_iter: Iteration cap.
    :param region: Optional box the iterates must not leave.
    :param multiplicity: Known multiplicity m of the zero (modified Newton step m·f/f′).

    :return: :class:`NewtonResult` with the iteration log (|f| per iterate).
    """
    z = complex(z0)
    fz = complex(f(z))
    history = [abs(fz)]
    for iteration in range(max_iter + 1):
        if abs(fz) <= tol:
            log.debug(f"Newton converged to {z} after {iteration} iterations: {history}")
            return NewtonResult(z, iteration, abs(fz), history)
        if iteration == max_iter:
            break
        derivative = central_difference(f, z)
        if abs(derivative) < min_derivative:
            raise StagnationError(z, derivative)
        z = z - multiplicity * fz / derivative
        if region is not None and not region.contains(z):
            raise EscapedError(z)
        fz = complex(f(z))
        history.append(abs(fz))
    raise ConvergenceError(f"Newton iteration from {z0} did not reach |f| <= {tol:.1e} "
                           f"(last |f| = {history[-1]:.3g}).", max_iter)


def bracket_zeros(f: Callable[[float], float], lo: float, hi: float, samples: int = 200,
                  xtol: float = 1e-14) -> List[float]:
    """
    Real zeros of a real function on [lo, hi], located by sign changes on a uniform sample and
    refined by Brent's method.
    """
    x = np.linspace(lo, hi, samples + 1)
    y = np.array([f(xi) for xi in x])
    roots = []
    for k in range(samples):
        if y[k] == 0:
            roots.append(float(x[k]))
        elif y[k] * y[k + 1] < 0:
            roots.append(float(brentq(f, x[k], x[k + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)))
    if y[-1] == 0:
        roots.append(float(x[-1]))
    return roots
