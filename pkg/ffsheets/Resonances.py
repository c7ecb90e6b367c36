#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Resonance search on the sheets Π_ℓ.

A resonance is a point z ∈ Ω ∩ C^ℓ where S_ℓ(z) has eigenvalue zero. The zeros of the analytic
function det S_ℓ are counted by the argument principle on a quadrisection tree of boxes and refined
by Newton's method. For finite-rank kernels with polynomial form factors a closed-form Fredholm
denominator provides an independent oracle.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial

from ffsheets.auxiliary import get_logger, get_option
from ffsheets.exceptions import DomainError, RepositionBoxError, IncompleteSearchError, \
    OracleUnavailableError, StagnationError, EscapedError, ConvergenceError
from ffsheets.numerics import Box, winding_number, newton_refine, bracket_zeros
from ffsheets.Model.Kernel import KernelSpec, FiniteRank
from ffsheets.PhysicalSheet import smatrix, check_sheet

log = get_logger(__name__)

DETECTORS = ("smatrix_zero", "oracle", "deformation")


@dataclass
class Resonance:
    z: complex
    sheet: int
    detector: str
    abs_det_S: float
    newton_iters: int = 0
    residue_rank: Optional[int] = None
    box_history: List[Tuple[float, float, float, float]] = field(default_factory=list)
    multiplicity: int = 1
    smallest_singular_value: Optional[float] = None

    def __post_init__(self):
        self.z = complex(self.z)
        if self.detector not in DETECTORS:
            raise ValueError(f"Unknown detector '{self.detector}'.")
        if np.sign(self.z.imag) != self.sheet:
            raise DomainError("z", self.z, f"Resonance {self.z} does not lie in the half-plane "
                                           f"of sheet {self.sheet:+d}.")

    def to_dict(self) -> dict:
        return {"re": self.z.real, "im": self.z.imag, "sheet": self.sheet,
                "detector": self.detector, "abs_det_S": self.abs_det_S,
                "residue_rank": self.residue_rank, "iters": self.newton_iters,
                "multiplicity": self.multiplicity,
                "smallest_singular_value": self.smallest_singular_value}


def endpoint_exclusion(kernel: KernelSpec) -> float:
    return get_option("endpoint_exclusion") * (kernel.b - kernel.a)


@dataclass(frozen=True)
class SearchRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    subdivision: Tuple[int, int] = (2, 2)

    @property
    def box(self) -> Box:
        return Box(self.re_min, self.re_max, self.im_min, self.im_max)

    @property
    def diameter(self) -> float:
        return self.box.diameter

    def validate(self, kernel: KernelSpec, ell: int) -> "SearchRegion":
        """
        The region has to lie strictly inside Ω ∩ C^ℓ and keep clear of the endpoint disks.

        :raises DomainError: naming the offending bound.
        """
        ell = check_sheet(ell)
        if not self.re_min < self.re_max:
            raise DomainError("re_max", self.re_max, "Search region needs re_min < re_max.")
        if not self.im_min < self.im_max:
            raise DomainError("im_max", self.im_max, "Search region needs im_min < im_max.")
        region = kernel.region
        if self.re_min <= region.re_min:
            raise DomainError("re_min", self.re_min, f"re_min must exceed {region.re_min}.")
        if self.re_max >= region.re_max:
            raise DomainError("re_max", self.re_max, f"re_max must be below {region.re_max}.")
        if ell < 0:
            for name in ("im_min", "im_max"):
                if getattr(self, name) >= 0:
                    raise DomainError(name, getattr(self, name), f"Sheet -1 needs {name} < 0.")
        else:
            for name in ("im_max", "im_min"):
                if getattr(self, name) <= 0:
                    raise DomainError(name, getattr(self, name), f"Sheet +1 needs {name} > 0.")
        if max(abs(self.im_min), abs(self.im_max)) >= region.im_halfwidth:
            name = "im_min" if ell < 0 else "im_max"
            raise DomainError(name, getattr(self, name),
                              f"Search region leaves |Im z| < {region.im_halfwidth}.")
        radius = endpoint_exclusion(kernel)
        for name, endpoint in zip(("re_min", "re_max"), kernel.interval):
            dx = max(self.re_min - endpoint, 0.0, endpoint - self.re_max)
            dy = max(self.im_min, 0.0, -self.im_max)
            if np.hypot(dx, dy) <= radius:
                raise DomainError(name, getattr(self, name),
                                  f"Search region intersects the excluded disk of radius "
                                  f"{radius:.3g} around the endpoint {endpoint}.")
        if min(self.subdivision) < 1:
            raise DomainError("subdivision", self.subdivision, "Subdivision counts must be >= 1.")
        return self


@dataclass
class ZeroSearch:
    zeros: List[Tuple[complex, int, int, str]]
    winding: int
    tree: nx.DiGraph
    unresolved: List[Box]

    def history(self, node: str) -> List[Tuple[float, float, float, float]]:
        path = nx.shortest_path(self.tree, "__root__", node)
        return [self.tree.nodes[key]["box"].as_tuple() for key in path]


def _subdivide(box: Box, nre: int, nim: int, count: Callable[[Box], int],
               executor: Optional[ThreadPoolExecutor], attempts: int = 5) -> List[Tuple[Box, int]]:
    # Split lines hitting a zero of f are shifted by 1e-4 of the box size
    for attempt in range(attempts):
        shift = attempt * 1e-4 * box.size
        re = np.linspace(box.re_min, box.re_max, nre + 1)
        im = np.linspace(box.im_min, box.im_max, nim + 1)
        re[1:-1] += shift
        im[1:-1] += 0.7 * shift
        children = [Box(re[i], re[i + 1], im[j], im[j + 1])
                    for j in range(nim) for i in range(nre)]
        try:
            counts = list(executor.map(count, children)) if executor else \
                [count(child) for child in children]
        except (RepositionBoxError, ConvergenceError) as ex:
            log.debug(f"Split lines of {box.as_tuple()} touch a zero ({ex}); shifting.")
            continue
        return list(zip(children, counts))
    raise RepositionBoxError(box, 0.0)


def locate_zeros(f: Callable[[complex], complex], region: Box, subdivision=(2, 2),
                 samples_per_side: Optional[int] = None, tol: Optional[float] = None,
                 min_size: Optional[float] = None, max_depth: int = 12, jobs: int = 1,
                 threshold: float = 1e-8) -> ZeroSearch:
    """
    All zeros of an analytic function inside a rectangle by the argument principle.

    Boxes are quadrisected level by level until each holds a single zero, which is refined by
    Newton's method. A box that still holds several zeros below min_size is split once more and
    then reported as a multiple zero (refined by modified Newton).

    :param f: Analytic scalar function without poles in the region.
    :param region: The search rectangle.
    :param subdivision: Initial grid (nre, nim).
    :param samples_per_side: Boundary samples per box edge.
    :param tol: Newton target for |f|.
    :param jobs: Worker threads for box evaluations.

    :return: :class:`ZeroSearch`; zeros as (z, iterations, multiplicity, tree node).
    :raises IncompleteSearchError: if the refined zeros do not account for the winding number.
    """
    samples_per_side = samples_per_side or get_option("samples_per_side", int)
    tol = tol or get_option("newton_tolerance")
    min_size = min_size or 1e-3 * region.diameter
    cache = {}

    def cached(z):
        z = complex(z)
        try:
            return cache[z]
        except KeyError:
            value = cache[z] = complex(f(z))
            return value

    def count(box):
        return winding_number(cached, box, samples_per_side, threshold)

    executor = ThreadPoolExecutor(max_workers=jobs) if jobs and jobs > 1 else None
    try:
        for attempt in range(5):
            root = region.shrink(attempt * 1e-4 * region.size) if attempt else region
            try:
                total = count(root)
                break
            except (RepositionBoxError, ConvergenceError):
                log.debug("Search region boundary touches a zero; shrinking.")
        else:
            raise RepositionBoxError(region, 0.0)
        tree = nx.DiGraph()
        tree.add_node("__root__", box=root, winding=total, depth=0)
        log.info(f"Winding number {total} on search region {root.as_tuple()}.")

        frontier = []
        for k, (child, winding) in enumerate(_subdivide(root, *subdivision, count, executor)):
            key = str(k)
            tree.add_node(key, box=child, winding=winding, depth=1)
            tree.add_edge("__root__", key)
            if winding:
                frontier.append((key, False))

        def handle(item):
            key, extra = item
            box, winding = tree.nodes[key]["box"], tree.nodes[key]["winding"]
            if winding < 0:
                log.warning(f"Negative winding number {winding} in {box.as_tuple()}: poles "
                            f"inside the search region.")
                return "unresolved", None
            if winding == 1 or (winding > 1 and box.size <= min_size and extra):
                # iterates stay inside the searched rectangle, f may be undefined beyond it
                guard = box.grow(box.size / 2, within=root)
                try:
                    result = newton_refine(cached, box.center, tol, region=guard,
                                           multiplicity=winding)
                except (StagnationError, EscapedError, ConvergenceError, DomainError) as ex:
                    log.debug(f"Newton failed in {box.as_tuple()}: {ex}")
                else:
                    if box.contains(result.z, margin=1e-9 * box.size):
                        return "zero", (result.z, result.iterations, winding, key)
                    log.debug(f"Newton left {box.as_tuple()} for {result.z}.")
                if winding > 1:
                    return "unresolved", None
            if tree.nodes[key]["depth"] >= max_depth:
                return "unresolved", None
            return "split", _subdivide(box, 2, 2, count, executor=None)

        zeros, unresolved = [], []
        while frontier:
            results = list(executor.map(handle, frontier)) if executor else \
                [handle(item) for item in frontier]
            next_frontier = []
            for (key, extra), (kind, payload) in zip(frontier, results):
                if kind == "zero":
                    zeros.append(payload)
                elif kind == "unresolved":
                    unresolved.append(tree.nodes[key]["box"])
                else:
                    box = tree.nodes[key]["box"]
                    extra = extra or (tree.nodes[key]["winding"] > 1 and box.size <= min_size)
                    for k, (child, winding) in enumerate(payload):
                        child_key = f"{key}.{k}"
                        tree.add_node(child_key, box=child, winding=winding,
                                      depth=tree.nodes[key]["depth"] + 1)
                        tree.add_edge(key, child_key)
                        if winding:
                            next_frontier.append((child_key, extra))
            frontier = next_frontier
    finally:
        if executor:
            executor.shutdown()

    zeros.sort(key=lambda item: (item[0].real, item[0].imag))
    unique = []
    for item in zeros:
        if not unique or abs(item[0] - unique[-1][0]) > 1e-8 * max(1.0, abs(item[0])):
            unique.append(item)
    search = ZeroSearch(unique, total, tree, unresolved)
    found = sum(item[2] for item in unique)
    log.info(f"Located {len(unique)} zero(s) of total multiplicity {found} with "
             f"{len(cache)} function evaluations.")
    if found != total or unresolved:
        raise IncompleteSearchError([b.as_tuple() for b in unresolved], search, total)
    return search


def _det_smatrix(kernel: KernelSpec, ell: int, nodes: Optional[int]):
    def f(z):
        return complex(np.linalg.det(smatrix(kernel, z, ell, nodes)))
    return f


@dataclass
class ZeroMode:
    smallest_singular_value: float
    vector: np.ndarray
    residual: float


def zero_mode(kernel: KernelSpec, z: complex, ell: int, nodes: Optional[int] = None) -> ZeroMode:
    """
    Smallest singular value of S_ℓ(z) and its right singular vector A (S_ℓ(z)·A ≈ 0 at a resonance).
    """
    s = smatrix(kernel, z, ell, nodes)
    _, singular_values, vh = np.linalg.svd(s)
    vector = vh[-1].conj()
    residual = float(np.linalg.norm(s @ vector) / np.linalg.norm(vector))
    return ZeroMode(float(singular_values[-1]), vector, residual)


def _to_resonances(search: ZeroSearch, f, ell: int, detector: str) -> List[Resonance]:
    return [Resonance(z, ell, detector, abs(f(z)), iterations, box_history=search.history(key),
                      multiplicity=multiplicity)
            for z, iterations, multiplicity, key in search.zeros]


def find_resonances(kernel: KernelSpec, ell: int, region: SearchRegion,
                    nodes: Optional[int] = None, samples_per_side: Optional[int] = None,
                    jobs: int = 1, residues: bool = False,
                    residue_radius: Optional[float] = None) -> List[Resonance]:
    """
    Zeros of det S_ℓ(z) in a search region of Ω ∩ C^ℓ.

    :param kernel: The potential kernel.
    :param ell: Sheet index ±1.
    :param region: The search region.
    :param nodes: Initial node count of the physical-sheet solves.
    :param jobs: Worker threads for box evaluations.
    :param residues: Estimate the residue rank at every resonance.
    :param residue_radius: Circle radius for the residues (default: a quarter of the distance to
        the real axis and to the nearest other resonance).

    :return: Resonances sorted by (Re z, Im z).
    :raises IncompleteSearchError: carrying the resonances found so far.
    """
    ell = check_sheet(ell)
    region.validate(kernel, ell)
    f = _det_smatrix(kernel, ell, nodes)
    try:
        search = locate_zeros(f, region.box, region.subdivision, samples_per_side, jobs=jobs)
    except IncompleteSearchError as ex:
        partial = _to_resonances(ex.found, f, ell, "smatrix_zero")
        raise IncompleteSearchError(ex.unresolved, partial, ex.expected) from ex
    resonances = _to_resonances(search, f, ell, "smatrix_zero")
    for resonance in resonances:
        resonance.smallest_singular_value = zero_mode(kernel, resonance.z, ell,
                                                      nodes).smallest_singular_value
    if residues:
        from ffsheets.UnphysicalSheet import residue_rank
        for resonance in resonances:
            radius = residue_radius or 0.25 * min(
                [abs(resonance.z.imag)] + [abs(resonance.z - other.z) for other in resonances
                                           if other is not resonance])
            resonance.residue_rank = residue_rank(kernel, resonance.z, ell, radius,
                                                  nodes=nodes).rank
    log.info(f"{len(resonances)} resonance(s) on sheet {ell:+d} in {region.box.as_tuple()}.")
    return resonances


def _polynomial_factors(kernel: KernelSpec) -> List[Polynomial]:
    if not isinstance(kernel, FiniteRank):
        raise OracleUnavailableError(f"{kernel.family} kernels are not of finite rank")
    return [v.polynomial(kernel.interval) for v in kernel.factors]


def separable_denominator(kernel: KernelSpec, z: complex, sheet: int = 0) -> complex:
    """
    Closed-form Fredholm denominator of a finite-rank kernel with polynomial form factors,

        D_ℓ(z) = det(δ_jk + g_j·C_j·(J_jk(z) − 2πiℓ·v_j(z)·v_k(z))),
        J_jk(z) = ∫_a^b v_j(ν)·v_k(ν) / (ν − z) dν = ∫ q + v_j(z)·v_k(z)·log((b − z)/(a − z)),

    on the physical sheet (sheet=0) or continued to Π_ℓ (sheet=ℓ, z ∈ C^ℓ). No quadrature is used.
    """
    factors = _polynomial_factors(kernel)
    z = complex(z)
    a, b = kernel.interval
    if z.imag == 0 and a <= z.real <= b:
        raise DomainError("z", z, f"z = {z} lies on the cut [{a}, {b}].")
    if sheet and np.sign(z.imag) != sheet:
        raise DomainError("z", z, f"z = {z} is not in the half-plane of sheet {sheet:+d}.")
    rank, n = len(factors), kernel.n
    if not rank:
        return 1 + 0j
    logarithm = np.log((b - z) / (a - z))
    values = np.array([v(z) for v in factors])
    integrals = np.empty((rank, rank), dtype=complex)
    for j in range(rank):
        for k in range(j, rank):
            product = factors[j] * factors[k]
            quotient, _ = divmod(product, Polynomial([-z, 1]))
            antiderivative = quotient.integ()
            integrals[j, k] = integrals[k, j] = antiderivative(b) - antiderivative(a) \
                + values[j] * values[k] * logarithm
    if sheet:
        integrals = integrals - 2j * np.pi * sheet * np.outer(values, values)
    couplings = np.zeros((rank * n, rank * n), dtype=complex)
    for k in range(rank):
        couplings[k * n:(k + 1) * n, k * n:(k + 1) * n] = kernel.couplings[k] * kernel.channels[k]
    return complex(np.linalg.det(np.eye(rank * n) + couplings @ np.kron(integrals, np.eye(n))))


def separable_det_smatrix(kernel: KernelSpec, z: complex, ell: int) -> complex:
    """det S_ℓ(z) = D_ℓ(z) / D(z) in closed form."""
    return separable_denominator(kernel, z, ell) / separable_denominator(kernel, z, 0)


def separable_oracle(kernel: KernelSpec, ell: int, region: SearchRegion,
                     samples_per_side: Optional[int] = None) -> List[Resonance]:
    """
    Resonances of a finite-rank kernel as zeros of the closed-form continued denominator D_ℓ.

    :raises OracleUnavailableError: for kernels without polynomial finite-rank structure.
    """
    ell = check_sheet(ell)
    _polynomial_factors(kernel)
    region.validate(kernel, ell)
    search = locate_zeros(lambda z: separable_denominator(kernel, z, ell), region.box,
                          region.subdivision, samples_per_side)
    return _to_resonances(search, lambda z: separable_det_smatrix(kernel, z, ell), ell, "oracle")


def oracle_bound_states(kernel: KernelSpec, search: Sequence[Tuple[float, float]],
                        samples: int = 400) -> List[float]:
    """Real zeros of the closed-form physical-sheet denominator outside [a, b]."""
    _polynomial_factors(kernel)
    energies = []
    for lo, hi in search:
        energies.extend(bracket_zeros(lambda x: separable_denominator(kernel, x).real,
                                      float(lo), float(hi), samples))
    return sorted(energies)


@dataclass
class MatchedPair:
    detectors: Tuple[str, str]
    z_a: complex
    z_b: complex

    @property
    def distance(self) -> float:
        return abs(self.z_a - self.z_b)


@dataclass
class MatchReport:
    pairs: List[MatchedPair]
    unmatched: List[Tuple[str, str, complex]]
    threshold: float
    separate: List[Tuple[str, complex]] = field(default_factory=list)

    def max_distance(self, a: Optional[str] = None, b: Optional[str] = None) -> float:
        distances = [pair.distance for pair in self.pairs
                     if a is None or set(pair.detectors) == {a, b}]
        return max(distances, default=0.0)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{"detector_a": p.detectors[0], "re_a": p.z_a.real, "im_a": p.z_a.imag,
                              "detector_b": p.detectors[1], "re_b": p.z_b.real, "im_b": p.z_b.imag,
                              "distance": p.distance} for p in self.pairs],
                            columns=["detector_a", "re_a", "im_a", "detector_b", "re_b", "im_b",
                                     "distance"])

    def to_dict(self) -> dict:
        return {"threshold": self.threshold,
                "pairs": [{"detectors": list(p.detectors), "a": [p.z_a.real, p.z_a.imag],
                           "b": [p.z_b.real, p.z_b.imag], "distance": p.distance}
                          for p in self.pairs],
                "unmatched": [{"detector": d, "against": other, "z": [z.real, z.imag]}
                              for d, other, z in self.unmatched],
                "separate": [{"label": label, "z": [z.real, z.imag]}
                             for label, z in self.separate]}


def match_points(found: Dict[str, Sequence[complex]], threshold: float) -> MatchReport:
    """
    Greedy nearest-neighbour pairing of point lists from different detectors. Pairs farther apart
    than threshold are not formed; the left-over points are flagged as unmatched.
    """
    pairs, unmatched = [], []
    for first, second in combinations(found, 2):
        left = [complex(z) for z in found[first]]
        right = [complex(z) for z in found[second]]
        distances = np.abs(np.subtract.outer(np.array(left, dtype=complex),
                                             np.array(right, dtype=complex))) \
            if left and right else np.zeros((len(left), len(right)))
        free_left, free_right = set(range(len(left))), set(range(len(right)))
        for flat in np.argsort(distances, axis=None, kind="stable"):
            i, j = np.unravel_index(flat, distances.shape)
            if distances[i, j] > threshold:
                break
            if i in free_left and j in free_right:
                pairs.append(MatchedPair((first, second), left[i], right[j]))
                free_left.discard(i)
                free_right.discard(j)
        unmatched += [(first, second, left[i]) for i in sorted(free_left)]
        unmatched += [(second, first, right[j]) for j in sorted(free_right)]
    for detector, other, z in unmatched:
        log.warning(f"{detector} point {z} has no partner among the {other} points.")
    return MatchReport(pairs, unmatched, threshold)


def resonance_report(found: Dict[str, Sequence[Resonance]], region_diameter: Optional[float] = None,
                     threshold: Optional[float] = None) -> MatchReport:
    """
    Pair the resonances of several detectors.

    :param found: Resonance lists keyed by detector name.
    :param region_diameter: Diameter of the search region; sets the default pairing threshold.
    :param threshold: Explicit pairing threshold (default: 1e-3·region_diameter).
    """
    points = {name: [r.z for r in resonances] for name, resonances in found.items()}
    if threshold is None:
        if region_diameter is None:
            everything = np.array([z for zs in points.values() for z in zs], dtype=complex)
            region_diameter = float(np.hypot(np.ptp(everything.real), np.ptp(everything.imag))) \
                if len(everything) > 1 else 1.0
        threshold = 1e-3 * max(region_diameter, np.finfo(float).eps)
    return match_points(points, threshold)
