#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Integration contours γ from a to b inside the holomorphy region, their quadrature rules and the
region Ω_γ enclosed by [a, b] and γ.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple, List

import numpy as np
from scipy.optimize import minimize_scalar

from ffsheets.auxiliary import get_logger, get_option
from ffsheets.exceptions import DomainError, BoundaryAmbiguousError
from ffsheets.numerics import Arc, Quadrature, gauss_legendre
from ffsheets.Model.Kernel import HolomorphyRegion

log = get_logger(__name__)

CONTOUR_KINDS = ("real_segment", "elliptic_dip", "polyline")

# Polygon resolution used for curved arcs in distance and membership queries
_ARC_SAMPLES = 2048


@dataclass(frozen=True)
class ContourSpec:
    kind: str = "real_segment"
    nodes_per_segment: int = 64
    depth: Optional[float] = None
    sign: Optional[int] = None
    anchors: Tuple[complex, ...] = ()

    def __post_init__(self):
        if self.kind not in CONTOUR_KINDS:
            raise DomainError("kind", self.kind, f"Unknown contour kind '{self.kind}'. "
                                                 f"Valid kinds: {', '.join(CONTOUR_KINDS)}.")
        if self.nodes_per_segment < 1:
            raise DomainError("nodes", self.nodes_per_segment, "A contour needs at least one node.")
        object.__setattr__(self, "anchors", tuple(complex(p) for p in self.anchors))

    def with_nodes(self, nodes: int) -> "ContourSpec":
        return replace(self, nodes_per_segment=int(nodes))

    @classmethod
    def real_segment(cls, nodes=64):
        return cls("real_segment", nodes)

    @classmethod
    def elliptic_dip(cls, depth, sign=-1, nodes=64):
        return cls("elliptic_dip", nodes, depth=depth, sign=sign)

    @classmethod
    def polyline(cls, anchors, nodes=64):
        return cls("polyline", nodes, anchors=tuple(anchors))


def _cross(u: complex, v: complex) -> float:
    return (np.conj(u) * v).imag


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _cross(p2 - p1, q1 - p1)
    d2 = _cross(p2 - p1, q2 - p1)
    d3 = _cross(q2 - q1, p1 - q1)
    d4 = _cross(q2 - q1, p2 - q1)
    return d1 * d2 < 0 and d3 * d4 < 0


def _segment_distance(z: np.ndarray, z0: complex, z1: complex) -> np.ndarray:
    d = z1 - z0
    t = np.clip(((z - z0) * np.conj(d)).real / abs(d) ** 2, 0, 1)
    return np.abs(z - (z0 + t * d))


class Contour:
    """
    A piecewise smooth Jordan path from a to b with a Gauss-Legendre rule on every smooth piece.
    """
    def __init__(self, spec: ContourSpec, interval: Tuple[float, float], arcs: List[Arc],
                 linear: bool, halfplane: int, region: HolomorphyRegion):
        self.spec = spec
        self.interval = interval
        self.arcs = arcs
        self.linear = linear
        self.halfplane = halfplane
        self.region = region
        self.quadrature = Quadrature.concatenate([gauss_legendre(spec.nodes_per_segment, arc)
                                                  for arc in arcs])
        self.standoff = get_option("standoff_fraction") * (interval[1] - interval[0])
        t = np.linspace(0, 1, _ARC_SAMPLES + 1)
        self._polygon = np.concatenate(
            [arc.point(t[:-1]) for arc in arcs] + [np.array([complex(interval[1])])])

    @property
    def nodes(self) -> np.ndarray:
        return self.quadrature.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.quadrature.weights

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def is_deformed(self) -> bool:
        return self.halfplane != 0

    @property
    def arc_length(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def __len__(self):
        return len(self.quadrature)

    def __repr__(self):
        return f"Contour({self.spec.kind}, nodes={len(self)}, halfplane={self.halfplane:+d})"

    def with_nodes(self, nodes: int) -> "Contour":
        return build_contour(self.spec.with_nodes(nodes), *self.interval, self.region)

    def point(self, segment: int, t) -> np.ndarray:
        return self.arcs[segment].point(np.asarray(t, dtype=float))

    def distance(self, z):
        """Distance of z (scalar or array) to the curve γ."""
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        if self.linear:
            vertices = [arc.start for arc in self.arcs] + [self.arcs[-1].end]
            result = np.min([_segment_distance(flat, vertices[k], vertices[k + 1])
                             for k in range(len(self.arcs))], axis=0)
        else:
            result = np.array([self._curve_distance(zz) for zz in flat])
        return result.reshape(z.shape) if z.shape else float(result[0])

    def _curve_distance(self, z: complex) -> float:
        best = np.inf
        step = 1 / _ARC_SAMPLES
        t = np.linspace(0, 1, _ARC_SAMPLES + 1)
        for arc in self.arcs:
            samples = np.abs(arc.point(t) - z)
            k = int(np.argmin(samples))
            lo, hi = max(0.0, t[k] - step), min(1.0, t[k] + step)
            res = minimize_scalar(lambda s: abs(complex(arc.point(np.array([s]))[0]) - z),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            best = min(best, samples[k], float(res.fun))
        return best

    def boundary_distance(self, z):
        """Distance of z to ∂Ω_γ = [a, b] ∪ γ."""
        z = np.asarray(z, dtype=complex)
        a, b = self.interval
        return np.minimum(self.distance(z), _segment_distance(z, complex(a), complex(b)))

    def check_standoff(self, z: complex) -> None:
        distance = float(self.boundary_distance(z)) if self.is_deformed \
            else float(self.distance(z))
        if distance < self.standoff:
            raise BoundaryAmbiguousError(complex(z), distance, self.standoff)

    def loop(self) -> np.ndarray:
        """Vertices of the closed loop [a, b] followed by γ reversed (ends at a)."""
        return np.concatenate([np.array([complex(self.interval[0])]), self._polygon[::-1]])

    def contains(self, z: complex) -> bool:
        return omega_gamma_contains(self, z)


def build_contour(spec: ContourSpec, a: float, b: float, region: HolomorphyRegion) -> Contour:
    """
    Build a contour from a to b.

    :param spec: The contour specification.
    :param a: Left end of the interval.
    :param b: Right end of the interval.
    :param region: Holomorphy region the contour has to stay in.

    :return: :class:`Contour` with quadrature nodes strictly inside Ω.
    """
    a, b = float(a), float(b)
    if spec.kind == "real_segment":
        return Contour(spec, (a, b), [Arc.segment(a, b)], True, 0, region)

    if spec.kind == "elliptic_dip":
        depth, sign = spec.depth, spec.sign
        if sign not in (-1, 1):
            raise DomainError("sign", sign, f"Dip sign must be +1 or -1, got {sign}.")
        if depth is None or not 0 < depth < region.im_halfwidth:
            raise DomainError("depth", depth, f"Dip depth {depth} leaves the holomorphy region "
                                              f"(|Im| < {region.im_halfwidth}).")
        center, radius = (a + b) / 2, (b - a) / 2
        arc = Arc(point=lambda t: center - radius * np.cos(np.pi * t)
                  + 1j * sign * depth * np.sin(np.pi * t),
                  derivative=lambda t: np.pi * radius * np.sin(np.pi * t)
                  + 1j * sign * depth * np.pi * np.cos(np.pi * t))
        return Contour(spec, (a, b), [arc], False, sign, region)

    anchors = spec.anchors
    if len(anchors) < 3:
        raise DomainError("anchors", anchors, "A polyline needs at least one interior anchor.")
    if anchors[0] != complex(a) or anchors[-1] != complex(b):
        raise DomainError("anchors", anchors, f"Polyline must start at {a} and end at {b}.")
    interior = np.array(anchors[1:-1])
    for k, point in enumerate(interior, start=1):
        if not region.contains(point):
            raise DomainError(f"anchors[{k}]", point, f"Anchor {point} lies outside {region}.")
    signs = np.sign(interior.imag)
    if np.any(signs == 0) or np.any(signs != signs[0]):
        raise DomainError("anchors", anchors, "Interior anchors must lie strictly in one "
                                              "half-plane.")
    segments = list(zip(anchors[:-1], anchors[1:]))
    for i in range(len(segments)):
        for j in range(i + 2, len(segments)):
            if _segments_intersect(*segments[i], *segments[j]):
                raise DomainError("anchors", anchors, f"Polyline segments {i} and {j} intersect.")
    arcs = [Arc.segment(z0, z1) for z0, z1 in segments]
    return Contour(spec, (a, b), arcs, True, int(signs[0]), region)


def omega_gamma_contains(contour: Contour, z: complex) -> bool:
    """
    Is z in the closed region Ω_γ bounded by [a, b] and γ? Decided by the winding number of the
    loop [a, b] ∪ γ reversed.

    The real segment encloses no interior, so every admissible point lies outside.

    :raises BoundaryAmbiguousError: if z is closer than the standoff to [a, b] or γ.
    """
    z = complex(z)
    contour.check_standoff(z)
    if not contour.is_deformed:
        return False
    loop = contour.loop() - z
    turns = np.sum(np.angle(loop[1:] / loop[:-1])) / (2 * np.pi)
    return abs(int(round(turns))) == 1
