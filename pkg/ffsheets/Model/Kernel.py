#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Analytic, Hermitian potential kernels V(λ, μ) of the Friedrichs-Faddeev model.

All kernels are closed-form families evaluated on arrays: :meth:`KernelSpec.matrix` returns the
blocks V(λ_p, μ_q) with shape (P, Q, n, n).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence, Tuple, List

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.polynomial import polyval

from ffsheets.auxiliary import get_logger
from ffsheets.exceptions import DomainError, OracleUnavailableError

log = get_logger(__name__)


@dataclass(frozen=True)
class HolomorphyRegion:
    """
    Open rectangle Ω = (re_min, re_max) × (−h, h), mirror-symmetric about the real axis.
    """
    re_min: float
    re_max: float
    im_halfwidth: float

    def __post_init__(self):
        if not self.re_min < self.re_max:
            raise DomainError("re_min", self.re_min, "Holomorphy region needs re_min < re_max.")
        if not self.im_halfwidth > 0:
            raise DomainError("im_halfwidth", self.im_halfwidth,
                              "Holomorphy region needs im_halfwidth > 0.")

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return (self.re_min < z.real) & (z.real < self.re_max) & (np.abs(z.imag) < self.im_halfwidth)

    def check(self, argument: str, z) -> None:
        inside = self.contains(z)
        if not np.all(inside):
            bad = np.asarray(z).ravel()[np.argmin(np.ravel(inside))]
            raise DomainError(argument, complex(bad),
                              f"Argument '{argument}' = {complex(bad)} lies outside the "
                              f"holomorphy region {self}.")


@dataclass(frozen=True)
class FormFactor:
    """
    v(λ) = (λ − a)^p · (b − λ)^q · P(λ) · exp(Q(λ)), with P, Q given by ascending coefficients.
    """
    p: int = 1
    q: int = 1
    poly: Tuple[complex, ...] = (1.0,)
    exp: Tuple[complex, ...] = ()

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("Endpoint exponents must be nonnegative.")
        object.__setattr__(self, "poly", tuple(self.poly))
        object.__setattr__(self, "exp", tuple(self.exp))

    def __call__(self, lam, interval: Tuple[float, float]) -> np.ndarray:
        a, b = interval
        lam = np.asarray(lam, dtype=complex)
        value = (lam - a) ** self.p * (b - lam) ** self.q * polyval(lam, self.poly)
        if self.exp:
            value = value * np.exp(polyval(lam, self.exp))
        return value

    @property
    def is_polynomial(self) -> bool:
        return all(c == 0 for c in self.exp[1:])

    def polynomial(self, interval: Tuple[float, float]) -> Polynomial:
        """The form factor as a polynomial (only for constant exponential factors)."""
        if not self.is_polynomial:
            raise OracleUnavailableError("form factor has a non-constant exponential factor")
        a, b = interval
        scale = np.exp(self.exp[0]) if self.exp else 1.0
        return Polynomial([-a, 1]) ** self.p * Polynomial([b, -1]) ** self.q \
            * Polynomial(self.poly) * scale


class KernelSpec(ABC):
    """
    An operator-valued kernel V(λ, μ) on the interval (a, b) with internal dimension n.
    """
    family = None

    def __init__(self, interval: Tuple[float, float], internal_dim: int,
                 region: HolomorphyRegion):
        a, b = (float(x) for x in interval)
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise DomainError("interval", interval, f"Expected a finite interval a < b, got {interval}.")
        if internal_dim < 1:
            raise DomainError("internal_dim", internal_dim, "Internal dimension must be >= 1.")
        if region.re_min > a or region.re_max < b:
            raise DomainError("region", region, f"Holomorphy region {region} does not contain "
                                                f"the interval ({a}, {b}).")
        self.interval = (a, b)
        self.internal_dim = int(internal_dim)
        self.region = region

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    @property
    def n(self) -> int:
        return self.internal_dim

    def matrix(self, lams, mus) -> np.ndarray:
        """
        Kernel blocks V(λ_p, μ_q) for all pairs.

        :return: Array of shape (P, Q, n, n).
        """
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        mus = np.atleast_1d(np.asarray(mus, dtype=complex))
        self.region.check("lambda", lams)
        self.region.check("mu", mus)
        return self._blocks(lams, mus)

    def __call__(self, lam: complex, mu: complex) -> np.ndarray:
        return self.matrix([lam], [mu])[0, 0]

    @abstractmethod
    def _blocks(self, lams: np.ndarray, mus: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    @abstractmethod
    def form_factors(self) -> List[FormFactor]:
        raise NotImplementedError


class FiniteRank(KernelSpec):
    """
    V(λ, μ) = Σ_k g_k · v_k(λ) · v_k(μ) · C_k
    """
    family = "finite_rank"

    def __init__(self, interval, internal_dim, region, terms: Sequence[Tuple[float, FormFactor,
                                                                             np.ndarray]]):
        super().__init__(interval, internal_dim, region)
        self.couplings = np.array([float(g) for g, _, _ in terms], dtype=float)
        self.factors = [v for _, v, _ in terms]
        channels = [np.atleast_2d(np.asarray(c, dtype=complex)) for _, _, c in terms]
        for k, c in enumerate(channels):
            if c.shape != (self.n, self.n):
                raise DomainError(f"terms[{k}].channel", c.shape,
                                  f"Channel matrix of term {k} has shape {c.shape}, "
                                  f"expected {(self.n, self.n)}.")
        self.channels = np.array(channels).reshape(len(channels), self.n, self.n)
        for k, v in enumerate(self.factors):
            if v.p < 1 or v.q < 1:
                raise DomainError(f"terms[{k}].form_factor", (v.p, v.q),
                                  f"Form factor of term {k} must vanish at both endpoints "
                                  f"(p, q >= 1).")

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def form_factors(self):
        return list(self.factors)

    def _blocks(self, lams, mus):
        if not self.rank:
            return np.zeros((len(lams), len(mus), self.n, self.n), dtype=complex)
        vl = np.array([v(lams, self.interval) for v in self.factors])
        vm = np.array([v(mus, self.interval) for v in self.factors])
        return np.einsum("k,kp,kq,kab->pqab", self.couplings, vl, vm, self.channels)

    def __repr__(self):
        return f"FiniteRank(interval={self.interval}, n={self.n}, rank={self.rank})"


class AnalyticProduct(KernelSpec):
    """
    V(λ, μ) = g · u(λ) · u(μ) · exp(c·λ·μ) · C
    """
    family = "analytic_product"

    def __init__(self, interval, internal_dim, region, coupling: float, form_factor: FormFactor,
                 exponent: float, channel):
        super().__init__(interval, internal_dim, region)
        self.coupling = float(coupling)
        self.form_factor = form_factor
        self.exponent = float(exponent)
        self.channel = np.atleast_2d(np.asarray(channel, dtype=complex))
        if self.channel.shape != (self.n, self.n):
            raise DomainError("product.channel", self.channel.shape,
                              f"Channel matrix has shape {self.channel.shape}, expected "
                              f"{(self.n, self.n)}.")
        if form_factor.p < 1 or form_factor.q < 1:
            raise DomainError("product.form_factor", (form_factor.p, form_factor.q),
                              "Form factor must vanish at both endpoints (p, q >= 1).")

    @property
    def form_factors(self):
        return [self.form_factor]

    def _blocks(self, lams, mus):
        ul = self.form_factor(lams, self.interval)
        um = self.form_factor(mus, self.interval)
        scalar = self.coupling * np.outer(ul, um) * np.exp(self.exponent * np.outer(lams, mus))
        return scalar[:, :, None, None] * self.channel[None, None, :, :]

    def __repr__(self):
        return f"AnalyticProduct(interval={self.interval}, n={self.n}, c={self.exponent})"


def eval_kernel(kernel: KernelSpec, lam: complex, mu: complex) -> np.ndarray:
    """
    Evaluate V(λ, μ).

    :raises DomainError: naming the argument outside the holomorphy region.
    """
    return kernel(lam, mu)


@dataclass
class ValidationReport:
    hermiticity_residual: float
    endpoint_values: float
    schwarz_residual: float
    analyticity_residual: float
    samples: int
    tolerance: float = 1e-12
    flags: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags

    def to_dict(self):
        return {"hermiticity_residual": self.hermiticity_residual,
                "endpoint_values": self.endpoint_values,
                "schwarz_residual": self.schwarz_residual,
                "analyticity_residual": self.analyticity_residual,
                "samples": self.samples,
                "flags": list(self.flags)}


def validate_kernel(kernel: KernelSpec, sample_count: int = 100, seed: int = 0,
                    tolerance: float = 1e-12) -> ValidationReport:
    """
    Check the structural conditions on V: Hermiticity on the real interval, vanishing at the
    endpoints, Schwarz reflection V(λ, μ) = V(μ*, λ*)* in Ω and a Cauchy-integral analyticity check.

    Violations are reported, never raised.
    """
    rng = np.random.default_rng(seed)
    a, b = kernel.interval
    region = kernel.region
    real_l = rng.uniform(a, b, sample_count)
    real_m = rng.uniform(a, b, sample_count)
    v = kernel.matrix(real_l, real_m)
    vt = kernel.matrix(real_m, real_l)
    diag = np.arange(sample_count)
    hermiticity = float(np.max(np.abs(v[diag, diag] - np.conj(vt[diag, diag]).swapaxes(-1, -2))))

    ends = kernel.matrix([a, b], real_m)
    ends_t = kernel.matrix(real_l, [a, b])
    endpoint = float(max(np.max(np.abs(ends)), np.max(np.abs(ends_t))))

    # Complex samples shrunk by 0.9 so the conjugated points stay inside Ω
    def complex_samples():
        re = rng.uniform(region.re_min, region.re_max, sample_count)
        center = (region.re_min + region.re_max) / 2
        re = center + 0.9 * (re - center)
        im = rng.uniform(-0.9, 0.9, sample_count) * region.im_halfwidth
        return re + 1j * im

    cl, cm = complex_samples(), complex_samples()
    w = kernel.matrix(cl, cm)[diag, diag]
    w_reflected = kernel.matrix(np.conj(cm), np.conj(cl))[diag, diag]
    schwarz = float(np.max(np.abs(w - np.conj(w_reflected).swapaxes(-1, -2))))

    # Cauchy integral of V(·, μ) over a small circle reproduces the center value
    center = complex((a + b) / 2, 0.1 * region.im_halfwidth)
    radius = 0.25 * min(region.im_halfwidth, (b - a) / 2)
    theta = 2 * np.pi * np.arange(64) / 64
    circle = kernel.matrix(center + radius * np.exp(1j * theta), cm[:8])
    mean = circle.mean(axis=0)
    analyticity = float(np.max(np.abs(mean - kernel.matrix([center], cm[:8])[0])))

    scale = max(1.0, float(np.max(np.abs(v))))
    flags = []
    if hermiticity > tolerance * scale:
        flags.append(f"Hermiticity violated: residual {hermiticity:.3g}")
    if endpoint > tolerance * scale:
        flags.append(f"Kernel does not vanish at the endpoints: {endpoint:.3g}")
    if schwarz > tolerance * scale * 10:
        flags.append(f"Schwarz reflection violated: residual {schwarz:.3g}")
    if analyticity > 1e-10 * scale:
        flags.append(f"Analyticity check failed: residual {analyticity:.3g}")
    for flag in flags:
        log.warning(f"{kernel!r}: {flag}")
    return ValidationReport(hermiticity, endpoint, schwarz, analyticity, sample_count,
                            tolerance, flags)
