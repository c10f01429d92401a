"""Gaussian meter: wavefunctions, readout priors and conditional state updates.

Units have hbar = 1. The two system branches displace the meter to
``x = +d`` (branch 1) and ``x = -d`` (branch 2). Every function accepts
scalar or array readouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum import DensityMatrix, PureState

# Half-width of the clipped readout domain in units of the relevant
# Gaussian width; the discarded mass is below 1e-30.
CLIP_WIDTHS = 12.0


class ZeroLikelihood(ValueError):
    """Readout prior underflowed to zero; clip the readout domain."""


@dataclass(frozen=True)
class MeterConfig:
    """Displacement ``d`` and wavepacket width ``sigma`` of the meter."""

    d: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.d) and self.d > 0):
            raise ValueError(f"d must be positive and finite, got {self.d!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")

    @classmethod
    def from_strength(cls, g: float, sigma: float = 1.0) -> "MeterConfig":
        """Meter with measurement strength ``g = (d / 2 sigma)^2``."""
        if not g > 0:
            raise ValueError(f"g must be positive, got {g!r}")
        return cls(2.0 * sigma * math.sqrt(g), sigma)

    @property
    def g(self) -> float:
        return (self.d / (2.0 * self.sigma)) ** 2

    @property
    def G(self) -> float:
        return -0.5 * math.expm1(-2.0 * self.g)

    def with_d(self, d: float) -> "MeterConfig":
        return MeterConfig(d, self.sigma)

    def x_bounds(self, jitter: float = 0.0) -> tuple[float, float]:
        half = self.d + CLIP_WIDTHS * math.hypot(self.sigma, jitter)
        return -half, half

    def p_bounds(self, jitter_p: float = 0.0) -> tuple[float, float]:
        half = CLIP_WIDTHS * math.sqrt(1.0 / (4.0 * self.sigma**2) + jitter_p**2)
        return -half, half


def _center(j: int, m: MeterConfig) -> float:
    if j == 1:
        return m.d
    if j == 2:
        return -m.d
    raise ValueError(f"branch must be 1 or 2, got {j!r}")


def phi_x(j: int, x, m: MeterConfig):
    """Real position-space amplitude of branch ``j``."""
    x = np.asarray(x, dtype=float)
    c = _center(j, m)
    return (2.0 * np.pi * m.sigma**2) ** -0.25 * np.exp(-((x - c) ** 2) / (4.0 * m.sigma**2))


def phi_p(j: int, p, m: MeterConfig):
    """Momentum-space amplitude of branch ``j``: a Gaussian times ``e^{-i x_j p}``."""
    p = np.asarray(p, dtype=float)
    c = _center(j, m)
    norm = (np.pi / (2.0 * m.sigma**2)) ** -0.25
    return norm * np.exp(-(m.sigma**2) * p**2 - 1j * c * p)


def prior_x(rho: DensityMatrix, x, m: MeterConfig):
    """Readout density ``P_i(x)`` before postselection."""
    return rho.r11 * phi_x(1, x, m) ** 2 + rho.r22 * phi_x(2, x, m) ** 2


def prior_p(rho: DensityMatrix, p, m: MeterConfig, p0=0.0):
    """Momentum readout density, optionally with the wavepacket kicked by ``p0``.

    Both branches have the same ``|Phi_j(p)|^2`` so the state only enters
    through its trace.
    """
    q = np.asarray(p, dtype=float) - p0
    trace = rho.r11 + rho.r22
    return trace * np.abs(phi_p(1, q, m)) ** 2


def bayes_update_x(rho: DensityMatrix, x, m: MeterConfig) -> DensityMatrix:
    """System state conditioned on the position readout ``x``.

    Evaluated through the log-likelihood ratio ``ln(Phi_1^2 / Phi_2^2) =
    2 x d / sigma^2`` so that readouts far in the tails do not underflow.
    """
    x = np.asarray(x, dtype=float)
    if np.any(prior_x(rho, x, m) <= 0.0):
        raise ZeroLikelihood("readout prior underflowed to zero")
    s = x * m.d / m.sigma**2  # half the log-likelihood ratio
    r11 = np.asarray(rho.r11, dtype=float)
    r22 = np.asarray(rho.r22, dtype=float)
    # new_r11 = r11 Phi_1^2 / N, written as a logistic in 2s
    with np.errstate(over="ignore", divide="ignore"):
        w1 = np.where(r11 > 0, np.log(np.where(r11 > 0, r11, 1.0)) + s, -np.inf)
        w2 = np.where(r22 > 0, np.log(np.where(r22 > 0, r22, 1.0)) - s, -np.inf)
        lse = np.logaddexp(w1, w2)
        new11 = np.exp(w1 - lse)
        new22 = np.exp(w2 - lse)
        # Phi_1 Phi_2 / N = exp(-lse)
        new12 = rho.r12 * np.exp(-lse)
    if new11.ndim == 0:
        return DensityMatrix(float(new11), float(new22), complex(new12))
    return DensityMatrix(new11, new22, new12)


def bayes_update_p(rho: DensityMatrix, p, m: MeterConfig) -> DensityMatrix:
    """Conditional state after a momentum readout: coherence picks up ``e^{-2idp}``."""
    p = np.asarray(p, dtype=float)
    r12 = rho.r12 * np.exp(-2j * m.d * p)
    if r12.ndim == 0:
        return DensityMatrix(rho.r11, rho.r22, complex(r12))
    return DensityMatrix(
        np.broadcast_to(rho.r11, r12.shape), np.broadcast_to(rho.r22, r12.shape), r12
    )


def postselect_prob(rho: DensityMatrix, f: PureState):
    """``<f|rho|f>``, clipped to [0, 1]."""
    val = (
        abs(f.a1) ** 2 * rho.r11
        + abs(f.a2) ** 2 * rho.r22
        + 2.0 * np.real(f.a1.conjugate() * rho.r12 * f.a2)
    )
    val = np.clip(val, 0.0, 1.0)
    return float(val) if np.ndim(val) == 0 else val
