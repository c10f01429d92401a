"""Classical Fisher information of the readout w.r.t. the displacement ``d``.

Derivatives in ``d`` are central differences with step ``1e-4 d`` and one
level of Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _quad
from .analytics import amplified_mean_x, postselected_variance_x, postselection_gamma_x
from .meter import MeterConfig
from .quantum import PureState

REL_STEP = 1e-4
# Finite-difference noise in the score sits near 1e-10 relative at the
# smallest steps, so the integrator is asked for one digit less.
FISHER_EPSREL = 1e-9


class NonPositiveDensity(ValueError):
    """Density vanished (or went negative) where its derivative does not."""


def richardson_derivative(func, x0: float, h: float) -> float:
    """Central difference at ``x0`` with one Richardson step (error O(h^4))."""
    d1 = (func(x0 + h) - func(x0 - h)) / (2.0 * h)
    d2 = (func(x0 + h / 2) - func(x0 - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def _step(theta0: float, rel_step: float, abs_step: float | None) -> float:
    if abs_step is not None:
        return abs_step
    if theta0 == 0.0:
        raise ValueError("relative step undefined at theta0 = 0; pass abs_step")
    return rel_step * abs(theta0)


def fisher_information(density, theta0: float, bounds, points=None,
                       rel_step: float = REL_STEP, abs_step: float | None = None) -> float:
    """Fisher information ``int P (d_theta ln P)^2 dx`` of a one-parameter family.

    Parameters
    ----------
    density : callable
        ``density(x, theta)`` for scalar ``x``; must broadcast over a numpy
        array of ``theta`` values.
    theta0 : float
        Parameter value at which the information is evaluated.
    bounds : (float, float)
        Clipped integration domain; the density must be resolvable there.
    points : sequence of float, optional
        Breakpoints handed to the adaptive integrator.
    """
    h = _step(theta0, rel_step, abs_step)
    thetas = theta0 + np.array([-h, -h / 2, 0.0, h / 2, h])

    def integrand(x):
        pm, pmh, p0, pph, pp = density(x, thetas)
        dp = (4.0 * (pph - pmh) / h - (pp - pm) / (2.0 * h)) / 3.0
        if not p0 > 0.0:
            if p0 == 0.0 and dp == 0.0:
                return 0.0
            raise NonPositiveDensity(f"density is {p0!r} at x={x!r}")
        return dp * dp / p0

    return _quad.integrate(integrand, bounds[0], bounds[1], points, epsrel=FISHER_EPSREL)


def _postselected_density(i: PureState, f: PureState, sigma: float):
    a = f.a1.conjugate() * i.a1
    b = f.a2.conjugate() * i.a2
    norm = (2.0 * math.pi * sigma**2) ** -0.25

    def density(x, d):
        d = np.asarray(d, dtype=float)
        amp = norm * (a * np.exp(-((x - d) ** 2) / (4 * sigma**2))
                      + b * np.exp(-((x + d) ** 2) / (4 * sigma**2)))
        gamma = (abs(a) ** 2 + abs(b) ** 2
                 + 2.0 * (a * b.conjugate()).real * np.exp(-(d**2) / (2 * sigma**2)))
        return np.abs(amp) ** 2 / gamma

    return density


def postselected_fisher(i: PureState, f: PureState, m: MeterConfig) -> float:
    """Fisher information per postselected readout, normalization ``gamma(d)`` included."""
    return fisher_information(_postselected_density(i, f, m.sigma), m.d,
                              m.x_bounds(), points=[-m.d, 0.0, m.d])


def prior_fisher(i: PureState, m: MeterConfig) -> float:
    """Fisher information of the unpostselected readout ``P_i(x)``."""
    r11, r22 = abs(i.a1) ** 2, abs(i.a2) ** 2
    s = m.sigma

    def density(x, d):
        d = np.asarray(d, dtype=float)
        c = 1.0 / math.sqrt(2 * math.pi * s**2)
        return c * (r11 * np.exp(-((x - d) ** 2) / (2 * s**2))
                    + r22 * np.exp(-((x + d) ** 2) / (2 * s**2)))

    return fisher_information(density, m.d, m.x_bounds(), points=[-m.d, 0.0, m.d])


def eta_tilde(i: PureState, f: PureState, m: MeterConfig) -> float:
    """``d/dd (eta d) = d/dd |postselected mean|`` at fixed ``sigma``."""
    def amp(d):
        return abs(amplified_mean_x(i, f, m.with_d(d)))

    return richardson_derivative(amp, m.d, REL_STEP * m.d)


@dataclass(frozen=True)
class CrbReport:
    """Both sides of ``eta_tilde^2 / eta_sigma^2 <= F_post / F``.

    ``lhs`` and ``rhs`` are dimensionless (``rhs = F_post sigma^2``);
    ``slack = rhs - lhs``. ``eta_substitution_violates`` flags points where
    replacing ``eta_tilde`` by ``eta`` would break the inequality.
    """

    fisher_standard: float
    fisher_post: float
    eta: float
    eta_tilde: float
    eta_sigma: float
    gamma: float
    lhs: float
    rhs: float
    tradeoff: float
    slack: float
    eta_substitution_violates: bool


def crb_report(i: PureState, f: PureState, m: MeterConfig) -> CrbReport:
    F = 1.0 / m.sigma**2
    F_post = postselected_fisher(i, f, m)
    gamma = postselection_gamma_x(i, f, m)
    eta = abs(amplified_mean_x(i, f, m)) / m.d
    et = eta_tilde(i, f, m)
    eta_sigma_sq = postselected_variance_x(i, f, m) / m.sigma**2
    lhs = et**2 / eta_sigma_sq
    rhs = F_post / F
    return CrbReport(
        fisher_standard=F,
        fisher_post=F_post,
        eta=eta,
        eta_tilde=et,
        eta_sigma=math.sqrt(eta_sigma_sq),
        gamma=gamma,
        lhs=lhs,
        rhs=rhs,
        tradeoff=gamma * rhs,
        slack=rhs - lhs,
        eta_substitution_violates=eta**2 / eta_sigma_sq > rhs,
    )
