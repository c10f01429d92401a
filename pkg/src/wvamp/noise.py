"""Technical-noise models and momentum-basis ("imaginary") weak-value amplification.

Three scenarios are covered: position readout with a random wavepacket
shift ``x0``; momentum readout with the same ``x0`` shift (which drops out
entirely); and momentum readout with a random momentum kick ``p0``. Both
jitters are zero-mean Gaussians.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _quad
from .analytics import amplified_mean_x, postselected_second_moment_x
from .meter import CLIP_WIDTHS, MeterConfig, bayes_update_p, postselect_prob, prior_p
from .quantum import PureState, overlap_probability, weak_value


class NoiseKind(str, enum.Enum):
    NONE = "none"
    X0 = "x0"
    P0 = "p0"


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian jitter of the meter: ``J`` for ``x0``, ``J_p`` for ``p0``."""

    kind: NoiseKind = NoiseKind.NONE
    width: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not (math.isfinite(self.width) and self.width >= 0):
            raise ValueError(f"noise width must be finite and >= 0, got {self.width!r}")
        if self.kind is NoiseKind.NONE and self.width != 0:
            raise ValueError("noise kind 'none' takes no width")


class DegenerateVariance(ValueError):
    """Postselected variance is not positive."""


@dataclass(frozen=True)
class ImaginaryWvaReport:
    mean_p: float
    second_moment_p: float
    var_p: float
    gamma: float
    snr: float
    m_k: float
    k_factor: float
    sigma_j_eff: float | None = None


def standard_snr(m: MeterConfig, J: float = 0.0) -> float:
    """Single-trial SNR of the plain position measurement under ``x0`` jitter ``J``."""
    return m.d / math.hypot(m.sigma, J)


def x_basis_x0_moments(i: PureState, f: PureState, m: MeterConfig, J: float) -> tuple[float, float]:
    """Postselected ``<x>`` and ``<x^2>`` with ``x0`` jitter of width ``J``.

    The jitter leaves the mean untouched and adds ``J^2`` to the second moment.
    """
    return amplified_mean_x(i, f, m), postselected_second_moment_x(i, f, m) + J**2


def imaginary_wva_snr(report: ImaginaryWvaReport) -> float:
    """``sqrt(gamma) <p> / sqrt(var_p)`` (signed)."""
    if not report.var_p > 0:
        raise DegenerateVariance(f"var_p = {report.var_p!r}")
    return math.sqrt(report.gamma) * report.mean_p / math.sqrt(report.var_p)


def _p_basis_report(i: PureState, f: PureState, m: MeterConfig, s2: float,
                    sigma_j_eff: float | None) -> ImaginaryWvaReport:
    # s2 is the variance of the recorded momentum before postselection.
    aw = weak_value(i, f)
    e = math.exp(-2.0 * m.d**2 * s2)
    k = -0.5 * math.expm1(-2.0 * m.d**2 * s2)
    mk = 1.0 + k * (abs(aw) ** 2 - 1.0)
    mean = aw.imag / mk * 2.0 * m.d * s2 * e
    second = s2 + (abs(aw) ** 2 - 1.0) / mk * 2.0 * m.d**2 * s2**2 * e
    # Integrating the Gaussian prior against P_p(f) gives |<f|i>|^2 M_k.
    gamma = overlap_probability(i, f) * mk
    var = second - mean**2
    rep = ImaginaryWvaReport(mean, second, var, gamma, math.nan, mk, k, sigma_j_eff)
    return ImaginaryWvaReport(**{**rep.__dict__, "snr": imaginary_wva_snr(rep)})


def p_basis_x0_moments(i: PureState, f: PureState, m: MeterConfig) -> ImaginaryWvaReport:
    """Momentum-readout statistics; identical for every ``x0`` jitter width."""
    return _p_basis_report(i, f, m, 1.0 / (4.0 * m.sigma**2), None)


def p_basis_p0_moments(i: PureState, f: PureState, m: MeterConfig, Jp: float,
                       gamma_method: str = "closed") -> ImaginaryWvaReport:
    """Momentum-readout statistics under a ``p0`` kick of width ``Jp``.

    The effective width obeys ``1/sigma_J^2 = 1/(4 sigma^2) + Jp^2``.
    ``gamma_method="quadrature"`` replaces the closed-form postselection
    probability with nested integration over ``(p, p0)``.
    """
    if not (math.isfinite(Jp) and Jp >= 0):
        raise ValueError(f"Jp must be finite and >= 0, got {Jp!r}")
    s2 = 1.0 / (4.0 * m.sigma**2) + Jp**2
    rep = _p_basis_report(i, f, m, s2, 1.0 / math.sqrt(s2))
    if gamma_method == "closed":
        return rep
    if gamma_method != "quadrature":
        raise ValueError(f"unknown gamma_method {gamma_method!r}")
    gamma = p0_gamma_quadrature(i, f, m, Jp)
    rep = ImaginaryWvaReport(**{**rep.__dict__, "gamma": gamma})
    return ImaginaryWvaReport(**{**rep.__dict__, "snr": imaginary_wva_snr(rep)})


# --- nested-quadrature oracles -------------------------------------------------

def _gauss_pdf(x: float, width: float) -> float:
    return math.exp(-0.5 * (x / width) ** 2) / (math.sqrt(2 * math.pi) * width)


def _p_inner(i: PureState, f: PureState, m: MeterConfig, power: int, p0: float) -> float:
    rho = i.density()
    half = CLIP_WIDTHS / (2.0 * m.sigma)

    def integrand(p):
        w = float(prior_p(rho, p, m, p0)) * postselect_prob(bayes_update_p(rho, p, m), f)
        return p**power * w

    return _quad.integrate(integrand, p0 - half, p0 + half, [p0])


def p_basis_quadrature_moments(i: PureState, f: PureState, m: MeterConfig,
                               noise: NoiseConfig = NoiseConfig()) -> dict:
    """``gamma``, ``<p>``, ``<p^2>`` by integrating the joint density directly.

    With ``x0`` jitter the shift enters the momentum wavefunctions only as a
    common phase and the integration over ``x0`` is carried out explicitly;
    with ``p0`` jitter the outer integral runs over ``+-10 Jp``.
    """
    if noise.kind is NoiseKind.NONE or noise.width == 0:
        vals = [_p_inner(i, f, m, k, 0.0) for k in range(3)]
    elif noise.kind is NoiseKind.X0:
        vals = [_x0_outer(lambda x0, k=k: _p_inner_x0(i, f, m, k, x0), noise.width)
                for k in range(3)]
    else:
        jp = noise.width
        vals = [
            _quad.integrate(lambda p0, k=k: _p_inner(i, f, m, k, p0) * _gauss_pdf(p0, jp),
                            -10 * jp, 10 * jp, [0.0], epsabs=1e-13)
            for k in range(3)
        ]
    gamma = vals[0]
    return {"gamma": gamma, "mean": vals[1] / gamma, "second_moment": vals[2] / gamma}


def _x0_outer(inner, J: float) -> float:
    return _quad.integrate(lambda x0: inner(x0) * _gauss_pdf(x0, J), -10 * J, 10 * J, [0.0])


def _p_inner_x0(i: PureState, f: PureState, m: MeterConfig, power: int, x0: float) -> float:
    # Conditional state built from the x0-shifted amplitudes themselves.
    rho = i.density()
    half = CLIP_WIDTHS / (2.0 * m.sigma)
    norm = (math.pi / (2.0 * m.sigma**2)) ** -0.25

    def integrand(p):
        env = norm * math.exp(-(m.sigma**2) * p * p)
        ph1 = env * complex(math.cos(-(m.d + x0) * p), math.sin(-(m.d + x0) * p))
        ph2 = env * complex(math.cos((m.d - x0) * p), math.sin((m.d - x0) * p))
        n = rho.r11 * abs(ph1) ** 2 + rho.r22 * abs(ph2) ** 2
        r12 = rho.r12 * ph1 * ph2.conjugate() / n
        pf = (abs(f.a1) ** 2 * rho.r11 + abs(f.a2) ** 2 * rho.r22
              + 2.0 * (f.a1.conjugate() * r12 * f.a2).real)
        return p**power * n * pf

    return _quad.integrate(integrand, -half, half, [0.0])


def p0_gamma_quadrature(i: PureState, f: PureState, m: MeterConfig, Jp: float) -> float:
    """Postselection probability under ``p0`` jitter by nested quadrature."""
    if Jp == 0:
        return _p_inner(i, f, m, 0, 0.0)
    return p_basis_quadrature_moments(i, f, m, NoiseConfig(NoiseKind.P0, Jp))["gamma"]


def x_basis_x0_quadrature_moments(i: PureState, f: PureState, m: MeterConfig, J: float) -> dict:
    """``gamma``, ``<x>``, ``<x^2>`` under ``x0`` jitter by nested quadrature."""
    from .analytics import unnormalized_joint_x

    lo, hi = m.x_bounds()

    def inner(k, x0):
        return _quad.integrate(lambda y: (y + x0) ** k * float(unnormalized_joint_x(i, f, m, y)),
                               lo, hi, [-m.d, 0.0, m.d])

    if J == 0:
        vals = [inner(k, 0.0) for k in range(3)]
    else:
        vals = [_x0_outer(lambda x0, k=k: inner(k, x0), J) for k in range(3)]
    gamma = vals[0]
    return {"gamma": gamma, "mean": vals[1] / gamma, "second_moment": vals[2] / gamma}


# --- optimum noise width --------------------------------------------------------

@dataclass(frozen=True)
class JpOptimum:
    """Noise width maximizing ``|snr|``.

    ``unimodal`` is False when the grid scan did not show a single interior
    peak; ``jp_star`` is then just the best grid point.
    """

    jp_star: float
    snr_star: float
    snr_noise_free: float
    unimodal: bool

    @property
    def gain(self) -> float:
        return self.snr_star / self.snr_noise_free


def find_optimal_jp(i: PureState, f: PureState, m: MeterConfig,
                    search_range: tuple[float, float] = (1e-4, 10.0),
                    grid_points: int = 81, rtol: float = 1e-6) -> JpOptimum:
    """Golden-section maximization of ``|snr(Jp)|`` over ``search_range``."""
    lo, hi = map(float, search_range)
    if not (0 <= lo < hi and math.isfinite(hi)):
        raise ValueError(f"invalid Jp search range {search_range!r}")

    def score(jp):
        return abs(p_basis_p0_moments(i, f, m, jp).snr)

    grid = np.geomspace(lo, hi, grid_points) if lo > 0 else np.linspace(lo, hi, grid_points)
    vals = np.array([score(j) for j in grid])
    k = int(np.argmax(vals))
    base = score(0.0)
    rising = np.all(np.diff(vals[: k + 1]) >= 0)
    falling = np.all(np.diff(vals[k:]) <= 0)
    if k == 0 or k == grid_points - 1 or not (rising and falling):
        return JpOptimum(float(grid[k]), float(vals[k]), base, False)

    res = optimize.minimize_scalar(lambda j: -score(j), bracket=(grid[k - 1], grid[k], grid[k + 1]),
                                   method="golden", tol=rtol)
    return JpOptimum(float(res.x), float(-res.fun), base, True)
