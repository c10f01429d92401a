"""Closed-form postselected statistics for position-basis readout.

All results hold at arbitrary measurement strength ``g``; the weak-limit values
are recovered as ``g -> 0`` with ``g |A_w|^2 << 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _quad
from .meter import MeterConfig, phi_x
from .quantum import PureState, a_fi, overlap_probability, weak_value


@dataclass(frozen=True)
class WvaReport:
    """SNR ingredients at one ``(i, f, meter)`` point.

    ``mean_x`` is signed; ``eta = |mean_x| / d``. ``weak_limit_*`` fields are the
    weak-measurement-limit references (``gamma = |<f|i>|^2``,
    ``eta = |Re A_w|``, ``sqrt(gamma) eta = |A_fi|``).
    """

    gamma: float
    eta: float
    eta_sigma: float
    lambda_: float
    lambda_tilde: float
    r_factor: float
    mean_x: float
    var_x: float
    m_factor: float
    g: float
    weak_value: complex
    a_fi: complex
    weak_limit_gamma: float
    weak_limit_eta: float
    weak_limit_sqrt_gamma_eta: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lambda_")
        for key in ("weak_value", "a_fi"):
            z = out.pop(key)
            out[key + "_re"], out[key + "_im"] = z.real, z.imag
        return out


def modification_factor(aw: complex, G: float) -> float:
    """``M = 1 + G (|A_w|^2 - 1)``."""
    return 1.0 + G * (abs(aw) ** 2 - 1.0)


def postselection_gamma_x(i: PureState, f: PureState, m: MeterConfig) -> float:
    """Total postselection probability after a position measurement of strength ``g``."""
    ri, rf = i.density(), f.density()
    coherent = 2.0 * (rf.r12.conjugate() * ri.r12).real
    return rf.r11 * ri.r11 + rf.r22 * ri.r22 + coherent * math.exp(-2.0 * m.g)


def amplified_mean_x(i: PureState, f: PureState, m: MeterConfig) -> float:
    """Signed postselected mean ``d Re(A_w) / M``."""
    aw = weak_value(i, f)
    return m.d * aw.real / modification_factor(aw, m.G)


def postselected_second_moment_x(i: PureState, f: PureState, m: MeterConfig) -> float:
    aw = weak_value(i, f)
    M = modification_factor(aw, m.G)
    return m.sigma**2 + m.d**2 * (abs(aw) ** 2 + 1.0) / (2.0 * M)


def postselected_variance_x(i: PureState, f: PureState, m: MeterConfig) -> float:
    """Postselected readout variance.

    Uses ``eta_signed / Re(A_w) = 1 / M`` to write the width correction as
    ``d^2 [(|A_w|^2 + 1) / 2M - (Re A_w / M)^2]``, which stays finite for a
    purely imaginary weak value.
    """
    aw = weak_value(i, f)
    M = modification_factor(aw, m.G)
    eta_s = aw.real / M
    return m.sigma**2 + m.d**2 * ((abs(aw) ** 2 + 1.0) / (2.0 * M) - eta_s**2)


def snr_report(i: PureState, f: PureState, m: MeterConfig) -> WvaReport:
    aw = weak_value(i, f)
    afi = a_fi(i, f)
    M = modification_factor(aw, m.G)
    gamma = postselection_gamma_x(i, f, m)
    mean = amplified_mean_x(i, f, m)
    var = postselected_variance_x(i, f, m)
    eta = abs(mean) / m.d
    eta_sigma = math.sqrt(var) / m.sigma
    lam = gamma * eta**2 / abs(afi) ** 2 if afi != 0 else math.nan
    return WvaReport(
        gamma=gamma,
        eta=eta,
        eta_sigma=eta_sigma,
        lambda_=lam,
        lambda_tilde=lam / eta_sigma**2,
        r_factor=math.sqrt(gamma) * eta / eta_sigma,
        mean_x=mean,
        var_x=var,
        m_factor=M,
        g=m.g,
        weak_value=aw,
        a_fi=afi,
        weak_limit_gamma=overlap_probability(i, f),
        weak_limit_eta=abs(aw.real),
        weak_limit_sqrt_gamma_eta=abs(afi),
    )


def unnormalized_joint_x(i: PureState, f: PureState, m: MeterConfig, x):
    """``P_i(x) P_x(f)`` evaluated at the amplitude level as ``|<f|1><1|i> Phi_1 + <f|2><2|i> Phi_2|^2``."""
    a = f.a1.conjugate() * i.a1
    b = f.a2.conjugate() * i.a2
    return np.abs(a * phi_x(1, x, m) + b * phi_x(2, x, m)) ** 2


def joint_density_x(i: PureState, f: PureState, m: MeterConfig, x):
    """Normalized density of readouts that pass postselection."""
    return unnormalized_joint_x(i, f, m, x) / postselection_gamma_x(i, f, m)


def quadrature_moments_x(i: PureState, f: PureState, m: MeterConfig) -> dict:
    """``gamma``, mean, second moment and variance by direct integration over ``x``."""
    lo, hi = m.x_bounds()
    pts = [-m.d, 0.0, m.d]

    def u(x):
        return float(unnormalized_joint_x(i, f, m, x))

    gamma = _quad.integrate(u, lo, hi, pts)
    mean = _quad.integrate(lambda x: x * u(x), lo, hi, pts) / gamma
    second = _quad.integrate(lambda x: x * x * u(x), lo, hi, pts) / gamma
    var = _quad.integrate(lambda x: (x - mean) ** 2 * u(x), lo, hi, pts) / gamma
    return {"gamma": gamma, "mean": mean, "second_moment": second, "variance": var}
