"""Frozen parameter sets and tables behind figures 1-6.

Fig. 1-4: ``|i> = (|1> + |2>)/sqrt(2)``, ``|f>`` at theta = 1.3, 1.49, 1.6 pi
(phi = 0), over a log grid ``g in [1e-4, 1]``. Fig. 5-6: theta = 1.49 pi,
phi = pi/4, ``d = 1``. Use the ``scan`` command for anything else.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .analytics import snr_report
from .fisher import crb_report
from .meter import MeterConfig
from .noise import p_basis_p0_moments, p_basis_x0_moments, standard_snr
from .quantum import OrthogonalSelection, plus_state, state_from_angles

PI = math.pi
FIG1_THETAS = (1.3, 1.49, 1.6)  # in units of pi
G_GRID = np.geomspace(1e-4, 1.0, 200)
FIG2_THETAS = np.linspace(1.0, 2.0, 201)
FIG2_G = (1e-4, 1e-3, 1e-2, 1e-1)
FIG5_THETA, FIG5_PHI = 1.49 * PI, PI / 4
FIG5_D, FIG5_SIGMA = 1.0, 10.0
FIG5_J = np.linspace(0.0, 50.0, 201)
FIG6_SIGMAS = (10.0, 20.0, 100.0)
FIG6_JP = np.linspace(0.0, 1.5, 301)

NAN = math.nan


def _fig1_row(theta_pi, g):
    rep = snr_report(plus_state(), state_from_angles(theta_pi * PI), MeterConfig.from_strength(g))
    return [theta_pi, g, rep.gamma, rep.lambda_, rep.eta_sigma, rep.lambda_tilde, "ok"]


def _fig2_row(g, theta_pi):
    f = state_from_angles(theta_pi * PI)
    try:
        rep = snr_report(plus_state(), f, MeterConfig.from_strength(g))
    except OrthogonalSelection:
        return [g, theta_pi, NAN, NAN, NAN, NAN, NAN, "orthogonal_selection"]
    aw = rep.weak_value
    return [g, theta_pi, aw.real, abs(aw.real), rep.eta, rep.r_factor,
            rep.weak_limit_sqrt_gamma_eta, "ok"]


def _fig34_row(theta_pi, g):
    r = crb_report(plus_state(), state_from_angles(theta_pi * PI), MeterConfig.from_strength(g))
    return [theta_pi, g, r.rhs, r.gamma, r.tradeoff, r.lhs, r.eta**2 / r.eta_sigma**2,
            r.slack, "ok"]


def _fig5_row(J):
    i, f = plus_state(), state_from_angles(FIG5_THETA, FIG5_PHI)
    m = MeterConfig(FIG5_D, FIG5_SIGMA)
    w = p_basis_x0_moments(i, f, m).snr
    s = standard_snr(m, J)
    return [J, w, s, 1.0 / w, 1.0 / s]


def _fig6_row(sigma, jp):
    i, f = plus_state(), state_from_angles(FIG5_THETA, FIG5_PHI)
    rep = p_basis_p0_moments(i, f, MeterConfig(FIG5_D, sigma), jp)
    return [sigma, jp, rep.snr, rep.gamma, rep.mean_p, rep.var_p]


def _star(args):
    fn, a = args
    return fn(*a)


FIGURES = {
    1: (["theta_over_pi", "g", "gamma", "lambda", "eta_sigma", "lambda_tilde", "status"],
        _fig1_row, lambda: [(t, float(g)) for t in FIG1_THETAS for g in G_GRID]),
    2: (["g", "theta_over_pi", "re_weak_value", "eta_weak_limit", "eta", "r_factor",
         "r_factor_weak_limit", "status"],
        _fig2_row, lambda: [(g, float(t)) for g in FIG2_G for t in FIG2_THETAS]),
    3: (["theta_over_pi", "g", "fisher_ratio", "gamma", "tradeoff", "crb_lhs",
         "crb_lhs_with_eta", "crb_slack", "status"],
        _fig34_row, lambda: [(t, float(g)) for t in FIG1_THETAS for g in G_GRID]),
    5: (["J", "snr_imaginary_wva", "snr_standard", "inverse_snr_imaginary_wva",
         "inverse_snr_standard"],
        _fig5_row, lambda: [(float(j),) for j in FIG5_J]),
    6: (["sigma", "Jp", "snr", "gamma", "mean_p", "var_p"],
        _fig6_row, lambda: [(s, float(j)) for s in FIG6_SIGMAS for j in FIG6_JP]),
}
FIGURES[4] = FIGURES[3]  # the CRB columns are computed alongside the Fisher ratio


def figure_table(n: int, workers: int = 1) -> tuple[list[str], list[list]]:
    """Header and rows for figure ``n``."""
    if n not in FIGURES:
        raise ValueError(f"figure must be 1..6, got {n!r}")
    header, fn, grid = FIGURES[n]
    jobs = [(fn, a) for a in grid()]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_star(j) for j in jobs]
    return header, rows
