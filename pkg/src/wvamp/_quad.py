"""Thin wrapper over QUADPACK's adaptive Gauss-Kronrod integrator."""

from __future__ import annotations

import warnings

from scipy import integrate as _integrate

EPSABS = 1e-12
EPSREL = 1e-10


def integrate(func, a, b, points=None, epsabs=EPSABS, epsrel=EPSREL, limit=400):
    """Integrate a scalar function on ``[a, b]``; ``points`` are interior breakpoints."""
    if points is not None:
        points = sorted(p for p in points if a < p < b) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        val, err, info, *rest = _integrate.quad(
            func, a, b, points=points, epsabs=epsabs, epsrel=epsrel, limit=limit,
            full_output=1,
        )
    if rest:
        warnings.warn(f"quadrature on [{a:g}, {b:g}] did not converge: {rest[0]}",
                      RuntimeWarning, stacklevel=2)
    return val
