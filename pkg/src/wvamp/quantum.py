"""Two-level system states and weak-value arithmetic.

The measured observable is fixed to ``sigma_z`` in the ``{|1>, |2>}`` basis,
so a weak value reduces to ``(f1* i1 - f2* i2) / (f1* i1 + f2* i2)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Below this |<f|i>| the weak value exceeds ~1e10 and nothing downstream is
# meaningful in double precision.
OVERLAP_EPS = 1e-10


class OrthogonalSelection(ValueError):
    """Pre- and post-selected states are (numerically) orthogonal."""


@dataclass(frozen=True)
class PureState:
    """Normalized qubit state ``a1|1> + a2|2>``.

    The amplitudes are normalized on construction; a global phase is kept
    as given.
    """

    a1: complex
    a2: complex

    def __post_init__(self):
        a1, a2 = complex(self.a1), complex(self.a2)
        if not all(math.isfinite(v) for v in (a1.real, a1.imag, a2.real, a2.imag)):
            raise ValueError("state amplitudes must be finite")
        norm = math.sqrt(abs(a1) ** 2 + abs(a2) ** 2)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        object.__setattr__(self, "a1", a1 / norm)
        object.__setattr__(self, "a2", a2 / norm)

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2], dtype=complex)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(
            abs(self.a1) ** 2, abs(self.a2) ** 2, self.a1 * self.a2.conjugate()
        )


@dataclass(frozen=True)
class DensityMatrix:
    """Qubit density matrix stored as ``r11, r22, r12`` (``r21 = conj(r12)``).

    Fields may be numpy arrays, in which case the object represents a batch
    of states (used by the Monte Carlo sampler). Trace and positivity are
    checked on construction.
    """

    r11: float | np.ndarray
    r22: float | np.ndarray
    r12: complex | np.ndarray

    def __post_init__(self):
        r11, r22, r12 = (np.asarray(v) for v in (self.r11, self.r22, self.r12))
        if not (np.all(np.isfinite(r11)) and np.all(np.isfinite(r22))
                and np.all(np.isfinite(r12))):
            raise ValueError("density matrix elements must be finite")
        if np.any(np.abs(r11 + r22 - 1.0) > 1e-12):
            raise ValueError("density matrix must have unit trace")
        if np.any(r11 < -1e-12) or np.any(r22 < -1e-12):
            raise ValueError("diagonal elements must be nonnegative")
        if np.any(np.abs(r12) ** 2 > r11 * r22 + 1e-12):
            raise ValueError("density matrix is not positive semidefinite")

    def as_matrix(self) -> np.ndarray:
        """2x2 matrix; only valid for a single (non-batched) state."""
        r12 = complex(self.r12)
        return np.array([[self.r11, r12], [r12.conjugate(), self.r22]], dtype=complex)


def state_from_angles(theta: float, phi: float = 0.0) -> PureState:
    """``cos(theta/2) e^{i phi} |1> + sin(theta/2) |2>``."""
    if not (math.isfinite(theta) and math.isfinite(phi)):
        raise ValueError("angles must be finite")
    return PureState(math.cos(theta / 2) * cmath.exp(1j * phi), math.sin(theta / 2))


def plus_state() -> PureState:
    """``(|1> + |2>)/sqrt(2)``, the preselected state used throughout."""
    return PureState(1.0, 1.0)


def _branch_overlaps(i: PureState, f: PureState) -> tuple[complex, complex]:
    # (<f|1><1|i>, <f|2><2|i>)
    return f.a1.conjugate() * i.a1, f.a2.conjugate() * i.a2


def overlap(i: PureState, f: PureState) -> complex:
    a, b = _branch_overlaps(i, f)
    return a + b


def overlap_probability(i: PureState, f: PureState) -> float:
    """``|<f|i>|^2``."""
    return min(1.0, abs(overlap(i, f)) ** 2)


def a_fi(i: PureState, f: PureState) -> complex:
    """``<f|sigma_z|i>``."""
    a, b = _branch_overlaps(i, f)
    return a - b


def weak_value(i: PureState, f: PureState) -> complex:
    """Weak value of ``sigma_z`` for the pair ``(i, f)``.

    Raises
    ------
    OrthogonalSelection
        If ``|<f|i>| <= OVERLAP_EPS``.
    """
    a, b = _branch_overlaps(i, f)
    ov = a + b
    if abs(ov) <= OVERLAP_EPS:
        raise OrthogonalSelection(f"|<f|i>| = {abs(ov):.3e} is below {OVERLAP_EPS:g}")
    return (a - b) / ov
