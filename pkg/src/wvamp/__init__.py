"""Weak-value amplification beyond the weak-measurement limit.

Closed-form postselected moments, SNR and Fisher information for a qubit
coupled to a Gaussian meter, technical-noise models, and a trial-level
Monte Carlo sampler that checks them.
"""

from .analytics import (WvaReport, amplified_mean_x, joint_density_x,
                        postselected_variance_x, postselection_gamma_x, snr_report)
from .fisher import CrbReport, crb_report, eta_tilde, fisher_information, postselected_fisher
from .meter import MeterConfig
from .montecarlo import McConfig, McEstimate, run_trials, validate_against_analytics
from .noise import (ImaginaryWvaReport, NoiseConfig, NoiseKind, find_optimal_jp,
                    p_basis_p0_moments, p_basis_x0_moments, standard_snr, x_basis_x0_moments)
from .quantum import (DensityMatrix, OrthogonalSelection, PureState, a_fi,
                      overlap_probability, plus_state, state_from_angles, weak_value)

__version__ = "0.1.0"
