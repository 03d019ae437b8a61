"""Photon statistics of quadrature-threshold heralded states.

A two-mode squeezed vacuum feeds one mode (the idler) to a homodyne
detector; runs where the measured quadrature magnitude exceeds a
threshold herald the other mode (the signal).  This package computes the
heralded state's photon-number distribution, moments and Mandel Q,
phase-space profiles, heralding probabilities and the associated
threshold/optimum problems, together with independent quadrature and
Monte Carlo verification paths.
"""

__version__ = "0.1.0"

from .errors import NonConvergenceError, UndefinedQError
from .special import (erf, erfc, fock_quadrature_pdf, gaussian_tail_two_sided,
                      oscillator_eigenfunctions)
from .stats import (AcceptanceWindow, ConditionalStatistics, DetectorModel,
                    Squeezing, acceptance_probability,
                    acceptance_probability_imperfect,
                    fock_acceptance_probabilities,
                    fock_acceptance_probabilities_imperfect,
                    mandel_q, mandel_q_slope_at_zero_squeezing,
                    mean_photon_number, moment_via_generating_function,
                    photon_distribution, second_factorial_moment)
from .phase_space import (RadialGrid, husimi, husimi_radial_profile, wigner,
                          wigner_radial_profile)
from .oracles import (MonteCarloResult, fock_acceptance_probability_quadrature,
                      fock_smeared_quadrature_pdf, monte_carlo_experiment)
from .solvers import (SolveReport, efficiency_threshold,
                      minimum_poissonian_threshold,
                      optimal_squeezing_for_mandel_q,
                      solve_threshold_for_mandel_q)

__all__ = [
    "__version__",
    "NonConvergenceError", "UndefinedQError",
    "erf", "erfc", "oscillator_eigenfunctions", "fock_quadrature_pdf",
    "gaussian_tail_two_sided",
    "Squeezing", "AcceptanceWindow", "DetectorModel", "ConditionalStatistics",
    "acceptance_probability", "acceptance_probability_imperfect",
    "fock_acceptance_probabilities", "fock_acceptance_probabilities_imperfect",
    "photon_distribution", "mean_photon_number", "second_factorial_moment",
    "mandel_q", "moment_via_generating_function",
    "mandel_q_slope_at_zero_squeezing",
    "RadialGrid", "husimi", "wigner", "husimi_radial_profile",
    "wigner_radial_profile",
    "MonteCarloResult", "fock_acceptance_probability_quadrature",
    "fock_smeared_quadrature_pdf", "monte_carlo_experiment",
    "SolveReport", "solve_threshold_for_mandel_q",
    "minimum_poissonian_threshold", "optimal_squeezing_for_mandel_q",
    "efficiency_threshold",
]
