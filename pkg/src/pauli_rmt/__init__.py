"""Random-matrix analysis of Pauli quantum state tomography.

Sample tomographic error matrices under naive and qubit-wise-commuting
measurement schemes, compare their spectra with the Wigner semicircle, and
check closed-form predictions for the trace-norm error.
"""

from .analytics import (
    Prediction,
    empirical_failure_prob,
    markov_shots,
    predict,
    predict_gue,
    rephys_excess,
    rephysicalize,
    water_fill,
)
from .covariance import (
    CovarianceModel,
    VarStats,
    closed_form_vbar,
    naive_variances,
    qwc_sigma,
    qwc_variances,
    trial_ratio,
    var_stats,
)
from .experiments import ExperimentConfig, ExperimentResult, aggregate, persist, run_experiment
from .pauli import PauliString, analyze, compatible, joint_weight, multiply, synthesize, weight
from .protocols import ShotPlan, replication_rng, sample_gue, sample_naive, sample_qwc, sample_surrogate
from .spectral import SemicircleLaw, SpectralMeasure, eigenvalues, semicircle, trace_norm, wasserstein_sorted
from .states import StateModel, build_state, density_matrix, setting_distribution

__version__ = "0.1.0"
