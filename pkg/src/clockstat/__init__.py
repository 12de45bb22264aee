"""Statistical characterization of stochastic click clocks.

A click clock marks time by counting the stochastic detection events of a
continuously monitored open quantum system; the readout is tau(t) = N(t)/R
with R the asymptotic click rate.  This package computes the rate, the
count fluctuations, and the timing error delta_tau from the spectrum of the
tilted generator, and validates them against quantum-jump Monte Carlo
trajectory ensembles and the analytic photon waiting-time distribution of a
coherently driven two-level atom.
"""

__version__ = "0.1.0"

from .errors import (
    BranchError,
    ClockstatError,
    ConvergenceError,
    DegeneracyError,
    DimensionError,
    InconsistencyError,
    PropagatorError,
    SpectralAnomalyError,
    SteadyStateError,
    ValidationError,
)
from .linalg import Spectrum, eigen_spectrum, expm_apply, max_real_eigenpair
from .lindblad import (
    JumpChannel,
    LindbladModel,
    TwoLevelParams,
    biased_liouvillian,
    build_two_level_model,
    counted_click_rate,
    devectorize,
    liouvillian,
    model_from_json,
    model_to_json,
    steady_state,
    trace_distance,
    validate_density_matrix,
    vectorize,
)
from .ldp import (
    CumulantEstimates,
    counting_cumulants,
    delta_tau,
    n_statistics,
    raw_cumulant_diff,
    refine_minimum,
    sweep_delta_tau,
    theta,
    theta_closed_form_tla,
)
from .qjmc import (
    ClockSeries,
    EnsembleStats,
    Trajectory,
    clock_readout,
    ensemble_conditional_states,
    ensemble_statistics,
    ensemble_statistics_from,
    simulate_trajectory,
    trajectory_ensemble,
)
from .wtd import (
    KsReport,
    WtdProfile,
    build_profile,
    find_peaks,
    ks_critical_value,
    ks_distance,
    peak_census,
    renewal_crosscheck,
    sample_waiting_time,
    sample_waiting_times,
    waiting_time_moments,
    wtd_pdf,
)
from .quadrature import adaptive_simpson, cell_integrals
