"""Adaptive global-rotation + collective-measurement preparation of Dicke states.

Numerical toolkit for the protocol that repeatedly rotates a collective
spin and projectively measures its magnetization until the target Dicke
state is reached: exact rotation-matrix columns, angle policies, the
absorbing Markov chain and its expected running times, Monte Carlo
trajectory engines, the large-j asymptotic formulas, phase-space geometry,
and the dispersive-cavity readout model.
"""

from .core import (
    Angle,
    AnglePolicy,
    BackendOverflow,
    DickePrepError,
    DomainError,
    NormDrift,
    OutOfRange,
    ParityMismatch,
    ParseError,
    ProtocolConfig,
    RegimeViolation,
    ResetPolicy,
    SingularSystem,
    SpinSpec,
    ValidationError,
    default_max_iterations,
    ring_radius,
    validate_spin,
)
from .wigner import (
    RotationColumn,
    d_column,
    d_element,
    outcome_distribution,
    rotate_state,
    transition_probabilities,
)
from .angles import (
    AnglePolicyResult,
    approx_angle_mt0,
    geometric_angle,
    optimal_angle,
    optimal_angles_for_target,
)
from .chain import (
    AbsorptionReport,
    TransitionChain,
    build_chain,
    expected_steps,
    expected_steps_for,
    mt_sweep,
    naive_expected_steps,
)
from .simulate import (
    SummaryStats,
    SymmetricState,
    TrajectoryRecord,
    monte_carlo_summary,
    rng_stream,
    run_statevector,
    run_trajectory,
)
from .asymptotics import (
    AsymptoticComparison,
    bessel_limit,
    beta_moment,
    compare_stationary_phase,
    contraction_sum,
    reset_probability,
    stationary_phase_d,
)
from .geometry import (
    QDistribution,
    geometric_transition_pdf,
    husimi_q_dicke,
    husimi_q_integral,
    husimi_q_profile,
    infinitesimal_arc_length,
    tv_distance_discretized,
)
from .cavity import (
    CavityParams,
    EstimatorResult,
    crb_variance,
    fisher_information,
    required_photons,
    resonant_peak_gap,
    simulate_weight_estimator,
    transmission,
)
from .config import load_config, parse_config

__version__ = "0.1.0"
