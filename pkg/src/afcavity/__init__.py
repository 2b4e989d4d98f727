"""Atomic frequency comb memory in an asymmetric optical cavity.

Closed-form efficiency relations (:mod:`afcavity.analytic`), a sampled comb
(:mod:`afcavity.comb`), a time-domain cavity/ensemble solver
(:mod:`afcavity.dynamics`), parameter sweeps (:mod:`afcavity.sweep`) and a
command-line front end (:mod:`afcavity.cli`).
"""

__version__ = "0.1.0"

from .analytic import (
    EfficiencyBreakdown,
    SteadyStateResult,
    echo_amplitude_high_finesse,
    echo_amplitude_mode_model,
    reflection_exact,
    reflection_high_finesse,
    single_pass_efficiency,
    steady_state_exact,
    steady_state_high_finesse,
    total_efficiency,
    total_efficiency_limit,
)
from .comb import CombKernel, SpectralComb, build_comb, dephasing_factor, kernel
from .dynamics import (
    EfficiencyReport,
    FieldRecord,
    InputPulse,
    ModeCavity,
    RegimeWarning,
    SimulationConfig,
    calibrate_coupling,
    extract_efficiency,
    simulate,
    steady_state_reflection,
)
from .errors import (
    AFCError,
    CalibrationError,
    ConfigurationError,
    ConsistencyError,
    DegenerateCavityError,
    DiscretizationError,
    IntegratorBlowupError,
    ParameterError,
    UnphysicalGainError,
    ValidityError,
)
from .model import (
    CavityParams,
    CombParams,
    DerivedCavity,
    ToothShape,
    averaged_depth,
    cavity_finesse,
    cooperativity,
    derive_cavity,
    eta_f,
    kappa_from_linewidth,
    linewidth_from_kappa,
    matched_r1,
)
from .sweep import (
    MatchedPoint,
    SweepResult,
    SweepSpec,
    TimeDomainScenario,
    find_matched_point,
    loss_sensitivity,
    run_sweep,
)
