"""First-order perturbation theory with unequal forward and backward
Hamiltonians.

The backward-evolving state feels the perturbation scaled by an extra factor
(1 + lambda), where lambda may depend on the final state and on time;
transition probabilities are the product of forward and backward amplitudes
and pick up a lambda-dependent correction on top of the Born rule.  The
package computes these probabilities (quadrature and closed forms), the
modified golden-rule rates they imply for a quasi-continuum, and the
pre/post-selected (ABL) statistics used as the standard-QM baseline.
"""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidBand,
    NonFiniteEntry,
    NonFiniteIntegrand,
    NonHermitianPerturbation,
    NumericalError,
    OrthogonalSelection,
    ResonanceOutsideBand,
    RetropertError,
    SchemaError,
    ToleranceNotReached,
    UnitarityLost,
    ValidationError,
    WrongPerturbationKind,
)
from .model import (
    ConstantPerturbation,
    ConstantTimeProfile,
    HarmonicPerturbation,
    LambdaProfile,
    QuantumSystem,
    SampledPerturbation,
    SampledTimeProfile,
    SinusoidTimeProfile,
    TimeWindow,
    TransitionChannel,
    build_system,
    matrix_element,
    resolve_lambda,
)
from .numerics import (
    PropagatorSettings,
    QuadratureResult,
    QuadratureSettings,
    integrate_complex,
    propagate_backward_exact,
    propagate_exact,
)
from .rates import (
    FLAG_BAND_EDGE,
    FLAG_TOO_EARLY,
    FLAG_VALID,
    BandSpec,
    HarmonicRateResult,
    RateResult,
    finite_time_band_rate,
    golden_rule_rate,
    harmonic_rate,
)
from .transitions import (
    AmplitudePair,
    TransitionResult,
    amplitude_pair,
    backward_amplitude,
    first_order_residual,
    forward_amplitude,
    oscillatory_probability,
    phase_integral,
    pr_qm_oscillatory,
    pr_retro_constant_perturbation,
    transition_probability,
)
from .tsvf import (
    ProjectiveMeasurement,
    TwoStateVector,
    abl_probability,
    abl_reduces_to_born_check,
    born_probability,
)

__all__ = [
    "__version__",
    # errors
    "RetropertError", "ValidationError", "DimensionMismatch",
    "NonHermitianPerturbation", "NonFiniteEntry", "IndexOutOfRange",
    "WrongPerturbationKind", "InvalidBand", "ResonanceOutsideBand",
    "SchemaError", "OrthogonalSelection", "NumericalError",
    "NonFiniteIntegrand", "ToleranceNotReached", "UnitarityLost",
    # model
    "QuantumSystem", "ConstantPerturbation", "HarmonicPerturbation",
    "SampledPerturbation", "LambdaProfile", "ConstantTimeProfile",
    "SinusoidTimeProfile", "SampledTimeProfile", "TimeWindow",
    "TransitionChannel", "build_system", "matrix_element", "resolve_lambda",
    # numerics
    "QuadratureSettings", "PropagatorSettings", "QuadratureResult",
    "integrate_complex", "propagate_exact", "propagate_backward_exact",
    # transitions
    "AmplitudePair", "TransitionResult", "forward_amplitude",
    "backward_amplitude", "amplitude_pair", "transition_probability",
    "pr_qm_oscillatory", "pr_retro_constant_perturbation",
    "oscillatory_probability", "phase_integral", "first_order_residual",
    # rates
    "BandSpec", "RateResult", "HarmonicRateResult", "golden_rule_rate",
    "finite_time_band_rate", "harmonic_rate",
    "FLAG_VALID", "FLAG_TOO_EARLY", "FLAG_BAND_EDGE",
    # tsvf
    "TwoStateVector", "ProjectiveMeasurement", "abl_probability",
    "born_probability", "abl_reduces_to_born_check",
]
