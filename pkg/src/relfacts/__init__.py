"""Observer-relative quantum states, facts and their stability."""
from .errors import (
    ConfigurationError,
    ContractViolation,
    DegenerateMeasurementError,
    PreconditionError,
    RelfactsError,
    SizingError,
    UsageError,
)
from .facts import (
    AmplitudeChain,
    FactPartition,
    StabilityReport,
    chain_from_state,
    classify_fact,
    decohere,
    interference_deficit,
    interference_witness,
    overlap_vectors,
    p_collapse,
    p_unitary,
    stability_deviation,
)
from .linalg import dagger, kron, partial_trace, spectral_decompose
from .perspectives import (
    CrossCheckResult,
    FactRecord,
    PerspectiveLedger,
    PremeasureStep,
    correlation_probability,
    cross_check,
    measure,
    premeasure,
    unitary_view,
)
from .qstate import Observable, State, SystemRegistry, embed, expectation, pointer, spin_z
from .rng import SplitMix64
from .scenario import ParseError, format_scenario, interpret, parse

__version__ = "0.1.0"
