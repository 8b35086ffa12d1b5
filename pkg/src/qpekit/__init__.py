"""State-vector simulation of quantum phase estimation circuits."""

from .circuit import Barrier, Circuit, ConditionalGate, GateKind, GateOp, Measure
from .errors import (
    CapacityError, DegenerateSampleError, DomainError, InconsistentEstimatesError,
    PhaseParseError, QpeError, RewriteIneligibleError,
)
from .estimation import (
    KitaevSample, PhaseEstimate, decode_histogram, digit_accuracy, kitaev_estimate_from_counts,
    kitaev_point_estimate, kitaev_stitch_bits,
)
from .qpe import (
    BitOrder, PhaseFraction, QpeConfig, Variant, build_acp_qpe, build_iqft_qpe,
    build_iqft_subcircuit, build_iterative_qpe, build_kitaev_pair, remove_ancilla,
)
from .statevector import (
    NoiseModel, ShotHistogram, StateVector, apply_gate, exact_distribution, measure_qubit,
    new_basis_state, run_shots,
)

__version__ = "0.1.0"
