"""Encoded-qubit state transfer over uniform XY spin chains."""

__version__ = "0.1.0"

from .chain import (
    ChainSpec,
    EncodingState,
    ModeTable,
    NumericalAssertionError,
    PropagatedState,
    make_chain,
    make_encoding,
    mode_table,
)
from .encodings import (
    OptimalEncodingResult,
    XiParameters,
    encoding_distance,
    make_psi_k,
    make_xi_k,
    optimal_encoding,
    transfer_block,
)
from .fidelity import (
    FieldDecomposition,
    FidelityReport,
    Variant,
    field_decomposition,
    fidelity_direct,
    fidelity_field_term,
    fidelity_xi,
    fidelity_xi_avg,
    fidelity_xi_max,
)
from .optimizer import (
    FieldOptimum,
    ParityPrediction,
    PeakResult,
    find_peak,
    h0_parity_prediction,
    optimal_field,
    sweep,
)
from .propagator import (
    ReducedAmplitude,
    amplitude,
    amplitude_row,
    dense_oracle,
    propagate,
    reduced_amplitude,
)
