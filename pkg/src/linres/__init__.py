"""Cayley-Hamilton analysis of linear reservoir computers.

The state of a linear reservoir driven by a scalar signal factorises as
``x_0 = C s``: the controllability matrix ``C`` depends only on the
network, the encoded input ``s`` on the network and the signal. This
package builds the four classic reservoir topologies, computes both
factors, analyses the rank and nullspace of ``C``, and runs the
delayed-recall experiments that tie the rank to memory.
"""

__version__ = "0.1.0"

from .ch_encoding import (
    CharCoeffs,
    EncodedInput,
    char_coeffs,
    companion_matrix,
    encode_input,
    encode_input_cyclic,
    encode_input_delay,
    phi_sequence,
    reservoir_char_coeffs,
    truncation_horizon,
)
from .controllability import (
    ControllabilityReport,
    analyze,
    controllability_matrix,
    cyclic_controllability_tilde,
    expected_column_norms,
    indistinguishability_demo,
)
from .exceptions import (
    ConditioningError,
    ConvergenceError,
    DivergenceError,
    FullRankError,
    LinresError,
    NumericalError,
    ValidationError,
)
from .simulate import (
    ExperimentConfig,
    MemoryCurve,
    accuracy,
    memory_curve,
    nrmse,
    rank_scan,
    run_reservoir,
    sr_sweep,
)
from .topology import (
    Reservoir,
    ReservoirSpec,
    RescaleMode,
    TopologyKind,
    build_cyclic,
    build_delay_line,
    build_random,
    build_reservoir,
    build_wigner,
    check_aperiodic,
)
