"""Triple Jaynes-Cummings simulation and multipartite entanglement detection.

Three atoms A, B, C resonantly coupled to their own cavities X, Y, Z.  The
package builds correlated initial states, evolves them exactly on a
truncated Fock space, and quantifies entanglement of the reduced atomic
state via element-wise criteria and a PPT-mixture witness SDP.
"""

from ._kernels import backend_name
from .dynamics import (
    PairUnitary,
    TruncationError,
    evolve,
    global_unitary,
    jc_unitary,
    oracle_evolve,
    pair_excitation_expectations,
    reduce,
)
from .entanglement import (
    CriteriaReport,
    b_block_coherence,
    biseparability_criteria,
    negativity,
    tracked_elements,
)
from .sdp import SdpConvergenceError, SdpProblem, SdpSolution, sdp_solve
from .states import (
    JCConfig,
    assemble_initial,
    cavity_superposition,
    qubit_superposition,
    werner_pair,
)
from .tensor import (
    DensityMatrix,
    MultipartiteShape,
    eigh,
    kron,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    psd_distance,
)
from .witness import WitnessReport, ppt_mixture_measure, verify_witness

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "PairUnitary",
    "TruncationError",
    "evolve",
    "global_unitary",
    "jc_unitary",
    "oracle_evolve",
    "pair_excitation_expectations",
    "reduce",
    "CriteriaReport",
    "b_block_coherence",
    "biseparability_criteria",
    "negativity",
    "tracked_elements",
    "SdpConvergenceError",
    "SdpProblem",
    "SdpSolution",
    "sdp_solve",
    "JCConfig",
    "assemble_initial",
    "cavity_superposition",
    "qubit_superposition",
    "werner_pair",
    "DensityMatrix",
    "MultipartiteShape",
    "eigh",
    "kron",
    "partial_trace",
    "partial_transpose",
    "permute_subsystems",
    "psd_distance",
    "WitnessReport",
    "ppt_mixture_measure",
    "verify_witness",
    "__version__",
]
