"""Quantum federated learning simulator.

A self-contained statevector engine, data encoders, a real-amplitudes
variational classifier, a derivative-free trust-region optimizer, and a
federated training loop with three server aggregation schemes.
"""

from .ansatz import AnsatzSpec, Entanglement, build_bound_circuit, param_count
from .encoding import (
    EncodingScheme,
    amplitude_encode,
    angle_encode,
    basis_encode,
    required_qubits,
)
from .errors import (
    CapacityError,
    ConfigError,
    DatasetParseError,
    EncodingError,
    FederationError,
    OptimizationError,
    ParameterShapeError,
    QflError,
)
from .federation import (
    AggregationScheme,
    ClientState,
    FederationConfig,
    FederationResult,
    MetricsLog,
    MetricsRecord,
    SchemeKind,
    aggregate_best_pick,
    aggregate_simple,
    aggregate_weighted,
    blend_local,
    local_train,
    run_federation,
    run_federation_detailed,
    select_participants,
)
from .model import (
    LabeledDataset,
    ModelConfig,
    forward,
    interpret_parity,
    mse_loss,
    top1_accuracy,
)
from .optimizer import CobylaSettings, OptimResult, cobyla_minimize
from .qstate import (
    Gate,
    ProbabilityDistribution,
    Statevector,
    apply_circuit,
    apply_cx,
    apply_ry,
    new_zero_state,
    probabilities,
)

__version__ = "0.1.0"
