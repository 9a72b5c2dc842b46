"""Real-amplitudes ansatz: Ry rotation layers alternating with CX entanglers.

The circuit is an initial Ry layer followed by ``reps`` blocks of
(entangling layer, Ry layer), giving n_qubits * (reps + 1) trainable
angles. With real input amplitudes the output amplitudes stay real, which
is the property that gives the family its name.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterShapeError
from .qstate import Gate, cx, ry


class Entanglement(Enum):
    LINEAR = "linear"
    FULL = "full"


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    reps: int = 3
    entanglement: Entanglement = Entanglement.LINEAR

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.reps < 0:
            raise ValueError("reps must be >= 0")


def param_count(spec: AnsatzSpec) -> int:
    """Number of free angles: one Ry per qubit in each of reps + 1 layers."""
    return spec.n_qubits * (spec.reps + 1)


def entangler_pairs(spec: AnsatzSpec) -> list[tuple[int, int]]:
    """(control, target) pairs of one entangling layer."""
    n = spec.n_qubits
    if spec.entanglement is Entanglement.LINEAR:
        return [(i, i + 1) for i in range(n - 1)]
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def build_bound_circuit(spec: AnsatzSpec, params) -> tuple[Gate, ...]:
    """Bind a parameter vector to the ansatz and return the gate sequence.

    Parameters are consumed positionally, qubit by qubit within each Ry
    layer; same (spec, params) always yields the identical sequence.
    """
    values = np.asarray(params, dtype=float).ravel()
    expected = param_count(spec)
    if values.size != expected:
        raise ParameterShapeError(
            f"ansatz expects {expected} parameters, got {values.size}"
        )
    if not np.isfinite(values).all():
        raise ParameterShapeError("parameter vector contains non-finite entries")

    n = spec.n_qubits
    pairs = entangler_pairs(spec)
    gates: list[Gate] = [ry(q, values[q]) for q in range(n)]
    for rep in range(1, spec.reps + 1):
        gates.extend(cx(c, t) for c, t in pairs)
        base = rep * n
        gates.extend(ry(q, values[base + q]) for q in range(n))
    return tuple(gates)
