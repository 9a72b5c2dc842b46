"""Minimal statevector engine: Ry/CX gates, circuit execution, exact probabilities.

Bit ordering is little-endian throughout the package: qubit 0 is the least
significant bit of a computational-basis index, so |q1 q0> = |10> lives at
index 2. All operations are pure and return new states; a state is never
mutated after construction, which makes concurrent use on distinct states
safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError

MAX_QUBITS = 25

# Gates here are exactly norm-preserving up to rounding; drift past this
# bound means a bug, not noise, so it is an error rather than a silent fix.
_NORM_ATOL = 1e-8


class GateKind(Enum):
    RY = "ry"
    CX = "cx"


@dataclass(frozen=True)
class Gate:
    """One circuit instruction: an Ry rotation or a CX entangler.

    ``qubits`` is ``(target,)`` for RY and ``(control, target)`` for CX;
    ``angle`` is radians and present only for RY.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind is GateKind.RY:
            if len(self.qubits) != 1 or self.angle is None:
                raise ValueError("RY takes one target qubit and an angle")
        else:
            if len(self.qubits) != 2 or self.angle is not None:
                raise ValueError("CX takes (control, target) and no angle")
            if self.qubits[0] == self.qubits[1]:
                raise ValueError("CX control and target must differ")


def ry(qubit: int, angle: float) -> Gate:
    return Gate(GateKind.RY, (qubit,), float(angle))


def cx(control: int, target: int) -> Gate:
    return Gate(GateKind.CX, (control, target))


@dataclass(frozen=True)
class Statevector:
    """Normalized pure state on ``n_qubits`` qubits, amplitudes indexed by basis state."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for "
                f"{self.n_qubits} qubits, got shape {amps.shape}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > _NORM_ATOL:
            raise ValueError(f"state is not normalized: |psi| = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


@dataclass(frozen=True)
class ProbabilityDistribution:
    """Exact measurement distribution over computational-basis bitstrings."""

    n_qubits: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (1 << self.n_qubits,):
            raise ValueError("probability vector length must be 2**n_qubits")
        if p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def new_zero_state(n_qubits: int) -> Statevector:
    """All-zeros state |0...0> on ``n_qubits`` qubits (1 <= n <= 25)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(
            f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}"
        )
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def _check_qubit(n_qubits: int, qubit: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {n_qubits} qubits")


def apply_gates_batch(amps: np.ndarray, n_qubits: int,
                      gates: Iterable[Gate]) -> np.ndarray:
    """Apply a gate sequence to a batch of states.

    ``amps`` has shape (batch, 2**n_qubits) and may be real or complex; one
    row per state. Returns a new array, input untouched. This is the kernel
    behind :func:`apply_circuit` and the model's vectorized evaluation path.
    """
    amps = np.asarray(amps)
    if amps.ndim != 2 or amps.shape[1] != 1 << n_qubits:
        raise ValueError("batch must have shape (m, 2**n_qubits)")
    out = amps
    for gate in gates:
        if gate.kind is GateKind.RY:
            out = _ry_batch(out, n_qubits, gate.qubits[0], gate.angle)
        else:
            out = _cx_batch(out, n_qubits, *gate.qubits)
    if out is amps:
        out = amps.copy()
    return out


def _ry_batch(amps: np.ndarray, n_qubits: int, qubit: int, angle) -> np.ndarray:
    """Ry(angle) = [[cos a/2, -sin a/2], [sin a/2, cos a/2]] on one qubit.

    ``angle`` may be a scalar or a per-row array of shape (batch,).
    """
    _check_qubit(n_qubits, qubit)
    m = amps.shape[0]
    half = 0.5 * np.asarray(angle, dtype=float)
    c = np.cos(half)
    s = np.sin(half)
    if c.ndim == 1:  # per-row angles
        c = c[:, None, None]
        s = s[:, None, None]
    # Bit `qubit` becomes the middle axis under little-endian reshaping.
    view = amps.reshape(m, 1 << (n_qubits - qubit - 1), 2, 1 << qubit)
    lo = view[:, :, 0, :]
    hi = view[:, :, 1, :]
    out = np.empty_like(view)
    out[:, :, 0, :] = c * lo - s * hi
    out[:, :, 1, :] = s * lo + c * hi
    return out.reshape(m, -1)


def _cx_batch(amps: np.ndarray, n_qubits: int, control: int,
              target: int) -> np.ndarray:
    _check_qubit(n_qubits, control)
    _check_qubit(n_qubits, target)
    if control == target:
        raise ValueError("CX control and target must differ")
    idx = np.arange(amps.shape[1])
    controlled = ((idx >> control) & 1) == 1
    src = np.where(controlled, idx ^ (1 << target), idx)
    return amps[:, src]


def _finish(state: Statevector, amps: np.ndarray) -> Statevector:
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > _NORM_ATOL:
        raise RuntimeError(
            f"internal error: norm drifted to {norm!r} after gate application"
        )
    return Statevector(state.n_qubits, amps)


def apply_ry(state: Statevector, qubit: int, theta: float) -> Statevector:
    """Rotate ``qubit`` by Ry(theta); returns a new state."""
    new = _ry_batch(state.amplitudes[None, :], state.n_qubits, qubit, theta)[0]
    return _finish(state, new)


def apply_cx(state: Statevector, control: int, target: int) -> Statevector:
    """Flip ``target`` on basis states where ``control`` is 1; returns a new state."""
    new = _cx_batch(state.amplitudes[None, :], state.n_qubits, control, target)[0]
    return _finish(state, new)


def apply_circuit(state: Statevector, gates: Sequence[Gate]) -> Statevector:
    """Apply ``gates`` left to right. The input state is never modified."""
    new = apply_gates_batch(state.amplitudes[None, :], state.n_qubits, gates)[0]
    return _finish(state, new)


def probabilities(state: Statevector) -> ProbabilityDistribution:
    """Exact (infinite-shot) measurement distribution of ``state``."""
    p = np.abs(state.amplitudes) ** 2
    # Clean up rounding so the distribution invariant holds exactly enough.
    return ProbabilityDistribution(state.n_qubits, p / p.sum())


def sample_counts(state: Statevector, shots: int, seed: int) -> np.ndarray:
    """Shot-sampled measurement counts, one entry per basis state.

    Optional alternative to the exact sampler; deterministic for a fixed
    seed. Not used by the training pipeline.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dist = probabilities(state)
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, dist.probs)


def basis_state(n_qubits: int, index: int) -> Statevector:
    """Computational basis state |index> (little-endian index)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(
            f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}"
        )
    if not 0 <= index < (1 << n_qubits):
        raise IndexError(f"basis index {index} out of range")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[index] = 1.0
    return Statevector(n_qubits, amps)


def bitstring_popcounts(n_qubits: int) -> np.ndarray:
    """Number of set bits for every basis index of an ``n_qubits`` register."""
    idx = np.arange(1 << n_qubits, dtype=np.uint32)
    counts = np.zeros_like(idx)
    for shift in range(n_qubits):
        counts += (idx >> shift) & 1
    return counts.astype(np.int64)


def qubits_for_dim(dim: int) -> int:
    """Smallest register holding ``dim`` amplitudes (minimum one qubit)."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return max(1, (dim - 1).bit_length())
