"""Classical-to-quantum data encoders: basis, angle, and amplitude.

Amplitude encoding is the production path: a d-dimensional feature vector
is zero-padded to the next power of two, normalized, and stored directly
as state amplitudes, so d features need only ceil(log2 d) qubits. Angle
and basis encoding spend one qubit per feature and exist mainly for
comparison; they hit the simulator's 25-qubit ceiling quickly.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import qstate
from .errors import CapacityError, EncodingError
from .qstate import MAX_QUBITS, Statevector


class EncodingScheme(Enum):
    BASIS = "basis"
    ANGLE = "angle"
    AMPLITUDE = "amplitude"


def required_qubits(d: int, scheme: EncodingScheme) -> int:
    """Qubits needed to encode a d-dimensional feature vector.

    AMPLITUDE packs d values into ceil(log2 d) qubits (minimum 1); ANGLE
    and BASIS need one qubit per feature. Raises CapacityError when the
    answer exceeds the simulator bound.
    """
    if d < 1:
        raise ValueError(f"feature dimension must be >= 1, got {d}")
    if scheme is EncodingScheme.AMPLITUDE:
        n = qstate.qubits_for_dim(d)
    else:
        n = d
    if n > MAX_QUBITS:
        raise CapacityError(
            f"{scheme.value} encoding of {d} features needs {n} qubits, "
            f"exceeding the {MAX_QUBITS}-qubit simulator bound"
        )
    return n


def _as_features(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise EncodingError("feature vector must be 1-dimensional and nonempty")
    if not np.isfinite(arr).all():
        raise EncodingError("feature vector contains non-finite entries")
    return arr


def amplitude_encode(x) -> Statevector:
    """Store x / ||x|| as the amplitudes of a ceil(log2 d)-qubit state.

    The vector is zero-padded up to the register size first; an all-zero
    input has no valid quantum state and raises EncodingError. Negative
    entries are fine (real negative amplitudes are legal).
    """
    arr = _as_features(x)
    n = required_qubits(arr.size, EncodingScheme.AMPLITUDE)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise EncodingError("cannot amplitude-encode an all-zero vector")
    amps = np.zeros(1 << n, dtype=complex)
    amps[: arr.size] = arr / norm
    return Statevector(n, amps)


def angle_encode(x) -> Statevector:
    """One qubit per feature: qubit i ends up as Ry(x_i)|0>."""
    arr = _as_features(x)
    n = required_qubits(arr.size, EncodingScheme.ANGLE)
    state = qstate.new_zero_state(n)
    for i, theta in enumerate(arr):
        state = qstate.apply_ry(state, i, theta)
    return state


def basis_encode(bits) -> Statevector:
    """Binary feature vector to the matching computational basis state.

    bits[i] sets qubit i, so [1, 0] lands on basis index 1 under the
    little-endian convention.
    """
    arr = _as_features(bits)
    n = required_qubits(arr.size, EncodingScheme.BASIS)
    if not np.isin(arr, (0.0, 1.0)).all():
        raise EncodingError("basis encoding requires entries in {0, 1}")
    index = int(np.dot(arr.astype(np.int64), 1 << np.arange(n, dtype=np.int64)))
    return qstate.basis_state(n, index)


def encode(x, scheme: EncodingScheme) -> Statevector:
    if scheme is EncodingScheme.AMPLITUDE:
        return amplitude_encode(x)
    if scheme is EncodingScheme.ANGLE:
        return angle_encode(x)
    return basis_encode(x)


def encode_batch(features: np.ndarray, scheme: EncodingScheme) -> np.ndarray:
    """Encode a (m, d) feature matrix into a (m, 2**n) state matrix.

    Row i equals ``encode(features[i], scheme).amplitudes`` up to dtype;
    amplitudes are returned real (float64) since all three encoders produce
    real states. This is the fast path for loss evaluation over a dataset.
    """
    feats = np.asarray(features, dtype=float)
    if feats.ndim != 2 or feats.shape[0] < 1:
        raise EncodingError("feature matrix must have shape (m, d) with m >= 1")
    if not np.isfinite(feats).all():
        raise EncodingError("feature matrix contains non-finite entries")
    m, d = feats.shape
    n = required_qubits(d, scheme)
    dim = 1 << n

    if scheme is EncodingScheme.AMPLITUDE:
        norms = np.linalg.norm(feats, axis=1)
        if (norms == 0.0).any():
            bad = int(np.flatnonzero(norms == 0.0)[0])
            raise EncodingError(f"sample {bad} is all-zero; cannot amplitude-encode")
        out = np.zeros((m, dim))
        out[:, :d] = feats / norms[:, None]
        return out

    if scheme is EncodingScheme.ANGLE:
        out = np.zeros((m, dim))
        out[:, 0] = 1.0
        for i in range(d):
            out = qstate._ry_batch(out, n, i, feats[:, i])
        return out

    if not np.isin(feats, (0.0, 1.0)).all():
        raise EncodingError("basis encoding requires entries in {0, 1}")
    indices = feats.astype(np.int64) @ (1 << np.arange(d, dtype=np.int64))
    out = np.zeros((m, dim))
    out[np.arange(m), indices] = 1.0
    return out
