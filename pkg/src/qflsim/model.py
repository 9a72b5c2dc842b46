"""Variational quantum classifier: encode, run the ansatz, read out classes.

The forward pass measures the full circuit output distribution and maps
each basis bitstring to a class by parity (popcount mod n_classes), so the
class probabilities always form a proper distribution. Training minimizes
a mean squared error: for two classes the predicted class-1 probability is
regressed against the 0/1 label with a 1/(2M) factor; with more classes
the squared error is summed over one-hot targets before the same factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import encoding as encoding_mod
from . import qstate
from .ansatz import AnsatzSpec, build_bound_circuit
from .encoding import EncodingScheme, required_qubits
from .errors import ParameterShapeError
from .qstate import ProbabilityDistribution


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix (m, d) with one integer class label per row."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ValueError("features must be a (m, d) matrix with m >= 1")
        if labels.shape != (feats.shape[0],):
            raise ValueError("labels must be one integer per sample")
        if labels.min() < 0:
            raise ValueError("labels must be nonnegative class indices")
        if not np.isfinite(feats).all():
            raise ValueError("features contain non-finite entries")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class ModelConfig:
    encoding: EncodingScheme
    ansatz: AnsatzSpec
    n_classes: int = 2

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")

    def validate_dataset(self, data: LabeledDataset) -> None:
        """Check the dataset fits this model's register and label range."""
        needed = required_qubits(data.n_features, self.encoding)
        if needed != self.ansatz.n_qubits:
            raise ValueError(
                f"{self.encoding.value} encoding of {data.n_features} features "
                f"needs {needed} qubits but the ansatz has {self.ansatz.n_qubits}"
            )
        if int(data.labels.max()) >= self.n_classes:
            raise ValueError(
                f"label {int(data.labels.max())} outside the "
                f"{self.n_classes}-class range"
            )


@lru_cache(maxsize=None)
def _parity_classes(n_qubits: int, n_classes: int) -> np.ndarray:
    classes = qstate.bitstring_popcounts(n_qubits) % n_classes
    classes.setflags(write=False)
    return classes


def interpret_parity(dist: ProbabilityDistribution, n_classes: int) -> np.ndarray:
    """Collapse a basis distribution to class probabilities by popcount mod C."""
    if n_classes < 2:
        raise ValueError("n_classes must be >= 2")
    classes = _parity_classes(dist.n_qubits, n_classes)
    out = np.zeros(n_classes)
    np.add.at(out, classes, dist.probs)
    return out


def _class_probs_batch(params, states: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    """(m, 2**n) encoded states -> (m, n_classes) class probabilities."""
    gates = build_bound_circuit(cfg.ansatz, params)
    final = qstate.apply_gates_batch(states, cfg.ansatz.n_qubits, gates)
    probs = np.abs(final) ** 2 if np.iscomplexobj(final) else final**2
    classes = _parity_classes(cfg.ansatz.n_qubits, cfg.n_classes)
    out = np.zeros((states.shape[0], cfg.n_classes))
    for c in range(cfg.n_classes):
        out[:, c] = probs[:, classes == c].sum(axis=1)
    return out


def forward(params, x, cfg: ModelConfig) -> np.ndarray:
    """Class-probability vector for one feature vector; deterministic."""
    state = encoding_mod.encode(x, cfg.encoding)
    if state.n_qubits != cfg.ansatz.n_qubits:
        raise ParameterShapeError(
            f"encoded state has {state.n_qubits} qubits, "
            f"ansatz expects {cfg.ansatz.n_qubits}"
        )
    gates = build_bound_circuit(cfg.ansatz, params)
    final = qstate.apply_circuit(state, gates)
    return interpret_parity(qstate.probabilities(final), cfg.n_classes)


def mse_loss_from_predictions(predictions: np.ndarray, labels: np.ndarray,
                              n_classes: int = 2) -> float:
    """Mean squared error over a batch of model outputs.

    ``predictions`` is either the class-1 probability per sample (two-class
    case, regressed against 0/1 labels) or a (m, n_classes) probability
    matrix (squared error summed over one-hot targets). Either way the sum
    is scaled by 1/(2m).
    """
    labels = np.asarray(labels, dtype=np.int64)
    m = labels.size
    if m == 0:
        raise ValueError("cannot evaluate loss on an empty dataset")
    preds = np.asarray(predictions, dtype=float)
    if n_classes == 2 and preds.ndim == 1:
        residuals = labels.astype(float) - preds
        return float(residuals @ residuals / (2.0 * m))
    if preds.shape != (m, n_classes):
        raise ValueError("predictions must be (m,) class-1 probabilities or (m, C)")
    onehot = np.zeros((m, n_classes))
    onehot[np.arange(m), labels] = 1.0
    diff = onehot - preds
    return float((diff * diff).sum() / (2.0 * m))


def _batch_predictions(params, states: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    probs = _class_probs_batch(params, states, cfg)
    if cfg.n_classes == 2:
        return probs[:, 1]
    return probs


def make_objective(data: LabeledDataset, cfg: ModelConfig) -> Callable[[np.ndarray], float]:
    """Loss-of-parameters closure with the dataset encoded once up front.

    Returns the same values as :func:`mse_loss` on the same inputs; use it
    inside optimizer loops to avoid re-encoding per evaluation.
    """
    cfg.validate_dataset(data)
    states = encoding_mod.encode_batch(data.features, cfg.encoding)
    labels = data.labels

    def objective(params) -> float:
        preds = _batch_predictions(params, states, cfg)
        return mse_loss_from_predictions(preds, labels, cfg.n_classes)

    return objective


def mse_loss(params, data: LabeledDataset, cfg: ModelConfig) -> float:
    """Mean squared error of the classifier over ``data``."""
    return make_objective(data, cfg)(params)


def top1_accuracy(params, data: LabeledDataset, cfg: ModelConfig) -> float:
    """Fraction of samples whose argmax class matches the label.

    Ties break toward the lowest class index.
    """
    cfg.validate_dataset(data)
    states = encoding_mod.encode_batch(data.features, cfg.encoding)
    probs = _class_probs_batch(params, states, cfg)
    predicted = probs.argmax(axis=1)
    return float((predicted == data.labels).mean())


def majority_class_fraction(data: LabeledDataset) -> float:
    """Accuracy of always answering the most common label."""
    counts = np.bincount(data.labels)
    return float(counts.max() / data.n_samples)
