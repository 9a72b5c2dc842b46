"""Dataset ingestion, synthesis, client partitioning, and splitting.

The CSV schema is a header row ``f0,f1,...,f{d-1},label`` followed by one
sample per line; ``label`` is a nonnegative integer class index. The
synthetic generator stands in for private tabular data: each class gets a
random unit prototype direction, scaled by a separation factor, plus unit
Gaussian noise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DatasetParseError
from .model import LabeledDataset


class PartitionKind(Enum):
    IID_EQUAL = "iid_equal"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class PartitionStrategy:
    kind: PartitionKind = PartitionKind.IID_EQUAL
    concentration: float | None = None

    def __post_init__(self):
        if self.kind is PartitionKind.DIRICHLET:
            if self.concentration is None or self.concentration <= 0:
                raise ValueError("dirichlet partitioning needs concentration > 0")
        elif self.concentration is not None:
            raise ValueError("concentration only applies to dirichlet partitioning")


def expected_header(d: int) -> list[str]:
    return [f"f{i}" for i in range(d)] + ["label"]


def load_csv(path) -> LabeledDataset:
    """Read a dataset file, reporting schema problems with line numbers."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetParseError("file is empty") from None
        header = [h.strip() for h in header]
        if not header or header[-1] != "label":
            raise DatasetParseError(
                "last header column must be 'label'", line=1
            )
        d = len(header) - 1
        if d < 1 or header[:-1] != expected_header(d)[:-1]:
            raise DatasetParseError(
                f"feature columns must be f0..f{max(d - 1, 0)}", line=1
            )

        features: list[list[float]] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise DatasetParseError(
                    f"expected {d + 1} columns, found {len(row)}", line=lineno
                )
            try:
                features.append([float(v) for v in row[:-1]])
            except ValueError as exc:
                raise DatasetParseError(f"bad feature value: {exc}", line=lineno) from None
            try:
                label = int(row[-1])
            except ValueError:
                raise DatasetParseError(
                    f"label must be an integer, got {row[-1]!r}", line=lineno
                ) from None
            if label < 0:
                raise DatasetParseError("label must be nonnegative", line=lineno)
            labels.append(label)

    if not features:
        raise DatasetParseError("file contains a header but no samples")
    return LabeledDataset(np.array(features), np.array(labels))


def save_csv(data: LabeledDataset, path) -> None:
    """Write a dataset in the schema ``load_csv`` reads.

    Floats are written with ``repr`` so a load round-trips bit for bit.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(expected_header(data.n_features))
        for row, label in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def synth_genomic(m: int, d: int, n_classes: int, separation: float,
                  seed) -> LabeledDataset:
    """Class-prototype blobs: unit direction per class, scaled, plus noise.

    Labels are balanced to within one sample and the row order is shuffled;
    everything is a pure function of the arguments.
    """
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    if m < n_classes:
        raise ValueError("need at least one sample per class")
    if d < 1:
        raise ValueError("need at least one feature")
    if separation < 0:
        raise ValueError("separation must be >= 0")
    rng = np.random.default_rng(seed)

    prototypes = rng.standard_normal((n_classes, d))
    prototypes /= np.linalg.norm(prototypes, axis=1, keepdims=True)

    base, extra = divmod(m, n_classes)
    counts = [base + (1 if c < extra else 0) for c in range(n_classes)]
    labels = np.repeat(np.arange(n_classes), counts)
    noise = rng.standard_normal((m, d))
    features = separation * prototypes[labels] + noise

    order = rng.permutation(m)
    return LabeledDataset(features[order], labels[order])


def _shuffled_class_indices(labels: np.ndarray, rng) -> list[np.ndarray]:
    return [rng.permutation(np.flatnonzero(labels == c))
            for c in np.unique(labels)]


def partition(data: LabeledDataset, k: int, strategy: PartitionStrategy,
              seed) -> list[LabeledDataset]:
    """Split a dataset into k disjoint client shards covering all of it."""
    if k < 1:
        raise ValueError("need at least one client")
    if k > data.n_samples:
        raise ValueError(
            f"cannot split {data.n_samples} samples across {k} clients"
        )
    rng = np.random.default_rng(seed)
    per_class = _shuffled_class_indices(data.labels, rng)
    assignments: list[list[int]] = [[] for _ in range(k)]

    if strategy.kind is PartitionKind.IID_EQUAL:
        # Deal class by class with a rolling cursor, so per-class counts and
        # total shard sizes both stay within one of each other.
        cursor = 0
        for idx in per_class:
            for i in idx:
                assignments[cursor % k].append(int(i))
                cursor += 1
    else:
        for idx in per_class:
            proportions = rng.dirichlet(np.full(k, strategy.concentration))
            cuts = (np.cumsum(proportions)[:-1] * idx.size).round().astype(int)
            for client, chunk in enumerate(np.split(idx, cuts)):
                assignments[client].extend(int(i) for i in chunk)
        _rebalance_empty(assignments)

    return [data.subset(sorted(rows)) for rows in assignments]


def _rebalance_empty(assignments: list[list[int]]) -> None:
    """Move single samples from the largest shards into any empty ones."""
    for client, rows in enumerate(assignments):
        if rows:
            continue
        donor = max(range(len(assignments)), key=lambda j: len(assignments[j]))
        if len(assignments[donor]) <= 1:
            raise ValueError("not enough samples to give every client one")
        assignments[client].append(assignments[donor].pop())


def train_test_split(data: LabeledDataset, test_fraction: float,
                     seed) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified split; both sides nonempty, deterministic per seed.

    The test side gets round(test_fraction * m) samples overall, spread
    across classes proportionally (largest-remainder rounding).
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    m = data.n_samples
    n_test = round(test_fraction * m)
    if n_test < 1 or n_test >= m:
        raise ValueError(
            f"test_fraction {test_fraction} leaves an empty side for {m} samples"
        )
    rng = np.random.default_rng(seed)
    per_class = _shuffled_class_indices(data.labels, rng)

    quotas = [test_fraction * idx.size for idx in per_class]
    take = [int(q) for q in quotas]
    remainders = [q - t for q, t in zip(quotas, take)]
    # Hand out the leftover slots by largest remainder, lowest class first
    # on ties, never exceeding a class's population.
    order = sorted(range(len(per_class)),
                   key=lambda c: (-remainders[c], c))
    shortfall = n_test - sum(take)
    for c in order:
        if shortfall <= 0:
            break
        if take[c] < per_class[c].size:
            take[c] += 1
            shortfall -= 1
    # Extremely skewed class sizes can still leave a shortfall; top up from
    # any class with spare samples.
    for c in range(len(per_class)):
        while shortfall > 0 and take[c] < per_class[c].size:
            take[c] += 1
            shortfall -= 1

    test_rows: list[int] = []
    train_rows: list[int] = []
    for idx, t in zip(per_class, take):
        test_rows.extend(int(i) for i in idx[:t])
        train_rows.extend(int(i) for i in idx[t:])
    return data.subset(sorted(train_rows)), data.subset(sorted(test_rows))
