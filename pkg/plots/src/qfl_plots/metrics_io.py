"""Parsing and validation of the metrics.csv schema.

Expected header: ``epoch,entity,train_loss,train_acc,test_acc``. Client
rows (``entity`` = ``client_<k>``) carry all three metrics; ``global``
rows leave the training columns empty.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

EXPECTED_HEADER = ["epoch", "entity", "train_loss", "train_acc", "test_acc"]
GLOBAL_ENTITY = "global"


class MetricsSchemaError(ValueError):
    """A metrics file does not match the documented CSV schema."""


@dataclass
class Series:
    epochs: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    test_acc: list[float] = field(default_factory=list)


@dataclass
class RunSeries:
    """All per-entity curves from one metrics file."""

    label: str
    clients: dict[str, Series]
    global_series: Series


def run_label(path: Path) -> str:
    """Name for output files: the file stem, or the parent directory when
    the file carries the generic name ``metrics``."""
    if path.stem == "metrics" and path.parent.name:
        return path.parent.name
    return path.stem


def _parse_float(value: str, column: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise MetricsSchemaError(
            f"line {line}: column '{column}' is not a number: {value!r}"
        ) from None


def read_metrics(path) -> RunSeries:
    path = Path(path)
    clients: dict[str, Series] = {}
    global_series = Series()

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MetricsSchemaError("file is empty") from None
        if header != EXPECTED_HEADER:
            missing = [c for c in EXPECTED_HEADER if c not in header]
            extra = [c for c in header if c not in EXPECTED_HEADER]
            problems = []
            if missing:
                problems.append(f"missing column(s) {missing}")
            if extra:
                problems.append(f"unexpected column(s) {extra}")
            if not problems:
                problems.append(f"column order must be {EXPECTED_HEADER}")
            raise MetricsSchemaError("; ".join(problems))

        rows = 0
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(EXPECTED_HEADER):
                raise MetricsSchemaError(
                    f"line {line}: expected {len(EXPECTED_HEADER)} columns, "
                    f"found {len(row)}"
                )
            epoch_s, entity, loss_s, tacc_s, acc_s = (v.strip() for v in row)
            try:
                epoch = int(epoch_s)
            except ValueError:
                raise MetricsSchemaError(
                    f"line {line}: column 'epoch' is not an integer: {epoch_s!r}"
                ) from None
            test_acc = _parse_float(acc_s, "test_acc", line)
            if entity == GLOBAL_ENTITY:
                series = global_series
            else:
                series = clients.setdefault(entity, Series())
                series.train_loss.append(_parse_float(loss_s, "train_loss", line))
                series.train_acc.append(_parse_float(tacc_s, "train_acc", line))
            series.epochs.append(epoch)
            series.test_acc.append(test_acc)
            rows += 1

    if rows == 0:
        raise MetricsSchemaError("file contains a header but no rows")
    return RunSeries(run_label(path), clients, global_series)
