"""Federated training loop and the three server aggregation rules.

Each epoch: select participants, train each one locally with the
derivative-free optimizer, combine the resulting parameter vectors on the
server (simple mean, score-weighted mean, or best-pick), score the
aggregate on a held-out global split, broadcast it, and let every
participant blend it into its local parameters with a weight that decays
over epochs. Client datasets never cross the aggregation boundary; only
parameter vectors and scalar scores do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from . import model as model_mod
from .data import PartitionStrategy, partition, train_test_split
from .errors import FederationError
from .model import LabeledDataset, ModelConfig
from .optimizer import CobylaSettings, cobyla_minimize

AUTO_THRESHOLD = "auto"

GLOBAL_ENTITY = "global"


class SchemeKind(Enum):
    SIMPLE = "simple"
    WEIGHTED = "weighted"
    BEST_PICK = "best_pick"


@dataclass(frozen=True)
class AggregationScheme:
    kind: SchemeKind
    threshold: float | str | None = None

    def __post_init__(self):
        if self.kind is SchemeKind.BEST_PICK:
            if self.threshold == AUTO_THRESHOLD:
                return
            if not isinstance(self.threshold, (int, float)) or not 0.0 <= self.threshold <= 1.0:
                raise ValueError(
                    "best_pick threshold must be 'auto' or a number in [0, 1]"
                )
        elif self.threshold is not None:
            raise ValueError(f"{self.kind.value} aggregation takes no threshold")


@dataclass(frozen=True)
class ClientState:
    """One logical client: its data shards, parameters, and latest score."""

    client_id: int
    train: LabeledDataset
    test: LabeledDataset
    params: np.ndarray
    last_score: float = 0.0

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        if not 0.0 <= self.last_score <= 1.0:
            raise ValueError("last_score must be in [0, 1]")


@dataclass(frozen=True)
class FederationConfig:
    n_clients: int
    epochs: int
    model: ModelConfig
    optimizer: CobylaSettings = CobylaSettings(max_evals=120)
    scheme: AggregationScheme = AggregationScheme(SchemeKind.SIMPLE)
    participation_fraction: float = 1.0
    # One blend base shared by every client, or one per client.
    alpha0: float | tuple[float, ...] = 0.5
    seed: int = 0
    partition: PartitionStrategy = PartitionStrategy()
    client_test_fraction: float = 0.25
    global_test_fraction: float = 0.2

    def __post_init__(self):
        if self.n_clients < 1:
            raise ValueError("n_clients must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.participation_fraction <= 1.0:
            raise ValueError("participation_fraction must be in (0, 1]")
        bases = (self.alpha0,) if isinstance(self.alpha0, (int, float)) \
            else tuple(self.alpha0)
        if not isinstance(self.alpha0, (int, float)):
            if len(bases) != self.n_clients:
                raise ValueError("per-client alpha0 needs one entry per client")
            object.__setattr__(self, "alpha0", bases)
        if any(not 0.0 <= a <= 1.0 for a in bases):
            raise ValueError("alpha0 must be in [0, 1]")
        for name in ("client_test_fraction", "global_test_fraction"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be in (0, 1)")


@dataclass(frozen=True)
class MetricsRecord:
    epoch: int
    entity: str  # "global" or "client_<k>"
    train_loss: float | None
    train_acc: float | None
    test_acc: float


@dataclass
class MetricsLog:
    records: list[MetricsRecord] = field(default_factory=list)

    def global_records(self) -> list[MetricsRecord]:
        return [r for r in self.records if r.entity == GLOBAL_ENTITY]

    def client_records(self, epoch: int | None = None) -> list[MetricsRecord]:
        out = [r for r in self.records if r.entity != GLOBAL_ENTITY]
        if epoch is not None:
            out = [r for r in out if r.epoch == epoch]
        return out

    def to_csv_text(self) -> str:
        def fmt(value: float | None) -> str:
            return "" if value is None else repr(float(value))

        lines = ["epoch,entity,train_loss,train_acc,test_acc"]
        lines.extend(
            f"{r.epoch},{r.entity},{fmt(r.train_loss)},{fmt(r.train_acc)},{fmt(r.test_acc)}"
            for r in self.records
        )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text())


def select_participants(clients: Sequence[ClientState], fraction: float,
                        epoch: int, seed: int) -> list[ClientState]:
    """Pseudo-random subset of size max(1, ceil(fraction * K)).

    Keyed by (seed, epoch): the same pair always yields the same subset,
    returned in client-id order.
    """
    if not clients:
        raise ValueError("client list is empty")
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    size = max(1, math.ceil(fraction * len(clients)))
    rng = np.random.default_rng([seed, epoch])
    chosen = rng.choice(len(clients), size=size, replace=False)
    return [clients[i] for i in sorted(int(c) for c in chosen)]


def local_train(client: ClientState, cfg: FederationConfig) -> ClientState:
    """Run the optimizer on the client's training shard.

    Returns the client with new parameters and its test-split accuracy as
    the refreshed score; optimizer failures carry the client id.
    """
    objective = model_mod.make_objective(client.train, cfg.model)
    try:
        result = cobyla_minimize(objective, client.params, cfg.optimizer)
    except Exception as exc:
        raise FederationError(str(exc), stage="local_train",
                              client_id=client.client_id) from exc
    score = model_mod.top1_accuracy(result.best_point, client.test, cfg.model)
    return replace(client, params=result.best_point, last_score=score)


def _stack(updates: Sequence[np.ndarray]) -> np.ndarray:
    if not updates:
        raise ValueError("no updates to aggregate")
    arrs = [np.asarray(u, dtype=float).ravel() for u in updates]
    width = arrs[0].size
    if any(a.size != width for a in arrs):
        raise ValueError("updates must all have the same length")
    return np.stack(arrs)


def aggregate_simple(updates: Sequence[np.ndarray]) -> np.ndarray:
    """Plain elementwise mean of the client parameter vectors."""
    return _stack(updates).mean(axis=0)


def aggregate_weighted(updates: Sequence[np.ndarray], weights) -> np.ndarray:
    """Convex combination with explicit weights (nonnegative, summing to 1)."""
    stacked = _stack(updates)
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != stacked.shape[0]:
        raise ValueError("need exactly one weight per update")
    if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    return w @ stacked


def aggregate_best_pick(updates: Sequence[tuple[np.ndarray, float]],
                        threshold: float | str = AUTO_THRESHOLD) -> np.ndarray:
    """Score-weighted mean over the clients at or above a score threshold.

    'auto' uses the mean score as the bar. If nobody clears it, the single
    best client's parameters are returned unchanged; if the selected scores
    sum to zero they count equally.
    """
    if not updates:
        raise ValueError("no updates to aggregate")
    params = _stack([u for u, _ in updates])
    scores = np.array([float(s) for _, s in updates])
    if (scores < 0).any() or (scores > 1).any():
        raise ValueError("scores must lie in [0, 1]")
    tau = float(scores.mean()) if threshold == AUTO_THRESHOLD else float(threshold)
    selected = np.flatnonzero(scores >= tau)
    if selected.size == 0:
        return params[int(np.argmax(scores))].copy()
    picked = scores[selected]
    total = picked.sum()
    weights = picked / total if total > 0 else np.full(picked.size, 1.0 / picked.size)
    return weights @ params[selected]


def blend_local(local: np.ndarray, global_params: np.ndarray,
                alpha: float) -> np.ndarray:
    """alpha * local + (1 - alpha) * global, elementwise."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    local = np.asarray(local, dtype=float)
    global_params = np.asarray(global_params, dtype=float)
    if local.shape != global_params.shape:
        raise ValueError("local and global parameter shapes differ")
    return alpha * local + (1.0 - alpha) * global_params


def _aggregate(participants: Sequence[ClientState],
               scheme: AggregationScheme) -> np.ndarray:
    updates = [c.params for c in participants]
    if scheme.kind is SchemeKind.SIMPLE:
        return aggregate_simple(updates)
    if scheme.kind is SchemeKind.WEIGHTED:
        scores = np.array([c.last_score for c in participants])
        total = scores.sum()
        if total > 0:
            weights = scores / total
        else:  # no usable scores yet: fall back to equal contribution
            weights = np.full(len(participants), 1.0 / len(participants))
        return aggregate_weighted(updates, weights)
    return aggregate_best_pick(
        [(c.params, c.last_score) for c in participants],
        scheme.threshold if scheme.threshold is not None else AUTO_THRESHOLD,
    )


def _init_clients(cfg: FederationConfig, data: LabeledDataset,
                  seeds: list[int]) -> tuple[list[ClientState], LabeledDataset]:
    split_seed, part_seed, init_seed, *client_seeds = seeds
    pool, global_test = train_test_split(data, cfg.global_test_fraction,
                                         split_seed)
    shards = partition(pool, cfg.n_clients, cfg.partition, part_seed)
    n_params = cfg.model.ansatz.n_qubits * (cfg.model.ansatz.reps + 1)
    init_rng = np.random.default_rng(init_seed)
    clients = []
    for k, shard in enumerate(shards):
        train, test = train_test_split(shard, cfg.client_test_fraction,
                                       client_seeds[k])
        params = init_rng.uniform(-np.pi, np.pi, size=n_params)
        clients.append(ClientState(k, train, test, params))
    return clients, global_test


@dataclass(frozen=True)
class FederationResult:
    """Metrics plus the artifacts a caller may want to persist."""

    metrics: MetricsLog
    global_params: np.ndarray
    global_test: LabeledDataset


def run_federation_detailed(cfg: FederationConfig,
                            data: LabeledDataset) -> FederationResult:
    """Run the full federated loop.

    The metrics log holds one record per participating client per epoch
    (training loss and accuracy of its freshly trained parameters, accuracy
    on its own test split) plus one global record per epoch (accuracy of
    the aggregated parameters on a held-out global split). Runs are
    bit-reproducible for a fixed config.
    """
    cfg.model.validate_dataset(data)
    root = np.random.SeedSequence(cfg.seed)
    seeds = [int(s.generate_state(1)[0])
             for s in root.spawn(3 + cfg.n_clients + 1)]
    select_seed = seeds.pop()

    def staged(stage: str, epoch: int | None, client_id: int | None, fn):
        try:
            return fn()
        except FederationError as exc:
            if exc.epoch is None and epoch is not None:
                raise FederationError(
                    str(exc), epoch=epoch, stage=exc.stage or stage,
                    client_id=exc.client_id if exc.client_id is not None else client_id,
                ) from exc
            raise
        except Exception as exc:
            raise FederationError(str(exc), epoch=epoch, stage=stage,
                                  client_id=client_id) from exc

    clients, global_test = staged("setup", None, None,
                                  lambda: _init_clients(cfg, data, seeds))

    log = MetricsLog()
    global_params = clients[0].params
    for epoch in range(1, cfg.epochs + 1):
        participants = staged(
            "select", epoch, None,
            lambda: select_participants(clients, cfg.participation_fraction,
                                        epoch, select_seed),
        )
        trained: list[ClientState] = []
        for client in participants:
            updated = staged("local_train", epoch, client.client_id,
                             lambda c=client: local_train(c, cfg))
            trained.append(updated)
            clients[updated.client_id] = updated

        global_params = staged("aggregate", epoch, None,
                               lambda: _aggregate(trained, cfg.scheme))
        global_acc = staged(
            "evaluate", epoch, None,
            lambda: model_mod.top1_accuracy(global_params, global_test, cfg.model),
        )

        for client in trained:
            train_loss = model_mod.mse_loss(client.params, client.train, cfg.model)
            train_acc = model_mod.top1_accuracy(client.params, client.train, cfg.model)
            log.records.append(MetricsRecord(
                epoch, f"client_{client.client_id}",
                train_loss, train_acc, client.last_score,
            ))
        log.records.append(MetricsRecord(epoch, GLOBAL_ENTITY, None, None,
                                         global_acc))

        for client in trained:
            base = cfg.alpha0 if isinstance(cfg.alpha0, (int, float)) \
                else cfg.alpha0[client.client_id]
            alpha = base / epoch
            blended = staged(
                "broadcast", epoch, client.client_id,
                lambda c=client, a=alpha: blend_local(c.params, global_params, a),
            )
            clients[client.client_id] = replace(clients[client.client_id],
                                                params=blended)
    return FederationResult(log, global_params, global_test)


def run_federation(cfg: FederationConfig, data: LabeledDataset) -> MetricsLog:
    """Like :func:`run_federation_detailed`, returning just the metrics."""
    return run_federation_detailed(cfg, data).metrics
