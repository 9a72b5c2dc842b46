"""Command-line entry point: run experiments, synthesize data, evaluate models.

Exit codes: 0 success, 1 configuration error (the message names the
offending key), 2 runtime error during a federation run, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import AnsatzSpec, Entanglement
from .config import (
    build_federation_config,
    load_config,
    validate_synth,
    write_manifest,
)
from .data import load_csv, save_csv, synth_genomic
from .encoding import EncodingScheme
from .errors import ConfigError, DatasetParseError, FederationError, QflError
from .federation import SchemeKind, run_federation_detailed
from .model import LabeledDataset, ModelConfig, mse_loss, top1_accuracy

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qflsim",
        description="Quantum federated learning simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a federated training run")
    run.add_argument("--config", required=True,
                     help="INI config file or manifest.json from a prior run")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None,
                     help="override the configured seed")
    run.add_argument("--scheme", choices=[s.value for s in SchemeKind],
                     default=None, help="override the aggregation scheme")

    synth = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    synth.add_argument("--samples", type=int, default=240)
    synth.add_argument("--features", type=int, default=16)
    synth.add_argument("--classes", type=int, default=2)
    synth.add_argument("--separation", type=float, default=4.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="output CSV path")

    ev = sub.add_parser("eval", help="score saved parameters on a dataset")
    ev.add_argument("--params", required=True, help="global_params.json path")
    ev.add_argument("--data", required=True, help="dataset CSV path")
    ev.add_argument("--config", default=None,
                    help="optional run config to cross-check the model shape")
    return parser


def _load_dataset(resolved) -> LabeledDataset:
    data_cfg = resolved["data"]
    if data_cfg["path"]:
        return load_csv(data_cfg["path"])
    validate_synth(resolved)
    return synth_genomic(
        data_cfg["samples"], data_cfg["features"], data_cfg["classes"],
        data_cfg["separation"], resolved["federation"]["seed"],
    )


def _params_payload(cfg, values: np.ndarray) -> dict:
    return {
        "encoding": cfg.model.encoding.value,
        "n_qubits": cfg.model.ansatz.n_qubits,
        "reps": cfg.model.ansatz.reps,
        "entanglement": cfg.model.ansatz.entanglement.value,
        "n_classes": cfg.model.n_classes,
        "values": [float(v) for v in values],
    }


def cmd_run(args) -> int:
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()

    resolved = load_config(args.config)
    if args.seed is not None:
        resolved["federation"]["seed"] = args.seed
    if args.scheme is not None:
        resolved["federation"]["scheme"] = args.scheme

    data = _load_dataset(resolved)
    n_classes = resolved["data"]["classes"]
    cfg = build_federation_config(resolved, data.n_features, n_classes)
    try:
        cfg.model.validate_dataset(data)
    except ValueError as exc:
        raise ConfigError(f"dataset does not fit the model: {exc}",
                          key="data") from exc

    result = run_federation_detailed(cfg, data)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.csv"
    params_path = out_dir / "global_params.json"
    test_path = out_dir / "global_test.csv"
    manifest_path = out_dir / "manifest.json"

    result.metrics.write_csv(metrics_path)
    params_path.write_text(
        json.dumps(_params_payload(cfg, result.global_params), indent=2) + "\n",
        encoding="utf-8",
    )
    save_csv(result.global_test, test_path)
    write_manifest(
        manifest_path,
        resolved,
        artifacts={
            "metrics": metrics_path.name,
            "global_params": params_path.name,
            "global_test": test_path.name,
        },
        run_info={
            "started_utc": started.isoformat(),
            "duration_s": round(time.perf_counter() - t0, 3),
            "version": __version__,
        },
    )
    final_global = result.metrics.global_records()[-1]
    print(f"run complete: {cfg.epochs} epochs, "
          f"final global test accuracy {final_global.test_acc:.4f}")
    print(f"artifacts written to {out_dir}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.features < 1:
        raise ConfigError("features must be >= 1", key="features")
    if args.classes < 2:
        raise ConfigError("classes must be >= 2", key="classes")
    if args.samples < args.classes:
        raise ConfigError("samples must be at least the number of classes",
                          key="samples")
    if args.separation < 0:
        raise ConfigError("separation must be >= 0", key="separation")
    data = synth_genomic(args.samples, args.features, args.classes,
                         args.separation, args.seed)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(data, out)
    print(f"wrote {data.n_samples} samples x {data.n_features} features to {out}")
    return EXIT_OK


def _load_params(path: Path) -> tuple[ModelConfig, np.ndarray]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse parameters file: {exc}") from exc
    try:
        model = ModelConfig(
            EncodingScheme(payload["encoding"]),
            AnsatzSpec(int(payload["n_qubits"]), int(payload["reps"]),
                       Entanglement(payload["entanglement"])),
            int(payload["n_classes"]),
        )
        values = np.asarray(payload["values"], dtype=float)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"parameters file is malformed: {exc}") from exc
    expected = model.ansatz.n_qubits * (model.ansatz.reps + 1)
    if values.shape != (expected,):
        raise ConfigError(
            f"parameters file holds {values.size} values, "
            f"ansatz needs {expected}"
        )
    return model, values


def cmd_eval(args) -> int:
    model, values = _load_params(Path(args.params))
    data = load_csv(args.data)
    if args.config is not None:
        resolved = load_config(args.config)
        cfg = build_federation_config(resolved, data.n_features,
                                      resolved["data"]["classes"])
        if cfg.model != model:
            raise ConfigError(
                "saved parameters do not match the configured model", key="model"
            )
    try:
        model.validate_dataset(data)
    except ValueError as exc:
        raise ConfigError(str(exc), key="data") from exc
    loss = mse_loss(values, data, model)
    acc = top1_accuracy(values, data, model)
    print(f"loss={loss!r}")
    print(f"top1_accuracy={acc!r}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "synth": cmd_synth, "eval": cmd_eval}
    try:
        return handlers[args.command](args)
    except (ConfigError, DatasetParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FederationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QflError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
