"""Run configuration: INI parsing, validation, and the resolved manifest.

A run is configured by a flat sections/keys file. Every key has a default,
every default is materialized into the manifest written next to the run's
outputs, and a manifest can be fed back to ``qflsim run`` to reproduce the
metrics byte for byte. Unknown sections or keys are hard errors: a typo in
an experiment config must never silently fall back to a default.
"""

from __future__ import annotations

import configparser
import json
from pathlib import Path
from typing import Any

from .ansatz import AnsatzSpec, Entanglement
from .data import PartitionKind, PartitionStrategy
from .encoding import EncodingScheme, required_qubits
from .errors import ConfigError
from .federation import (
    AUTO_THRESHOLD,
    AggregationScheme,
    FederationConfig,
    SchemeKind,
)
from .model import ModelConfig
from .optimizer import CobylaSettings

DEFAULTS: dict[str, dict[str, Any]] = {
    "data": {
        "path": "",          # CSV to load; empty means synthesize
        "samples": 240,
        "features": 16,
        "classes": 2,
        "separation": 4.0,
    },
    "model": {
        "encoding": "amplitude",
        "reps": 3,
        "entanglement": "linear",
    },
    "federation": {
        "n_clients": 3,
        "epochs": 20,
        "participation_fraction": 1.0,
        "scheme": "simple",
        "best_pick_threshold": "auto",
        "alpha0": 0.5,
        "seed": 0,
        "partition": "iid_equal",
        "dirichlet_concentration": 1.0,
        "client_test_fraction": 0.25,
        "global_test_fraction": 0.2,
    },
    "optimizer": {
        "rho_begin": 1.0,
        "rho_end": 1e-4,
        "max_evals": 120,
    },
}


def _fail(section: str, key: str, message: str) -> ConfigError:
    full = f"{section}.{key}"
    return ConfigError(f"config key '{full}': {message}", key=full)


def _convert(section: str, key: str, raw: Any, like: Any) -> Any:
    if isinstance(like, bool):  # not used today, but bool is int's subclass
        raise AssertionError("unexpected bool default")
    try:
        if isinstance(like, int):
            return int(str(raw))
        if isinstance(like, float):
            return float(str(raw))
    except ValueError:
        kind = "an integer" if isinstance(like, int) else "a number"
        raise _fail(section, key, f"expected {kind}, got {raw!r}") from None
    return str(raw)


def load_config(path) -> dict[str, dict[str, Any]]:
    """Parse an INI config or a previously written JSON manifest.

    Returns the fully resolved {section: {key: value}} mapping with every
    default filled in. Unknown sections/keys raise ConfigError.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        raw = _read_manifest(path)
    else:
        raw = _read_ini(path)

    resolved = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    for section, entries in raw.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section '{section}'", key=section)
        for key, value in entries.items():
            if key not in DEFAULTS[section]:
                raise _fail(section, key, "unknown key")
            resolved[section][key] = _convert(section, key, value,
                                              DEFAULTS[section][key])
    return resolved


def _read_ini(path: Path) -> dict[str, dict[str, Any]]:
    parser = configparser.ConfigParser()
    try:
        with path.open(encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _read_manifest(path: Path) -> dict[str, dict[str, Any]]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse manifest: {exc}") from exc
    config = payload.get("config", payload)
    if not isinstance(config, dict):
        raise ConfigError("manifest has no 'config' mapping")
    return {str(s): dict(v) for s, v in config.items()}


_ENUMS = {
    ("model", "encoding"): {e.value for e in EncodingScheme},
    ("model", "entanglement"): {e.value for e in Entanglement},
    ("federation", "scheme"): {s.value for s in SchemeKind},
    ("federation", "partition"): {p.value for p in PartitionKind},
}


def build_federation_config(resolved: dict[str, dict[str, Any]],
                            n_features: int, n_classes: int) -> FederationConfig:
    """Turn a resolved config mapping into typed run objects.

    Raises ConfigError naming the offending key on any invalid value; the
    feature dimension and class count come from the dataset.
    """
    for (section, key), allowed in _ENUMS.items():
        value = resolved[section][key]
        if value not in allowed:
            raise _fail(section, key,
                        f"must be one of {sorted(allowed)}, got {value!r}")

    fed = resolved["federation"]
    mod = resolved["model"]
    opt = resolved["optimizer"]

    encoding = EncodingScheme(mod["encoding"])
    try:
        n_qubits = required_qubits(n_features, encoding)
        ansatz = AnsatzSpec(n_qubits, mod["reps"], Entanglement(mod["entanglement"]))
        model = ModelConfig(encoding, ansatz, n_classes)
    except Exception as exc:
        raise ConfigError(f"model configuration invalid: {exc}", key="model") from exc

    scheme_kind = SchemeKind(fed["scheme"])
    if scheme_kind is SchemeKind.BEST_PICK:
        raw_tau = fed["best_pick_threshold"]
        if raw_tau == AUTO_THRESHOLD:
            tau: float | str = AUTO_THRESHOLD
        else:
            try:
                tau = float(raw_tau)
            except ValueError:
                raise _fail("federation", "best_pick_threshold",
                            f"must be 'auto' or a number, got {raw_tau!r}") from None
        try:
            scheme = AggregationScheme(scheme_kind, tau)
        except ValueError as exc:
            raise _fail("federation", "best_pick_threshold", str(exc)) from None
    else:
        scheme = AggregationScheme(scheme_kind)

    if fed["partition"] == PartitionKind.DIRICHLET.value:
        try:
            strategy = PartitionStrategy(PartitionKind.DIRICHLET,
                                         fed["dirichlet_concentration"])
        except ValueError as exc:
            raise _fail("federation", "dirichlet_concentration", str(exc)) from None
    else:
        strategy = PartitionStrategy()

    try:
        settings = CobylaSettings(opt["rho_begin"], opt["rho_end"], opt["max_evals"])
    except ValueError as exc:
        raise ConfigError(f"config key 'optimizer': {exc}", key="optimizer") from exc
    n_params = ansatz.n_qubits * (ansatz.reps + 1)
    if settings.max_evals < n_params + 2:
        raise _fail("optimizer", "max_evals",
                    f"must be at least {n_params + 2} for {n_params} parameters")

    checks = [
        ("n_clients", fed["n_clients"] >= 1, "must be >= 1"),
        ("epochs", fed["epochs"] >= 1, "must be >= 1"),
        ("participation_fraction", 0.0 < fed["participation_fraction"] <= 1.0,
         "must be in (0, 1]"),
        ("alpha0", 0.0 <= fed["alpha0"] <= 1.0, "must be in [0, 1]"),
        ("client_test_fraction", 0.0 < fed["client_test_fraction"] < 1.0,
         "must be in (0, 1)"),
        ("global_test_fraction", 0.0 < fed["global_test_fraction"] < 1.0,
         "must be in (0, 1)"),
    ]
    for key, ok, message in checks:
        if not ok:
            raise _fail("federation", key, message)

    return FederationConfig(
        n_clients=fed["n_clients"],
        epochs=fed["epochs"],
        model=model,
        optimizer=settings,
        scheme=scheme,
        participation_fraction=fed["participation_fraction"],
        alpha0=fed["alpha0"],
        seed=fed["seed"],
        partition=strategy,
        client_test_fraction=fed["client_test_fraction"],
        global_test_fraction=fed["global_test_fraction"],
    )


def validate_synth(resolved: dict[str, dict[str, Any]]) -> None:
    data = resolved["data"]
    checks = [
        ("samples", data["samples"] >= data["classes"],
         "must be at least the number of classes"),
        ("features", data["features"] >= 1, "must be >= 1"),
        ("classes", data["classes"] >= 2, "must be >= 2"),
        ("separation", data["separation"] >= 0, "must be >= 0"),
    ]
    for key, ok, message in checks:
        if not ok:
            raise _fail("data", key, message)


def write_manifest(path, resolved: dict[str, dict[str, Any]],
                   artifacts: dict[str, str], run_info: dict[str, Any]) -> None:
    payload = {"config": resolved, "artifacts": artifacts, "run": run_info}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
