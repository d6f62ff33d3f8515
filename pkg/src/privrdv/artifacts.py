"""Result emission: trajectory CSV, JSON reports, and run manifests.

Floats are printed with 17 significant digits so CSV content round-trips
exactly and identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .config import ScenarioConfig, config_hash

TRAJECTORY_COLUMNS = ["k", "robot", "x1", "x2", "xt1", "xt2", "gamma", "v1", "v2", "V"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(path, record) -> Path:
    """One row per (round, robot); the disagreement V repeats per round."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for k in range(record.horizon + 1):
            for i in range(record.n):
                writer.writerow([
                    k, i + 1,
                    fmt(record.x[k, i, 0]), fmt(record.x[k, i, 1]),
                    fmt(record.xt[k, i, 0]), fmt(record.xt[k, i, 1]),
                    int(record.gamma[k, i]),
                    fmt(record.noise[k, i, 0]), fmt(record.noise[k, i, 1]),
                    fmt(record.V[k]),
                ])
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def run_manifest(command: str, cfg: ScenarioConfig, seed: int, outputs,
                 **extra) -> dict:
    from . import __version__, backend

    manifest = {
        "command": command,
        "config_hash": config_hash(cfg),
        "config_source": cfg.source,
        "seed": seed,
        "backend": backend.backend_name(),
        "version": __version__,
        "outputs": [str(o) for o in outputs],
    }
    manifest.update(extra)
    return manifest
