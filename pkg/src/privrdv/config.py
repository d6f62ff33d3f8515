"""Scenario configuration: JSON schema, validation, canonical round-trip."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .dynamics import AgentParams, scheduling_violations
from .graph import validate_graph, weight_violations, Graph

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Carries every violation found in a scenario, not just the first."""

    def __init__(self, violations, source="scenario"):
        self.violations = list(violations)
        lines = "\n  - ".join(self.violations)
        super().__init__(f"invalid {source}:\n  - {lines}")


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    graph: Graph
    agents: tuple
    init_mode: str                 # "sample" or "fixed"
    x0: np.ndarray | None
    horizon: int
    seed: int
    reported_delta_lower_bounds: tuple | None = None
    source: str = field(default="<dict>", compare=False)

    @property
    def n(self) -> int:
        return self.graph.n

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)


def _schema():
    with resources.files("privrdv").joinpath("schema/scenario.schema.json").open() as fh:
        return json.load(fh)


def config_from_dict(raw: dict, source: str = "<dict>") -> ScenarioConfig:
    """Validate a raw scenario dict, collecting all violations."""
    import jsonschema

    validator = jsonschema.Draft202012Validator(_schema())
    violations = [
        f"schema: {'/'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
        for err in sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    ]
    if violations:
        raise ConfigError(violations, source)

    weights = raw["graph"]
    violations.extend(weight_violations(weights))
    n_rows = len(weights)
    if len(raw["agents"]) != n_rows:
        violations.append(
            f"agents count {len(raw['agents'])} does not match graph size {n_rows}"
        )

    agents = []
    for i, spec in enumerate(raw["agents"], start=1):
        if not 0.0 < spec["p"] <= 1.0:
            violations.append(f"p must be in (0,1] for robot {i} (p={spec['p']!r})")
        if not spec["sigma"] > 0.0:
            violations.append(f"sigma must be positive for robot {i}")
        if not 0.0 < spec["q"] < 1.0:
            violations.append(f"q must be in (0,1) for robot {i} (q={spec['q']!r})")
        if not spec["prior_var"] > 0.0:
            violations.append(f"prior_var must be positive for robot {i}")
        if not violations:
            agents.append(AgentParams(
                p=float(spec["p"]), sigma2=float(spec["sigma"]) ** 2,
                q=float(spec["q"]), prior_mean=spec["prior_mean"],
                prior_var=float(spec["prior_var"]),
            ))

    init = raw["init"]
    x0 = None
    if init["mode"] == "fixed":
        x0 = np.asarray(init.get("x0", []), dtype=float)
        if x0.shape != (n_rows, 2):
            violations.append(
                f"fixed init requires x0 of shape ({n_rows}, 2), got {x0.shape}"
            )
        elif not np.isfinite(x0).all():
            violations.append("fixed init x0 has non-finite entries")

    horizon = raw["horizon"]
    if horizon < 1:
        violations.append(f"horizon must be >= 1, got {horizon}")
    seed = raw["seed"]
    if not 0 <= seed <= MAX_SEED:
        violations.append(f"seed must fit in 64 bits, got {seed}")

    if len(agents) == n_rows and not weight_violations(weights):
        graph = validate_graph(weights)
        alpha = 1.0 - graph.degrees
        violations.extend(scheduling_violations(agents, alpha))
    if violations:
        raise ConfigError(violations, source)

    reported = raw.get("reported_delta_lower_bounds")
    if x0 is not None:
        x0.setflags(write=False)
    return ScenarioConfig(
        graph=validate_graph(weights), agents=tuple(agents),
        init_mode=init["mode"], x0=x0, horizon=int(horizon), seed=int(seed),
        reported_delta_lower_bounds=tuple(reported) if reported else None,
        source=source,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError([f"parse error: {err}"], str(path)) from err
    return config_from_dict(raw, source=str(path))


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out = {
        "graph": [[float(v) for v in row] for row in cfg.graph.weights],
        "agents": [
            {
                "p": a.p,
                "sigma": float(np.sqrt(a.sigma2)),
                "q": a.q,
                "prior_mean": [float(v) for v in a.prior_mean],
                "prior_var": a.prior_var,
            }
            for a in cfg.agents
        ],
        "init": {"mode": cfg.init_mode},
        "horizon": cfg.horizon,
        "seed": cfg.seed,
    }
    if cfg.init_mode == "fixed":
        out["init"]["x0"] = [[float(v) for v in row] for row in cfg.x0]
    if cfg.reported_delta_lower_bounds is not None:
        out["reported_delta_lower_bounds"] = list(cfg.reported_delta_lower_bounds)
    return out


def config_hash(cfg: ScenarioConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def bundled_scenario_path(name: str = "paper_sec4") -> Path:
    """Path of a scenario shipped with the package."""
    return Path(resources.files("privrdv").joinpath(f"scenarios/{name}.json"))
