"""Randomized-scheduling consensus dynamics with decaying perturbations.

Each round k: every robot flips an independent coin with success
probability p_i; on success it publishes its position plus Gaussian noise
with variance sigma_i^2 * q_i^(2k), otherwise its previously published
value stays in force (the held value starts at the public prior mean, so
a robot that never transmits reveals nothing).  Every robot then moves
toward the held values of its neighbours:

    x_i(k+1) = x_i(k) + sum_j a_ij (xt_j(k) - x_i(k)).

``run`` records rows k = 0..T: positions x(k) before the move, the coin
vector, the realized noise, the held outputs xt(k), and the disagreement
V(k) (the largest coordinatewise range over the stacked state (x, xt)).
Two runs with the same (scenario, horizon, seed, trial) are bit-identical
under a fixed backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend, rng
from .graph import Graph

# noise variances below this are clamped (numerically zero, avoids subnormals)
VARIANCE_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class AgentParams:
    """Per-robot protocol parameters and public prior."""

    p: float
    sigma2: float
    q: float
    prior_mean: np.ndarray
    prior_var: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0,1], got {self.p}")
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must be in (0,1), got {self.q}")
        if not self.prior_var > 0.0:
            raise ValueError(f"prior_var must be positive, got {self.prior_var}")
        mean = np.asarray(self.prior_mean, dtype=float).reshape(2)
        mean.setflags(write=False)
        object.__setattr__(self, "prior_mean", mean)


def scheduling_violations(agents, alpha) -> list[str]:
    """Check the calibration constraint alpha_i < q_i against a graph."""
    problems = []
    for i, (a, ag) in enumerate(zip(alpha, agents), start=1):
        if not a < ag.q:
            problems.append(
                f"alpha < q violated for robot {i} (alpha={a!r}, q={ag.q!r})"
            )
    return problems


def noise_variance(params: AgentParams, k: int) -> float:
    """Perturbation variance at round k: sigma^2 q^(2k), floored."""
    return max(params.sigma2 * params.q ** (2 * k), VARIANCE_FLOOR)


@dataclass
class SimState:
    """State between rounds: positions x(k) and held outputs xt(k-1)."""

    k: int
    x: np.ndarray
    xt: np.ndarray


@dataclass
class StepRecord:
    k: int
    gamma: np.ndarray
    noise: np.ndarray
    x: np.ndarray
    xt: np.ndarray
    V: float


@dataclass
class TrajectoryRecord:
    """Full recorded run: row k holds x(k), gamma(k), noise(k), xt(k), V(k)."""

    x0: np.ndarray
    gamma: np.ndarray           # (T+1, n) uint8
    noise: np.ndarray           # (T+1, n, 2), zero rows where gamma=0
    x: np.ndarray               # (T+1, n, 2)
    xt: np.ndarray              # (T+1, n, 2)
    V: np.ndarray               # (T+1,)
    seed: int
    trial: int
    horizon: int
    init_mode: str = "fixed"
    backend_name: str = field(default="")

    @property
    def n(self) -> int:
        return self.x.shape[1]


def disagreement(eta) -> float:
    """Largest pairwise infinity-norm difference over rows of eta.

    Equals the largest column range, so it is O(rows * cols) instead of
    quadratic in the number of rows.
    """
    e = np.asarray(eta, dtype=float)
    if e.shape[0] == 0:
        return 0.0
    return float((e.max(axis=0) - e.min(axis=0)).max())


def _param_arrays(agents):
    p = np.array([a.p for a in agents])
    sigma = np.sqrt(np.array([a.sigma2 for a in agents]))
    q = np.array([a.q for a in agents])
    mu = np.vstack([a.prior_mean for a in agents])
    r = np.array([a.prior_var for a in agents])
    return p, sigma, q, mu, r


def sample_initial_states(agents, seed, trial=0) -> np.ndarray:
    """Draw x(0) from each robot's public prior (keyed, order-independent)."""
    _, _, _, mu, r = _param_arrays(agents)
    stream = rng.Stream(seed=seed, trial=trial)
    return mu + np.sqrt(r)[:, None] * stream.init_pairs(len(agents))


def step(state: SimState, graph: Graph, agents, stream: rng.Stream,
         *, zero_noise: bool = False):
    """One protocol round; returns the advanced state and its record.

    Reference implementation used by tests; ``run`` executes the same
    recurrence through the compiled kernels.
    """
    n = graph.n
    p, sigma, q, mu, _ = _param_arrays(agents)
    k = state.k
    g = stream.transmission_coins(n, k, p)
    if zero_noise:
        v = np.zeros((n, 2))
    else:
        z = stream.noise_pairs(n, k)
        var = np.maximum(sigma**2 * q ** (2 * k), VARIANCE_FLOOR)
        v = np.where(g[:, None], np.sqrt(var)[:, None] * z, 0.0)
    xt = np.where(g[:, None], state.x + v, state.xt)
    V = disagreement(np.hstack([state.x, xt]))
    x_next = (1.0 - graph.degrees)[:, None] * state.x + graph.weights @ xt
    record = StepRecord(k=k, gamma=g.astype(np.uint8), noise=v,
                        x=state.x.copy(), xt=xt.copy(), V=V)
    return SimState(k=k + 1, x=x_next, xt=xt), record


def run(scenario, horizon=None, seed=None, *, trial: int = 0,
        zero_noise: bool = False) -> TrajectoryRecord:
    """Simulate the scenario for `horizon` rounds and record everything.

    Initial positions come from the scenario (fixed x0, or sampled from
    the priors with the same keyed stream used for all other draws).
    ``zero_noise`` silences the perturbation while keeping the coin flips,
    which isolates the pure consensus map for validation.
    """
    graph = scenario.graph
    agents = scenario.agents
    T = int(scenario.horizon if horizon is None else horizon)
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    sd = int(scenario.seed if seed is None else seed)

    if scenario.init_mode == "fixed":
        x0 = np.asarray(scenario.x0, dtype=float).copy()
    else:
        x0 = sample_initial_states(agents, sd, trial)

    p, sigma, q, mu, _ = _param_arrays(agents)
    if zero_noise:
        sigma = np.zeros_like(sigma)
    kern = backend.kernels()
    gamma, noise, xs, xts, V = kern.trajectory(
        graph.weights, 1.0 - graph.degrees, p, sigma, q, mu, x0,
        T, np.uint64(sd), trial,
    )
    return TrajectoryRecord(
        x0=x0, gamma=gamma, noise=noise, x=xs, xt=xts, V=V,
        seed=sd, trial=trial, horizon=T, init_mode=scenario.init_mode,
        backend_name=kern.NAME,
    )
