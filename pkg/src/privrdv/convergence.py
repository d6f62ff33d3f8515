"""Desk-scale verification of the almost-sure rendezvous argument.

The stacked state (x, held outputs) evolves through row-stochastic
matrices, so the disagreement V(k) (largest coordinatewise range) cannot
grow except through injected noise.  Over a window of L rounds in which
every robot transmits, the update matrix contracts V by at least
epsilon_floor; such a window occurs with probability (prod_i p_i)^L, and
the expected noise contribution of any window is bounded by

    beta(k) = sum_{s=0}^{L-1} 2 sigma_max(k+s) sqrt(2 log n),

with sigma_max(k) the largest per-robot noise scale at round k.  Together:

    E[V(k+L) | state at k] <= (1 - epsilon_floor p_event) V(k) + beta(k),

which ``contraction_check`` estimates by Monte Carlo restarts from a
frozen state.  ``rendezvous_check`` measures terminal disagreement across
seeds against a regression threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend, rng
from .dynamics import disagreement, run
from .graph import derive_quantities


@dataclass
class ContractionReport:
    k: int
    L: int
    lhs: float
    rhs: float
    p_event: float
    beta_k: float
    trials: int
    lhs_se: float
    v_start: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k, "L": self.L, "lhs": self.lhs, "rhs": self.rhs,
            "p_event": self.p_event, "beta": self.beta_k,
            "trials": self.trials, "lhs_se": self.lhs_se,
            "v_start": self.v_start, "pass": self.passed,
        }


@dataclass
class RendezvousSummary:
    seeds: list
    v_final: np.ndarray
    v_window_max: np.ndarray
    threshold: float
    min_fraction: float
    n_pass: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "v_final": [float(v) for v in self.v_final],
            "v_window_max": [float(v) for v in self.v_window_max],
            "threshold": self.threshold,
            "min_fraction": self.min_fraction,
            "n_pass": self.n_pass,
            "pass": self.passed,
        }


def _sigma_max(agents, k) -> float:
    return max(math.sqrt(a.sigma2) * a.q**k for a in agents)


def window_noise_bound(k: int, L: int, agents, n_agents: int) -> float:
    """beta(k): expected-noise bound accumulated over an L-round window."""
    if n_agents < 1:
        raise ValueError("need at least one robot")
    c = 2.0 * math.sqrt(2.0 * math.log(n_agents)) if n_agents > 1 else 0.0
    return c * sum(_sigma_max(agents, k + s) for s in range(L))


def all_transmit_probability(agents, L: int) -> float:
    """Probability that every robot transmits in each of L straight rounds."""
    prod = 1.0
    for a in agents:
        prod *= a.p
    return prod**L


def gaussian_max_bounds(k: int, agents, n_agents: int) -> tuple[float, float]:
    """The two analytic constants bounding E[max pairwise noise gap].

    Returns (2 sigma_max sqrt(2 log n), 2 sigma_max sqrt(log 2n)); for
    n >= 2 the first dominates and is the one checks compare against.
    """
    s = _sigma_max(agents, k)
    return (2.0 * s * math.sqrt(2.0 * math.log(n_agents)) if n_agents > 1 else 0.0,
            2.0 * s * math.sqrt(math.log(2.0 * n_agents)))


def gaussian_max_check(n_samples: int, k: int, agents, n_agents: int,
                       seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of E[max_{i,j} ||v_i - v_j||_inf] vs its bound."""
    scales = np.array([math.sqrt(a.sigma2) * a.q**k for a in agents[:n_agents]])
    robots = np.arange(n_agents)
    samples = np.arange(n_samples)[:, None]
    z1, z2 = rng.standard_normal_pair(seed, samples, robots[None, :], k)
    v = np.stack([z1, z2], axis=-1) * scales[None, :, None]
    if n_agents < 2:
        empirical = 0.0
    else:
        ranges = v.max(axis=1) - v.min(axis=1)
        empirical = float(ranges.max(axis=1).mean())
    bound = max(gaussian_max_bounds(k, agents, n_agents))
    return empirical, bound


def contraction_check(scenario, k: int, trials: int, seed: int,
                      *, zero_noise: bool = False) -> ContractionReport:
    """Monte Carlo test of the one-window contraction inequality.

    Freezes the state after round k of a scenario run (the scenario's own
    seed), then replays L fresh rounds `trials` times with randomness
    keyed by `seed`.  Passes when the sample mean of V(k+L) is below the
    analytic right side plus 3 standard errors.
    """
    derived = derive_quantities(scenario.graph)
    L = derived.L
    record = run(scenario, horizon=max(k, 1), zero_noise=zero_noise)
    x_frozen = np.ascontiguousarray(record.x[k])
    xt_frozen = np.ascontiguousarray(record.xt[k])
    v_start = float(record.V[k])

    p, sigma, q = (np.array([a.p for a in scenario.agents]),
                   np.sqrt(np.array([a.sigma2 for a in scenario.agents])),
                   np.array([a.q for a in scenario.agents]))
    if zero_noise:
        sigma = np.zeros_like(sigma)
    kern = backend.kernels()
    v_end = kern.contraction_samples(
        scenario.graph.weights, derived.alpha, p, sigma, q,
        x_frozen, xt_frozen, int(k), int(L), int(trials), np.uint64(seed),
    )
    lhs = float(v_end.mean())
    se = float(v_end.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0

    p_event = all_transmit_probability(scenario.agents, L)
    agents_eff = scenario.agents
    beta_k = 0.0 if zero_noise else window_noise_bound(k, L, agents_eff, scenario.graph.n)
    rhs = (1.0 - derived.epsilon_floor * p_event) * v_start + beta_k
    return ContractionReport(
        k=k, L=L, lhs=lhs, rhs=rhs, p_event=p_event, beta_k=beta_k,
        trials=trials, lhs_se=se, v_start=v_start,
        passed=bool(lhs <= rhs + 3.0 * se),
    )


def rendezvous_check(scenario, horizon: int, seeds, *, threshold: float = 1e-6,
                     min_fraction: float = 0.95) -> RendezvousSummary:
    """Terminal disagreement across seeds against a regression threshold.

    Reports V(horizon) and the max over the trailing window of length L
    for every seed; passes when the required fraction of seeds lands
    below the threshold.
    """
    derived = derive_quantities(scenario.graph)
    seeds = list(seeds)
    v_final = np.empty(len(seeds))
    v_window = np.empty(len(seeds))
    for idx, s in enumerate(seeds):
        record = run(scenario, horizon=horizon, seed=s)
        v_final[idx] = record.V[-1]
        v_window[idx] = record.V[max(0, horizon - derived.L):].max()
    n_pass = int(np.count_nonzero(v_final < threshold))
    return RendezvousSummary(
        seeds=seeds, v_final=v_final, v_window_max=v_window,
        threshold=threshold, min_fraction=min_fraction, n_pass=n_pass,
        passed=bool(n_pass >= math.ceil(min_fraction * len(seeds))),
    )
