"""Ground-truth privacy auditing via exact Gaussian posterior inference.

What an eavesdropper sees (all published outputs plus the transmission
pattern) can be rewritten, causally and invertibly, as an innovation
sequence: at transmission rounds

    z_i(k) = alpha_i^k x_i(0) + v_i(k),

and z_i(k) = 0 elsewhere.  Only these innovations carry information about
the initial position, so the adversary's posterior on x_i(0) is the
conjugate Gaussian update of the public prior under a scalar linear
observation model, with isotropic posterior variance tau^2 given by

    1/tau^2 = 1/r + sum_{k: sent} alpha^(2k) / sigma^2(k).

The pointwise leakage of prior N(mu, r I) versus posterior N(m, tau^2 I)
has the closed form

    ell = log(r / tau^2) + ||m - mu||^2 / (2 (r - tau^2)),

the log of the maximal posterior/prior density ratio over the plane.
``monte_carlo_audit`` samples ell exactly (drawing innovations straight
from the observation model, no network simulation needed) and tests the
calibrated (eps, delta) guarantee empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend, rng
from .calibration import CalibrationInputs, delta_series_bound, calibrate_design_rule
from .dynamics import AgentParams, VARIANCE_FLOOR, run
from .graph import Graph

WILSON_Z99 = 2.5758293035489004   # two-sided 99% normal quantile


@dataclass(frozen=True, eq=False)
class EavesdropperView:
    """Everything visible on the channel up to round t."""

    xt_hist: np.ndarray      # (t+1, n, 2) held outputs
    gamma_hist: np.ndarray   # (t+1, n) transmission indicators

    def __post_init__(self):
        if self.xt_hist.shape[:2] != self.gamma_hist.shape:
            raise ValueError("xt_hist and gamma_hist disagree on (t, n)")

    @classmethod
    def from_record(cls, record) -> "EavesdropperView":
        return cls(xt_hist=record.xt, gamma_hist=record.gamma)


@dataclass(frozen=True, eq=False)
class InnovationSequence:
    z: np.ndarray            # (t+1, n, 2), zero rows where gamma=0


@dataclass(frozen=True)
class PosteriorSummary:
    """Isotropic Gaussian posterior of one robot's initial position."""

    mean: np.ndarray
    var: float
    precision_gain: float


def _neighbour_history_weights(view: EavesdropperView, graph: Graph):
    """Running per-robot mix of past neighbour outputs.

    w_i(k) = alpha_i * w_i(k-1) + sum_j a_ij xt_j(k-1), w_i(0) = 0; this is
    exactly the observable part of x_i(k), so subtracting it from a fresh
    output isolates alpha^k x_i(0) + noise.
    """
    t1, n, _ = view.xt_hist.shape
    alpha = 1.0 - graph.degrees
    w = np.zeros((t1, n, 2))
    for k in range(1, t1):
        w[k] = alpha[:, None] * w[k - 1] + graph.weights @ view.xt_hist[k - 1]
    return w


def innovation_transform(view: EavesdropperView, graph: Graph) -> InnovationSequence:
    """Causal transform of the observed outputs into innovations."""
    w = _neighbour_history_weights(view, graph)
    g = view.gamma_hist[..., None].astype(float)
    return InnovationSequence(z=g * (view.xt_hist - w))


def reconstruct_view(z: InnovationSequence, gamma_hist, graph: Graph,
                     prior_means) -> EavesdropperView:
    """Invert ``innovation_transform`` (exact up to floating-point error).

    Held outputs start at the public prior means; each round either
    reassembles a fresh output from its innovation plus the reconstructed
    history, or holds the previous value.
    """
    gam = np.asarray(gamma_hist, dtype=np.uint8)
    t1, n = gam.shape
    alpha = 1.0 - graph.degrees
    mu = np.vstack([np.asarray(m, dtype=float).reshape(2) for m in prior_means])
    xt = np.empty((t1, n, 2))
    w = np.zeros((n, 2))
    prev = mu.copy()
    for k in range(t1):
        if k > 0:
            w = alpha[:, None] * w + graph.weights @ xt[k - 1]
        sent = gam[k].astype(bool)
        xt[k] = np.where(sent[:, None], z.z[k] + w, prev)
        prev = xt[k]
    return EavesdropperView(xt_hist=xt, gamma_hist=gam)


def initial_state_posterior(z_i, gamma_i, params: AgentParams,
                            alpha: float) -> PosteriorSummary:
    """Conjugate Gaussian update of the prior from one robot's innovations.

    Terms are accumulated in the factored form (alpha/q)^k * (z/q^k) to
    stay in range at large k; the noise variance schedule mirrors the
    simulator, including its floor.
    """
    z_i = np.asarray(z_i, dtype=float)
    sent = np.asarray(gamma_i, dtype=bool)
    ks = np.nonzero(sent)[0]
    r = params.prior_var
    if ks.size == 0:
        return PosteriorSummary(mean=params.prior_mean.copy(), var=r,
                                precision_gain=0.0)
    var_k = np.maximum(params.sigma2 * params.q ** (2.0 * ks), VARIANCE_FLOOR)
    a_k = alpha**ks.astype(float)
    gain = float(np.sum(a_k * a_k / var_k))
    weighted = np.sum((a_k / var_k)[:, None] * z_i[ks], axis=0)
    tau2 = 1.0 / (1.0 / r + gain)
    mean = tau2 * (params.prior_mean / r + weighted)
    return PosteriorSummary(mean=mean, var=float(tau2), precision_gain=gain)


def pointwise_leakage(post: PosteriorSummary, prior_mean, prior_var: float) -> float:
    """Exact leakage of the posterior against the prior (in nats).

    Maximizes the log density ratio of the two isotropic Gaussians in
    closed form; zero when the posterior equals the prior.
    """
    r = float(prior_var)
    tau2 = post.var
    if tau2 > r * (1.0 + 1e-12):
        raise ValueError(
            f"posterior variance {tau2} exceeds prior variance {r}; "
            "observations cannot lose information, input is corrupted"
        )
    if tau2 >= r:
        return 0.0
    shift = float(np.sum((post.mean - np.asarray(prior_mean, dtype=float)) ** 2))
    return math.log(r / tau2) + 0.5 * shift / (r - tau2)


def wilson_interval(successes: int, n: int, z: float = WILSON_Z99):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


@dataclass
class AuditReport:
    robot: int
    epsilon: float
    trials: int
    horizon: int
    coverage: float
    wilson_ci: tuple[float, float]
    delta_series: float
    delta_design: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "robot": self.robot,
            "epsilon": self.epsilon,
            "trials": self.trials,
            "horizon": self.horizon,
            "coverage": self.coverage,
            "wilson_ci": list(self.wilson_ci),
            "delta_theorem1": self.delta_series,
            "delta_corollary": self.delta_design,
            "pass": self.passed,
        }


def leakage_trials(agents, alpha, robot: int, trials: int, horizon: int,
                   seed: int, *, p_override=None, trial0: int = 0):
    """Raw keyed leakage samples for one robot (direct observation model).

    Returns (ell, precision_gain, quad, k_first) arrays; quad is the
    mean-shift statistic ||m - mu||^2 / (r - tau^2), NaN for trials with
    no transmission.
    """
    params = agents[robot]
    p = params.p if p_override is None else float(p_override)
    kern = backend.kernels()
    return kern.leakage_samples(
        params.prior_mean, params.prior_var, params.sigma2, params.q,
        float(alpha[robot]), p, int(horizon), int(trials),
        np.uint64(seed), int(trial0), int(robot),
    )


def _full_simulation_leakage(scenario, alpha, robot, trials, horizon, seed):
    """Slow cross-validation path: simulate the whole network per trial."""
    from dataclasses import replace

    sampled = replace(scenario, init_mode="sample", x0=None)
    ells = np.empty(trials)
    params = scenario.agents[robot]
    for t in range(trials):
        record = run(sampled, horizon=horizon, seed=seed, trial=t)
        view = EavesdropperView.from_record(record)
        z = innovation_transform(view, scenario.graph)
        post = initial_state_posterior(z.z[:, robot], record.gamma[:, robot],
                                       params, float(alpha[robot]))
        ells[t] = pointwise_leakage(post, params.prior_mean, params.prior_var)
    return ells


def monte_carlo_audit(scenario, robot: int, eps: float, trials: int,
                      horizon: int = 400, seed: int = 0, *,
                      p_override=None, full_simulation: bool = False) -> AuditReport:
    """Empirical check of the (eps, delta) guarantee for one robot.

    Each trial draws an initial position from the prior, a transmission
    pattern and noise, computes the exact leakage, and compares it to eps.
    Passes when the empirical coverage is at least 1 - delta - 3 binomial
    standard errors, delta being the series bound at the effective p.
    """
    from .graph import derive_quantities

    derived = derive_quantities(scenario.graph)
    params = scenario.agents[robot]
    p = params.p if p_override is None else float(p_override)
    if full_simulation:
        if p_override is not None:
            raise ValueError("p_override is not supported in full-simulation mode")
        ell = _full_simulation_leakage(scenario, derived.alpha, robot, trials,
                                       horizon, seed)
    else:
        ell, _, _, _ = leakage_trials(scenario.agents, derived.alpha, robot,
                                      trials, horizon, seed,
                                      p_override=p_override)

    inputs = CalibrationInputs(alpha=float(derived.alpha[robot]), p=p,
                               sigma2=params.sigma2, q=params.q,
                               r=params.prior_var)
    delta_series = delta_series_bound(eps, inputs).delta
    delta_design = calibrate_design_rule(eps, delta_series, inputs).implied_delta

    hits = int(np.count_nonzero(ell <= eps))
    coverage = hits / trials
    se = math.sqrt(delta_series * (1.0 - delta_series) / trials)
    passed = coverage >= 1.0 - delta_series - 3.0 * se
    return AuditReport(
        robot=robot + 1, epsilon=eps, trials=trials, horizon=horizon,
        coverage=coverage, wilson_ci=wilson_interval(hits, trials),
        delta_series=delta_series, delta_design=delta_design, passed=passed,
    )


def fixed_pattern_quad_samples(gamma_pattern, params: AgentParams, alpha: float,
                               trials: int, seed: int, robot: int = 0):
    """Mean-shift statistics under a frozen transmission pattern.

    With the pattern fixed, ||m - mu||^2 / (r - tau^2) is chi-square with
    2 degrees of freedom exactly; used by distribution-shape tests.
    """
    sent = np.asarray(gamma_pattern, dtype=bool)
    ks = np.nonzero(sent)[0]
    if ks.size == 0:
        raise ValueError("pattern has no transmission")
    r = params.prior_var
    rho = (alpha / params.q) ** 2
    s = float(np.sum(rho**ks.astype(float))) / params.sigma2

    tr = np.arange(trials)
    i1, i2 = rng.standard_normal_pair(seed, tr, robot, 0,
                                      purposes=(rng.INIT_DIM1, rng.INIT_DIM2))
    x0 = np.sqrt(r) * np.column_stack([i1, i2]) + params.prior_mean
    aq_k = (alpha / params.q) ** ks.astype(float)
    z1, z2 = rng.standard_normal_pair(seed, tr[:, None], robot, ks[None, :])
    sig = math.sqrt(params.sigma2)
    w = np.stack([np.sum(aq_k * z1, axis=1), np.sum(aq_k * z2, axis=1)], axis=1) / sig
    num = s * x0 + w
    d = num - s * params.prior_mean
    quad = np.sum(d * d, axis=1) / (s * (1.0 + r * s))
    ell = np.log1p(r * s) + 0.5 * quad
    return ell, quad
