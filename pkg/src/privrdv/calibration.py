"""Closed-form privacy calibration for the randomized-scheduling protocol.

Leakage about a robot's initial position, conditioned on its first
transmission happening at round k, stays below eps with probability

    b_k(eps) = F(2 eps - 2 log(1 + snr * rho^k / (1 - rho))),

where F is the chi-square CDF with 2 degrees of freedom (the secret is a
2-D position), rho = alpha^2 / q^2 < 1, and snr = prior_var / sigma2 is
the prior-to-noise variance ratio.  Averaging over the geometric law of
the first transmission gives the series bound

    delta(eps) = 1 - sum_k (1-p)^k p b_k(eps),

monotone in p: transmitting less often can only shrink delta.  The
design rule replaces the series by the single-quantile sufficient
condition

    eps >= log(1 + snr / (1 - rho)) + 0.5 * Finv(1 - delta_tilde),
    delta_tilde = delta + (1-p) (b_1 - b_0),

which is conservative: its implied delta always dominates the series
value.  All epsilons are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

_CHUNK = 1 << 20


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon >= 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0,1], got {self.delta}")


@dataclass(frozen=True)
class CalibrationInputs:
    """Per-robot quantities the closed-form bounds depend on."""

    alpha: float
    p: float
    sigma2: float
    q: float
    r: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0 or not self.alpha < self.q < 1.0:
            raise ValueError(
                f"calibration requires 0 < alpha < q < 1, got alpha={self.alpha}, q={self.q}"
            )
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0,1], got {self.p}")
        if not self.sigma2 > 0.0 or not self.r > 0.0:
            raise ValueError("sigma2 and r must be positive")

    @property
    def rho(self) -> float:
        return (self.alpha / self.q) ** 2

    @property
    def snr_scale(self) -> float:
        """Prior-to-noise variance ratio r / sigma2.

        The observation model yields leakage terms scaled by r/sigma2 (an
        SNR), not by the product r*sigma2; with sigma = 1, the two agree.
        """
        return self.r / self.sigma2


class SeriesBound(NamedTuple):
    delta: float                    # conservative truncation (upper end)
    bracket: tuple[float, float]    # encloses the untruncated series value


class DesignCheck(NamedTuple):
    satisfied: bool
    delta_tilde: float
    implied_delta: float


def chi2_2_cdf(x):
    """Chi-square CDF with 2 degrees of freedom: 1 - exp(-x/2) for x > 0."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, -np.expm1(-x / 2.0), 0.0)
    return float(out) if out.ndim == 0 else out


def chi2_2_quantile(u):
    """Inverse of chi2_2_cdf on [0, 1): -2 log(1 - u)."""
    u = np.asarray(u, dtype=float)
    if (u < 0).any() or (u >= 1).any():
        raise ValueError("quantile defined for u in [0,1); u=1 is unbounded")
    out = -2.0 * np.log1p(-u)
    return float(out) if out.ndim == 0 else out


def coverage_given_first_send(k, eps: float, inputs: CalibrationInputs):
    """P[leakage <= eps | first transmission at round k]; nondecreasing in k.

    Negative CDF arguments clamp to 0 (the round-k information already
    exceeds the budget), which keeps the series bound conservative.
    """
    rho = inputs.rho
    k = np.asarray(k, dtype=float)
    arg = 2.0 * eps - 2.0 * np.log1p(inputs.snr_scale * rho**k / (1.0 - rho))
    return chi2_2_cdf(arg)


def delta_series_bound(eps: float, inputs: CalibrationInputs,
                       tol: float = 1e-12) -> SeriesBound:
    """Smallest delta certified by the first-transmission series.

    The series is truncated at the smallest K with (1-p)^(K+1) < tol;
    since every term weight is bounded by the geometric tail, the
    untruncated value lies in the returned bracket and the returned delta
    (the bracket's upper end) is always sufficient.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    p = inputs.p
    if p >= 1.0:
        # single-term case: the first transmission happens at round 0
        d = 1.0 - float(coverage_given_first_send(0, eps, inputs))
        return SeriesBound(delta=d, bracket=(d, d))

    log1mp = math.log1p(-p)
    K = max(int(math.ceil(math.log(tol) / log1mp)) - 1, 0)
    total = 0.0
    for start in range(0, K + 1, _CHUNK):
        ks = np.arange(start, min(start + _CHUNK, K + 1))
        weights = np.exp(ks * log1mp) * p
        total += float(np.sum(weights * coverage_given_first_send(ks, eps, inputs)))
    tail = math.exp((K + 1) * log1mp)
    delta = 1.0 - total
    return SeriesBound(delta=delta, bracket=(delta - tail, delta))


def calibrate_design_rule(eps: float, target_delta: float,
                          inputs: CalibrationInputs) -> DesignCheck:
    """Check the quantile design rule and report its implied delta.

    ``delta_tilde`` inflates the target by the scheduling amplification
    term (1-p)(b_1 - b_0).  ``implied_delta`` solves the rule at equality
    for the given eps and then removes the amplification term again, i.e.
    the smallest delta this rule can certify at eps.
    """
    floor = math.log1p(inputs.snr_scale / (1.0 - inputs.rho))
    if eps < floor:
        raise ValueError(
            f"epsilon below leakage floor: eps={eps} < {floor:.6f} "
            "(the round-0 term already exceeds the budget)"
        )
    b0 = float(coverage_given_first_send(0, eps, inputs))
    b1 = float(coverage_given_first_send(1, eps, inputs))
    amplification = (1.0 - inputs.p) * (b1 - b0)

    delta_tilde = target_delta + amplification
    u = min(max(1.0 - delta_tilde, 0.0), 1.0 - 1e-300)
    satisfied = eps >= floor + 0.5 * chi2_2_quantile(u)

    delta_tilde_star = math.exp(-(eps - floor))
    implied = delta_tilde_star - amplification
    return DesignCheck(satisfied=bool(satisfied), delta_tilde=delta_tilde,
                       implied_delta=implied)


def amplification_gap(eps: float, inputs: CalibrationInputs, p: float) -> float:
    """Privacy gained by transmitting with probability p instead of always.

    Difference of the series bound at p=1 and at p; nonnegative, and
    growing as p decreases.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0,1], got {p}")
    from dataclasses import replace

    full_rate = delta_series_bound(eps, replace(inputs, p=1.0)).delta
    scheduled = delta_series_bound(eps, replace(inputs, p=p)).delta
    return full_rate - scheduled


def calibration_report(alpha, agents, eps: float, target_delta=None) -> list[dict]:
    """Per-robot calibration summary used by the calibrate command."""
    rows = []
    for i, (a, ag) in enumerate(zip(alpha, agents), start=1):
        inputs = CalibrationInputs(alpha=float(a), p=ag.p, sigma2=ag.sigma2,
                                   q=ag.q, r=ag.prior_var)
        series = delta_series_bound(eps, inputs)
        target = series.delta if target_delta is None else target_delta
        design = calibrate_design_rule(eps, target, inputs)
        rows.append({
            "robot": i,
            "alpha": float(a),
            "rho": inputs.rho,
            "b_0": float(coverage_given_first_send(0, eps, inputs)),
            "b_1": float(coverage_given_first_send(1, eps, inputs)),
            "delta_tilde": design.delta_tilde,
            "delta_theorem1": series.delta,
            "delta_corollary": design.implied_delta,
            "satisfied": design.satisfied,
        })
    return rows
