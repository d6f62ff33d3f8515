"""Pure-numpy kernel implementations (fallback backend).

Trajectory stepping is sequential in time but vectorized over robots;
Monte Carlo workloads are vectorized over trials in fixed-size chunks to
bound memory. Draw keys match the numba backend exactly.
"""

from __future__ import annotations

import numpy as np

from . import rng

NAME = "numpy"

# noise variances below this are clamped to avoid subnormal arithmetic
VARIANCE_FLOOR = 1e-300

_CHUNK = 4096


def _range_max(x, xt):
    eta = np.concatenate([x, xt], axis=-1)
    return (eta.max(axis=-2) - eta.min(axis=-2)).max(axis=-1)


def trajectory(weights, alpha, p, sigma, q, mu, x0, T, seed, trial):
    """Run T+1 scheduling/communication rounds; x is advanced T times."""
    n = weights.shape[0]
    robots = np.arange(n)
    gamma = np.zeros((T + 1, n), dtype=np.uint8)
    noise = np.zeros((T + 1, n, 2))
    xs = np.empty((T + 1, n, 2))
    xts = np.empty((T + 1, n, 2))
    V = np.empty(T + 1)

    x = x0.astype(float).copy()
    xt = mu.astype(float).copy()
    var = sigma * sigma
    q2 = q * q

    for k in range(T + 1):
        g = rng.bernoulli(p, seed, trial, robots, k)
        z1, z2 = rng.standard_normal_pair(seed, trial, robots, k)
        scale = np.sqrt(np.maximum(var, VARIANCE_FLOOR))
        scale = np.where(sigma > 0.0, scale, 0.0)
        v = np.where(g[:, None], scale[:, None] * np.column_stack([z1, z2]), 0.0)
        xt = np.where(g[:, None], x + v, xt)
        gamma[k] = g
        noise[k] = v
        xs[k] = x
        xts[k] = xt
        V[k] = _range_max(x, xt)
        if k < T:
            x = alpha[:, None] * x + weights @ xt
        var = var * q2
    return gamma, noise, xs, xts, V


def contraction_samples(weights, alpha, p, sigma, q, x0, xt0, k0, L, trials, seed):
    """V after L fresh rounds from the frozen state (x0, xt0), per trial."""
    n = weights.shape[0]
    robots = np.arange(n)
    out = np.empty(trials)
    var0 = sigma * sigma
    for _ in range(k0 + 1):
        var0 = var0 * (q * q)

    for start in range(0, trials, _CHUNK):
        stop = min(start + _CHUNK, trials)
        tr = np.arange(start, stop)[:, None]
        b = stop - start
        x = np.broadcast_to(x0, (b, n, 2)).copy()
        xt = np.broadcast_to(xt0, (b, n, 2)).copy()
        var = var0.copy()
        for s in range(1, L + 1):
            t = k0 + s
            x = alpha[None, :, None] * x + np.matmul(weights, xt)
            g = rng.bernoulli(p, seed, tr, robots[None, :], t)
            z1, z2 = rng.standard_normal_pair(seed, tr, robots[None, :], t)
            scale = np.sqrt(np.maximum(var, VARIANCE_FLOOR))
            scale = np.where(sigma > 0.0, scale, 0.0)
            v = scale[None, :, None] * np.stack([z1, z2], axis=-1)
            xt = np.where(g[..., None], x + v, xt)
            var = var * (q * q)
        out[start:stop] = _range_max(x, xt)
    return out


def leakage_samples(mu, r, sigma2, q, alpha, p, T, trials, seed, trial0, robot):
    """Exact leakage samples from the scalar observation model of one robot.

    Accumulates the posterior in the overflow-free factored form
    (rho^k and (alpha/q)^k are both < 1 under the calibration constraint),
    then evaluates leakage as log1p(r*s) + 0.5*||num - s*mu||^2 / (s*(1+r*s)).
    """
    ell = np.empty(trials)
    gain = np.empty(trials)
    quad = np.empty(trials)
    kfirst = np.empty(trials, dtype=np.int64)

    rho = (alpha * alpha) / (q * q)
    aq = alpha / q
    sig = np.sqrt(sigma2)
    ks = np.arange(T + 1)
    rho_k = rho**ks
    aq_k = aq**ks

    for start in range(0, trials, _CHUNK):
        stop = min(start + _CHUNK, trials)
        tr = np.arange(trial0 + start, trial0 + stop)[:, None]
        i1, i2 = rng.standard_normal_pair(
            seed, tr[:, 0], robot, 0, purposes=(rng.INIT_DIM1, rng.INIT_DIM2)
        )
        x01 = mu[0] + np.sqrt(r) * i1
        x02 = mu[1] + np.sqrt(r) * i2

        g = rng.bernoulli(p, seed, tr, robot, ks[None, :])
        z1, z2 = rng.standard_normal_pair(seed, tr, robot, ks[None, :])
        s = (g * rho_k).sum(axis=1) / sigma2
        w1 = (g * aq_k * z1).sum(axis=1) / sig
        w2 = (g * aq_k * z2).sum(axis=1) / sig
        n1 = s * x01 + w1
        n2 = s * x02 + w2

        any_tx = g.any(axis=1)
        kfirst[start:stop] = np.where(any_tx, g.argmax(axis=1), -1)
        gain[start:stop] = s
        d1 = n1 - s * mu[0]
        d2 = n2 - s * mu[1]
        with np.errstate(invalid="ignore", divide="ignore"):
            qd = (d1 * d1 + d2 * d2) / (s * (1.0 + r * s))
        qd = np.where(s > 0.0, qd, np.nan)
        quad[start:stop] = qd
        ell[start:stop] = np.where(s > 0.0, np.log1p(r * s) + 0.5 * qd, 0.0)
    return ell, gain, quad, kfirst
