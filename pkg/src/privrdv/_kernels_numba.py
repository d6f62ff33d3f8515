"""numba JIT kernel implementations (default backend).

Same draw-key contract as the numpy backend; loops are written out so the
JIT compiles tight scalar code. Compiled artifacts are cached on disk.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, uint64

NAME = "numba"

VARIANCE_FLOOR = 1e-300

_M1 = uint64(0xBF58476D1CE4E5B9)
_M2 = uint64(0x94D049BB133111EB)
_GOLD = uint64(0x9E3779B97F4A7C15)

_P_GAMMA = uint64(0)
_P_N1 = uint64(1)
_P_N2 = uint64(2)
_P_I1 = uint64(3)
_P_I2 = uint64(4)

_TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _mix(h):
    h = (h ^ (h >> uint64(30))) * _M1
    h = (h ^ (h >> uint64(27))) * _M2
    return h ^ (h >> uint64(31))


@njit(cache=True, inline="always")
def _chain(h, word):
    return _mix(h + _GOLD + word)


@njit(cache=True, inline="always")
def _unit(bits):
    return (np.float64(bits >> uint64(11)) + 0.5) * 2.0**-53


@njit(cache=True, inline="always")
def _normal_pair(bits1, bits2):
    radius = math.sqrt(-2.0 * math.log(_unit(bits1)))
    angle = _TWO_PI * _unit(bits2)
    return radius * math.cos(angle), radius * math.sin(angle)


@njit(cache=True)
def _column_range(a, c):
    hi = a[0, c]
    lo = a[0, c]
    for i in range(a.shape[0]):
        t = a[i, c]
        if t > hi:
            hi = t
        if t < lo:
            lo = t
    return hi - lo


@njit(cache=True)
def _range_max(x, xt):
    v = _column_range(x, 0)
    for c in range(2):
        r = _column_range(x, c)
        if r > v:
            v = r
        r = _column_range(xt, c)
        if r > v:
            v = r
    return v


@njit(cache=True)
def _robot_prefixes(seed, trial, n):
    pg = np.empty(n, dtype=np.uint64)
    p1 = np.empty(n, dtype=np.uint64)
    p2 = np.empty(n, dtype=np.uint64)
    h0 = _chain(_mix(uint64(seed)), uint64(trial))
    for i in range(n):
        base = _chain(h0, uint64(i))
        pg[i] = _chain(base, _P_GAMMA)
        p1[i] = _chain(base, _P_N1)
        p2[i] = _chain(base, _P_N2)
    return pg, p1, p2


@njit(cache=True)
def trajectory(weights, alpha, p, sigma, q, mu, x0, T, seed, trial):
    """Run T+1 scheduling/communication rounds; x is advanced T times."""
    n = weights.shape[0]
    gamma = np.zeros((T + 1, n), dtype=np.uint8)
    noise = np.zeros((T + 1, n, 2))
    xs = np.empty((T + 1, n, 2))
    xts = np.empty((T + 1, n, 2))
    V = np.empty(T + 1)

    x = x0.copy()
    xt = mu.copy()
    var = sigma * sigma
    q2 = q * q
    pg, p1, p2 = _robot_prefixes(seed, trial, n)

    for k in range(T + 1):
        ku = uint64(k)
        for i in range(n):
            if _unit(_chain(pg[i], ku)) < p[i]:
                gamma[k, i] = 1
                if sigma[i] > 0.0:
                    vk = var[i] if var[i] > VARIANCE_FLOOR else VARIANCE_FLOOR
                    sd = math.sqrt(vk)
                    z1, z2 = _normal_pair(_chain(p1[i], ku), _chain(p2[i], ku))
                    noise[k, i, 0] = sd * z1
                    noise[k, i, 1] = sd * z2
                xt[i, 0] = x[i, 0] + noise[k, i, 0]
                xt[i, 1] = x[i, 1] + noise[k, i, 1]
        for i in range(n):
            xs[k, i, 0] = x[i, 0]
            xs[k, i, 1] = x[i, 1]
            xts[k, i, 0] = xt[i, 0]
            xts[k, i, 1] = xt[i, 1]
        V[k] = _range_max(x, xt)
        if k < T:
            xn = np.empty((n, 2))
            for i in range(n):
                acc0 = alpha[i] * x[i, 0]
                acc1 = alpha[i] * x[i, 1]
                for j in range(n):
                    w = weights[i, j]
                    if w != 0.0:
                        acc0 += w * xt[j, 0]
                        acc1 += w * xt[j, 1]
                xn[i, 0] = acc0
                xn[i, 1] = acc1
            x = xn
        for i in range(n):
            var[i] = var[i] * q2[i]
    return gamma, noise, xs, xts, V


@njit(cache=True)
def contraction_samples(weights, alpha, p, sigma, q, x0, xt0, k0, L, trials, seed):
    """V after L fresh rounds from the frozen state (x0, xt0), per trial."""
    n = weights.shape[0]
    out = np.empty(trials)
    var0 = sigma * sigma
    for _ in range(k0 + 1):
        var0 = var0 * (q * q)

    for m in range(trials):
        pg, p1, p2 = _robot_prefixes(seed, m, n)
        x = x0.copy()
        xt = xt0.copy()
        var = var0.copy()
        for s in range(1, L + 1):
            tu = uint64(k0 + s)
            xn = np.empty((n, 2))
            for i in range(n):
                acc0 = alpha[i] * x[i, 0]
                acc1 = alpha[i] * x[i, 1]
                for j in range(n):
                    w = weights[i, j]
                    if w != 0.0:
                        acc0 += w * xt[j, 0]
                        acc1 += w * xt[j, 1]
                xn[i, 0] = acc0
                xn[i, 1] = acc1
            x = xn
            for i in range(n):
                if _unit(_chain(pg[i], tu)) < p[i]:
                    v0 = 0.0
                    v1 = 0.0
                    if sigma[i] > 0.0:
                        vk = var[i] if var[i] > VARIANCE_FLOOR else VARIANCE_FLOOR
                        sd = math.sqrt(vk)
                        z1, z2 = _normal_pair(_chain(p1[i], tu), _chain(p2[i], tu))
                        v0 = sd * z1
                        v1 = sd * z2
                    xt[i, 0] = x[i, 0] + v0
                    xt[i, 1] = x[i, 1] + v1
            for i in range(n):
                var[i] = var[i] * (q[i] * q[i])
        out[m] = _range_max(x, xt)
    return out


@njit(cache=True)
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
    sig = math.sqrt(sigma2)
    sqrt_r = math.sqrt(r)
    ru = uint64(robot)
    seed_m = _mix(uint64(seed))

    for m in range(trials):
        base = _chain(_chain(seed_m, uint64(trial0 + m)), ru)
        hg = _chain(base, _P_GAMMA)
        h1 = _chain(base, _P_N1)
        h2 = _chain(base, _P_N2)
        hi1 = _chain(base, _P_I1)
        hi2 = _chain(base, _P_I2)
        z1, z2 = _normal_pair(_chain(hi1, uint64(0)), _chain(hi2, uint64(0)))
        x01 = mu[0] + sqrt_r * z1
        x02 = mu[1] + sqrt_r * z2

        s = 0.0
        n1 = 0.0
        n2 = 0.0
        rk = 1.0
        ak = 1.0
        kf = -1
        for k in range(T + 1):
            ku = uint64(k)
            if _unit(_chain(hg, ku)) < p:
                if kf < 0:
                    kf = k
                w1, w2 = _normal_pair(_chain(h1, ku), _chain(h2, ku))
                s += rk / sigma2
                n1 += rk * x01 / sigma2 + ak * w1 / sig
                n2 += rk * x02 / sigma2 + ak * w2 / sig
            rk *= rho
            ak *= aq
        gain[m] = s
        kfirst[m] = kf
        if s <= 0.0:
            ell[m] = 0.0
            quad[m] = np.nan
        else:
            d1 = n1 - s * mu[0]
            d2 = n2 - s * mu[1]
            qd = (d1 * d1 + d2 * d2) / (s * (1.0 + r * s))
            quad[m] = qd
            ell[m] = math.log1p(r * s) + 0.5 * qd
    return ell, gain, quad, kfirst
