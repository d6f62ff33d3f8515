"""Counter-based random streams for reproducible simulation.

Every random number consumed anywhere in this package is a pure function
of a five-word key ``(seed, trial, robot, purpose, step)``.  The key is
hashed to 64 bits by a chain of splitmix64 finalizers and the bits are
mapped to a uniform in the open interval (0, 1).  Because a draw depends
only on its key, results do not depend on iteration order, trials can be
evaluated in any order or in parallel, and any single draw can be
regenerated in isolation (e.g. to cross-check a fast kernel against a
slow reference path).

Gaussian pairs come from the Box-Muller transform applied to the two
noise purposes of the same (robot, step) slot, so one 2-D noise vector
consumes exactly two keyed uniforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# purpose word of the draw key
GAMMA = 0        # transmission coin
NOISE_DIM1 = 1   # perturbation, first coordinate
NOISE_DIM2 = 2   # perturbation, second coordinate
INIT_DIM1 = 3    # initial-state sampling, first coordinate
INIT_DIM2 = 4    # initial-state sampling, second coordinate

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0 ** -53

MAX_SEED = 2**64 - 1


def _mix(h):
    """splitmix64 finalizer (bijective on uint64)."""
    h = (h ^ (h >> _S30)) * _M1
    h = (h ^ (h >> _S27)) * _M2
    return h ^ (h >> _S31)


def key_bits(seed, trial, robot, purpose, step):
    """Hash a draw key to 64 bits. Arguments broadcast like numpy ufuncs."""
    with np.errstate(over="ignore"):
        h = _mix(np.asarray(seed, dtype=np.uint64))
        for word in (trial, robot, purpose, step):
            h = _mix(h + _GOLD + np.asarray(word, dtype=np.uint64))
    return h


def uniform(seed, trial, robot, purpose, step):
    """Keyed uniform draw in the open interval (0, 1)."""
    bits = key_bits(seed, trial, robot, purpose, step)
    with np.errstate(over="ignore"):
        u = (np.asarray(bits >> _S11, dtype=np.float64) + 0.5) * _INV53
    return u


def bernoulli(p, seed, trial, robot, step):
    """Keyed Bernoulli(p) draws, using the transmission-coin purpose."""
    return uniform(seed, trial, robot, GAMMA, step) < p


def standard_normal_pair(seed, trial, robot, step, purposes=(NOISE_DIM1, NOISE_DIM2)):
    """Keyed pair of independent standard normals (Box-Muller).

    The two coordinates consume the two purpose words in ``purposes``;
    the radial uniform never hits 0 or 1, so the tail is capped near
    8.6 standard deviations (the usual Box-Muller double-precision limit).
    """
    u1 = uniform(seed, trial, robot, purposes[0], step)
    u2 = uniform(seed, trial, robot, purposes[1], step)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = (2.0 * np.pi) * u2
    return radius * np.cos(angle), radius * np.sin(angle)


@dataclass(frozen=True)
class Stream:
    """Convenience handle binding (seed, trial) for per-step draws."""

    seed: int
    trial: int = 0

    def transmission_coins(self, n_agents: int, step: int, p) -> np.ndarray:
        robots = np.arange(n_agents)
        return bernoulli(p, self.seed, self.trial, robots, step)

    def noise_pairs(self, n_agents: int, step: int) -> np.ndarray:
        """(n_agents, 2) array of standard normal perturbation draws."""
        robots = np.arange(n_agents)
        z1, z2 = standard_normal_pair(self.seed, self.trial, robots, step)
        return np.column_stack([z1, z2])

    def init_pairs(self, n_agents: int) -> np.ndarray:
        """(n_agents, 2) array of standard normals for initial states."""
        robots = np.arange(n_agents)
        z1, z2 = standard_normal_pair(
            self.seed, self.trial, robots, 0, purposes=(INIT_DIM1, INIT_DIM2)
        )
        return np.column_stack([z1, z2])
