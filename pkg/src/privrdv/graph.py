"""Communication topology: validation and derived contraction quantities.

The weight matrix must be symmetric, zero on the diagonal, nonnegative,
row sums strictly below 1, and connected on its positive support.  From a
valid graph we derive:

* ``alpha``: per-robot self-weight 1 - d_i (d_i the row sum), used by the
  privacy calibration,
* ``W = I - D + A``: the row-stochastic consensus update matrix,
* ``L``: the smallest integer such that W^(L-1) is entrywise positive
  (W is primitive for any valid graph, so L exists and is at most n^2),
* ``epsilon_floor``: the smallest entry of W^(L-1) (I - D), a strictly
  positive lower bound on row overlap after an all-transmit window.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-12       # inputs are human-scale decimals
ROW_SUM_TOL = 1e-9         # stochasticity tolerance for ergodicity checks


@dataclass(frozen=True, eq=False)
class Graph:
    """Validated undirected weighted topology on n robots."""

    n: int
    weights: np.ndarray

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)


@dataclass(frozen=True, eq=False)
class DerivedGraphQuantities:
    alpha: np.ndarray
    W: np.ndarray
    L: int
    epsilon_floor: float


def _connected(support: np.ndarray) -> bool:
    n = support.shape[0]
    seen = np.zeros(n, dtype=bool)
    queue = deque([0])
    seen[0] = True
    while queue:
        i = queue.popleft()
        for j in np.nonzero(support[i])[0]:
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


def weight_violations(weights) -> list[str]:
    """All admissibility violations of a candidate weight matrix."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        return [f"weight matrix must be square, got shape {w.shape}"]
    if not np.isfinite(w).all():
        return ["weight matrix contains non-finite entries"]

    problems = []
    asym = np.abs(w - w.T) > SYMMETRY_TOL
    if asym.any():
        i, j = np.argwhere(asym)[0]
        problems.append(
            f"asymmetric weights: a[{i + 1},{j + 1}]={w[i, j]!r} != "
            f"a[{j + 1},{i + 1}]={w[j, i]!r}"
        )
    diag = np.abs(np.diag(w)) > 0
    if diag.any():
        i = int(np.argwhere(diag)[0][0])
        problems.append(f"self-loop: a[{i + 1},{i + 1}] must be 0")
    if (w < 0).any():
        i, j = np.argwhere(w < 0)[0]
        problems.append(f"negative weight a[{i + 1},{j + 1}]={w[i, j]!r}")
    sums = w.sum(axis=1)
    if (sums >= 1.0).any():
        i = int(np.argwhere(sums >= 1.0)[0][0])
        problems.append(f"row sum >= 1 for robot {i + 1} (d={sums[i]!r})")
    if not problems and w.shape[0] > 1 and not _connected(w > 0):
        problems.append("graph is disconnected on its positive-weight support")
    return problems


def validate_graph(weights) -> Graph:
    """Build a Graph, raising ValueError naming every violated constraint."""
    problems = weight_violations(weights)
    if problems:
        raise ValueError("invalid weight matrix: " + "; ".join(problems))
    w = np.ascontiguousarray(np.asarray(weights, dtype=float))
    w.setflags(write=False)
    return Graph(n=w.shape[0], weights=w)


def derive_quantities(g: Graph) -> DerivedGraphQuantities:
    """Compute alpha, W, the positivity horizon L and epsilon_floor.

    L is found by iterating matrix powers up to n^2 (a safe exponent cap
    for primitive stochastic matrices with positive diagonal); exceeding
    the cap signals an internal inconsistency, not a user error.
    """
    d = g.degrees
    alpha = 1.0 - d
    W = np.eye(g.n) - np.diag(d) + g.weights

    power = np.eye(g.n)
    L = None
    for m in range(g.n * g.n + 1):
        if (power > 0).all():
            L = m + 1
            break
        power = power @ W
    if L is None:
        raise ValueError(f"W not primitive within {g.n * g.n} powers")
    floor = float((power @ np.diag(alpha)).min())

    alpha.setflags(write=False)
    W.setflags(write=False)
    return DerivedGraphQuantities(alpha=alpha, W=W, L=L, epsilon_floor=floor)


def augmented_transition_matrix(g: Graph, gamma) -> np.ndarray:
    """Row-stochastic 2n x 2n update of the stacked state (x, held outputs).

    Rows 0..n-1 map (x, xt) -> next x; rows n..2n-1 either refresh the held
    output (gamma=1) or hold it (gamma=0).
    """
    gam = np.asarray(gamma, dtype=float)
    if gam.shape != (g.n,) or not np.isin(gam, (0.0, 1.0)).all():
        raise ValueError(f"gamma must be a length-{g.n} 0/1 vector")
    d = g.degrees
    top = np.hstack([np.diag(1.0 - d), g.weights])
    hold = np.diag(1.0 - gam)
    bottom = np.hstack([gam[:, None] * np.diag(1.0 - d), gam[:, None] * g.weights + hold])
    return np.vstack([top, bottom])


def ergodicity_coefficient(M) -> float:
    """1 minus the minimum pairwise row overlap of a row-stochastic matrix.

    Values below 1 certify contraction of the state range under M; 0 means
    all rows identical, 1 means some pair of rows has disjoint support.
    """
    m = np.asarray(M, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if (m < 0).any():
        raise ValueError("matrix has negative entries")
    if np.abs(m.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
        raise ValueError("rows do not sum to 1")
    overlap = np.minimum(m[:, None, :], m[None, :, :]).sum(axis=2)
    return float(1.0 - overlap.min())
