"""Flock state container and spread diagnostics.

The spread of a set of vectors is the largest per-coordinate range.  It is
the quantity every alignment estimate in this package is phrased in, so the
helpers here are deliberately small and allocation-light.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_2d(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise ValueError(f"expected (n, r) array, got shape {y.shape}")
    return y


def spread_dim(y, dim: int) -> float:
    """Range max - min of coordinate `dim` (zero based) over all agents."""
    y = _as_2d(y)
    n, r = y.shape
    if not 0 <= dim < r:
        raise ValueError(f"dim {dim} out of range for r={r}")
    col = y[:, dim]
    return float(col.max() - col.min())


def spread(y) -> float:
    """Largest per-coordinate range over all agents (the spread S(y))."""
    y = _as_2d(y)
    return float((y.max(axis=0) - y.min(axis=0)).max())


@dataclass(frozen=True)
class SpreadReport:
    """Spread with the witnesses that attain it.

    Indices are zero based.  `i` is the agent holding the maximal
    coordinate, `j` the agent holding the minimal one, `dim` the coordinate.
    Ties resolve to the smallest (dim, i, j) lexicographically.
    """

    value: float
    per_dim: np.ndarray
    dim: int
    i: int
    j: int


def spread_report(y) -> SpreadReport:
    y = _as_2d(y)
    per_dim = y.max(axis=0) - y.min(axis=0)
    dim = int(np.argmax(per_dim))  # first maximal coordinate
    i = int(np.argmax(y[:, dim]))
    j = int(np.argmin(y[:, dim]))
    return SpreadReport(value=float(per_dim[dim]), per_dim=per_dim, dim=dim, i=i, j=j)


def pairwise_distance_sq(x, i: int, j: int) -> float:
    """Squared Euclidean distance between agents i and j (zero based)."""
    x = _as_2d(x)
    if i == j:
        raise ValueError("pairwise distance needs two distinct agents")
    d = x[i] - x[j]
    return float(d @ d)


def distance_sq_matrix(x) -> np.ndarray:
    """All pairwise squared distances; diagonal is zero."""
    x = _as_2d(x)
    diff = x[:, None, :] - x[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def min_pair_distance_sq(x):
    """Smallest squared distance over distinct pairs, with its pair.

    Returns (value, i, j) with i < j; ties resolve to the smallest (i, j).
    """
    x = _as_2d(x)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two agents for a pairwise minimum")
    d2 = distance_sq_matrix(x)
    iu, ju = np.triu_indices(n, k=1)
    vals = d2[iu, ju]
    k = int(np.argmin(vals))
    return float(vals[k]), int(iu[k]), int(ju[k])


@dataclass
class FlockState:
    """Positions and velocities of n agents in r dimensions at time t.

    Arrays are copied on construction and frozen so states can be shared
    between certificates, integrators and reports without aliasing bugs.
    """

    t: float
    x: np.ndarray
    v: np.ndarray
    n: int = field(init=False)
    r: int = field(init=False)

    def __post_init__(self):
        x = _as_2d(self.x).copy()
        v = _as_2d(self.v).copy()
        if x.shape != v.shape:
            raise ValueError(f"x shape {x.shape} != v shape {v.shape}")
        if not (np.isfinite(x).all() and np.isfinite(v).all()):
            raise ValueError("state contains non-finite entries")
        if x.shape[0] < 1:
            raise ValueError("need at least one agent")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "n", x.shape[0])
        object.__setattr__(self, "r", x.shape[1])

    def spread_x(self) -> float:
        return spread(self.x)

    def spread_v(self) -> float:
        return spread(self.v)
