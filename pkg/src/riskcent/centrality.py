"""Risk-dependent node centralities and their rankings.

Three measures are derived from the matrix exponential of the adjacency at
an effective coupling ``zeta``:

* ``risk_centrality``   R_i = (exp(zeta A) 1)_i, walks of any length leaving i;
* ``circulability``     C_i = (exp(zeta A))_ii, walks returning to i;
* ``transmissibility``  T_i = R_i - C_i, walks leaving i that end elsewhere.

In the SI reading, ``zeta = (1 - beta) * gamma * t`` couples the infection
rate and horizon; R_i orders nodes by how exposed they are.  Rankings use
the convention rank 1 = largest value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .spectral import decompose

DEFAULT_ZETA_MAX = 1.0
DEFAULT_ZETA_STEP = 0.01


def default_zeta_grid(zeta_max=DEFAULT_ZETA_MAX, step=DEFAULT_ZETA_STEP):
    """Evenly spaced grid ``step, 2*step, ..., zeta_max`` (endpoints included)."""
    if step <= 0 or zeta_max < step:
        raise ValueError("need 0 < step <= zeta_max")
    count = int(round(zeta_max / step))
    grid = step * np.arange(1, count + 1)
    grid[-1] = zeta_max
    return grid


def _grid(zeta_grid):
    if zeta_grid is None:
        return default_zeta_grid()
    grid = np.asarray(zeta_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("zeta grid must be a nonempty 1-D array")
    if (grid <= 0).any() or not np.isfinite(grid).all():
        raise ValueError("zeta grid values must be positive and finite")
    if (np.diff(grid) <= 0).any():
        raise ValueError("zeta grid must be strictly increasing")
    return grid


def _dec(g, dec):
    return dec if dec is not None else decompose(g)


def risk_centrality(g, zeta, dec=None):
    """Row sums of exp(zeta A): R_i = (exp(zeta A) 1)_i."""
    d = _dec(g, dec)
    if float(zeta) < 0:
        raise ValueError("zeta must be nonnegative")
    u = d.eigenvectors
    c = u.sum(axis=0)  # psi_j^T 1
    return 1.0 + u @ (np.expm1(zeta * d.eigenvalues) * c)


def circulability(g, zeta, dec=None):
    """Diagonal of exp(zeta A): C_i = (exp(zeta A))_ii."""
    d = _dec(g, dec)
    if float(zeta) < 0:
        raise ValueError("zeta must be nonnegative")
    return 1.0 + (d.eigenvectors**2) @ np.expm1(zeta * d.eigenvalues)


def transmissibility(g, zeta, dec=None):
    """T_i = R_i - C_i, defined by subtraction of the other two measures."""
    d = _dec(g, dec)
    return risk_centrality(g, zeta, dec=d) - circulability(g, zeta, dec=d)


def measures_scaled(g, zeta, dec=None):
    """All three measures scaled by exp(-zeta*lam_1), with the log scale.

    Returns ``(R, C, T, s)`` where the unscaled values are exp(s) times the
    returned arrays.  Rankings are unaffected by the common positive scale,
    so this form supports extreme zeta without overflow.
    """
    d = _dec(g, dec)
    z = float(zeta)
    if z < 0:
        raise ValueError("zeta must be nonnegative")
    u = d.eigenvectors
    s = z * d.eigenvalues[0]
    e = np.exp(z * d.eigenvalues - s)
    r = u @ (e * u.sum(axis=0))
    c = (u**2) @ e
    return r, c, r - c, s


@dataclass
class RiskProfile:
    """Measure values over a zeta grid; rows follow the grid, columns nodes."""

    zeta_grid: np.ndarray
    R: np.ndarray
    C: np.ndarray
    T: np.ndarray
    labels: list = field(default_factory=list)

    def measure(self, name):
        try:
            return {"R": self.R, "C": self.C, "T": self.T}[name]
        except KeyError:
            raise ValueError("measure must be 'R', 'C', or 'T', got %r"
                             % (name,)) from None

    def to_csv(self, path, measure):
        _write_grid_csv(path, self.zeta_grid, self.measure(measure), self.labels)

    def to_json_dict(self):
        return {
            "zeta_grid": self.zeta_grid.tolist(),
            "labels": list(self.labels),
            "R": self.R.tolist(),
            "C": self.C.tolist(),
            "T": self.T.tolist(),
        }


def sweep(g, zeta_grid=None, dec=None):
    """Evaluate all three measures on a zeta grid with one decomposition.

    The default grid is 0.01, 0.02, ..., 1.00.
    """
    grid = _grid(zeta_grid)
    d = _dec(g, dec)
    u = d.eigenvectors
    e = np.expm1(np.outer(grid, d.eigenvalues))  # (grid, n)
    r = 1.0 + e @ (u * u.sum(axis=0)).T
    c = 1.0 + e @ (u**2).T
    return RiskProfile(grid, r, c, r - c, labels=list(g.labels))


def _write_grid_csv(path, grid, matrix, labels):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zeta"] + list(labels))
        for z, row in zip(grid, matrix):
            w.writerow([repr(float(z))] + [repr(float(x)) for x in row])


# -- rankings ----------------------------------------------------------------


def rank(values, tie_rule="node-index"):
    """Ranks with 1 = largest value.

    ``tie_rule='node-index'`` breaks ties toward the smaller node index and
    returns an integer permutation of 1..n.  ``tie_rule='average'`` assigns
    tied values the mean of their positions (fractional ranks, as used by
    the rank correlation).
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a nonempty 1-D array")
    if not np.isfinite(values).all():
        raise ValueError("values must be finite to rank")
    if tie_rule == "node-index":
        order = np.argsort(-values, kind="stable")
        out = np.empty(values.size, dtype=np.int64)
        out[order] = np.arange(1, values.size + 1)
        return out
    if tie_rule == "average":
        order = np.argsort(-values, kind="stable")
        sorted_vals = values[order]
        out = np.empty(values.size)
        pos = 0
        while pos < values.size:
            end = pos
            while end + 1 < values.size and sorted_vals[end + 1] == sorted_vals[pos]:
                end += 1
            out[order[pos:end + 1]] = 0.5 * (pos + end) + 1.0
            pos = end + 1
        return out
    raise ValueError("tie_rule must be 'node-index' or 'average'")


@dataclass
class RankingSweep:
    """Per-zeta rankings of one measure plus each node's rank volatility."""

    zeta_grid: np.ndarray
    measure: str
    rank_matrix: np.ndarray     # (grid, n) integer ranks, 1 = largest
    per_node_std: np.ndarray    # population std of each node's rank path
    labels: list = field(default_factory=list)

    def to_csv(self, path):
        _write_grid_csv(path, self.zeta_grid, self.rank_matrix, self.labels)

    def std_to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "rank_std"])
            for name, s in zip(self.labels, self.per_node_std):
                w.writerow([name, repr(float(s))])


def ranking_sweep(profile, measure="R"):
    """Rank every grid row of a measure; std uses the population convention."""
    values = profile.measure(measure)
    ranks = np.vstack([rank(row) for row in values])
    return RankingSweep(profile.zeta_grid, measure, ranks,
                        ranks.std(axis=0, ddof=0), labels=list(profile.labels))


def spearman(x, y):
    """Spearman rank correlation with average ranks for ties.

    Returns NaN when either input has zero rank variance (constant
    vector), where the coefficient is undefined.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length 1-D arrays with >= 2 entries")
    rx = rank(x, tie_rule="average")
    ry = rank(y, tie_rule="average")
    if rx.std() == 0.0 or ry.std() == 0.0:
        return float("nan")
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)))


def limit_rankings(g, dec=None):
    """Rankings at the two extremes of zeta for a connected graph.

    Returns ``(degree_ranks, eigenvector_ranks)``:  as zeta -> 0 the
    measures order nodes by degree (strength when weighted); as
    zeta -> infinity by the Perron eigenvector entry.
    """
    if not g.is_connected():
        raise ValueError("limit rankings need a connected graph "
                         "(the Perron vector is not unique otherwise)")
    d = _dec(g, dec)
    return rank(g.strengths()), rank(d.eigenvectors[:, 0])
