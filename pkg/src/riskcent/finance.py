"""Correlation-market and board-interlock pipelines.

Workflow (a): daily returns -> monthly-stepped six-month windows ->
pairwise-complete correlations -> Mantegna distances -> minimum spanning
tree -> centrality rank reports per window.

Workflow (b): company-director memberships -> one-mode projection ->
rank shift between a low-risk and a high-risk regime (delta rank) ->
one-dimensional discriminant classification against outcome trends.
"""

from __future__ import annotations

import csv
import datetime
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .centrality import rank, ranking_sweep, sweep
from .graph import Graph


# -- returns panel ---------------------------------------------------------


@dataclass
class ReturnsPanel:
    """Dated return observations, one column per asset; NaN marks missing."""

    dates: list           # datetime.date, strictly ascending
    assets: list          # column labels
    returns: np.ndarray   # shape (len(dates), len(assets))

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        if len(self.assets) < 2:
            raise ValueError("a returns panel needs at least 2 assets")
        if self.returns.shape != (len(self.dates), len(self.assets)):
            raise ValueError("returns shape %s does not match %d dates x %d "
                             "assets" % (self.returns.shape, len(self.dates),
                                         len(self.assets)))
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise ValueError("dates must be strictly ascending; %s is "
                                 "followed by %s" % (a, b))

    def __eq__(self, other):
        if not isinstance(other, ReturnsPanel):
            return NotImplemented
        return (self.dates == other.dates and self.assets == other.assets
                and np.array_equal(self.returns, other.returns,
                                   equal_nan=True))


def load_returns(path):
    """Read a returns CSV: header of asset labels, first column ISO dates.

    Empty cells and the token ``NaN`` (any case) mark missing values.  Rows
    may arrive in any order; they are sorted by date.  Duplicate dates,
    unparseable cells, and panels with fewer than 2 assets are errors.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("%s: empty file" % path) from None
        assets = [h.strip() for h in header[1:]]
        if len(assets) < 2:
            raise ValueError("%s: need at least 2 asset columns" % path)
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if len(cells) != len(assets) + 1:
                raise ValueError("%s:%d: expected %d cells, got %d"
                                 % (path, lineno, len(assets) + 1, len(cells)))
            try:
                day = datetime.date.fromisoformat(cells[0].strip())
            except ValueError:
                raise ValueError("%s:%d: unparseable date %r"
                                 % (path, lineno, cells[0])) from None
            vals = np.empty(len(assets))
            for j, cell in enumerate(cells[1:]):
                s = cell.strip()
                if not s or s.lower() == "nan":
                    vals[j] = np.nan
                    continue
                try:
                    vals[j] = float(s)
                except ValueError:
                    raise ValueError("%s:%d: unparseable return %r for %s"
                                     % (path, lineno, cell,
                                        assets[j])) from None
            rows.append((day, vals))
    if not rows:
        raise ValueError("%s: no data rows" % path)
    rows.sort(key=lambda r: r[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise ValueError("%s: duplicate date %s" % (path, a))
    return ReturnsPanel([r[0] for r in rows], assets,
                        np.vstack([r[1] for r in rows]))


def save_returns(panel, path):
    """Inverse of load_returns; missing values become empty cells."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date"] + list(panel.assets))
        for day, row in zip(panel.dates, panel.returns):
            cells = ["" if np.isnan(x) else repr(float(x)) for x in row]
            w.writerow([day.isoformat()] + cells)


# -- rolling windows -------------------------------------------------------


def _month_index(day):
    return day.year * 12 + (day.month - 1)


def _month_id(index):
    return "%d-%d" % (index % 12 + 1, index // 12)


@dataclass
class WindowSlice:
    """Rows of a panel covering one calendar window, filtered assets."""

    window_id: str        # "M-YYYY" of the start month, no zero padding
    dates: list
    assets: list
    returns: np.ndarray   # (len(dates), len(assets)), NaN preserved


def rolling_windows(panel, width_months=6, step_months=1, min_obs=0.9):
    """Calendar windows of ``width_months``, stepped by ``step_months``.

    A window starting in month M keeps every panel row dated within months
    M..M+width-1 and every asset with at least ``min_obs`` of the window's
    rows observed.  Ids name the start month, e.g. "1-2001".  A window
    left without rows or without assets is an error.
    """
    if width_months < 1 or step_months < 1:
        raise ValueError("window width and step must be positive")
    if not 0.0 <= min_obs <= 1.0:
        raise ValueError("min_obs is a fraction of the window length")
    months = np.array([_month_index(d) for d in panel.dates])
    first, last = int(months[0]), int(months[-1])
    if last - first + 1 < width_months:
        raise ValueError("panel spans %d months, shorter than the %d-month "
                         "window" % (last - first + 1, width_months))
    out = []
    for start in range(first, last - width_months + 2, step_months):
        wid = _month_id(start)
        mask = (months >= start) & (months < start + width_months)
        if not mask.any():
            raise ValueError("window %s contains no observations" % wid)
        rows = panel.returns[mask]
        need = min_obs * rows.shape[0]
        keep = np.nonzero((~np.isnan(rows)).sum(axis=0) >= need)[0]
        if keep.size == 0:
            raise ValueError("window %s has no asset with enough "
                             "observations" % wid)
        out.append(WindowSlice(
            window_id=wid,
            dates=[d for d, m in zip(panel.dates, mask) if m],
            assets=[panel.assets[j] for j in keep],
            returns=rows[:, keep]))
    return out


# -- correlations and distances --------------------------------------------


def correlation_and_distance(returns, min_periods=2):
    """Pairwise-complete correlations and Mantegna distances.

    ``returns`` is an (observations x assets) array with NaN for missing
    values.  Assets whose observed values are constant are dropped with a
    warning.  Returns ``(rho, dist, kept)`` where ``kept`` indexes the
    surviving input columns; ``dist = sqrt(2 (1 - rho))`` with zero
    diagonal.  Correlations nudged outside [-1, 1] by rounding are clamped
    with a warning, so distances always land in [0, 2].
    """
    x = np.asarray(returns, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("need a 2-D returns array with >= 2 columns")
    present = ~np.isnan(x)
    kept = []
    for j in range(x.shape[1]):
        col = x[present[:, j], j]
        if col.size and col.std() > 0.0:
            kept.append(j)
        else:
            warnings.warn("asset column %d is constant or empty in this "
                          "window; dropped" % j)
    kept = np.array(kept, dtype=int)
    if kept.size < 2:
        raise ValueError("fewer than 2 non-constant assets remain")
    x = x[:, kept]
    present = present[:, kept]

    if present.all():
        rho = np.corrcoef(x.T)
    else:
        # pairwise-complete moments; columns are globally centered first so
        # the E[xy] - E[x]E[y] form does not cancel catastrophically
        x0 = np.where(present, x, 0.0)
        shift = x0.sum(axis=0) / present.sum(axis=0)
        x0 = np.where(present, x - shift, 0.0)
        m = present.astype(float)
        counts = m.T @ m
        if (counts < max(2, min_periods)).any():
            i, j = np.unravel_index(int(np.argmin(counts)), counts.shape)
            raise ValueError(
                "columns %d and %d share only %d observations (< %d)"
                % (kept[i], kept[j], int(counts[i, j]), max(2, min_periods)))
        sums = x0.T @ m          # sums[i, j] = sum of x_i over overlap(i, j)
        sqs = (x0 * x0).T @ m
        cross = x0.T @ x0
        mean_ij = sums / counts
        cov = cross / counts - mean_ij * mean_ij.T
        var = sqs / counts - mean_ij**2
        if (var <= 0.0).any() or (var.T <= 0.0).any():
            i, j = np.unravel_index(int(np.argmin(var)), var.shape)
            raise ValueError(
                "columns %d and %d have zero variance on their overlap"
                % (kept[i], kept[j]))
        rho = cov / np.sqrt(var * var.T)
        iu = np.triu_indices(rho.shape[0], k=1)
        rho[(iu[1], iu[0])] = rho[iu]

    drift = np.abs(rho) - 1.0
    if (drift > 0.0).any():
        warnings.warn("clamped %d correlations outside [-1, 1] "
                      "(worst drift %.3g)" % (int((drift > 0).sum()),
                                              float(drift.max())))
        rho = np.clip(rho, -1.0, 1.0)
    np.fill_diagonal(rho, 1.0)
    dist = np.sqrt(np.maximum(2.0 * (1.0 - rho), 0.0))
    np.fill_diagonal(dist, 0.0)
    return rho, dist, kept


# -- minimum spanning tree -------------------------------------------------


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def mst(dist, labels=None):
    """Minimum spanning tree of a symmetric distance matrix (Kruskal).

    Edge weights carry the distances.  Non-finite entries mean "no edge";
    if they disconnect the graph this is an error.  Ties are broken by the
    lexicographic (weight, u, v) order, so the tree is deterministic.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 2:
        raise ValueError("need a square distance matrix of size >= 2")
    n = d.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    upper, lower = d[iu, ju], d[ju, iu]
    ok = np.isfinite(upper)
    if (ok != np.isfinite(lower)).any() or (
            np.abs(upper[ok] - lower[ok]) > 1e-12).any():
        raise ValueError("distance matrix is not symmetric")
    iu, ju, upper = iu[ok], ju[ok], upper[ok]
    order = np.lexsort((ju, iu, upper))
    uf = _UnionFind(n)
    edges = []
    for k in order:
        a, b, w = int(iu[k]), int(ju[k]), float(upper[k])
        if uf.union(a, b):
            edges.append((a, b, w))
            if len(edges) == n - 1:
                break
    if len(edges) != n - 1:
        raise ValueError("distances leave the graph disconnected; "
                         "no spanning tree exists")
    return Graph(n, edges, labels=labels)


# -- market windows --------------------------------------------------------


@dataclass
class MarketWindow:
    """One window's correlation structure and its spanning tree."""

    window_id: str
    assets: list
    rho: np.ndarray
    dist: np.ndarray
    tree: Graph


def build_market_window(window, min_periods=2):
    """Correlations, distances, and MST for one window slice."""
    rho, dist, kept = correlation_and_distance(window.returns,
                                               min_periods=min_periods)
    assets = [window.assets[j] for j in kept]
    return MarketWindow(window_id=window.window_id, assets=assets,
                        rho=rho, dist=dist,
                        tree=mst(dist, labels=assets))


def window_rank_report(market_window, zeta_grid=None, measure="R",
                       weight_mode="distance"):
    """Centrality rankings of the window's MST over a zeta grid.

    ``weight_mode='distance'`` feeds the Mantegna distances straight into
    the adjacency (large distance = heavy edge); ``'inverse'`` uses their
    reciprocals so tightly correlated assets couple strongly instead.
    """
    tree = market_window.tree
    if weight_mode == "inverse":
        edges = [(int(a), int(b), 1.0 / w) for a, b, w in tree.edge_array()]
        tree = Graph(tree.n, edges, labels=tree.labels)
    elif weight_mode != "distance":
        raise ValueError("weight_mode must be 'distance' or 'inverse'")
    return ranking_sweep(sweep(tree, zeta_grid), measure=measure)


# -- delta rank ------------------------------------------------------------


def _ranks_with_tie_snap(values, rel_tol):
    """Node-index ranks after clustering values closer than ``rel_tol``.

    Values whose descending-order gaps stay below ``rel_tol * scale`` rank
    in node order, so nodes that are tied up to floating-point noise (for
    example by graph symmetry) always receive the same relative ranks.
    """
    values = np.asarray(values, dtype=float)
    order = np.argsort(-values, kind="stable")
    sv = values[order]
    cluster = np.zeros(values.size, dtype=np.int64)
    scale = max(float(np.abs(values).max()), 1e-300)
    for k in range(1, values.size):
        step = sv[k - 1] - sv[k] > rel_tol * scale
        cluster[k] = cluster[k - 1] + (1 if step else 0)
    out = np.empty(values.size, dtype=np.int64)
    pos = 1
    for c in range(cluster[-1] + 1):
        members = np.sort(order[cluster == c])
        out[members] = np.arange(pos, pos + members.size)
        pos += members.size
    return out


def delta_rank(profile, zeta_hi=1.0, zeta_lo=0.01, measure="R",
               tie_tol=1e-9):
    """Rank shift between two risk regimes: rank(zeta_lo) - rank(zeta_hi).

    Rank 1 is the most central node, so a positive entry means the node
    climbs the ranking as external risk grows (increased risk exposure).
    The shifts sum to zero over the nodes.  Both zetas must already be on
    the profile's grid.  Values within ``tie_tol`` (relative) are treated
    as tied and ranked by node index, so symmetric nodes whose values
    differ only by floating-point noise report a zero shift.
    """
    values = profile.measure(measure)

    def grid_row(z):
        hits = np.nonzero(np.isclose(profile.zeta_grid, z,
                                     rtol=1e-12, atol=1e-12))[0]
        if hits.size == 0:
            raise ValueError("zeta %g is not on the profile grid" % z)
        return values[hits[0]]

    return (_ranks_with_tie_snap(grid_row(zeta_lo), tie_tol)
            - _ranks_with_tie_snap(grid_row(zeta_hi), tie_tol))


# -- linear discriminant ---------------------------------------------------


@dataclass
class LdaModel:
    """1-D two-class discriminant: score = intercept + slope * x > 0.

    The positive class is +1; confusion counts always sum to the training
    size.
    """

    intercept: float
    slope: float
    accuracy: float
    tp: int
    fn: int
    fp: int
    tn: int

    def to_json_dict(self):
        return {
            "intercept": self.intercept,
            "slope": self.slope,
            "accuracy": self.accuracy,
            "confusion": {"tp": self.tp, "fn": self.fn,
                          "fp": self.fp, "tn": self.tn},
        }


def lda_fit(x, labels):
    """Fisher discriminant for one predictor and labels in {-1, +1}.

    Equal-variance model: slope = (mu+ - mu-) / s2 with the pooled
    (ddof = n - 2) variance, intercept = -(mu+ + mu-) slope / 2 +
    log(n+ / n-).  Empirical class frequencies act as priors.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(labels)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("need equal-length 1-D predictor and labels")
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be -1 or +1")
    pos = y == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes must be nonempty")
    mu_pos, mu_neg = x[pos].mean(), x[~pos].mean()
    ss = ((x[pos] - mu_pos) ** 2).sum() + ((x[~pos] - mu_neg) ** 2).sum()
    if ss == 0.0:
        raise ValueError("zero pooled variance; the discriminant is "
                         "undefined")
    s2 = ss / (x.size - 2)
    slope = (mu_pos - mu_neg) / s2
    intercept = -0.5 * (mu_pos + mu_neg) * slope + math.log(n_pos / n_neg)
    pred = np.where(intercept + slope * x > 0.0, 1, -1)
    tp = int(((pred == 1) & pos).sum())
    fn = int(((pred == -1) & pos).sum())
    fp = int(((pred == 1) & ~pos).sum())
    tn = int(((pred == -1) & ~pos).sum())
    return LdaModel(intercept=float(intercept), slope=float(slope),
                    accuracy=(tp + tn) / x.size, tp=tp, fn=fn, fp=fp, tn=tn)


def lda_predict(model, x):
    """Labels in {-1, +1} under the fitted score rule."""
    x = np.asarray(x, dtype=float)
    return np.where(model.intercept + model.slope * x > 0.0, 1, -1)


# -- outcome trends --------------------------------------------------------


@dataclass
class SvcTrend:
    """Per-company outcome trend: correlation with 1/year and class label."""

    rho: float
    label: int  # +1 growing outcome, -1 shrinking


def load_svc(path):
    """Read ``company,year,value`` CSV rows into {company: {year: value}}.

    A first row equal to ``company,year,value`` (any case) is a header.
    Duplicate (company, year) pairs are an error.
    """
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s:
                continue
            parts = [p.strip() for p in s.split(",")]
            if lineno == 1 and [p.lower() for p in parts] == ["company",
                                                              "year",
                                                              "value"]:
                continue
            if len(parts) != 3 or not parts[0]:
                raise ValueError("%s:%d: expected 'company,year,value', "
                                 "got %r" % (path, lineno, s))
            try:
                year, value = int(parts[1]), float(parts[2])
            except ValueError:
                raise ValueError("%s:%d: unparseable year or value in %r"
                                 % (path, lineno, s)) from None
            years = out.setdefault(parts[0], {})
            if year in years:
                raise ValueError("%s:%d: duplicate year %d for %s"
                                 % (path, lineno, year, parts[0]))
            years[year] = value
    if not out:
        raise ValueError("%s: no data rows" % path)
    return out


def svc_trend(svc_by_year, threshold=0.05):
    """Classify outcome trends by correlation against the reciprocal year.

    For each company the Pearson correlation rho between its values and
    1/year is computed over its years (>= 3 required).  Growing values
    give rho < 0 and the label +1; shrinking values give rho > 0 and -1.
    Companies with |rho| < threshold are dropped.  A constant value
    series is an error.
    """
    if threshold < 0.0:
        raise ValueError("threshold must be nonnegative")
    out = {}
    for company, series in svc_by_year.items():
        years = sorted(series)
        if len(years) < 3:
            raise ValueError("company %s has %d years of data; need >= 3"
                             % (company, len(years)))
        vals = np.array([series[y] for y in years], dtype=float)
        recip = 1.0 / np.array(years, dtype=float)
        if vals.std() == 0.0:
            raise ValueError("company %s has a constant value series; "
                             "its trend is undefined" % company)
        v = vals - vals.mean()
        r = recip - recip.mean()
        rho = float((v @ r) / np.sqrt((v @ v) * (r @ r)))
        if abs(rho) < threshold:
            continue
        out[company] = SvcTrend(rho=rho, label=1 if rho < 0.0 else -1)
    return out
