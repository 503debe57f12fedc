"""Ranking interlacement: where two nodes swap order along the zeta axis.

For a node pair (i, j) and a measure M in {R, C, T}, the difference

    f(zeta) = M_i(zeta) - M_j(zeta) = sum_k d_k exp(zeta * lam_k)

is an exponential sum over the adjacency spectrum.  An interlacement is a
zeta* > 0 where f changes sign: the pair's ranking depends on which side of
zeta* the analysis sits.  This module locates crossings numerically
(``detect``), predicts them from leading walk counts (``heuristic_linear``,
``heuristic_poly``), continues past a known crossing (``shifted_expansion``),
and certifies an upper bound beyond which the ranking is frozen
(``finiteness_check``).

All computations run on the scaled difference exp(-zeta*lam_1) * f, whose
sign pattern is identical and which stays finite for any zeta.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .centrality import default_zeta_grid
from .graph import walk_counts
from .spectral import decompose

BRACKET_TOL_DEFAULT = 1e-8
TANGENCY_TOL_DEFAULT = 1e-10
_MEASURES = ("R", "C", "T")


class InterlacementError(ValueError):
    """A heuristic's preconditions fail for the requested pair."""


@dataclass
class InterlacementEvent:
    """One sign change of the measure difference.

    ``zeta_star`` is the bracket midpoint; the difference changes sign
    exactly once inside ``bracket``, from ``sign_before`` to ``sign_after``
    (+1 means node i above node j).
    """

    i: int
    j: int
    measure: str
    zeta_star: float
    bracket: tuple
    sign_before: int
    sign_after: int
    method: str = "detect"


@dataclass
class DetectionResult:
    """Crossings on a grid, plus near-touches that never flip sign."""

    events: list
    tangencies: list


@dataclass
class SeriesPolynomial:
    """Truncated-series crossing polynomial for one pair and measure.

    ``coefficients`` are ascending powers of the reduced polynomial (the
    common leading power of zeta is divided out).  ``roots`` holds the
    positive real roots in ascending order with their normalized residuals;
    ``descartes_bound`` caps how many there can be.
    """

    i: int
    j: int
    measure: str
    k: int
    k0: int
    coefficients: np.ndarray
    roots: np.ndarray
    residuals: np.ndarray
    descartes_bound: int


@dataclass
class FinitenessReport:
    """Tail-bound certificate that no crossing exists beyond ``zeta_bar``."""

    i: int
    j: int
    measure: str
    decidable: bool
    zeta_bar: float | None
    perron_gap: float
    tail_at_zero: float
    message: str


# -- spectral difference -------------------------------------------------------


def _pair_coefficients(dec, i, j, measure):
    """Coefficients d_k with M_i - M_j = sum_k d_k exp(zeta lam_k)."""
    u = dec.eigenvectors
    if measure == "C":
        return u[i] ** 2 - u[j] ** 2
    if measure == "R":
        return u.sum(axis=0) * (u[i] - u[j])
    if measure == "T":
        return u.sum(axis=0) * (u[i] - u[j]) - (u[i] ** 2 - u[j] ** 2)
    raise ValueError("measure must be one of %r, got %r" % (_MEASURES, measure))


def _check_pair(g, i, j):
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise ValueError("node indices out of range 0..%d" % (g.n - 1))
    if i == j:
        raise ValueError("need two distinct nodes")


def _scaled_difference(coef, lam, zetas):
    """exp(-zeta lam_1) * f(zeta), vectorized over a zeta array."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=float))
    return np.exp(np.outer(zetas, lam - lam[0])) @ coef


def difference_derivatives(g, i, j, measure, zeta, max_order, dec=None):
    """Derivatives d^m/dzeta^m of M_i - M_j at ``zeta``, orders 0..max_order.

    Computed spectrally: the m-th derivative is sum_k lam_k^m d_k
    exp(zeta lam_k).  Unscaled, so ``zeta * lam_1`` must stay within
    floating range.
    """
    _check_pair(g, i, j)
    d = dec if dec is not None else decompose(g)
    coef = _pair_coefficients(d, i, j, measure)
    lam = d.eigenvalues
    powers = np.vander(lam, max_order + 1, increasing=True).T  # (orders, n)
    return powers @ (coef * np.exp(zeta * lam))


# -- detection -------------------------------------------------------------------


def detect(g, i, j, measure="C", zeta_grid=None, dec=None,
           bracket_tol=BRACKET_TOL_DEFAULT, tangency_tol=TANGENCY_TOL_DEFAULT):
    """Scan a zeta grid for sign changes of M_i - M_j and bisect each one.

    Grid values within the numerical noise floor count as zero: exactly
    tied pairs (automorphic nodes) produce no spurious events.  A local
    minimum of |difference| below ``tangency_tol`` without a sign flip is
    reported as a tangency candidate rather than a crossing.
    """
    _check_pair(g, i, j)
    grid = np.asarray(default_zeta_grid() if zeta_grid is None else zeta_grid,
                      dtype=float)
    if grid.ndim != 1 or grid.size < 2 or (np.diff(grid) <= 0).any():
        raise ValueError("zeta grid must be increasing with >= 2 points")
    if (grid <= 0).any():
        raise ValueError("zeta grid must be positive: the difference "
                         "vanishes identically at zeta = 0")
    d = dec if dec is not None else decompose(g)
    coef = _pair_coefficients(d, i, j, measure)
    lam = d.eigenvalues
    vals = _scaled_difference(coef, lam, grid)
    floor = 1e-12 * max(1.0, float(np.abs(coef).sum()))
    signs = np.where(np.abs(vals) <= floor, 0, np.sign(vals)).astype(int)

    events = []
    nz = np.nonzero(signs)[0]
    for a, b in zip(nz[:-1], nz[1:]):
        if signs[a] == signs[b]:
            continue
        lo, hi = float(grid[a]), float(grid[b])
        flo = float(vals[a])
        while hi - lo > bracket_tol:
            mid = 0.5 * (lo + hi)
            fm = float(_scaled_difference(coef, lam, mid)[0])
            if fm != 0.0 and np.sign(fm) == np.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        events.append(InterlacementEvent(
            i=i, j=j, measure=measure, zeta_star=0.5 * (lo + hi),
            bracket=(lo, hi), sign_before=int(signs[a]),
            sign_after=int(signs[b])))

    tangencies = []
    log_tol = math.log(tangency_tol)
    absvals = np.abs(vals)
    for m in range(1, grid.size - 1):
        if signs[m - 1] == 0 or signs[m + 1] == 0 or signs[m - 1] != signs[m + 1]:
            continue
        if not (absvals[m] <= absvals[m - 1] and absvals[m] <= absvals[m + 1]):
            continue
        # |f| = exp(zeta lam_1) * |scaled|, compared in log space
        logf = grid[m] * lam[0] + (math.log(absvals[m]) if absvals[m] > 0
                                   else -math.inf)
        if logf < log_tol:
            tangencies.append(float(grid[m]))
    return DetectionResult(events, tangencies)


# -- series heuristics -------------------------------------------------------------


def _series_coefficients(g, measure, kmax, walks=None):
    """Per-order walk-count differences feeding the measure's series.

    C draws on closed walks from order 2; R on walk totals from order 1; T
    on open walks (total minus closed) from order 1.  Returns (orders,
    per-node array list) with orders[m] the walk order of coefficient m.
    """
    wc = walks if walks is not None else walk_counts(g, kmax)
    if len(wc) <= kmax:
        raise ValueError("walks cover order %d, need %d" % (len(wc) - 1, kmax))
    if measure == "C":
        start = 2
        seq = [wc[m].per_node_closed.astype(float) for m in range(2, kmax + 1)]
    elif measure == "R":
        start = 1
        seq = [wc[m].per_node_total.astype(float) for m in range(1, kmax + 1)]
    elif measure == "T":
        start = 1
        seq = [wc[m].per_node_total.astype(float)
               - wc[m].per_node_closed.astype(float)
               for m in range(1, kmax + 1)]
    else:
        raise ValueError("measure must be one of %r, got %r"
                         % (_MEASURES, measure))
    return start, seq


def heuristic_linear(g, i, j, measure="C", walks=None):
    """Leading-order crossing estimate from the first two series terms.

    For C the truncation 'k_i - k_j + zeta * (2t_i - 2t_j)/3 = 0' (closed
    walks of orders 2 and 3) gives zeta* = 3 (w2_i - w2_j) / (w3_j - w3_i);
    R and T use their first two orders the same way.  Returns None when the
    two leading differences do not have strictly opposite signs, i.e. the
    minimal-order truncation has no positive root.
    """
    _check_pair(g, i, j)
    start, seq = _series_coefficients(g, measure, 3 if measure == "C" else 2,
                                      walks=walks)
    a = float(seq[0][i] - seq[0][j])
    b = float(seq[1][i] - seq[1][j])
    if a == 0.0 or b == 0.0 or np.sign(a) == np.sign(b):
        return None
    # reduced linear truncation: a/start! + b zeta/(start+1)! = 0
    return -(start + 1) * a / b


def heuristic_poly(g, i, j, measure="C", k=6, walks=None):
    """Roots of the order-k series truncation of the measure difference.

    The reduced polynomial has ascending coefficients ``delta_m / m!`` for
    walk orders m up to k, divided by the common leading power of zeta.
    The pair is rejected (``InterlacementError``) unless ``k >= k0``, where
    k0 is the order at which the coefficient sequence first changes sign
    (zero counts as positive).  Roots come from the eigenvalues of the
    companion matrix; only positive real roots with small normalized
    residual are kept.
    """
    _check_pair(g, i, j)
    horizon = max(k, 60)
    start, seq = _series_coefficients(g, measure, horizon, walks=walks)
    deltas = np.array([row[i] - row[j] for row in seq])
    pos = deltas >= 0  # zero counts as positive
    change = np.nonzero(pos[1:] != pos[:-1])[0]
    if change.size == 0:
        raise InterlacementError(
            "pair (%d, %d): the %s series coefficients never change sign "
            "through order %d; no crossing is indicated at series level"
            % (i, j, measure, horizon))
    k0 = int(change[0]) + 1 + start
    if k < k0:
        raise InterlacementError(
            "pair (%d, %d): truncation order k=%d is below the first sign "
            "change k0=%d" % (i, j, k, k0))
    orders = np.arange(start, k + 1)
    coeffs = deltas[:k - start + 1] / np.array(
        [math.factorial(m) for m in orders])
    nz = np.abs(coeffs) > 0
    descartes = int(np.count_nonzero(np.diff(np.sign(coeffs[nz])) != 0))
    roots, residuals = _positive_real_roots(coeffs)
    return SeriesPolynomial(i=i, j=j, measure=measure, k=k, k0=k0,
                            coefficients=coeffs, roots=roots,
                            residuals=residuals, descartes_bound=descartes)


def _positive_real_roots(ascending, imag_tol=1e-8, residual_tol=1e-10):
    """Positive real roots of a polynomial given ascending coefficients.

    Uses the companion-matrix eigenvalues (np.roots).  A root is kept when
    its imaginary part is negligible and its backward-error residual
    |p(x)| / sum_m |c_m| x^m falls below ``residual_tol``.
    """
    coeffs = np.asarray(ascending, dtype=float)
    while coeffs.size and coeffs[-1] == 0.0:
        coeffs = coeffs[:-1]
    if coeffs.size < 2:
        return np.zeros(0), np.zeros(0)
    desc = coeffs[::-1]
    raw = np.roots(desc)
    keep = []
    for r in raw:
        if abs(r.imag) > imag_tol * (1.0 + abs(r)):
            continue
        x = float(r.real)
        if x <= 0.0:
            continue
        res = abs(np.polyval(desc, x)) / np.polyval(np.abs(desc), x)
        if res <= residual_tol:
            keep.append((x, res))
    keep.sort()
    if not keep:
        return np.zeros(0), np.zeros(0)
    xs, rs = zip(*keep)
    return np.array(xs), np.array(rs)


def shifted_expansion(g, i, j, measure, zeta_star, k=6, dec=None,
                      bracket_tol=BRACKET_TOL_DEFAULT):
    """Predict the crossing after ``zeta_star`` by re-expanding there.

    Builds the degree-k Taylor polynomial of the measure difference around
    zeta_star from its spectral derivatives, takes the smallest positive
    root eta* of the reduced polynomial, and validates the candidate
    zeta_star + eta* with a local ``detect``.  Returns the refined event,
    or None when no positive root exists or the candidate fails validation.
    """
    _check_pair(g, i, j)
    if zeta_star < 0:
        raise ValueError("zeta_star must be nonnegative")
    if k < 1:
        raise ValueError("need k >= 1 derivative orders")
    d = dec if dec is not None else decompose(g)
    coef = _pair_coefficients(d, i, j, measure)
    lam = d.eigenvalues
    # scaled derivatives: common factor exp(zeta* lam_1) drops out of roots
    weights = coef * np.exp(zeta_star * (lam - lam[0]))
    derivs = np.vander(lam, k + 1, increasing=True).T @ weights  # orders 0..k
    coeffs = derivs[1:] / np.array([math.factorial(m) for m in range(1, k + 1)])
    roots, _ = _positive_real_roots(coeffs)
    if roots.size == 0:
        return None
    eta = float(roots[0])
    lo = zeta_star + max(10 * bracket_tol, 0.05 * eta)
    hi = zeta_star + 1.6 * eta
    local = np.linspace(lo, hi, 400)
    found = detect(g, i, j, measure=measure, zeta_grid=local, dec=d,
                   bracket_tol=bracket_tol)
    if not found.events:
        return None
    ev = found.events[0]
    ev.method = "shifted-expansion"
    return ev


# -- finiteness ------------------------------------------------------------------


def finiteness_check(g, i, j, measure="C", dec=None):
    """Certify a zeta_bar beyond which the pair's order is frozen.

    Beyond zeta_bar the leading term |d_1| dominates the (monotonically
    shrinking) tail sum_{k>=2} |d_k| exp(zeta (lam_k - lam_1)), so the
    difference keeps the sign of d_1 and no further crossing can occur.
    Pairs with equal Perron entries (within 1e-12) are undecidable here.
    """
    _check_pair(g, i, j)
    d = dec if dec is not None else decompose(g)
    u = d.eigenvectors
    lam = d.eigenvalues
    perron_gap = float(abs(u[i, 0] - u[j, 0]))
    coef = _pair_coefficients(d, i, j, measure)
    lead = abs(float(coef[0]))
    tail0 = float(np.abs(coef[1:]).sum())
    if perron_gap <= 1e-12:
        return FinitenessReport(
            i=i, j=j, measure=measure, decidable=False, zeta_bar=None,
            perron_gap=perron_gap, tail_at_zero=tail0,
            message="leading eigenvector entries agree within 1e-12; "
                    "the dominance test cannot decide this pair")

    gaps = lam[1:] - lam[0]
    mags = np.abs(coef[1:])

    def tail(z):
        return float(np.exp(z * gaps) @ mags)

    if tail0 < lead:
        return FinitenessReport(
            i=i, j=j, measure=measure, decidable=True, zeta_bar=0.0,
            perron_gap=perron_gap, tail_at_zero=tail0,
            message="leading term dominates already at zeta = 0")
    hi = 1.0
    for _ in range(80):
        if tail(hi) < lead:
            break
        hi *= 2.0
    else:
        return FinitenessReport(
            i=i, j=j, measure=measure, decidable=False, zeta_bar=None,
            perron_gap=perron_gap, tail_at_zero=tail0,
            message="tail bound did not certify dominance below zeta ~ 1e24 "
                    "(vanishing spectral gap?)")
    lo = 0.0
    while hi - lo > 1e-10 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if tail(mid) < lead:
            hi = mid
        else:
            lo = mid
    return FinitenessReport(
        i=i, j=j, measure=measure, decidable=True, zeta_bar=hi,
        perron_gap=perron_gap, tail_at_zero=tail0,
        message="no crossing is possible beyond zeta_bar")


# -- export ----------------------------------------------------------------------


def events_to_csv(events, path):
    """Write events with columns i, j, measure, method, zeta_star, bracket."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "measure", "method", "zeta_star",
                    "bracket_lo", "bracket_hi"])
        for e in events:
            w.writerow([e.i, e.j, e.measure, e.method, repr(e.zeta_star),
                        repr(e.bracket[0]), repr(e.bracket[1])])
