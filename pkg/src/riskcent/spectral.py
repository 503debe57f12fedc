"""Spectral engine: eigendecompositions and matrix-exponential actions.

Everything downstream reduces to evaluating the action ``exp(z*A) @ v`` and
the diagonal ``diag(exp(z*A))`` for a symmetric adjacency A and z >= 0.  Two
routes are provided:

* a dense route through one full symmetric eigendecomposition, reusable
  across many z values, and
* a Krylov route (Lanczos with full reorthogonalization) that only touches
  A through matrix-vector products, for graphs too large to decompose.

The dense formulas are written with ``expm1`` so that the small-z signal
``exp(z*A) - I`` is not lost to cancellation: since the eigenvectors are
orthonormal, ``exp(zA)v = v + U diag(expm1(z*lam)) U^T v`` holds exactly.
Scaled variants return ``(value * exp(-log_scale), log_scale)`` so rankings
stay finite when ``z * lam_1`` would overflow ``exp``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .graph import Graph

DENSE_LIMIT_DEFAULT = 5000
KRYLOV_TOL_DEFAULT = 1e-10
KRYLOV_MAX_DIM_DEFAULT = 200


class EigensolverError(RuntimeError):
    """Dense eigendecomposition failed to converge."""


class KrylovConvergenceError(RuntimeError):
    """Lanczos iteration hit its dimension cap before the tolerance."""

    def __init__(self, message, achieved, dimension):
        super().__init__(message)
        self.achieved = achieved
        self.dimension = dimension


@dataclass
class SpectralDecomposition:
    """Full eigensystem of a symmetric adjacency matrix.

    ``eigenvalues`` are sorted descending and ``eigenvectors[:, j]`` is the
    orthonormal eigenvector for ``eigenvalues[j]``.  Each eigenvector is
    sign-normalized so its largest-magnitude entry is positive; for a
    connected graph this makes the leading (Perron) vector entrywise
    positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self):
        return self.eigenvalues.size

    @property
    def gap(self):
        """Spectral gap lam_1 - lam_2 (0 for a single node)."""
        if self.n < 2:
            return 0.0
        return float(self.eigenvalues[0] - self.eigenvalues[1])


def decompose(g, dense_limit=DENSE_LIMIT_DEFAULT):
    """Dense eigendecomposition of the adjacency of ``g``.

    Refuses graphs larger than ``dense_limit`` nodes; use the Krylov
    variants of the exponential actions instead.
    """
    if g.n > dense_limit:
        raise ValueError(
            "graph has %d nodes, above the dense limit %d; "
            "use method='krylov' actions" % (g.n, dense_limit))
    try:
        lam, u = np.linalg.eigh(g.adjacency())
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(
            "symmetric eigensolver did not converge on n=%d: %s"
            % (g.n, exc)) from exc
    lam = lam[::-1].copy()
    u = u[:, ::-1].copy()
    # deterministic sign: largest-|entry| positive per column
    piv = np.argmax(np.abs(u), axis=0)
    flip = u[piv, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    return SpectralDecomposition(lam, u)


def _as_decomposition(g, dec, dense_limit):
    if dec is not None:
        return dec
    return decompose(g, dense_limit=dense_limit)


def _check_zeta(zeta):
    z = float(zeta)
    if z < 0 or not np.isfinite(z):
        raise ValueError("zeta must be a finite nonnegative number, got %r"
                         % (zeta,))
    return z


def _check_vector(v, n):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ValueError("vector has shape %r, expected (%d,)" % (v.shape, n))
    return v


# -- dense route -----------------------------------------------------------


def _action_dense(dec, zeta, v):
    u = dec.eigenvectors
    c = u.T @ v
    return v + u @ (np.expm1(zeta * dec.eigenvalues) * c)


def _action_dense_scaled(dec, zeta, v):
    u = dec.eigenvectors
    c = u.T @ v
    s = zeta * dec.eigenvalues[0]
    return u @ (np.exp(zeta * dec.eigenvalues - s) * c), s


def _diagonal_dense(dec, zeta):
    u2 = dec.eigenvectors**2
    return 1.0 + u2 @ np.expm1(zeta * dec.eigenvalues)


def _diagonal_dense_scaled(dec, zeta):
    u2 = dec.eigenvectors**2
    s = zeta * dec.eigenvalues[0]
    return u2 @ np.exp(zeta * dec.eigenvalues - s), s


# -- Krylov route ------------------------------------------------------------


def _expm_tridiag_e1(alphas, betas, zeta):
    """Scaled first column of exp(zeta*T) for symmetric tridiagonal T.

    Returns ``(col, s)`` with ``exp(zeta*T) e_1 = exp(s) * col`` and
    ``s = zeta * theta_max``, keeping the small solve finite for any zeta.
    """
    if len(alphas) == 1:
        return np.array([1.0]), zeta * alphas[0]
    theta, s = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas))
    top = zeta * theta[-1]
    return s @ (np.exp(zeta * theta - top) * s[0]), top


def _lanczos_expm_action(matvec, zeta, v, tol, max_dim):
    """exp(zeta*A) v through the Lanczos process with full reorthogonalization.

    The error estimate is the magnitude of the first neglected term,
    ``beta_m * |[exp(zeta*T_m)]_{m,1}|``; iteration stops once two
    consecutive estimates fall below ``tol`` relative to the current
    approximation (measured on the scaled exponential to stay finite).
    """
    n = v.size
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return np.zeros(n), 0.0
    m_cap = min(max_dim, n)
    vs = np.empty((m_cap, n))
    vs[0] = v / beta0
    alphas = []
    betas = []
    good = 0
    for m in range(1, m_cap + 1):
        w = matvec(vs[m - 1])
        if m > 1:
            w = w - betas[-1] * vs[m - 2]
        a = float(vs[m - 1] @ w)
        alphas.append(a)
        w = w - a * vs[m - 1]
        # full reorthogonalization keeps the basis numerically orthogonal
        w = w - vs[:m].T @ (vs[:m] @ w)
        b = float(np.linalg.norm(w))
        small, shift = _expm_tridiag_e1(alphas, betas, zeta)
        scale = float(np.linalg.norm(small))
        norm_est = max(max(abs(x) for x in alphas), max(betas, default=0.0))
        if b < 1e-12 * max(1.0, norm_est):
            break  # invariant subspace: the small solve is exact
        rel = b * abs(small[-1]) / max(scale, 1e-300)
        if rel <= tol:
            good += 1
            if good >= 2:
                break
        else:
            good = 0
        if m == m_cap:
            raise KrylovConvergenceError(
                "Lanczos exp action did not reach rel tol %g in %d "
                "dimensions (achieved %g)" % (tol, m_cap, rel),
                achieved=rel, dimension=m_cap)
        betas.append(b)
        vs[m] = w / b
    m = len(alphas)
    y = vs[:m].T @ (beta0 * small)
    return y, shift


def _lanczos_diag_entry(matvec, zeta, i, n, tol, max_dim):
    """(exp(zeta*A))_{ii} by Lanczos quadrature started from e_i.

    Convergence is declared when two consecutive iterates agree to ``tol``
    relatively; returns the scaled value and the log scale used.
    """
    v = np.zeros(n)
    v[i] = 1.0
    m_cap = min(max_dim, n)
    vs = np.empty((m_cap, n))
    vs[0] = v
    alphas = []
    betas = []
    prev = None
    good = 0
    rel = np.inf
    for m in range(1, m_cap + 1):
        w = matvec(vs[m - 1])
        if m > 1:
            w = w - betas[-1] * vs[m - 2]
        a = float(vs[m - 1] @ w)
        alphas.append(a)
        w = w - a * vs[m - 1]
        w = w - vs[:m].T @ (vs[:m] @ w)
        b = float(np.linalg.norm(w))
        col, shift = _expm_tridiag_e1(alphas, betas, zeta)
        val = float(col[0])
        if prev is not None:
            # compare on a common scale: prev carried its own shift
            rel = abs(val - prev[0] * np.exp(prev[1] - shift)) / max(abs(val), 1e-300)
            if rel <= tol:
                good += 1
                if good >= 2:
                    return val, shift
            else:
                good = 0
        prev = (val, shift)
        norm_est = max(max(abs(x) for x in alphas), max(betas, default=0.0))
        if b < 1e-12 * max(1.0, norm_est):
            return val, shift
        if m == m_cap:
            raise KrylovConvergenceError(
                "Lanczos quadrature for node %d did not reach rel tol %g "
                "in %d dimensions" % (i, tol, m_cap),
                achieved=rel, dimension=m_cap)
        betas.append(b)
        vs[m] = w / b
    return val, shift


# -- public actions ----------------------------------------------------------


def _resolve_method(g, dec, method, dense_limit):
    if method not in ("auto", "dense", "krylov"):
        raise ValueError("method must be 'auto', 'dense', or 'krylov'")
    if method == "auto":
        return "dense" if (dec is not None or g.n <= dense_limit) else "krylov"
    return method


def expm_action(g, zeta, v, dec=None, method="auto", tol=KRYLOV_TOL_DEFAULT,
                max_dim=KRYLOV_MAX_DIM_DEFAULT, dense_limit=DENSE_LIMIT_DEFAULT):
    """Action ``exp(zeta*A) @ v`` on the adjacency of ``g``.

    With ``method='dense'`` (or 'auto' on small graphs) one shared
    eigendecomposition ``dec`` may be passed to amortize repeated calls.
    ``method='krylov'`` never forms a dense matrix.
    """
    zeta = _check_zeta(zeta)
    v = _check_vector(v, g.n)
    route = _resolve_method(g, dec, method, dense_limit)
    if route == "dense":
        return _action_dense(_as_decomposition(g, dec, dense_limit), zeta, v)
    a = g.sparse_adjacency()
    y, log_scale = _lanczos_expm_action(lambda x: a @ x, zeta, v, tol, max_dim)
    return y * np.exp(log_scale)


def expm_action_scaled(g, zeta, v, dec=None, method="auto",
                       tol=KRYLOV_TOL_DEFAULT, max_dim=KRYLOV_MAX_DIM_DEFAULT,
                       dense_limit=DENSE_LIMIT_DEFAULT):
    """Overflow-safe action: returns ``(y, s)`` with exp(zeta*A) v = exp(s) * y.

    The scale ``s`` is ``zeta * lam_1`` on the dense route.  Rankings and
    ratios of the entries of ``y`` equal those of the unscaled action.
    """
    zeta = _check_zeta(zeta)
    v = _check_vector(v, g.n)
    route = _resolve_method(g, dec, method, dense_limit)
    if route == "dense":
        return _action_dense_scaled(_as_decomposition(g, dec, dense_limit), zeta, v)
    a = g.sparse_adjacency()
    return _lanczos_expm_action(lambda x: a @ x, zeta, v, tol, max_dim)


def expm_diagonal(g, zeta, dec=None, method="auto", tol=KRYLOV_TOL_DEFAULT,
                  max_dim=KRYLOV_MAX_DIM_DEFAULT,
                  dense_limit=DENSE_LIMIT_DEFAULT):
    """Diagonal of ``exp(zeta*A)``.

    Dense route: ``1 + (U*U) expm1(zeta*lam)``.  Krylov route: one Lanczos
    quadrature per node, each started from the node's indicator vector.
    """
    zeta = _check_zeta(zeta)
    route = _resolve_method(g, dec, method, dense_limit)
    if route == "dense":
        return _diagonal_dense(_as_decomposition(g, dec, dense_limit), zeta)
    a = g.sparse_adjacency()
    mv = lambda x: a @ x
    out = np.empty(g.n)
    for i in range(g.n):
        val, s = _lanczos_diag_entry(mv, zeta, i, g.n, tol, max_dim)
        out[i] = val * np.exp(s)
    return out


def expm_diagonal_scaled(g, zeta, dec=None, dense_limit=DENSE_LIMIT_DEFAULT):
    """Overflow-safe diagonal ``(d, s)`` with diag(exp(zeta*A)) = exp(s) * d.

    Dense route only; the common scale is ``zeta * lam_1``.
    """
    zeta = _check_zeta(zeta)
    return _diagonal_dense_scaled(_as_decomposition(g, dec, dense_limit), zeta)
