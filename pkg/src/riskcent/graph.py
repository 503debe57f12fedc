"""Undirected graph container, generators, loaders, and walk-count primitives.

Nodes are dense integers ``0..n-1``; an optional label table maps them back
to external names.  Graphs are simple (no self-loops, no parallel edges) and
edge weights are strictly positive.  All heavier algebra lives in
:mod:`riskcent.spectral`; this module only provides structure, I/O, and exact
walk counting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    """Invalid graph structure or malformed graph input."""


# Largest value a walk-count entry may reach before the next integer
# matrix-vector product could wrap int64.
_INT64_CAP = 2**63 - 1


class Graph:
    """Simple undirected weighted graph.

    Parameters
    ----------
    n : int
        Number of nodes.  Isolated nodes are allowed, so ``n`` may exceed
        the largest endpoint appearing in ``edges``.
    edges : iterable
        Iterable of ``(u, v)`` or ``(u, v, w)`` with integer endpoints in
        ``0..n-1`` and weight ``w > 0`` (default 1).  Each undirected edge
        appears once; duplicates are an error, not merged.
    labels : sequence of str, optional
        External node names.  Defaults to ``str(i)``.
    """

    def __init__(self, n, edges=(), labels=None):
        n = int(n)
        if n <= 0:
            raise GraphError("graph needs at least one node, got n=%d" % n)
        rows = [(int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0)
                for e in edges]
        if rows:
            u = np.array([r[0] for r in rows], dtype=np.int64)
            v = np.array([r[1] for r in rows], dtype=np.int64)
            w = np.array([r[2] for r in rows], dtype=np.float64)
        else:
            u = np.zeros(0, dtype=np.int64)
            v = np.zeros(0, dtype=np.int64)
            w = np.zeros(0, dtype=np.float64)
        if u.size:
            if (u < 0).any() or (u >= n).any() or (v < 0).any() or (v >= n).any():
                raise GraphError("edge endpoint out of range 0..%d" % (n - 1))
            if (u == v).any():
                k = int(np.argmax(u == v))
                raise GraphError("self-loop at node %d is not allowed" % u[k])
            if (w <= 0).any() or not np.isfinite(w).all():
                k = int(np.argmax(~((w > 0) & np.isfinite(w))))
                raise GraphError(
                    "edge (%d, %d) has nonpositive or non-finite weight %r"
                    % (u[k], v[k], float(w[k])))
            lo, hi = np.minimum(u, v), np.maximum(u, v)
            key = lo * n + hi
            order = np.argsort(key, kind="stable")
            lo, hi, w, key = lo[order], hi[order], w[order], key[order]
            dup = np.nonzero(key[1:] == key[:-1])[0]
            if dup.size:
                k = int(dup[0])
                raise GraphError(
                    "duplicate edge (%d, %d) with weights %g and %g"
                    % (lo[k], hi[k], w[k], w[k + 1]))
            u, v = lo, hi
        self.n = n
        self._u, self._v, self._w = u, v, w
        if labels is not None:
            labels = [str(x) for x in labels]
            if len(labels) != n:
                raise GraphError("expected %d labels, got %d" % (n, len(labels)))
        self.labels = labels if labels is not None else [str(i) for i in range(n)]
        self._adj = None
        self._csr = None

    # -- basic structure -------------------------------------------------

    @property
    def m(self):
        """Number of undirected edges."""
        return int(self._u.size)

    @property
    def is_weighted(self):
        """True when any edge weight differs from 1."""
        return bool(self._w.size) and bool((self._w != 1.0).any())

    def edge_array(self):
        """Edges as an ``(m, 3)`` float array ``[u, v, w]`` in canonical order."""
        return np.column_stack([self._u.astype(float),
                                self._v.astype(float), self._w])

    def adjacency(self):
        """Dense symmetric adjacency matrix (float64, cached)."""
        if self._adj is None:
            a = np.zeros((self.n, self.n))
            a[self._u, self._v] = self._w
            a[self._v, self._u] = self._w
            self._adj = a
        return self._adj

    def sparse_adjacency(self):
        """Symmetric CSR adjacency (cached)."""
        if self._csr is None:
            u = np.concatenate([self._u, self._v])
            v = np.concatenate([self._v, self._u])
            w = np.concatenate([self._w, self._w])
            self._csr = sp.csr_array((w, (u, v)), shape=(self.n, self.n))
        return self._csr

    def degrees(self):
        """Unweighted degree counts (int64)."""
        d = np.zeros(self.n, dtype=np.int64)
        np.add.at(d, self._u, 1)
        np.add.at(d, self._v, 1)
        return d

    def strengths(self):
        """Weighted degrees, the row sums of the adjacency."""
        s = np.zeros(self.n)
        np.add.at(s, self._u, self._w)
        np.add.at(s, self._v, self._w)
        return s

    def mean_degree(self):
        return 2.0 * self.m / self.n

    def density(self):
        if self.n < 2:
            return 0.0
        return 2.0 * self.m / (self.n * (self.n - 1))

    def component_labels(self):
        """Connected-component index per node."""
        if self.n == 1:
            return np.zeros(1, dtype=np.int64)
        _, lab = connected_components(self.sparse_adjacency(), directed=False)
        return lab.astype(np.int64)

    def is_connected(self):
        return bool(self.component_labels().max(initial=0) == 0)

    # -- serialization ---------------------------------------------------

    def to_json_dict(self):
        """Plain dict ``{n, labels, edges: [[u, v, w], ...]}``."""
        return {
            "n": self.n,
            "labels": list(self.labels),
            "edges": [[int(a), int(b), float(c)]
                      for a, b, c in zip(self._u, self._v, self._w)],
        }

    @classmethod
    def from_json_dict(cls, doc):
        return cls(doc["n"], doc["edges"], labels=doc.get("labels"))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.labels == other.labels
                and np.array_equal(self._u, other._u)
                and np.array_equal(self._v, other._v)
                and np.array_equal(self._w, other._w))

    def __repr__(self):
        kind = "weighted" if self.is_weighted else "unweighted"
        return "Graph(n=%d, m=%d, %s)" % (self.n, self.m, kind)


def save_json(g, path):
    with open(path, "w") as fh:
        json.dump(g.to_json_dict(), fh, indent=1)


def load_json(path):
    with open(path) as fh:
        return Graph.from_json_dict(json.load(fh))


# -- loaders -------------------------------------------------------------


def load_edge_list(path, weighted=False):
    """Read an edge list with one edge per line.

    Lines hold whitespace- or comma-separated tokens ``u v`` or, when
    ``weighted`` is set, ``u v w``.  Node ids may be arbitrary strings and
    are mapped to dense indices in order of first appearance; the original
    ids are kept as labels.  Blank lines and lines starting with ``#`` are
    skipped.  Structural problems are reported with the offending line
    number.
    """
    index = {}
    labels = []
    edges = []
    seen = {}

    def node(tok):
        if tok not in index:
            index[tok] = len(labels)
            labels.append(tok)
        return index[tok]

    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.replace(",", " ").split()
            want = "u v w" if weighted else "u v"
            if len(parts) < 2 or len(parts) > (3 if weighted else 2):
                raise GraphError(
                    "%s:%d: malformed line %r (expected %r)"
                    % (path, lineno, s, want))
            if weighted and len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise GraphError(
                        "%s:%d: weight %r is not a number"
                        % (path, lineno, parts[2])) from None
            else:
                w = 1.0
            if w <= 0 or not np.isfinite(w):
                raise GraphError(
                    "%s:%d: nonpositive weight %g" % (path, lineno, w))
            a, b = node(parts[0]), node(parts[1])
            if a == b:
                raise GraphError(
                    "%s:%d: self-loop on node %r" % (path, lineno, parts[0]))
            key = (min(a, b), max(a, b))
            if key in seen:
                raise GraphError(
                    "%s:%d: duplicate edge %r-%r (first seen on line %d, "
                    "weights %g and %g)"
                    % (path, lineno, parts[0], parts[1], seen[key][0],
                       seen[key][1], w))
            seen[key] = (lineno, w)
            edges.append((a, b, w))
    if not labels:
        raise GraphError("%s: no edges found" % path)
    return Graph(len(labels), edges, labels=labels)


def load_memberships(path):
    """Read two-column ``company,director`` CSV rows.

    Returns a list of ``(company, director)`` string pairs.  A first row
    equal to ``company,director`` (any case) is treated as a header.
    """
    pairs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s:
                continue
            parts = [p.strip() for p in s.split(",")]
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise GraphError(
                    "%s:%d: expected 'company,director', got %r"
                    % (path, lineno, s))
            if lineno == 1 and [p.lower() for p in parts] == ["company", "director"]:
                continue
            pairs.append((parts[0], parts[1]))
    if not pairs:
        raise GraphError("%s: no membership rows found" % path)
    return pairs


# -- generators ----------------------------------------------------------


def generate_er(n, p, seed, require_connected=False, max_retries=1000):
    """Erdos-Renyi G(n, p) sample.

    Each of the n(n-1)/2 pairs is linked independently with probability
    ``p``.  With ``require_connected``, disconnected samples are discarded
    and redrawn from the same stream, up to ``max_retries`` attempts.
    """
    if not 0.0 <= p <= 1.0:
        raise GraphError("edge probability must lie in [0, 1], got %g" % p)
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_retries):
        mask = rng.random(iu.size) < p
        edges = np.column_stack([iu[mask], ju[mask]])
        g = Graph(n, edges.tolist())
        if not require_connected or g.is_connected():
            return g
    raise GraphError(
        "no connected G(%d, %g) sample in %d attempts" % (n, p, max_retries))


def generate_er_m(n, m, seed, require_connected=False, max_retries=1000):
    """Erdos-Renyi G(n, M) sample with exactly ``m`` edges.

    The classic fixed-size model: ``m`` of the n(n-1)/2 pairs are drawn
    uniformly without replacement, so every sample has the same density.
    """
    limit = n * (n - 1) // 2
    if not 0 <= m <= limit:
        raise GraphError("edge count must lie in [0, %d], got %d"
                         % (limit, m))
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_retries):
        idx = rng.choice(limit, size=m, replace=False)
        edges = np.column_stack([iu[idx], ju[idx]])
        g = Graph(n, edges.tolist())
        if not require_connected or g.is_connected():
            return g
    raise GraphError(
        "no connected G(%d; m=%d) sample in %d attempts"
        % (n, m, max_retries))


def generate_complete(n):
    """Complete graph K_n."""
    iu, ju = np.triu_indices(n, k=1)
    return Graph(n, np.column_stack([iu, ju]).tolist())


def generate_star(n):
    """Star graph on ``n`` nodes; the hub is node 0."""
    if n < 2:
        raise GraphError("a star needs at least 2 nodes")
    return Graph(n, [(0, i) for i in range(1, n)])


# -- projections and rewrites --------------------------------------------


def project_bipartite(memberships, binary=False):
    """One-mode projection of company-director memberships.

    Companies become nodes; an edge weight counts the directors two
    companies share.  Companies sharing no director remain isolated nodes.
    With ``binary`` every positive weight is replaced by 1.
    """
    comp_index = {}
    comp_labels = []
    by_director = {}
    for company, director in memberships:
        if company not in comp_index:
            comp_index[company] = len(comp_labels)
            comp_labels.append(company)
        by_director.setdefault(director, set()).add(comp_index[company])
    counts = {}
    for members in by_director.values():
        ms = sorted(members)
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                key = (ms[i], ms[j])
                counts[key] = counts.get(key, 0) + 1
    edges = [(a, b, 1.0 if binary else float(c))
             for (a, b), c in sorted(counts.items())]
    return Graph(len(comp_labels), edges, labels=comp_labels)


def binarize(g):
    """Copy of ``g`` with every weight set to 1."""
    edges = [(int(a), int(b), 1.0) for a, b in zip(g._u, g._v)]
    return Graph(g.n, edges, labels=g.labels)


def largest_component(g):
    """Subgraph induced by the largest connected component.

    Nodes are re-indexed densely; labels follow.  Ties between equal-sized
    components break toward the one containing the smallest node index.
    """
    lab = g.component_labels()
    sizes = np.bincount(lab)
    best = int(np.argmax(sizes))  # argmax takes the first, smallest-index tie
    keep = np.nonzero(lab == best)[0]
    remap = -np.ones(g.n, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    edges = []
    for a, b, w in zip(g._u, g._v, g._w):
        if remap[a] >= 0 and remap[b] >= 0:
            edges.append((int(remap[a]), int(remap[b]), float(w)))
    return Graph(keep.size, edges, labels=[g.labels[i] for i in keep])


def relabel(g, perm):
    """Copy of ``g`` with node ``i`` renamed ``perm[i]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise GraphError("perm must be a permutation of 0..n-1")
    labels = [None] * g.n
    for i in range(g.n):
        labels[perm[i]] = g.labels[i]
    edges = [(int(perm[a]), int(perm[b]), float(w))
             for a, b, w in zip(g._u, g._v, g._w)]
    return Graph(g.n, edges, labels=labels)


# -- walk counts ---------------------------------------------------------


@dataclass
class WalkCounts:
    """Walk tallies of one order.

    ``per_node_total[i]`` counts walks of length ``order`` starting at
    ``i`` (the i-th entry of A^k 1); ``per_node_closed[i]`` counts those
    returning to ``i`` (the diagonal of A^k).  ``exact`` is True while the
    values are exact integers; weighted graphs and integer overflow both
    clear it, the latter switching accumulation to float64.
    """

    order: int
    per_node_total: np.ndarray
    per_node_closed: np.ndarray
    exact: bool


def walk_counts(g, kmax):
    """Walk totals and closed-walk counts for orders ``0..kmax``.

    Uses repeated matrix-vector products; A^k is never formed by repeated
    dense matrix powers beyond the running products themselves.  Unweighted
    graphs accumulate in int64 until the next product could overflow, then
    continue in float64 with ``exact=False``.
    """
    if kmax < 0:
        raise GraphError("kmax must be nonnegative")
    n = g.n
    integer = not g.is_weighted
    if integer:
        a = g.adjacency().astype(np.int64)
        # one product grows entries by at most the largest row sum
        growth = int(g.degrees().max(initial=0))
        total = np.ones(n, dtype=np.int64)
        closed = np.eye(n, dtype=np.int64)
    else:
        a = g.adjacency()
        total = np.ones(n)
        closed = np.eye(n)
    exact = integer
    out = [WalkCounts(0, total.copy() if exact else total.astype(float),
                      np.ones(n, dtype=np.int64) if exact else np.ones(n),
                      exact)]
    for k in range(1, kmax + 1):
        if exact:
            peak = int(max(total.max(initial=0), closed.max(initial=0)))
            if growth and peak > _INT64_CAP // growth:
                a = a.astype(np.float64)
                total = total.astype(np.float64)
                closed = closed.astype(np.float64)
                exact = False
        total = a @ total
        closed = a @ closed
        out.append(WalkCounts(k, total.copy(), np.diagonal(closed).copy(), exact))
    return out


def triangle_counts(g):
    """Per-node triangle counts t_i for an unweighted graph."""
    if g.is_weighted:
        raise GraphError("triangle counts are defined for unweighted graphs")
    closed3 = walk_counts(g, 3)[3].per_node_closed
    return closed3 // 2
