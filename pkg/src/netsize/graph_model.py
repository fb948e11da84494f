"""Stochastic block model specification, generation and graph I/O.

Blocks are 0-based internally and 1-based in files.  Vertices of a generated
graph are laid out contiguously by block: the first ``N_1`` vertices belong
to block 1, the next ``N_2`` to block 2 and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = [
    "SbmSpec",
    "TypedGraph",
    "generate_sbm",
    "cohesion_spec",
    "cohesion_epsilon_range",
    "mean_degree",
    "crp_assignment",
    "crp_block_sizes",
    "write_edge_list",
    "read_edge_list",
]

_PAIR_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class SbmSpec:
    """Generative model G(N, K, p, t).

    Parameters
    ----------
    block_sizes : sequence of int
        Number of vertices in each block, ``N_1 .. N_K``.
    p : array_like, shape (K, K)
        Symmetric matrix of edge probabilities.
    """

    block_sizes: tuple
    p: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(s) for s in np.atleast_1d(self.block_sizes))
        p = np.array(self.p, dtype=float)
        if p.ndim == 0:
            p = p.reshape(1, 1)
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "p", p)
        K = len(sizes)
        if K < 1:
            raise ValidationError("at least one block is required", "block_sizes")
        if any(s < 1 for s in sizes):
            raise ValidationError(f"empty or negative block in {sizes}", "block_sizes")
        if p.shape != (K, K):
            raise ValidationError(f"p must be {K}x{K}, got shape {p.shape}", "p")
        if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ValidationError("edge probabilities must lie in [0, 1]", "p")
        if not np.array_equal(p, p.T):
            raise ValidationError("p must be symmetric", "p")
        p.setflags(write=False)

    @classmethod
    def erdos_renyi(cls, n_vertices, p):
        return cls((n_vertices,), [[p]])

    @property
    def K(self):
        return len(self.block_sizes)

    @property
    def N(self):
        return sum(self.block_sizes)

    def block_labels(self):
        """0-based block index of every vertex under the contiguous layout."""
        return np.repeat(np.arange(self.K), self.block_sizes)

    def to_dict(self):
        return {"block_sizes": list(self.block_sizes), "p": self.p.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(tuple(d["block_sizes"]), d["p"])
        except KeyError as exc:
            raise ValidationError(f"missing field {exc.args[0]!r}", exc.args[0]) from None


@dataclass(eq=False)
class TypedGraph:
    """Undirected simple graph with a vertex -> block map.

    ``edges`` is an ``(m, 2)`` integer array with ``u < v`` in every row and
    rows in lexicographic order.  ``block_of`` holds 0-based block indices.
    """

    n_vertices: int
    block_of: np.ndarray
    edges: np.ndarray
    K: int = field(default=0)

    def __post_init__(self):
        self.n_vertices = int(self.n_vertices)
        self.block_of = np.asarray(self.block_of, dtype=np.int64)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.n_vertices < 1:
            raise ValidationError("graph needs at least one vertex", "n_vertices")
        if self.block_of.shape != (self.n_vertices,):
            raise ValidationError("block_of must have one entry per vertex", "block_of")
        if self.K == 0:
            self.K = int(self.block_of.max()) + 1
        if self.block_of.min() < 0 or self.block_of.max() >= self.K:
            raise ValidationError(f"block indices must lie in 1..{self.K}", "block_of")
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.n_vertices:
                raise ValidationError("edge endpoint out of range", "edges")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValidationError("self-loops are not allowed", "edges")
            edges = np.sort(edges, axis=1)
            key = edges[:, 0] * self.n_vertices + edges[:, 1]
            if not np.all(key[1:] > key[:-1]):
                key = np.unique(key)
                edges = np.column_stack([key // self.n_vertices, key % self.n_vertices])
        self.edges = edges

    @property
    def n_edges(self):
        return len(self.edges)

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def block_sizes(self):
        return np.bincount(self.block_of, minlength=self.K)


def _upper_pairs(start, stop, n):
    """All pairs (u, v) with start <= u < stop and u < v < n, row-major."""
    u = np.arange(start, stop)
    counts = n - 1 - u
    total = int(counts.sum())
    uu = np.repeat(u, counts)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    vv = np.arange(total) - offsets + uu + 1
    return uu, vv


def generate_sbm(spec: SbmSpec, seed: int) -> TypedGraph:
    """Draw a graph from the block model.

    Each unordered pair ``{u, v}`` is included independently with probability
    ``p[t(u), t(v)]``.  The same ``(spec, seed)`` always yields the same graph.
    """
    rng = np.random.default_rng(seed)
    n = spec.N
    t = spec.block_labels()
    kept = []
    start = 0
    while start < n - 1:
        # grow the row range until it holds about _PAIR_CHUNK pairs
        stop = start + 1
        npairs = n - 1 - start
        while stop < n - 1 and npairs + (n - 1 - stop) <= _PAIR_CHUNK:
            npairs += n - 1 - stop
            stop += 1
        uu, vv = _upper_pairs(start, stop, n)
        hit = rng.random(len(uu)) < spec.p[t[uu], t[vv]]
        kept.append(np.column_stack([uu[hit], vv[hit]]))
        start = stop
    edges = np.concatenate(kept) if kept else np.empty((0, 2), dtype=np.int64)
    return TypedGraph(n, t, edges, K=spec.K)


def cohesion_epsilon_range(N1, N2, p_tilde):
    """Closed interval of epsilon values keeping every probability in [0, 1]."""
    a11 = N1 * N2 / (2 * math.comb(N1, 2))
    a22 = N1 * N2 / (2 * math.comb(N2, 2))
    lo = max(-p_tilde / a11, -p_tilde / a22, p_tilde - 1)
    hi = min((1 - p_tilde) / a11, (1 - p_tilde) / a22, p_tilde)
    return lo, hi


def cohesion_spec(N1: int, N2: int, p_tilde: float, epsilon: float) -> SbmSpec:
    """Two-block model deviating from Erdos-Renyi by ``epsilon`` at fixed mean degree.

    ``epsilon > 0`` moves edge mass inside the blocks, ``epsilon < 0`` moves
    it across them.

    Raises
    ------
    ValidationError
        If some probability leaves [0, 1]; the message reports the feasible
        epsilon interval.
    """
    if N1 < 2 or N2 < 2:
        raise ValidationError("both blocks need at least 2 vertices", "block_sizes")
    cross = N1 * N2 * epsilon
    p11 = p_tilde + cross / (2 * math.comb(N1, 2))
    p22 = p_tilde + cross / (2 * math.comb(N2, 2))
    p12 = p_tilde - epsilon
    if not all(0.0 <= q <= 1.0 for q in (p11, p22, p12)):
        lo, hi = cohesion_epsilon_range(N1, N2, p_tilde)
        raise ValidationError(
            f"epsilon={epsilon} gives probabilities outside [0, 1]; "
            f"feasible epsilon range is [{lo:.6g}, {hi:.6g}]",
            "epsilon",
        )
    return SbmSpec((N1, N2), [[p11, p12], [p12, p22]])


def mean_degree(spec: SbmSpec) -> float:
    """Expected mean degree of a two-block model."""
    if spec.K != 2:
        raise ValidationError("mean_degree is defined for K=2 specs", "block_sizes")
    N1, N2 = spec.block_sizes
    p = spec.p
    total = math.comb(N1, 2) * p[0, 0] + math.comb(N2, 2) * p[1, 1] + N1 * N2 * p[0, 1]
    return 2.0 * total / (N1 + N2)


def crp_assignment(n_seed_vertices, n_fill_vertices=0, concentration=1.0, seed=0):
    """Chinese restaurant process partition followed by an even fill.

    The first ``n_seed_vertices`` are seated by a CRP with the given
    concentration.  The ``n_fill_vertices`` are then spread evenly over the
    resulting blocks, the remainder going one each to the lowest-indexed
    blocks.

    Returns
    -------
    K : int
    block_sizes : tuple of int
    """
    if n_seed_vertices < 1 or n_fill_vertices < 0 or concentration <= 0:
        raise ValidationError("invalid CRP arguments")
    rng = np.random.default_rng(seed)
    tables = [1]
    for m in range(1, n_seed_vertices):
        u = rng.random() * (m + concentration)
        acc = 0.0
        for k, c in enumerate(tables):
            acc += c
            if u < acc:
                tables[k] += 1
                break
        else:
            tables.append(1)
    return len(tables), crp_block_sizes(tables, n_fill_vertices)


def crp_block_sizes(seed_sizes, n_fill_vertices):
    """Even-fill rule applied on top of CRP table sizes."""
    K = len(seed_sizes)
    base, rem = divmod(int(n_fill_vertices), K)
    return tuple(int(s) + base + (1 if k < rem else 0) for k, s in enumerate(seed_sizes))


def _labels_path(path):
    return Path(str(path) + ".labels")


def write_edge_list(graph: TypedGraph, path, labels_path=None):
    """Write ``u v`` edge lines plus a ``v block`` sidecar (blocks 1-based)."""
    path = Path(path)
    labels_path = Path(labels_path) if labels_path else _labels_path(path)
    with open(path, "w") as fh:
        fh.write(f"# n_vertices {graph.n_vertices} n_edges {graph.n_edges}\n")
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")
    with open(labels_path, "w") as fh:
        fh.write(f"# K {graph.K}\n")
        for v, b in enumerate(graph.block_of):
            fh.write(f"{v} {b + 1}\n")
    return path, labels_path


def _read_pairs(path):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected two integers")
            try:
                rows.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: expected two integers") from None
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def read_edge_list(path, labels_path=None) -> TypedGraph:
    """Inverse of :func:`write_edge_list`."""
    labels_path = Path(labels_path) if labels_path else _labels_path(path)
    edges = _read_pairs(path)
    lab = _read_pairs(labels_path)
    if len(lab) == 0:
        raise ValidationError(f"{labels_path}: no labels", "block_of")
    n = int(lab[:, 0].max()) + 1
    if len(np.unique(lab[:, 0])) != n or lab[:, 0].min() != 0:
        raise ValidationError(f"{labels_path}: every vertex 0..{n - 1} needs exactly one label")
    if lab[:, 1].min() < 1:
        raise ValidationError(f"{labels_path}: blocks are 1-based", "block_of")
    block_of = np.empty(n, dtype=np.int64)
    block_of[lab[:, 0]] = lab[:, 1] - 1
    return TypedGraph(n, block_of, edges)
