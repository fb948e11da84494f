"""Induced-subgraph sampling and the sufficient statistics of an observation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, ValidationError
from .graph_model import TypedGraph

__all__ = [
    "ObservedData",
    "SufficientStats",
    "sample_induced",
    "sufficient_stats",
    "save_observed",
    "load_observed",
]


@dataclass(eq=False)
class ObservedData:
    """What an analyst sees: G(W), the total degrees and block labels of W.

    Arrays ``total_degree`` and ``label`` are aligned with ``sample_ids``.
    Labels are 0-based.  ``induced_edges`` uses the original vertex ids.
    ``truth`` optionally carries the generating block sizes for bookkeeping;
    estimators never read it.
    """

    sample_ids: np.ndarray
    induced_edges: np.ndarray
    total_degree: np.ndarray
    label: np.ndarray
    K: int
    truth: dict | None = None

    def __post_init__(self):
        self.sample_ids = np.asarray(self.sample_ids, dtype=np.int64)
        self.induced_edges = np.asarray(self.induced_edges, dtype=np.int64).reshape(-1, 2)
        self.total_degree = np.asarray(self.total_degree, dtype=np.int64)
        self.label = np.asarray(self.label, dtype=np.int64)
        self.K = int(self.K)
        n = len(self.sample_ids)
        if n < 1:
            raise ValidationError("sample must be non-empty", "sample_ids")
        if len(np.unique(self.sample_ids)) != n:
            raise ValidationError("sample ids must be distinct", "sample_ids")
        if self.total_degree.shape != (n,) or self.label.shape != (n,):
            raise ValidationError("degree and label arrays must align with sample_ids")
        if self.K < 1 or self.label.min() < 0 or self.label.max() >= self.K:
            raise ValidationError(f"labels must lie in 1..{self.K}", "label")
        if np.any(self.total_degree < 0):
            raise ValidationError("degrees must be nonnegative", "total_degree")

    @property
    def n(self):
        return len(self.sample_ids)


@dataclass(eq=False)
class SufficientStats:
    """Sufficient statistics of an observation.

    Attributes
    ----------
    V : (K,) int array
        Sampled vertices per block.
    E : (K, K) int array
        Symmetric within-sample edge counts by endpoint blocks.  Each edge is
        counted once: ``E[i, i]`` for edges inside block i and
        ``E[i, j] == E[j, i]`` for edges between i and j.
    pendant_degree : (n,) int array
        Edges from each sampled vertex to unsampled vertices.
    E_S : int
        Total number of within-sample edges.
    block : (n,) int array
        0-based block of each sampled vertex, aligned with ``pendant_degree``.
    """

    V: np.ndarray
    E: np.ndarray
    pendant_degree: np.ndarray
    E_S: int
    block: np.ndarray

    @property
    def n(self):
        return len(self.pendant_degree)

    @property
    def K(self):
        return len(self.V)

    @property
    def sum_degrees(self):
        """Total degree of the sample, sum of pendant degrees plus 2 E_S."""
        return int(self.pendant_degree.sum()) + 2 * int(self.E_S)

    @classmethod
    def from_counts(cls, block, pendant_degree, E):
        """Build stats directly from labels, pendant degrees and edge counts."""
        E = np.asarray(E, dtype=np.int64)
        block = np.asarray(block, dtype=np.int64)
        K = E.shape[0]
        if E.shape != (K, K) or not np.array_equal(E, E.T):
            raise ValidationError("E must be a symmetric K x K matrix", "E")
        return cls(
            V=np.bincount(block, minlength=K),
            E=E,
            pendant_degree=np.asarray(pendant_degree, dtype=np.int64),
            E_S=int(np.triu(E).sum()),
            block=block,
        )


def sample_induced(graph: TypedGraph, n: int, seed: int) -> ObservedData:
    """Sample ``n`` vertices uniformly without replacement and observe G(W)."""
    if not 1 <= n <= graph.n_vertices:
        raise ValidationError(f"sample size must lie in 1..{graph.n_vertices}, got {n}", "n")
    rng = np.random.default_rng(seed)
    W = np.sort(rng.choice(graph.n_vertices, size=n, replace=False))
    in_w = np.zeros(graph.n_vertices, dtype=bool)
    in_w[W] = True
    e = graph.edges
    induced = e[in_w[e[:, 0]] & in_w[e[:, 1]]] if len(e) else e
    deg = graph.degrees()
    truth = {"N": graph.n_vertices, "block_sizes": graph.block_sizes().tolist()}
    return ObservedData(W, induced, deg[W], graph.block_of[W], graph.K, truth)


def sufficient_stats(obs: ObservedData) -> SufficientStats:
    """Compute V_i, E_ij, E_S and the pendant degrees of ``obs``."""
    K, n = obs.K, obs.n
    pos = {int(v): i for i, v in enumerate(obs.sample_ids)}
    try:
        a = np.array([pos[int(u)] for u in obs.induced_edges[:, 0]], dtype=np.int64)
        b = np.array([pos[int(v)] for v in obs.induced_edges[:, 1]], dtype=np.int64)
    except KeyError as exc:
        raise ConsistencyError(f"induced edge endpoint {exc.args[0]} is not in the sample") from None
    if np.any(a == b):
        raise ConsistencyError("induced edges contain a self-loop")
    inner = np.bincount(np.concatenate([a, b]), minlength=n)
    pendant = obs.total_degree - inner
    bad = np.flatnonzero(pendant < 0)
    if len(bad):
        v = int(obs.sample_ids[bad[0]])
        raise ConsistencyError(
            f"vertex {v}: total degree {int(obs.total_degree[bad[0]])} "
            f"is below its within-sample degree {int(inner[bad[0]])}"
        )
    V = np.bincount(obs.label, minlength=K)
    raw = np.zeros((K, K), dtype=np.int64)
    np.add.at(raw, (obs.label[a], obs.label[b]), 1)
    E = raw + raw.T
    E[np.diag_indices(K)] //= 2
    return SufficientStats(
        V=V,
        E=E,
        pendant_degree=pendant,
        E_S=len(a),
        block=obs.label.copy(),
    )


def save_observed(obs: ObservedData, path):
    """Write the observed-data JSON document (blocks 1-based)."""
    doc = {
        "K": obs.K,
        "sample_ids": obs.sample_ids.tolist(),
        "degree": obs.total_degree.tolist(),
        "block": (obs.label + 1).tolist(),
        "induced_edges": obs.induced_edges.tolist(),
    }
    if obs.truth is not None:
        doc["truth"] = obs.truth
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_observed(path) -> ObservedData:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    missing = [k for k in ("K", "sample_ids", "degree", "block", "induced_edges") if k not in doc]
    if missing:
        raise ValidationError(f"{path}: missing fields {missing}", missing[0])
    block = np.asarray(doc["block"], dtype=np.int64)
    if len(block) and block.min() < 1:
        raise ValidationError(f"{path}: blocks are 1-based", "block")
    return ObservedData(
        doc["sample_ids"], doc["induced_edges"], doc["degree"], block - 1, doc["K"], doc.get("truth")
    )
