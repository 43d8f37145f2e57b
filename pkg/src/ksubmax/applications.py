"""Benchmark objectives: multi-topic influence spread and multi-type
sensor placement, plus the normalized-linear cost model.

Influence uses the linear threshold diffusion model with one weight per
edge per topic.  Spread is #P-hard to compute exactly, so the objective
fixes R random threshold profiles at construction and averages the
resulting deterministic cascades; that makes it a deterministic function
of the seed k-set, which the streaming solvers require (their acceptance
decisions must not flap between queries).

Sensor placement scores a choice of one sensor type per location by the
joint Gaussian differential entropy of the chosen readings, derived from
the empirical covariance of a readings table.  Marginals can go negative
when readings are strongly correlated, which is exactly the non-monotone
behavior this library targets.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import SingularCovariance, UnknownNode, WeightOutOfRange
from .kset import Element, KSet
from .oracle import Objective

LOG_2PIE = math.log(2.0 * math.pi * math.e)


@dataclass
class TopicGraph:
    """Directed graph with k weights per edge.

    ``edges`` maps (u, v) to a length-k weight tuple, weights in [0, 1].
    Linear-threshold feasibility requires the in-weight sum of every node
    to stay <= 1 per topic; ``renormalized`` records whether the
    constructor had to scale columns down to restore that.
    """

    nodes: tuple[int, ...]
    k: int
    edges: dict[tuple[int, int], tuple[float, ...]]
    renormalized: bool = False
    _index: dict[int, int] = field(init=False, repr=False)
    _w: list[sp.csr_matrix] = field(init=False, repr=False)
    _wt: list[sp.csr_matrix] = field(init=False, repr=False)

    def __post_init__(self):
        self.nodes = tuple(self.nodes)
        n = len(self.nodes)
        self._index = {u: i for i, u in enumerate(self.nodes)}
        rows, cols = [], []
        data = [[] for _ in range(self.k)]
        for (u, v), ws in self.edges.items():
            if u not in self._index or v not in self._index:
                raise UnknownNode(f"edge ({u}, {v}) references an unknown node")
            if len(ws) != self.k:
                raise ValueError(f"edge ({u}, {v}) carries {len(ws)} weights, expected {self.k}")
            for w in ws:
                if not 0.0 <= w <= 1.0:
                    raise WeightOutOfRange(f"edge ({u}, {v}) weight {w} outside [0, 1]")
            rows.append(self._index[u])
            cols.append(self._index[v])
            for i, w in enumerate(ws):
                data[i].append(float(w))
        self._w = []
        for i in range(self.k):
            m = sp.csr_matrix((data[i], (rows, cols)), shape=(n, n))
            insum = np.asarray(m.sum(axis=0)).ravel()
            over = insum > 1.0 + 1e-12
            if over.any():
                scale = np.ones(n)
                scale[over] = 1.0 / insum[over]
                m = m @ sp.diags(scale)
                self.renormalized = True
            self._w.append(m.tocsr())
        self._wt = [m.T.tocsr() for m in self._w]
        if self.renormalized:
            # keep the public edge dict consistent with the scaled matrices
            fixed = {}
            for (u, v), _ in self.edges.items():
                iu, iv = self._index[u], self._index[v]
                fixed[(u, v)] = tuple(float(self._w[i][iu, iv]) for i in range(self.k))
            self.edges = fixed

    @property
    def n(self) -> int:
        return len(self.nodes)

    def out_degree(self) -> dict[int, int]:
        deg = {u: 0 for u in self.nodes}
        for u, _ in self.edges:
            deg[u] += 1
        return deg

    def node_index(self, u: int) -> int:
        try:
            return self._index[u]
        except KeyError:
            raise UnknownNode(f"node {u} not in graph") from None


class InfluenceObjective(Objective):
    """Average union of k independent linear-threshold cascades.

    The R threshold profiles (one value per node per topic per sample)
    are drawn once from the seed, so evaluation is deterministic.
    Thresholds are uniform on (0, 1]: a node with no active in-weight can
    then never self-activate, which pins f(empty) = 0 exactly.
    """

    def __init__(self, graph: TopicGraph, samples: int = 100, seed: int = 0, cache_size: int = 256):
        if samples < 1:
            raise ValueError(f"need at least one simulation, got {samples}")
        self.graph = graph
        self.k = graph.k
        self.universe = graph.nodes
        self.samples = samples
        self.seed = seed
        rng = np.random.default_rng(seed)
        # shape (samples, k, n); 1 - U[0,1) lies in (0, 1]
        self._theta = 1.0 - rng.random((samples, graph.k, graph.n))
        self._cache: OrderedDict[tuple[int, frozenset], np.ndarray] = OrderedDict()
        self._cache_size = cache_size

    def _cascade(self, topic: int, seeds: frozenset) -> np.ndarray:
        """Active-node matrix (samples, n) for one topic's seed set.

        Cached per (topic, seed set): the solvers probe many k-sets that
        differ in a single topic, and the untouched topics' cascades are
        reused.  The cascade is a least fixpoint, so iterating from any
        superset of the seeds that is contained in the fixpoint converges
        to the same answer.
        """
        key = (topic, seeds)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        R, n = self.samples, self.graph.n
        active = np.zeros((R, n), dtype=bool)
        if seeds:
            active[:, list(seeds)] = True
            wt = self.graph._wt[topic]
            theta = self._theta[:, topic, :]
            acc = (wt @ active.T.astype(np.float64)).T
            while True:
                newly = (acc >= theta) & ~active
                if not newly.any():
                    break
                active |= newly
                acc += (wt @ newly.T.astype(np.float64)).T
        self._cache[key] = active
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return active

    def evaluate(self, x: KSet) -> float:
        if len(x) == 0:
            return 0.0
        seed_sets: list[set[int]] = [set() for _ in range(self.k)]
        for e, i in x.items():
            seed_sets[i - 1].add(self.graph.node_index(e))
        union = None
        for topic in range(self.k):
            if not seed_sets[topic]:
                continue
            act = self._cascade(topic, frozenset(seed_sets[topic]))
            union = act.copy() if union is None else union | act
        if union is None:
            return 0.0
        return float(union.sum(axis=1).mean())


def lt_spread_estimate(graph: TopicGraph, seed_set: KSet, samples: int, seed: int = 0) -> float:
    """Monte Carlo spread of a seed k-set under the linear threshold model.

    Convenience wrapper; benchmark runs should build one
    InfluenceObjective and reuse it so all queries share the same fixed
    threshold profiles.
    """
    return InfluenceObjective(graph, samples=samples, seed=seed).evaluate(seed_set)


@dataclass
class SensorTable:
    """Aligned readings: one time series per (location, measurement type).

    ``readings[l, t, s]`` is sample s of type t at location l.  Rows with
    missing fields were dropped during parsing (``dropped_rows``), and all
    retained locations are truncated to a common sample count.
    """

    locations: tuple[Element, ...]
    types: int
    readings: np.ndarray
    dropped_rows: int = 0

    @property
    def n(self) -> int:
        return len(self.locations)

    @property
    def samples(self) -> int:
        return self.readings.shape[2]

    def variance_scores(self) -> dict[Element, float]:
        """Mean per-type reading variance; the informativeness proxy used
        by the normalized-linear cost model."""
        v = self.readings.var(axis=2, ddof=1).mean(axis=1)
        return {loc: float(v[i]) for i, loc in enumerate(self.locations)}


class GaussianEntropyObjective(Objective):
    """Joint Gaussian differential entropy of the selected readings.

    Each (location, type) pair is a distinct random variable; choosing
    position i for location e selects variable (e, i).  The full
    empirical covariance is computed once; a ridge of
    1e-6 * mean-diagonal (by default) keeps submatrices positive
    definite.  Pass ridge=0.0 to disable regularization, in which case a
    non-positive determinant raises SingularCovariance.
    """

    def __init__(self, table: SensorTable, ridge: float | None = None):
        self.table = table
        self.k = table.types
        self.universe = table.locations
        n, t = table.n, table.types
        flat = table.readings.reshape(n * t, table.samples)
        self._cov = np.atleast_2d(np.cov(flat, ddof=1))
        if ridge is None:
            ridge = 1e-6 * float(np.mean(np.diag(self._cov)))
        self.ridge = ridge
        self._loc_index = {loc: i for i, loc in enumerate(table.locations)}

    def evaluate(self, x: KSet) -> float:
        if len(x) == 0:
            return 0.0
        idx = []
        for e, i in x.items():
            li = self._loc_index.get(e)
            if li is None:
                raise UnknownNode(f"location {e!r} not in the sensor table")
            idx.append(li * self.k + (i - 1))
        idx.sort()
        sub = self._cov[np.ix_(idx, idx)]
        if self.ridge:
            sub = sub + self.ridge * np.eye(len(idx))
        sign, logdet = np.linalg.slogdet(sub)
        if sign <= 0:
            raise SingularCovariance(
                f"covariance of {len(idx)} selected readings is not positive definite"
            )
        return 0.5 * (len(idx) * LOG_2PIE + logdet)


def gaussian_entropy_objective(table: SensorTable, x: KSet, ridge: float | None = None) -> float:
    """Entropy value of one selection; builds a throwaway objective."""
    return GaussianEntropyObjective(table, ridge=ridge).evaluate(x)


def normalized_linear_costs(
    scores: Mapping[Element, float], lo: float = 1.0, hi: float = 10.0
) -> dict[Element, float]:
    """Affine map of raw scores onto the cost range [lo, hi].

    Constant scores collapse to the midpoint (lo + hi) / 2.
    """
    if not hi > lo > 0:
        raise ValueError(f"need hi > lo > 0, got [{lo}, {hi}]")
    values = list(scores.values())
    smin, smax = min(values), max(values)
    if smax == smin:
        mid = (lo + hi) / 2.0
        return {e: mid for e in scores}
    span = smax - smin
    return {e: lo + (hi - lo) * (s - smin) / span for e, s in scores.items()}
