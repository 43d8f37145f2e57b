"""Dataset ingestion and reproducible synthetic instance generation.

Text formats are whitespace- or comma-delimited with ``#`` comments,
matching common edge-list dumps and sensor logs.  Rows with missing
fields are dropped, never imputed.  Every generator is deterministic in
its seed, and a saved coverage-bonus bundle reloads bit-identically
(floats are written with repr, which round-trips doubles).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .applications import (
    InfluenceObjective,
    GaussianEntropyObjective,
    SensorTable,
    TopicGraph,
    normalized_linear_costs,
)
from .errors import MalformedLine, NoUsableRows, UnknownElement, WeightOutOfRange
from .kset import KnapsackInstance
from .oracle import CoverageBonusObjective, Objective


def _iter_lines(source) -> Iterable[tuple[int, str]]:
    """Numbered lines from text content, bytes, a file object, or an
    iterable of lines; comments and blanks are skipped by callers."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield lineno, raw.rstrip("\n")


def _tokens(line: str) -> list[str]:
    return line.replace(",", " ").split()


def parse_edge_list(source, k: int, weight_mode: str = "derived", seed: int = 0) -> TopicGraph:
    """Directed edge list -> TopicGraph with k weights per edge.

    ``derived`` mode expects bare "u v" lines and builds weights as a
    per-topic jitter in [0.8, 1.2] over 1/indegree (scaled back down when
    an in-weight sum exceeds 1); duplicate edges collapse and self-loops
    are ignored.  ``explicit`` mode expects "u v w1 .. wk" with weights in
    [0, 1] and rejects duplicates.
    """
    if weight_mode not in ("derived", "explicit"):
        raise ValueError(f"unknown weight mode {weight_mode!r}")
    want = 2 if weight_mode == "derived" else 2 + k
    pairs: dict[tuple[int, int], tuple[float, ...] | None] = {}
    nodes: set[int] = set()
    for lineno, raw in _iter_lines(source):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = _tokens(line)
        if len(toks) != want:
            raise MalformedLine(lineno, raw, f"expected {want} fields, got {len(toks)}")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise MalformedLine(lineno, raw, "node ids must be integers") from None
        if u < 0 or v < 0:
            raise MalformedLine(lineno, raw, "node ids must be nonnegative")
        nodes.add(u)
        nodes.add(v)
        if u == v:
            continue
        if weight_mode == "explicit":
            try:
                ws = tuple(float(t) for t in toks[2:])
            except ValueError:
                raise MalformedLine(lineno, raw, "weights must be numbers") from None
            for w in ws:
                if not 0.0 <= w <= 1.0:
                    raise WeightOutOfRange(f"line {lineno}: weight {w} outside [0, 1]")
            if (u, v) in pairs:
                raise MalformedLine(lineno, raw, "duplicate edge with explicit weights")
            pairs[(u, v)] = ws
        else:
            pairs.setdefault((u, v), None)

    if weight_mode == "derived":
        indeg: dict[int, int] = {}
        for _, v in pairs:
            indeg[v] = indeg.get(v, 0) + 1
        rng = np.random.default_rng(seed)
        edges = {}
        for (u, v) in pairs:
            jitter = rng.uniform(0.8, 1.2, size=k)
            edges[(u, v)] = tuple(min(1.0, j / indeg[v]) for j in jitter)
    else:
        edges = {e: ws for e, ws in pairs.items()}

    return TopicGraph(tuple(sorted(nodes)), k, edges)


def parse_sensor_readings(source, min_samples: int = 2) -> SensorTable:
    """Delimited sensor log -> aligned readings table.

    Rows are "timestamp sensor-id v1 .. vT"; the first clean row fixes
    the number of measurement types.  Rows with missing or unparsable
    fields are dropped and counted, sensors with fewer than
    ``min_samples`` clean rows are dropped, and the rest are truncated to
    a common sample count.
    """
    per_sensor: dict[str, list[list[float]]] = {}
    dropped = 0
    types: int | None = None
    for lineno, raw in _iter_lines(source):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = _tokens(line)
        if len(toks) < 3:
            dropped += 1
            continue
        if types is None:
            types = len(toks) - 2
        if len(toks) != 2 + types:
            dropped += 1
            continue
        try:
            values = [float(t) for t in toks[2:]]
        except ValueError:
            dropped += 1
            continue
        per_sensor.setdefault(toks[1], []).append(values)

    kept = {s: rows for s, rows in per_sensor.items() if len(rows) >= min_samples}
    if not kept or types is None:
        raise NoUsableRows(f"no usable sensor rows (dropped {dropped})")
    depth = min(len(rows) for rows in kept.values())
    locations = tuple(sorted(kept))
    readings = np.empty((len(locations), types, depth), dtype=np.float64)
    for li, loc in enumerate(locations):
        block = np.asarray(kept[loc][:depth], dtype=np.float64)  # (depth, types)
        readings[li] = block.T
    return SensorTable(locations, types, readings, dropped_rows=dropped)


@dataclass
class InstanceBundle:
    """A knapsack instance paired with the objective it is solved under.

    ``params`` and ``provenance`` carry enough detail that regenerating
    (or reloading) with the same inputs reproduces the bundle exactly.
    """

    instance: KnapsackInstance
    objective: Objective
    kind: str  # "synthetic" | "influence" | "sensors"
    params: dict = field(default_factory=dict)
    provenance: str = ""


def gen_random_instance(
    n: int,
    k: int,
    seed: int,
    *,
    pool_size: int | None = None,
    cost_range: tuple[float, float] = (1.0, 10.0),
    budget_fraction: tuple[float, float] = (0.2, 0.8),
    budget: float | None = None,
    negative_prob: float = 0.5,
) -> InstanceBundle:
    """Random coverage-bonus instance, deterministic in the seed.

    Each element covers 1..4 items from a shared pool and carries at most
    one negative positional bonus, compensated at the other positions so
    the pairwise constraint holds.  The summed negative magnitudes are
    scaled below the smallest coverage size, which keeps the objective
    nonnegative on every k-set (any nonempty support contributes at least
    one whole coverage set to the union), as the solver guarantees
    require.
    """
    if n < 1 or k < 2:
        raise ValueError(f"need n >= 1 and k >= 2, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    pool = pool_size if pool_size is not None else max(4, n)

    sizes = rng.integers(1, 5, size=n)
    coverage = {
        e: frozenset(int(i) for i in rng.choice(pool, size=int(sizes[e]), replace=False))
        for e in range(n)
    }
    has_neg = rng.random(n) < negative_prob
    neg_pos = rng.integers(1, k + 1, size=n)
    mags = rng.uniform(0.1, 1.0, size=n) * has_neg
    total_neg = float(mags.sum())
    min_cov = int(sizes.min())
    if total_neg > 0.9 * min_cov:
        mags *= 0.9 * min_cov / total_neg

    bonus: dict[tuple[int, int], float] = {}
    for e in range(n):
        extra = rng.uniform(0.0, 1.0, size=k)
        if has_neg[e]:
            for i in range(1, k + 1):
                if i == neg_pos[e]:
                    bonus[(e, i)] = -float(mags[e])
                else:
                    bonus[(e, i)] = float(mags[e] + extra[i - 1])
        else:
            for i in range(1, k + 1):
                bonus[(e, i)] = float(extra[i - 1])

    costs = {e: float(c) for e, c in enumerate(rng.uniform(*cost_range, size=n))}
    if budget is None:
        frac = rng.uniform(*budget_fraction)
        budget = float(frac * sum(costs.values()))

    objective = CoverageBonusObjective(coverage, bonus, k)
    instance = KnapsackInstance(tuple(range(n)), k, costs, budget)
    params = {
        "n": n,
        "k": k,
        "seed": seed,
        "pool_size": pool,
        "cost_range": cost_range,
        "negative_prob": negative_prob,
    }
    return InstanceBundle(instance, objective, "synthetic", params, f"gen(seed={seed})")


def save_bundle(bundle: InstanceBundle, target) -> str:
    """Write a coverage-bonus bundle as plain text; returns the text.

    ``target`` may be a path, a file object, or None (text only).
    """
    obj = bundle.objective
    if not isinstance(obj, CoverageBonusObjective):
        raise ValueError("only coverage-bonus bundles have a text serialization")
    inst = bundle.instance
    lines = ["# coverage-bonus knapsack instance", f"k {inst.k}", f"budget {inst.budget!r}"]
    for e in inst.universe:
        items = sorted(obj.coverage[e], key=repr)
        cover = ",".join(str(i) for i in items) if items else "-"
        row = obj._bonus_rows[e]
        lines.append(
            f"element {e} cost {inst.cost[e]!r} cover {cover} bonus "
            + " ".join(repr(w) for w in row)
        )
    text = "\n".join(lines) + "\n"
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def load_bundle(source) -> InstanceBundle:
    """Parse the text format written by ``save_bundle``."""
    k = None
    budget = None
    universe: list = []
    costs: dict = {}
    coverage: dict = {}
    bonus: dict = {}
    for lineno, raw in _iter_lines(source):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            if toks[0] == "k":
                k = int(toks[1])
            elif toks[0] == "budget":
                budget = float(toks[1])
            elif toks[0] == "element":
                if k is None:
                    raise MalformedLine(lineno, raw, "element row before k")
                if toks[2] != "cost" or toks[4] != "cover" or toks[6] != "bonus":
                    raise MalformedLine(lineno, raw, "unexpected layout")
                e = int(toks[1]) if toks[1].lstrip("-").isdigit() else toks[1]
                costs[e] = float(toks[3])
                cover = toks[5]
                coverage[e] = (
                    frozenset()
                    if cover == "-"
                    else frozenset(int(t) for t in cover.split(","))
                )
                ws = [float(t) for t in toks[7 : 7 + k]]
                if len(ws) != k:
                    raise MalformedLine(lineno, raw, f"expected {k} bonus columns")
                for i, w in enumerate(ws, start=1):
                    bonus[(e, i)] = w
                universe.append(e)
            else:
                raise MalformedLine(lineno, raw, f"unknown directive {toks[0]!r}")
        except (IndexError, ValueError):
            raise MalformedLine(lineno, raw) from None
    if k is None or budget is None or not universe:
        raise NoUsableRows("bundle is missing k, budget, or element rows")
    objective = CoverageBonusObjective(coverage, bonus, k)
    instance = KnapsackInstance(tuple(universe), k, costs, budget)
    return InstanceBundle(instance, objective, "synthetic", {"k": k}, "file")


def gen_random_graph(n: int, seed: int, avg_out_degree: float = 4.0) -> str:
    """Seeded directed random graph as edge-list text ("u v" lines)."""
    rng = np.random.default_rng(seed)
    target = int(n * avg_out_degree)
    edges: set[tuple[int, int]] = set()
    guard = 0
    while len(edges) < target and guard < 50:
        guard += 1
        draw = rng.integers(0, n, size=(2 * target, 2))
        for u, v in draw:
            if u != v:
                edges.add((int(u), int(v)))
            if len(edges) >= target:
                break
    lines = [f"{u} {v}" for u, v in sorted(edges)]
    return "\n".join(lines) + "\n"


def gen_random_readings(
    n_sensors: int, types: int, samples: int, seed: int
) -> str:
    """Seeded synthetic sensor log: per-type random walks sharing a common
    trend, so locations are correlated and entropies are interesting."""
    rng = np.random.default_rng(seed)
    trend = np.cumsum(rng.normal(0.0, 1.0, size=(types, samples)), axis=1)
    out = ["# timestamp sensor " + " ".join(f"type{t+1}" for t in range(types))]
    series = np.empty((n_sensors, types, samples))
    for s in range(n_sensors):
        couple = rng.uniform(0.3, 1.0, size=types)
        base = rng.uniform(10.0, 30.0, size=types)
        own = np.cumsum(rng.normal(0.0, 0.5, size=(types, samples)), axis=1)
        noise = rng.normal(0.0, 0.2, size=(types, samples))
        series[s] = base[:, None] + couple[:, None] * trend + own + noise
    for t in range(samples):
        for s in range(n_sensors):
            vals = " ".join(f"{series[s, ty, t]:.6f}" for ty in range(types))
            out.append(f"{t} {s} {vals}")
    return "\n".join(out) + "\n"


def build_influence_bundle(
    graph: TopicGraph,
    budget: float,
    mc_samples: int = 100,
    seed: int = 0,
    cost_range: tuple[float, float] = (1.0, 10.0),
    provenance: str = "",
) -> InstanceBundle:
    """Influence-maximization instance: node costs follow the
    normalized-linear model over out-degree scores."""
    scores = {u: float(d) for u, d in graph.out_degree().items()}
    costs = normalized_linear_costs(scores, *cost_range)
    objective = InfluenceObjective(graph, samples=mc_samples, seed=seed)
    instance = KnapsackInstance(graph.nodes, graph.k, costs, budget)
    params = {"mc_samples": mc_samples, "seed": seed, "cost_range": cost_range}
    return InstanceBundle(instance, objective, "influence", params, provenance)


def build_sensor_bundle(
    table: SensorTable,
    budget: float,
    ridge: float | None = None,
    cost_range: tuple[float, float] = (1.0, 10.0),
    provenance: str = "",
) -> InstanceBundle:
    """Sensor-placement instance: location costs follow the
    normalized-linear model over reading-variance scores."""
    if table.types < 2:
        raise ValueError("sensor placement needs at least two measurement types (k >= 2)")
    costs = normalized_linear_costs(table.variance_scores(), *cost_range)
    objective = GaussianEntropyObjective(table, ridge=ridge)
    instance = KnapsackInstance(table.locations, table.types, costs, budget)
    params = {"ridge": objective.ridge, "cost_range": cost_range}
    return InstanceBundle(instance, objective, "sensors", params, provenance)


def shuffle_universe(inst: KnapsackInstance, seed: int) -> KnapsackInstance:
    """Stream order permutation used by the benchmark repetitions."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(inst.universe))
    return inst.with_universe(tuple(inst.universe[i] for i in order))
