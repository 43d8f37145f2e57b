"""Independent brute-force oracles for cross-checking the library.

Everything here re-derives expected values by direct enumeration,
deliberately avoiding the code paths under test (the DP-based checker,
the Monte Carlo estimator, the vectorized brute force).
"""

from __future__ import annotations

import itertools

from ksubmax.kset import KSet
from ksubmax.oracle import Objective


def all_ksets(universe, k):
    """Every k-set over the universe, as (digits tuple, KSet) pairs."""
    n = len(universe)
    for digits in itertools.product(range(k + 1), repeat=n):
        yield digits, KSet(k, [(universe[j], digits[j]) for j in range(n) if digits[j]])


def sub_ksets(digits, universe, k):
    """All x with x <= y for the given y digits (zeroing any subset)."""
    supp = [j for j, d in enumerate(digits) if d]
    for keep_mask in itertools.product([False, True], repeat=len(supp)):
        x = list(digits)
        for j, keep in zip(supp, keep_mask):
            if not keep:
                x[j] = 0
        yield tuple(x), KSet(k, [(universe[j], x[j]) for j in range(len(x)) if x[j]])


def literal_orthant_check(objective: Objective, tol: float = 1e-9):
    """Enumerate every (x <= y, e, i) orthant predicate directly."""
    universe, k = objective.universe, objective.k
    ok, count = True, 0
    cache = {dig: objective.evaluate(x) for dig, x in all_ksets(universe, k)}
    for y_dig, y in all_ksets(universe, k):
        free = [j for j, d in enumerate(y_dig) if d == 0]
        for x_dig, x in sub_ksets(y_dig, universe, k):
            for j in free:
                for i in range(1, k + 1):
                    count += 1
                    xd = list(x_dig)
                    xd[j] = i
                    yd = list(y_dig)
                    yd[j] = i
                    gain_x = cache[tuple(xd)] - cache[x_dig]
                    gain_y = cache[tuple(yd)] - cache[y_dig]
                    if gain_x < gain_y - tol:
                        ok = False
    return ok, count


def literal_pairwise_check(objective: Objective, tol: float = 1e-9):
    universe, k = objective.universe, objective.k
    ok, count = True, 0
    cache = {dig: objective.evaluate(x) for dig, x in all_ksets(universe, k)}
    for x_dig, x in all_ksets(universe, k):
        for j, d in enumerate(x_dig):
            if d:
                continue
            for i1 in range(1, k + 1):
                for i2 in range(i1 + 1, k + 1):
                    count += 1
                    d1 = list(x_dig)
                    d1[j] = i1
                    d2 = list(x_dig)
                    d2[j] = i2
                    g1 = cache[tuple(d1)] - cache[x_dig]
                    g2 = cache[tuple(d2)] - cache[x_dig]
                    if g1 + g2 < -tol:
                        ok = False
    return ok, count


def literal_definition_check(objective: Objective, tol: float = 1e-9):
    universe, k = objective.universe, objective.k
    ok, count = True, 0
    ksets = list(all_ksets(universe, k))
    values = {dig: objective.evaluate(x) for dig, x in ksets}
    for x_dig, x in ksets:
        for y_dig, y in ksets:
            count += 1
            lhs = values[x_dig] + values[y_dig]
            rhs = objective.evaluate(x.meet(y)) + objective.evaluate(x.join(y))
            if rhs - lhs > tol:
                ok = False
    return ok, count


def brute_force_reference(inst, objective):
    """Plain-python exact optimum, independent of algorithms.brute_force_opt."""
    best_val, best = 0.0, KSet.empty(inst.k)
    for _, x in all_ksets(inst.universe, inst.k):
        if sum(inst.cost[e] for e, _ in x.items()) > inst.budget:
            continue
        v = objective.evaluate(x)
        if v > best_val:
            best_val, best = v, x
    return best_val, best


def exact_lt_spread(graph, seed_kset: KSet) -> float:
    """Exact expected union size under the linear threshold model.

    Topics are independent, so E|union| = sum over nodes of
    1 - prod_i (1 - p_i(node)).  Per-topic activation probabilities come
    from enumerating, for each node, the threshold intervals between its
    achievable in-weight sums (the cascade outcome is constant inside an
    interval), and integrating the deterministic cascade over the product
    of intervals.  Only viable for graphs with a handful of thresholds.
    """
    nodes = graph.nodes
    n = len(nodes)
    idx = {u: j for j, u in enumerate(nodes)}
    k = graph.k

    per_topic_prob = []
    for topic in range(k):
        seeds = {idx[e] for e, i in seed_kset.items() if i == topic + 1}
        in_edges = [[] for _ in range(n)]
        for (u, v), ws in graph.edges.items():
            if ws[topic] > 0:
                in_edges[idx[v]].append((idx[u], ws[topic]))

        # Threshold breakpoints: all subset sums of in-weights in [0, 1].
        intervals = []
        for j in range(n):
            sums = {0.0}
            for _, w in in_edges[j]:
                sums |= {min(1.0, s + w) for s in sums}
            points = sorted({0.0, 1.0} | {s for s in sums if 0.0 < s < 1.0})
            intervals.append(
                [(points[a], points[a + 1]) for a in range(len(points) - 1)]
            )

        prob = [0.0] * n
        for combo in itertools.product(*intervals):
            weight = 1.0
            theta = []
            for lo, hi in combo:
                weight *= hi - lo
                theta.append((lo + hi) / 2.0)  # theta in (lo, hi]
            if weight == 0.0:
                continue
            active = set(seeds)
            while True:
                nxt = [
                    j
                    for j in range(n)
                    if j not in active
                    and sum(w for u, w in in_edges[j] if u in active) >= theta[j]
                ]
                if not nxt:
                    break
                active.update(nxt)
            for j in active:
                prob[j] += weight
        per_topic_prob.append(prob)

    total = 0.0
    for j in range(n):
        miss = 1.0
        for topic in range(k):
            miss *= 1.0 - per_topic_prob[topic][j]
        total += 1.0 - miss
    return total


class ZeroObjective(Objective):
    """f identically zero (the degenerate guard case)."""

    def __init__(self, universe, k):
        self.universe = tuple(universe)
        self.k = k

    def evaluate(self, x: KSet) -> float:
        self._check_support(x)
        return 0.0


class SupportSquaredObjective(Objective):
    """f(x) = |supp(x)|^2: pairwise monotone but NOT orthant submodular
    (marginals grow with the set), hence not k-submodular."""

    def __init__(self, universe, k):
        self.universe = tuple(universe)
        self.k = k

    def evaluate(self, x: KSet) -> float:
        return float(len(x) ** 2)


class ParityObjective(Objective):
    """f(x) = |supp(x)| mod 2: violates the join/meet inequality."""

    def __init__(self, universe, k):
        self.universe = tuple(universe)
        self.k = k

    def evaluate(self, x: KSet) -> float:
        return float(len(x) % 2)


class CountingProbe(Objective):
    """Wraps an objective and counts evaluate calls on the inner side,
    for asserting the oracle's query accounting is exact."""

    def __init__(self, inner: Objective):
        self.inner = inner
        self.k = inner.k
        self.universe = inner.universe
        self.calls = 0

    def evaluate(self, x: KSet) -> float:
        self.calls += 1
        return self.inner.evaluate(x)


class HiddenDigitsObjective(Objective):
    """Proxy hiding evaluate_digits, to force generic (loop) code paths."""

    def __init__(self, inner: Objective):
        self.inner = inner
        self.k = inner.k
        self.universe = inner.universe

    def evaluate(self, x: KSet) -> float:
        return self.inner.evaluate(x)
