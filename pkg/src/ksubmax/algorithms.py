"""Solvers for k-submodular maximization under a knapsack.

Two deterministic single-pass solvers built around a density threshold:

* ``laa`` streams the ground set once.  Elements costing more than half
  the budget only compete for the best-singleton slot; the cheaper ones
  are appended to a candidate sequence whenever their marginal gain
  clears ``cost * f(x) / budget``.  The candidate sequence may overshoot
  the budget, so a feasible suffix is packed afterwards, and the final
  answer is the better of that suffix and the best singleton.

* ``rla`` first runs ``laa`` to bracket the optimum inside a factor-19
  window, lays a geometric grid of guesses across the window, and greedily
  grows one candidate per guess with the density threshold 2v/(5B).  The
  final answer is the best of all candidates, the best singleton, and the
  ``laa`` solution itself (so ``rla`` never loses to ``laa``).

``brute_force_opt`` enumerates every assignment at desk scale as the
exact reference, and ``greedy_baseline`` is a plain density-greedy
comparator with no guarantee.

Query accounting: the solvers cache their running objective value, so a
marginal costs one counted evaluation.  End-of-run selection and the
final reported value use uncounted peeks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from time import perf_counter
from typing import Sequence

import numpy as np

from .errors import EmptyUniverse, EpsilonOutOfRange, InstanceTooLarge
from .kset import Element, KnapsackInstance, KSet, total_cost
from .oracle import CountingOracle, Objective

TIE_LOWEST = "lowest"
TIE_HIGHEST = "highest"

DEFAULT_ENUM_CAP = 5_000_000


@dataclass(frozen=True)
class RunResult:
    """Outcome of one solver run on one instance."""

    solution: KSet
    value: float
    queries: int
    millis: float
    algorithm: str
    params: dict

    @property
    def cost(self) -> float:
        return self.params.get("solution_cost", 0.0)


@dataclass(frozen=True)
class TraceEvent:
    """Per-element record of a streaming pass.

    For ``laa`` events, ``threshold_compared`` is the absolute bar
    ``cost * f(x) / B`` matched against ``marginal``.  For ``rla`` guess
    events it is the density bar ``tau_v`` matched against
    ``marginal / cost``.  ``singleton_value`` is only populated by ``laa``
    (the best position's singleton value); fields that were not computed
    for an element (e.g. the marginal of an expensive element) are None.
    """

    element: Element
    chosen_position: int
    singleton_value: float | None
    marginal: float | None
    threshold_compared: float | None
    accepted: bool
    running_cost: float
    running_value: float


@dataclass
class LaaRun:
    result: RunResult
    trace: list[TraceEvent]
    accepted: tuple[tuple[Element, int], ...]
    full_value: float
    full_cost: float
    suffix: KSet
    suffix_value: float
    best_singleton: tuple[Element, int] | None
    best_singleton_value: float


@dataclass
class RlaGuess:
    level: float
    tau: float
    solution: KSet
    value: float
    cost: float
    trace: list[TraceEvent] = field(default_factory=list)


@dataclass
class RlaRun:
    result: RunResult
    base: LaaRun
    grid: tuple[float, ...]
    guesses: list[RlaGuess]


def _best_position(values: Sequence[float], tie_break: str) -> tuple[int, float]:
    """Position (1-based) with the largest value.

    Ties go to the smallest index by default: deterministic runs need a
    fixed rule and the smallest index keeps traces reproducible.
    """
    best_i, best_v = 1, values[0]
    for idx in range(1, len(values)):
        v = values[idx]
        if v > best_v or (tie_break == TIE_HIGHEST and v == best_v):
            best_i, best_v = idx + 1, v
    return best_i, best_v


def _require_normalized(inst: KnapsackInstance) -> None:
    for e in inst.universe:
        if inst.cost[e] > inst.budget:
            raise ValueError(
                f"instance not normalized: cost({e!r})={inst.cost[e]} exceeds "
                f"budget {inst.budget}; run normalize_instance first"
            )


def suffix_pack(seq: Sequence[tuple[Element, int]], inst: KnapsackInstance) -> KSet:
    """Longest suffix of the acceptance-ordered sequence that fits the budget.

    Suffix cost grows with suffix length, so this is also the feasible
    suffix of maximum cost.
    """
    total = 0.0
    chosen: list[tuple[Element, int]] = []
    for e, i in reversed(seq):
        c = inst.cost[e]
        if total + c > inst.budget:
            break
        total += c
        chosen.append((e, i))
    return KSet(inst.k, chosen)


def laa(inst: KnapsackInstance, f: CountingOracle, tie_break: str = TIE_LOWEST) -> LaaRun:
    """Single-pass streaming solver; at most n(k+1) queries.

    Guarantees (for nonnegative k-submodular f): the returned value is at
    least a 1/19 fraction of the optimum, and the solution fits the
    budget.
    """
    _require_normalized(inst)
    if not inst.universe:
        raise EmptyUniverse("cannot stream an empty universe")
    k, budget = inst.k, inst.budget
    q0 = f.queries
    t0 = perf_counter()

    x = KSet.empty(k)
    run_value = 0.0  # cached f(x); f(empty)=0 by normalization, no query spent
    run_cost = 0.0
    accepted: list[tuple[Element, int]] = []
    best_elem: Element | None = None
    best_pos = 1
    best_val = 0.0
    trace: list[TraceEvent] = []

    for e in inst.universe:
        singles = [f.evaluate(KSet.singleton(k, e, i)) for i in range(1, k + 1)]
        i_e, v_e = _best_position(singles, tie_break)
        if v_e > best_val:  # strict: first seen keeps the slot on ties
            best_elem, best_pos, best_val = e, i_e, v_e
        c = inst.cost[e]
        marginal = None
        threshold = None
        took = False
        if c <= budget / 2:
            cand = x.assign(e, i_e)
            marginal = f.evaluate(cand) - run_value
            threshold = c * run_value / budget
            if marginal >= threshold:
                x = cand
                run_value += marginal
                run_cost += c
                accepted.append((e, i_e))
                took = True
        trace.append(
            TraceEvent(e, i_e, v_e, marginal, threshold, took, run_cost, run_value)
        )

    if run_cost <= budget:
        suffix = x
        suffix_value = run_value
    else:
        suffix = suffix_pack(accepted, inst)
        suffix_value = f.peek(suffix)

    # Final pick between the packed suffix and the best singleton; ties go
    # to the suffix.  An all-nonpositive stream leaves the empty k-set as
    # the singleton fallback with value 0.
    if best_elem is not None:
        single = KSet.singleton(k, best_elem, best_pos)
        single_val = best_val
    else:
        single = KSet.empty(k)
        single_val = 0.0
    if single_val > suffix_value:
        solution = single
    else:
        solution = suffix

    value = f.peek(solution)
    millis = (perf_counter() - t0) * 1e3
    result = RunResult(
        solution=solution,
        value=value,
        queries=f.queries - q0,
        millis=millis,
        algorithm="laa",
        params={
            "B": budget,
            "k": k,
            "n": inst.n,
            "tie_break": tie_break,
            "solution_cost": total_cost(solution, inst),
        },
    )
    return LaaRun(
        result=result,
        trace=trace,
        accepted=tuple(accepted),
        full_value=run_value,
        full_cost=run_cost,
        suffix=suffix,
        suffix_value=suffix_value,
        best_singleton=None if best_elem is None else (best_elem, best_pos),
        best_singleton_value=best_val,
    )


def guess_grid(gamma: float, epsilon: float) -> tuple[float, ...]:
    """Geometric grid {(1+eps)^i} over the window [gamma, 19*gamma].

    Exponents range over all integers (the window may sit below 1), and
    the returned grid has at most ceil(log_{1+eps} 19) + 1 points.  Empty
    when gamma <= 0 (degenerate objective).
    """
    if gamma <= 0:
        return ()
    base = 1.0 + epsilon
    log_base = math.log(base)
    lo = math.ceil(math.log(gamma) / log_base - 1e-9)
    while base**lo < gamma:
        lo += 1
    while base ** (lo - 1) >= gamma:
        lo -= 1
    hi = math.floor(math.log(19.0 * gamma) / log_base + 1e-9)
    while base**hi > 19.0 * gamma:
        hi -= 1
    while base ** (hi + 1) <= 19.0 * gamma:
        hi += 1
    return tuple(base**i for i in range(lo, hi + 1))


def rla(
    inst: KnapsackInstance,
    f: CountingOracle,
    epsilon: float,
    tie_break: str = TIE_LOWEST,
) -> RlaRun:
    """Guess-grid solver: (1/5 - eps) of the optimum in O(nk/eps) queries.

    Runs ``laa`` first; its value brackets the optimum within a factor of
    19, which caps the grid size.  Each grid level v keeps an independent
    candidate grown by the density threshold 2v/(5B).
    """
    if not 0.0 < epsilon < 0.2:
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 1/5), got {epsilon}")
    k, budget = inst.k, inst.budget
    q0 = f.queries
    t0 = perf_counter()

    base_run = laa(inst, f, tie_break)
    gamma = base_run.result.value
    grid = guess_grid(gamma, epsilon)
    guesses = [
        RlaGuess(level=v, tau=2.0 * v / (5.0 * budget), solution=KSet.empty(k), value=0.0, cost=0.0)
        for v in grid
    ]

    for e in inst.universe:
        c = inst.cost[e]
        for g in guesses:
            cands = [g.solution.assign(e, i) for i in range(1, k + 1)]
            vals = [f.evaluate(cand) for cand in cands]
            i_v, v_best = _best_position(vals, tie_break)
            marginal = v_best - g.value
            took = False
            if g.cost + c <= budget and marginal / c >= g.tau:
                g.solution = cands[i_v - 1]
                g.value = v_best
                g.cost += c
                took = True
            g.trace.append(
                TraceEvent(e, i_v, None, marginal, g.tau, took, g.cost, g.value)
            )

    # Final argmax over the laa solution, the best singleton it tracked,
    # and every guess candidate.  The laa solution comes first so ties
    # preserve value >= f(s_b) exactly.
    candidates: list[tuple[KSet, float]] = [(base_run.result.solution, gamma)]
    if base_run.best_singleton is not None:
        e_m, i_m = base_run.best_singleton
        candidates.append((KSet.singleton(k, e_m, i_m), base_run.best_singleton_value))
    candidates.extend((g.solution, g.value) for g in guesses)
    solution, _ = max(candidates, key=lambda sv: sv[1])

    value = f.peek(solution)
    millis = (perf_counter() - t0) * 1e3
    result = RunResult(
        solution=solution,
        value=value,
        queries=f.queries - q0,
        millis=millis,
        algorithm="rla",
        params={
            "B": budget,
            "k": k,
            "n": inst.n,
            "epsilon": epsilon,
            "tie_break": tie_break,
            "grid_size": len(grid),
            "solution_cost": total_cost(solution, inst),
        },
    )
    return RlaRun(result=result, base=base_run, grid=grid, guesses=guesses)


def enumerate_digits(n: int, k: int) -> np.ndarray:
    """All (k+1)^n assignments as a digit matrix in lexicographic order.

    Column j holds the position of universe element j; row order is
    lexicographic with element 0 most significant, so the first maximum
    found by argmax is the lexicographically smallest optimizer.
    """
    states = (k + 1) ** n
    idx = np.arange(states, dtype=np.int64)
    digits = np.empty((states, n), dtype=np.int8)
    for j in range(n):
        digits[:, j] = (idx // (k + 1) ** (n - 1 - j)) % (k + 1)
    return digits


def brute_force_opt(
    inst: KnapsackInstance,
    objective: Objective,
    max_enum: int = DEFAULT_ENUM_CAP,
) -> RunResult:
    """Exact optimum by full enumeration; the verification reference.

    Feasible assignments only are evaluated; ties break toward the
    lexicographically smallest assignment vector.  Raises
    InstanceTooLarge when (k+1)^n exceeds ``max_enum``.
    """
    n, k, budget = inst.n, inst.k, inst.budget
    states = (k + 1) ** n
    if states > max_enum:
        raise InstanceTooLarge(
            f"(k+1)^n = {states} exceeds the enumeration cap {max_enum}"
        )
    t0 = perf_counter()

    if n == 0:
        solution = KSet.empty(k)
        best_value = 0.0
        evals = 1
    elif hasattr(objective, "evaluate_digits"):
        digits = enumerate_digits(n, k)
        costs = (digits > 0).astype(np.float64) @ np.array(
            [inst.cost[e] for e in inst.universe], dtype=np.float64
        )
        feasible = costs <= budget
        feas_digits = digits[feasible]
        values = objective.evaluate_digits(feas_digits, universe=inst.universe)
        best_row = int(np.argmax(values))  # first max = lex smallest
        best_value = float(values[best_row])
        row = feas_digits[best_row]
        solution = KSet(
            k, [(e, int(d)) for e, d in zip(inst.universe, row) if d > 0]
        )
        evals = int(feasible.sum())
    else:
        best_value = -math.inf
        best_tuple: tuple[int, ...] | None = None
        cost_arr = [inst.cost[e] for e in inst.universe]
        evals = 0
        for combo in itertools.product(range(k + 1), repeat=n):
            c = sum(cost_arr[j] for j in range(n) if combo[j] > 0)
            if c > budget:
                continue
            x = KSet(k, [(inst.universe[j], combo[j]) for j in range(n) if combo[j] > 0])
            v = objective.evaluate(x)
            evals += 1
            if v > best_value:
                best_value = v
                best_tuple = combo
        assert best_tuple is not None  # empty assignment is always feasible
        solution = KSet(
            k, [(inst.universe[j], best_tuple[j]) for j in range(n) if best_tuple[j] > 0]
        )

    millis = (perf_counter() - t0) * 1e3
    return RunResult(
        solution=solution,
        value=best_value,
        queries=evals,
        millis=millis,
        algorithm="brute",
        params={
            "B": budget,
            "k": k,
            "n": n,
            "max_enum": max_enum,
            "solution_cost": total_cost(solution, inst),
        },
    )


def greedy_baseline(inst: KnapsackInstance, f: CountingOracle) -> RunResult:
    """Density greedy: repeatedly add the feasible (element, position)
    with the best marginal gain per unit cost while that gain is positive.
    Benchmark comparator only; no approximation guarantee."""
    k, budget = inst.k, inst.budget
    q0 = f.queries
    t0 = perf_counter()

    x = KSet.empty(k)
    run_value = 0.0
    run_cost = 0.0
    while True:
        best = None  # (density, marginal, cand, element, cost)
        for e in inst.universe:
            if e in x:
                continue
            c = inst.cost[e]
            if run_cost + c > budget:
                continue
            for i in range(1, k + 1):
                cand = x.assign(e, i)
                marginal = f.evaluate(cand) - run_value
                density = marginal / c
                if best is None or density > best[0]:
                    best = (density, marginal, cand, e, c)
        if best is None or best[1] <= 0:
            break
        _, marginal, cand, _, c = best
        x = cand
        run_value += marginal
        run_cost += c

    value = f.peek(x)
    millis = (perf_counter() - t0) * 1e3
    return RunResult(
        solution=x,
        value=value,
        queries=f.queries - q0,
        millis=millis,
        algorithm="greedy",
        params={
            "B": budget,
            "k": k,
            "n": inst.n,
            "solution_cost": run_cost,
        },
    )
