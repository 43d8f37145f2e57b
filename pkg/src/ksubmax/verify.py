"""Certification of k-submodularity and auditing of solver run traces.

The exhaustive checker tabulates the objective over all (k+1)^n k-sets
and then verifies three properties:

* orthant submodularity: marginals never grow as the k-set grows.  For
  each (element, position) the marginal table over the remaining
  elements is swept with a down-set minimum (zeroing one element axis at
  a time), which decides the predicate for *every* comparable pair x <= y
  without enumerating the pairs.
* pairwise monotonicity: marginals at two distinct positions sum >= 0.
* the join/meet inequality itself, over all ordered pairs of k-sets when
  the pair count fits a cap, else over a seeded pair sample.

Orthant submodularity plus pairwise monotonicity is equivalent to
k-submodularity, so a clean exhaustive run of the first two checks is a
complete certificate even when the pair check was sampled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algorithms import (
    DEFAULT_ENUM_CAP,
    LaaRun,
    RlaRun,
    brute_force_opt,
    enumerate_digits,
)
from .errors import InstanceTooLarge, TraceMismatch
from .kset import Element, KnapsackInstance, KSet, total_cost
from .oracle import Objective

DEFAULT_STATE_CAP = 200_000
DEFAULT_PAIR_CAP = 5_000_000


@dataclass(frozen=True)
class OrthantWitness:
    x: KSet
    y: KSet
    element: Element
    position: int
    gain_at_x: float
    gain_at_y: float


@dataclass(frozen=True)
class PairwiseWitness:
    x: KSet
    element: Element
    position_i: int
    position_j: int
    gain_i: float
    gain_j: float


@dataclass(frozen=True)
class DefinitionWitness:
    x: KSet
    y: KSet
    lhs: float  # f(x) + f(y)
    rhs: float  # f(meet) + f(join)


@dataclass(frozen=True)
class NonmonotoneWitness:
    x: KSet
    element: Element
    position: int
    marginal: float


@dataclass
class KSubReport:
    mode: str  # "exhaustive" | "sampled"
    orthant_ok: bool
    pairwise_ok: bool
    definition_ok: bool
    definition_mode: str  # "exhaustive" | "sampled"
    orthant_counterexample: OrthantWitness | None
    pairwise_counterexample: PairwiseWitness | None
    definition_counterexample: DefinitionWitness | None
    nonmonotone_witness: NonmonotoneWitness | None
    orthant_predicates: int
    pairwise_predicates: int
    definition_pairs: int
    seed: int | None = None
    trials: int | None = None

    @property
    def all_ok(self) -> bool:
        return self.orthant_ok and self.pairwise_ok and self.definition_ok

    @property
    def pairs_checked(self) -> int:
        return self.orthant_predicates + self.pairwise_predicates + self.definition_pairs

    def to_text(self) -> str:
        lines = [
            f"mode: {self.mode}"
            + (f" (seed={self.seed}, trials={self.trials})" if self.mode == "sampled" else ""),
            f"orthant submodular: {'ok' if self.orthant_ok else 'VIOLATED'}"
            f" [{self.orthant_predicates} predicates]",
            f"pairwise monotone:  {'ok' if self.pairwise_ok else 'VIOLATED'}"
            f" [{self.pairwise_predicates} predicates]",
            f"join/meet inequality: {'ok' if self.definition_ok else 'VIOLATED'}"
            f" [{self.definition_pairs} pairs, {self.definition_mode}]",
        ]
        if self.orthant_counterexample is not None:
            w = self.orthant_counterexample
            lines.append(
                f"  orthant counterexample: e={w.element!r} i={w.position} "
                f"gain {w.gain_at_x} -> {w.gain_at_y} as {w.x} grows to {w.y}"
            )
        if self.pairwise_counterexample is not None:
            w = self.pairwise_counterexample
            lines.append(
                f"  pairwise counterexample: e={w.element!r} at x={w.x}: "
                f"w({w.position_i})={w.gain_i} + w({w.position_j})={w.gain_j} < 0"
            )
        if self.definition_counterexample is not None:
            w = self.definition_counterexample
            lines.append(
                f"  definition counterexample: f(x)+f(y)={w.lhs} < {w.rhs} "
                f"for x={w.x}, y={w.y}"
            )
        if self.nonmonotone_witness is not None:
            w = self.nonmonotone_witness
            lines.append(
                f"non-monotone witness: adding ({w.element!r}, {w.position}) to "
                f"{w.x} changes f by {w.marginal}"
            )
        else:
            lines.append("non-monotone witness: none (function looks monotone)")
        lines.append(f"verdict: {'k-submodular' if self.all_ok else 'NOT k-submodular'}")
        return "\n".join(lines)

    def to_kv(self) -> str:
        pairs = [
            ("mode", self.mode),
            ("orthant_ok", int(self.orthant_ok)),
            ("pairwise_ok", int(self.pairwise_ok)),
            ("definition_ok", int(self.definition_ok)),
            ("definition_mode", self.definition_mode),
            ("orthant_predicates", self.orthant_predicates),
            ("pairwise_predicates", self.pairwise_predicates),
            ("definition_pairs", self.definition_pairs),
            ("nonmonotone_witness", int(self.nonmonotone_witness is not None)),
            ("all_ok", int(self.all_ok)),
        ]
        if self.seed is not None:
            pairs.append(("seed", self.seed))
        if self.trials is not None:
            pairs.append(("trials", self.trials))
        return "\n".join(f"{k}={v}" for k, v in pairs)


def _value_table(objective: Objective, n: int, k: int) -> np.ndarray:
    """Objective values over all (k+1)^n assignments, as an n-axis tensor."""
    digits = enumerate_digits(n, k)
    if hasattr(objective, "evaluate_digits"):
        flat = np.asarray(objective.evaluate_digits(digits), dtype=np.float64)
    else:
        universe = objective.universe
        flat = np.empty(digits.shape[0], dtype=np.float64)
        for r in range(digits.shape[0]):
            x = KSet(k, [(universe[j], int(d)) for j, d in enumerate(digits[r]) if d > 0])
            flat[r] = objective.evaluate(x)
    return flat.reshape((k + 1,) * n)


def _digits_to_kset(digits: Sequence[int], universe: Sequence[Element], k: int) -> KSet:
    return KSet(k, [(universe[j], int(d)) for j, d in enumerate(digits) if d > 0])


def _orthant_exhaustive(tensor, universe, k, tol):
    """Down-set-minimum sweep deciding every orthant predicate.

    For a fixed (element, position), let D be the marginal table over the
    other elements.  After sweeping min(D[.., d, ..], D[.., 0, ..]) along
    each remaining axis, entry y holds min over the entire down-set
    {x : x <= y}; the property holds iff that minimum never drops below
    D[y] (it cannot exceed it, since x = y participates).
    """
    n = tensor.ndim
    witness = None
    nonmono = None
    nonmono_val = -tol
    for j in range(n):
        base = np.take(tensor, 0, axis=j)
        for i in range(1, k + 1):
            delta = np.take(tensor, i, axis=j) - base
            mn = float(delta.min()) if delta.size else 0.0
            if mn < nonmono_val:
                nonmono_val = mn
                idx = np.unravel_index(int(delta.argmin()), delta.shape)
                digits = list(idx[:j]) + [0] + list(idx[j:])
                nonmono = NonmonotoneWitness(
                    _digits_to_kset(digits, universe, k), universe[j], i, mn
                )
            if witness is not None:
                continue
            m = delta.copy()
            for ax in range(delta.ndim):
                np.minimum(m, np.take(m, [0], axis=ax), out=m)
            bad = delta - m > tol
            if bad.any():
                flat = int(np.argmax(bad.reshape(-1)))
                y_idx = np.unravel_index(flat, delta.shape)
                witness = _orthant_witness(delta, y_idx, j, i, universe, k, tol)
    return witness, nonmono


def _orthant_witness(delta, y_idx, j, i, universe, k, tol):
    """Recover a concrete x <= y pair for a flagged orthant violation."""
    gain_y = float(delta[y_idx])
    supp = [ax for ax, d in enumerate(y_idx) if d > 0]
    for r in range(1, len(supp) + 1):
        for dropped in itertools.combinations(supp, r):
            x_idx = tuple(0 if ax in dropped else d for ax, d in enumerate(y_idx))
            gain_x = float(delta[x_idx])
            if gain_x < gain_y - tol:
                x_digits = list(x_idx[:j]) + [0] + list(x_idx[j:])
                y_digits = list(y_idx[:j]) + [0] + list(y_idx[j:])
                return OrthantWitness(
                    _digits_to_kset(x_digits, universe, k),
                    _digits_to_kset(y_digits, universe, k),
                    universe[j],
                    i,
                    gain_x,
                    gain_y,
                )
    raise AssertionError("flagged orthant violation without a witness pair")


def _pairwise_exhaustive(tensor, universe, k, tol):
    n = tensor.ndim
    for j in range(n):
        base = np.take(tensor, 0, axis=j)
        deltas = [np.take(tensor, i, axis=j) - base for i in range(1, k + 1)]
        for i1 in range(k):
            for i2 in range(i1 + 1, k):
                s = deltas[i1] + deltas[i2]
                bad = s < -tol
                if bad.any():
                    flat = int(np.argmax(bad.reshape(-1)))
                    idx = np.unravel_index(flat, s.shape)
                    digits = list(idx[:j]) + [0] + list(idx[j:])
                    return PairwiseWitness(
                        _digits_to_kset(digits, universe, k),
                        universe[j],
                        i1 + 1,
                        i2 + 1,
                        float(deltas[i1][idx]),
                        float(deltas[i2][idx]),
                    )
    return None


def _meet_join_digits(x, y):
    """Vectorized position-wise meet and join on digit arrays."""
    meet = np.where(x == y, x, 0)
    join = np.where(x == 0, y, np.where((y == 0) | (x == y), x, 0))
    return meet, join


def _definition_pairs_exhaustive(flat, digits, powers, universe, k, tol, block=512):
    witness = None
    states = digits.shape[0]
    d64 = digits.astype(np.int64)
    for start in range(0, states, block):
        xb = d64[start : start + block][:, None, :]
        meet, join = _meet_join_digits(xb, d64[None, :, :])
        meet_idx = meet @ powers
        join_idx = join @ powers
        lhs = flat[start : start + block][:, None] + flat[None, :]
        rhs = flat[meet_idx] + flat[join_idx]
        bad = rhs - lhs > tol
        if bad.any():
            r, c = np.unravel_index(int(np.argmax(bad.reshape(-1))), bad.shape)
            witness = DefinitionWitness(
                _digits_to_kset(d64[start + r], universe, k),
                _digits_to_kset(d64[c], universe, k),
                float(lhs[r, c]),
                float(rhs[r, c]),
            )
            return witness
    return witness


def _definition_pairs_sampled(flat, digits, powers, universe, k, tol, seed, trials):
    rng = np.random.default_rng(seed)
    states = digits.shape[0]
    xi = rng.integers(0, states, size=trials)
    yi = rng.integers(0, states, size=trials)
    d64 = digits.astype(np.int64)
    meet, join = _meet_join_digits(d64[xi], d64[yi])
    lhs = flat[xi] + flat[yi]
    rhs = flat[meet @ powers] + flat[join @ powers]
    bad = rhs - lhs > tol
    if bad.any():
        t = int(np.argmax(bad))
        return DefinitionWitness(
            _digits_to_kset(d64[xi[t]], universe, k),
            _digits_to_kset(d64[yi[t]], universe, k),
            float(lhs[t]),
            float(rhs[t]),
        )
    return None


def check_ksubmodularity(
    objective: Objective,
    inst: KnapsackInstance | None = None,
    mode: str = "exhaustive",
    *,
    state_cap: int = DEFAULT_STATE_CAP,
    definition_pair_cap: int = DEFAULT_PAIR_CAP,
    seed: int = 0,
    trials: int = 2000,
) -> KSubReport:
    """Certify (or refute) k-submodularity of an objective.

    Exhaustive mode requires (k+1)^n <= ``state_cap`` and is a complete
    certificate: the orthant and pairwise checks cover every predicate,
    and their conjunction is equivalent to the join/meet definition.  The
    definition check itself enumerates all ordered pairs when their count
    fits ``definition_pair_cap`` and otherwise falls back to a seeded
    sample (reported in ``definition_mode``).
    """
    universe = objective.universe
    k = objective.k
    if inst is not None:
        if tuple(inst.universe) != tuple(universe) or inst.k != k:
            raise ValueError("instance universe/k must match the objective")
    n = len(universe)
    if n == 0:
        raise ValueError("cannot check an objective over an empty universe")

    if mode == "sampled":
        return _check_sampled(objective, seed, trials)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")

    states = (k + 1) ** n
    if states > state_cap:
        raise InstanceTooLarge(
            f"(k+1)^n = {states} exceeds the exhaustive state cap {state_cap}"
        )

    tensor = _value_table(objective, n, k)
    flat = tensor.reshape(-1)
    scale = float(np.abs(flat).max()) if flat.size else 0.0
    tol = 1e-9 * max(1.0, scale)

    orthant_w, nonmono = _orthant_exhaustive(tensor, universe, k, tol)
    pairwise_w = _pairwise_exhaustive(tensor, universe, k, tol)

    digits = enumerate_digits(n, k)
    powers = (k + 1) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    if states * states <= definition_pair_cap:
        definition_mode = "exhaustive"
        definition_pairs = states * states
        definition_w = _definition_pairs_exhaustive(flat, digits, powers, universe, k, tol)
    else:
        definition_mode = "sampled"
        definition_pairs = trials
        definition_w = _definition_pairs_sampled(
            flat, digits, powers, universe, k, tol, seed, trials
        )

    return KSubReport(
        mode="exhaustive",
        orthant_ok=orthant_w is None,
        pairwise_ok=pairwise_w is None,
        definition_ok=definition_w is None,
        definition_mode=definition_mode,
        orthant_counterexample=orthant_w,
        pairwise_counterexample=pairwise_w,
        definition_counterexample=definition_w,
        nonmonotone_witness=nonmono,
        orthant_predicates=n * k * (2 * k + 1) ** (n - 1),
        pairwise_predicates=n * (k * (k - 1) // 2) * (k + 1) ** (n - 1),
        definition_pairs=definition_pairs,
        seed=seed if definition_mode == "sampled" else None,
        trials=trials if definition_mode == "sampled" else None,
    )


def _check_sampled(objective: Objective, seed: int, trials: int) -> KSubReport:
    """Seeded spot checks of all three properties on random k-sets.

    Draws x uniformly over positions 0..k, grows y from x by assigning a
    random subset of the unassigned elements, and tests one predicate of
    each kind per trial.  Suitable for objectives too large (or too noisy)
    to tabulate.
    """
    rng = np.random.default_rng(seed)
    universe = objective.universe
    n, k = len(universe), objective.k

    orthant_w = pairwise_w = definition_w = nonmono = None
    orthant_n = pairwise_n = definition_n = 0

    def to_kset(digs):
        return _digits_to_kset(digs, universe, k)

    for _ in range(trials):
        x_dig = rng.integers(0, k + 1, size=n)
        grow = (x_dig == 0) & (rng.random(n) < 0.5)
        y_dig = x_dig.copy()
        y_dig[grow] = rng.integers(1, k + 1, size=int(grow.sum()))

        free_y = np.flatnonzero(y_dig == 0)
        x = to_kset(x_dig)
        y = to_kset(y_dig)
        fx = objective.evaluate(x)
        fy = objective.evaluate(y)
        local = max(1.0, abs(fx), abs(fy))

        if free_y.size and orthant_w is None:
            j = int(rng.choice(free_y))
            i = int(rng.integers(1, k + 1))
            gx = objective.evaluate(x.assign(universe[j], i)) - fx
            gy = objective.evaluate(y.assign(universe[j], i)) - fy
            orthant_n += 1
            if gy < -1e-9 * local and nonmono is None:
                nonmono = NonmonotoneWitness(y, universe[j], i, gy)
            if gx < gy - 1e-9 * local:
                orthant_w = OrthantWitness(x, y, universe[j], i, gx, gy)

        free_x = np.flatnonzero(x_dig == 0)
        if free_x.size and k >= 2 and pairwise_w is None:
            j = int(rng.choice(free_x))
            i1, i2 = rng.choice(np.arange(1, k + 1), size=2, replace=False)
            g1 = objective.evaluate(x.assign(universe[j], int(i1))) - fx
            g2 = objective.evaluate(x.assign(universe[j], int(i2))) - fx
            pairwise_n += 1
            if g1 + g2 < -1e-9 * local:
                pairwise_w = PairwiseWitness(x, universe[j], int(i1), int(i2), g1, g2)

        if definition_w is None:
            z_dig = rng.integers(0, k + 1, size=n)
            z = to_kset(z_dig)
            fz = objective.evaluate(z)
            lhs = fx + fz
            rhs = objective.evaluate(x.meet(z)) + objective.evaluate(x.join(z))
            definition_n += 1
            if rhs - lhs > 1e-9 * max(local, abs(fz)):
                definition_w = DefinitionWitness(x, z, lhs, rhs)

    return KSubReport(
        mode="sampled",
        orthant_ok=orthant_w is None,
        pairwise_ok=pairwise_w is None,
        definition_ok=definition_w is None,
        definition_mode="sampled",
        orthant_counterexample=orthant_w,
        pairwise_counterexample=pairwise_w,
        definition_counterexample=definition_w,
        nonmonotone_witness=nonmono,
        orthant_predicates=orthant_n,
        pairwise_predicates=pairwise_n,
        definition_pairs=definition_n,
        seed=seed,
        trials=trials,
    )


@dataclass
class LaaAudit:
    events: int
    lemma2_ok: bool
    suffix_value: float
    full_value: float
    theorem1_ok: bool | None = None
    opt: float | None = None
    result_value: float | None = None
    lemma4_ok: bool | None = None
    opt_small: float | None = None

    @property
    def passed(self) -> bool:
        checks = [self.lemma2_ok]
        if self.theorem1_ok is not None:
            checks.append(self.theorem1_ok)
        if self.lemma4_ok is not None:
            checks.append(self.lemma4_ok)
        return all(checks)


def audit_laa_trace(
    run: LaaRun,
    inst: KnapsackInstance,
    objective: Objective,
    *,
    check_optimum: bool = True,
    max_enum: int = DEFAULT_ENUM_CAP,
) -> LaaAudit:
    """Replay an laa trace and verify its per-event and end-of-run claims.

    Raises TraceMismatch when a recomputed value disagrees with the
    recorded one or an accepted event did not actually clear the
    threshold.  When the instance is small enough to brute force, also
    checks the end-to-end value against 1/19 of the optimum and the
    packed suffix against 1/18 of the optimum over the cheap half.
    """
    k, budget = inst.k, inst.budget
    x = KSet.empty(k)
    val = 0.0
    cost = 0.0
    scale = 1.0

    for ev in run.trace:
        single = objective.evaluate(KSet.singleton(k, ev.element, ev.chosen_position))
        scale = max(scale, abs(single))
        tol = 1e-9 * scale
        if ev.singleton_value is None or abs(single - ev.singleton_value) > tol:
            raise TraceMismatch(
                f"singleton value for {ev.element!r} diverges: "
                f"recorded {ev.singleton_value}, recomputed {single}"
            )
        c = inst.cost[ev.element]
        if ev.marginal is None:
            if c <= budget / 2:
                raise TraceMismatch(
                    f"element {ev.element!r} is cheap (c={c}) but has no marginal"
                )
            if ev.accepted:
                raise TraceMismatch(f"expensive element {ev.element!r} marked accepted")
            continue
        cand = x.assign(ev.element, ev.chosen_position)
        marginal = objective.evaluate(cand) - val
        threshold = c * val / budget
        scale = max(scale, abs(marginal), abs(threshold))
        tol = 1e-9 * scale
        if abs(marginal - ev.marginal) > tol or abs(threshold - ev.threshold_compared) > tol:
            raise TraceMismatch(
                f"marginal/threshold for {ev.element!r} diverge from the trace"
            )
        should_accept = marginal >= threshold
        if should_accept != ev.accepted:
            raise TraceMismatch(
                f"acceptance decision for {ev.element!r} contradicts the "
                f"threshold rule (marginal {marginal} vs threshold {threshold})"
            )
        if ev.accepted:
            x = cand
            val += marginal
            cost += c
            if abs(val - ev.running_value) > tol or abs(cost - ev.running_cost) > 1e-9:
                raise TraceMismatch(
                    f"running totals after {ev.element!r} diverge from the trace"
                )

    suffix_value = objective.evaluate(run.suffix)
    tol = 1e-9 * max(1.0, scale, abs(val))
    if abs(val - run.full_value) > tol or abs(suffix_value - run.suffix_value) > tol:
        raise TraceMismatch("end-of-pass values diverge from the recorded run")

    audit = LaaAudit(
        events=len(run.trace),
        lemma2_ok=suffix_value >= val / 3.0 - tol,
        suffix_value=suffix_value,
        full_value=val,
    )
    if not check_optimum:
        return audit

    opt = brute_force_opt(inst, objective, max_enum=max_enum).value
    audit.opt = opt
    audit.result_value = run.result.value
    audit.theorem1_ok = run.result.value >= opt / 19.0 - 1e-9 * abs(opt)

    cheap = [e for e in inst.universe if inst.cost[e] <= budget / 2]
    if cheap:
        small = KnapsackInstance(tuple(cheap), k, inst.cost, budget)
        opt_small = brute_force_opt(small, objective, max_enum=max_enum).value
    else:
        opt_small = 0.0
    audit.opt_small = opt_small
    audit.lemma4_ok = suffix_value >= opt_small / 18.0 - 1e-9 * abs(opt_small)
    return audit


@dataclass
class RlaAudit:
    bracket_ok: bool
    feasible_ok: bool
    dominance_ok: bool
    ratio_ok: bool | None = None
    opt: float | None = None
    result_value: float | None = None

    @property
    def passed(self) -> bool:
        checks = [self.bracket_ok, self.feasible_ok, self.dominance_ok]
        if self.ratio_ok is not None:
            checks.append(self.ratio_ok)
        return all(checks)


def audit_rla(
    run: RlaRun,
    inst: KnapsackInstance,
    objective: Objective,
    epsilon: float,
    *,
    check_optimum: bool = True,
    max_enum: int = DEFAULT_ENUM_CAP,
) -> RlaAudit:
    """Verify the rla guarantees: guess grid inside [gamma, 19*gamma],
    every candidate within budget, the final value dominating the laa
    value, and (brute force permitting) the (1/5 - eps) ratio."""
    gamma = run.base.result.value
    bracket_ok = all(gamma <= v <= 19.0 * gamma for v in run.grid)
    feasible_ok = all(
        total_cost(g.solution, inst) <= inst.budget for g in run.guesses
    ) and total_cost(run.result.solution, inst) <= inst.budget
    dominance_ok = run.result.value >= gamma

    audit = RlaAudit(
        bracket_ok=bracket_ok,
        feasible_ok=feasible_ok,
        dominance_ok=dominance_ok,
        result_value=run.result.value,
    )
    if check_optimum:
        opt = brute_force_opt(inst, objective, max_enum=max_enum).value
        audit.opt = opt
        audit.ratio_ok = run.result.value >= (0.2 - epsilon) * opt - 1e-9 * abs(opt)
    return audit
