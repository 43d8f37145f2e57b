"""Objective oracles: the abstract objective, exact query counting, and a
synthetic non-monotone k-submodular test objective.

The synthetic family combines position-independent coverage with signed
per-(element, position) bonuses:

    f(x) = |union of coverage(e) for assigned e| + sum of w[e, x(e)]

Coverage gain is nonnegative and shrinks as the k-set grows, and the
bonuses are constant offsets, so marginals satisfy the diminishing
property in every orthant.  Requiring w[e,i] + w[e,j] >= 0 for i != j
gives pairwise monotonicity, which together certifies the function as
k-submodular while single negative bonuses still produce negative
marginals (non-monotone behavior).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Mapping, Sequence

import numpy as np

from .errors import ElementAlreadyAssigned, PairwiseViolation, UnknownElement
from .kset import Element, KSet


class Objective(ABC):
    """A normalized set function over k-sets: evaluate(empty) == 0.

    Implementations are read-only after construction and must be
    deterministic (Monte Carlo objectives fix their sample set when
    built, so repeated queries on the same k-set agree bit-for-bit).
    """

    k: int
    universe: tuple[Element, ...]

    @abstractmethod
    def evaluate(self, x: KSet) -> float:
        """Value of the k-set ``x``.  Raises UnknownElement on stray ids."""

    def _check_support(self, x: KSet) -> None:
        members = getattr(self, "_members", None)
        if members is None:
            members = frozenset(self.universe)
            self._members = members
        for e, _ in x.items():
            if e not in members:
                raise UnknownElement(f"element {e!r} not in objective universe")


class CountingOracle:
    """Wraps an objective and counts every evaluation.

    One oracle per algorithm run; the counter is a plain int and is not
    synchronized, so concurrent runs must each own their oracle.
    """

    __slots__ = ("inner", "_queries")

    def __init__(self, inner: Objective):
        self.inner = inner
        self._queries = 0

    @property
    def queries(self) -> int:
        return self._queries

    @property
    def k(self) -> int:
        return self.inner.k

    @property
    def universe(self) -> tuple[Element, ...]:
        return self.inner.universe

    def evaluate(self, x: KSet) -> float:
        """Counted evaluation: exactly one query per call."""
        self._queries += 1
        return self.inner.evaluate(x)

    def peek(self, x: KSet) -> float:
        """Uncounted evaluation, reserved for end-of-run reporting and
        audits (the final re-evaluation of a solution is not charged)."""
        return self.inner.evaluate(x)

    def reset(self) -> None:
        self._queries = 0


def evaluate_counted(oracle: CountingOracle, x: KSet) -> float:
    return oracle.evaluate(x)


def reset_counter(oracle: CountingOracle) -> None:
    oracle.reset()


def marginal_gain(
    oracle: CountingOracle,
    x: KSet,
    e: Element,
    i: int,
    base_value: float | None = None,
) -> float:
    """f(x + (e, i)) - f(x).

    Charges 1 query when the caller already knows f(x) (pass it as
    ``base_value``, the algorithms' cached running value), else 2.
    """
    if e in x:
        raise ElementAlreadyAssigned(f"element {e!r} already assigned in x")
    if base_value is None:
        base_value = oracle.evaluate(x)
    return oracle.evaluate(x.assign(e, i)) - base_value


class CoverageBonusObjective(Objective):
    """Coverage union size plus signed per-(element, position) bonuses.

    ``coverage`` maps each element to a finite set of ground items
    (position-independent); ``bonus`` maps (element, position) to a real
    weight, with missing entries treated as 0.  Construction validates
    w[e,i] + w[e,j] >= 0 for every element and i != j unless
    ``validate=False`` (used only to build deliberately broken objectives
    for the property-checker tests).
    """

    def __init__(
        self,
        coverage: Mapping[Element, Sequence],
        bonus: Mapping[tuple[Element, int], float],
        k: int,
        validate: bool = True,
    ):
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        self.k = k
        self.universe = tuple(coverage)
        self.coverage = {e: frozenset(items) for e, items in coverage.items()}

        self._bonus_rows: dict[Element, tuple[float, ...]] = {}
        for e in self.universe:
            row = tuple(float(bonus.get((e, i), 0.0)) for i in range(1, k + 1))
            self._bonus_rows[e] = row
        for key in bonus:
            e, i = key
            if e not in self._bonus_rows:
                raise UnknownElement(f"bonus for unknown element {e!r}")
            if not 1 <= i <= k:
                raise ValueError(f"bonus position {i} for {e!r} not in 1..{k}")
        if validate:
            for e, row in self._bonus_rows.items():
                for i in range(k):
                    for j in range(i + 1, k):
                        if row[i] + row[j] < 0:
                            raise PairwiseViolation(e, i + 1, j + 1, row[i], row[j])

        # Items packed into bit masks so evaluation is a handful of ORs.
        items = sorted({it for s in self.coverage.values() for it in s}, key=repr)
        self._item_bit = {it: 1 << idx for idx, it in enumerate(items)}
        self._n_items = len(items)
        self._masks = {
            e: sum(self._item_bit[it] for it in s) for e, s in self.coverage.items()
        }

    def evaluate(self, x: KSet) -> float:
        self._check_support(x)
        mask = 0
        bonus = 0.0
        for e, i in x.items():
            mask |= self._masks[e]
            bonus += self._bonus_rows[e][i - 1]
        return float(mask.bit_count()) + bonus

    def evaluate_digits(self, digits: np.ndarray, universe: Sequence[Element] | None = None) -> np.ndarray:
        """Vectorized evaluation of many k-sets at once.

        ``digits`` has one row per k-set and one column per element of
        ``universe`` (default: the objective's own universe; a subset is
        fine, e.g. after normalization dropped elements); entries are
        positions 0..k with 0 meaning unassigned.  Used by the exhaustive
        checker and the brute-force solver; not an oracle query path.
        """
        if universe is None:
            universe = self.universe
        rows, n = digits.shape
        if n != len(universe):
            raise ValueError("digit matrix width must match the universe size")
        for e in universe:
            if e not in self._masks:
                raise UnknownElement(f"element {e!r} not in objective universe")
        n_words = max(1, (self._n_items + 63) // 64)
        mask_words = np.zeros((n, n_words), dtype=np.uint64)
        for col, e in enumerate(universe):
            m = self._masks[e]
            for w in range(n_words):
                mask_words[col, w] = (m >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
        acc = np.zeros((rows, n_words), dtype=np.uint64)
        bonus = np.zeros(rows, dtype=np.float64)
        bonus_mat = np.zeros((n, self.k + 1), dtype=np.float64)
        for col, e in enumerate(universe):
            bonus_mat[col, 1:] = self._bonus_rows[e]
        for col in range(n):
            assigned = digits[:, col] > 0
            if not assigned.any():
                continue
            for w in range(n_words):
                acc[assigned, w] |= mask_words[col, w]
            bonus += bonus_mat[col, digits[:, col]]
        counts = np.bitwise_count(acc).sum(axis=1).astype(np.float64)
        return counts + bonus


def make_coverage_bonus(
    coverage: Mapping[Element, Sequence],
    bonus: Mapping[tuple[Element, int], float],
    k: int,
) -> CoverageBonusObjective:
    """Validated constructor for the synthetic objective."""
    return CoverageBonusObjective(coverage, bonus, k)


def default_test_objective(k: int = 2) -> CoverageBonusObjective:
    """Small non-monotone spec used throughout the test suites.

    Element ``a`` covers item 1 only and carries a -1 bonus at position 1
    (compensated by +1 at position 2, and zeros beyond), while ``b``
    covers items 1..3 with no bonuses.  Adding ``a`` at position 1 after
    ``b`` therefore has marginal -1: a concrete non-monotone witness.
    """
    coverage = {"a": {1}, "b": {1, 2, 3}}
    bonus = {("a", 1): -1.0}
    bonus.update({("a", i): 1.0 for i in range(2, k + 1)})
    return CoverageBonusObjective(coverage, bonus, k)
