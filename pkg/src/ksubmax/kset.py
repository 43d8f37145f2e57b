"""k-set algebra: disjoint k-tuples of subsets with join/meet, plus the
knapsack instance they are optimized over.

A k-set assigns each element of a ground set to one of k positions or to
none.  We store it as an element -> position mapping, which is equivalent
to the tuple-of-disjoint-sets form (``to_sets`` derives that view): an
element can only carry one position, so the k implied subsets are
pairwise disjoint by construction.  Positions are 1-based; 0 means
"unassigned" and never appears in the mapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping

from .errors import (
    ElementAlreadyAssigned,
    EmptyUniverse,
    MismatchedK,
    PositionOutOfRange,
    UnknownElement,
)

Element = Hashable


class KSet:
    """An immutable assignment of elements to positions 1..k.

    Value semantics: every operation returns a new KSet and never mutates
    its inputs, so instances are safe to share across threads.
    """

    __slots__ = ("_k", "_assign", "_hash")

    def __init__(self, k: int, assignment: Mapping[Element, int] | Iterable[tuple[Element, int]] = ()):
        if k < 1:
            raise ValueError(f"k must be a positive integer, got {k}")
        items = assignment.items() if isinstance(assignment, Mapping) else assignment
        mapping: dict[Element, int] = {}
        for e, i in items:
            if not 1 <= i <= k:
                raise PositionOutOfRange(f"position {i} for element {e!r} not in 1..{k}")
            if e in mapping and mapping[e] != i:
                raise ElementAlreadyAssigned(f"element {e!r} given two positions")
            mapping[e] = i
        self._k = k
        self._assign = mapping
        self._hash = None

    @classmethod
    def empty(cls, k: int) -> "KSet":
        return cls(k)

    @classmethod
    def singleton(cls, k: int, e: Element, i: int) -> "KSet":
        return cls(k, ((e, i),))

    @property
    def k(self) -> int:
        return self._k

    @property
    def support(self) -> frozenset:
        return frozenset(self._assign)

    def position(self, e: Element) -> int:
        """Position of ``e``, 0 if unassigned."""
        return self._assign.get(e, 0)

    __getitem__ = position

    def __contains__(self, e: Element) -> bool:
        return e in self._assign

    def __len__(self) -> int:
        return len(self._assign)

    def items(self) -> Iterator[tuple[Element, int]]:
        """(element, position) pairs in insertion order."""
        return iter(self._assign.items())

    def assign(self, e: Element, i: int) -> "KSet":
        """Return this k-set with ``e`` added at position ``i``."""
        if e in self._assign:
            raise ElementAlreadyAssigned(f"element {e!r} already at position {self._assign[e]}")
        if not 1 <= i <= self._k:
            raise PositionOutOfRange(f"position {i} not in 1..{self._k}")
        out = KSet.__new__(KSet)
        out._k = self._k
        out._assign = {**self._assign, e: i}
        out._hash = None
        return out

    def join(self, other: "KSet") -> "KSet":
        """Lattice join: position-wise union, with conflicting elements dropped.

        An element assigned to different positions in the two operands
        belongs to none of the result's subsets.
        """
        if self._k != other._k:
            raise MismatchedK(f"k mismatch: {self._k} != {other._k}")
        merged: dict[Element, int] = {}
        for e, i in self._assign.items():
            j = other._assign.get(e, 0)
            if j == 0 or j == i:
                merged[e] = i
        for e, j in other._assign.items():
            if e not in self._assign:
                merged[e] = j
        out = KSet.__new__(KSet)
        out._k = self._k
        out._assign = merged
        out._hash = None
        return out

    def meet(self, other: "KSet") -> "KSet":
        """Lattice meet: position-wise intersection."""
        if self._k != other._k:
            raise MismatchedK(f"k mismatch: {self._k} != {other._k}")
        out = KSet.__new__(KSet)
        out._k = self._k
        out._assign = {
            e: i for e, i in self._assign.items() if other._assign.get(e, 0) == i
        }
        out._hash = None
        return out

    def issubkset(self, other: "KSet") -> bool:
        """True when every assigned element keeps its position in ``other``."""
        if self._k != other._k:
            raise MismatchedK(f"k mismatch: {self._k} != {other._k}")
        return all(other._assign.get(e, 0) == i for e, i in self._assign.items())

    def to_sets(self) -> tuple[frozenset, ...]:
        """Derive the tuple-of-disjoint-subsets view (index i-1 holds X_i)."""
        sets: list[set] = [set() for _ in range(self._k)]
        for e, i in self._assign.items():
            sets[i - 1].add(e)
        return tuple(frozenset(s) for s in sets)

    def as_dict(self) -> dict[Element, int]:
        return dict(self._assign)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KSet):
            return NotImplemented
        return self._k == other._k and self._assign == other._assign

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._k, frozenset(self._assign.items())))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"({e!r}, {i})" for e, i in self._assign.items())
        return f"KSet(k={self._k}, {{{inner}}})"


@dataclass(frozen=True)
class KnapsackInstance:
    """Ground set with per-element costs and a budget.

    ``universe`` is an ordered sequence; single-pass solvers stream it in
    exactly this order.  Costs are positive; the budget is positive; k >= 2
    (k = 1 is plain submodular maximization, out of scope).
    """

    universe: tuple[Element, ...]
    k: int
    cost: Mapping[Element, float]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "cost", dict(self.cost))
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if not self.budget > 0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe contains duplicate elements")
        for e in self.universe:
            c = self.cost.get(e)
            if c is None:
                raise UnknownElement(f"no cost for element {e!r}")
            if not c > 0:
                raise ValueError(f"cost of {e!r} must be positive, got {c}")

    @property
    def n(self) -> int:
        return len(self.universe)

    def with_universe(self, universe: Iterable[Element]) -> "KnapsackInstance":
        return KnapsackInstance(tuple(universe), self.k, self.cost, self.budget)


def assign(x: KSet, e: Element, i: int) -> KSet:
    return x.assign(e, i)


def join(x: KSet, y: KSet) -> KSet:
    return x.join(y)


def meet(x: KSet, y: KSet) -> KSet:
    return x.meet(y)


def total_cost(x: KSet, inst: KnapsackInstance) -> float:
    """Sum of costs over the support of ``x``; 0 for the empty k-set."""
    members = set(inst.universe)
    total = 0.0
    for e, _ in x.items():
        if e not in members:
            raise UnknownElement(f"element {e!r} not in the instance universe")
        total += inst.cost[e]
    return total


def normalize_instance(inst: KnapsackInstance) -> KnapsackInstance:
    """Drop every element whose cost exceeds the budget.

    Such elements can never appear in a feasible solution.  The order of
    the remaining elements is preserved.  Raises EmptyUniverse when
    nothing survives; callers should then report the empty k-set with
    value 0.
    """
    kept = tuple(e for e in inst.universe if inst.cost[e] <= inst.budget)
    if not kept:
        raise EmptyUniverse(
            f"all {inst.n} elements cost more than the budget {inst.budget}"
        )
    if len(kept) == inst.n:
        return inst
    return inst.with_universe(kept)
