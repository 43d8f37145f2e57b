"""Linear-query solvers for non-monotone k-submodular maximization under
a knapsack constraint, with verification tooling, two benchmark
applications, and an HTTP/CLI harness."""

from .algorithms import (
    RunResult,
    TraceEvent,
    brute_force_opt,
    greedy_baseline,
    laa,
    rla,
    suffix_pack,
)
from .kset import KnapsackInstance, KSet, normalize_instance, total_cost
from .oracle import (
    CountingOracle,
    CoverageBonusObjective,
    Objective,
    make_coverage_bonus,
    marginal_gain,
)
from .verify import KSubReport, audit_laa_trace, audit_rla, check_ksubmodularity

__version__ = "0.1.0"

__all__ = [
    "KSet",
    "KnapsackInstance",
    "normalize_instance",
    "total_cost",
    "Objective",
    "CountingOracle",
    "CoverageBonusObjective",
    "make_coverage_bonus",
    "marginal_gain",
    "RunResult",
    "TraceEvent",
    "laa",
    "rla",
    "suffix_pack",
    "brute_force_opt",
    "greedy_baseline",
    "KSubReport",
    "check_ksubmodularity",
    "audit_laa_trace",
    "audit_rla",
    "__version__",
]
