"""Experiment harness: budget sweeps over instances, CSV and plot-data
emission.

A run grid is (budget x algorithm x repetition); every cell gets a fresh
counting oracle on a shared objective, so value and query columns are
deterministic given the seeds while wall time is measured but excluded
from any determinism claim.  Repetitions differ only in stream order
(when a shuffle seed is set); the objective's Monte Carlo samples are
fixed per instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .algorithms import (
    DEFAULT_ENUM_CAP,
    RunResult,
    brute_force_opt,
    greedy_baseline,
    laa,
    rla,
)
from .dataio import (
    InstanceBundle,
    build_influence_bundle,
    build_sensor_bundle,
    gen_random_graph,
    gen_random_instance,
    gen_random_readings,
    load_bundle,
    parse_edge_list,
    parse_sensor_readings,
    shuffle_universe,
)
from .errors import ConfigError, EmptyUniverse, InstanceTooLarge
from .kset import KnapsackInstance, normalize_instance
from .oracle import CountingOracle

KNOWN_ALGORITHMS = ("laa", "rla", "greedy", "brute")
KNOWN_APPLICATIONS = ("synthetic", "kimk", "kspk")


@dataclass
class ExperimentConfig:
    application: str = "synthetic"
    dataset: str | None = None  # file path; generated when omitted
    n: int = 8
    k: int = 3
    seed: int = 0
    budgets: tuple[float, ...] = ()
    algorithms: tuple[str, ...] = ("laa", "rla")
    epsilon: float = 0.1
    reps: int = 5
    mc_samples: int = 100
    shuffle_seed: int | None = None
    max_enum: int = DEFAULT_ENUM_CAP
    out_dir: str | None = None
    cost_lo: float = 1.0
    cost_hi: float = 10.0
    weight_mode: str = "derived"
    sensor_samples: int = 200

    def validate(self) -> None:
        if self.application not in KNOWN_APPLICATIONS:
            raise ConfigError(f"unknown application {self.application!r}")
        for a in self.algorithms:
            if a not in KNOWN_ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}")
        if not self.algorithms:
            raise ConfigError("no algorithms selected")
        if not self.budgets:
            raise ConfigError("budget list must be nonempty")
        if any(b <= 0 for b in self.budgets):
            raise ConfigError("budgets must be positive")
        if list(self.budgets) != sorted(self.budgets):
            raise ConfigError("budget list must be ascending")
        if self.reps < 1:
            raise ConfigError("repetitions must be >= 1")
        if "rla" in self.algorithms and not 0.0 < self.epsilon < 0.2:
            raise ConfigError(f"epsilon must lie in (0, 1/5), got {self.epsilon}")
        if self.k < 2:
            raise ConfigError("k must be >= 2")


_INT_KEYS = {"n", "k", "seed", "reps", "mc_samples", "shuffle_seed", "max_enum", "sensor_samples"}
_FLOAT_KEYS = {"epsilon", "cost_lo", "cost_hi"}
_LIST_KEYS = {"budget", "algo"}


def parse_config_text(text: str) -> dict:
    """Flat "key value" lines with # comments; lists are space-separated."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ").split()
        key, vals = parts[0], parts[1:]
        if not vals:
            raise ConfigError(f"config line {lineno}: key {key!r} has no value")
        out[key] = vals if key in _LIST_KEYS else vals[0]
    return out


def config_from_mapping(raw: dict) -> ExperimentConfig:
    """Build a config from CLI/file key-value pairs, coercing types."""
    kwargs: dict = {}
    for key, val in raw.items():
        if val is None:
            continue
        if key == "budget":
            vals = val if isinstance(val, (list, tuple)) else [val]
            kwargs["budgets"] = tuple(float(v) for v in vals)
        elif key == "algo":
            vals = val if isinstance(val, (list, tuple)) else [val]
            flat: list[str] = []
            for v in vals:
                flat.extend(str(v).split(","))
            kwargs["algorithms"] = tuple(flat)
        elif key == "out":
            kwargs["out_dir"] = str(val)
        elif key in _INT_KEYS:
            kwargs[key] = int(val)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(val)
        elif key in ("application", "dataset", "weight_mode"):
            kwargs[key] = str(val)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def build_bundle(cfg: ExperimentConfig, dataset_text: str | None = None) -> InstanceBundle:
    """Materialize the instance + objective described by a config.

    The bundle's budget is a placeholder; each grid cell installs its own
    budget before solving.  ``dataset_text`` supplies the dataset inline
    (remote clients ship file contents instead of paths); otherwise
    ``cfg.dataset`` is read from disk, and when both are absent a seeded
    synthetic dataset is generated.
    """

    def dataset(generate):
        if dataset_text is not None:
            return dataset_text, "inline"
        if cfg.dataset:
            return Path(cfg.dataset).read_text(encoding="utf-8"), cfg.dataset
        return generate()

    first_budget = cfg.budgets[0] if cfg.budgets else 1.0
    if cfg.application == "synthetic":
        if dataset_text is not None or cfg.dataset:
            text, _ = dataset(None)
            return load_bundle(text)
        return gen_random_instance(
            cfg.n, cfg.k, cfg.seed, cost_range=(cfg.cost_lo, cfg.cost_hi)
        )
    if cfg.application == "kimk":
        text, provenance = dataset(
            lambda: (gen_random_graph(cfg.n, cfg.seed), f"gen_random_graph(n={cfg.n}, seed={cfg.seed})")
        )
        graph = parse_edge_list(text, cfg.k, weight_mode=cfg.weight_mode, seed=cfg.seed)
        return build_influence_bundle(
            graph,
            first_budget,
            mc_samples=cfg.mc_samples,
            seed=cfg.seed,
            cost_range=(cfg.cost_lo, cfg.cost_hi),
            provenance=provenance,
        )
    # kspk
    text, provenance = dataset(
        lambda: (
            gen_random_readings(cfg.n, cfg.k, cfg.sensor_samples, cfg.seed),
            f"gen_random_readings(n={cfg.n}, seed={cfg.seed})",
        )
    )
    table = parse_sensor_readings(text)
    return build_sensor_bundle(
        table, first_budget, cost_range=(cfg.cost_lo, cfg.cost_hi), provenance=provenance
    )


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    budget: float
    rep: int
    value: float
    queries: int
    millis: float
    seed: int

    @property
    def failed(self) -> bool:
        return math.isnan(self.value)


def _solve_cell(
    algorithm: str,
    inst: KnapsackInstance,
    bundle: InstanceBundle,
    cfg: ExperimentConfig,
) -> RunResult:
    oracle = CountingOracle(bundle.objective)
    if algorithm == "laa":
        return laa(inst, oracle).result
    if algorithm == "rla":
        return rla(inst, oracle, cfg.epsilon).result
    if algorithm == "greedy":
        return greedy_baseline(inst, oracle)
    return brute_force_opt(inst, bundle.objective, max_enum=cfg.max_enum)


def run_experiment(cfg: ExperimentConfig, bundle: InstanceBundle | None = None) -> list[ResultRow]:
    """Run the full (budget x algorithm x repetition) grid.

    Load and validation problems propagate; a failure inside a single
    cell is recorded as a row with value NaN so partial sweeps still
    flush.  A budget that discards the whole universe yields the empty
    solution with value 0.
    """
    cfg.validate()
    if bundle is None:
        bundle = build_bundle(cfg)

    rows: list[ResultRow] = []
    base = bundle.instance
    for budget in cfg.budgets:
        inst_b = KnapsackInstance(base.universe, base.k, base.cost, budget)
        for algorithm in cfg.algorithms:
            for rep in range(cfg.reps):
                if cfg.shuffle_seed is not None:
                    run_seed = cfg.shuffle_seed + rep
                    inst_r = shuffle_universe(inst_b, run_seed)
                else:
                    run_seed = cfg.seed
                    inst_r = inst_b
                try:
                    inst_n = normalize_instance(inst_r)
                except EmptyUniverse:
                    rows.append(ResultRow(algorithm, budget, rep, 0.0, 0, 0.0, run_seed))
                    continue
                try:
                    result = _solve_cell(algorithm, inst_n, bundle, cfg)
                except InstanceTooLarge:
                    raise  # deterministic config problem, not a per-run failure
                except Exception:
                    rows.append(
                        ResultRow(algorithm, budget, rep, float("nan"), 0, 0.0, run_seed)
                    )
                    continue
                rows.append(
                    ResultRow(
                        algorithm,
                        budget,
                        rep,
                        result.value,
                        result.queries,
                        result.millis,
                        run_seed,
                    )
                )
    return rows


CSV_HEADER = "algorithm,B,rep,value,queries,millis,seed"


def render_outputs(rows: list[ResultRow]) -> dict[str, str]:
    """Render the result table into its output files (names -> contents).

    Pure function of the table, so identical tables give identical bytes.
    Floats are written with repr and round-trip exactly.
    """
    if not rows:
        raise ConfigError("cannot render an empty result table")
    csv_lines = [CSV_HEADER]
    for r in rows:
        csv_lines.append(
            f"{r.algorithm},{r.budget!r},{r.rep},{r.value!r},{r.queries},{r.millis!r},{r.seed}"
        )
    files = {"results.csv": "\n".join(csv_lines) + "\n"}

    budgets = sorted({r.budget for r in rows})
    algorithms = list(dict.fromkeys(r.algorithm for r in rows))

    def mean(metric, algorithm, budget):
        vals = [
            getattr(r, metric)
            for r in rows
            if r.algorithm == algorithm and r.budget == budget and not r.failed
        ]
        return sum(vals) / len(vals) if vals else float("nan")

    for metric in ("value", "queries", "millis"):
        lines = ["# B " + " ".join(algorithms)]
        for b in budgets:
            cells = " ".join(f"{mean(metric, a, b):.6g}" for a in algorithms)
            lines.append(f"{b:g} {cells}")
        files[f"plot_{metric}.dat"] = "\n".join(lines) + "\n"

    failed = sum(1 for r in rows if r.failed)
    summary = [
        f"rows: {len(rows)} ({failed} failed)",
        f"algorithms: {', '.join(algorithms)}",
        f"budgets: {', '.join(f'{b:g}' for b in budgets)}",
        "",
        "algorithm  B          mean value    mean queries   mean millis",
    ]
    for a in algorithms:
        for b in budgets:
            summary.append(
                f"{a:<10} {b:<10g} {mean('value', a, b):<13.6g} "
                f"{mean('queries', a, b):<14.6g} {mean('millis', a, b):.6g}"
            )
    files["summary.txt"] = "\n".join(summary) + "\n"
    return files


def emit_outputs(rows: list[ResultRow], out_dir) -> dict[str, Path]:
    """Write results.csv, plot data, and the summary into a directory."""
    files = render_outputs(rows)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, content in files.items():
        path = out / name
        path.write_text(content, encoding="utf-8")
        written[name] = path
    return written


def load_results_csv(source) -> list[ResultRow]:
    """Parse results.csv back into rows (the round-trip contract)."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".csv")):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError("results.csv header mismatch")
    rows = []
    for ln in lines[1:]:
        alg, b, rep, value, queries, millis, seed = ln.split(",")
        rows.append(
            ResultRow(alg, float(b), int(rep), float(value), int(queries), float(millis), int(seed))
        )
    return rows
