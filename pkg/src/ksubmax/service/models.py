"""Request/response schemas for the solver service.

Instance specs carry dataset content inline (edge lists, sensor logs,
bundle files as text) so the service never touches the caller's
filesystem; the CLI reads local files and ships their contents.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field


class SyntheticSpec(BaseModel):
    kind: Literal["synthetic"] = "synthetic"
    n: int = 8
    k: int = 3
    seed: int = 0
    cost_lo: float = 1.0
    cost_hi: float = 10.0


class BundleSpec(BaseModel):
    """A saved coverage-bonus bundle, passed through as text."""

    kind: Literal["bundle"] = "bundle"
    text: str


class InfluenceSpec(BaseModel):
    kind: Literal["kimk"] = "kimk"
    edges: str
    k: int = 3
    mc_samples: int = 100
    seed: int = 0
    weight_mode: Literal["derived", "explicit"] = "derived"
    cost_lo: float = 1.0
    cost_hi: float = 10.0


class SensorSpec(BaseModel):
    kind: Literal["kspk"] = "kspk"
    readings: str
    cost_lo: float = 1.0
    cost_hi: float = 10.0


InstanceSpec = Annotated[
    Union[SyntheticSpec, BundleSpec, InfluenceSpec, SensorSpec],
    Field(discriminator="kind"),
]


class SolveRequest(BaseModel):
    instance: InstanceSpec
    algorithm: Literal["laa", "rla", "greedy", "brute"] = "laa"
    budget: float | None = None  # overrides a bundle's stored budget
    epsilon: float = 0.1
    shuffle_seed: int | None = None
    max_enum: int = 5_000_000


class RunResultModel(BaseModel):
    algorithm: str
    value: float
    queries: int
    millis: float
    cost: float
    solution: list[tuple[Union[int, str], int]]
    params: dict


class CheckRequest(BaseModel):
    instance: InstanceSpec
    mode: Literal["exhaustive", "sampled"] = "exhaustive"
    state_cap: int = 200_000
    seed: int = 0
    trials: int = 2000


class CheckResponse(BaseModel):
    mode: str
    orthant_ok: bool
    pairwise_ok: bool
    definition_ok: bool
    definition_mode: str
    all_ok: bool
    nonmonotone_witness: bool
    orthant_predicates: int
    pairwise_predicates: int
    definition_pairs: int
    text: str
    kv: str


class GenRequest(BaseModel):
    application: Literal["synthetic", "kimk", "kspk"] = "synthetic"
    n: int = 8
    k: int = 3
    seed: int = 0
    sensor_samples: int = 200
    avg_out_degree: float = 4.0


class GenResponse(BaseModel):
    format: Literal["bundle", "edges", "readings"]
    content: str


class RowModel(BaseModel):
    algorithm: str
    budget: float
    rep: int
    value: float
    queries: int
    millis: float
    seed: int


class ExperimentRequest(BaseModel):
    """Flat config mapping (same keys as the CLI/config file) plus optional
    inline dataset content."""

    config: dict
    dataset_text: str | None = None


class ExperimentResponse(BaseModel):
    rows: list[RowModel]
    files: dict[str, str]
