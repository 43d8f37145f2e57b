"""FastAPI service wrapping the solver library.

All solver state lives per-request; instances arrive inline in the
request body, so any number of clients can share one server.  Domain
errors map to 400 with a machine-readable code: "validation" for bad
inputs and configs, "too-large" when an exact computation exceeds its
enumeration cap.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import bench
from ..algorithms import brute_force_opt, greedy_baseline, laa, rla
from ..dataio import (
    InstanceBundle,
    build_influence_bundle,
    build_sensor_bundle,
    gen_random_graph,
    gen_random_instance,
    gen_random_readings,
    load_bundle,
    parse_edge_list,
    parse_sensor_readings,
    save_bundle,
    shuffle_universe,
)
from ..errors import EmptyUniverse, InstanceTooLarge, KsubmaxError
from ..kset import KnapsackInstance, normalize_instance
from ..oracle import CountingOracle
from ..verify import check_ksubmodularity
from .models import (
    CheckRequest,
    CheckResponse,
    ExperimentRequest,
    ExperimentResponse,
    GenRequest,
    GenResponse,
    RowModel,
    RunResultModel,
    SolveRequest,
)

app = FastAPI(title="ksubmax", description="k-submodular knapsack solver service")


def _bad_request(code: str, message: str) -> HTTPException:
    return HTTPException(status_code=400, detail={"code": code, "message": message})


def _materialize(spec) -> InstanceBundle:
    if spec.kind == "synthetic":
        return gen_random_instance(
            spec.n, spec.k, spec.seed, cost_range=(spec.cost_lo, spec.cost_hi)
        )
    if spec.kind == "bundle":
        return load_bundle(spec.text)
    if spec.kind == "kimk":
        graph = parse_edge_list(spec.edges, spec.k, weight_mode=spec.weight_mode, seed=spec.seed)
        return build_influence_bundle(
            graph, 1.0, mc_samples=spec.mc_samples, seed=spec.seed,
            cost_range=(spec.cost_lo, spec.cost_hi), provenance="inline",
        )
    table = parse_sensor_readings(spec.readings)
    return build_sensor_bundle(
        table, 1.0, cost_range=(spec.cost_lo, spec.cost_hi), provenance="inline"
    )


def _result_model(result) -> RunResultModel:
    params = {
        key: val for key, val in result.params.items() if key != "solution_cost"
    }
    return RunResultModel(
        algorithm=result.algorithm,
        value=result.value,
        queries=result.queries,
        millis=result.millis,
        cost=result.params.get("solution_cost", 0.0),
        solution=sorted(result.solution.items(), key=lambda ei: repr(ei[0])),
        params=params,
    )


def _empty_result(algorithm: str, budget: float, k: int) -> RunResultModel:
    return RunResultModel(
        algorithm=algorithm, value=0.0, queries=0, millis=0.0, cost=0.0,
        solution=[], params={"B": budget, "k": k, "note": "vacuous instance"},
    )


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/solve", response_model=RunResultModel)
def solve(req: SolveRequest):
    try:
        bundle = _materialize(req.instance)
        budget = req.budget if req.budget is not None else bundle.instance.budget
        if req.instance.kind in ("kimk", "kspk") and req.budget is None:
            raise _bad_request("validation", "a budget is required for dataset instances")
        inst = KnapsackInstance(
            bundle.instance.universe, bundle.instance.k, bundle.instance.cost, budget
        )
        if req.shuffle_seed is not None:
            inst = shuffle_universe(inst, req.shuffle_seed)
        try:
            inst = normalize_instance(inst)
        except EmptyUniverse:
            return _empty_result(req.algorithm, budget, inst.k)
        oracle = CountingOracle(bundle.objective)
        if req.algorithm == "laa":
            result = laa(inst, oracle).result
        elif req.algorithm == "rla":
            result = rla(inst, oracle, req.epsilon).result
        elif req.algorithm == "greedy":
            result = greedy_baseline(inst, oracle)
        else:
            result = brute_force_opt(inst, bundle.objective, max_enum=req.max_enum)
        return _result_model(result)
    except HTTPException:
        raise
    except InstanceTooLarge as exc:
        raise _bad_request("too-large", str(exc))
    except (KsubmaxError, ValueError) as exc:
        raise _bad_request("validation", str(exc))


@app.post("/opt", response_model=RunResultModel)
def opt(req: SolveRequest):
    req = req.model_copy(update={"algorithm": "brute"})
    return solve(req)


@app.post("/check", response_model=CheckResponse)
def check(req: CheckRequest):
    try:
        bundle = _materialize(req.instance)
        report = check_ksubmodularity(
            bundle.objective,
            mode=req.mode,
            state_cap=req.state_cap,
            seed=req.seed,
            trials=req.trials,
        )
        return CheckResponse(
            mode=report.mode,
            orthant_ok=report.orthant_ok,
            pairwise_ok=report.pairwise_ok,
            definition_ok=report.definition_ok,
            definition_mode=report.definition_mode,
            all_ok=report.all_ok,
            nonmonotone_witness=report.nonmonotone_witness is not None,
            orthant_predicates=report.orthant_predicates,
            pairwise_predicates=report.pairwise_predicates,
            definition_pairs=report.definition_pairs,
            text=report.to_text(),
            kv=report.to_kv(),
        )
    except InstanceTooLarge as exc:
        raise _bad_request("too-large", str(exc))
    except (KsubmaxError, ValueError) as exc:
        raise _bad_request("validation", str(exc))


@app.post("/gen", response_model=GenResponse)
def gen(req: GenRequest):
    try:
        if req.application == "synthetic":
            bundle = gen_random_instance(req.n, req.k, req.seed)
            return GenResponse(format="bundle", content=save_bundle(bundle, None))
        if req.application == "kimk":
            return GenResponse(
                format="edges",
                content=gen_random_graph(req.n, req.seed, avg_out_degree=req.avg_out_degree),
            )
        return GenResponse(
            format="readings",
            content=gen_random_readings(req.n, req.k, req.sensor_samples, req.seed),
        )
    except (KsubmaxError, ValueError) as exc:
        raise _bad_request("validation", str(exc))


@app.post("/experiment", response_model=ExperimentResponse)
def experiment(req: ExperimentRequest):
    try:
        cfg = bench.config_from_mapping(req.config)
        cfg.validate()
        bundle = bench.build_bundle(cfg, dataset_text=req.dataset_text)
        rows = bench.run_experiment(cfg, bundle)
        files = bench.render_outputs(rows)
        return ExperimentResponse(
            rows=[
                RowModel(
                    algorithm=r.algorithm, budget=r.budget, rep=r.rep,
                    value=r.value if not math.isnan(r.value) else float("nan"),
                    queries=r.queries, millis=r.millis, seed=r.seed,
                )
                for r in rows
            ],
            files=files,
        )
    except InstanceTooLarge as exc:
        raise _bad_request("too-large", str(exc))
    except (KsubmaxError, ValueError) as exc:
        raise _bad_request("validation", str(exc))
