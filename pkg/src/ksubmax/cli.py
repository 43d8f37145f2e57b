"""Thin command-line client for the solver service.

All solving happens behind the HTTP API: by default the CLI mounts the
service in-process (no daemon needed), and ``--server URL`` points it at
a remote instance instead.  The client's own work is limited to reading
local files into requests and writing response payloads back to disk.

Flags default to "unset" so a config file's values win unless a flag is
given explicitly; the service applies the documented defaults to
anything left unset.

Exit codes: 0 success, 2 configuration/validation error, 3 instance too
large for the requested exact mode, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOO_LARGE = 3
EXIT_IO = 4


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    # In-process bridge: a sync httpx client driving the ASGI app directly,
    # so the CLI works without a running daemon.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliFailure(EXIT_IO, f"cannot reach the service: {exc}")
    if resp.status_code == 400:
        detail = resp.json().get("detail", {})
        code = detail.get("code", "validation")
        message = detail.get("message", resp.text)
        raise CliFailure(EXIT_TOO_LARGE if code == "too-large" else EXIT_CONFIG, message)
    if resp.status_code == 422:
        raise CliFailure(EXIT_CONFIG, f"invalid request: {resp.text}")
    if resp.status_code != 200:
        raise CliFailure(EXIT_IO, f"service error {resp.status_code}: {resp.text}")
    return resp.json()


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read {path}: {exc}")


def _write_text(path: Path, content: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {path}: {exc}")


def _put(payload: dict, key: str, value) -> None:
    if value is not None:
        payload[key] = value


def _instance_spec(args) -> dict:
    application = args.application or "synthetic"
    if application == "synthetic":
        if args.instance:
            return {"kind": "bundle", "text": _read_text(args.instance)}
        spec = {"kind": "synthetic"}
        _put(spec, "n", args.n)
        _put(spec, "k", args.k)
        _put(spec, "seed", args.seed)
        return spec
    if not args.instance:
        raise CliFailure(EXIT_CONFIG, f"--instance FILE is required for {application}")
    if application == "kimk":
        spec = {"kind": "kimk", "edges": _read_text(args.instance)}
        _put(spec, "k", args.k)
        _put(spec, "mc_samples", args.mc_samples)
        _put(spec, "seed", args.seed)
        return spec
    return {"kind": "kspk", "readings": _read_text(args.instance)}


def _print_result(res: dict) -> None:
    print(f"algorithm: {res['algorithm']}")
    print(f"value:     {res['value']}")
    print(f"queries:   {res['queries']}")
    print(f"millis:    {res['millis']:.3f}")
    print(f"cost:      {res['cost']}")
    pairs = " ".join(f"{e}->{i}" for e, i in res["solution"]) or "(empty)"
    print(f"solution:  {pairs}")


def cmd_solve(args, client, algorithm=None) -> int:
    payload = {"instance": _instance_spec(args)}
    _put(payload, "algorithm", algorithm or args.algo)
    _put(payload, "epsilon", args.epsilon)
    _put(payload, "shuffle_seed", args.shuffle_seed)
    _put(payload, "max_enum", args.max_enum)
    if args.budget:
        if len(args.budget) != 1:
            raise CliFailure(EXIT_CONFIG, "solve/opt take exactly one --budget")
        payload["budget"] = args.budget[0]
    res = _post(client, "/solve", payload)
    _print_result(res)
    return EXIT_OK


def cmd_opt(args, client) -> int:
    return cmd_solve(args, client, algorithm="brute")


def cmd_check(args, client) -> int:
    payload = {"instance": _instance_spec(args), "mode": args.mode}
    _put(payload, "seed", args.seed)
    _put(payload, "trials", args.trials)
    res = _post(client, "/check", payload)
    print(res["text"])
    if args.out:
        _write_text(Path(args.out) / "ksub_report.kv", res["kv"] + "\n")
    return EXIT_OK


def cmd_gen(args, client) -> int:
    payload = {"application": args.application or "synthetic"}
    _put(payload, "n", args.n)
    _put(payload, "k", args.k)
    _put(payload, "seed", args.seed)
    _put(payload, "sensor_samples", args.sensor_samples)
    res = _post(client, "/gen", payload)
    if args.out:
        target = Path(args.out)
        if target.suffix == "":
            names = {"bundle": "instance.bundle", "edges": "edges.txt", "readings": "readings.txt"}
            target = target / names[res["format"]]
        _write_text(target, res["content"])
        print(f"wrote {res['format']} to {target}")
    else:
        sys.stdout.write(res["content"])
    return EXIT_OK


# (cli flag attribute, config key) pairs merged into the experiment config
_RUN_KEYS = (
    ("application", "application"),
    ("algo", "algo"),
    ("epsilon", "epsilon"),
    ("budget", "budget"),
    ("k", "k"),
    ("n", "n"),
    ("seed", "seed"),
    ("reps", "reps"),
    ("mc_samples", "mc_samples"),
    ("shuffle_seed", "shuffle_seed"),
    ("max_enum", "max_enum"),
    ("instance", "dataset"),
    ("out", "out"),
)


def cmd_run(args, client) -> int:
    config: dict = {}
    if args.config:
        from .bench import parse_config_text

        try:
            config = parse_config_text(_read_text(args.config))
        except CliFailure:
            raise
        except Exception as exc:
            raise CliFailure(EXIT_CONFIG, f"bad config file: {exc}")
    for attr, key in _RUN_KEYS:
        val = getattr(args, attr, None)
        if val is None or (attr == "budget" and not val):
            continue
        config[key] = val

    dataset_text = None
    dataset = config.pop("dataset", None)
    if dataset:
        dataset_text = _read_text(str(dataset))
    out_dir = Path(config.pop("out", "results"))

    res = _post(client, "/experiment", {"config": config, "dataset_text": dataset_text})
    for name, content in res["files"].items():
        _write_text(out_dir / name, content)
    print(f"{len(res['rows'])} runs -> {out_dir}")
    print(res["files"].get("summary.txt", ""), end="")
    return EXIT_OK


def cmd_serve(args, client) -> int:  # pragma: no cover - needs a real socket
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksubmax",
        description="Benchmark harness for k-submodular knapsack solvers",
    )
    parser.add_argument("--server", help="remote service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key-value config file")
        p.add_argument("--application", choices=["synthetic", "kimk", "kspk"])
        p.add_argument("--instance", help="dataset / bundle file")
        p.add_argument("--algo", choices=["laa", "rla", "greedy", "brute"])
        p.add_argument("--epsilon", type=float)
        p.add_argument("--budget", type=float, action="append", default=[])
        p.add_argument("--k", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--reps", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--mc-samples", dest="mc_samples", type=int)
        p.add_argument("--shuffle-seed", dest="shuffle_seed", type=int)
        p.add_argument("--max-enum", dest="max_enum", type=int)

    p_run = sub.add_parser("run", help="run an experiment sweep from a config file")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_solve = sub.add_parser("solve", help="solve one instance with one algorithm")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_opt = sub.add_parser("opt", help="exact optimum by enumeration")
    common(p_opt)
    p_opt.set_defaults(func=cmd_opt)

    p_check = sub.add_parser("check", help="certify k-submodularity of an objective")
    common(p_check)
    p_check.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p_check.add_argument("--trials", type=int)
    p_check.set_defaults(func=cmd_check)

    p_gen = sub.add_parser("gen", help="emit a synthetic instance/dataset")
    common(p_gen)
    p_gen.add_argument("--sensor-samples", dest="sensor_samples", type=int)
    p_gen.set_defaults(func=cmd_gen)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        return args.func(args, None)
    try:
        with make_client(args.server) as client:
            return args.func(args, client)
    except CliFailure as failure:
        print(f"error: {failure.message}", file=sys.stderr)
        return failure.code


if __name__ == "__main__":
    raise SystemExit(main())
