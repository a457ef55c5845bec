"""Batch front end: a thin client of the experiment service.

Every subcommand builds a request, sends it to the service (in-process by
default, or a remote instance via --server) and persists the returned
artifacts. Each run gets its own timestamped subdirectory so reruns never
overwrite earlier results; the run manifest is written last, atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import httpx

from .config import ConfigError, SystemConfig, apply_overrides, load_config
from .experiments import CURVE_KINDS

_USAGE_ERROR = 2


def _request(server: str | None, path: str, payload: dict) -> tuple[int, object]:
    """POST one request, against a remote server or the in-process app."""
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            response = client.post(path, json=payload)
            return response.status_code, _body(response)

    from .service.app import app  # deferred so library users never import fastapi

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://jrcsim",
                                     timeout=None) as client:
            response = await client.post(path, json=payload)
            return response.status_code, _body(response)

    import asyncio

    return asyncio.run(go())


def _body(response: httpx.Response) -> object:
    try:
        return response.json()
    except ValueError:
        return response.text


def _load_base_config(args: argparse.Namespace) -> SystemConfig:
    config = load_config(args.config) if args.config else SystemConfig()
    if args.set:
        config = apply_overrides(config, args.set)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    return config.validate()


def _run_dir(out_dir: Path, kind: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = out_dir / f"{kind}-{stamp}"
    path = base
    counter = 1
    while path.exists():
        path = Path(f"{base}-{counter}")
        counter += 1
    path.mkdir(parents=True)
    return path


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _finish(run_dir: Path, manifest: dict, failures: int, allow_failures: bool) -> int:
    manifest = dict(manifest)
    manifest["outputs"] = sorted(p.name for p in run_dir.iterdir())
    manifest["completed_utc"] = datetime.now(timezone.utc).isoformat()
    _write_atomic(run_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {run_dir}")
    if failures and not allow_failures:
        print(f"{failures} trial(s) failed (rerun with --allow-failures to accept)",
              file=sys.stderr)
        return 1
    return 0


def _post(server: str | None, path: str, payload: dict) -> dict:
    status, body = _request(server, path, payload)
    if status != 200:
        detail = body.get("detail", body) if isinstance(body, dict) else body
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(_USAGE_ERROR)
    return body


def _cmd_curve(args: argparse.Namespace) -> int:
    config = _load_base_config(args)
    payload = {
        "kind": args.kind,
        "config": config.as_dict(),
        "sweep": args.sweep,
        "grid": [float(x) for x in args.grid.split(",")] if args.grid else None,
        "trials": args.trials,
        "seed": config.seed,
        "threads": args.threads,
    }
    started = time.time()
    body = _post(args.server, "/curves", payload)
    run_dir = _run_dir(Path(args.out), args.kind)
    _write_atomic(run_dir / "curve.csv", body["csv"])
    manifest = body["manifest"]
    manifest["client_wall_time_s"] = round(time.time() - started, 3)
    return _finish(run_dir, manifest, body["failures"], args.allow_failures)


def _cmd_rate_region(args: argparse.Namespace) -> int:
    config = _load_base_config(args)
    payload = {
        "config": config.as_dict(),
        "mode": args.mode,
        "radar_grid": [float(x) for x in args.radar_grid.split(",")] if args.radar_grid else None,
        "comm_grid": [float(x) for x in args.comm_grid.split(",")] if args.comm_grid else None,
        "trials": args.trials,
        "seed": config.seed,
        "threads": args.threads,
        "mc_check_trials": args.mc_check_trials,
    }
    body = _post(args.server, "/rate-region", payload)
    run_dir = _run_dir(Path(args.out), "rate-region")
    _write_atomic(run_dir / "region.csv", body["csv"])
    _write_atomic(run_dir / "frontier.json",
                  json.dumps({"frontier": body["frontier"], "chord": body["chord"]},
                             indent=2) + "\n")
    return _finish(run_dir, body["manifest"], body["failures"], args.allow_failures)


def _cmd_validate_de(args: argparse.Namespace) -> int:
    config = _load_base_config(args)
    payload = {
        "config": config.as_dict(),
        "trials": args.trials,
        "seed": config.seed,
        "threads": args.threads,
    }
    body = _post(args.server, "/validate-de", payload)
    run_dir = _run_dir(Path(args.out), "validate-de")
    _write_atomic(run_dir / "report.json", json.dumps(body["report"], indent=2) + "\n")
    status = 0 if body["passed"] else 1
    print("validate-de:", "PASS" if body["passed"] else f"FLAGS {body['flags']}")
    manifest = {"kind": "validate-de", "config": config.as_dict(),
                "seed": config.seed, "flags": body["flags"],
                "failures": body["failures"]}
    rc = _finish(run_dir, manifest, body["failures"], args.allow_failures)
    return status or rc


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="flat TOML configuration file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                        help="override one configuration key (repeatable)")
    parser.add_argument("--seed", type=int, help="override the RNG seed")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads for trials (default: hardware)")
    parser.add_argument("--out", metavar="DIR", default="results",
                        help="results directory (default: ./results)")
    parser.add_argument("--allow-failures", action="store_true",
                        help="exit 0 even if some trials failed to solve")
    parser.add_argument("--server", metavar="URL",
                        help="remote service URL (default: run in-process)")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jrcsim",
        description="Radar / massive MIMO coexistence experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in CURVE_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} curve")
        _add_common(p)
        p.add_argument("--sweep", help="sweep variable (default per kind)")
        p.add_argument("--grid", help="comma-separated sweep grid")
        p.set_defaults(func=_cmd_curve, kind=kind)

    p = sub.add_parser("rate-region", help="achievable-rate region over power knobs")
    _add_common(p)
    p.add_argument("--mode", choices=("uplink", "downlink"), default="uplink")
    p.add_argument("--radar-grid", help="comma-separated radar power multipliers")
    p.add_argument("--comm-grid", help="comma-separated comm power multipliers")
    p.add_argument("--mc-check-trials", type=int,
                   help="Monte Carlo trials for the vertex spot-checks")
    p.set_defaults(func=_cmd_rate_region)

    p = sub.add_parser("validate-de", help="deterministic-equivalent vs Monte Carlo report")
    _add_common(p)
    p.set_defaults(func=_cmd_validate_de)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
