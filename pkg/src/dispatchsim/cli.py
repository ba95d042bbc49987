"""Command-line client for the dispatch simulation service.

Commands build HTTP requests against a running server (``--server URL``) or,
by default, against an in-process instance of the same FastAPI app, then
render the responses to console output and CSV/JSON artifacts.  The base
seed (flag or DISPATCHSIM_SEED) fully determines every artifact byte.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

import click
import httpx

_CONFIG_KEYS = ("retailers", "costs", "transport", "window", "horizon_days", "bounds")


def _load_document(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise click.ClickException(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise click.ClickException(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
        )
    if not isinstance(data, dict):
        raise click.ClickException(f"{path}: top level must be an object")
    return data


def _config_payload(document: dict, horizon: float | None) -> dict:
    payload = {k: document[k] for k in _CONFIG_KEYS if k in document}
    if horizon is not None:
        payload["horizon_days"] = horizon
    return payload


def _scenario_id(document: dict, flag: int | None) -> int:
    if flag is not None:
        return flag
    raw = document.get("scenario")
    if isinstance(raw, dict) and "id" in raw:
        return int(raw["id"])
    if isinstance(raw, int):
        return raw
    raise click.ClickException("no scenario given; use --scenario or a scenario block in the config")


def _ga_payload(document: dict, generations: int | None, population: int | None) -> dict:
    payload = dict(document.get("ga") or {})
    if generations is not None:
        payload["generations"] = generations
    if population is not None:
        payload["population_size"] = population
    return payload


def _stats_payload(document: dict, delta: float | None) -> dict:
    payload = dict(document.get("stats") or {})
    if delta is not None:
        payload["delta"] = delta
    return payload


def _asgi_request(method: str, path: str, payload: dict | None) -> httpx.Response:
    from .service.app import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, timeout=None,
                                     base_url="http://dispatchsim.internal") as client:
            return await client.request(method, path, json=payload)

    return asyncio.run(go())


def _format_error(response: httpx.Response) -> str:
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = response.text
    if isinstance(detail, dict) and "violations" in detail:
        return "invalid configuration:\n  " + "\n  ".join(detail["violations"])
    return f"service error ({response.status_code}): {detail}"


def _request(server: str | None, method: str, path: str, payload: dict | None = None) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            response = client.request(method, path, json=payload)
    else:
        response = _asgi_request(method, path, payload)
    if response.status_code >= 400:
        raise click.ClickException(_format_error(response))
    return response.json()


def _write_rows(path: Path, header: list[str], rows) -> None:
    import csv

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


server_option = click.option("--server", default=None, metavar="URL",
                             help="Base URL of a running service; in-process by default.")
config_option = click.option("--config", "config_path", default=None, metavar="PATH",
                             type=click.Path(), help="JSON configuration file.")
seed_option = click.option("--seed", type=int, default=0, show_default=True,
                           envvar="DISPATCHSIM_SEED",
                           help="Base seed (env DISPATCHSIM_SEED).")
out_option = click.option("--out", "out_dir", default="out", show_default=True,
                          metavar="DIR", help="Directory for artifacts.")


@click.group()
@click.version_option(package_name="dispatchsim")
def main():
    """Simulate and optimize warehouse order dispatch policies."""


@main.command()
@config_option
@server_option
def validate(config_path, server):
    """Check a configuration file against the instance invariants."""
    document = _load_document(config_path)
    result = _request(server, "POST", "/validate",
                      {"config": _config_payload(document, None)})
    if result["valid"]:
        click.echo("configuration is valid")
    else:
        click.echo("configuration is invalid:")
        for violation in result["violations"]:
            click.echo(f"  - {violation}")
        raise SystemExit(1)


@main.command()
@server_option
def scenarios(server):
    """List the six dispatch-process scenarios."""
    for entry in _request(server, "GET", "/scenarios"):
        click.echo(f"{entry['id']}: {entry['description']} "
                   f"(variables: {', '.join(entry['variables'])})")


@main.command()
@config_option
@click.option("--scenario", type=int, default=None, help="Scenario id (1..6).")
@click.option("--r", "reorder_point", type=int, required=True, help="Reorder point r.")
@click.option("--Q", "order_quantity", type=int, required=True, help="Reorder quantity Q.")
@click.option("--M", "thresholds", type=int, multiple=True,
              help="Dispatch threshold(s); repeat for multi-queue scenarios.")
@click.option("--S", "intervals", type=int, multiple=True,
              help="Dispatch interval(s) in days; repeat for multi-queue scenarios.")
@seed_option
@click.option("--horizon", type=float, default=None, help="Run length in days.")
@out_option
@click.option("--trace/--no-trace", default=True, show_default=True,
              help="Record and write the inventory trace.")
@server_option
def simulate(config_path, scenario, reorder_point, order_quantity, thresholds,
             intervals, seed, horizon, out_dir, trace, server):
    """Run one seeded replication with an explicit policy."""
    document = _load_document(config_path)
    payload = {
        "scenario": _scenario_id(document, scenario),
        "policy": {
            "r": reorder_point,
            "Q": order_quantity,
            "M": list(thresholds) or None,
            "S": list(intervals) or None,
        },
        "config": _config_payload(document, None),
        "seed": seed,
        "horizon": horizon,
        "include_trace": trace,
    }
    result = _request(server, "POST", "/simulate", payload)

    out = Path(out_dir)
    breakdown = result["breakdown"]
    _write_rows(out / "ledger.csv", ["component", "amount"],
                [[name, breakdown[name]] for name in ("holding", "ordering", "delivery", "penalty")])
    written = [out / "ledger.csv"]
    if trace and result.get("trace") is not None:
        _write_rows(out / "trace.csv", ["time", "on_hand", "inventory_position"],
                    result["trace"])
        written.append(out / "trace.csv")

    for name in ("holding", "ordering", "delivery", "penalty"):
        click.echo(f"{name:>10}: {breakdown[name]:,.2f}")
    click.echo(f"{'total':>10}: {result['total_cost']:,.2f}")
    click.echo(f"{'fill rate':>10}: {result['fill_rate']:.4f} "
               f"({breakdown['orders_filled_immediately']}/{breakdown['orders_received']} orders)")
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@config_option
@click.option("--scenario", type=int, default=None, help="Scenario id (1..6).")
@seed_option
@out_option
@click.option("--generations", type=int, default=None, help="Override generation count.")
@click.option("--population", type=int, default=None, help="Override population size.")
@click.option("--delta", type=float, default=None, help="Precision target for replicates.")
@click.option("--horizon", type=float, default=None, help="Run length in days.")
@click.option("--fast", is_flag=True, help="Small smoke-test profile (not study quality).")
@server_option
def optimize(config_path, scenario, seed, out_dir, generations, population, delta,
             horizon, fast, server):
    """Run one optimizer replicate for a scenario."""
    document = _load_document(config_path)
    payload = {
        "scenario": _scenario_id(document, scenario),
        "config": _config_payload(document, horizon),
        "seed": seed,
        "ga": _ga_payload(document, generations, population),
        "stats": _stats_payload(document, delta),
        "fast": fast,
    }
    result = _request(server, "POST", "/optimize", payload)

    out = Path(out_dir)
    _write_rows(out / "convergence.csv", ["generation", "best_F", "worst_F", "spread"],
                result["convergence"])
    (out / "best_solution.json").write_text(
        json.dumps(result["best"], indent=2, sort_keys=True) + "\n", encoding="utf-8")

    best = result["best"]
    click.echo(f"scenario {result['scenario']} best solution "
               f"(seed {result['seed']}, {result['evaluations']} evaluations):")
    click.echo(f"  r={best['r']} Q={best['Q']} {best['dispatch_params']}")
    click.echo(f"  total cost {best['total_cost']:,.1f}  fill rate {best['fill_rate']:.4f}  "
               f"fitness {best['fitness']:,.1f}")
    click.echo(f"wrote {out / 'convergence.csv'}")
    click.echo(f"wrote {out / 'best_solution.json'}")


@main.command()
@config_option
@click.option("--scenario", "scenario_ids", type=int, multiple=True,
              help="Limit to specific scenario ids; repeatable. Default: all six.")
@seed_option
@out_option
@click.option("--generations", type=int, default=None, help="Override generation count.")
@click.option("--population", type=int, default=None, help="Override population size.")
@click.option("--delta", type=float, default=None, help="Precision target for replicates.")
@click.option("--horizon", type=float, default=None, help="Run length in days.")
@click.option("--fast", is_flag=True, help="Small smoke-test profile (not study quality).")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Parallel scenario processes; >1 batches all scenarios into one request.")
@server_option
def study(config_path, scenario_ids, seed, out_dir, generations, population, delta,
          horizon, fast, workers, server):
    """Optimize each scenario with replication control and emit the report set.

    By default scenarios run one request at a time and artifacts are rewritten
    after each one, so an interrupted study keeps its completed scenarios on
    disk.  With --workers > 1 the whole study goes out as a single request and
    the server runs scenarios in parallel.
    """
    from .runner import write_study_artifacts

    document = _load_document(config_path)
    ids = list(scenario_ids) or [1, 2, 3, 4, 5, 6]
    base = {
        "config": _config_payload(document, horizon),
        "seed": seed,
        "ga": _ga_payload(document, generations, population),
        "stats": _stats_payload(document, delta),
        "fast": fast,
        "workers": workers,
    }
    collected = {"base_seed": seed, "scenarios": []}

    def report(entry):
        metrics = entry["metrics"]
        click.echo(
            f"scenario {entry['scenario']}: "
            f"TC {metrics['total_cost']['mean']:,.1f} "
            f"± {metrics['total_cost']['ci_halfwidth']:,.1f}, "
            f"FR {metrics['fill_rate']['mean']:.4f}, "
            f"best {entry['best']['dispatch_params']} "
            f"(r={entry['best']['r']}, Q={entry['best']['Q']}), "
            f"{entry['n_runs']} runs"
        )

    if workers > 1:
        result = _request(server, "POST", "/study", {**base, "scenarios": ids})
        collected["scenarios"] = result["scenarios"]
        write_study_artifacts(collected, out_dir)
        for entry in result["scenarios"]:
            report(entry)
    else:
        for scenario_id in ids:
            result = _request(server, "POST", "/study", {**base, "scenarios": [scenario_id]})
            entry = result["scenarios"][0]
            collected["scenarios"].append(entry)
            write_study_artifacts(collected, out_dir)
            report(entry)
    click.echo(f"wrote study artifacts to {Path(out_dir).resolve()}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("dispatchsim.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
