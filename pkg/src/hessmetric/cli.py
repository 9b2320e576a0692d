"""Command-line client for the scenario service.

By default the CLI talks to an in-process instance of the HTTP service; pass
``--url`` to target a remote one instead.  Every subcommand prints one line
per check row and exits 0 exactly when all rows pass.
"""

from __future__ import annotations

import json
import os
import sys

import click
import httpx

from . import __version__
from .scenarios import ReportRow, rows_to_csv, rows_to_json, write_report


def _client(url: str | None) -> httpx.Client:
    if url:
        return httpx.Client(base_url=url, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app(), base_url="http://service")


def _load_scenario(path: str | None, ctx_params: dict) -> dict:
    if path is None:
        from .scenarios import default_scenario
        from .profiles import profile_to_dict

        scn = default_scenario()
        data = {
            "params": {"n": scn.params.n, "m": scn.params.m},
            "profiles": {k: profile_to_dict(v) for k, v in scn.profiles.items()},
            "weight": None,
            "options": {},
        }
    else:
        try:
            with open(path) as handle:
                data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise click.ClickException(
                f"{path}: malformed scenario JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            )
        except OSError as exc:
            raise click.ClickException(str(exc))
    options = data.setdefault("options", {})
    for key in ("seed", "resolution", "tolerance"):
        if ctx_params.get(key) is not None:
            options[key] = ctx_params[key]
    return data


def _rows_from_response(payload: dict) -> list[ReportRow]:
    rows = []
    for r in payload["rows"]:
        rows.append(
            ReportRow(
                quantity=r["quantity"],
                inputs=r["inputs"],
                expected=r["expected"],
                actual=r["actual"],
                tolerance=r["tolerance"],
                provenance=r["provenance"],
            )
        )
    return rows


def _emit(rows: list[ReportRow], out: str | None, fmt: str) -> None:
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    if out:
        write_report(out, text)
        click.echo(f"wrote {out}")
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"{status}  {r.quantity}  [{r.inputs}]  rel_err={r.rel_err:.3e}")
    failed = sum(1 for r in rows if not r.passed)
    click.echo(f"{len(rows) - failed}/{len(rows)} checks passed")
    if failed:
        sys.exit(1)


def _post(url: str | None, endpoint: str, body: dict) -> dict:
    with _client(url) as client:
        response = client.post(endpoint, json=body)
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"{endpoint}: {detail}")
    return response.json()


common_options = [
    click.option("--scenario", "scenario_path", type=click.Path(), default=None,
                 help="Scenario JSON file (default: built-in example pair)."),
    click.option("--out", type=click.Path(dir_okay=False), default=None,
                 help="Report file path."),
    click.option("--seed", type=int, default=None, help="Random seed."),
    click.option("--resolution", type=int, default=None, help="Grid resolution."),
    click.option("--tolerance", type=float, default=None, help="Check tolerance."),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                 help="Report file format."),
    click.option("--url", default=None, help="Remote service URL (default: in-process)."),
]


def _with_common(func):
    for option in reversed(common_options):
        func = option(func)
    return func


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Energies, metric distances, envelopes, and geodesics of radial profiles."""


def _command(name: str):
    @main.command(name)
    @_with_common
    def _cmd(scenario_path, out, seed, resolution, tolerance, fmt, url):
        data = _load_scenario(
            scenario_path,
            {"seed": seed, "resolution": resolution, "tolerance": tolerance},
        )
        payload = _post(url, f"/commands/{name}", data)
        _emit(_rows_from_response(payload), out, fmt)

    _cmd.__name__ = name
    return _cmd


for _name in ("energy", "metric", "envelope", "geodesic", "capacity"):
    _command(_name)


@main.command()
@click.argument("example_id")
@click.option("--n", type=int, default=None, help="Complex dimension n.")
@click.option("--m", type=int, default=None, help="Hessian order m.")
@click.option("--jmax", type=int, default=None, help="Largest sequence index.")
@_with_common
def reproduce(example_id, n, m, jmax, scenario_path, out, seed, resolution, tolerance, fmt, url):
    """Recompute a named example table and check it against closed forms."""
    options = {}
    for key, value in (("n", n), ("m", m), ("jmax", jmax), ("seed", seed),
                       ("resolution", resolution)):
        if value is not None:
            options[key] = value
    payload = _post(url, f"/reproduce/{example_id}", {"options": options})
    _emit(_rows_from_response(payload), out, fmt)


@main.command()
@_with_common
def selftest(scenario_path, out, seed, resolution, tolerance, fmt, url):
    """Run the example registry plus randomized property checks."""
    options = {}
    if seed is not None:
        options["seed"] = seed
    payload = _post(url, "/selftest", {"options": options})
    _emit(_rows_from_response(payload), out, fmt)


if __name__ == "__main__":
    main()
