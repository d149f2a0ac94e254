"""Command-line front end.

Every command is a thin HTTP client: by default requests are served by an
in-process application instance, and ``--server URL`` points the same
commands at a remote deployment.  Environment overrides are limited to
QVKIT_SEED and QVKIT_OUTDIR; everything else must be an explicit flag.

Exit codes: 0 success/pass, 1 benchmark fail, 2 usage or runtime error.
"""

from __future__ import annotations

import json
import os
import warnings
from pathlib import Path

import click
import httpx

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from .service import create_app


class ToolError(click.ClickException):
    exit_code = 2


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    return TestClient(create_app())


def _call(client, method: str, path: str, **kwargs) -> dict:
    try:
        resp = client.request(method, path, **kwargs)
    except httpx.HTTPError as exc:
        raise ToolError(f"request failed: {exc}") from None
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise ToolError(str(detail))
    return resp.json()


def _profile_payload(spec: str):
    """Inline a local profile file; otherwise pass the name through."""
    p = Path(spec)
    if p.exists():
        try:
            return json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ToolError(f"{spec}: malformed JSON: {exc}") from None
    return spec


def _parse_widths(text: str) -> list[int]:
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-", 1))
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise ToolError(f"invalid width spec {text!r}; use e.g. '4' or '2-6'") from None


def _parse_subset(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ToolError(f"invalid subset {text!r}; use e.g. '0,1,2'") from None


def _load_results(paths) -> list[dict]:
    out = []
    for path in paths:
        try:
            out.append(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ToolError(f"cannot read result file {path}: {exc}") from None
    return out


@click.group()
@click.option("--server", default=None, metavar="URL", help="Remote service URL (default: in-process).")
@click.version_option(package_name="qvkit")
@click.pass_context
def main(ctx, server):
    """Quantum-volume benchmarking toolkit."""
    ctx.obj = server


@main.command()
@click.option("-m", "--width", type=click.IntRange(min=2), required=True, help="Circuit width.")
@click.option("-d", "--depth", type=click.IntRange(min=1), default=None, help="Layer count (default: width).")
@click.option("-n", "--count", type=click.IntRange(min=1), default=1000, show_default=True, help="Number of circuits.")
@click.option("--seed", type=int, default=0, show_default=True, envvar="QVKIT_SEED")
@click.option("-o", "--outdir", type=click.Path(file_okay=False, path_type=Path), default=Path("suite"), show_default=True, envvar="QVKIT_OUTDIR")
@click.pass_obj
def generate(server, width, depth, count, seed, outdir):
    """Generate a model-circuit suite and write it to disk."""
    with _client(server) as client:
        resp = _call(client, "POST", "/generate", json={"m": width, "d": depth, "count": count, "seed": seed})
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in resp["files"].items():
        (outdir / name).write_text(text, encoding="utf-8")
    (outdir / "manifest.json").write_text(json.dumps(resp["manifest"], indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {count} circuits to {outdir} (sha256 {resp['manifest']['sha256'][:12]})")


@main.command()
@click.argument("profile")
@click.option("-n", "--size", type=click.IntRange(min=1), required=True, help="Subset size.")
@click.option("--count-only", is_flag=True, help="Print only the subset count.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of text.")
@click.pass_obj
def enumerate(server, profile, size, count_only, as_json):
    """List the connected qubit subsets of a device profile."""
    payload = {"profile": _profile_payload(profile), "n": size, "include_subsets": not count_only}
    with _client(server) as client:
        resp = _call(client, "POST", "/enumerate", json=payload)
    if as_json:
        click.echo(json.dumps(resp, indent=2))
        return
    for subset in resp.get("subsets") or []:
        click.echo(" ".join(str(q) for q in subset))
    click.echo(f"count: {resp['count']}")


@main.command()
@click.argument("circuit", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("profile")
@click.option("--subset", default=None, metavar="LIST", help="Physical qubits, e.g. '0,1,2'.")
@click.option("--allow-spill", is_flag=True, help="Allow routing over the whole device.")
@click.option("--seed", type=int, default=0, show_default=True, envvar="QVKIT_SEED")
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Compiled circuit path (default: <circuit>.compiled.qasm).")
@click.pass_obj
def compile(server, circuit, profile, subset, allow_spill, seed, output):
    """Compile a circuit file to a device's native gates and coupling map."""
    payload = {
        "circuit": circuit.read_text(encoding="utf-8"),
        "profile": _profile_payload(profile),
        "subset": _parse_subset(subset) if subset else None,
        "allow_spill": allow_spill,
        "seed": seed,
    }
    with _client(server) as client:
        resp = _call(client, "POST", "/compile", json=payload)
    out = output if output else circuit.with_suffix(".compiled.qasm")
    out.write_text(resp["circuit"], encoding="utf-8")
    layout = {k: resp[k] for k in ("physical_qubits", "initial_layout", "final_layout", "swap_count", "census")}
    layout_path = out.with_suffix(out.suffix + ".layout.json")
    layout_path.write_text(json.dumps(layout, indent=2) + "\n", encoding="utf-8")
    click.echo(
        f"compiled to {out} on qubits {resp['physical_qubits']} "
        f"({resp['swap_count']} swaps, {resp['census']['two_qubit_count']} two-qubit gates)"
    )


@main.command()
@click.argument("profile")
@click.option("-m", "--widths", required=True, metavar="SPEC", help="Width or range, e.g. '4' or '2-6'.")
@click.option("--subset", default="auto", show_default=True, metavar="SEL", help="'auto', 'enumerate', or an explicit list '0,1,2'.")
@click.option("-n", "--count", type=click.IntRange(min=1), default=1000, show_default=True, help="Maximum circuits per suite.")
@click.option("--shots", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, envvar="QVKIT_SEED")
@click.option("--workers", type=click.IntRange(min=1), default=lambda: os.cpu_count() or 1, help="Parallel circuit executions (default: cores).")
@click.option("--early-stop/--no-early-stop", default=True, show_default=True)
@click.option("--textbook-sigma", is_flag=True, help="Use the textbook binomial standard error.")
@click.option("-o", "--outdir", type=click.Path(file_okay=False, path_type=Path), default=Path("results"), show_default=True, envvar="QVKIT_OUTDIR")
@click.pass_obj
def run(server, profile, widths, subset, count, shots, seed, workers, early_stop, textbook_sigma, outdir):
    """Run the full benchmark protocol; exit 0 on pass, 1 on fail."""
    payload_profile = _profile_payload(profile)
    ms = _parse_widths(widths)
    outdir.mkdir(parents=True, exist_ok=True)
    all_pass = True
    with _client(server) as client:
        for m in ms:
            if subset == "auto":
                subsets: list[list[int] | None] = [None]
            elif subset == "enumerate":
                resp = _call(client, "POST", "/enumerate", json={"profile": payload_profile, "n": m})
                subsets = resp["subsets"]
            else:
                subsets = [_parse_subset(subset)]
            m_passed = False
            for sub in subsets:
                resp = _call(
                    client,
                    "POST",
                    "/run",
                    json={
                        "profile": payload_profile,
                        "m": m,
                        "subset": sub,
                        "max_circuits": count,
                        "shots": shots,
                        "seed": seed,
                        "early_stop": early_stop,
                        "textbook_sigma": textbook_sigma,
                        "workers": workers,
                    },
                )
                result = resp["result"]
                used = result["subset"]
                stem = f"suite_m{m:02d}_q{'-'.join(str(q) for q in used)}_seed{seed}"
                (outdir / f"{stem}.json").write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
                (outdir / f"{stem}.csv").write_text(resp["csv"], encoding="utf-8")
                last = result["cumulative"][-1]
                status = "PASS" if resp["passed"] else "FAIL"
                click.echo(
                    f"m={m} qubits={','.join(str(q) for q in used)} "
                    f"k={last['k']} mean={last['mean']:.4f} conf={last['z_conf']:.4f} "
                    f"[{status}] ({result['stop_reason']})"
                )
                m_passed = m_passed or resp["passed"]
            all_pass = all_pass and m_passed
    raise SystemExit(0 if all_pass else 1)


@main.command()
@click.argument("results", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--outdir", type=click.Path(file_okay=False, path_type=Path), default=Path("report"), show_default=True, envvar="QVKIT_OUTDIR")
@click.option("--json", "as_json", is_flag=True, help="Print the report JSON to stdout instead of writing files.")
@click.pass_obj
def report(server, results, outdir, as_json):
    """Aggregate suite results into plot-ready CSV/JSON data."""
    with _client(server) as client:
        resp = _call(client, "POST", "/report", json={"results": _load_results(results)})
    if as_json:
        click.echo(json.dumps(resp, indent=2))
        return
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_text(json.dumps(resp, indent=2) + "\n", encoding="utf-8")
    heat = "qubit,passed_subsets\n" + "".join(
        f"{q},{n}\n" for q, n in sorted(resp["qubit_tallies"].items(), key=lambda kv: int(kv[0]))
    )
    (outdir / "heatmap.csv").write_text(heat, encoding="utf-8")
    for curve in resp["curves"]:
        stem = f"curve_m{curve['m']:02d}_q{'-'.join(str(q) for q in curve['subset'])}_seed{curve['seed']}"
        rows = ["k,hop,ideal_hop,mean,mean_minus_2sigma,z_conf"]
        rows += [
            f"{int(r['k'])},{r['hop']!r},{r['ideal_hop']!r},{r['mean']!r},{r['mean_minus_2sigma']!r},{r['z_conf']!r}"
            for r in curve["rows"]
        ]
        (outdir / f"{stem}.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    if resp["drift"]:
        rows = ["m,subset,timestamp,mean,mean_minus_2sigma"]
        for series in resp["drift"]:
            sub = "-".join(str(q) for q in series["subset"])
            rows += [f"{series['m']},{sub},{t!r},{mu!r},{lo!r}" for t, mu, lo in series["points"]]
        (outdir / "drift.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    for m, tally in sorted(resp["summary"].items(), key=lambda kv: int(kv[0])):
        click.echo(f"m={m}: {tally} passed")
    click.echo(f"report written to {outdir}")


@main.command()
@click.argument("results", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def qv(server, results):
    """Aggregate per-width verdicts into the final quantum volume."""
    with _client(server) as client:
        resp = _call(client, "POST", "/qv", json={"results": _load_results(results)})
    for m, passed in sorted(resp["per_m"].items(), key=lambda kv: int(kv[0])):
        click.echo(f"m={m}: {'pass' if passed else 'fail'}")
    if resp["gaps"]:
        click.echo(f"warning: non-monotone verdicts at m={resp['gaps']}")
    if resp["log2_qv"] is None:
        click.echo("QV < 2")
    else:
        click.echo(f"log2 QV = {resp['log2_qv']}  (QV = {resp['qv']})")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
