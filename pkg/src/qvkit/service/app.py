"""HTTP service exposing the benchmark toolkit.

All endpoints are stateless: requests carry every input (profiles inline or
by builtin name, circuits as serialized text) and responses carry complete
documents, so the command-line client can run against an in-process app or a
remote server interchangeably.
"""

from __future__ import annotations

import warnings

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..circuit import CircuitError, ParseError, parse, serialize
from ..compiler import CompileError, CompileRequest, auto_subset, compile_to_device
from ..protocol import (
    ProtocolConfig,
    ProtocolError,
    Verdict,
    drift_series,
    quantum_volume,
    qv_string,
    run_protocol,
    suite_from_json,
    suite_to_csv,
    suite_to_json,
)
from ..qvgen import QvSpec, render_suite
from ..topology import ProfileError, builtin_profile_names, connected_subsets, subset_count
from . import models


def create_app() -> FastAPI:
    app = FastAPI(title="qvkit", version=__version__)

    kinds = [
        (ProfileError, "profile_error"),
        (ParseError, "parse_error"),
        (CircuitError, "circuit_error"),
        (CompileError, "compile_error"),
        (ProtocolError, "protocol_error"),
    ]

    @app.exception_handler(ValueError)
    def _value_error(_: Request, exc: ValueError) -> JSONResponse:
        kind = next((k for t, k in kinds if isinstance(exc, t)), "invalid_input")
        return JSONResponse(status_code=400, content={"detail": str(exc), "kind": kind})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/profiles")
    def profiles() -> dict:
        return {"profiles": builtin_profile_names()}

    @app.post("/generate", response_model=models.GenerateResponse)
    def generate(req: models.GenerateRequest) -> models.GenerateResponse:
        spec = QvSpec(m=req.m, d=req.d, count=req.count, base_seed=req.seed)
        files, manifest = render_suite(spec)
        return models.GenerateResponse(manifest=manifest, files=files)

    @app.post("/enumerate", response_model=models.EnumerateResponse)
    def enumerate_subsets(req: models.EnumerateRequest) -> models.EnumerateResponse:
        profile = models.resolve_profile_field(req.profile)
        if req.include_subsets:
            subsets = connected_subsets(profile.graph, req.n)
            return models.EnumerateResponse(
                profile=profile.name,
                n=req.n,
                count=len(subsets),
                subsets=[list(s) for s in subsets],
            )
        return models.EnumerateResponse(
            profile=profile.name, n=req.n, count=subset_count(profile.graph, req.n)
        )

    @app.post("/compile", response_model=models.CompileCircuitResponse)
    def compile_circuit(req: models.CompileCircuitRequest) -> models.CompileCircuitResponse:
        profile = models.resolve_profile_field(req.profile)
        circuit = parse(req.circuit)
        compiled = compile_to_device(
            CompileRequest(
                circuit=circuit,
                profile=profile,
                qubit_subset=tuple(req.subset) if req.subset is not None else None,
                allow_spill=req.allow_spill,
                seed=req.seed,
            )
        )
        return models.CompileCircuitResponse(
            circuit=serialize(compiled.circuit),
            physical_qubits=list(compiled.physical_qubits),
            initial_layout=list(compiled.initial_layout),
            final_layout=list(compiled.final_layout),
            swap_count=compiled.swap_count,
            census=compiled.census,
        )

    @app.post("/run", response_model=models.RunResponse)
    def run(req: models.RunRequest) -> models.RunResponse:
        profile = models.resolve_profile_field(req.profile)
        config = ProtocolConfig(
            max_circuits=req.max_circuits,
            shots=req.shots,
            early_stop=req.early_stop,
            early_stop_conf=req.early_stop_conf,
            early_stop_min_circuits=req.early_stop_min_circuits,
            hopeless_stop=req.hopeless_stop,
            hopeless_min_circuits=req.hopeless_min_circuits,
            textbook_sigma=req.textbook_sigma,
            workers=req.workers,
        )
        # Resolve the automatic subset up front so the result records the
        # physical qubits actually used.
        if req.subset is not None:
            subset = tuple(req.subset)
        else:
            subset = auto_subset(profile.graph, req.m)
        suite = run_protocol(
            req.m, profile, subset=subset, config=config, base_seed=req.seed
        )
        return models.RunResponse(
            result=suite_to_json(suite),
            csv=suite_to_csv(suite),
            passed=suite.verdict.passed,
        )

    @app.post("/report", response_model=models.ReportResponse)
    def report(req: models.ResultsRequest) -> models.ReportResponse:
        suites = [suite_from_json(r) for r in req.results]
        curves = []
        tallies: dict[int, int] = {}
        by_key: dict[tuple, list] = {}
        by_m: dict[int, list[bool]] = {}
        for s in suites:
            ok = [r for r in s.results if r.compile_error is None]
            rows = [
                {
                    "k": float(p.k),
                    "hop": r.hop,
                    "ideal_hop": r.ideal_hop,
                    "mean": p.mean,
                    "mean_minus_2sigma": p.mean - 2.0 * p.sigma,
                    "z_conf": p.z_conf,
                }
                for r, p in zip(ok, s.cumulative)
            ]
            curves.append(
                models.CurveModel(
                    m=s.m,
                    profile=s.profile_name,
                    subset=list(s.subset),
                    seed=s.base_seed,
                    passed=s.verdict.passed,
                    rows=rows,
                )
            )
            if s.verdict.passed:
                for q in s.subset:
                    tallies[q] = tallies.get(q, 0) + 1
            by_key.setdefault((s.m, s.subset), []).append(s)
            by_m.setdefault(s.m, []).append(s.verdict.passed)
        drift = [
            models.DriftSeriesModel(
                m=m, subset=list(subset), points=[list(p) for p in drift_series(group)]
            )
            for (m, subset), group in sorted(by_key.items())
            if len(group) >= 2
        ]
        summary = {
            m: f"{sum(flags)}/{len(flags)}" for m, flags in sorted(by_m.items())
        }
        return models.ReportResponse(
            curves=curves, qubit_tallies=tallies, drift=drift, summary=summary
        )

    @app.post("/qv", response_model=models.QvResponse)
    def qv(req: models.ResultsRequest) -> models.QvResponse:
        suites = [suite_from_json(r) for r in req.results]
        # A width passes when any of its suites (e.g. different subsets) pass.
        verdicts: dict[int, Verdict] = {}
        for s in suites:
            prev = verdicts.get(s.m)
            if prev is None or (s.verdict.passed and not prev.passed):
                verdicts[s.m] = s.verdict
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            log2_qv, gaps = quantum_volume(verdicts)
        return models.QvResponse(
            log2_qv=log2_qv,
            qv=qv_string(log2_qv),
            gaps=gaps,
            per_m={m: v.passed for m, v in sorted(verdicts.items())},
        )

    return app


app = create_app()
