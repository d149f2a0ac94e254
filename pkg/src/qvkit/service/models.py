"""Request/response schemas for the HTTP service.

Device profiles travel either as a builtin fixture name or as an inline
profile object; clients resolve local file paths themselves and inline the
result so the server never needs filesystem access.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from ..topology import DeviceProfile, builtin_profile, profile_from_dict


def resolve_profile_field(profile: str | dict) -> DeviceProfile:
    if isinstance(profile, str):
        return builtin_profile(profile)
    return profile_from_dict(profile, origin="<request>")


class GenerateRequest(BaseModel):
    m: int = Field(ge=2)
    d: int | None = Field(default=None, ge=1)
    count: int = Field(default=1000, ge=1)
    seed: int = 0


class GenerateResponse(BaseModel):
    manifest: dict[str, Any]
    files: dict[str, str]


class EnumerateRequest(BaseModel):
    profile: str | dict
    n: int = Field(ge=1)
    include_subsets: bool = True


class EnumerateResponse(BaseModel):
    profile: str
    n: int
    count: int
    subsets: list[list[int]] | None = None


class CompileCircuitRequest(BaseModel):
    circuit: str  # serialized circuit text
    profile: str | dict
    subset: list[int] | None = None
    allow_spill: bool = False
    seed: int = 0


class CompileCircuitResponse(BaseModel):
    circuit: str
    physical_qubits: list[int]
    initial_layout: list[int]
    final_layout: list[int]
    swap_count: int
    census: dict[str, int]


class RunRequest(BaseModel):
    profile: str | dict
    m: int = Field(ge=2)
    subset: list[int] | None = None
    max_circuits: int = Field(default=1000, ge=1)
    shots: int = Field(default=100, ge=1)
    seed: int = 0
    early_stop: bool = True
    early_stop_conf: float = 0.99
    early_stop_min_circuits: int = Field(default=100, ge=1)
    hopeless_stop: bool = True
    hopeless_min_circuits: int = Field(default=100, ge=1)
    textbook_sigma: bool = False
    workers: int = Field(default=1, ge=1)


class RunResponse(BaseModel):
    result: dict[str, Any]  # versioned suite-result document
    csv: str
    passed: bool


class ResultsRequest(BaseModel):
    results: list[dict[str, Any]] = Field(min_length=1)


class CurveModel(BaseModel):
    m: int
    profile: str
    subset: list[int]
    seed: int
    passed: bool
    rows: list[dict[str, float]]


class DriftSeriesModel(BaseModel):
    m: int
    subset: list[int]
    points: list[list[float]]  # (timestamp, mean, mean - 2 sigma)


class ReportResponse(BaseModel):
    curves: list[CurveModel]
    qubit_tallies: dict[int, int]
    drift: list[DriftSeriesModel]
    summary: dict[int, str]  # m -> "passed/total"


class QvResponse(BaseModel):
    log2_qv: int | None
    qv: str
    gaps: list[int]
    per_m: dict[int, bool]
