"""Heavy-output-probability statistics and the pass/fail protocol.

The cumulative statistics implement the published formulas verbatim:

    mean_k  = (1/k) sum hop_i
    sigma_k = mean_k * sqrt((1 - mean_k) / k)
    z_k     = (mean_k - 2/3) / sigma_k
    conf_k  = (1 + erf(z_k / sqrt(2))) / 2

Note sigma_k is NOT the textbook binomial standard error
sqrt(mean (1 - mean) / k); the textbook variant is available behind the
``textbook_sigma`` flag for sensitivity analysis.

Pass requires all of: mean > 2/3, mean - 2 sigma > 2/3, conf > 0.99.
"""

from __future__ import annotations

import csv
import io
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .compiler import CompileError, CompileRequest, compile_to_device
from .qvgen import QvSpec, generate_qv_circuit
from .sim import Counts, HeavySet, heavy_set, ideal_distribution, ideal_hop, sample_counts
from .topology import DeviceProfile

THRESHOLD = 2.0 / 3.0


class ProtocolError(ValueError):
    pass


class IncompatibleSeriesError(ProtocolError):
    pass


@dataclass(frozen=True)
class CircuitResult:
    """Per-circuit outcome; hop is kept as an exact rational (count/shots)."""

    circuit_index: int
    heavy_count: int
    shots: int
    ideal_hop: float
    timestamp: float
    compile_error: str | None = None

    @property
    def hop(self) -> float:
        return self.heavy_count / self.shots


@dataclass(frozen=True)
class CumulativePoint:
    """Statistics over the first k circuit HOPs."""

    k: int
    mean: float
    sigma: float
    z: float
    z_conf: float


@dataclass(frozen=True)
class Verdict:
    criterion1: bool  # mean > 2/3
    criterion2: bool  # mean - 2 sigma > 2/3
    criterion3: bool  # z-confidence > 0.99
    passed: bool


@dataclass(frozen=True)
class ProtocolConfig:
    max_circuits: int = 1000
    shots: int = 100
    early_stop: bool = True
    early_stop_conf: float = 0.99
    early_stop_min_circuits: int = 100
    hopeless_stop: bool = True
    hopeless_min_circuits: int = 100
    textbook_sigma: bool = False
    workers: int = 1


@dataclass(frozen=True)
class SuiteResult:
    m: int
    profile_name: str
    subset: tuple[int, ...]
    base_seed: int
    config: ProtocolConfig
    results: tuple[CircuitResult, ...]
    cumulative: tuple[CumulativePoint, ...]
    verdict: Verdict
    started_at: float
    finished_at: float
    stop_reason: str

    @property
    def hops(self) -> list[float]:
        return [r.hop for r in self.results if r.compile_error is None]


def hop_of(counts: Counts, hs: HeavySet) -> float:
    """Fraction of shots landing in the heavy-output set."""
    if counts.shots == 0:
        raise ProtocolError("hop undefined for zero shots")
    return heavy_shot_count(counts, hs) / counts.shots


def heavy_shot_count(counts: Counts, hs: HeavySet) -> int:
    return sum(v for b, v in counts.counts.items() if b in hs.members)


def _point(total: float, k: int, textbook: bool) -> CumulativePoint:
    mean = total / k
    if textbook:
        sigma = math.sqrt(mean * (1.0 - mean) / k)
    else:
        sigma = mean * math.sqrt((1.0 - mean) / k)
    if sigma == 0.0:
        if mean > THRESHOLD:
            z = math.inf
        elif mean < THRESHOLD:
            z = -math.inf
        else:
            z = 0.0
    else:
        z = (mean - THRESHOLD) / sigma
    z_conf = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0))) if math.isfinite(z) else (
        1.0 if z > 0 else 0.0
    )
    return CumulativePoint(k=k, mean=mean, sigma=sigma, z=z, z_conf=z_conf)


def cumulative_stats(hops: list[float], textbook_sigma: bool = False) -> list[CumulativePoint]:
    """One point per prefix of the HOP list; point k uses hops[0:k] only."""
    for h in hops:
        if not 0.0 <= h <= 1.0:
            raise ProtocolError(f"hop value {h} outside [0, 1]")
    out = []
    total = 0.0
    for k, h in enumerate(hops, start=1):
        total += h
        out.append(_point(total, k, textbook_sigma))
    return out


def verdict_of_point(p: CumulativePoint) -> Verdict:
    c1 = p.mean > THRESHOLD
    c2 = p.mean - 2.0 * p.sigma > THRESHOLD
    c3 = p.z_conf > 0.99
    return Verdict(criterion1=c1, criterion2=c2, criterion3=c3, passed=c1 and c2 and c3)


def verdict(hops: list[float], textbook_sigma: bool = False) -> Verdict:
    """The three pass criteria evaluated at the final cumulative point."""
    if not hops:
        raise ProtocolError("verdict requires at least one hop")
    return verdict_of_point(cumulative_stats(hops, textbook_sigma)[-1])


def _unpermute(bitstring: str, final_layout: tuple[int, ...]) -> str:
    """Report local measurement bits in logical qubit order."""
    return "".join(bitstring[final_layout[q]] for q in range(len(final_layout)))


def _run_one(
    m: int,
    profile: DeviceProfile,
    subset: tuple[int, ...] | None,
    config: ProtocolConfig,
    base_seed: int,
    index: int,
) -> CircuitResult:
    spec = QvSpec(m=m, count=config.max_circuits, base_seed=base_seed)
    circuit = generate_qv_circuit(spec, index)
    dist = ideal_distribution(circuit)
    hs = heavy_set(dist)
    ih = ideal_hop(dist, hs)
    try:
        compiled = compile_to_device(
            CompileRequest(
                circuit=circuit,
                profile=profile,
                qubit_subset=subset,
                seed=base_seed + index,
            )
        )
    except CompileError as exc:
        return CircuitResult(
            circuit_index=index,
            heavy_count=0,
            shots=config.shots,
            ideal_hop=ih,
            timestamp=time.time(),
            compile_error=str(exc),
        )
    counts = sample_counts(
        compiled.circuit,
        config.shots,
        profile.noise,
        seed_key=(base_seed, m, index),
        circuit_index=index,
    )
    logical = {}
    for b, v in counts.counts.items():
        lb = _unpermute(b, compiled.final_layout)
        logical[lb] = logical.get(lb, 0) + v
    heavy = sum(v for b, v in logical.items() if b in hs.members)
    return CircuitResult(
        circuit_index=index,
        heavy_count=heavy,
        shots=config.shots,
        ideal_hop=ih,
        timestamp=time.time(),
    )


def run_protocol(
    m: int,
    profile: DeviceProfile,
    subset: tuple[int, ...] | None = None,
    config: ProtocolConfig = ProtocolConfig(),
    base_seed: int = 0,
) -> SuiteResult:
    """Generate, compile, sample, and score circuits until a stop rule fires.

    Early stop on pass: z-confidence exceeds ``early_stop_conf``.  Early stop
    on hopeless failure: mean + 2 sigma < 2/3 after at least
    ``hopeless_min_circuits``.  The suite aborts if more than 10% of circuits
    fail to compile.  Output is independent of ``workers``.
    """
    started = time.time()
    results: list[CircuitResult] = []
    hops: list[float] = []
    cumulative: list[CumulativePoint] = []
    stop_reason = "max_circuits"
    failures = 0
    chunk = max(1, config.workers)

    def evaluate(indices):
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                return list(
                    pool.map(
                        lambda i: _run_one(m, profile, subset, config, base_seed, i),
                        indices,
                    )
                )
        return [_run_one(m, profile, subset, config, base_seed, i) for i in indices]

    index = 0
    stopped = False
    while index < config.max_circuits and not stopped:
        batch = list(range(index, min(index + chunk, config.max_circuits)))
        # Stop rules are applied per index in order, so the stopping point
        # (and therefore the output) does not depend on the batch size.
        for r in evaluate(batch):
            results.append(r)
            if r.compile_error is not None:
                failures += 1
                if failures > 0.1 * len(results) and failures > 1:
                    raise ProtocolError(
                        f"{failures}/{len(results)} circuits failed to compile; aborting"
                    )
                continue
            hops.append(r.hop)
            total = sum(hops)
            point = _point(total, len(hops), config.textbook_sigma)
            cumulative.append(point)
            if (
                config.early_stop
                and len(hops) >= config.early_stop_min_circuits
                and point.z_conf > config.early_stop_conf
            ):
                stop_reason = "passed_confidence"
                stopped = True
                break
            if (
                config.hopeless_stop
                and len(hops) >= config.hopeless_min_circuits
                and point.mean + 2.0 * point.sigma < THRESHOLD
            ):
                stop_reason = "hopeless"
                stopped = True
                break
        index += chunk
    if not hops:
        raise ProtocolError("no circuit produced a result")
    final = verdict_of_point(cumulative[-1])
    used_subset = subset if subset is not None else ()
    return SuiteResult(
        m=m,
        profile_name=profile.name,
        subset=tuple(used_subset),
        base_seed=base_seed,
        config=config,
        results=tuple(results),
        cumulative=tuple(cumulative),
        verdict=final,
        started_at=started,
        finished_at=time.time(),
        stop_reason=stop_reason,
    )


def quantum_volume(verdicts: dict[int, Verdict]) -> tuple[int | None, list[int]]:
    """Largest passing m (log2 QV) and any non-monotone gap widths.

    Returns (None, []) when no m passes, rendered as "<2" downstream.
    """
    if not verdicts:
        raise ProtocolError("no verdicts supplied")
    passing = sorted(m for m, v in verdicts.items() if v.passed)
    if not passing:
        return None, []
    best = passing[-1]
    gaps = sorted(
        m for m, v in verdicts.items() if not v.passed and m < best
    )
    if gaps:
        warnings.warn(
            f"non-monotone verdicts: m={gaps} failed below passing m={best}"
        )
    return best, gaps


def qv_string(log2_qv: int | None) -> str:
    return "<2" if log2_qv is None else str(2**log2_qv)


def drift_series(suites: list[SuiteResult]) -> list[tuple[float, float, float]]:
    """Chronological (timestamp, mean, mean - 2 sigma) across repeated suites
    on the same (m, subset)."""
    if len(suites) < 2:
        raise IncompatibleSeriesError("drift series needs at least two suites")
    key = (suites[0].m, suites[0].subset)
    for s in suites[1:]:
        if (s.m, s.subset) != key:
            raise IncompatibleSeriesError(
                f"suites mix (m, subset) {key} and {(s.m, s.subset)}"
            )
    pts = [
        (s.started_at, s.cumulative[-1].mean, s.cumulative[-1].mean - 2 * s.cumulative[-1].sigma)
        for s in suites
    ]
    return sorted(pts)


# ---------------------------------------------------------------------------
# Persistence

def suite_to_json(s: SuiteResult) -> dict:
    return {
        "schema": 1,
        "m": s.m,
        "profile": s.profile_name,
        "subset": list(s.subset),
        "base_seed": s.base_seed,
        "config": {
            "max_circuits": s.config.max_circuits,
            "shots": s.config.shots,
            "early_stop": s.config.early_stop,
            "early_stop_conf": s.config.early_stop_conf,
            "early_stop_min_circuits": s.config.early_stop_min_circuits,
            "hopeless_stop": s.config.hopeless_stop,
            "hopeless_min_circuits": s.config.hopeless_min_circuits,
            "textbook_sigma": s.config.textbook_sigma,
        },
        "results": [
            {
                "circuit_index": r.circuit_index,
                "heavy_count": r.heavy_count,
                "shots": r.shots,
                "ideal_hop": r.ideal_hop,
                "timestamp": r.timestamp,
                "compile_error": r.compile_error,
            }
            for r in s.results
        ],
        "cumulative": [
            {"k": p.k, "mean": p.mean, "sigma": p.sigma, "z": p.z, "z_conf": p.z_conf}
            for p in s.cumulative
        ],
        "verdict": {
            "criterion1": s.verdict.criterion1,
            "criterion2": s.verdict.criterion2,
            "criterion3": s.verdict.criterion3,
            "passed": s.verdict.passed,
        },
        "started_at": s.started_at,
        "finished_at": s.finished_at,
        "stop_reason": s.stop_reason,
    }


def suite_from_json(obj: dict) -> SuiteResult:
    if obj.get("schema") != 1:
        raise ProtocolError(f"unsupported result schema {obj.get('schema')!r}")
    cfg = ProtocolConfig(**obj["config"])
    results = tuple(
        CircuitResult(
            circuit_index=r["circuit_index"],
            heavy_count=r["heavy_count"],
            shots=r["shots"],
            ideal_hop=r["ideal_hop"],
            timestamp=r["timestamp"],
            compile_error=r.get("compile_error"),
        )
        for r in obj["results"]
    )
    cumulative = tuple(
        CumulativePoint(k=p["k"], mean=p["mean"], sigma=p["sigma"], z=p["z"], z_conf=p["z_conf"])
        for p in obj["cumulative"]
    )
    v = obj["verdict"]
    return SuiteResult(
        m=obj["m"],
        profile_name=obj["profile"],
        subset=tuple(obj["subset"]),
        base_seed=obj["base_seed"],
        config=cfg,
        results=results,
        cumulative=cumulative,
        verdict=Verdict(
            criterion1=v["criterion1"],
            criterion2=v["criterion2"],
            criterion3=v["criterion3"],
            passed=v["passed"],
        ),
        started_at=obj["started_at"],
        finished_at=obj["finished_at"],
        stop_reason=obj["stop_reason"],
    )


def suite_to_csv(s: SuiteResult) -> str:
    """Columns matching the cumulative HOP plot data: k, hop, ideal_hop,
    mean, mean - 2 sigma, z-confidence."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "hop", "ideal_hop", "mean", "mean_minus_2sigma", "z_conf"])
    ok = [r for r in s.results if r.compile_error is None]
    for r, p in zip(ok, s.cumulative):
        w.writerow(
            [
                p.k,
                repr(r.hop),
                repr(r.ideal_hop),
                repr(p.mean),
                repr(p.mean - 2.0 * p.sigma),
                repr(p.z_conf),
            ]
        )
    return buf.getvalue()
