"""Acceptance criteria for the toolkit, one test per criterion.

Each test records a single "[acceptance] ..." pass/fail line; conftest.py
echoes all of them in the terminal summary at the end of the run.
"""

import itertools
import json
import time

import mpmath
import networkx as nx
import numpy as np

from oracles import ACCEPTANCE_LINES, dist_up_to_phase, perm_matrix
from qvkit.circuit import unitary_of
from qvkit.compiler import CompileRequest, compile_to_device
from qvkit.gates import GATESET_FAMILY_NAMES, native_gateset
from qvkit.protocol import (
    ProtocolConfig,
    cumulative_stats,
    quantum_volume,
    run_protocol,
    suite_to_csv,
    suite_to_json,
)
from qvkit.qvgen import QvSpec, generate_qv_circuit, write_suite
from qvkit.sim import NoiseModel, heavy_set, ideal_distribution, ideal_hop, sample_counts
from qvkit.topology import CouplingGraph, DeviceProfile, builtin_profile, subset_count

mpmath.mp.dps = 50


def report(name: str, ok: bool, detail: str = ""):
    line = f"[acceptance] {name}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def mean_ideal_hop(m: int, count: int, seed: int = 0) -> float:
    spec = QvSpec(m=m, count=count, base_seed=seed)
    total = 0.0
    for i in range(count):
        dist = ideal_distribution(generate_qv_circuit(spec, i))
        total += ideal_hop(dist, heavy_set(dist))
    return total / count


_M8_CACHE: dict = {}


def m8_mean() -> float:
    if "mean" not in _M8_CACHE:
        start = time.monotonic()
        _M8_CACHE["mean"] = mean_ideal_hop(8, 200)
        _M8_CACHE["elapsed"] = time.monotonic() - start
    return _M8_CACHE["mean"]


def ideal_profile_12q() -> DeviceProfile:
    return builtin_profile("ideal-alltoall-12q")


def test_acceptance_1_ideal_hop_asymptote():
    mean = m8_mean()
    elapsed = _M8_CACHE["elapsed"]
    ok = 0.83 <= mean <= 0.87 and elapsed < 60.0
    report(
        "1 ideal-HOP asymptote",
        ok,
        f"mean={mean:.4f} over 200 m=8 circuits in {elapsed:.1f}s (need [0.83, 0.87], <60s)",
    )


def test_acceptance_2_small_m_depression():
    m2 = mean_ideal_hop(2, 500)
    m8 = m8_mean()
    ok = m2 < m8 - 0.01
    report(
        "2 small-m depression",
        ok,
        f"mean(m=2)={m2:.4f} < mean(m=8)-0.01={m8 - 0.01:.4f}",
    )


def test_acceptance_3_subgraph_counts():
    expected = {
        "lima-like": (4, 3, 1),
        "manila-like": (3, 2, 1),
        "jakarta-like": (7, 6, 6),
        "guadalupe-like": (20, 24, 30),
        "hanoi-like": (37, 48, 68),
        "brooklyn-like": (95, 132, 200),
    }
    mismatches = []
    for name, counts in expected.items():
        g = builtin_profile(name).graph
        for n, want in zip((3, 4, 5), counts):
            got = subset_count(g, n)
            if got != want:
                mismatches.append(f"{name} n={n}: {got}!={want}")
    got_127 = subset_count(builtin_profile("washington-like").graph, 4)
    if got_127 != 272:
        mismatches.append(f"washington-like n=4: {got_127}!=272")
    # brute-force oracle agreement on every graph with at most 16 vertices
    small = [
        builtin_profile(n).graph
        for n in ("lima-like", "manila-like", "jakarta-like", "guadalupe-like",
                  "lucy-like", "harmony-like", "h1-2-like")
    ]
    rng = np.random.default_rng(91)
    for _ in range(6):
        nv = int(rng.integers(4, 17))
        pairs = [(a, b) for a in range(nv) for b in range(a + 1, nv) if rng.random() < 0.3]
        small.append(CouplingGraph.from_pairs(nv, pairs))
    for g in small:
        assert g.n_qubits <= 16
        nxg = nx.Graph()
        nxg.add_nodes_from(range(g.n_qubits))
        nxg.add_edges_from(g.edges)
        for n in range(1, min(g.n_qubits, 6) + 1):
            brute = sum(
                1
                for combo in itertools.combinations(range(g.n_qubits), n)
                if nx.is_connected(nxg.subgraph(combo))
            )
            if subset_count(g, n) != brute:
                mismatches.append(f"oracle mismatch on {g.n_qubits}q graph n={n}")
    report(
        "3 subgraph counts",
        not mismatches,
        "all fixture tallies and brute-force oracles agree" if not mismatches else "; ".join(mismatches),
    )


def test_acceptance_4_compiler_preservation():
    start = time.monotonic()
    circuits = []
    for i in range(100):
        m = 2 + i % 3
        circuits.append(generate_qv_circuit(QvSpec(m=m, count=100, base_seed=92 + m), i))
    worst = 0.0
    illegal = 0
    for family in GATESET_FAMILY_NAMES:
        allowed = native_gateset(family)
        for topo in ("all", "line"):
            for i, c in enumerate(circuits):
                m = c.width
                graph = (
                    CouplingGraph.all_to_all(m)
                    if topo == "all"
                    else CouplingGraph.from_pairs(m, [(q, q + 1) for q in range(m - 1)])
                )
                profile = DeviceProfile(
                    name=f"a4-{family}-{topo}", graph=graph,
                    gateset_family=family, noise=NoiseModel(),
                )
                compiled = compile_to_device(CompileRequest(circuit=c, profile=profile, seed=i))
                for op in compiled.circuit.ops:
                    if op.gate not in allowed or (
                        op.gate.arity == 2 and not graph.has_edge(*op.qubits)
                    ):
                        illegal += 1
                lhs = unitary_of(compiled.circuit) @ perm_matrix(compiled.initial_layout)
                rhs = perm_matrix(compiled.final_layout) @ unitary_of(c)
                worst = max(worst, dist_up_to_phase(lhs, rhs))
    elapsed = time.monotonic() - start
    ok = worst < 1e-9 and illegal == 0 and elapsed < 300.0
    report(
        "4 compiler preservation",
        ok,
        f"1000 compilations, worst equivalence error {worst:.2e}, "
        f"{illegal} illegal gates, {elapsed:.1f}s (need <1e-9, 0, <300s)",
    )


def test_acceptance_5_statistics_lock():
    point = cumulative_stats([0.85] * 100)[-1]
    mean = mpmath.mpf("0.85")
    sigma = mean * mpmath.sqrt((1 - mean) / 100)
    z = (mean - mpmath.mpf(2) / 3) / sigma
    conf = (1 + mpmath.erf(z / mpmath.sqrt(2))) / 2
    rel = max(
        abs(point.sigma - float(sigma)) / float(sigma),
        abs(point.z - float(z)) / float(z),
        abs(point.z_conf - float(conf)) / float(conf),
    )
    boundary = cumulative_stats([2.0 / 3.0] * 100)[-1]
    ok = rel < 1e-12 and abs(boundary.z_conf - 0.5) < 1e-12
    report(
        "5 statistics lock",
        ok,
        f"worst relative error {rel:.2e} at (0.85, 100); "
        f"|conf(2/3) - 0.5| = {abs(boundary.z_conf - 0.5):.2e}",
    )


def test_acceptance_6_end_to_end_pass_fail():
    profile = ideal_profile_12q()
    config = ProtocolConfig(max_circuits=500, shots=100, workers=4)
    failures = []
    for seed in range(10):
        for m in range(2, 7):
            suite = run_protocol(m, profile, config=config, base_seed=seed)
            if not suite.verdict.passed:
                failures.append(f"seed={seed} m={m}")
    depol = builtin_profile("depolarizing-alltoall-12q")
    bad = run_protocol(3, depol, config=ProtocolConfig(max_circuits=500, shots=100, workers=4))
    depol_mean = bad.cumulative[-1].mean
    ok = not failures and not bad.verdict.passed and depol_mean < 0.55
    report(
        "6 end-to-end pass/fail",
        ok,
        f"noiseless m=2..6 passed 10/10 seeds{'' if not failures else ' except ' + ','.join(failures)}; "
        f"depolarizing m=3 mean={depol_mean:.3f} (need <0.55)",
    )


def _qv_sweep(profile: DeviceProfile, ms, seed: int) -> int:
    config = ProtocolConfig(max_circuits=300, shots=100, workers=4)
    verdicts = {m: run_protocol(m, profile, config=config, base_seed=seed).verdict for m in ms}
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        qv, _ = quantum_volume(verdicts)
    return 0 if qv is None else qv


def test_acceptance_7_noise_monotonicity():
    qvs = []
    for f2 in (1.0, 0.99, 0.95, 0.85):
        profile = DeviceProfile(
            name=f"sweep-{f2}",
            graph=CouplingGraph.all_to_all(12),
            gateset_family="superconducting-heavyhex",
            noise=NoiseModel(f2=f2, f1=0.9997, f_spam=0.99),
        )
        qvs.append(_qv_sweep(profile, range(2, 7), seed=11))
    monotone = all(a >= b for a, b in zip(qvs, qvs[1:]))
    ion = _qv_sweep(builtin_profile("h1-2-like"), range(2, 5), seed=5)
    octo = _qv_sweep(builtin_profile("aspen-11-like"), range(2, 5), seed=5)
    ok = monotone and ion > octo
    report(
        "7 noise monotonicity",
        ok,
        f"log2 QV by f2 1.0/0.99/0.95/0.85 = {qvs} (non-increasing: {monotone}); "
        f"h1-2-like={ion} > aspen-like={octo}",
    )


def test_acceptance_8_determinism(tmp_path):
    spec = QvSpec(m=3, count=5, base_seed=13)
    m_a = write_suite(spec, tmp_path / "a")
    m_b = write_suite(spec, tmp_path / "b")
    files_same = m_a == m_b and all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
        for n in m_a["files"]
    )
    c = generate_qv_circuit(spec, 0)
    noise = NoiseModel(f2=0.99, f1=0.999, f_spam=0.99)
    counts_same = (
        sample_counts(c, 200, noise, seed_key=(13, 3, 0)).counts
        == sample_counts(c, 200, noise, seed_key=(13, 3, 0)).counts
    )
    profile = ideal_profile_12q()
    config1 = ProtocolConfig(max_circuits=150, shots=100, workers=1)
    config8 = ProtocolConfig(max_circuits=150, shots=100, workers=8)
    s1 = run_protocol(3, profile, config=config1, base_seed=21)
    s8 = run_protocol(3, profile, config=config8, base_seed=21)
    series_same = suite_to_csv(s1) == suite_to_csv(s8)

    def strip(doc):
        doc = json.loads(json.dumps(doc))
        doc["started_at"] = doc["finished_at"] = 0.0
        for r in doc["results"]:
            r["timestamp"] = 0.0
        return doc

    json_same = strip(suite_to_json(s1)) == strip(suite_to_json(s8))
    ok = files_same and counts_same and series_same and json_same
    report(
        "8 determinism",
        ok,
        f"circuit files identical: {files_same}; counts identical: {counts_same}; "
        f"cumulative series identical across 1 vs 8 workers: {series_same and json_same}",
    )
