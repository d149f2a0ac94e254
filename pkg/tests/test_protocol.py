"""Protocol statistics against an arbitrary-precision oracle, stop rules,
aggregation, and persistence."""

import json
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvkit.protocol import (
    THRESHOLD,
    CircuitResult,
    IncompatibleSeriesError,
    ProtocolConfig,
    ProtocolError,
    Verdict,
    cumulative_stats,
    drift_series,
    heavy_shot_count,
    hop_of,
    quantum_volume,
    qv_string,
    run_protocol,
    suite_from_json,
    suite_to_csv,
    suite_to_json,
    verdict,
    verdict_of_point,
)
from qvkit.sim import Counts, HeavySet, NoiseModel
from qvkit.topology import CouplingGraph, DeviceProfile

mpmath.mp.dps = 60


def exact_point(mean, k):
    """Arbitrary-precision evaluation of the published formulas."""
    mean = mpmath.mpf(mean)
    sigma = mean * mpmath.sqrt((1 - mean) / k)
    z = (mean - mpmath.mpf(2) / 3) / sigma
    conf = (1 + mpmath.erf(z / mpmath.sqrt(2))) / 2
    return sigma, z, conf


def ideal_profile(n=8):
    return DeviceProfile(
        name="ideal",
        graph=CouplingGraph.all_to_all(n),
        gateset_family="superconducting-heavyhex",
        noise=NoiseModel(),
    )


def depolarizing_profile(n=8):
    return DeviceProfile(
        name="depolarizing",
        graph=CouplingGraph.all_to_all(n),
        gateset_family="superconducting-heavyhex",
        noise=NoiseModel(f2=0.0, f1=0.0, f_spam=1.0),
    )


def test_statistics_against_mpmath_lock():
    # flat hop list so the cumulative mean is exactly 0.85 at k=100
    point = cumulative_stats([0.85] * 100)[-1]
    sigma, z, conf = exact_point("0.85", 100)
    assert abs(point.sigma - float(sigma)) <= abs(float(sigma)) * 1e-12
    assert abs(point.z - float(z)) <= abs(float(z)) * 1e-12
    assert abs(point.z_conf - float(conf)) <= abs(float(conf)) * 1e-12


def test_statistics_against_mpmath_random_points():
    import numpy as np

    rng = np.random.default_rng(81)
    for _ in range(50):
        mean = float(rng.uniform(0.05, 0.99))
        k = int(rng.integers(1, 2000))
        point = cumulative_stats([mean] * k)[-1]
        sigma, z, conf = exact_point(repr(mean), k)
        assert abs(point.sigma - float(sigma)) < 1e-13 + abs(float(sigma)) * 1e-10
        assert abs(point.z_conf - float(conf)) < 1e-10


def test_threshold_mean_gives_half_confidence():
    point = cumulative_stats([2.0 / 3.0] * 50)[-1]
    assert point.z == pytest.approx(0.0, abs=1e-9)
    assert abs(point.z_conf - 0.5) < 1e-12
    assert not verdict_of_point(point).passed


def test_textbook_sigma_variant():
    point = cumulative_stats([0.85] * 100, textbook_sigma=True)[-1]
    assert point.sigma == pytest.approx(math.sqrt(0.85 * 0.15 / 100), abs=1e-15)
    plain = cumulative_stats([0.85] * 100)[-1]
    assert point.sigma != plain.sigma


def test_degenerate_sigma_sentinels():
    sure = cumulative_stats([1.0, 1.0])[-1]
    assert sure.sigma == 0.0 and sure.z == math.inf and sure.z_conf == 1.0
    hopeless = cumulative_stats([0.0, 0.0])[-1]
    assert hopeless.z == -math.inf and hopeless.z_conf == 0.0


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=40))
@settings(max_examples=100, deadline=None)
def test_prefix_property(hops):
    full = cumulative_stats(hops)
    for k in range(1, len(hops) + 1):
        partial = cumulative_stats(hops[:k])
        assert full[k - 1] == partial[-1]


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=40))
@settings(max_examples=100, deadline=None)
def test_criterion3_implies_criterion1(hops):
    for point in cumulative_stats(hops):
        v = verdict_of_point(point)
        if v.criterion3:
            assert v.criterion1


def test_cumulative_rejects_out_of_range():
    with pytest.raises(ProtocolError):
        cumulative_stats([0.5, 1.2])
    with pytest.raises(ProtocolError):
        verdict([])


def test_hop_of_counts():
    hs = HeavySet(m=2, members=frozenset({"00", "11"}), p_median=0.2)
    counts = Counts(counts={"00": 30, "01": 20, "11": 50}, shots=100)
    assert heavy_shot_count(counts, hs) == 80
    assert hop_of(counts, hs) == pytest.approx(0.8)
    with pytest.raises(ProtocolError):
        hop_of(Counts(counts={}, shots=0), hs)


def test_quantum_volume_aggregation():
    p = Verdict(True, True, True, True)
    f = Verdict(False, False, False, False)
    assert quantum_volume({2: p, 3: p, 4: f}) == (3, [])
    assert quantum_volume({2: f}) == (None, [])
    with pytest.warns(UserWarning):
        best, gaps = quantum_volume({3: p, 4: p, 5: f, 6: p})
    assert (best, gaps) == (6, [5])
    with pytest.raises(ProtocolError):
        quantum_volume({})
    assert qv_string(None) == "<2"
    assert qv_string(3) == "8"


def _suite(m=3, seed=0, max_circuits=120, profile=None, workers=1, shots=100):
    return run_protocol(
        m,
        profile or ideal_profile(),
        config=ProtocolConfig(max_circuits=max_circuits, shots=shots, workers=workers),
        base_seed=seed,
    )


def test_ideal_run_passes():
    suite = _suite()
    assert suite.verdict.passed
    assert suite.stop_reason == "passed_confidence"
    assert len(suite.results) >= 100
    assert suite.cumulative[-1].mean > 0.75


def test_depolarizing_run_fails_hopeless():
    suite = _suite(profile=depolarizing_profile(), max_circuits=200)
    assert not suite.verdict.passed
    assert suite.stop_reason == "hopeless"
    assert suite.cumulative[-1].mean < 0.6


def test_single_circuit_boundary():
    suite = run_protocol(
        2, ideal_profile(), config=ProtocolConfig(max_circuits=1, shots=100), base_seed=5
    )
    assert len(suite.results) == 1
    assert suite.cumulative[-1].k == 1
    assert isinstance(suite.verdict.passed, bool)


def _strip_times(doc):
    doc = json.loads(json.dumps(doc))
    doc["started_at"] = doc["finished_at"] = 0.0
    for r in doc["results"]:
        r["timestamp"] = 0.0
    return doc


def test_worker_count_does_not_change_results():
    a = _suite(m=3, seed=7, workers=1)
    b = _suite(m=3, seed=7, workers=4)
    assert _strip_times(suite_to_json(a)) == _strip_times(suite_to_json(b))


def test_subset_recorded_and_bits_unpermuted():
    # A line forces swaps; the protocol must still score logical bitstrings,
    # so the ideal run passes just like the all-to-all case.
    line = DeviceProfile(
        name="ideal-line",
        graph=CouplingGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3)]),
        gateset_family="superconducting-heavyhex",
        noise=NoiseModel(),
    )
    suite = run_protocol(
        3, line, subset=(1, 2, 3), config=ProtocolConfig(max_circuits=120), base_seed=2
    )
    assert suite.subset == (1, 2, 3)
    assert suite.verdict.passed


def test_suite_json_round_trip():
    suite = _suite(m=2, seed=9)
    doc = suite_to_json(suite)
    assert doc["schema"] == 1
    back = suite_from_json(json.loads(json.dumps(doc)))
    assert back == suite
    with pytest.raises(ProtocolError):
        suite_from_json({**doc, "schema": 99})


def test_suite_csv_shape():
    suite = _suite(m=2, seed=9)
    lines = suite_to_csv(suite).splitlines()
    assert lines[0] == "k,hop,ideal_hop,mean,mean_minus_2sigma,z_conf"
    assert len(lines) == 1 + len(suite.cumulative)
    first = lines[1].split(",")
    assert int(first[0]) == 1
    assert 0.0 <= float(first[1]) <= 1.0


def test_drift_series():
    a = _suite(m=2, seed=11)
    b = _suite(m=2, seed=11)
    pts = drift_series([a, b])
    assert len(pts) == 2
    assert pts[0][1:] == pts[1][1:]
    with pytest.raises(IncompatibleSeriesError):
        drift_series([a])
    other = _suite(m=3, seed=11)
    with pytest.raises(IncompatibleSeriesError):
        drift_series([a, other])


def test_circuit_result_exact_hop():
    r = CircuitResult(circuit_index=0, heavy_count=85, shots=100, ideal_hop=0.8, timestamp=0.0)
    assert r.hop == 0.85
    assert THRESHOLD == pytest.approx(2.0 / 3.0)
