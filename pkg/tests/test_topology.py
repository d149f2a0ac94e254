"""Coupling graphs, profile loading, and connected-subset enumeration checked
against a brute-force itertools + networkx oracle."""

import itertools
import json

import networkx as nx
import numpy as np
import pytest

from qvkit.sim import NoiseModel
from qvkit.topology import (
    CouplingGraph,
    DeviceProfile,
    ProfileError,
    builtin_profile,
    builtin_profile_names,
    connected_subsets,
    load_profile,
    profile_from_dict,
    resolve_profile,
    subset_count,
)

# Published connected-subgraph tallies for the fixture devices at n=3,4,5.
FIXTURE_COUNTS = {
    "lima-like": (4, 3, 1),
    "manila-like": (3, 2, 1),
    "jakarta-like": (7, 6, 6),
    "guadalupe-like": (20, 24, 30),
    "hanoi-like": (37, 48, 68),
    "brooklyn-like": (95, 132, 200),
}


def brute_force_subsets(g: CouplingGraph, n: int) -> list[tuple[int, ...]]:
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n_qubits))
    nxg.add_edges_from(g.edges)
    out = []
    for combo in itertools.combinations(range(g.n_qubits), n):
        if nx.is_connected(nxg.subgraph(combo)):
            out.append(combo)
    return out


def test_enumeration_matches_brute_force_on_random_graphs():
    rng = np.random.default_rng(61)
    for _ in range(25):
        n_vertices = int(rng.integers(2, 11))
        pairs = [
            (a, b)
            for a in range(n_vertices)
            for b in range(a + 1, n_vertices)
            if rng.random() < 0.35
        ]
        g = CouplingGraph.from_pairs(n_vertices, pairs)
        for n in range(1, min(n_vertices, 6) + 1):
            assert connected_subsets(g, n) == brute_force_subsets(g, n)
            assert subset_count(g, n) == len(brute_force_subsets(g, n))


def test_enumeration_matches_brute_force_on_small_fixtures():
    for name in ("lima-like", "manila-like", "jakarta-like", "guadalupe-like", "lucy-like"):
        g = builtin_profile(name).graph
        assert g.n_qubits <= 16
        for n in (2, 3, 4, 5):
            assert connected_subsets(g, n) == brute_force_subsets(g, n)


@pytest.mark.parametrize("name,counts", sorted(FIXTURE_COUNTS.items()))
def test_fixture_counts(name, counts):
    g = builtin_profile(name).graph
    for n, expected in zip((3, 4, 5), counts):
        assert subset_count(g, n) == expected, (name, n)


def test_large_fixture_count():
    g = builtin_profile("washington-like").graph
    assert g.n_qubits == 127
    assert subset_count(g, 4) == 272


def test_all_to_all_counts_are_binomial():
    import math

    g = CouplingGraph.all_to_all(8)
    for n in range(1, 9):
        assert subset_count(g, n) == math.comb(8, n)


def test_subset_count_boundaries():
    g = builtin_profile("lima-like").graph
    assert subset_count(g, 1) == 5
    assert subset_count(g, 5) == 1
    with pytest.raises(ValueError):
        subset_count(g, 0)
    with pytest.raises(ValueError):
        connected_subsets(g, 6)


def test_coupling_graph_validation():
    with pytest.raises(ValueError):
        CouplingGraph(n_qubits=2, edges=frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        CouplingGraph(n_qubits=2, edges=frozenset({(0, 5)}))
    with pytest.raises(ValueError):
        CouplingGraph(n_qubits=3, edges=frozenset({(2, 1)}))
    g = CouplingGraph.from_pairs(3, [(2, 1)])  # normalizes ordering
    assert g.has_edge(1, 2) and g.has_edge(2, 1)
    assert not g.has_edge(0, 1)


def test_connected_subset_and_distances_match_networkx():
    rng = np.random.default_rng(62)
    for _ in range(20):
        n = int(rng.integers(3, 10))
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.4]
        g = CouplingGraph.from_pairs(n, pairs)
        nxg = nx.Graph()
        nxg.add_nodes_from(range(n))
        nxg.add_edges_from(pairs)
        subset = tuple(sorted(rng.choice(n, size=min(3, n), replace=False).tolist()))
        assert g.is_connected_subset(subset) == nx.is_connected(nxg.subgraph(subset))
        lengths = nx.single_source_shortest_path_length(nxg, 0)
        dist = g.shortest_path_lengths(0)
        for v in range(n):
            assert dist[v] == lengths.get(v, n + 1)


def test_builtin_profiles_load_and_validate():
    names = builtin_profile_names()
    assert len(names) >= 10
    for name in names:
        p = builtin_profile(name)
        assert p.graph.n_qubits >= 2
        assert 0.0 <= p.noise.f2 <= 1.0
        if name not in ("harmony-like", "h1-2-like", "ideal-alltoall-12q", "depolarizing-alltoall-12q"):
            # hardware lattices are sparse
            assert len(p.graph.edges) < p.graph.n_qubits * (p.graph.n_qubits - 1) // 2
    with pytest.raises(ProfileError):
        builtin_profile("missing-device")


def test_profile_dict_validation():
    good = {
        "schema": 1,
        "name": "toy",
        "n_qubits": 3,
        "edges": [[0, 1], [1, 2]],
        "gateset_family": "octagonal",
        "f1": 0.999,
        "f2": 0.99,
        "f_spam": 0.98,
    }
    p = profile_from_dict(good)
    assert p.noise == NoiseModel(f2=0.99, f1=0.999, f_spam=0.98)
    for key in ("schema", "name", "edges", "f2"):
        bad = dict(good)
        del bad[key]
        with pytest.raises(ProfileError):
            profile_from_dict(bad)
    with pytest.raises(ProfileError):
        profile_from_dict({**good, "schema": 2})
    with pytest.raises(ProfileError):
        profile_from_dict({**good, "gateset_family": "unknown"})
    with pytest.raises(ProfileError):
        profile_from_dict({**good, "f2": 1.4})
    with pytest.raises(ProfileError):
        profile_from_dict({**good, "edges": [[0, 9]]})


def test_load_profile_from_file(tmp_path):
    path = tmp_path / "dev.json"
    path.write_text(
        json.dumps(
            {
                "schema": 1,
                "name": "filedev",
                "n_qubits": 2,
                "edges": [[0, 1]],
                "gateset_family": "ring-ecr",
                "f1": 1.0,
                "f2": 1.0,
                "f_spam": 1.0,
            }
        )
    )
    assert load_profile(path).name == "filedev"
    assert resolve_profile(str(path)).name == "filedev"
    assert resolve_profile("lima-like").name.startswith("lima")
    with pytest.raises(ProfileError):
        load_profile(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ProfileError):
        load_profile(bad)


def test_device_profile_rejects_unknown_family():
    g = CouplingGraph.from_pairs(2, [(0, 1)])
    with pytest.raises(Exception):
        DeviceProfile(name="x", graph=g, gateset_family="bogus", noise=NoiseModel())
