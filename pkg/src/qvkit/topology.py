"""Device profiles (coupling graph, gateset family, fidelities) and
connected-qubit-subset enumeration.

Enumeration uses the grow-from-each-root scheme with exclusive-neighborhood
pruning, which emits every connected vertex set exactly once with polynomial
delay, so large chips never require power-set scans.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .gates import native_gateset
from .sim import NoiseModel


class ProfileError(ValueError):
    """Raised when a device profile file is missing or malformed."""


@dataclass(frozen=True)
class CouplingGraph:
    """Undirected coupling map: qubit count plus edge set."""

    n_qubits: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise ValueError(f"edge ({a}, {b}) out of range")
            if a > b:
                raise ValueError(f"edge ({a}, {b}) must be stored low-high")

    @staticmethod
    def from_pairs(n_qubits: int, pairs) -> "CouplingGraph":
        edges = frozenset((min(a, b), max(a, b)) for a, b in pairs)
        return CouplingGraph(n_qubits=n_qubits, edges=edges)

    @staticmethod
    def all_to_all(n_qubits: int) -> "CouplingGraph":
        return CouplingGraph.from_pairs(
            n_qubits, [(a, b) for a in range(n_qubits) for b in range(a + 1, n_qubits)]
        )

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n_qubits)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def is_connected_subset(self, subset) -> bool:
        """BFS connectivity check of the induced subgraph."""
        nodes = set(subset)
        if not nodes:
            return False
        adj = self.adjacency()
        seen = set()
        stack = [next(iter(nodes))]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj[v] & nodes - seen)
        return seen == nodes

    def shortest_path_lengths(self, source: int) -> list[int]:
        """BFS distances from source (unreachable: a large sentinel)."""
        adj = self.adjacency()
        dist = [self.n_qubits + 1] * self.n_qubits
        dist[source] = 0
        frontier = [source]
        while frontier:
            nxt = []
            for v in frontier:
                for w in adj[v]:
                    if dist[w] > dist[v] + 1:
                        dist[w] = dist[v] + 1
                        nxt.append(w)
            frontier = nxt
        return dist


@dataclass(frozen=True)
class DeviceProfile:
    """A named device: coupling graph, gateset family, mean fidelities."""

    name: str
    graph: CouplingGraph
    gateset_family: str
    noise: NoiseModel
    vendor_qv: int | None = None

    def __post_init__(self):
        native_gateset(self.gateset_family)  # raises on unknown family


def _enumerate_connected(adj: list[set[int]], n: int, sink) -> None:
    """Emit each size-n connected vertex set exactly once via ``sink``.

    Subsets are generated per root vertex v = min(subset); candidates are
    only ever vertices > v, and each extension vertex is considered once
    (taken or permanently excluded), which prevents duplicates.
    """
    n_vertices = len(adj)

    def grow(subset: list[int], ext: list[int], seen: set[int], root: int):
        if len(subset) == n:
            sink(tuple(subset))
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            new = [u for u in adj[w] if u > root and u not in seen]
            seen.update(new)
            subset.append(w)
            grow(subset, ext + new, seen, root)
            subset.pop()
            # w stays in `seen`: later branches must not re-add it.
            # Vertices reachable only through w must become available again.
            for u in new:
                seen.discard(u)

    for v in range(n_vertices):
        start = sorted(u for u in adj[v] if u > v)
        grow([v], start, set(start) | {v}, v)


def connected_subsets(g: CouplingGraph, n: int) -> list[tuple[int, ...]]:
    """All size-n vertex subsets inducing a connected subgraph, sorted."""
    if not 1 <= n <= g.n_qubits:
        raise ValueError(f"subset size {n} out of range 1..{g.n_qubits}")
    adj = g.adjacency()
    out: list[tuple[int, ...]] = []
    _enumerate_connected(adj, n, lambda s: out.append(tuple(sorted(s))))
    return sorted(out)


def subset_count(g: CouplingGraph, n: int) -> int:
    """|connected_subsets(g, n)| without materializing the list."""
    if not 1 <= n <= g.n_qubits:
        raise ValueError(f"subset size {n} out of range 1..{g.n_qubits}")
    adj = g.adjacency()
    count = [0]

    def sink(_):
        count[0] += 1

    _enumerate_connected(adj, n, sink)
    return count[0]


# ---------------------------------------------------------------------------
# Profile files

_REQUIRED_FIELDS = {
    "schema": int,
    "name": str,
    "n_qubits": int,
    "edges": list,
    "gateset_family": str,
    "f1": (int, float),
    "f2": (int, float),
    "f_spam": (int, float),
}


def profile_from_dict(obj: dict, origin: str = "<dict>") -> DeviceProfile:
    if not isinstance(obj, dict):
        raise ProfileError(f"{origin}: profile must be a JSON object")
    bad = [
        k
        for k, t in _REQUIRED_FIELDS.items()
        if k not in obj or not isinstance(obj[k], t) or isinstance(obj[k], bool)
    ]
    if bad:
        raise ProfileError(f"{origin}: missing or invalid fields: {', '.join(sorted(bad))}")
    if obj["schema"] != 1:
        raise ProfileError(f"{origin}: unsupported schema version {obj['schema']}")
    try:
        graph = CouplingGraph.from_pairs(obj["n_qubits"], obj["edges"])
        noise = NoiseModel(f2=obj["f2"], f1=obj["f1"], f_spam=obj["f_spam"])
        return DeviceProfile(
            name=obj["name"],
            graph=graph,
            gateset_family=obj["gateset_family"],
            noise=noise,
            vendor_qv=obj.get("vendor_qv"),
        )
    except ValueError as exc:
        raise ProfileError(f"{origin}: {exc}") from None


def load_profile(path: str | Path) -> DeviceProfile:
    """Load and validate a profile JSON file."""
    path = Path(path)
    if not path.exists():
        raise ProfileError(f"profile file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProfileError(f"{path}: malformed JSON: {exc}") from None
    return profile_from_dict(obj, origin=str(path))


def builtin_profile_names() -> list[str]:
    files = resources.files("qvkit").joinpath("profiles")
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


def builtin_profile(name: str) -> DeviceProfile:
    """Load one of the shipped fixture profiles by name."""
    res = resources.files("qvkit").joinpath("profiles").joinpath(f"{name}.json")
    if not res.is_file():
        raise ProfileError(
            f"unknown builtin profile {name!r}; available: {', '.join(builtin_profile_names())}"
        )
    obj = json.loads(res.read_text(encoding="utf-8"))
    return profile_from_dict(obj, origin=f"builtin:{name}")


def resolve_profile(spec: str) -> DeviceProfile:
    """Accept either a builtin profile name or a path to a JSON file."""
    if Path(spec).exists():
        return load_profile(spec)
    return builtin_profile(spec)
