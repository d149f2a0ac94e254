"""Compilation to a device: two-qubit block extraction, SWAP routing on the
coupling graph, three-entangler block decomposition into the native
two-qubit gate, and native single-qubit resynthesis.

Compiled circuits act on local indices 0..k-1; ``physical_qubits`` maps each
local index back to the device qubit it occupies, and ``final_layout`` maps
logical circuit qubits to local indices after routing so measurement bits
can be reported in logical order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kak
from .circuit import Circuit, Operation, gate_census, measured_all
from .gates import TWO_QUBIT_TARGET, GateKind, matrix_of, native_gateset
from .topology import CouplingGraph, DeviceProfile, connected_subsets

_SWAP_MAT = matrix_of(GateKind.SWAP)
_I2 = np.eye(2, dtype=complex)

MAX_RESHUFFLES = 16


class CompileError(ValueError):
    pass


class LayoutError(CompileError):
    pass


@dataclass(frozen=True)
class CompileRequest:
    circuit: Circuit
    profile: DeviceProfile
    qubit_subset: tuple[int, ...] | None = None
    allow_spill: bool = False
    seed: int = 0


@dataclass(frozen=True)
class CompiledCircuit:
    """Result of compilation.

    ``circuit`` uses local indices; ``physical_qubits[i]`` is the device
    qubit for local index i.  ``initial_layout``/``final_layout`` map logical
    qubits of the source circuit to local indices.
    """

    circuit: Circuit
    physical_qubits: tuple[int, ...]
    initial_layout: tuple[int, ...]
    final_layout: tuple[int, ...]
    swap_count: int
    census: dict


# ---------------------------------------------------------------------------
# Two-qubit block extraction

@dataclass
class _Block:
    qubits: tuple[int, ...]  # logical, one or two entries (two: sorted)
    matrix: np.ndarray


def _embed_1q(mat: np.ndarray, first: bool) -> np.ndarray:
    return np.kron(mat, _I2) if first else np.kron(_I2, mat)


def extract_blocks(c: Circuit) -> list[_Block]:
    """Group ops into maximal same-pair two-qubit blocks plus leftover
    single-qubit blocks, preserving dependency order."""
    order: list[_Block] = []
    open_pair: dict[tuple[int, int], _Block] = {}
    on_pair: dict[int, tuple[int, int]] = {}
    pending: dict[int, np.ndarray] = {}

    def close(pair: tuple[int, int]):
        order.append(open_pair.pop(pair))
        for q in pair:
            del on_pair[q]

    boundaries = set(c.layer_boundaries or ())
    for op_index, op in enumerate(c.ops):
        if op_index in boundaries:
            # Blocks never span an annotated layer boundary, so per-layer
            # entangler counts stay 3 per block even for repeated pairs.
            for pair in list(open_pair):
                close(pair)
        if op.gate in (GateKind.ID, GateKind.DELAY):
            continue
        mat = matrix_of(op.gate, op.params)
        if op.gate.arity == 1:
            (q,) = op.qubits
            if q in on_pair:
                blk = open_pair[on_pair[q]]
                blk.matrix = _embed_1q(mat, q == blk.qubits[0]) @ blk.matrix
            else:
                pending[q] = mat @ pending.get(q, _I2)
            continue
        a, b = op.qubits
        pair = (min(a, b), max(a, b))
        if (a, b) != pair:
            mat = _SWAP_MAT @ mat @ _SWAP_MAT
        if on_pair.get(a) == on_pair.get(b) == pair and pair in open_pair:
            open_pair[pair].matrix = mat @ open_pair[pair].matrix
            continue
        for q in (a, b):
            if q in on_pair:
                close(on_pair[q])
        start = np.kron(pending.pop(pair[0], _I2), pending.pop(pair[1], _I2))
        blk = _Block(qubits=pair, matrix=mat @ start)
        open_pair[pair] = blk
        on_pair[a] = on_pair[b] = pair
    for pair in list(open_pair):
        close(pair)
    for q in sorted(pending):
        order.append(_Block(qubits=(q,), matrix=pending[q]))
    return order


# ---------------------------------------------------------------------------
# Routing

def _local_graph(g: CouplingGraph, nodes: tuple[int, ...]) -> CouplingGraph:
    index = {p: i for i, p in enumerate(nodes)}
    edges = [
        (index[a], index[b]) for a, b in g.edges if a in index and b in index
    ]
    return CouplingGraph.from_pairs(len(nodes), edges)


def _all_pairs_dist(g: CouplingGraph) -> list[list[int]]:
    return [g.shortest_path_lengths(v) for v in range(g.n_qubits)]


def route_blocks(
    blocks: list[_Block],
    local: CouplingGraph,
    layout0: tuple[int, ...],
) -> tuple[list[tuple], tuple[int, ...], int] | None:
    """Insert SWAPs so every two-qubit block lands on an edge.

    layout0 maps logical qubit -> local node.  Returns (routed item list,
    final layout, swap count) or None if some pair is unreachable.  Items are
    ('block', (na, nb) or (n,), matrix) and ('swap', (na, nb)).
    """
    dist = _all_pairs_dist(local)
    pos = list(layout0)  # logical -> node
    node_of = {n: None for n in range(local.n_qubits)}
    for logical, n in enumerate(pos):
        node_of[n] = logical
    out: list[tuple] = []
    swaps = 0
    two_q = [i for i, b in enumerate(blocks) if len(b.qubits) == 2]
    next_2q = {}
    for j, i in enumerate(two_q):
        next_2q[i] = blocks[two_q[j + 1]].qubits if j + 1 < len(two_q) else None

    for i, blk in enumerate(blocks):
        if len(blk.qubits) == 1:
            out.append(("block", (pos[blk.qubits[0]],), blk.matrix))
            continue
        la, lb = blk.qubits
        if dist[pos[la]][pos[lb]] > local.n_qubits:
            return None
        while dist[pos[la]][pos[lb]] > 1:
            na, nb = pos[la], pos[lb]
            # Candidate swaps: move either endpoint to a neighbor that gets
            # it closer; score by distance after the swap plus a one-block
            # lookahead, ties by lowest node index pair.
            cands = []
            adj = local.adjacency()
            for src, dst_target in ((na, nb), (nb, na)):
                for nbr in sorted(adj[src]):
                    if dist[nbr][dst_target] >= dist[src][dst_target]:
                        continue
                    # distance of the current pair after swapping src<->nbr
                    d_now = dist[nbr][dst_target]
                    d_next = 0
                    nxt = next_2q[i]
                    if nxt is not None:
                        p = {q: pos[q] for q in nxt}
                        for q in nxt:
                            if pos[q] == src:
                                p[q] = nbr
                            elif pos[q] == nbr:
                                p[q] = src
                        d_next = dist[p[nxt[0]]][p[nxt[1]]]
                    cands.append((d_now, d_next, min(src, nbr), max(src, nbr), src, nbr))
            if not cands:
                return None
            cands.sort()
            _, _, _, _, src, nbr = cands[0]
            out.append(("swap", (min(src, nbr), max(src, nbr))))
            swaps += 1
            qa, qb = node_of.get(src), node_of.get(nbr)
            if qa is not None:
                pos[qa] = nbr
            if qb is not None:
                pos[qb] = src
            node_of[src], node_of[nbr] = qb, qa
        out.append(("block", (pos[la], pos[lb]), blk.matrix))
    return out, tuple(pos), swaps


# ---------------------------------------------------------------------------
# Native-gate emission

def _emit_native(
    routed: list[tuple],
    width: int,
    family: str,
    seed: int,
) -> tuple[list[Operation], int]:
    """Decompose routed blocks/swaps into native gates, merging single-qubit
    runs before resynthesis.  Returns (ops, two-qubit gate count)."""
    gateset = native_gateset(family)
    family_1q = frozenset(k for k in gateset if k.arity == 1) | (
        {GateKind.U3} if GateKind.U3 in gateset else frozenset()
    )
    target = TWO_QUBIT_TARGET[family]
    ops: list[Operation] = []
    pending: dict[int, np.ndarray] = {}
    two_count = 0

    def push_1q(q: int, mat: np.ndarray):
        pending[q] = mat @ pending.get(q, _I2)

    def flush(q: int):
        mat = pending.pop(q, None)
        if mat is None:
            return
        for kind, params in kak.synthesize_1q_ops(mat, family_1q):
            ops.append(Operation(kind, tuple(params), (q,)))

    for i, item in enumerate(routed):
        if item[0] == "block" and len(item[1]) == 1:
            push_1q(item[1][0], item[2])
            continue
        if item[0] == "swap":
            na, nb = item[1]
            matrix = _SWAP_MAT
        else:
            (na, nb), matrix = item[1], item[2]
        elements = kak.decompose_block(matrix, target, seed=seed + i)
        wires = (na, nb)
        for el in elements:
            if el[0] == "1q":
                push_1q(wires[el[1]], el[2])
            else:
                _, kind, params, (x, y) = el
                flush(wires[x])
                flush(wires[y])
                ops.append(Operation(kind, tuple(params), (wires[x], wires[y])))
                two_count += 1
    for q in sorted(pending):
        flush(q)
    return ops, two_count


# ---------------------------------------------------------------------------
# Pipeline

def _auto_subset(g: CouplingGraph, m: int) -> tuple[int, ...]:
    if m > g.n_qubits:
        raise LayoutError(f"circuit width {m} exceeds device size {g.n_qubits}")
    subs = connected_subsets(g, m)
    if not subs:
        raise LayoutError(f"no connected subset of size {m} on this device")
    return subs[0]


def auto_subset(g: CouplingGraph, m: int) -> tuple[int, ...]:
    """The lexicographically first connected size-m qubit subset."""
    return _auto_subset(g, m)


def compile_to_device(req: CompileRequest) -> CompiledCircuit:
    """Full pipeline: extract blocks, route, decompose, resynthesize.

    If the routed SWAP count exceeds m times the layer count, the subset
    ordering is reshuffled (up to 16 retries, keeping the best), so results
    are deterministic given the seed.
    """
    c = req.circuit
    g = req.profile.graph
    m = c.width
    subset = req.qubit_subset if req.qubit_subset is not None else _auto_subset(g, m)
    if len(subset) != m:
        raise LayoutError(f"subset size {len(subset)} != circuit width {m}")
    if len(set(subset)) != m or any(not 0 <= q < g.n_qubits for q in subset):
        raise LayoutError(f"invalid qubit subset {subset}")
    if req.allow_spill:
        nodes = tuple(range(g.n_qubits))
    else:
        nodes = tuple(sorted(subset))
        if not g.is_connected_subset(nodes):
            raise LayoutError(
                f"subset {nodes} does not induce a connected subgraph "
                f"(pass allow_spill to route through outside qubits)"
            )
    local = _local_graph(g, nodes)
    node_index = {p: i for i, p in enumerate(nodes)}

    blocks = extract_blocks(c)
    n_layers = c.num_layers or max(
        1, sum(1 for b in blocks if len(b.qubits) == 2) // max(1, m // 2)
    )
    threshold = m * n_layers

    order = tuple(subset)
    rng = np.random.default_rng([req.seed, 0xC0])
    best = None
    for _ in range(MAX_RESHUFFLES + 1):
        layout0 = tuple(node_index[p] for p in order)
        routed = route_blocks(blocks, local, layout0)
        if routed is None:
            raise LayoutError("some qubit pair is unreachable on the routed graph")
        items, final_pos, swaps = routed
        if best is None or swaps < best[3]:
            best = (items, layout0, final_pos, swaps)
        if swaps <= threshold:
            break
        order = tuple(rng.permutation(list(order)))
    items, layout0, final_pos, swaps = best

    ops, _ = _emit_native(items, local.n_qubits, req.profile.gateset_family, req.seed)
    compiled = Circuit(
        width=local.n_qubits,
        ops=tuple(ops),
        measured=measured_all(local.n_qubits),
        meta={
            "seed": req.seed,
            "source": "compiled",
            "profile": req.profile.name,
        },
    )
    bad_edges = [
        op
        for op in ops
        if op.gate.arity == 2
        and not g.has_edge(nodes[op.qubits[0]], nodes[op.qubits[1]])
    ]
    if bad_edges:  # pragma: no cover - defensive check
        raise CompileError(f"internal error: {len(bad_edges)} ops off-graph")
    return CompiledCircuit(
        circuit=compiled,
        physical_qubits=nodes,
        initial_layout=layout0,
        final_layout=final_pos,
        swap_count=swaps,
        census=gate_census(compiled),
    )


def decompose_su4(U: np.ndarray, target_2q: GateKind, seed: int = 0) -> list[Operation]:
    """Decompose a 4x4 unitary into exactly three target gates plus U3 layers
    on wires (0, 1); composite equals U up to global phase."""
    ops: list[Operation] = []
    for el in kak.decompose_block(np.asarray(U, dtype=complex), target_2q, seed=seed):
        if el[0] == "1q":
            ops.append(Operation(GateKind.U3, kak.u3_angles(el[2]), (el[1],)))
        else:
            _, kind, params, wires = el
            ops.append(Operation(kind, tuple(params), wires))
    return ops


def synthesize_1q(V: np.ndarray, family: str) -> list[Operation]:
    """Express a 2x2 unitary in the family's native one-qubit gates."""
    gateset = native_gateset(family)
    family_1q = frozenset(k for k in gateset if k.arity == 1)
    return [
        Operation(kind, tuple(params), (0,))
        for kind, params in kak.synthesize_1q_ops(np.asarray(V, dtype=complex), family_1q)
    ]
