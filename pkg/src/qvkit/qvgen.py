"""Model-circuit generation: d layers, each a uniform random qubit
permutation followed by floor(m/2) Haar-random SU(4) blocks on consecutive
permuted pairs.  Every block is emitted in a fixed raw template of 3 CX plus
8 U3 gates so generated suites contain only CX and U3.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kak
from .circuit import Circuit, Operation, measured_all, serialize
from .gates import GateKind


@dataclass(frozen=True)
class QvSpec:
    """Suite parameters: width m, depth d (defaults to m), size, base seed."""

    m: int
    d: int | None = None
    count: int = 1000
    base_seed: int = 0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("width m must be >= 2")
        if self.depth < 1:
            raise ValueError("depth d must be >= 1")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    @property
    def depth(self) -> int:
        return self.m if self.d is None else self.d


def rng_stream(base_seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator keyed by (base_seed, *key); identical keys give
    identical streams regardless of scheduling."""
    return np.random.default_rng([base_seed, *key])


def sample_haar_su4(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed SU(4) sample.

    QR of a complex Gaussian matrix with the R-diagonal phase correction gives
    Haar U(4); dividing by det^(1/4) lands in SU(4).
    """
    z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    det = np.linalg.det(q)
    return q * det ** (-1 / 4)


def sample_permutation(rng: np.random.Generator, m: int) -> tuple[int, ...]:
    """Uniform permutation of {0..m-1} via the Fisher-Yates shuffle."""
    perm = list(range(m))
    for i in range(m - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return tuple(perm)


def layer_data(
    spec: QvSpec, circuit_index: int
) -> list[tuple[tuple[int, ...], list[np.ndarray]]]:
    """The sampled (permutation, SU(4) blocks) per layer for one circuit.

    This is the source of truth the emitted circuit is built from; tests use
    it to rebuild the circuit unitary independently.
    """
    rng = rng_stream(spec.base_seed, circuit_index)
    layers = []
    for _ in range(spec.depth):
        perm = sample_permutation(rng, spec.m)
        blocks = [sample_haar_su4(rng) for _ in range(spec.m // 2)]
        layers.append((perm, blocks))
    return layers


def _block_template_ops(U: np.ndarray, pair: tuple[int, int]) -> list[Operation]:
    """Emit one SU(4) block as 8 U3 + 3 CX on the given qubit pair."""
    elements = kak.decompose_block(U, GateKind.CX)
    # Collapse into alternating [1q layer, cx, ...] form: 4 layers of 2 wires.
    layers: list[list[np.ndarray]] = [[np.eye(2, dtype=complex) for _ in range(2)]]
    entanglers: list[tuple[int, int]] = []
    for el in elements:
        if el[0] == "1q":
            _, wire, mat = el
            layers[-1][wire] = mat @ layers[-1][wire]
        else:
            entanglers.append(el[3])
            layers.append([np.eye(2, dtype=complex) for _ in range(2)])
    ops: list[Operation] = []
    for i, (top, bot) in enumerate(layers):
        for wire, mat in ((0, top), (1, bot)):
            theta, phi, lam = kak.u3_angles(mat)
            ops.append(Operation(GateKind.U3, (theta, phi, lam), (pair[wire],)))
        if i < len(entanglers):
            a, b = entanglers[i]
            ops.append(Operation(GateKind.CX, (), (pair[a], pair[b])))
    return ops


def generate_qv_circuit(spec: QvSpec, circuit_index: int) -> Circuit:
    """Generate one model circuit; same (base_seed, index) gives the same
    circuit.  For odd m exactly one qubit idles per layer."""
    ops: list[Operation] = []
    boundaries: list[int] = []
    for perm, blocks in layer_data(spec, circuit_index):
        for i, U in enumerate(blocks):
            pair = (perm[2 * i], perm[2 * i + 1])
            ops.extend(_block_template_ops(U, pair))
        boundaries.append(len(ops))
    return Circuit(
        width=spec.m,
        ops=tuple(ops),
        measured=measured_all(spec.m),
        layer_boundaries=tuple(boundaries),
        meta={
            "seed": spec.base_seed,
            "circuit_index": circuit_index,
            "source": "generated",
        },
    )


def generate_suite(spec: QvSpec) -> list[Circuit]:
    """All ``spec.count`` circuits, keyed by index; order-independent."""
    return [generate_qv_circuit(spec, i) for i in range(spec.count)]


def circuit_filename(index: int) -> str:
    return f"circuit_{index:05d}.qasm"


def render_suite(spec: QvSpec) -> tuple[dict[str, str], dict]:
    """Serialize every circuit of the suite in memory.

    Returns ({filename: text}, manifest); the manifest hash covers all file
    bodies in index order.
    """
    digest = hashlib.sha256()
    files: dict[str, str] = {}
    for i in range(spec.count):
        text = serialize(generate_qv_circuit(spec, i))
        files[circuit_filename(i)] = text
        digest.update(text.encode())
    manifest = {
        "schema": 1,
        "m": spec.m,
        "d": spec.depth,
        "count": spec.count,
        "base_seed": spec.base_seed,
        "files": list(files),
        "sha256": digest.hexdigest(),
    }
    return files, manifest


def write_suite(spec: QvSpec, outdir: str | Path) -> dict:
    """Write one serialized circuit file per index plus a JSON manifest.

    Returns the manifest (also written as manifest.json).  Idempotent: the
    same spec always produces byte-identical files.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files, manifest = render_suite(spec)
    for name, text in files.items():
        (outdir / name).write_bytes(text.encode())
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
