"""Statevector simulation: ideal output distributions, heavy-output sets, and
shot sampling under a stochastic-Pauli + SPAM noise model.

Noise semantics: after each gate, with probability (1 - f_arity) a uniformly
random non-identity Pauli is applied to that gate's qubits; before readout
each bit flips independently with probability (1 - f_spam).  A noiseless
model reduces to exact multinomial sampling from the ideal distribution.

Per-shot randomness is keyed by (seed key..., shot index) so results do not
depend on scheduling or batching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .circuit import CapacityError, Circuit, apply_gate_to_axes
from .gates import GateKind, matrix_of

MAX_SIM_QUBITS = 20

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1, -1]).astype(complex)
_PAULIS_1Q = [_X, _Y, _Z]
# All 15 non-identity two-qubit Paulis, in (I,X,Y,Z) x (I,X,Y,Z) order.
_PAULIS_2Q = [
    np.kron(a, b)
    for a in (np.eye(2, dtype=complex), _X, _Y, _Z)
    for b in (np.eye(2, dtype=complex), _X, _Y, _Z)
][1:]


@dataclass(frozen=True)
class Distribution:
    """Ideal output probabilities over all 2^m bitstrings."""

    m: int
    probs: np.ndarray

    def __post_init__(self):
        if self.probs.shape != (2**self.m,):
            raise ValueError("probability vector length must be 2^m")
        if abs(float(self.probs.sum()) - 1.0) > 1e-10:
            raise ValueError("probabilities must sum to 1")


@dataclass(frozen=True)
class HeavySet:
    """Bitstrings whose ideal probability strictly exceeds the median."""

    m: int
    members: frozenset[str]
    p_median: float


@dataclass(frozen=True)
class NoiseModel:
    """Mean two-qubit, one-qubit, and SPAM fidelities, each in [0, 1]."""

    f2: float = 1.0
    f1: float = 1.0
    f_spam: float = 1.0

    def __post_init__(self):
        for name in ("f2", "f1", "f_spam"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @property
    def noiseless(self) -> bool:
        return self.f2 == self.f1 == self.f_spam == 1.0


@dataclass(frozen=True)
class Counts:
    """Measured shot tallies per bitstring."""

    counts: Mapping[str, int]
    shots: int
    circuit_index: int | None = None

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to shots")


def bitstring_of(index: int, m: int) -> str:
    """Index-to-bitstring with qubit 0 as the leftmost character."""
    return format(index, f"0{m}b")


def statevector(c: Circuit) -> np.ndarray:
    """Exact statevector of the circuit applied to |0...0>."""
    if c.width > MAX_SIM_QUBITS:
        raise CapacityError(
            f"statevector limited to {MAX_SIM_QUBITS} qubits, got {c.width}"
        )
    psi = np.zeros((2,) * c.width, dtype=complex)
    psi[(0,) * c.width] = 1.0
    for op in c.ops:
        if op.gate in (GateKind.ID, GateKind.DELAY):
            continue
        psi = apply_gate_to_axes(psi, matrix_of(op.gate, op.params), op.qubits)
    return psi.reshape(-1)


def ideal_distribution(c: Circuit) -> Distribution:
    """p(x) = |<x|U|0>|^2 from statevector evolution."""
    amps = statevector(c)
    probs = np.abs(amps) ** 2
    return Distribution(m=c.width, probs=probs / probs.sum())


def heavy_set(dist: Distribution) -> HeavySet:
    """Median split: p_median is the midpoint of the two central order
    statistics; members are the strictly-greater bitstrings."""
    s = np.sort(dist.probs)
    half = len(s) // 2
    p_median = float((s[half - 1] + s[half]) / 2)
    members = frozenset(
        bitstring_of(i, dist.m) for i, p in enumerate(dist.probs) if p > p_median
    )
    return HeavySet(m=dist.m, members=members, p_median=p_median)


def ideal_hop(dist: Distribution, hs: HeavySet) -> float:
    """Total ideal probability mass of the heavy-output set."""
    return float(sum(dist.probs[int(b, 2)] for b in hs.members))


def _shot_rng(seed_key: tuple[int, ...], shot: int) -> np.random.Generator:
    return np.random.default_rng([*seed_key, shot])


def _apply_single(state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], m: int) -> np.ndarray:
    return apply_gate_to_axes(state.reshape((2,) * m), mat, qubits).reshape(-1)


def sample_counts(
    c: Circuit,
    shots: int,
    noise: NoiseModel,
    seed_key: tuple[int, ...],
    circuit_index: int | None = None,
) -> Counts:
    """Sample measurement counts for a circuit under the noise model.

    ``seed_key`` identifies the circuit execution; shot s draws from the
    generator keyed (*seed_key, s).
    """
    if c.width > MAX_SIM_QUBITS:
        raise CapacityError(
            f"sampling limited to {MAX_SIM_QUBITS} qubits, got {c.width}"
        )
    m = c.width
    if shots == 0:
        return Counts(counts={}, shots=0, circuit_index=circuit_index)
    if noise.noiseless:
        probs = ideal_distribution(c).probs
        rng = np.random.default_rng(list(seed_key))
        draws = rng.multinomial(shots, probs)
        tally = {
            bitstring_of(i, m): int(n) for i, n in enumerate(draws) if n > 0
        }
        return Counts(counts=tally, shots=shots, circuit_index=circuit_index)

    gates = [op for op in c.ops if op.gate not in (GateKind.ID, GateKind.DELAY)]
    n_gates = len(gates)
    p_err = {1: 1.0 - noise.f1, 2: 1.0 - noise.f2}
    p_flip = 1.0 - noise.f_spam

    # Pre-draw every shot's randomness in a fixed order so batching cannot
    # change the outcome: per gate an error uniform and a Pauli-choice
    # uniform, then one measurement uniform, then m SPAM uniforms.
    err_u = np.empty((shots, n_gates))
    pauli_u = np.empty((shots, n_gates))
    meas_u = np.empty(shots)
    spam_u = np.empty((shots, m))
    for s in range(shots):
        rng = _shot_rng(seed_key, s)
        err_u[s] = rng.random(n_gates)
        pauli_u[s] = rng.random(n_gates)
        meas_u[s] = rng.random()
        spam_u[s] = rng.random(m)

    dim = 2**m
    states = np.zeros((shots, dim), dtype=complex)
    states[:, 0] = 1.0
    batch = states.reshape((shots,) + (2,) * m)
    for k, op in enumerate(gates):
        mat = matrix_of(op.gate, op.params)
        axes = tuple(q + 1 for q in op.qubits)
        batch = apply_gate_to_axes(batch, mat, axes)
        p = p_err[op.gate.arity]
        if p <= 0.0:
            continue
        hit = np.nonzero(err_u[:, k] < p)[0]
        if hit.size == 0:
            continue
        paulis = _PAULIS_2Q if op.gate.arity == 2 else _PAULIS_1Q
        flat = batch.reshape(shots, dim)
        for s in hit:
            choice = paulis[int(pauli_u[s, k] * len(paulis))]
            flat[s] = _apply_single(flat[s], choice, op.qubits, m)
        batch = flat.reshape((shots,) + (2,) * m)

    flat = batch.reshape(shots, dim)
    probs = np.abs(flat) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    cdf = np.cumsum(probs, axis=1)
    tally: dict[str, int] = {}
    for s in range(shots):
        idx = int(np.searchsorted(cdf[s], meas_u[s], side="right"))
        idx = min(idx, dim - 1)
        if p_flip > 0.0:
            flips = spam_u[s] < p_flip
            for q in range(m):
                if flips[q]:
                    idx ^= 1 << (m - 1 - q)
        b = bitstring_of(idx, m)
        tally[b] = tally.get(b, 0) + 1
    return Counts(counts=tally, shots=shots, circuit_index=circuit_index)


def counts_to_json(counts: Counts) -> dict:
    """JSON-ready form: {bitstring: count} plus shots and circuit index."""
    return {
        "schema": 1,
        "shots": counts.shots,
        "circuit_index": counts.circuit_index,
        "counts": dict(sorted(counts.counts.items())),
    }


def counts_from_json(obj: dict) -> Counts:
    return Counts(
        counts={str(k): int(v) for k, v in obj["counts"].items()},
        shots=int(obj["shots"]),
        circuit_index=obj.get("circuit_index"),
    )
