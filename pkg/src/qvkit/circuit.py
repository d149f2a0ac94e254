"""Circuit intermediate representation, dense unitary oracle, and text format.

Bit-order convention: qubit 0 is the leftmost character of a serialized
bitstring and the most significant bit of statevector indices.  Heavy-output
comparisons are bit-order-sensitive, so this convention is applied everywhere.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .gates import GateKind, UnknownGateError, matrix_of

MAX_DENSE_QUBITS = 12


class CircuitError(ValueError):
    pass


class CapacityError(CircuitError):
    pass


class ParseError(CircuitError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Operation:
    """A single gate application: kind, angle parameters, ordered qubits."""

    gate: GateKind
    params: tuple[float, ...]
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class Circuit:
    """An ordered list of operations on ``width`` qubits plus measurement flags.

    ``layer_boundaries``, when present, are cumulative op counts partitioning
    ``ops`` into contiguous layers (the last boundary equals ``len(ops)``).
    Circuits are immutable after construction.
    """

    width: int
    ops: tuple[Operation, ...]
    measured: tuple[bool, ...]
    layer_boundaries: tuple[int, ...] | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.width < 1:
            raise CircuitError("circuit width must be >= 1")
        if len(self.measured) != self.width:
            raise CircuitError("measured flags must have one entry per qubit")

    @property
    def num_layers(self) -> int | None:
        return len(self.layer_boundaries) if self.layer_boundaries else None

    def layers(self) -> list[tuple[Operation, ...]]:
        if not self.layer_boundaries:
            return [self.ops]
        out, start = [], 0
        for end in self.layer_boundaries:
            out.append(self.ops[start:end])
            start = end
        return out


def measured_all(width: int) -> tuple[bool, ...]:
    return (True,) * width


def validate(c: Circuit) -> list[str]:
    """Return all invariant violations (empty list means ok).  Never raises."""
    violations: list[str] = []
    for i, op in enumerate(c.ops):
        if len(op.qubits) != op.gate.arity:
            violations.append(
                f"op {i}: {op.gate.mnemonic} acts on {op.gate.arity} qubit(s), "
                f"got {len(op.qubits)}"
            )
        if len(set(op.qubits)) != len(op.qubits):
            violations.append(f"op {i}: duplicate qubits {op.qubits}")
        for q in op.qubits:
            if not 0 <= q < c.width:
                violations.append(f"op {i}: qubit {q} out of range for width {c.width}")
        if len(op.params) != op.gate.param_count:
            violations.append(
                f"op {i}: {op.gate.mnemonic} takes {op.gate.param_count} "
                f"parameter(s), got {len(op.params)}"
            )
    if c.layer_boundaries is not None:
        b = c.layer_boundaries
        if list(b) != sorted(set(b)) or (b and (b[0] <= 0 or b[-1] != len(c.ops))):
            violations.append(f"layer boundaries {b} do not partition {len(c.ops)} ops")
    return violations


# ---------------------------------------------------------------------------
# Dense linear algebra helpers

def apply_gate_to_axes(arr: np.ndarray, gate: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Apply a k-qubit gate matrix to the given length-2 axes of ``arr``.

    The gate's first qubit corresponds to ``axes[0]``.
    """
    k = len(axes)
    g = gate.reshape((2,) * (2 * k))
    arr = np.tensordot(g, arr, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(arr, tuple(range(k)), axes)


def _apply_op_dense(tensor: np.ndarray, op: Operation) -> np.ndarray:
    if op.gate in (GateKind.ID, GateKind.DELAY):
        return tensor
    mat = matrix_of(op.gate, op.params)
    return apply_gate_to_axes(tensor, mat, op.qubits)


def unitary_of(c: Circuit) -> np.ndarray:
    """Dense 2^m x 2^m unitary of the circuit (measurements ignored)."""
    if c.width > MAX_DENSE_QUBITS:
        raise CapacityError(
            f"dense unitary limited to {MAX_DENSE_QUBITS} qubits, got {c.width}"
        )
    bad = validate(c)
    if bad:
        raise CircuitError("; ".join(bad))
    dim = 2**c.width
    # Row index as m qubit axes, column index flattened on the last axis.
    tensor = np.eye(dim, dtype=complex).reshape((2,) * c.width + (dim,))
    for op in c.ops:
        tensor = _apply_op_dense(tensor, op)
    return tensor.reshape(dim, dim)


def gate_census(c: Circuit) -> dict[str, int]:
    """Count two- and one-qubit gates and the dependency depth.

    Delay gates are excluded from the one-qubit count and from the depth;
    measurements are never counted.
    """
    two = one = 0
    frontier = [0] * c.width
    for op in c.ops:
        if op.gate is GateKind.DELAY:
            continue
        if op.gate.arity == 2:
            two += 1
        else:
            one += 1
        level = 1 + max(frontier[q] for q in op.qubits)
        for q in op.qubits:
            frontier[q] = level
    return {
        "two_qubit_count": two,
        "one_qubit_count": one,
        "depth": max(frontier) if c.ops else 0,
    }


# ---------------------------------------------------------------------------
# Text serialization (QASM-2-style subset)

_HEADER = "OPENQASM 2.0;"
_QREG_RE = re.compile(r"^qreg\s+q\[(\d+)\]\s*$")
_CREG_RE = re.compile(r"^creg\s+c\[(\d+)\]\s*$")
_OP_RE = re.compile(r"^([a-z0-9_]+)\s*(?:\(([^)]*)\))?\s+(.*)$")
_QUBIT_RE = re.compile(r"^q\[(\d+)\]$")
_MEASURE_RE = re.compile(r"^measure\s+q\[(\d+)\]\s*->\s*c\[(\d+)\]\s*$")
_META_RE = re.compile(r"^//\s*meta\s+(.*)$")


def serialize(c: Circuit) -> str:
    """Serialize a circuit to the plain-text format (UTF-8, LF endings)."""
    bad = validate(c)
    if bad:
        raise CircuitError("; ".join(bad))
    lines = [_HEADER]
    if c.meta:
        pairs = " ".join(f"{k}={c.meta[k]}" for k in sorted(c.meta))
        lines.append(f"// meta {pairs}")
    lines.append(f"qreg q[{c.width}];")
    if any(c.measured):
        lines.append(f"creg c[{c.width}];")
    boundaries = set(c.layer_boundaries or ())
    for i, op in enumerate(c.ops):
        args = ",".join(f"q[{q}]" for q in op.qubits)
        if op.params:
            params = ",".join(repr(float(p)) for p in op.params)
            lines.append(f"{op.gate.mnemonic}({params}) {args};")
        else:
            lines.append(f"{op.gate.mnemonic} {args};")
        if (i + 1) in boundaries:
            lines.append("barrier q;")
    for q, flag in enumerate(c.measured):
        if flag:
            lines.append(f"measure q[{q}] -> c[{q}];")
    return "\n".join(lines) + "\n"


def _parse_meta(text: str) -> dict[str, object]:
    meta: dict[str, object] = {}
    for pair in text.split():
        if "=" not in pair:
            continue
        key, value = pair.split("=", 1)
        try:
            meta[key] = int(value)
        except ValueError:
            meta[key] = value
    return meta


def parse(text: str) -> Circuit:
    """Parse the text format back into a Circuit.

    Raises ParseError (with a line number) on malformed input.  ``reset`` and
    pragma lines are ignored with a warning.
    """
    width: int | None = None
    ops: list[Operation] = []
    measured: list[bool] = []
    boundaries: list[int] = []
    meta: dict[str, object] = {}
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("//"):
            m = _META_RE.match(line)
            if m:
                meta = _parse_meta(m.group(1))
            continue
        if not saw_header:
            if line != _HEADER:
                raise ParseError(f"expected header {_HEADER!r}, got {line!r}", lineno)
            saw_header = True
            continue
        if not line.endswith(";"):
            raise ParseError("missing trailing ';'", lineno)
        stmt = line[:-1].strip()
        m = _QREG_RE.match(stmt)
        if m:
            if width is not None:
                raise ParseError("duplicate qreg declaration", lineno)
            width = int(m.group(1))
            if width < 1:
                raise ParseError("qreg size must be >= 1", lineno)
            measured = [False] * width
            continue
        if _CREG_RE.match(stmt):
            continue
        if width is None:
            raise ParseError("statement before qreg declaration", lineno)
        if stmt == "barrier q" or stmt.startswith("barrier "):
            if ops and (not boundaries or boundaries[-1] != len(ops)):
                boundaries.append(len(ops))
            continue
        if stmt.startswith("reset") or stmt.startswith("pragma") or stmt.startswith("#pragma"):
            warnings.warn(f"line {lineno}: ignoring unsupported statement {stmt!r}")
            continue
        m = _MEASURE_RE.match(stmt)
        if m:
            q = int(m.group(1))
            if q >= width:
                raise ParseError(f"measure qubit {q} out of range", lineno)
            measured[q] = True
            continue
        m = _OP_RE.match(stmt)
        if not m:
            raise ParseError(f"cannot parse statement {stmt!r}", lineno)
        mnemonic, params_text, args_text = m.groups()
        try:
            kind = GateKind.from_mnemonic(mnemonic)
        except UnknownGateError as exc:
            raise ParseError(str(exc), lineno) from None
        params: tuple[float, ...] = ()
        if params_text is not None:
            try:
                params = tuple(float(p) for p in params_text.split(","))
            except ValueError:
                raise ParseError(f"bad parameter list {params_text!r}", lineno) from None
        if len(params) != kind.param_count:
            raise ParseError(
                f"{mnemonic} takes {kind.param_count} parameter(s), got {len(params)}",
                lineno,
            )
        qubits = []
        for arg in (a.strip() for a in args_text.split(",")):
            qm = _QUBIT_RE.match(arg)
            if not qm:
                raise ParseError(f"bad qubit reference {arg!r}", lineno)
            q = int(qm.group(1))
            if q >= width:
                raise ParseError(f"qubit index {q} out of range for width {width}", lineno)
            qubits.append(q)
        if len(qubits) != kind.arity:
            raise ParseError(
                f"{mnemonic} acts on {kind.arity} qubit(s), got {len(qubits)}", lineno
            )
        ops.append(Operation(kind, params, tuple(qubits)))
    if width is None:
        raise ParseError("missing qreg declaration", len(text.splitlines()) or 1)
    layer_boundaries: tuple[int, ...] | None = None
    if boundaries:
        if boundaries[-1] != len(ops):
            boundaries.append(len(ops))
        layer_boundaries = tuple(boundaries)
    return Circuit(
        width=width,
        ops=tuple(ops),
        measured=tuple(measured),
        layer_boundaries=layer_boundaries,
        meta=meta,
    )


def circuits_equal(a: Circuit, b: Circuit) -> bool:
    """Structural equality over width, ops (exact params), and measurements."""
    return (
        a.width == b.width
        and a.measured == b.measured
        and len(a.ops) == len(b.ops)
        and all(
            x.gate is y.gate and x.qubits == y.qubits and x.params == y.params
            for x, y in zip(a.ops, b.ops)
        )
    )


def from_ops(
    width: int,
    ops: Iterable[tuple[GateKind, tuple[float, ...], tuple[int, ...]]],
    *,
    measured: tuple[bool, ...] | None = None,
    layer_boundaries: tuple[int, ...] | None = None,
    meta: Mapping[str, object] | None = None,
) -> Circuit:
    """Convenience constructor from (gate, params, qubits) triples."""
    return Circuit(
        width=width,
        ops=tuple(Operation(g, tuple(p), tuple(q)) for g, p, q in ops),
        measured=measured if measured is not None else measured_all(width),
        layer_boundaries=layer_boundaries,
        meta=dict(meta) if meta else {},
    )
