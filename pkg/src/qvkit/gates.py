"""Gate definitions: every primitive carries an exact unitary matrix.

Conventions: angles are radians; for two-qubit matrices the first qubit of an
operation is the most significant bit of the 4-dimensional space.  ``sx`` uses
the normalized square root of X (the 1/2 prefactor), and ``ecr`` carries a
1/sqrt(2) normalization; the unnormalized variants are not unitary.
"""

from __future__ import annotations

import enum
import math

import numpy as np


class GateKind(enum.Enum):
    """Enumeration of supported gates as (mnemonic, arity, param_count)."""

    XY = ("xy", 2, 1)
    RXX = ("rxx", 2, 1)
    CPHASE = ("cphase", 2, 1)
    CZ = ("cz", 2, 0)
    CX = ("cx", 2, 0)
    ECR = ("ecr", 2, 0)
    ZZ = ("zz", 2, 0)
    SWAP = ("swap", 2, 0)
    RZ = ("rz", 1, 1)
    RY = ("ry", 1, 1)
    RX = ("rx", 1, 1)
    U1Q = ("u1q", 1, 2)
    U3 = ("u3", 1, 3)
    SX = ("sx", 1, 0)
    X = ("x", 1, 0)
    H = ("h", 1, 0)
    ID = ("id", 1, 0)
    DELAY = ("delay", 1, 0)

    def __init__(self, mnemonic: str, arity: int, param_count: int):
        self.mnemonic = mnemonic
        self.arity = arity
        self.param_count = param_count

    @classmethod
    def from_mnemonic(cls, mnemonic: str) -> "GateKind":
        try:
            return _BY_MNEMONIC[mnemonic]
        except KeyError:
            raise UnknownGateError(f"unknown gate mnemonic {mnemonic!r}") from None


_BY_MNEMONIC = {k.mnemonic: k for k in GateKind}


class GateError(ValueError):
    """Base class for gate-level errors."""


class UnknownGateError(GateError):
    pass


class ParameterArityError(GateError):
    pass


class UnknownTargetError(GateError):
    """Raised for an unrecognized vendor gateset family."""


def _u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


def matrix_of(kind: GateKind, params: list[float] | tuple[float, ...] = ()) -> np.ndarray:
    """Return the unitary matrix of ``kind`` with the given angle parameters."""
    if len(params) != kind.param_count:
        raise ParameterArityError(
            f"{kind.mnemonic} takes {kind.param_count} parameter(s), got {len(params)}"
        )
    if kind is GateKind.XY:
        (theta,) = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array(
            [
                [1, 0, 0, 0],
                [0, c, 1j * s, 0],
                [0, 1j * s, c, 0],
                [0, 0, 0, 1],
            ]
        )
    if kind is GateKind.RXX:
        (theta,) = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array(
            [
                [c, 0, 0, -1j * s],
                [0, c, -1j * s, 0],
                [0, -1j * s, c, 0],
                [-1j * s, 0, 0, c],
            ]
        )
    if kind is GateKind.CPHASE:
        (phi,) = params
        return np.diag([1, 1, 1, np.exp(1j * phi)]).astype(complex)
    if kind is GateKind.CZ:
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind is GateKind.CX:
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    if kind is GateKind.ECR:
        return np.array(
            [[0, 0, 1, 1j], [0, 0, 1j, 1], [1, -1j, 0, 0], [-1j, 1, 0, 0]]
        ) / math.sqrt(2)
    if kind is GateKind.ZZ:
        return np.diag([1, 1j, 1j, 1]).astype(complex)
    if kind is GateKind.SWAP:
        return np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
        )
    if kind is GateKind.RZ:
        (lam,) = params
        return np.diag([np.exp(-1j * lam / 2), np.exp(1j * lam / 2)]).astype(complex)
    if kind is GateKind.RY:
        (theta,) = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is GateKind.RX:
        (theta,) = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind is GateKind.U1Q:
        theta, phi = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array(
            [
                [c, -1j * np.exp(-1j * phi) * s],
                [-1j * np.exp(1j * phi) * s, c],
            ]
        )
    if kind is GateKind.U3:
        return _u3(*params)
    if kind is GateKind.SX:
        return np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2
    if kind is GateKind.X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind is GateKind.H:
        return np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    if kind in (GateKind.ID, GateKind.DELAY):
        return np.eye(2, dtype=complex)
    raise UnknownGateError(f"no matrix for {kind}")  # pragma: no cover


# Closed gatesets per vendor family.  Compilation targets these; the octagonal
# family additionally *accepts* XY and CPHASE on input circuits.
_GATESET_FAMILIES: dict[str, frozenset[GateKind]] = {
    "superconducting-heavyhex": frozenset({GateKind.RZ, GateKind.SX, GateKind.X, GateKind.CX}),
    "octagonal": frozenset({GateKind.CZ, GateKind.RZ, GateKind.RX}),
    "ion-allpairs-rxx": frozenset({GateKind.RXX, GateKind.RX, GateKind.RY, GateKind.RZ}),
    "ion-allpairs-zz": frozenset({GateKind.ZZ, GateKind.U1Q, GateKind.RZ}),
    "ring-ecr": frozenset({GateKind.ECR, GateKind.RZ, GateKind.SX, GateKind.X}),
}

# The two-qubit gate each family compiles entangling blocks into.
TWO_QUBIT_TARGET: dict[str, GateKind] = {
    "superconducting-heavyhex": GateKind.CX,
    "octagonal": GateKind.CZ,
    "ion-allpairs-rxx": GateKind.RXX,
    "ion-allpairs-zz": GateKind.ZZ,
    "ring-ecr": GateKind.ECR,
}

GATESET_FAMILY_NAMES = tuple(sorted(_GATESET_FAMILIES))


def native_gateset(vendor_family: str) -> frozenset[GateKind]:
    """Return the closed gateset for a vendor family identifier."""
    try:
        return _GATESET_FAMILIES[vendor_family]
    except KeyError:
        raise UnknownTargetError(
            f"unknown gateset family {vendor_family!r}; "
            f"known: {', '.join(GATESET_FAMILY_NAMES)}"
        ) from None
