"""Two-qubit unitary synthesis into a fixed three-entangler template.

Any 4x4 unitary factors as (A x B) V (C x D) where V is a canonical circuit
with three entangling gates (Cartan/KAK form).  The construction works in the
magic basis E, where SU(2) x SU(2) becomes SO(4); the interior rotation angles
come from the eigenphases of gamma(U) = (E^ U E)(E^ U E)^T.  Entangler
targets other than CX are obtained by conjugating each CX (or CZ) with fixed
single-qubit dressings; the XY (iSWAP-class) target uses a SWAP-absorption
identity so that exactly three XY(pi) gates suffice.

Single-qubit resynthesis (Euler-angle forms for each native family) also
lives here.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from .gates import GateKind, matrix_of

ATOL = 1e-11

# Magic basis: E maps SO(4) conjugation to SU(2) x SU(2).
_E = np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]]
) / math.sqrt(2)
_Edag = _E.conj().T

_CX01 = matrix_of(GateKind.CX)  # control on the first (top) qubit
_CX10 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
_SWAP = matrix_of(GateKind.SWAP)
_H = matrix_of(GateKind.H)
_I2 = np.eye(2, dtype=complex)
_SDG = np.diag([1, -1j]).astype(complex)


class NumericDomainError(ValueError):
    """Raised when an input matrix is not unitary within tolerance."""


def _require_unitary(U: np.ndarray, dim: int) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (dim, dim) or not np.allclose(U @ U.conj().T, np.eye(dim), atol=1e-9):
        raise NumericDomainError(f"expected a {dim}x{dim} unitary matrix")
    return U


def _to_su(U: np.ndarray) -> np.ndarray:
    """Rescale a unitary to determinant 1 (4x4: det^(-1/4), 2x2: det^(-1/2))."""
    det = np.linalg.det(U)
    return U * cmath.exp(-1j * cmath.phase(det) / U.shape[0])


def _phase_between(U: np.ndarray, V: np.ndarray) -> complex:
    """Return the scalar c with U ~ c*V, assuming proportionality holds."""
    idx = np.unravel_index(np.argmax(np.abs(V)), V.shape)
    return U[idx] / V[idx]


def _rz(a: float) -> np.ndarray:
    return matrix_of(GateKind.RZ, (a,))


def _ry(a: float) -> np.ndarray:
    return matrix_of(GateKind.RY, (a,))


# ---------------------------------------------------------------------------
# Simultaneous SO(4) diagonalization

def _diagonalizes(p: np.ndarray, M: np.ndarray) -> bool:
    D = p.T @ M @ p
    return np.allclose(D, np.diag(np.diag(D)), atol=1e-9)


def _so4_diagonalizer(M: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal p (real, det +1) with p^T M p diagonal, for complex symmetric
    unitary M.  Random real combinations of Re(M) and Im(M) break degeneracies."""
    for attempt in range(32):
        if attempt == 0:
            t1, t2 = 1.0, 1.0
        else:
            t1, t2 = rng.normal(size=2)
        _, p = np.linalg.eigh(t1 * M.real + t2 * M.imag)
        if _diagonalizes(p, M):
            return p
    raise NumericDomainError("failed to diagonalize gamma matrix")  # pragma: no cover


def _paired_so4_diagonalizers(
    uuT: np.ndarray, vvT: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """p, q in SO(4) with p^T uuT p = q^T vvT q (equal diagonals, same order).

    Columns are ordered by the phase of the shared eigenvalues so the two
    diagonals line up even when eigh sorts a degenerate combination oddly.
    """
    p = _so4_diagonalizer(uuT, rng)
    q = _so4_diagonalizer(vvT, rng)
    du = np.diag(p.T @ uuT @ p)
    dv = np.diag(q.T @ vvT @ q)
    # Permute q's columns so the shared eigenvalues appear in matching order
    # (the diagonals are complex, so plain sorting can disagree near branch
    # cuts; match each entry to its nearest counterpart instead).
    perm = []
    taken = set()
    for ev in du:
        j = min(
            (j for j in range(4) if j not in taken),
            key=lambda j: abs(dv[j] - ev),
        )
        taken.add(j)
        perm.append(j)
    q = q[:, perm]
    dv = np.diag(q.T @ vvT @ q)
    if not np.allclose(du, dv, atol=1e-8):
        raise NumericDomainError("gamma spectra do not match")  # pragma: no cover
    if np.linalg.det(p) < 0:
        p[:, -1] *= -1
    if np.linalg.det(q) < 0:
        q[:, -1] *= -1
    return p, q


def _split_tensor_product(U4: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split U4 = A kron B with A, B in SU(2) (U4 assumed exactly a product)."""
    C1, C2 = U4[0:2, 0:2], U4[0:2, 2:4]
    C3, C4 = U4[2:4, 0:2], U4[2:4, 2:4]
    a1 = np.sqrt((C1 @ C4.conj().T)[0, 0])
    a2 = np.sqrt(-(C2 @ C3.conj().T)[0, 0])
    # a1, a2 are each fixed only up to sign; pin the relative sign via C1 C2^.
    if not np.isclose(a1 * np.conj(a2), (C1 @ C2.conj().T)[0, 0], atol=1e-8):
        a2 = -a2
    A = np.array([[a1, a2], [-np.conj(a2), np.conj(a1)]])
    B = C2 / A[0, 1] if abs(A[0, 0]) < 1e-6 else C1 / A[0, 0]
    return A, B


def _extract_prefactors(
    U: np.ndarray, V: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """SU(2) matrices A, B, C, D with (A kron B) V (C kron D) = U.

    Requires U, V in SU(4) and locally equivalent (same canonical class).
    """
    u = _Edag @ U @ _E
    v = _Edag @ V @ _E
    p, q = _paired_so4_diagonalizers(u @ u.T, v @ v.T, rng)
    G = p @ q.T
    H = v.conj().T @ G.T @ u
    A, B = _split_tensor_product(_E @ G @ _Edag)
    C, D = _split_tensor_product(_E @ H @ _Edag)
    return A, B, C, D


# ---------------------------------------------------------------------------
# Canonical three-CX decomposition

def _three_cx_form(
    U: np.ndarray, rng: np.random.Generator
) -> tuple[
    np.ndarray, np.ndarray, float, float, float, np.ndarray, np.ndarray
]:
    """Factor a 4x4 unitary as, in circuit order,

        C(q0), D(q1); CX(q1->q0); RZ(delta) q0, RY(beta) q1; CX(q0->q1);
        RY(alpha) q1; CX(q1->q0); B(q0), A(q1)

    up to global phase.  Returns (C, D, delta, beta, alpha, B, A).

    A SWAP is absorbed into U first so the interior has determinant one; the
    final single-qubit pair comes out wire-exchanged, which cancels it.
    """
    su = _to_su(_require_unitary(U, 4))
    swap_u = cmath.exp(1j * math.pi / 4) * _SWAP @ su
    g = _Edag @ swap_u @ _E
    gamma = g @ g.T
    x, y, z = sorted(np.angle(np.linalg.eigvals(gamma)))[:3]
    alpha = (x + y) / 2
    beta = (x + z) / 2
    delta = (z + y) / 2
    V = (
        _SWAP
        @ _CX10
        @ np.kron(_I2, _ry(alpha))
        @ _CX01
        @ np.kron(_rz(delta), _ry(beta))
        @ _CX10
    )
    A, B, C, D = _extract_prefactors(swap_u, V, rng)
    return C, D, delta, beta, alpha, B, A


# ---------------------------------------------------------------------------
# Element-list representation and target dressing

def _elements_cx(U: np.ndarray, rng: np.random.Generator) -> list[tuple]:
    """Decomposition as ('1q', wire, mat2) / ('2q', kind, params, (a, b))
    elements in circuit order, using three CX entanglers."""
    C, D, delta, beta, alpha, B, A = _three_cx_form(U, rng)
    return [
        ("1q", 0, C),
        ("1q", 1, D),
        ("2q", GateKind.CX, (), (1, 0)),
        ("1q", 0, _rz(delta)),
        ("1q", 1, _ry(beta)),
        ("2q", GateKind.CX, (), (0, 1)),
        ("1q", 1, _ry(alpha)),
        ("2q", GateKind.CX, (), (1, 0)),
        ("1q", 0, B),
        ("1q", 1, A),
    ]


@lru_cache(maxsize=None)
def _cx_dressing(target: GateKind, flipped: bool) -> tuple[np.ndarray, ...]:
    """Fixed (a, b, c, d) with CX proportional to (a x b) T (c x d); the
    ``flipped`` variant dresses the control-on-second-wire CX (the target is
    not necessarily swap-symmetric, so both orientations are derived)."""
    T = {
        GateKind.ECR: matrix_of(GateKind.ECR),
        GateKind.ZZ: matrix_of(GateKind.ZZ),
        GateKind.RXX: matrix_of(GateKind.RXX, (math.pi / 2,)),
    }[target]
    rng = np.random.default_rng(7)
    cx = _CX10 if flipped else _CX01
    A, B, C, D = _extract_prefactors(_to_su(cx), _to_su(T), rng)
    return A, B, C, D


def _dress_cx_class(elements: list[tuple], target: GateKind, params: tuple) -> list[tuple]:
    """Rewrite each CX element into the locally equivalent target gate."""
    out: list[tuple] = []
    for el in elements:
        if el[0] != "2q":
            out.append(el)
            continue
        _, _, _, (ctrl, tgt) = el
        if target is GateKind.CX:
            out.append(el)
            continue
        if target is GateKind.CZ:
            # CX = (I x H) CZ (I x H), H on the target wire.
            out.append(("1q", tgt, _H))
            out.append(("2q", GateKind.CZ, (), (0, 1)))
            out.append(("1q", tgt, _H))
            continue
        a, b, c, d = _cx_dressing(target, (ctrl, tgt) == (1, 0))
        out.append(("1q", 0, c))
        out.append(("1q", 1, d))
        out.append(("2q", target, params, (0, 1)))
        out.append(("1q", 0, a))
        out.append(("1q", 1, b))
    return out


def _elements_xy(U: np.ndarray, rng: np.random.Generator) -> list[tuple]:
    """Three-XY(pi) decomposition via a SWAP-absorption identity.

    Decompose SWAP@U with three CZs; each CZ equals (Sdg x Sdg) SWAP XY(pi),
    and since SWAP commutes with both factors the four SWAPs cancel after
    wire-exchanging alternate single-qubit layers.
    """
    su = _require_unitary(U, 4)
    cz_elements = _dress_cx_class(_elements_cx(_SWAP @ su, rng), GateKind.CZ, ())
    # Collapse to alternating [layer, cz, layer, cz, layer, cz, layer] form.
    layers: list[list[np.ndarray]] = [[_I2.copy(), _I2.copy()]]
    for el in cz_elements:
        if el[0] == "1q":
            _, wire, mat = el
            layers[-1][wire] = mat @ layers[-1][wire]
        else:
            layers.append([_I2.copy(), _I2.copy()])
    # Layers at even distance from the end get their wires exchanged by the
    # SWAP push-through; each entangler is followed by Sdg x Sdg, merged into
    # the next layer.
    out: list[tuple] = []
    n = len(layers) - 1  # number of entanglers (3)
    for i, (top, bot) in enumerate(layers):
        if (n - i) % 2 == 0:
            top, bot = bot, top
        if i > 0:
            top, bot = top @ _SDG, bot @ _SDG
        out.append(("1q", 0, top))
        out.append(("1q", 1, bot))
        if i < n:
            out.append(("2q", GateKind.XY, (math.pi,), (0, 1)))
    return out


def _merge_elements(elements: list[tuple]) -> list[tuple]:
    """Fuse runs of single-qubit matrices per wire between entanglers."""
    out: list[tuple] = []
    pending: dict[int, np.ndarray] = {}
    for el in elements:
        if el[0] == "1q":
            _, wire, mat = el
            pending[wire] = mat @ pending.get(wire, _I2)
        else:
            for wire in sorted(pending):
                out.append(("1q", wire, pending[wire]))
            pending = {}
            out.append(el)
    for wire in sorted(pending):
        out.append(("1q", wire, pending[wire]))
    return out


def decompose_block(U: np.ndarray, target: GateKind, seed: int = 0) -> list[tuple]:
    """Decompose a 4x4 unitary into exactly three ``target`` entanglers plus
    single-qubit layers, equal to U up to global phase.

    Returns elements ('1q', wire, matrix) / ('2q', kind, params, wires) in
    circuit order; single-qubit runs are pre-merged (at most eight remain).
    """
    rng = np.random.default_rng([seed, 0x6B616B])
    if target is GateKind.XY:
        elements = _elements_xy(U, rng)
    elif target in (GateKind.CX, GateKind.CZ, GateKind.ECR, GateKind.ZZ, GateKind.RXX):
        params = (math.pi / 2,) if target is GateKind.RXX else ()
        elements = _dress_cx_class(_elements_cx(U, rng), target, params)
    else:
        raise NumericDomainError(f"unsupported two-qubit target {target.mnemonic}")
    return _merge_elements(elements)


def elements_matrix(elements: list[tuple]) -> np.ndarray:
    """Dense 4x4 product of an element list (verification oracle)."""
    M = np.eye(4, dtype=complex)
    for el in elements:
        if el[0] == "1q":
            _, wire, mat = el
            g = np.kron(mat, _I2) if wire == 0 else np.kron(_I2, mat)
        else:
            _, kind, params, wires = el
            g = matrix_of(kind, params)
            if wires == (1, 0):
                g = _SWAP @ g @ _SWAP
        M = g @ M
    return M


# ---------------------------------------------------------------------------
# Single-qubit Euler synthesis

def zyz_angles(V: np.ndarray) -> tuple[float, float, float]:
    """Angles with V ~ RZ(phi) RY(theta) RZ(lam) up to global phase.

    Returns (theta, phi, lam).
    """
    W = _to_su(_require_unitary(V, 2))
    theta = 2 * math.atan2(abs(W[1, 0]), abs(W[0, 0]))
    if abs(W[1, 0]) < ATOL:
        phi, lam = 2 * cmath.phase(W[1, 1]), 0.0
    elif abs(W[0, 0]) < ATOL:
        phi, lam = 2 * cmath.phase(W[1, 0]), 0.0
    else:
        plus = 2 * cmath.phase(W[1, 1])
        minus = 2 * cmath.phase(W[1, 0])
        phi, lam = (plus + minus) / 2, (plus - minus) / 2
    return theta, phi, lam


def u3_angles(V: np.ndarray) -> tuple[float, float, float]:
    """(theta, phi, lam) with V ~ U3(theta, phi, lam) up to global phase."""
    return zyz_angles(V)


def _is_identity_up_to_phase(V: np.ndarray) -> bool:
    W = _to_su(V)
    return np.allclose(W, np.eye(2), atol=ATOL) or np.allclose(W, -np.eye(2), atol=ATOL)


def synthesize_1q_ops(V: np.ndarray, family_1q: frozenset[GateKind]) -> list[tuple]:
    """Express a 2x2 unitary in a native one-qubit family, up to global phase.

    Returns (GateKind, params) pairs in circuit order.  The identity yields an
    empty sequence.
    """
    V = _require_unitary(V, 2)
    if _is_identity_up_to_phase(V):
        return []
    if GateKind.U3 in family_1q:
        return [(GateKind.U3, u3_angles(V))]
    theta, phi, lam = zyz_angles(V)
    if GateKind.RY in family_1q and GateKind.RZ in family_1q:
        out = [(GateKind.RZ, (lam,)), (GateKind.RY, (theta,)), (GateKind.RZ, (phi,))]
        return [(k, p) for k, p in out if abs(p[0]) > ATOL]
    # Remaining families build from the ZXZ form: RY(t) = RZ(pi/2) RX(t) RZ(-pi/2).
    a, b, c = phi + math.pi / 2, theta, lam - math.pi / 2
    if GateKind.RX in family_1q and GateKind.RZ in family_1q:
        out = [(GateKind.RZ, (c,)), (GateKind.RX, (b,)), (GateKind.RZ, (a,))]
        return [(k, p) for k, p in out if abs(p[0]) > ATOL]
    if GateKind.U1Q in family_1q:
        # RZ(a) RX(b) RZ(c) = U1q(b, a) RZ(a + c).
        out: list[tuple] = []
        if abs(a + c) > ATOL:
            out.append((GateKind.RZ, (a + c,)))
        out.append((GateKind.U1Q, (b, a)))
        return out
    if GateKind.SX in family_1q and GateKind.RZ in family_1q:
        # V ~ RZ(phi+pi) SX RZ(theta+pi) SX RZ(lam): the ZSX Euler form.
        if theta < ATOL:
            return [(GateKind.RZ, (phi + lam,))]
        return [
            (GateKind.RZ, (lam,)),
            (GateKind.SX, ()),
            (GateKind.RZ, (theta + math.pi,)),
            (GateKind.SX, ()),
            (GateKind.RZ, (phi + math.pi,)),
        ]
    raise NumericDomainError(
        f"no Euler form for family {{{', '.join(sorted(k.mnemonic for k in family_1q))}}}"
    )


def ops_matrix(ops: list[tuple]) -> np.ndarray:
    """Dense 2x2 product of (GateKind, params) pairs in circuit order."""
    M = np.eye(2, dtype=complex)
    for kind, params in ops:
        M = matrix_of(kind, params) @ M
    return M
