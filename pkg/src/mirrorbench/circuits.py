"""Layered circuit representation, gate semantics, and Pauli-frame algebra.

Conventions used throughout the package:

* Qubit 0 is the leftmost character of a bitstring and the most significant
  bit of a computational-basis index.
* ``unitary_of(c)`` returns ``U_L @ ... @ U_2 @ U_1`` where layer 1 is
  executed first (matrices compose right-to-left in time).
* ``RZ(theta) = exp(-i theta Z / 2)``, ``CP(theta) = diag(1, 1, 1, e^{i theta})``,
  and ``U3(theta, phi, lam)`` is the standard Euler parameterization
  ``[[cos(t/2), -e^{i lam} sin(t/2)], [e^{i phi} sin(t/2), e^{i(phi+lam)} cos(t/2)]]``.
* Global phase is never tracked beyond the +/-1 sign carried by Pauli frames.
"""

from __future__ import annotations

import itertools
import math
import uuid
from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GateOp",
    "Circuit",
    "PauliFrame",
    "CouplingGraph",
    "CapacityError",
    "ContractError",
    "GATE_ARITY",
    "ONE_QUBIT_KINDS",
    "TWO_QUBIT_KINDS",
    "CLIFFORD_KINDS",
    "NATIVE_KINDS",
    "CLIFFORD_MATS",
    "NUM_CLIFFORDS",
    "gate_matrix",
    "layerize",
    "inverse",
    "invert_op",
    "unitary_of",
    "apply_gate",
    "propagate_frame",
    "merge_1q",
    "u3_params_from_matrix",
    "u3_params_from_matrices",
    "equal_up_to_phase",
    "clifford_index_of",
    "clifford_inverse_index",
    "clifford_conjugate_pauli",
    "permutation_matrix",
]


class CapacityError(Exception):
    """Raised when a dense computation would exceed its configured qubit limit."""


class ContractError(Exception):
    """Raised when an operation's precondition is violated."""


# --- gate set ----------------------------------------------------------------

GATE_ARITY = {
    "X": 1, "SX": 1, "RZ": 1, "H": 1, "U3": 1, "C1Q": 1,
    "CZ": 2, "CX": 2, "SWAP": 2, "CP": 2,
}
GATE_NPARAMS = {
    "X": 0, "SX": 0, "RZ": 1, "H": 0, "U3": 3, "C1Q": 1,
    "CZ": 0, "CX": 0, "SWAP": 0, "CP": 1,
}
ONE_QUBIT_KINDS = frozenset(k for k, a in GATE_ARITY.items() if a == 1)
TWO_QUBIT_KINDS = frozenset(k for k, a in GATE_ARITY.items() if a == 2)
CLIFFORD_KINDS = frozenset({"X", "SX", "H", "CZ", "CX", "SWAP", "C1Q"})
NATIVE_KINDS = frozenset({"X", "SX", "RZ", "CZ"})
# Kinds accepted by the mirror generator (native plus generic 1q gates).
MIRRORABLE_KINDS = NATIVE_KINDS | {"U3", "C1Q"}

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)

PAULI_MATS = np.stack([_I2, _X, _Y, _Z])
PAULI_LABELS = "IXYZ"


def _u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s],
         [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


def _rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def _canonical_phase(m: np.ndarray) -> np.ndarray:
    """Rescale so the first element with magnitude > 1e-6 is real positive."""
    flat = m.ravel()
    idx = int(np.argmax(np.abs(flat) > 1e-6))
    return m / (flat[idx] / abs(flat[idx]))


def _mat_key(m: np.ndarray) -> tuple:
    c = np.round(_canonical_phase(m), 9) + 0.0  # normalize -0.0
    return tuple(c.ravel().round(9).tolist())


def _build_clifford_table() -> np.ndarray:
    """Enumerate the 24-element single-qubit Clifford group by BFS over {H, S}."""
    seen = {_mat_key(_I2): 0}
    mats = [_I2]
    queue = deque([_I2])
    while queue:
        m = queue.popleft()
        for g in (_H, _S):
            nm = _canonical_phase(g @ m)
            key = _mat_key(nm)
            if key not in seen:
                seen[key] = len(mats)
                mats.append(nm)
                queue.append(nm)
    assert len(mats) == 24
    return np.stack(mats)


CLIFFORD_MATS = _build_clifford_table()
NUM_CLIFFORDS = 24
_CLIFFORD_KEY_TO_INDEX = {_mat_key(CLIFFORD_MATS[i]): i for i in range(24)}


def clifford_index_of(m: np.ndarray) -> int:
    """Index of a 2x2 Clifford matrix in the fixed 24-element table.

    Equality is up to global phase. Raises ``ContractError`` for
    non-Clifford input.
    """
    key = _mat_key(np.asarray(m, dtype=complex))
    try:
        return _CLIFFORD_KEY_TO_INDEX[key]
    except KeyError:
        raise ContractError("matrix is not a single-qubit Clifford") from None


CLIFFORD_INDEX_I = clifford_index_of(_I2)
CLIFFORD_INDEX_X = clifford_index_of(_X)
CLIFFORD_INDEX_Y = clifford_index_of(_Y)
CLIFFORD_INDEX_Z = clifford_index_of(_Z)
CLIFFORD_INDEX_H = clifford_index_of(_H)
CLIFFORD_INDEX_SX = clifford_index_of(_SX)
CLIFFORD_INDEX_SXDG = clifford_index_of(_SX.conj().T)
CLIFFORD_INDEX_OF_PAULI = (
    CLIFFORD_INDEX_I, CLIFFORD_INDEX_X, CLIFFORD_INDEX_Y, CLIFFORD_INDEX_Z,
)

_CLIFFORD_INV = np.array(
    [clifford_index_of(CLIFFORD_MATS[i].conj().T) for i in range(24)]
)


def clifford_inverse_index(i: int) -> int:
    return int(_CLIFFORD_INV[i])


def _pauli_conj_tables():
    """conj[i, p] = p' and sign[i, p] = s with C P C^dag = s P'."""
    conj = np.zeros((24, 4), dtype=np.int64)
    sign = np.zeros((24, 4), dtype=np.int64)
    for i in range(24):
        c = CLIFFORD_MATS[i]
        for p in range(4):
            m = c @ PAULI_MATS[p] @ c.conj().T
            for q in range(4):
                tr = np.trace(PAULI_MATS[q].conj().T @ m) / 2
                if abs(tr - 1) < 1e-9:
                    conj[i, p], sign[i, p] = q, 1
                    break
                if abs(tr + 1) < 1e-9:
                    conj[i, p], sign[i, p] = q, -1
                    break
            else:
                raise AssertionError("Clifford conjugation left Pauli basis")
    return conj, sign


_C1Q_CONJ, _C1Q_SIGN = _pauli_conj_tables()


def clifford_conjugate_pauli(i: int, p: int) -> tuple[int, int]:
    """Return ``(p', s)`` with ``C_i P_p C_i^dag = s P_p'``."""
    return int(_C1Q_CONJ[i, p]), int(_C1Q_SIGN[i, p])


def _two_qubit_conj_tables():
    tables = {}
    for kind, g in (("CZ", np.diag([1, 1, 1, -1]).astype(complex)),
                    ("CX", np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                                     [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)),
                    ("SWAP", np.array([[1, 0, 0, 0], [0, 0, 1, 0],
                                       [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex))):
        conj = np.zeros((4, 4, 3), dtype=np.int64)
        for p1, p2 in itertools.product(range(4), repeat=2):
            m = g @ np.kron(PAULI_MATS[p1], PAULI_MATS[p2]) @ g.conj().T
            found = False
            for q1, q2 in itertools.product(range(4), repeat=2):
                tr = np.trace(np.kron(PAULI_MATS[q1], PAULI_MATS[q2]).conj().T @ m) / 4
                if abs(abs(tr) - 1) < 1e-9:
                    conj[p1, p2] = (q1, q2, int(round(tr.real)))
                    found = True
                    break
            assert found
        tables[kind] = conj
    return tables


_2Q_CONJ = _two_qubit_conj_tables()


def gate_matrix(kind: str, params: tuple = ()) -> np.ndarray:
    """Dense matrix of a gate kind (2x2 or 4x4)."""
    if kind == "X":
        return _X
    if kind == "SX":
        return _SX
    if kind == "H":
        return _H
    if kind == "RZ":
        return _rz_matrix(params[0])
    if kind == "U3":
        return _u3_matrix(*params)
    if kind == "C1Q":
        return CLIFFORD_MATS[int(params[0])]
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "CX":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                         [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if kind == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0],
                         [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if kind == "CP":
        return np.diag([1, 1, 1, np.exp(1j * params[0])])
    raise ContractError(f"unknown gate kind {kind!r}")


# --- circuit data types -------------------------------------------------------


@dataclass(frozen=True, slots=True)
class GateOp:
    """A single gate operation: kind, angle parameters, ordered qubit indices."""

    kind: str
    params: tuple[float, ...] = ()
    qubits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ContractError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != GATE_ARITY[self.kind]:
            raise ContractError(
                f"{self.kind} expects {GATE_ARITY[self.kind]} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ContractError(f"duplicate qubits in {self.kind} op: {self.qubits}")
        if len(self.params) != GATE_NPARAMS[self.kind]:
            raise ContractError(
                f"{self.kind} expects {GATE_NPARAMS[self.kind]} params, got {self.params}")
        if any(not math.isfinite(p) for p in self.params):
            raise ContractError(f"non-finite parameter in {self.kind} op")
        if self.kind == "C1Q":
            idx = self.params[0]
            if idx != int(idx) or not 0 <= idx < 24:
                raise ContractError(f"C1Q index must be an integer in 0..23, got {idx}")

    def matrix(self) -> np.ndarray:
        return gate_matrix(self.kind, self.params)


Layer = tuple[GateOp, ...]


def _check_layer(layer: Layer, n: int):
    seen: set[int] = set()
    for op in layer:
        for q in op.qubits:
            if not 0 <= q < n:
                raise ContractError(f"qubit {q} out of range for n={n}")
            if q in seen:
                raise ContractError(f"qubit {q} appears twice in one layer")
            seen.add(q)


@dataclass(frozen=True, slots=True)
class Circuit:
    """An n-qubit circuit as an ordered sequence of layers of disjoint gates."""

    n: int
    layers: tuple[Layer, ...] = ()
    id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("circuit needs at least one qubit")
        object.__setattr__(self, "layers", tuple(tuple(l) for l in self.layers))
        for layer in self.layers:
            _check_layer(layer, self.n)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def width(self) -> int:
        return self.n

    def ops(self):
        for layer in self.layers:
            yield from layer

    def num_ops(self) -> int:
        return sum(len(l) for l in self.layers)

    def with_id(self, new_id: str) -> "Circuit":
        return Circuit(self.n, self.layers, new_id, dict(self.meta))

    def with_meta(self, **updates) -> "Circuit":
        meta = dict(self.meta)
        meta.update(updates)
        return Circuit(self.n, self.layers, self.id, meta)


def layerize(n: int, ops, *, barriers=()) -> tuple[Layer, ...]:
    """Greedy as-soon-as-possible packing of a flat op list into layers.

    ``barriers`` is an optional set of positions in ``ops`` before which a
    hard layer boundary is forced.
    """
    barriers = set(barriers)
    frontier = [0] * n
    layers: list[list[GateOp]] = []
    floor = 0
    for i, op in enumerate(ops):
        if i in barriers:
            floor = len(layers)
        pos = max(floor, max(frontier[q] for q in op.qubits))
        while len(layers) <= pos:
            layers.append([])
        layers[pos].append(op)
        for q in op.qubits:
            frontier[q] = pos + 1
    return tuple(tuple(l) for l in layers)


# --- inversion ----------------------------------------------------------------


def invert_op(op: GateOp) -> GateOp:
    """Inverse of a single gate, staying inside the supported kind set."""
    if op.kind in ("X", "H", "CZ", "CX", "SWAP"):
        return op
    if op.kind == "RZ":
        return GateOp("RZ", (-op.params[0],), op.qubits)
    if op.kind == "CP":
        return GateOp("CP", (-op.params[0],), op.qubits)
    if op.kind == "SX":
        return GateOp("C1Q", (float(CLIFFORD_INDEX_SXDG),), op.qubits)
    if op.kind == "C1Q":
        return GateOp("C1Q", (float(clifford_inverse_index(int(op.params[0]))),), op.qubits)
    if op.kind == "U3":
        t, p, l = op.params
        return GateOp("U3", (-t, -l, -p), op.qubits)
    raise ContractError(f"cannot invert kind {op.kind!r}")


def inverse(c: Circuit) -> Circuit:
    """Layer-by-layer inverse: reversed layers, each op individually inverted."""
    layers = tuple(tuple(invert_op(op) for op in layer) for layer in reversed(c.layers))
    return Circuit(c.n, layers, c.id + ".inv")


# --- dense simulation primitives ----------------------------------------------


def apply_gate(mat: np.ndarray, psi: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a k-qubit gate to a state tensor of shape (2,)*n (+ batch axes).

    Qubit axes are the first ``n`` axes; any trailing axes are carried along.
    """
    k = len(qubits)
    g = mat.reshape((2,) * (2 * k))
    out = np.tensordot(g, psi, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, range(k), qubits)


def unitary_of(c: Circuit, max_n: int = 12) -> np.ndarray:
    """Dense unitary of the circuit (product of layer unitaries in time order)."""
    if c.n > max_n:
        raise CapacityError(f"n={c.n} exceeds dense limit {max_n}")
    dim = 1 << c.n
    u = np.eye(dim, dtype=complex).reshape((2,) * c.n + (dim,))
    for layer in c.layers:
        for op in layer:
            u = apply_gate(op.matrix(), u, op.qubits, c.n)
    return u.reshape(dim, dim)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """Whether two same-shape matrices are equal up to a global phase."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < tol or nb < tol:
        return na < tol and nb < tol
    ip = np.vdot(a, b)
    return abs(abs(ip) - na * nb) <= tol * na * nb + tol


def permutation_matrix(perm, n: int) -> np.ndarray:
    """Unitary sending wire i to wire perm[i] (qubit 0 = most significant bit)."""
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for x in range(dim):
        y = 0
        for i in range(n):
            bit = (x >> (n - 1 - i)) & 1
            y |= bit << (n - 1 - perm[i])
        m[y, x] = 1.0
    return m


# --- Pauli frames ---------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PauliFrame:
    """Per-qubit Pauli labels with a tracked +/-1 global sign."""

    labels: tuple[int, ...]  # indices into PAULI_LABELS = "IXYZ"
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ContractError("frame sign must be +1 or -1")
        if any(not 0 <= l <= 3 for l in self.labels):
            raise ContractError("frame labels must index IXYZ")

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls((0,) * n)

    @classmethod
    def from_string(cls, s: str, sign: int = 1) -> "PauliFrame":
        return cls(tuple(PAULI_LABELS.index(ch) for ch in s), sign)

    def to_string(self) -> str:
        return "".join(PAULI_LABELS[l] for l in self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def as_matrix(self) -> np.ndarray:
        m = np.array([[self.sign]], dtype=complex)
        for l in self.labels:
            m = np.kron(m, PAULI_MATS[l])
        return m


_KIND_TO_CLIFFORD = {
    "X": CLIFFORD_INDEX_X,
    "SX": CLIFFORD_INDEX_SX,
    "H": CLIFFORD_INDEX_H,
}


def propagate_frame(f: PauliFrame, layer: Layer) -> PauliFrame:
    """Push a Pauli frame through a layer of Clifford gates.

    Returns f' such that L f = f' L as operators (sign included).
    """
    labels = list(f.labels)
    sign = f.sign
    for op in layer:
        if op.kind not in CLIFFORD_KINDS:
            raise ContractError(f"non-Clifford gate {op.kind} in frame propagation")
        if op.kind in TWO_QUBIT_KINDS:
            a, b = op.qubits
            q1, q2, s = _2Q_CONJ[op.kind][labels[a], labels[b]]
            labels[a], labels[b] = int(q1), int(q2)
            sign *= int(s)
        else:
            idx = int(op.params[0]) if op.kind == "C1Q" else _KIND_TO_CLIFFORD[op.kind]
            q = op.qubits[0]
            labels[q], s = clifford_conjugate_pauli(idx, labels[q])
            sign *= s
    return PauliFrame(tuple(labels), sign)


# --- single-qubit merging -------------------------------------------------------


def u3_params_from_matrix(m: np.ndarray) -> tuple[float, float, float]:
    """Euler angles (theta, phi, lam) with U3(theta, phi, lam) = m up to phase."""
    t, p, l = u3_params_from_matrices(m[None])
    return float(t[0]), float(p[0]), float(l[0])


def u3_params_from_matrices(ms: np.ndarray):
    """Vectorized Euler decomposition of a stack of 2x2 unitaries."""
    a = ms[:, 0, 0]
    b = ms[:, 0, 1]
    c = ms[:, 1, 0]
    theta = 2.0 * np.arctan2(np.abs(c), np.abs(a))
    big_a = np.abs(a) > 1e-12
    big_c = np.abs(c) > 1e-12
    ref = np.where(big_a, np.angle(a), 0.0)
    phi = np.where(big_c, np.angle(c) - ref, 0.0)
    lam = np.where(
        big_a & big_c,
        np.angle(-b) - ref,
        # theta ~ 0: only phi+lam matters; theta ~ pi: only phi-lam matters.
        np.where(big_a, np.angle(ms[:, 1, 1]) - ref, 0.0),
    )
    phi = np.where(big_a, phi, np.angle(c) - np.angle(-b))
    return theta, phi, lam


def merge_1q(pre: int, g: GateOp, post: int) -> GateOp:
    """Fold Pauli labels around a 1-qubit gate into a single U3 gate.

    The returned gate's unitary equals ``P_post @ g @ P_pre`` up to global phase.
    """
    if GATE_ARITY[g.kind] != 1:
        raise ContractError("merge_1q requires a single-qubit gate")
    m = PAULI_MATS[post] @ g.matrix() @ PAULI_MATS[pre]
    return GateOp("U3", u3_params_from_matrix(m), g.qubits)


# --- coupling graph --------------------------------------------------------------


@dataclass(frozen=True)
class CouplingGraph:
    """Undirected qubit-connectivity graph; must be connected, no self-loops."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        norm = frozenset(tuple(sorted(e)) for e in self.edges)
        object.__setattr__(self, "edges", norm)
        for a, b in norm:
            if a == b:
                raise ContractError("self-loop in coupling graph")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ContractError("coupling edge out of range")
        if self.n > 1 and len(self._components()) != 1:
            raise ContractError("coupling graph must be connected")

    @classmethod
    def line(cls, n: int) -> "CouplingGraph":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def all_to_all(cls, n: int) -> "CouplingGraph":
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    def neighbors(self, q: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == q} |
                      {a for a, b in self.edges if b == q})

    def has_edge(self, a: int, b: int) -> bool:
        return tuple(sorted((a, b))) in self.edges

    def distances_from(self, src: int) -> list[int]:
        dist = [-1] * self.n
        dist[src] = 0
        queue = deque([src])
        while queue:
            q = queue.popleft()
            for r in self.neighbors(q):
                if dist[r] < 0:
                    dist[r] = dist[q] + 1
                    queue.append(r)
        return dist

    def _components(self) -> list[set[int]]:
        left = set(range(self.n))
        comps = []
        while left:
            src = next(iter(left))
            comp = {src}
            queue = deque([src])
            while queue:
                q = queue.popleft()
                for r in self.neighbors(q):
                    if r not in comp:
                        comp.add(r)
                        queue.append(r)
            left -= comp
            comps.append(comp)
        return comps
