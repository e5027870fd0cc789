"""Built-in circuit families and Trotterized Hamiltonian evolution.

Hamiltonians are real-coefficient Pauli sums. Term order is significant for
Trotterization and is fixed by the builders: coupling terms first, field
terms last. Identity components (from Max3SAT clause expansion) are kept in
a scalar offset that only contributes a global phase and is dropped from
circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mirrorbench.circuits import (
    CapacityError,
    Circuit,
    ContractError,
    GateOp,
    PAULI_LABELS,
    PAULI_MATS,
    layerize,
    unitary_of,
)
from mirrorbench.sim import derive_seed, process_fidelity_unitaries

__all__ = [
    "PauliSumHamiltonian",
    "TrotterSpec",
    "qft_circuit",
    "qaoa_circuit",
    "brickwork_u3_cz",
    "tfim",
    "heisenberg",
    "max3sat",
    "pauli_exponential_ops",
    "trotter_circuit",
    "algorithmic_process_fidelity",
    "full_process_fidelity",
]

PI = math.pi


@dataclass(frozen=True)
class PauliSumHamiltonian:
    """H = sum_j coeff_j * P_j with an optional identity offset."""

    n: int
    terms: tuple[tuple[float, str], ...]
    offset: float = 0.0

    def __post_init__(self):
        for coeff, ps in self.terms:
            if len(ps) != self.n:
                raise ContractError(f"Pauli string {ps!r} length != n={self.n}")
            if any(ch not in PAULI_LABELS for ch in ps):
                raise ContractError(f"bad Pauli string {ps!r}")
            if not math.isfinite(coeff):
                raise ContractError("coefficients must be finite reals")

    def dense(self, max_n: int = 12) -> np.ndarray:
        if self.n > max_n:
            raise CapacityError(f"n={self.n} exceeds dense limit {max_n}")
        dim = 1 << self.n
        h = np.zeros((dim, dim), dtype=complex)
        for coeff, ps in self.terms:
            m = np.ones((1, 1), dtype=complex)
            for ch in ps:
                m = np.kron(m, PAULI_MATS[PAULI_LABELS.index(ch)])
            h += coeff * m
        return h + self.offset * np.eye(dim)

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [[c, p] for c, p in self.terms],
                "offset": self.offset}

    @classmethod
    def from_dict(cls, d: dict) -> "PauliSumHamiltonian":
        return cls(d["n"], tuple((float(c), str(p)) for c, p in d["terms"]),
                   float(d.get("offset", 0.0)))


@dataclass(frozen=True)
class TrotterSpec:
    """Product-formula order (1 or 2), step count m, and evolution time t."""

    order: int = 1
    steps: int = 1
    time: float = 1.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ContractError("Trotter order must be 1 or 2")
        if self.steps < 1:
            raise ContractError("Trotter steps must be >= 1")
        if not math.isfinite(self.time):
            raise ContractError("time must be finite")


# --- circuit families -------------------------------------------------------------


def qft_circuit(n: int) -> Circuit:
    """Standard quantum Fourier transform: H + controlled-phase ladder + swaps."""
    if n < 1:
        raise ContractError("n must be >= 1")
    ops: list[GateOp] = []
    for i in range(n):
        ops.append(GateOp("H", (), (i,)))
        for j in range(i + 1, n):
            ops.append(GateOp("CP", (PI / 2 ** (j - i),), (j, i)))
    for i in range(n // 2):
        ops.append(GateOp("SWAP", (), (i, n - 1 - i)))
    return Circuit(n, layerize(n, ops), f"qft{n}")


def qaoa_circuit(n: int, seed: int, reps: int = 1) -> Circuit:
    """QAOA over a random GNP(n, 2 ln(n)/n) graph.

    Each repetition applies one cost angle (shared by all ZZ-phase edge terms)
    and one mixer angle (X rotations on every qubit), both uniform in [0, pi).
    """
    if n < 2:
        raise ContractError("n must be >= 2")
    rng = derive_seed(seed, "qaoa", n)
    p_edge = min(1.0, 2.0 * math.log(n) / n)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p_edge]
    ops: list[GateOp] = []
    for _ in range(reps):
        gamma = float(rng.uniform(0.0, PI))
        beta = float(rng.uniform(0.0, PI))
        for a, b in edges:
            # exp(-i gamma/2 Z(x)Z) as CX . RZ(gamma) . CX
            ops.append(GateOp("CX", (), (a, b)))
            ops.append(GateOp("RZ", (gamma,), (b,)))
            ops.append(GateOp("CX", (), (a, b)))
        for q in range(n):
            # RX(beta) as a U3 gate
            ops.append(GateOp("U3", (beta, -PI / 2, PI / 2), (q,)))
    return Circuit(n, layerize(n, ops), f"qaoa{n}s{seed}")


def brickwork_u3_cz(n: int, depth: int, seed: int) -> Circuit:
    """Alternating layers of random U3 on all qubits and staggered CZ bricks."""
    rng = derive_seed(seed, "brickwork", n, depth)
    layers = []
    for d in range(depth):
        if d % 2 == 0:
            params = rng.uniform(0.0, 2 * PI, size=(n, 3))
            layers.append(tuple(
                GateOp("U3", (float(t), float(p), float(l)), (q,))
                for q, (t, p, l) in enumerate(params)))
        else:
            start = 0 if (d // 2) % 2 == 0 else 1
            layers.append(tuple(
                GateOp("CZ", (), (a, a + 1))
                for a in range(start, n - 1, 2)))
    return Circuit(n, tuple(layers), f"brick{n}x{depth}s{seed}")


# --- Hamiltonian builders -----------------------------------------------------------


def _ring_string(n: int, i: int, j: int, pa: str, pb: str) -> str:
    s = ["I"] * n
    s[i], s[j] = pa, pb
    return "".join(s)


def _site_string(n: int, i: int, p: str) -> str:
    s = ["I"] * n
    s[i] = p
    return "".join(s)


def tfim(n: int, h_field: float = 2.0) -> PauliSumHamiltonian:
    """Transverse-field Ising model on a periodic 1D ring, h_i = 2.

    Terms: ZZ couplings around the ring first, X fields last.
    """
    if n < 3:
        raise ContractError("periodic ring needs n >= 3")
    terms = [(1.0, _ring_string(n, i, (i + 1) % n, "Z", "Z")) for i in range(n)]
    terms += [(h_field, _site_string(n, i, "X")) for i in range(n)]
    return PauliSumHamiltonian(n, tuple(terms))


def heisenberg(n: int, h_field: float = 2.0) -> PauliSumHamiltonian:
    """Heisenberg XXX model on a periodic 1D ring with Z fields, h_i = 2.

    Terms: XX, YY, ZZ per ring edge first, Z fields last.
    """
    if n < 3:
        raise ContractError("periodic ring needs n >= 3")
    terms = []
    for i in range(n):
        j = (i + 1) % n
        for p in ("X", "Y", "Z"):
            terms.append((1.0, _ring_string(n, i, j, p, p)))
    terms += [(h_field, _site_string(n, i, "Z")) for i in range(n)]
    return PauliSumHamiltonian(n, tuple(terms))


def max3sat(n: int, r: int = 2, seed: int = 0) -> PauliSumHamiltonian:
    """Max3SAT Hamiltonian: r*n random 3-variable clauses expanded to Z-strings.

    Each clause (with variables i<j<k and negation bits s) contributes
    ``I - (1/8) prod [I + (-1)^s Z]``; the identity part accumulates in the
    scalar offset. All remaining terms are diagonal (Z/I only).
    """
    if n < 3:
        raise ContractError("Max3SAT needs n >= 3")
    rng = derive_seed(seed, "max3sat", n, r)
    acc: dict[str, float] = {}
    offset = 0.0
    for _ in range(r * n):
        vars_ = sorted(int(v) for v in rng.choice(n, size=3, replace=False))
        signs = rng.integers(0, 2, size=3)
        offset += 1.0 - 1.0 / 8.0
        # expand -(1/8) * prod(I + (-1)^s Z) minus the pure-identity part
        for mask in range(1, 8):
            coeff = -1.0 / 8.0
            s = ["I"] * n
            for b in range(3):
                if mask >> b & 1:
                    coeff *= (-1.0) ** int(signs[b])
                    s[vars_[b]] = "Z"
            key = "".join(s)
            acc[key] = acc.get(key, 0.0) + coeff
    terms = tuple((c, p) for p, c in acc.items() if abs(c) > 1e-15)
    return PauliSumHamiltonian(n, terms, offset)


# --- Trotterization -----------------------------------------------------------------


def pauli_exponential_ops(coeff_theta: float, pauli: str) -> list[GateOp]:
    """Gate sequence for exp(-i theta P): basis change, CX parity ladder,
    RZ(2 theta), and unconjugation. Empty for the identity string."""
    active = [q for q, ch in enumerate(pauli) if ch != "I"]
    if not active:
        return []
    pre: list[GateOp] = []
    post: list[GateOp] = []
    for q in active:
        ch = pauli[q]
        if ch == "X":
            pre.append(GateOp("H", (), (q,)))
            post.append(GateOp("H", (), (q,)))
        elif ch == "Y":
            # B = S H maps Z to Y; apply B^dag = H S^dag before the ladder
            pre.extend([GateOp("RZ", (-PI / 2,), (q,)), GateOp("H", (), (q,))])
            post.extend([GateOp("H", (), (q,)), GateOp("RZ", (PI / 2,), (q,))])
    ladder = [GateOp("CX", (), (active[i], active[i + 1]))
              for i in range(len(active) - 1)]
    rot = [GateOp("RZ", (2.0 * coeff_theta,), (active[-1],))]
    return pre + ladder + rot + list(reversed(ladder)) + post


def trotter_circuit(h: PauliSumHamiltonian, spec: TrotterSpec) -> Circuit:
    """First- or second-order product-formula circuit for exp(-i H t)."""
    m, t = spec.steps, spec.time
    ops: list[GateOp] = []
    if spec.order == 1:
        step = [op for coeff, ps in h.terms
                for op in pauli_exponential_ops(coeff * t / m, ps)]
    else:
        fwd = [op for coeff, ps in h.terms
               for op in pauli_exponential_ops(coeff * t / (2 * m), ps)]
        bwd = [op for coeff, ps in reversed(h.terms)
               for op in pauli_exponential_ops(coeff * t / (2 * m), ps)]
        step = fwd + bwd
    for _ in range(m):
        ops.extend(step)
    cid = f"trotter-o{spec.order}m{m}t{t:g}"
    return Circuit(h.n, layerize(h.n, ops), cid,
                   {"trotter": {"order": spec.order, "steps": m, "time": t}})


def exact_evolution_unitary(h: PauliSumHamiltonian, t: float, max_n: int = 10) -> np.ndarray:
    """exp(-i H t) via dense Hermitian eigendecomposition."""
    hm = h.dense(max_n=max_n)
    evals, evecs = np.linalg.eigh(hm)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def algorithmic_process_fidelity(h: PauliSumHamiltonian, spec: TrotterSpec,
                                 max_n: int = 10) -> float:
    """Fidelity of the Trotter circuit's unitary to the exact evolution."""
    if h.n > max_n:
        raise CapacityError(f"n={h.n} exceeds dense limit {max_n}")
    u = exact_evolution_unitary(h, spec.time, max_n=max_n)
    ut = unitary_of(trotter_circuit(h, spec), max_n=max_n)
    return process_fidelity_unitaries(u, ut)


def full_process_fidelity(f_alg: float, f_noise: float) -> float:
    """Product approximation of the full process fidelity."""
    if not (0.0 <= f_alg <= 1.0 and 0.0 <= f_noise <= 1.0):
        raise ContractError("fidelities must lie in [0, 1]")
    return f_alg * f_noise
