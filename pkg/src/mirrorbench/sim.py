"""Noisy and ideal circuit simulation with exact process-fidelity oracles.

Noise semantics (shared by the shot sampler and the deterministic oracles):

* Depolarizing after each gate on the gate's k qubits:
  ``rho -> (1 - lam) rho + lam I/2^k (x) Tr_k rho``, i.e. a uniform Pauli
  channel with total non-identity probability ``lam (4^k - 1) / 4^k``.
* Coherent over-rotation: the ideal gate followed by ``exp(-i theta G / 2)``
  about the gate's own generator axis (X for the X and SX gates).
* Idle error: a Z rotation by ``theta_idle`` on every qubit not acted on by
  a layer (RZ counts as acting).
* Readout: independent symmetric bit flips with probability ``eps_ro``,
  applied to measured bits only (never part of the process fidelity).

Bitstring convention: character i is qubit i, qubit 0 leftmost (most
significant bit of a basis-state index).
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from mirrorbench.circuits import (
    CapacityError,
    Circuit,
    ContractError,
    PAULI_MATS,
    apply_gate,
    gate_matrix,
    unitary_of,
)

__all__ = [
    "NoiseModel",
    "ShotTable",
    "OutcomeDistribution",
    "ideal_distribution",
    "noisy_distribution",
    "sample_shots",
    "fake_uniform_shots",
    "exact_process_fidelity",
    "process_fidelity_channel_vs_unitary",
    "process_fidelity_unitaries",
    "noisy_unitary",
    "derive_seed",
]

_X = PAULI_MATS[1]


@dataclass(frozen=True)
class NoiseModel:
    """Gate, idle, and readout error parameters for the simulated device."""

    lam_1q: float = 0.0
    lam_2q: float = 0.0
    theta_over: dict[str, float] = field(default_factory=dict)
    theta_idle: float = 0.0
    eps_ro: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.lam_1q <= 1.0 or not 0.0 <= self.lam_2q <= 1.0:
            raise ContractError("depolarizing parameters must lie in [0, 1]")
        if not 0.0 <= self.eps_ro <= 0.5:
            raise ContractError("readout flip probability must lie in [0, 0.5]")
        for k, v in self.theta_over.items():
            if k not in ("X", "SX"):
                raise ContractError(f"over-rotation only defined for X and SX, got {k!r}")
            if not math.isfinite(v):
                raise ContractError("over-rotation angle must be finite")
        if not math.isfinite(self.theta_idle):
            raise ContractError("idle angle must be finite")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls()

    def is_noiseless(self) -> bool:
        return (self.lam_1q == 0 and self.lam_2q == 0 and self.theta_idle == 0
                and self.eps_ro == 0 and not any(self.theta_over.values()))

    def to_dict(self) -> dict:
        return {
            "lam_1q": self.lam_1q,
            "lam_2q": self.lam_2q,
            "theta_over": dict(self.theta_over),
            "theta_idle": self.theta_idle,
            "eps_ro": self.eps_ro,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        return cls(
            lam_1q=d.get("lam_1q", 0.0),
            lam_2q=d.get("lam_2q", 0.0),
            theta_over=dict(d.get("theta_over", {})),
            theta_idle=d.get("theta_idle", 0.0),
            eps_ro=d.get("eps_ro", 0.0),
        )


@dataclass
class ShotTable:
    """Observed bitstring counts for one circuit."""

    circuit_id: str
    counts: dict[str, int]
    width: int

    def __post_init__(self):
        for bs, cnt in self.counts.items():
            if cnt <= 0:
                raise ContractError("shot counts must be positive")
            if len(bs) != self.width:
                raise ContractError(
                    f"bitstring {bs!r} length != circuit width {self.width}")

    @property
    def shots(self) -> int:
        return sum(self.counts.values())


@dataclass
class OutcomeDistribution:
    """Sparse map bitstring -> probability."""

    probs: dict[str, float]

    def __post_init__(self):
        total = sum(self.probs.values())
        if abs(total - 1.0) > 1e-9:
            raise ContractError(f"probabilities sum to {total}, expected 1")

    def __getitem__(self, bs: str) -> float:
        return self.probs.get(bs, 0.0)


def derive_seed(master_seed: int, *tags) -> np.random.Generator:
    """Deterministic per-item RNG stream from a master seed and string/int tags."""
    entropy = [int(master_seed)]
    for t in tags:
        if isinstance(t, str):
            entropy.append(zlib.crc32(t.encode()))
        else:
            entropy.append(int(t))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _index_to_bitstring(x: int, n: int) -> str:
    return format(x, f"0{n}b")


def _gate_with_coherent_error(kind: str, params, nm: NoiseModel) -> np.ndarray:
    g = gate_matrix(kind, params)
    theta = nm.theta_over.get(kind, 0.0)
    if theta and kind in ("X", "SX"):
        err = math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * _X
        g = err @ g
    return g


def _idle_qubits(layer, n: int) -> list[int]:
    busy = {q for op in layer for q in op.qubits}
    return [q for q in range(n) if q not in busy]


def _idle_rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


# --- ideal statevector simulation ----------------------------------------------


def statevector(c: Circuit, max_n: int = 20) -> np.ndarray:
    """Error-free final state of the circuit on |0...0>, as a (2,)*n tensor."""
    if c.n > max_n:
        raise CapacityError(f"n={c.n} exceeds statevector limit {max_n}")
    psi = np.zeros((2,) * c.n, dtype=complex)
    psi[(0,) * c.n] = 1.0
    for layer in c.layers:
        for op in layer:
            psi = apply_gate(op.matrix(), psi, op.qubits, c.n)
    return psi


def ideal_distribution(c: Circuit, max_n: int = 20, tol: float = 1e-12) -> OutcomeDistribution:
    """Error-free outcome distribution |<x|U|0..0>|^2 as a sparse map."""
    psi = statevector(c, max_n=max_n).ravel()
    probs = np.abs(psi) ** 2
    probs /= probs.sum()
    nz = np.nonzero(probs > tol)[0]
    return OutcomeDistribution(
        {_index_to_bitstring(int(x), c.n): float(probs[x]) for x in nz})


# --- Monte-Carlo shot sampling ----------------------------------------------------


def sample_shots(c: Circuit, nm: NoiseModel, shots: int, seed: int,
                 max_n: int = 12) -> ShotTable:
    """Sample measurement outcomes from Monte-Carlo noise trajectories.

    Per shot: gates (with coherent over-rotations folded in) act as unitaries,
    depolarizing errors insert uniform non-identity Paulis with total
    probability ``lam (4^k - 1)/4^k``, idle qubits precess by ``theta_idle``
    per layer, and measured bits flip with probability ``eps_ro``.
    Deterministic given (seed, circuit id). Shots are evolved as one batched
    statevector array; error insertions are applied per affected shot.
    """
    if shots <= 0:
        raise ContractError("shots must be positive")
    if c.n > max_n:
        raise CapacityError(f"n={c.n} exceeds trajectory limit {max_n}")
    rng = derive_seed(seed, c.id)
    n = c.n
    states = np.zeros((2,) * n + (shots,), dtype=complex)
    states[(0,) * n + (slice(None),)] = 1.0

    for layer in c.layers:
        for op in layer:
            g = _gate_with_coherent_error(op.kind, op.params, nm)
            states = apply_gate(g, states, op.qubits, n)
            lam = nm.lam_1q if len(op.qubits) == 1 else nm.lam_2q
            if lam > 0:
                k = len(op.qubits)
                num_p = 4 ** k - 1
                p_err = lam * num_p / 4 ** k
                hit = np.nonzero(rng.random(shots) < p_err)[0]
                if hit.size:
                    which = rng.integers(1, num_p + 1, size=hit.size)
                    for shot, w in zip(hit, which):
                        col = states[..., shot]
                        for q, pi in zip(op.qubits, _unpack_pauli(int(w), k)):
                            if pi:
                                col = apply_gate(PAULI_MATS[pi], col, (q,), n)
                        states[..., shot] = col
        if nm.theta_idle:
            rz = _idle_rz(nm.theta_idle)
            for q in _idle_qubits(layer, n):
                states = apply_gate(rz, states, (q,), n)

    probs = np.abs(states.reshape(1 << n, shots)) ** 2
    probs /= probs.sum(axis=0)
    u = rng.random(shots)
    outcomes = (np.cumsum(probs, axis=0) < u).sum(axis=0)
    bits = ((outcomes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)
    if nm.eps_ro > 0:
        flips = rng.random((shots, n)) < nm.eps_ro
        bits ^= flips
    counts: dict[str, int] = {}
    chars = (bits + ord("0")).astype(np.uint8)
    for row in chars:
        s = row.tobytes().decode()
        counts[s] = counts.get(s, 0) + 1
    return ShotTable(c.id, counts, n)


def _unpack_pauli(w: int, k: int) -> tuple[int, ...]:
    """Index 1..4^k-1 -> per-qubit Pauli indices (base-4 digits, not all zero)."""
    digits = []
    for _ in range(k):
        digits.append(w % 4)
        w //= 4
    return tuple(reversed(digits))


def fake_uniform_shots(n: int, shots: int, seed: int, circuit_id: str = "fake") -> ShotTable:
    """i.i.d. uniform bitstrings; O(shots * n), independent of any circuit."""
    if shots <= 0:
        raise ContractError("shots must be positive")
    rng = derive_seed(seed, circuit_id)
    bits = rng.integers(0, 2, size=(shots, n), dtype=np.uint8) + ord("0")
    counts: dict[str, int] = {}
    for row in bits:
        s = row.tobytes().decode()
        counts[s] = counts.get(s, 0) + 1
    return ShotTable(circuit_id, counts, n)


# --- deterministic density-matrix evolution (oracles) ------------------------------


def _conj_gate(rho: np.ndarray, mat: np.ndarray, qubits, n: int) -> np.ndarray:
    """U rho U^dag on a density tensor with row axes 0..n-1, col axes n..2n-1.

    ``rho`` may carry one leading batch axis; qubit axes are addressed from the
    end so the same code handles both cases.
    """
    nd = rho.ndim
    row = [nd - 2 * n + q for q in qubits]
    col = [nd - n + q for q in qubits]
    k = len(qubits)
    g = mat.reshape((2,) * (2 * k))
    rho = np.tensordot(g, rho, axes=(list(range(k, 2 * k)), row))
    rho = np.moveaxis(rho, range(k), row)
    gc = mat.conj().reshape((2,) * (2 * k))
    rho = np.tensordot(gc, rho, axes=(list(range(k, 2 * k)), col))
    return np.moveaxis(rho, range(k), col)


def _depolarize(rho: np.ndarray, lam: float, qubits, n: int) -> np.ndarray:
    """(1-lam) rho + lam I/2^k (x) Tr_k rho on the given qubits."""
    nd = rho.ndim
    row = [nd - 2 * n + q for q in qubits]
    col = [nd - n + q for q in qubits]
    k = len(qubits)
    tail = list(range(nd - 2 * k, nd))
    moved = np.moveaxis(rho, row + col, tail)
    lead = moved.shape[: nd - 2 * k]
    traced = np.trace(moved.reshape(lead + (1 << k, 1 << k)), axis1=-2, axis2=-1)
    mixed = np.multiply.outer(traced, np.eye(1 << k) / (1 << k))
    mixed = mixed.reshape(lead + (2,) * (2 * k))
    mixed = np.moveaxis(mixed, tail, row + col)
    return (1.0 - lam) * rho + lam * mixed


def _evolve_channel(rho: np.ndarray, c: Circuit, nm: NoiseModel, n: int) -> np.ndarray:
    """Apply the noisy channel of the circuit (no readout) to a density tensor."""
    for layer in c.layers:
        for op in layer:
            g = _gate_with_coherent_error(op.kind, op.params, nm)
            rho = _conj_gate(rho, g, op.qubits, n)
            lam = nm.lam_1q if len(op.qubits) == 1 else nm.lam_2q
            if lam > 0:
                rho = _depolarize(rho, lam, op.qubits, n)
        if nm.theta_idle:
            rz = _idle_rz(nm.theta_idle)
            for q in _idle_qubits(layer, n):
                rho = _conj_gate(rho, rz, (q,), n)
    return rho


def noisy_distribution(c: Circuit, nm: NoiseModel, max_n: int = 10,
                       tol: float = 1e-14) -> OutcomeDistribution:
    """Exact outcome distribution under the noise model (deterministic density
    evolution including readout error)."""
    if c.n > max_n:
        raise CapacityError(f"n={c.n} exceeds density-evolution limit {max_n}")
    n = c.n
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    rho = _evolve_channel(rho.reshape((2,) * (2 * n)), c, nm, n)
    probs = rho.reshape(dim, dim).diagonal().real.copy()
    if nm.eps_ro > 0:
        # readout flips mix the probability vector one bit at a time
        probs = probs.reshape((2,) * n)
        e = nm.eps_ro
        mix = np.array([[1 - e, e], [e, 1 - e]])
        for q in range(n):
            probs = np.tensordot(mix, probs, axes=(1, q))
            probs = np.moveaxis(probs, 0, q)
        probs = probs.ravel()
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    nz = np.nonzero(probs > tol)[0]
    return OutcomeDistribution(
        {_index_to_bitstring(int(x), n): float(probs[x]) for x in nz})


# --- process fidelity oracles -----------------------------------------------------


def process_fidelity_unitaries(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U^dag V)|^2 / 4^n for equal-dimension unitaries."""
    if u.shape != v.shape:
        raise ContractError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v)) ** 2 / d ** 2)


def noisy_unitary(c: Circuit, nm: NoiseModel, max_n: int = 12) -> np.ndarray:
    """Circuit unitary with coherent-error and idle rotations folded in.

    Only meaningful for models without depolarizing noise (used as a
    cross-check oracle for coherent-only models).
    """
    if c.n > max_n:
        raise CapacityError(f"n={c.n} exceeds dense limit {max_n}")
    dim = 1 << c.n
    u = np.eye(dim, dtype=complex).reshape((2,) * c.n + (dim,))
    for layer in c.layers:
        for op in layer:
            g = _gate_with_coherent_error(op.kind, op.params, nm)
            u = apply_gate(g, u, op.qubits, c.n)
        if nm.theta_idle:
            rz = _idle_rz(nm.theta_idle)
            for q in _idle_qubits(layer, c.n):
                u = apply_gate(rz, u, (q,), c.n)
    return u.reshape(dim, dim)


def _pauli_stack(n: int, indices: np.ndarray) -> np.ndarray:
    """Stack of normalized n-qubit Pauli matrices P_j / sqrt(2^n).

    Index j is read as base-4 digits (qubit 0 = most significant digit).
    """
    dim = 1 << n
    out = np.ones((len(indices), 1, 1), dtype=complex)
    for q in range(n):
        digit = (indices // 4 ** (n - 1 - q)) % 4
        mats = PAULI_MATS[digit]
        out = np.einsum("bij,bkl->bikjl", out, mats).reshape(
            len(indices), out.shape[1] * 2, out.shape[2] * 2)
    return out / math.sqrt(dim)


def process_fidelity_channel_vs_unitary(u_target: np.ndarray, c: Circuit,
                                        nm: NoiseModel, max_n: int = 6,
                                        chunk: int = 256) -> float:
    """Exact process fidelity between a target unitary channel and the noisy
    channel realized by the circuit (readout excluded).

    Computed as (1/4^n) sum_j Tr[(U sigma_j U^dag) Lambda(sigma_j)] over the
    normalized Pauli basis, evolving Paulis in chunks through the channel.
    """
    n = c.n
    if n > max_n:
        raise CapacityError(f"n={n} exceeds oracle limit {max_n}")
    dim = 1 << n
    if u_target.shape != (dim, dim):
        raise ContractError("target unitary has wrong dimension")
    total = 0.0
    for start in range(0, 4 ** n, chunk):
        idx = np.arange(start, min(start + chunk, 4 ** n))
        sig = _pauli_stack(n, idx)
        ref = u_target @ sig @ u_target.conj().T
        evolved = _evolve_channel(
            sig.reshape((len(idx),) + (2,) * (2 * n)), c, nm, n
        ).reshape(len(idx), dim, dim)
        total += float(np.real(np.einsum("bij,bij->", ref.conj(), evolved)))
    return total / 4 ** n


def exact_process_fidelity(c: Circuit, nm: NoiseModel, max_n: int = 6) -> float:
    """Eq.-1 oracle: fidelity of the circuit's noisy channel to its own ideal
    unitary. Deterministic channel composition; readout error excluded."""
    u = unitary_of(c, max_n=max_n)
    return process_fidelity_channel_vs_unitary(u, c, nm, max_n=max_n)
