"""Random autoencoder circuits with a reset bottleneck, read out by a SWAP test.

Layout of a circuit on ``2n + 1`` qubits: register A is ``[0, n)``, the
reference register B is ``[n, 2n)`` and the ancilla is ``2n``.  Both
registers start in the same embedded sample; only A passes through
encoder, reset and decoder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import sim
from .sim import GateOp, NoiseConfig

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AnsatzParams:
    rx_angles: np.ndarray
    rz_angles: np.ndarray
    topology: str = "linear"

    def __post_init__(self):
        if self.rx_angles.shape != self.rz_angles.shape or self.rx_angles.ndim != 2:
            raise ValueError("rx/rz angle arrays must both be num_layers x n_qubits")
        if self.topology not in ("linear", "ring"):
            raise ValueError(f"unknown entangler topology {self.topology!r}")

    @property
    def num_layers(self) -> int:
        return self.rx_angles.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.rx_angles.shape[1]


@dataclass(frozen=True)
class QuorumCircuit:
    n_qubits: int
    ops: tuple[GateOp, ...]
    amplitudes: np.ndarray

    @property
    def total_qubits(self) -> int:
        return 2 * self.n_qubits + 1

    @property
    def ancilla_index(self) -> int:
        return 2 * self.n_qubits


def draw_params(n_qubits: int, num_layers: int = 2, rng_seed=None, topology: str = "linear") -> AnsatzParams:
    """I.i.d. U[0, 2π) angles for every RX and RZ slot."""
    if num_layers < 1 or n_qubits < 1:
        raise ValueError("need at least one layer and one qubit")
    rng = np.random.default_rng(rng_seed)
    angles = rng.random((2, num_layers, n_qubits)) * TWO_PI
    angles[angles >= TWO_PI] = 0.0
    return AnsatzParams(angles[0], angles[1], topology)


def _entangler_pairs(n: int, topology: str) -> list[tuple[int, int]]:
    pairs = [(q, q + 1) for q in range(n - 1)]
    if topology == "ring" and n > 2:
        pairs.append((n - 1, 0))
    return pairs


def build_encoder(params: AnsatzParams) -> list[GateOp]:
    n = params.n_qubits
    ops: list[GateOp] = []
    for layer in range(params.num_layers):
        ops += [GateOp("RX", (q,), float(params.rx_angles[layer, q])) for q in range(n)]
        ops += [GateOp("RZ", (q,), float(params.rz_angles[layer, q])) for q in range(n)]
        ops += [GateOp("CX", pair) for pair in _entangler_pairs(n, params.topology)]
    return ops


def build_decoder(params: AnsatzParams) -> list[GateOp]:
    return [op.inverse() for op in reversed(build_encoder(params))]


def reset_qubits(n_qubits: int, reset_count: int) -> list[int]:
    """The bottleneck always resets the highest-index qubits of register A."""
    if not 0 <= reset_count <= n_qubits:
        raise ValueError(f"reset_count must lie in [0, {n_qubits}], got {reset_count}")
    return list(range(n_qubits - reset_count, n_qubits))


def compression_levels(n_qubits: int, include_full_reset: bool = False) -> list[int]:
    """Reset counts from highest compression to lowest."""
    top = n_qubits if include_full_reset else n_qubits - 1
    return list(range(top, 0, -1))


def swap_test_ops(n_qubits: int) -> list[GateOp]:
    anc = 2 * n_qubits
    return (
        [GateOp("H", (anc,))]
        + [GateOp("CSWAP", (anc, q, n_qubits + q)) for q in range(n_qubits)]
        + [GateOp("H", (anc,))]
    )


def build_circuit(sample: np.ndarray, params: AnsatzParams, reset_count: int) -> QuorumCircuit:
    sample = np.asarray(sample, dtype=float)
    n = params.n_qubits
    if sample.shape != (2**n,):
        raise ValueError(f"sample has {sample.size} amplitudes, ansatz expects {2**n}")
    ops = (
        build_encoder(params)
        + [GateOp("RESET", (q,)) for q in reset_qubits(n, reset_count)]
        + build_decoder(params)
        + swap_test_ops(n)
    )
    ancilla = np.array([1.0, 0.0])
    full = np.kron(np.kron(sample, sample), ancilla)
    return QuorumCircuit(n, tuple(ops), full)


def evaluate_circuit(circuit: QuorumCircuit, noise: NoiseConfig | None = None) -> float:
    """Gate-by-gate P(ancilla = 0) on the full register."""
    return sim.simulate(circuit.ops, circuit.amplitudes, circuit.ancilla_index, noise)


# -- batched evaluation ---------------------------------------------------

def encoder_unitary(params: AnsatzParams) -> np.ndarray:
    d = 2**params.n_qubits
    basis = np.eye(d, dtype=complex)
    for op in build_encoder(params):
        basis = sim.apply_gate_sv(basis, op)
    return basis.T


@lru_cache(maxsize=32)
def swap_observable(n_qubits: int, noise: NoiseConfig) -> np.ndarray:
    """Effective operator O on A⊗B with P0 = Tr(O (ρ_A ⊗ σ_B)).

    Obtained by pulling the ancilla-zero projector back through the (noisy)
    SWAP-test gates and sandwiching with ancilla ``|0⟩``.  Readout error is
    not included.  Returned with shape ``(d, d, d, d)`` indexed ``[i, j, k, l]``
    for ``⟨i j| O |k l⟩``.
    """
    nq = 2 * n_qubits + 1
    dim = 2**nq
    anc = nq - 1
    diag = np.array([0.0 if (idx >> (nq - 1 - anc)) & 1 else 1.0 for idx in range(dim)])
    obs = np.diag(diag).astype(complex)
    for op in reversed(swap_test_ops(n_qubits)):
        obs = sim.depolarize(obs, op.targets, noise.gate_error(op))
        obs = sim.apply_unitary(obs, sim.gate_matrix(op).conj().T, op.targets)
    block = obs[0::2, 0::2]
    d = 2**n_qubits
    out = block.reshape(d, d, d, d)
    out.setflags(write=False)
    return out


def register_channel(params: AnsatzParams, reset_count: int, noise: NoiseConfig) -> np.ndarray:
    """Noisy encoder, reset and decoder acting on register A, as a superoperator.

    ``S[k, i, p, q]`` is entry ``(k, i)`` of the output for input ``|p⟩⟨q|``.
    """
    d = 2**params.n_qubits
    rho = np.eye(d * d, dtype=complex).reshape(d, d, d, d)
    stages = (
        build_encoder(params)
        + [GateOp("RESET", (q,)) for q in reset_qubits(params.n_qubits, reset_count)]
        + build_decoder(params)
    )
    for op in stages:
        if op.kind == "RESET":
            rho = sim.apply_reset(rho, op.targets[0])
        else:
            rho = sim.apply_noise(sim.apply_gate(rho, op), op, noise)
    return rho.transpose(2, 3, 0, 1)


def swap_test_p0(
    amplitudes: np.ndarray,
    params: AnsatzParams,
    reset_count: int,
    noise: NoiseConfig | None = None,
) -> np.ndarray:
    """Exact ancilla-zero probability for a batch of embedded samples.

    Without noise the bottleneck reduces to ``F = Σ_r |⟨ψ_0|ψ_r⟩|²`` where
    ``ψ = U a`` is split by the values ``r`` of the reset qubits; then
    ``P0 = (1 + F) / 2``.  With noise, the register-A channel and the
    pulled-back SWAP-test observable fold into one quadratic form in ``a ⊗ a``.
    """
    a = np.atleast_2d(np.asarray(amplitudes, dtype=float))
    n = params.n_qubits
    if a.shape[1] != 2**n:
        raise ValueError(f"samples have {a.shape[1]} amplitudes, ansatz expects {2**n}")
    noise = noise or NoiseConfig()
    if noise.enabled and (noise.depol_1q or noise.depol_2q):
        chan = register_channel(params, reset_count, noise)
        kernel = np.einsum("ijkl,kipq->pqlj", swap_observable(n, noise), chan)
        d = 2**n
        pairs = (a[:, :, None] * a[:, None, :]).reshape(len(a), d * d)
        p0 = np.real(np.einsum("nx,xy,ny->n", pairs, kernel.reshape(d * d, d * d), pairs))
    else:
        resets = reset_qubits(n, reset_count)
        k = len(resets)
        psi = a @ encoder_unitary(params).T
        t = psi.reshape((-1,) + (2,) * n)
        kept = [q for q in range(n) if q not in resets]
        t = t.transpose([0] + [1 + q for q in kept + resets])
        t = t.reshape(-1, 2 ** (n - k), 2**k)
        overlaps = np.einsum("nj,njr->nr", t[:, :, 0].conj(), t)
        fid = np.sum(np.abs(overlaps) ** 2, axis=1)
        p0 = 0.5 * (1.0 + fid)
    p0 = np.clip(p0, 0.0, 1.0)
    if noise.enabled and noise.readout_flip:
        p0 = sim.readout_flip(p0, noise.readout_flip)
    return p0
