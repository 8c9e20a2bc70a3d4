"""Small exact quantum simulator: statevectors, density matrices, reset, noise.

Qubit ``0`` is the most significant bit of a basis index, so ``|q0 q1 ... ⟩``
reads left to right.  All state arrays may carry leading batch dimensions;
the trailing one (statevector) or two (density matrix) axes hold the state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-9

SINGLE_QUBIT = frozenset({"RX", "RZ", "H"})
GATE_ARITY = {"RX": 1, "RZ": 1, "H": 1, "CX": 2, "CSWAP": 3, "RESET": 1}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_CSWAP = np.eye(8, dtype=complex)
_CSWAP[[5, 6]] = _CSWAP[[6, 5]]
for _m in (_H, _CX, _CSWAP):
    _m.setflags(write=False)


class SimulationError(ValueError):
    """Invalid state, gate or qubit index."""


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != GATE_ARITY[self.kind]:
            raise SimulationError(
                f"{self.kind} acts on {GATE_ARITY[self.kind]} qubit(s), got {self.targets}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise SimulationError(f"repeated target in {self.targets}")
        if not math.isfinite(self.angle):
            raise SimulationError("gate angle must be finite")

    def inverse(self) -> "GateOp":
        if self.kind == "RESET":
            raise SimulationError("RESET has no inverse")
        if self.kind in ("RX", "RZ"):
            return GateOp(self.kind, self.targets, -self.angle)
        return self


@dataclass(frozen=True)
class NoiseConfig:
    """Gate-level depolarizing noise plus a symmetric readout flip."""

    enabled: bool = False
    depol_1q: float = 0.0
    depol_2q: float = 0.0
    readout_flip: float = 0.0

    def __post_init__(self):
        for name in ("depol_1q", "depol_2q", "readout_flip"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SimulationError(f"{name} must lie in [0, 1], got {value}")

    @classmethod
    def brisbane(cls) -> "NoiseConfig":
        """Median error rates of IBM Brisbane (SX, two-qubit, readout)."""
        return cls(enabled=True, depol_1q=2.274e-4, depol_2q=2.903e-3, readout_flip=1.38e-2)

    def gate_error(self, op: GateOp) -> float:
        if not self.enabled or op.kind == "RESET":
            return 0.0
        return self.depol_1q if op.kind in SINGLE_QUBIT else self.depol_2q


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


def gate_matrix(op: GateOp) -> np.ndarray:
    if op.kind == "RX":
        return rx(op.angle)
    if op.kind == "RZ":
        return rz(op.angle)
    if op.kind == "H":
        return _H
    if op.kind == "CX":
        return _CX
    if op.kind == "CSWAP":
        return _CSWAP
    raise SimulationError("RESET is a channel, not a unitary")


def num_qubits_of(dim: int) -> int:
    q = dim.bit_length() - 1
    if dim < 1 or 1 << q != dim:
        raise SimulationError(f"dimension {dim} is not a power of two")
    return q


def _check_targets(targets: Iterable[int], nq: int) -> None:
    for t in targets:
        if not 0 <= t < nq:
            raise SimulationError(f"qubit index {t} out of range for {nq} qubits")


def _apply_on_axes(tensor: np.ndarray, mat: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a k-qubit matrix into the given tensor axes."""
    k = len(axes)
    m = mat.reshape((2,) * (2 * k))
    out = np.tensordot(m, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


# -- statevectors ---------------------------------------------------------

def init_statevector(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    num_qubits_of(psi.shape[-1])
    norms = np.sum(np.abs(psi) ** 2, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= NORM_TOL):
        raise SimulationError("amplitudes are not normalized")
    return psi


def apply_gate_sv(psi: np.ndarray, op: GateOp) -> np.ndarray:
    nq = num_qubits_of(psi.shape[-1])
    _check_targets(op.targets, nq)
    batch = psi.shape[:-1]
    t = psi.reshape(batch + (2,) * nq)
    axes = [len(batch) + q for q in op.targets]
    return _apply_on_axes(t, gate_matrix(op), axes).reshape(psi.shape)


def zero_probability_sv(psi: np.ndarray, qubit: int) -> np.ndarray | float:
    nq = num_qubits_of(psi.shape[-1])
    _check_targets([qubit], nq)
    batch = psi.shape[:-1]
    t = np.abs(psi.reshape(batch + (2,) * nq)) ** 2
    t = np.take(t, 0, axis=len(batch) + qubit)
    p = t.reshape(batch + (-1,)).sum(axis=-1)
    return np.clip(p, 0.0, 1.0)


# -- density matrices -----------------------------------------------------

def init_state(num_qubits: int, amplitudes) -> np.ndarray:
    """Return the pure density matrix ``|a⟩⟨a|`` for normalized amplitudes."""
    a = np.asarray(amplitudes, dtype=complex)
    if a.shape[-1] != 2**num_qubits:
        raise SimulationError(
            f"expected {2**num_qubits} amplitudes for {num_qubits} qubits, got {a.shape[-1]}"
        )
    a = init_statevector(a)
    return a[..., :, None] * a[..., None, :].conj()


def _dm_tensor(rho: np.ndarray) -> tuple[np.ndarray, int, int]:
    nq = num_qubits_of(rho.shape[-1])
    if rho.shape[-2] != rho.shape[-1]:
        raise SimulationError("density matrix must be square")
    batch = rho.shape[:-2]
    return rho.reshape(batch + (2,) * (2 * nq)), nq, len(batch)


def apply_unitary(rho: np.ndarray, mat: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    t, nq, b = _dm_tensor(rho)
    _check_targets(targets, nq)
    t = _apply_on_axes(t, mat, [b + q for q in targets])
    t = _apply_on_axes(t, mat.conj(), [b + nq + q for q in targets])
    return t.reshape(rho.shape)


def apply_gate(rho: np.ndarray, op: GateOp) -> np.ndarray:
    """Return ``U ρ U†`` for a unitary gate."""
    if op.kind == "RESET":
        raise SimulationError("use apply_reset for RESET")
    return apply_unitary(rho, gate_matrix(op), op.targets)


def _trace_pair(t: np.ndarray, ket: int, bra: int) -> np.ndarray:
    # ket < bra, so the bra axis shifts left once the ket axis is taken
    return np.take(np.take(t, 0, ket), 0, bra - 1) + np.take(np.take(t, 1, ket), 1, bra - 1)


def _replace_with_mixed(t: np.ndarray, nq: int, b: int, qubit: int) -> np.ndarray:
    """Tr_q(ρ) ⊗ I/2 on one qubit, in tensor form."""
    ket, bra = b + qubit, b + nq + qubit
    reduced = _trace_pair(t, ket, bra)
    out = np.zeros_like(t)
    idx0 = [slice(None)] * t.ndim
    idx1 = [slice(None)] * t.ndim
    idx0[ket] = idx0[bra] = 0
    idx1[ket] = idx1[bra] = 1
    out[tuple(idx0)] = reduced / 2
    out[tuple(idx1)] = reduced / 2
    return out


def apply_reset(rho: np.ndarray, qubit: int) -> np.ndarray:
    """Measure-and-reinitialize ``qubit`` to ``|0⟩``: P0ρP0 + X P1ρP1 X."""
    t, nq, b = _dm_tensor(rho)
    _check_targets([qubit], nq)
    ket, bra = b + qubit, b + nq + qubit
    reduced = _trace_pair(t, ket, bra)
    out = np.zeros_like(t)
    idx = [slice(None)] * t.ndim
    idx[ket] = idx[bra] = 0
    out[tuple(idx)] = reduced
    return out.reshape(rho.shape)


def depolarize(rho: np.ndarray, qubits: Sequence[int], p: float) -> np.ndarray:
    """(1-p)ρ + p·Tr_S(ρ) ⊗ I/2^|S| on the qubit set S."""
    if p == 0.0:
        return rho
    t, nq, b = _dm_tensor(rho)
    _check_targets(qubits, nq)
    mixed = t
    for q in qubits:
        mixed = _replace_with_mixed(mixed, nq, b, q)
    return ((1.0 - p) * t + p * mixed).reshape(rho.shape)


def apply_noise(rho: np.ndarray, op: GateOp, cfg: NoiseConfig) -> np.ndarray:
    """Depolarize the qubits of ``op`` at the rate matching its arity."""
    p = cfg.gate_error(op)
    return depolarize(rho, op.targets, p) if p else rho


def readout_flip(p_zero, flip: float):
    return p_zero * (1.0 - flip) + (1.0 - p_zero) * flip


def ancilla_zero_probability(rho: np.ndarray, ancilla: int) -> np.ndarray | float:
    """Tr(P0 ρ) for the projector onto ``ancilla = |0⟩``, clamped to [0, 1]."""
    t, nq, b = _dm_tensor(rho)
    _check_targets([ancilla], nq)
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    diag = diag.reshape(rho.shape[:-2] + (2,) * nq)
    p = np.take(diag, 0, axis=b + ancilla).reshape(rho.shape[:-2] + (-1,)).sum(axis=-1)
    return np.clip(p, 0.0, 1.0)


def sample_shots(p_zero, shots: int, rng_seed=None):
    """Estimate ``p_zero`` from ``shots`` Bernoulli trials in one binomial draw.

    ``rng_seed`` may be an int, a SeedSequence or a Generator.
    """
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    rng = np.random.default_rng(rng_seed)
    p = np.clip(p_zero, 0.0, 1.0)
    return rng.binomial(shots, p) / shots


def simulate(
    ops: Sequence[GateOp],
    amplitudes,
    ancilla: int,
    noise: NoiseConfig | None = None,
) -> float:
    """Run ``ops`` from the given initial amplitudes and return P(ancilla = 0).

    Evolves a statevector until the first RESET (or first noisy gate), then
    switches to a density matrix.  Readout error, when enabled, is applied to
    the returned probability.
    """
    noise = noise or NoiseConfig()
    psi = init_statevector(amplitudes)
    rho = None
    for op in ops:
        if rho is None and (op.kind == "RESET" or noise.gate_error(op) > 0):
            rho = psi[:, None] * psi[None, :].conj()
        if rho is None:
            psi = apply_gate_sv(psi, op)
        elif op.kind == "RESET":
            rho = apply_reset(rho, op.targets[0])
        else:
            rho = apply_noise(apply_gate(rho, op), op, noise)
    if rho is None:
        p = float(zero_probability_sv(psi, ancilla))
    else:
        p = float(ancilla_zero_probability(rho, ancilla))
    if noise.enabled and noise.readout_flip:
        p = readout_flip(p, noise.readout_flip)
    return p
