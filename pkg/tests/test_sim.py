import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quorum import sim
from quorum.sim import GateOp, NoiseConfig, SimulationError


def random_state(rng, nq):
    v = rng.standard_normal(2**nq) + 1j * rng.standard_normal(2**nq)
    return v / np.linalg.norm(v)


def random_mixed(rng, nq, rank=3):
    vs = [random_state(rng, nq) for _ in range(rank)]
    w = rng.random(rank)
    w /= w.sum()
    return sum(wi * np.outer(v, v.conj()) for wi, v in zip(w, vs))


def swap_test_ops(n):
    anc = 2 * n
    return (
        [GateOp("H", (anc,))]
        + [GateOp("CSWAP", (anc, q, n + q)) for q in range(n)]
        + [GateOp("H", (anc,))]
    )


def swap_input(phi, psi):
    return np.kron(np.kron(phi, psi), [1.0, 0.0])


# -- init_state -------------------------------------------------------------

def test_init_state_basis():
    rho = sim.init_state(1, [1, 0])
    assert np.array_equal(rho, np.array([[1, 0], [0, 0]], dtype=complex))


def test_init_state_plus():
    s = 1 / math.sqrt(2)
    assert np.allclose(sim.init_state(1, [s, s]), 0.5, atol=1e-15)


def test_init_state_pure_for_embedding():
    from quorum.encoding import embed

    amps = embed([0.3, 0.4, 0.5], [0, 1, 2], 2)
    rho = sim.init_state(2, amps)
    assert abs(np.trace(rho) - 1) < 1e-9
    assert abs(np.trace(rho @ rho) - 1) < 1e-9


@pytest.mark.parametrize("amps", [[1, 0, 0], [0.5, 0.5]])
def test_init_state_rejects(amps):
    with pytest.raises(SimulationError):
        sim.init_state(1, amps)


# -- gates --------------------------------------------------------------------

def test_rx_pi_flips():
    rho = sim.apply_gate(sim.init_state(1, [1, 0]), GateOp("RX", (0,), math.pi))
    assert rho[1, 1].real == pytest.approx(1.0, abs=1e-15)


def test_cx_control_on_qubit0():
    # |10⟩ has index 2 with qubit 0 as the leading bit
    rho = sim.apply_gate(sim.init_state(2, [0, 0, 1, 0]), GateOp("CX", (0, 1)))
    assert rho[3, 3].real == pytest.approx(1.0)


def test_cx_matrix_matches_textbook():
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.array_equal(sim.gate_matrix(GateOp("CX", (0, 1))), expected)


@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi, 5.9])
def test_rz_keeps_probabilities(theta):
    rng = np.random.default_rng(4)
    rho = sim.init_state(1, random_state(rng, 1))
    out = sim.apply_gate(rho, GateOp("RZ", (0,), theta))
    assert np.allclose(np.diag(out), np.diag(rho), atol=1e-15)


def test_cswap_swaps_targets_when_control_set():
    # |1 0 1⟩ -> |1 1 0⟩
    psi = np.zeros(8)
    psi[0b101] = 1
    out = sim.apply_gate_sv(psi, GateOp("CSWAP", (0, 1, 2)))
    assert out[0b110] == pytest.approx(1.0)


def test_gate_on_nonadjacent_targets_matches_kron():
    rng = np.random.default_rng(0)
    rho = random_mixed(rng, 3)
    # CX with control 2, target 0, built by hand from projectors
    p0, p1 = np.diag([1, 0]), np.diag([0, 1])
    x, i2 = np.array([[0, 1], [1, 0]]), np.eye(2)
    u = np.kron(np.kron(i2, i2), p0) + np.kron(np.kron(x, i2), p1)
    got = sim.apply_gate(rho, GateOp("CX", (2, 0)))
    assert np.allclose(got, u @ rho @ u.conj().T, atol=1e-14)


def test_invalid_targets():
    rho = sim.init_state(2, [1, 0, 0, 0])
    with pytest.raises(SimulationError):
        sim.apply_gate(rho, GateOp("H", (2,)))
    with pytest.raises(SimulationError):
        GateOp("CX", (1, 1))
    with pytest.raises(SimulationError):
        GateOp("RX", (0,), math.inf)
    with pytest.raises(SimulationError):
        sim.apply_reset(rho, 5)
    with pytest.raises(SimulationError):
        sim.ancilla_zero_probability(rho, -1)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_unitarity(a, b):
    for op in [GateOp("RX", (0,), a), GateOp("RZ", (0,), b), GateOp("H", (0,)),
               GateOp("CX", (0, 1)), GateOp("CSWAP", (0, 1, 2))]:
        u = sim.gate_matrix(op)
        assert np.allclose(u @ u.conj().T, np.eye(len(u)), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_sequence_preserves_trace_hermiticity_psd(seed):
    rng = np.random.default_rng(seed)
    nq = 3
    rho = sim.init_state(nq, random_state(rng, nq))
    noise = NoiseConfig(True, 0.05, 0.1, 0.0)
    for _ in range(12):
        kind = rng.choice(["RX", "RZ", "H", "CX", "CSWAP", "RESET"])
        targets = tuple(rng.choice(nq, size=sim.GATE_ARITY[kind], replace=False))
        op = GateOp(kind, targets, float(rng.uniform(0, 2 * math.pi)))
        purity = np.trace(rho @ rho).real
        if kind == "RESET":
            rho = sim.apply_reset(rho, targets[0])
            if purity > 1 - 1e-12:
                assert np.trace(rho @ rho).real <= purity + 1e-9
        else:
            rho = sim.apply_gate(rho, op)
            assert abs(np.trace(rho @ rho).real - purity) < 1e-9
            rho = sim.apply_noise(rho, op, noise)
        assert abs(np.trace(rho) - 1) < 1e-9
        assert np.allclose(rho, rho.conj().T, atol=1e-9)
    assert np.linalg.eigvalsh(rho).min() >= -1e-8


def test_statevector_density_equivalence():
    rng = np.random.default_rng(11)
    nq = 4
    psi = random_state(rng, nq)
    rho = np.outer(psi, psi.conj())
    for _ in range(30):
        kind = rng.choice(["RX", "RZ", "H", "CX", "CSWAP"])
        targets = tuple(rng.choice(nq, size=sim.GATE_ARITY[kind], replace=False))
        op = GateOp(kind, targets, float(rng.uniform(0, 2 * math.pi)))
        psi = sim.apply_gate_sv(psi, op)
        rho = sim.apply_gate(rho, op)
    assert np.allclose(rho, np.outer(psi, psi.conj()), atol=1e-9)


def test_batched_gate_matches_loop():
    rng = np.random.default_rng(2)
    batch = np.stack([random_mixed(rng, 2) for _ in range(4)])
    op = GateOp("RX", (1,), 0.7)
    got = sim.apply_gate(batch, op)
    for b in range(4):
        assert np.allclose(got[b], sim.apply_gate(batch[b], op), atol=1e-15)


# -- reset --------------------------------------------------------------------

def test_reset_one_to_zero():
    rho = sim.apply_reset(sim.init_state(1, [0, 1]), 0)
    assert np.allclose(rho, [[1, 0], [0, 0]])


def test_reset_plus_to_zero():
    s = 1 / math.sqrt(2)
    assert np.allclose(sim.apply_reset(sim.init_state(1, [s, s]), 0), [[1, 0], [0, 0]], atol=1e-15)


def test_reset_bell_golden():
    s = 1 / math.sqrt(2)
    rho = sim.apply_reset(sim.init_state(2, [s, 0, 0, s]), 0)
    # hand-derived: ½(|00⟩⟨00| + |01⟩⟨01|)
    expected = np.diag([0.5, 0.5, 0.0, 0.0])
    assert np.max(np.abs(rho - expected)) <= 1e-12


def test_reset_can_purify_a_mixed_state():
    # purity only decreases under reset for pure inputs
    rho = sim.apply_reset(np.eye(2, dtype=complex) / 2, 0)
    assert np.trace(rho @ rho).real == pytest.approx(1.0)


def test_reset_matches_kraus_definition():
    rng = np.random.default_rng(5)
    rho = random_mixed(rng, 3)
    p0, p1 = np.diag([1, 0]), np.diag([0, 1])
    x = np.array([[0, 1], [1, 0]])
    i2 = np.eye(2)
    k0 = np.kron(np.kron(i2, p0), i2)
    k1 = np.kron(np.kron(i2, x @ p1), i2)
    expected = k0 @ rho @ k0.T + k1 @ rho @ k1.T
    got = sim.apply_reset(rho, 1)
    assert np.allclose(got, expected, atol=1e-15)
    marginal = got.reshape(2, 2, 2, 2, 2, 2)
    q1 = np.einsum("aibajb->ij", marginal)
    assert np.allclose(q1, [[1, 0], [0, 0]], atol=1e-15)


# -- SWAP test ------------------------------------------------------------------

def test_swap_identical_states():
    rng = np.random.default_rng(0)
    phi = random_state(rng, 2)
    p = sim.simulate(swap_test_ops(2), swap_input(phi, phi), 4)
    assert p == pytest.approx(1.0, abs=1e-12)


def test_swap_orthogonal_states():
    zero = np.zeros(8)
    zero[0] = 1
    one = np.zeros(8)
    one[-1] = 1
    p = sim.simulate(swap_test_ops(3), swap_input(zero, one), 6)
    assert p == pytest.approx(0.5, abs=1e-12)


def test_swap_zero_vs_plus_density_path():
    s = 1 / math.sqrt(2)
    rho = sim.init_state(3, swap_input([1, 0], [s, s]))
    for op in swap_test_ops(1):
        rho = sim.apply_gate(rho, op)
    assert sim.ancilla_zero_probability(rho, 2) == pytest.approx(0.75, abs=1e-12)


def test_swap_test_on_mixed_input_gives_overlap_trace():
    rng = np.random.default_rng(8)
    rho_a = random_mixed(rng, 1)
    psi = random_state(rng, 1)
    anc = np.diag([1, 0])
    rho = np.kron(np.kron(rho_a, np.outer(psi, psi.conj())), anc)
    for op in swap_test_ops(1):
        rho = sim.apply_gate(rho, op)
    expected = 0.5 * (1 + np.real(psi.conj() @ rho_a @ psi))
    assert sim.ancilla_zero_probability(rho, 2) == pytest.approx(expected, abs=1e-12)


# -- shots ----------------------------------------------------------------------

def test_shots_degenerate():
    assert sim.sample_shots(1.0, 4096, 3) == 1.0
    assert sim.sample_shots(0.0, 4096, 3) == 0.0


def test_shots_deterministic():
    assert sim.sample_shots(0.4, 4096, 12) == sim.sample_shots(0.4, 4096, 12)


def test_shots_concentration():
    bound = 3 * math.sqrt(0.75 * 0.25 / 4096)
    hits = sum(abs(sim.sample_shots(0.75, 4096, s) - 0.75) <= bound for s in range(1000))
    assert hits >= 990


def test_shots_rejects_zero():
    with pytest.raises(SimulationError):
        sim.sample_shots(0.5, 0, 1)


# -- noise --------------------------------------------------------------------

def test_noise_zero_is_identity():
    rng = np.random.default_rng(1)
    rho = random_mixed(rng, 2)
    out = sim.apply_noise(rho, GateOp("CX", (0, 1)), NoiseConfig(True, 0.0, 0.0, 0.0))
    assert np.array_equal(out, rho)


def test_full_depolarization_is_maximally_mixed():
    rho = sim.init_state(1, [1, 0])
    out = sim.apply_noise(rho, GateOp("H", (0,)), NoiseConfig(True, 1.0, 0.0, 0.0))
    assert np.allclose(out, np.eye(2) / 2)
    assert sim.ancilla_zero_probability(out, 0) == pytest.approx(0.5)


def test_two_qubit_depolarizing_matches_pauli_twirl():
    rng = np.random.default_rng(3)
    rho = random_mixed(rng, 3)
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    p = 0.3
    twirl = np.zeros_like(rho)
    for a in paulis:
        for b in paulis:
            u = np.kron(np.kron(a, np.eye(2)), b)  # acts on qubits 0 and 2
            twirl += u @ rho @ u.conj().T / 16
    expected = (1 - p) * rho + p * twirl
    got = sim.apply_noise(rho, GateOp("CX", (0, 2)), NoiseConfig(True, 0.0, p, 0.0))
    assert np.allclose(got, expected, atol=1e-14)


def test_readout_flip_brisbane():
    assert sim.readout_flip(1.0, NoiseConfig.brisbane().readout_flip) == pytest.approx(0.9862)


def test_noise_config_ranges():
    with pytest.raises(SimulationError):
        NoiseConfig(True, -0.1, 0.0, 0.0)
    assert NoiseConfig.brisbane().depol_2q == 2.903e-3
