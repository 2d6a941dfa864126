import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_random_circuit, random_density
from qtunnel.qcore import (
    Circuit,
    CountsDistribution,
    DensityMatrix,
    NoiseModel,
    Observable,
    StateVector,
    circuit_unitary,
    execute,
    expectation,
    partial_trace,
    sample_counts,
    simulate_density,
    simulate_statevector,
)
from qtunnel.qcore import gates as G
from qtunnel.qcore.density import depolarize

S2 = 1 / np.sqrt(2)


# -- gates -------------------------------------------------------------------

ALL_GATES = [
    G.x(0), G.sx(0), G.sxdg(0), G.h(0), G.rz(0.7, 0), G.p(-1.3, 0),
    G.cx(0, 1), G.cz(0, 1), G.cp(0.4, 0, 1), G.swap(0, 1),
    G.diag([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], [0, 1, 2]),
    G.qft([0, 1, 2]), G.iqft([0, 1]),
]


@pytest.mark.parametrize("gate", ALL_GATES, ids=lambda g: g.name)
def test_gate_matrices_unitary(gate):
    m = G.gate_matrix(gate)
    assert np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) < 1e-12


@pytest.mark.parametrize("gate", ALL_GATES, ids=lambda g: g.name)
def test_inverse_and_conjugate_are_exact(gate):
    n = max(gate.qubits) + 1
    u = circuit_unitary(Circuit(n, [gate]))
    ui = circuit_unitary(Circuit(n, [G.inverse(gate)]))
    uc = circuit_unitary(Circuit(n, G.conjugate(gate)))
    assert np.allclose(ui @ u, np.eye(2**n), atol=1e-12)
    assert np.allclose(uc, u.conj(), atol=1e-12)


def test_gate_invariants_rejected():
    with pytest.raises(ValueError):
        G.Gate("CX", (1, 1))
    with pytest.raises(ValueError):
        G.Gate("RZ", (0,))
    with pytest.raises(ValueError):
        G.Gate("DIAG", (0, 1), phases=(0.0, 1.0))
    with pytest.raises(ValueError):
        G.Gate("FOO", (0,))


def test_circuit_invariants():
    with pytest.raises(ValueError):
        Circuit(2, [G.x(2)])
    with pytest.raises(ValueError):
        Circuit(1, [G.measure(0, 0), G.x(0)], num_clbits=1)
    with pytest.raises(ValueError):
        Circuit(2, [G.measure(0, 0), G.measure(1, 0)], num_clbits=1)


def test_circuit_json_roundtrip(rng):
    c = make_random_circuit(rng, 3, 30, diag=True).measure_all()
    c = c.replace(metadata={"label": "QFT"})
    d = json.loads(c.to_json())
    assert set(d) == {"num_qubits", "num_clbits", "gates", "metadata"}
    assert Circuit.from_json(c.to_json()) == c


def test_ccx_macro_is_toffoli():
    u = circuit_unitary(Circuit(3, G.ccx(0, 1, 2)))
    expect = np.eye(8)
    expect[[3, 7]] = expect[[7, 3]]
    assert np.max(np.abs(u - expect)) < 1e-12


# -- statevector -------------------------------------------------------------

def test_hadamard_on_zero():
    psi = simulate_statevector(Circuit(1, [G.h(0)]))
    assert np.allclose(psi.amplitudes, [S2, S2], atol=1e-15)


def test_empty_circuit_is_identity(rng):
    a = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi = StateVector(a / np.linalg.norm(a))
    assert np.allclose(simulate_statevector(Circuit(3), psi).amplitudes, psi.amplitudes)


def test_cx_little_endian():
    # (|00> + |10>)/sqrt2: qubit 1 in superposition, qubit 0 = 0 -> indices 0 and 2
    psi = StateVector(np.array([S2, 0, S2, 0]))
    out = simulate_statevector(Circuit(2, [G.cx(1, 0)]), psi)
    assert np.allclose(out.amplitudes, [S2, 0, 0, S2])
    # control on qubit 0 with qubit 0 prepared in |+>
    out = simulate_statevector(Circuit(2, [G.h(0), G.cx(0, 1)]))
    assert np.allclose(out.amplitudes, [S2, 0, 0, S2])


def test_statevector_errors():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        simulate_statevector(Circuit(2), StateVector.zero(3))
    with pytest.raises(ValueError):
        simulate_statevector(Circuit(1, [G.measure(0, 0)], num_clbits=1))


def _kron_unitary(gate, n):
    """Independent dense embedding via explicit basis enumeration."""
    m = G.gate_matrix(gate)
    u = np.zeros((2**n, 2**n), dtype=complex)
    qs = gate.qubits
    for col in range(2**n):
        sub_in = sum(((col >> q) & 1) << i for i, q in enumerate(qs))
        rest = col & ~sum(1 << q for q in qs)
        for sub_out in range(2 ** len(qs)):
            row = rest | sum(((sub_out >> i) & 1) << q for i, q in enumerate(qs))
            u[row, col] += m[sub_out, sub_in]
    return u


def test_simulator_matches_explicit_embedding(rng):
    c = make_random_circuit(rng, 4, 60, diag=True)
    expect = np.eye(16, dtype=complex)
    for g in c.gates:
        expect = _kron_unitary(g, 4) @ expect
    assert np.max(np.abs(circuit_unitary(c) - expect)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_norm_preserved(n, seed):
    rng = np.random.default_rng(seed)
    psi = simulate_statevector(make_random_circuit(rng, n, 100, diag=True))
    assert abs(np.sum(psi.probabilities()) - 1) < 1e-10


# -- density -----------------------------------------------------------------

def test_zero_noise_density_equals_pure(rng):
    c = make_random_circuit(rng, 3, 40, diag=True)
    rho = simulate_density(c, NoiseModel(0, 0))
    psi = simulate_statevector(c).amplitudes
    assert np.max(np.abs(rho.entries - np.outer(psi, psi.conj()))) < 1e-12


def test_full_depolarizing_gives_maximally_mixed():
    rho = simulate_density(Circuit(1, [G.x(0)]), NoiseModel(p1=1.0))
    assert np.allclose(rho.entries, np.eye(2) / 2, atol=1e-15)


def _superop_unitary(u):
    # column-stacking vec: vec(U rho U^+) = (U^* kron U) vec(rho)
    return np.kron(u.conj(), u)


def _superop_depolarizing(p, d):
    ident = np.eye(d).reshape(-1, order="F")
    return (1 - p) * np.eye(d * d) + p * np.outer(ident / d, ident)


def test_h_h_with_depolarizing_matches_superoperator_oracle():
    p = 0.1
    hm = G.gate_matrix(G.h(0))
    s = _superop_depolarizing(p, 2) @ _superop_unitary(hm)
    total = s @ s
    rho0 = np.array([[1, 0], [0, 0]], dtype=complex).reshape(-1, order="F")
    expect = (total @ rho0).reshape(2, 2, order="F")
    rho = simulate_density(Circuit(1, [G.h(0), G.h(0)]), NoiseModel(p1=p), scale=1.0)
    assert np.allclose(np.diag(rho.entries), np.diag(expect), atol=1e-14)
    # closed form: p(1) = (1 - (1-p)^2) / 2
    assert abs(rho.entries[1, 1].real - (1 - 0.9**2) / 2) < 1e-14


def test_two_qubit_depolarizing_matches_superoperator(rng):
    rho = random_density(rng, 3)
    p = 0.23
    out = depolarize(rho, [2, 0], p, 3)
    # oracle via Pauli twirl over the two-qubit support
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    twirl = np.zeros_like(rho)
    for a in paulis:
        for b in paulis:
            # qubit 2 -> a, qubit 0 -> b, identity on qubit 1 (MSB first kron order)
            op = np.kron(np.kron(a, np.eye(2)), b)
            twirl += op @ rho @ op.conj().T
    expect = (1 - p) * rho + p * twirl / 16
    assert np.max(np.abs(out - expect)) < 1e-12


def test_noise_scaling_and_clamp():
    nm = NoiseModel(p1=0.4, p2=0.6)
    assert nm.gate_probability(G.x(0), 2.0) == 0.8
    assert nm.gate_probability(G.cx(0, 1), 3.0) == 1.0
    with pytest.raises(ValueError):
        NoiseModel(p1=1.5)


def test_density_cap():
    with pytest.raises(ValueError):
        simulate_density(Circuit(11), NoiseModel())


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1), st.floats(0, 1), st.floats(0, 1))
def test_noisy_density_is_valid_state(n, seed, p1, p2):
    rng = np.random.default_rng(seed)
    c = make_random_circuit(rng, n, 25)
    rho = simulate_density(c, NoiseModel(p1, p2))
    rho.check(1e-10)


# -- partial trace -----------------------------------------------------------

def test_partial_trace_product_state():
    rho = np.zeros((4, 4))
    rho[1, 1] = 1  # |01>: qubit 0 is 1
    red = partial_trace(DensityMatrix(rho), [0])
    assert np.allclose(red.entries, [[0, 0], [0, 1]])
    red1 = partial_trace(DensityMatrix(rho), [1])
    assert np.allclose(red1.entries, [[1, 0], [0, 0]])


def test_partial_trace_bell():
    psi = simulate_statevector(Circuit(2, [G.h(0), G.cx(0, 1)]))
    red = partial_trace(DensityMatrix.from_statevector(psi), [0])
    assert np.allclose(red.entries, np.eye(2) / 2, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_partial_trace_recovers_factors(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(rng, 1) for _ in range(3))
    # kron order is MSB first: qubit 2 = a, qubit 1 = b, qubit 0 = c
    full = DensityMatrix(np.kron(np.kron(a, b), c))
    assert np.max(np.abs(partial_trace(full, [0]).entries - c)) < 1e-10
    assert np.max(np.abs(partial_trace(full, [2]).entries - a)) < 1e-10
    assert np.max(np.abs(partial_trace(full, [1, 2]).entries - np.kron(a, b))) < 1e-10
    # reversed keep order swaps the factors
    assert np.max(np.abs(partial_trace(full, [2, 1]).entries - np.kron(b, a))) < 1e-10


def test_partial_trace_errors():
    rho = DensityMatrix(np.eye(4) / 4)
    for keep in ([], [0, 0], [2]):
        with pytest.raises(ValueError):
            partial_trace(rho, keep)


# -- sampling / counts -------------------------------------------------------

def test_sample_basis_state():
    counts = sample_counts(StateVector.basis(2, 2), 100, seed=1)
    assert counts.counts == {"10": 100}


def test_sample_uniform_within_binomial_bound():
    psi = simulate_statevector(Circuit(2, [G.h(0), G.h(1)]))
    counts = sample_counts(psi, 4000, seed=7)
    sigma = np.sqrt(4000 * 0.25 * 0.75)
    for k in ("00", "01", "10", "11"):
        assert abs(counts.counts[k] - 1000) < 5 * sigma


def test_readout_flip_rate():
    counts = sample_counts(StateVector.zero(1), 10**5, readout={0: [[0.9, 0.1], [0.1, 0.9]]}, seed=3)
    frac = counts.counts.get("1", 0) / 10**5
    assert 0.094 <= frac <= 0.106


def test_sampling_deterministic_per_seed(rng):
    psi = simulate_statevector(make_random_circuit(rng, 3, 20))
    assert sample_counts(psi, 1000, seed=5) == sample_counts(psi, 1000, seed=5)
    assert sample_counts(psi, 1000, seed=5) != sample_counts(psi, 1000, seed=6)


def test_counts_invariants():
    with pytest.raises(ValueError):
        CountsDistribution({"01": 3, "1": 2})
    with pytest.raises(ValueError):
        CountsDistribution({"01": 3}, shots=4)
    c = CountsDistribution.from_dict({"shots": 5, "counts": {"01": 3, "10": 2}})
    assert json.loads(c.to_json()) == {"shots": 5, "counts": {"01": 3, "10": 2}}


def test_expectation_examples():
    ind = Observable.indicator("10")
    assert expectation(CountsDistribution({"10": 4000}), ind) == 1.0
    assert expectation(CountsDistribution({"00": 2000, "10": 2000}), ind) == 0.5
    assert abs(expectation(CountsDistribution({"10": 802, "00": 198}), ind) - 0.802) < 1e-15


def test_execute_factorized_matches_joint():
    # two independent Bell pairs measured into 4 bits, versus one 4-qubit sim
    c = Circuit(5, [G.h(0), G.cx(0, 1), G.x(3), G.h(4), G.cx(4, 3)], num_clbits=4)
    c = c.append([G.measure(0, 0), G.measure(1, 1), G.measure(3, 2), G.measure(4, 3)])
    counts = execute(c, 40000, seed=11)
    assert counts.width == 4 and len(counts.counts) == 4
    # clbits 0,1 correlated (Bell pair); clbits 2,3 anti-correlated (qubit 3 pre-flipped)
    for k in counts.counts:
        assert k[3] == k[2] and k[0] != k[1]
    assert execute(c, 1000, seed=3) == execute(c, 1000, seed=3)
