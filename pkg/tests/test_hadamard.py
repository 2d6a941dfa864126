import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtunnel.hadamard import (
    as_vectors,
    build_hadamard_test,
    conjugate_circuit,
    controlled,
    exact_re_im,
    extract_re_im,
    run_hadamard_test,
)
from qtunnel.qcore import Circuit, CountsDistribution, simulate_statevector
from qtunnel.qcore import gates as G
from qtunnel.qcore.statevector import circuit_unitary
from qtunnel.tunnel import Discretization, PotentialSpec, TrotterConfig, WavepacketSpec, build_evolution_circuit

from conftest import make_random_circuit

SPEC_KINDS = ["H", "X", "SX", "RZ", "P", "CP", "CX", "CZ", "SWAP"]


def exact_branches(base):
    test = build_hadamard_test(base)
    # h is the top qubit, so the first half of the register is the h=0 branch
    probs = simulate_statevector(test.wrapped.unitary_part()).probabilities()
    n = test.working
    return probs[: 2**n], probs[2**n:]


@pytest.mark.parametrize("g", [
    G.h(0), G.x(0), G.sx(0), G.sxdg(0), G.rz(0.3, 0), G.p(0.7, 0), G.cx(0, 1), G.cx(1, 0),
    G.cz(0, 1), G.cp(0.4, 1, 0), G.swap(0, 1), G.diag([0.1, 0.5, -0.2, 1.3], (1, 0)),
    G.qft((0, 1)), G.iqft((1, 0)),
])
def test_controlled_gate_exact(g):
    u = circuit_unitary(Circuit(2, [g]))
    cu = circuit_unitary(Circuit(3, controlled(g, 2)))
    target = np.eye(8, dtype=complex)
    target[4:, 4:] = u
    assert np.max(np.abs(cu - target)) < 1e-12


def test_identity_base():
    re, im = exact_branches(Circuit(2, []))
    assert np.allclose(re, [1, 0, 0, 0]) and np.allclose(im, 0)
    d = run_hadamard_test(Circuit(2, []), 500, seed=1)
    assert d.re == {"00": 1.0} and d.im == {}


def test_phase_state():
    # (|0> + i|1>)/sqrt(2)
    base = Circuit(1, [G.h(0), G.p(np.pi / 2, 0)])
    re, im = exact_branches(base)
    assert np.allclose(re, [0.5, 0]) and np.allclose(im, [0, 0.5])


def test_known_amplitude_sampled():
    theta = np.arctan2(0.8, 0.6)
    base = Circuit(1, [G.diag([theta, 0.0], (0,))])
    shots = 20000
    d = run_hadamard_test(base, shots, seed=5)
    sigma = np.sqrt(0.36 * 0.64 / shots)
    assert abs(d.re.get("0", 0) - 0.36) < 3 * sigma
    assert abs(d.im.get("0", 0) - 0.64) < 3 * sigma
    assert "1" not in d.re and "1" not in d.im


def test_extract_all_real():
    d = extract_re_im(CountsDistribution({"000": 30, "001": 70}))
    assert d.re == {"00": 0.3, "01": 0.7} and d.im == {} and d.shots == 100


def test_extract_even_split():
    d = extract_re_im(CountsDistribution({"01": 50, "11": 50}))
    assert d.re == {"1": 0.5} and d.im == {"1": 0.5}


def test_extract_rejects_narrow_counts():
    with pytest.raises(ValueError):
        extract_re_im(CountsDistribution({"1": 4}))


def test_wrapped_layout():
    base = Circuit(3, [G.h(0), G.cx(0, 1)], metadata={"working_qubits": 2})
    test = build_hadamard_test(base)
    assert test.wrapped.num_qubits == 4 and test.test_qubit == 3
    assert test.wrapped.num_clbits == 3
    assert test.wrapped.measurements() == {0: 0, 1: 1, 2: 3}
    assert test.wrapped.gates[0] == G.h(3)


def test_rejects_measured_base():
    with pytest.raises(ValueError):
        build_hadamard_test(Circuit(1, [G.h(0)]).measure_all())


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 30), st.integers(0, 2**32 - 1))
def test_conjugation(n, num_gates, seed):
    rng = np.random.default_rng(seed)
    kinds = [k for k in SPEC_KINDS if n > 1 or k not in ("CP", "CX", "CZ", "SWAP")]
    base = make_random_circuit(rng, n, num_gates, kinds)
    a = simulate_statevector(base).amplitudes
    b = simulate_statevector(conjugate_circuit(base)).amplitudes
    assert np.max(np.abs(b - a.conj())) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 15), st.integers(0, 2**32 - 1))
def test_branches_are_re_im(n, num_gates, seed):
    rng = np.random.default_rng(seed)
    base = make_random_circuit(rng, n, num_gates, diag=True)
    re, im = exact_branches(base)
    er, ei = exact_re_im(base)
    assert np.max(np.abs(re - er)) < 1e-10 and np.max(np.abs(im - ei)) < 1e-10
    assert abs(re.sum() + im.sum() - 1) < 1e-10


def test_sampled_consistency_with_born():
    disc = Discretization(3, 8.0)
    base = build_evolution_circuit(disc, PotentialSpec("x1x", v=2.0), WavepacketSpec.gaussian(2.0, 1.0, 1.5), TrotterConfig(dt=0.1, steps=3, use_ancilla=True))
    shots = 40000
    d = run_hadamard_test(base, shots, seed=11)
    re, im = as_vectors(d, 3)
    born = simulate_statevector(base).probabilities()[:8]
    sigma = np.sqrt(born * (1 - born) / shots) + 1e-12
    assert np.all(np.abs(re + im - born) <= 3 * sigma + 1 / shots)
    assert d.total() == pytest.approx(1.0)
