import numpy as np
import pytest

from qtunnel.qcore import Circuit
from qtunnel.qcore import gates as G

ONE_Q = ["X", "SX", "SXDG", "H", "RZ", "P"]
TWO_Q = ["CX", "CZ", "CP", "SWAP"]


def make_random_circuit(rng, n, num_gates, kinds=None, diag=False):
    kinds = kinds or (ONE_Q + (TWO_Q if n > 1 else []))
    gates = []
    for _ in range(num_gates):
        name = kinds[rng.integers(len(kinds))]
        if name in ONE_Q:
            q = (int(rng.integers(n)),)
        else:
            q = tuple(int(v) for v in rng.choice(n, 2, replace=False))
        params = (float(rng.uniform(-np.pi, np.pi)),) if name in ("RZ", "P", "CP") else ()
        gates.append(G.Gate(name, q, params))
        if diag and n > 1 and rng.random() < 0.1:
            k = int(rng.integers(1, min(n, 3) + 1))
            qs = [int(v) for v in rng.choice(n, k, replace=False)]
            gates.append(G.diag(rng.uniform(-np.pi, np.pi, 2**k), qs))
    return Circuit(n, gates)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_circuit():
    return make_random_circuit


def random_density(rng, n):
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)
