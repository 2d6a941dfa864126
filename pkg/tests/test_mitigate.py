import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtunnel.mitigate import (
    ConfusionMatrix,
    MitigationReport,
    ZneConfig,
    apply_rem,
    build_confusion_matrix,
    extrapolate,
    fold_count,
    fold_local,
    polynomial_fit,
    richardson,
    total_variation,
    zne_estimate,
)
from qtunnel.qcore import Circuit, CountsDistribution, NoiseModel, execute, simulate_statevector
from qtunnel.qcore import gates as G
from qtunnel.qcore.measure import measured_distribution
from qtunnel.qcore.statevector import circuit_unitary
from qtunnel.transpile import load_chip, transpile_pipeline
from qtunnel.tunnel import Discretization, PotentialSpec, TrotterConfig, WavepacketSpec, build_evolution_circuit
from qtunnel.workflow import EndToEndConfig, RemConfig, ideal_transmission, run_endtoend, run_rem

from conftest import make_random_circuit

LAMS = (1.0, 1.5, 2.0, 2.5, 3.0)
FOUR = Circuit(2, [G.h(0), G.cx(0, 1), G.rz(0.3, 1), G.sx(0)])


def barrier_circuit():
    return build_evolution_circuit(Discretization(2, 2.035), PotentialSpec("x1", v=1.0), WavepacketSpec.basis(0),
                                   TrotterConfig(dt=0.1, steps=7), measure=True)


# -- folding ----------------------------------------------------------------

def test_fold_identity_scale():
    assert fold_local(FOUR, 1.0) == FOUR


@pytest.mark.parametrize("lam, size", [(1.0, 4), (1.5, 6), (2.0, 8), (2.5, 10), (3.0, 12), (5.0, 20)])
def test_fold_gate_count(lam, size):
    folded = fold_local(FOUR, lam)
    assert len(folded) == size == 4 + 2 * fold_count(4, lam)
    assert np.max(np.abs(circuit_unitary(folded) - circuit_unitary(FOUR))) < 1e-12


def test_fold_first_gates_in_order():
    folded = fold_local(FOUR, 2.0)
    assert [g.name for g in folded.gates] == ["H", "H", "H", "CX", "CX", "CX", "RZ", "SX"]
    assert folded.gates[1] == G.inverse(G.h(0))


def test_fold_rounds_half_up():
    assert fold_count(3, 2.0) == 2  # 1.5 -> 2
    assert fold_count(5, 1.5) == 1  # 1.25 -> 1


def test_fold_keeps_measurements_terminal():
    c = FOUR.measure_all()
    folded = fold_local(c, 3.0)
    assert [g.name for g in folded.gates[-2:]] == ["MEASURE", "MEASURE"]
    assert folded.metadata["fold_scale"] == 3.0


def test_fold_rejects_scale_below_one():
    with pytest.raises(ValueError):
        fold_local(FOUR, 0.9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 4), lam=st.sampled_from(LAMS + (4.0,)))
def test_folding_preserves_state(seed, n, lam):
    c = make_random_circuit(np.random.default_rng(seed), n, 12)
    a = simulate_statevector(c).amplitudes
    b = simulate_statevector(fold_local(c, lam)).amplitudes
    assert np.max(np.abs(a - b)) < 1e-10


# -- extrapolation ----------------------------------------------------------

def test_richardson_linear():
    r = zne_estimate(lambda c: 0.5 + 0.3 * c.metadata.get("fold_scale", 1.0), FOUR, ZneConfig((1, 2, 3)))
    assert abs(r.value - 0.5) < 1e-12
    assert [l for l, _ in r.points] == [1.0, 2.0, 3.0]


def test_polynomial_quadratic():
    cfg = ZneConfig(extrapolator="polynomial", degree=2)
    r = zne_estimate(lambda c: 0.9 - 0.1 * c.metadata.get("fold_scale", 1.0) ** 2, FOUR, cfg)
    assert abs(r.value - 0.9) < 1e-9
    assert r.extrapolator == "polynomial(2)"


def test_polynomial_smooths_noise_better_than_richardson():
    lams = np.array(LAMS)
    w_rich = [richardson(lams, np.eye(5)[i]) for i in range(5)]
    w_poly = [polynomial_fit(lams, np.eye(5)[i], 2) for i in range(5)]
    assert np.allclose(w_rich, [15, -40, 45, -24, 5])
    assert np.linalg.norm(w_poly) < np.linalg.norm(w_rich) / 10


@pytest.mark.parametrize("kw", [
    dict(scale_factors=(1.5, 2.0)), dict(scale_factors=(1.0,)), dict(scale_factors=(1.0, 2.0, 2.0)),
    dict(extrapolator="cubic"), dict(extrapolator="polynomial", degree=5), dict(folding="global"),
])
def test_zne_config_validation(kw):
    with pytest.raises(ValueError):
        ZneConfig(**kw)


def test_zne_rejects_non_finite_executor():
    with pytest.raises(ValueError):
        zne_estimate(lambda c: float("nan"), FOUR)


def test_random_polynomials_recovered():
    rng = np.random.default_rng(11)
    for _ in range(100):
        m = int(rng.integers(2, 7))
        lams = np.sort(rng.choice(np.arange(1.0, 5.01, 0.25), m, replace=False))
        lams[0] = 1.0
        lams = np.unique(lams)
        m = lams.size
        deg = int(rng.integers(0, m))
        coef = rng.normal(size=deg + 1)
        vals = np.polyval(coef[::-1], lams)
        assert abs(extrapolate(lams, vals, "richardson") - coef[0]) < 1e-9
        assert abs(extrapolate(lams, vals, "polynomial", deg) - coef[0]) < 1e-9


@settings(max_examples=50, deadline=None)
@given(coef=st.lists(st.floats(-2, 2), min_size=1, max_size=5))
def test_richardson_exact_below_point_count(coef):
    vals = np.polyval(coef[::-1], LAMS)
    assert abs(richardson(LAMS, vals) - coef[0]) < 1e-9


# -- noise scaling on the barrier circuit -----------------------------------

def test_transmission_decreases_with_scale():
    r = transpile_pipeline(barrier_circuit(), load_chip("osaka"))
    used = sorted(r.circuit.active_qubits())
    local = r.circuit.remap({p: i for i, p in enumerate(used)}, len(used))
    noise = NoiseModel(0.0004, 0.004)
    values = []
    for lam in LAMS:
        (_, probs), = measured_distribution(fold_local(local, lam), noise)
        values.append(probs[0b10])
    assert all(b < a for a, b in zip(values, values[1:]))


# -- confusion matrices and correction --------------------------------------

def flip_executor(flips, seed=0):
    noise = NoiseModel(readout={q: [[1 - f, f], [f, 1 - f]] for q, f in enumerate(flips)})
    return lambda c, shots: execute(c, shots, seed=seed, noise=noise)


@pytest.mark.parametrize("mode", ["correlated", "local"])
def test_noiseless_confusion_is_identity(mode):
    M = build_confusion_matrix(lambda c, shots: execute(c, shots, seed=1), 2, 500, mode)
    assert np.array_equal(M.matrix, np.eye(4))


def test_single_qubit_flip_within_binomial_error():
    shots = 20_000
    M = build_confusion_matrix(flip_executor([0.1], seed=4), 1, shots)
    sigma = np.sqrt(0.1 * 0.9 / shots)
    assert np.max(np.abs(M.matrix - [[0.9, 0.1], [0.1, 0.9]])) < 2 * sigma


def test_correlated_matches_kronecker_of_local():
    shots = 50_000
    ex = flip_executor([0.05, 0.12], seed=8)
    corr = build_confusion_matrix(ex, 2, shots, "correlated")
    local = build_confusion_matrix(ex, 2, shots, "local")
    exact = np.kron([[0.88, 0.12], [0.12, 0.88]], [[0.95, 0.05], [0.05, 0.95]])
    assert np.max(np.abs(local.matrix - exact)) < 5 * np.sqrt(0.25 / shots)
    assert np.max(np.abs(corr.matrix - exact)) < 5 * np.sqrt(0.25 / shots)
    assert local.mode == "local" and corr.mode == "correlated"


def test_confusion_validation_and_roundtrip():
    with pytest.raises(ValueError):
        ConfusionMatrix(1, np.array([[0.9, 0.2], [0.2, 0.8]]))
    with pytest.raises(ValueError):
        build_confusion_matrix(lambda c, s: None, 1, 0)
    M = ConfusionMatrix(1, np.array([[0.9, 0.1], [0.1, 0.9]]))
    d = json.loads(M.to_json())
    assert set(d) == {"n", "mode", "matrix"}
    assert np.array_equal(ConfusionMatrix.from_dict(d).matrix, M.matrix)


def test_rem_identity_leaves_distribution():
    counts = CountsDistribution({"00": 10, "01": 30, "11": 60})
    res = apply_rem(ConfusionMatrix(2, np.eye(4)), counts)
    assert np.allclose(res.probabilities, counts.vector())


def test_rem_two_by_two():
    res = apply_rem(ConfusionMatrix(1, np.array([[0.9, 0.1], [0.1, 0.9]])), [0.82, 0.18])
    assert np.allclose(res.probabilities, [0.9, 0.1], atol=1e-12)
    assert res.clipped_mass == 0.0


def test_rem_clips_negative_mass():
    res = apply_rem(ConfusionMatrix(1, np.array([[0.9, 0.1], [0.1, 0.9]])), [0.95, 0.05])
    assert res.raw[1] < 0 and res.clipped_mass > 0
    assert np.allclose(res.probabilities, [1.0, 0.0])


def test_rem_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_rem(ConfusionMatrix(2, np.eye(4)), CountsDistribution({"0": 5}))


def random_confusion(rng, n, max_cond=20):
    while True:
        m = np.eye(2**n) + rng.uniform(0, 0.3, (2**n, 2**n))
        m /= m.sum(axis=0)
        if np.linalg.cond(m) < max_cond:
            return ConfusionMatrix(n, m)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_rem_round_trip_and_pinv(rng, n):
    for _ in range(10):
        M = random_confusion(rng, n)
        p = rng.dirichlet(np.ones(2**n))
        res = apply_rem(M, M.matrix @ p)
        assert np.max(np.abs(res.raw - p)) < 1e-9
        assert np.max(np.abs(np.linalg.pinv(M.matrix) @ M.matrix - np.eye(2**n))) < 1e-8


def test_total_variation():
    assert total_variation([1, 0], [0, 1]) == 1.0
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0


# -- report and workflows ---------------------------------------------------

def test_report_fields_and_consistency():
    r = MitigationReport(0.864, 0.802, 0.870, ((1.0, 0.802), (3.0, 0.7)), "richardson")
    d = json.loads(r.to_json())
    assert set(d) == {"T", "T_run", "E1", "T_em", "E2", "points", "extrapolator"}
    assert d["E1"] == pytest.approx(0.062) and d["E2"] == pytest.approx(0.006)
    assert MitigationReport.from_dict(d) == r
    d["E2"] = 0.5
    with pytest.raises(ValueError):
        MitigationReport.from_dict(d)


def test_endtoend_without_noise_recovers_oracle():
    res = run_endtoend(EndToEndConfig(p1=0, p2=0, readout=0, rem=False, seed=2))
    r = res.report
    sigma = np.sqrt(r.T * (1 - r.T) / 100_000)
    assert abs(r.E1) < 4 * sigma
    assert r.E2 < 0.02
    assert res.plan.utilization().qubits_used == 10


def test_endtoend_mitigation_helps():
    r = run_endtoend(EndToEndConfig(seed=5)).report
    assert r.T_run < r.T
    assert r.E2 < r.E1
    assert r.T == pytest.approx(ideal_transmission(EndToEndConfig()), abs=0)


def test_endtoend_single_program_matches_packed_regime():
    solo = run_endtoend(EndToEndConfig(seed=1, multiprogram=False))
    packed = run_endtoend(EndToEndConfig(seed=1))
    assert solo.plan is None
    assert abs(solo.report.T_run - packed.report.T_run) < 0.02


def test_rem_moves_barrier_states_toward_ideal():
    r = run_rem(RemConfig(p1=0.0004, p2=0.004, seed=3))
    for s in (0b01, 0b11):
        assert abs(r.mitigated[s] - r.ideal[s]) < abs(r.raw[s] - r.ideal[s])
    d = r.to_dict()
    assert d["tv_mitigated"] < d["tv_raw"]


def test_rem_identity_readout_keeps_raw():
    r = run_rem(RemConfig(readout=0, seed=3))
    assert np.allclose(r.mitigated, r.raw)
