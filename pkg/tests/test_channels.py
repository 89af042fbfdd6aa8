"""States, measurement maps, and Choi-form channels."""
from __future__ import annotations

import numpy as np
import pytest

from qcorr.channels import (
    ChoiChannel,
    KrausSet,
    apply,
    apply_one_sided,
    channel_power,
    kraus_from_choi,
)
from qcorr.fixtures import P2_REPAIRED, trine_map, trine_povm, von_neumann_map
from qcorr.linalg import dagger, frobenius, partial_trace
from qcorr.measurement import MeasurementMap
from qcorr.sampling import haar_unitary, random_kraus_channel, random_state
from qcorr.states import QuantumState, maximally_entangled, maximally_mixed


# -- QuantumState ------------------------------------------------------------------


def test_state_validation():
    with pytest.raises(ValueError):
        QuantumState(np.diag([1.0, 1.0]), (2,))  # trace 2
    with pytest.raises(ValueError):
        QuantumState(np.diag([1.5, -0.5]), (2,))  # negative eigenvalue
    with pytest.raises(ValueError):
        QuantumState(np.array([[0.0, 1.0], [0.0, 1.0]]), (2,))  # not Hermitian
    with pytest.raises(ValueError):
        QuantumState(np.eye(4) / 4.0, (2, 3))  # dims mismatch
    with pytest.raises(ValueError):
        QuantumState.from_vector(np.array([1.0, 1.0]), (2,))  # norm sqrt(2)


def test_state_marginal_and_spectrum():
    rng = np.random.default_rng(5)
    a = random_state(2, rng)
    b = random_state(3, rng)
    joint = QuantumState(np.kron(a.matrix, b.matrix), (2, 3))
    assert frobenius(joint.marginal((0,)).matrix - a.matrix) <= 1e-12
    assert frobenius(joint.marginal((1,)).matrix - b.matrix) <= 1e-12
    spec = joint.spectrum()
    assert np.all(np.diff(spec) <= 1e-12)
    assert np.sum(spec) == pytest.approx(1.0, abs=1e-12)


def test_maximally_entangled_marginals():
    p_plus = maximally_entangled(3)
    assert p_plus.spectrum()[0] == pytest.approx(1.0, abs=1e-12)
    for side in ((0,), (1,)):
        reduced = p_plus.marginal(side)
        assert frobenius(reduced.matrix - np.eye(3) / 3.0) <= 1e-12
    assert maximally_mixed((2, 2)).dim == 4


# -- MeasurementMap ----------------------------------------------------------------


def test_measurement_map_validation():
    eye = np.eye(2, dtype=np.complex128)
    with pytest.raises(ValueError):
        MeasurementMap((np.diag([1.5, -0.5]), np.diag([-0.5, 1.5])), eye)
    with pytest.raises(ValueError):
        MeasurementMap((np.diag([0.5, 0.5]),), eye)  # one column per effect
    with pytest.raises(ValueError):
        MeasurementMap((np.diag([0.4, 0.4]), np.diag([0.4, 0.4])), eye)  # incomplete
    with pytest.raises(ValueError):
        MeasurementMap(tuple(np.eye(2) / 2 for _ in range(2)), np.ones((2, 2)))


def test_measurement_map_apply_and_probabilities():
    mm = trine_map()
    rho = maximally_mixed(2)
    probs = mm.probabilities(rho)
    assert np.allclose(probs, np.full(3, 1.0 / 3.0), atol=1e-12)
    out = mm.apply(rho)
    assert out.dims == (3,)
    assert np.allclose(out.matrix, np.eye(3) / 3.0, atol=1e-12)
    assert mm.weights == pytest.approx([1.0 / 3.0] * 3, abs=1e-12)


def test_from_stochastic_round_trips_the_table():
    mm = MeasurementMap.from_stochastic(P2_REPAIRED)
    # dyadic entries and computational bases make the round trip exact
    assert np.array_equal(mm.pointer_transition(), P2_REPAIRED)
    with pytest.raises(ValueError):
        MeasurementMap.from_stochastic(np.array([[0.5, 0.5], [0.6, 0.5]]))


def test_from_stochastic_rotated_eigenbasis():
    rng = np.random.default_rng(17)
    u = haar_unitary(3, rng)
    mm = MeasurementMap.from_stochastic(P2_REPAIRED, eigenbasis=u)
    for j, e in enumerate(mm.povm):
        rebuilt = (u * P2_REPAIRED[j, :]) @ dagger(u)
        assert frobenius(e - rebuilt) <= 1e-12


# -- ChoiChannel -------------------------------------------------------------------


def test_kraus_choi_round_trip():
    rng = np.random.default_rng(23)
    for d_in, d_out, n_kraus in ((2, 2, 1), (2, 3, 2), (3, 2, 3), (3, 3, 2)):
        ch = random_kraus_channel(d_in, d_out, n_kraus, rng)
        ks = kraus_from_choi(ch)
        rebuilt = ChoiChannel.from_kraus(ks)
        assert frobenius(rebuilt.choi.matrix - ch.choi.matrix) <= 1e-10
        for _ in range(5):
            rho = random_state(d_in, rng)
            direct = sum(k @ rho.matrix @ dagger(k) for k in ks.operators)
            assert frobenius(apply(ch, rho).matrix - direct) <= 1e-12


def test_apply_matches_inversion_formula():
    rng = np.random.default_rng(29)
    ch = random_kraus_channel(3, 2, 2, rng)
    rho = random_state(3, rng)
    sandwich = ch.choi.matrix @ np.kron(rho.matrix.T, np.eye(2))
    expected = 3.0 * partial_trace(sandwich, (3, 2), keep=(1,))
    assert frobenius(apply(ch, rho).matrix - expected) <= 1e-12


def test_identity_channel():
    ch = ChoiChannel.identity(3)
    assert frobenius(ch.choi.matrix - maximally_entangled(3).matrix) == 0.0
    rho = random_state(3, np.random.default_rng(1))
    assert frobenius(apply(ch, rho).matrix - rho.matrix) <= 1e-12


def test_choi_channel_validation():
    with pytest.raises(ValueError):
        ChoiChannel(QuantumState(np.eye(4) / 4.0, (4,)))  # not bipartite
    # trace preserving fails: output marginal must be 1/d_in
    bad = np.diag([0.5, 0.0, 0.0, 0.5])
    bad = bad.astype(np.complex128)
    bad[0, 0] = 0.9
    bad[3, 3] = 0.1
    with pytest.raises(ValueError):
        ChoiChannel(QuantumState(bad, (2, 2)))
    with pytest.raises(ValueError):
        KrausSet((np.eye(2) * 0.5,))


def test_from_measurement_map_matches_direct_sum():
    mm = trine_map()
    ch = ChoiChannel.from_measurement_map(mm)
    w = np.zeros((6, 6), dtype=np.complex128)
    eye3 = np.eye(3)
    for k, e in enumerate(trine_povm()):
        w += np.kron(e.T, np.outer(eye3[:, k], eye3[:, k]))
    assert frobenius(ch.choi.matrix - w / 2.0) <= 1e-12
    rng = np.random.default_rng(3)
    for _ in range(5):
        rho = random_state(2, rng)
        assert frobenius(apply(ch, rho).matrix - mm.apply(rho).matrix) <= 1e-12


def test_apply_one_sided_on_product_inputs():
    rng = np.random.default_rng(37)
    ch = random_kraus_channel(2, 2, 2, rng)
    a = random_state(3, rng)
    b = random_state(2, rng)
    joint = QuantumState(np.kron(a.matrix, b.matrix), (3, 2))
    out_b = apply_one_sided(ch, joint, side="B")
    assert frobenius(out_b.matrix - np.kron(a.matrix, apply(ch, b).matrix)) <= 1e-12
    flipped = QuantumState(np.kron(b.matrix, a.matrix), (2, 3))
    out_a = apply_one_sided(ch, flipped, side="A")
    assert frobenius(out_a.matrix - np.kron(apply(ch, b).matrix, a.matrix)) <= 1e-12
    with pytest.raises(ValueError):
        apply_one_sided(ch, joint, side="A")  # dimension mismatch
    with pytest.raises(ValueError):
        apply_one_sided(ch, joint, side="C")


def test_channel_power_matches_repeated_application():
    rng = np.random.default_rng(41)
    mm = von_neumann_map(3)
    base = ChoiChannel.from_measurement_map(mm)
    assert frobenius(channel_power(mm, 1).choi.matrix - base.choi.matrix) <= 1e-12
    mm2 = MeasurementMap.from_stochastic(P2_REPAIRED)
    ch2 = ChoiChannel.from_measurement_map(mm2)
    squared = channel_power(mm2, 2)
    cubed = channel_power(mm2, 3)
    for _ in range(5):
        rho = random_state(3, rng)
        once = apply(ch2, rho)
        twice = apply(ch2, once)
        assert frobenius(apply(squared, rho).matrix - twice.matrix) <= 1e-12
        assert frobenius(apply(cubed, rho).matrix - apply(ch2, twice).matrix) <= 1e-12
    with pytest.raises(ValueError):
        channel_power(trine_map(), 2)  # not square
    with pytest.raises(ValueError):
        channel_power(mm2, 0)
