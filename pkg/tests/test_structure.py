"""One-sided classicality, channel-type extraction, and steered residuals."""
from __future__ import annotations

import numpy as np
import pytest

from qcorr.channels import ChoiChannel, apply_one_sided
from qcorr.fixtures import (
    CQ_RESIDUAL_COMMUTATOR,
    NONCLOSURE_WITNESS,
    P1,
    P2_REPAIRED,
    cq_input_mixture,
    cq_residual_states,
    cq_witness_state,
    fourier_basis,
    measurement_from_stochastic,
    nonclosure_channel,
    nonclosure_input,
    stochastic_channel,
    trine_map,
    von_neumann_map,
)
from qcorr.linalg import bases_match, commutator_norm, dagger, frobenius
from qcorr.sampling import haar_unitary, random_kraus_channel, random_measurement_map, random_state
from qcorr.states import QuantumState, maximally_entangled, maximally_mixed
from qcorr.structure import (
    cc_type_extract,
    classical_side_basis,
    classify_state,
    in_cc_set,
    multipartite_qc_check,
    qc_type_extract,
    residual_decomposition,
    schmidt_state,
    star_mix,
)


def _basis_permutation(basis: np.ndarray) -> list[int]:
    """Map each column of a (phase-rotated) computational basis to its index."""
    perm = []
    for col in np.asarray(basis).T:
        idx = int(np.argmax(np.abs(col)))
        assert abs(abs(col[idx]) - 1.0) <= 1e-8, "column is not a computational vector"
        perm.append(idx)
    return perm


def _aligned_transition(cc) -> np.ndarray:
    """Undo the extraction's outcome and preparation relabeling."""
    out_perm = _basis_permutation(cc.measurement.pointer_basis)
    in_perm = _basis_permutation(cc.eigenbasis)
    t = cc.transition.matrix
    aligned = np.zeros_like(t)
    for k in range(t.shape[0]):
        for i in range(t.shape[1]):
            aligned[out_perm[k], in_perm[i]] = t[k, i]
    return aligned


def _bell_basis() -> np.ndarray:
    b = np.zeros((4, 4), dtype=np.complex128)
    s = 1.0 / np.sqrt(2.0)
    b[:, 0] = [s, 0, 0, s]
    b[:, 1] = [s, 0, 0, -s]
    b[:, 2] = [0, s, s, 0]
    b[:, 3] = [0, s, -s, 0]
    return b


# -- classify_state ----------------------------------------------------------------


def test_classify_product_state_is_cc():
    rng = np.random.default_rng(3)
    a = random_state(2, rng)
    b = random_state(3, rng)
    joint = QuantumState(np.kron(a.matrix, b.matrix), (2, 3))
    assert classify_state(joint) == "CC"


def test_classify_entangled_state_is_neither():
    assert classify_state(maximally_entangled(2)) == "neither"
    assert classify_state(maximally_entangled(3)) == "neither"


def test_classify_one_sided_states():
    rho = cq_witness_state()
    assert classify_state(rho) == "QC-only"
    # swapping the factors turns QC into CQ
    swap = rho.matrix.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    assert classify_state(QuantumState(swap, (2, 2))) == "CQ-only"


def test_classical_side_basis_extracts_the_ensemble():
    rho = cq_witness_state()
    on_b = classical_side_basis(rho, "B")
    assert on_b
    assert bases_match(on_b.basis, np.eye(2))
    perm = _basis_permutation(on_b.basis)
    probs = np.empty(2)
    probs[perm] = on_b.probabilities
    assert np.allclose(probs, [0.5, 0.5], atol=1e-12)
    rho0, rho1 = cq_residual_states()
    blocks = [on_b.blocks[perm.index(0)], on_b.blocks[perm.index(1)]]
    assert frobenius(blocks[0].matrix - rho0.matrix) <= 1e-10
    assert frobenius(blocks[1].matrix - rho1.matrix) <= 1e-10
    on_a = classical_side_basis(rho, "A")
    assert not on_a
    assert on_a.witness > 1e-3


def test_classical_side_basis_rejects_non_bipartite():
    with pytest.raises(ValueError):
        classical_side_basis(maximally_mixed(4), "B")
    with pytest.raises(ValueError):
        classical_side_basis(maximally_entangled(2), "C")


# -- qc_type_extract ----------------------------------------------------------------


def test_qc_extract_recovers_random_measurement_maps():
    rng = np.random.default_rng(11)
    for _ in range(10):
        d = int(rng.integers(2, 4))
        mm = random_measurement_map(d, rng, n_outcomes=d, d_out=d)
        ch = ChoiChannel.from_measurement_map(mm)
        got = qc_type_extract(ch)
        assert got is not None
        assert bases_match(got.pointer_basis, mm.pointer_basis)
        rebuilt = ChoiChannel.from_measurement_map(got)
        assert frobenius(rebuilt.choi.matrix - ch.choi.matrix) <= 1e-9


def test_qc_extract_effects_from_choi_blocks():
    # effects are d_in times the transposed Choi blocks; cross-check the
    # probabilities they produce against the channel's own action
    rng = np.random.default_rng(13)
    mm = trine_map()
    ch = ChoiChannel.from_measurement_map(mm)
    got = qc_type_extract(ch)
    assert got is not None
    for _ in range(5):
        rho = random_state(2, rng)
        assert np.allclose(
            sorted(got.probabilities(rho)), sorted(mm.probabilities(rho)), atol=1e-10
        )


def test_qc_extract_rejects_generic_and_unitary_channels():
    rng = np.random.default_rng(17)
    assert qc_type_extract(random_kraus_channel(2, 2, 2, rng)) is None
    assert qc_type_extract(ChoiChannel.identity(3)) is None
    u = haar_unitary(2, rng)
    assert qc_type_extract(ChoiChannel.from_kraus([u])) is None


# -- cc_type_extract ----------------------------------------------------------------


def test_cc_extract_recovers_table_up_to_relabeling():
    cc = cc_type_extract(stochastic_channel(P2_REPAIRED))
    assert cc is not None
    assert frobenius(_aligned_transition(cc) - P2_REPAIRED) <= 1e-9
    # joint distribution rows each sum to 1/d
    assert np.allclose(cc.joint_probs.sum(axis=1), np.full(3, 1.0 / 3.0), atol=1e-12)
    assert np.allclose(cc.joint_probs, cc.transition.matrix.T / 3.0, atol=1e-15)


def test_cc_extract_with_rotated_eigenbasis():
    # P2_REPAIRED has pairwise-distinct columns, so the common eigenbasis
    # is unique up to permutation and phase (P1 would leave a degenerate
    # two-dimensional block free to rotate).
    v = fourier_basis(3)
    cc = cc_type_extract(stochastic_channel(P2_REPAIRED, basis=v))
    assert cc is not None
    assert bases_match(cc.eigenbasis, v)
    # compare via the effects themselves to stay permutation-agnostic
    expected = [(v * P2_REPAIRED[j, :]) @ dagger(v) for j in range(3)]
    for e in cc.measurement.povm:
        assert min(frobenius(e - x) for x in expected) <= 1e-9


def test_cc_extract_rejects_noncommuting_povm():
    assert cc_type_extract(ChoiChannel.from_measurement_map(trine_map())) is None


def test_vn_channel_is_cc_with_identity_table():
    cc = cc_type_extract(ChoiChannel.from_measurement_map(von_neumann_map(3)))
    assert cc is not None
    assert frobenius(_aligned_transition(cc) - np.eye(3)) <= 1e-12


# -- residual decompositions ---------------------------------------------------------


def test_residual_decomposition_reassembles_the_output():
    rng = np.random.default_rng(19)
    mm = trine_map()
    ch = ChoiChannel.from_measurement_map(mm)
    rho = random_state((3, 2), rng)
    decomp = residual_decomposition(mm, rho)
    assert decomp.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    direct = apply_one_sided(ch, rho, side="B")
    assert frobenius(decomp.output_state().matrix - direct.matrix) <= 1e-10


def test_cq_counterexample_numbers():
    mm = von_neumann_map(2)
    rho = cq_witness_state()
    decomp = residual_decomposition(mm, rho)
    assert np.allclose(decomp.probabilities, [0.5, 0.5], atol=1e-12)
    rho0, rho1 = cq_residual_states()
    assert frobenius(decomp.states[0].matrix - rho0.matrix) <= 1e-12
    assert frobenius(decomp.states[1].matrix - rho1.matrix) <= 1e-12
    membership = in_cc_set(mm, rho)
    assert not membership
    assert membership.witness == pytest.approx(CQ_RESIDUAL_COMMUTATOR, abs=1e-10)
    assert commutator_norm(rho0.matrix, rho1.matrix) == pytest.approx(
        np.sqrt(2.0) / 4.0, abs=1e-12
    )


def test_cq_true_mixture_variant():
    # the same construction applied to the plain mixture of P+ and |+0>
    mm = von_neumann_map(2)
    rho = cq_input_mixture()
    decomp = residual_decomposition(mm, rho)
    assert np.allclose(decomp.probabilities, [0.75, 0.25], atol=1e-12)
    expected0 = np.array([[2.0, 1.0], [1.0, 1.0]]) / 3.0
    assert frobenius(decomp.states[0].matrix - expected0) <= 1e-12
    assert in_cc_set(mm, rho).witness == pytest.approx(np.sqrt(2.0) / 3.0, abs=1e-10)
    out = apply_one_sided(ChoiChannel.from_measurement_map(mm), rho, side="B")
    assert classify_state(out) == "QC-only"


def test_nonclosure_witness_frozen_value():
    mm = measurement_from_stochastic(P2_REPAIRED)
    rho = nonclosure_input()
    membership = in_cc_set(mm, rho)
    assert not membership
    assert membership.witness == pytest.approx(NONCLOSURE_WITNESS, abs=1e-9)
    # independent recomputation from the Schmidt data of the pure input:
    # residual_j is proportional to C (V* E_j V)^T C in the A-side basis
    c = np.diag(np.sqrt([0.5, 0.3, 0.2]))
    v = fourier_basis(3)
    residuals = []
    for e in mm.povm:
        x = dagger(v) @ e @ v
        block = c @ x.T @ c
        residuals.append(block / np.trace(block))
    witness = max(
        commutator_norm(residuals[i], residuals[j])
        for i in range(3)
        for j in range(i + 1, 3)
    )
    assert witness == pytest.approx(membership.witness, abs=1e-12)


def test_in_cc_set_accepts_matched_schmidt_states():
    # Schmidt vectors on B drawn from the common eigenbasis give commuting residuals
    mm = measurement_from_stochastic(P2_REPAIRED)
    rng = np.random.default_rng(23)
    a = haar_unitary(3, rng)
    rho = schmidt_state(np.sqrt([0.5, 0.3, 0.2]), a, np.eye(3))
    assert in_cc_set(mm, rho)


# -- star mixing ---------------------------------------------------------------------


def test_star_mix_endpoints_and_scaling():
    rho = nonclosure_input()
    assert frobenius(star_mix(rho, 0.0).matrix - np.eye(9) / 9.0) == 0.0
    assert frobenius(star_mix(rho, 1.0).matrix - rho.matrix) == 0.0
    with pytest.raises(ValueError):
        star_mix(rho, 1.5)
    # raw steered blocks are affine in the state, so their commutators scale as lam^2
    mm = measurement_from_stochastic(P2_REPAIRED)
    full = residual_decomposition(mm, rho).raw_blocks
    half = residual_decomposition(mm, star_mix(rho, 0.5)).raw_blocks
    for i in range(3):
        for j in range(i + 1, 3):
            c_full = full[i] @ full[j] - full[j] @ full[i]
            c_half = half[i] @ half[j] - half[j] @ half[i]
            assert frobenius(c_half - 0.25 * c_full) <= 1e-12
    assert in_cc_set(mm, star_mix(rho, 0.0))


# -- schmidt_state -----------------------------------------------------------------


def test_schmidt_state_construction_and_validation():
    state = schmidt_state([1.0], np.eye(2)[:, :1], np.eye(2)[:, 1:])
    expected = np.zeros((4, 4))
    expected[1, 1] = 1.0
    assert frobenius(state.matrix - expected) == 0.0
    with pytest.raises(ValueError):
        schmidt_state([0.5, 0.5], np.eye(2), np.eye(2))  # squares sum to 1/2
    with pytest.raises(ValueError):
        schmidt_state(np.sqrt([0.5, 0.5]), np.ones((2, 2)), np.eye(2))


# -- multipartite ------------------------------------------------------------------


def test_multipartite_bell_fixture():
    rng = np.random.default_rng(29)
    bell = _bell_basis()
    probs = np.array([0.4, 0.3, 0.2, 0.1])
    sigmas = [random_state(2, rng) for _ in range(4)]
    dim = 2 * 4
    m = np.zeros((dim, dim), dtype=np.complex128)
    for p, sigma, col in zip(probs, sigmas, bell.T):
        m += p * np.kron(sigma.matrix, np.outer(col, np.conj(col)))
    rho = QuantumState(m, (2, 2, 2))
    report = multipartite_qc_check(rho)
    assert report.joint_classical
    assert bases_match(report.joint_basis, bell)
    assert report.schmidt_ranks == (2, 2, 2, 2)
    assert report.joint_basis_product is False
    assert report.reduction_ab == "CC"
    assert report.reduction_abp == "CC"
    # both single-copy reductions are in fact product states
    for keep in ((0, 1), (0, 2)):
        red = rho.marginal(keep)
        rebuilt = np.kron(red.marginal((0,)).matrix, red.marginal((1,)).matrix)
        assert frobenius(red.matrix - rebuilt) <= 1e-12


def test_multipartite_product_pointer_contrast():
    rng = np.random.default_rng(31)
    probs = np.array([0.4, 0.3, 0.2, 0.1])
    sigmas = [random_state(2, rng) for _ in range(4)]
    eye4 = np.eye(4, dtype=np.complex128)
    m = np.zeros((8, 8), dtype=np.complex128)
    for p, sigma, col in zip(probs, sigmas, eye4.T):
        m += p * np.kron(sigma.matrix, np.outer(col, np.conj(col)))
    report = multipartite_qc_check(QuantumState(m, (2, 2, 2)))
    assert report.joint_classical
    assert report.joint_basis_product is True
    assert report.schmidt_ranks == (1, 1, 1, 1)
    with pytest.raises(ValueError):
        multipartite_qc_check(maximally_entangled(2))
