"""Document parsing, invariant checking, serialization, and the CLI surface."""
from __future__ import annotations

import json

import numpy as np
import pytest

from qcorr.channels import ChoiChannel
from qcorr.cli import main
from qcorr.errors import ManifestError
from qcorr.fixtures import (
    P1,
    P1_PERRON_DERIVED,
    fixture_names,
    fixture_path,
    fourier_basis,
    load_fixture_document,
    stochastic_channel,
    trine_map,
)
from qcorr.manifest import (
    KINDS,
    SCHEMA,
    dumps_document,
    load_manifest,
    parse_document,
    realize,
    to_document,
    validate_manifest,
)
from qcorr.markov import StochasticMatrix
from qcorr.measurement import MeasurementMap
from qcorr.states import QuantumState, maximally_entangled


def _doc(kind: str, **fields) -> dict:
    doc = {"schema": SCHEMA, "kind": kind}
    doc.update(fields)
    return doc


def _check_map(manifest) -> dict:
    return {c.name: c for c in validate_manifest(manifest)}


# -- structural parsing ----------------------------------------------------------------


def test_parse_document_rejects_envelope_problems():
    with pytest.raises(ManifestError):
        parse_document([1, 2, 3])
    with pytest.raises(ManifestError):
        parse_document({"schema": "qcorr/0", "kind": "state"})
    with pytest.raises(ManifestError):
        parse_document(_doc("wavefunction", data=[[1.0]]))
    with pytest.raises(ManifestError):
        parse_document(_doc("basis", data=[[1.0]], label=7))


def test_parse_state_document():
    m = parse_document(_doc("state", dims=[2], data=[[1.0, 0.0], [0.0, 0.0]]))
    assert m.kind == "state" and m.payload["dims"] == (2,)
    with pytest.raises(ManifestError):
        parse_document(_doc("state", dims=[2, 2], data=[[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ManifestError):
        parse_document(_doc("state", dims=[2, 0], data=[[1.0]]))
    with pytest.raises(ManifestError):
        parse_document(_doc("state", dims=[1], data=[[True]]))
    with pytest.raises(ManifestError):
        parse_document(_doc("state", dims=[1], data=[[[1.0, 0.0, 0.0]]]))


def test_parse_complex_entries():
    m = parse_document(_doc("basis", data=[[[0.0, 1.0]], [[1.0, 0.0]]]))
    assert np.array_equal(m.payload["data"], np.array([[1j], [1.0]]))


def test_parse_channel_document():
    doc = to_document(ChoiChannel.identity(2))
    assert doc["kind"] == "channel" and doc["convention"] == {"choi": "trace_one"}
    parsed = parse_document(doc)
    assert parsed.payload["dims"] == (2, 2)
    bad = dict(doc)
    bad["convention"] = {"choi": "unnormalized"}
    with pytest.raises(ManifestError):
        parse_document(bad)
    with pytest.raises(ManifestError):
        parse_document(_doc("channel", dims=[2], data=doc["data"]))


def test_parse_povm_document():
    doc = to_document(trine_map())
    parsed = parse_document(doc)
    assert len(parsed.payload["effects"]) == 3
    with pytest.raises(ManifestError):
        parse_document(_doc("povm", data=[]))
    with pytest.raises(ManifestError):
        parse_document(_doc("povm", data=[[[1.0]], [[1.0, 0.0], [0.0, 1.0]]]))
    narrow = dict(doc)
    narrow["pointer_basis"] = [[1.0], [0.0], [0.0]]
    with pytest.raises(ManifestError):
        parse_document(narrow)


def test_parse_stochastic_row_orientation():
    doc = _doc(
        "stochastic",
        convention={"orientation": "row"},
        data=[[0.2, 0.8], [0.6, 0.4]],  # rows sum to one before the transpose
    )
    m = parse_document(doc)
    assert np.allclose(m.payload["data"], np.array([[0.2, 0.6], [0.8, 0.4]]))
    assert all(c.passed for c in validate_manifest(m))
    with pytest.raises(ManifestError):
        parse_document(_doc("stochastic", convention={"orientation": "diagonal"}, data=[[1.0]]))
    with pytest.raises(ManifestError):
        parse_document(_doc("stochastic", data=[[1.0]], recorded=["irreducible"]))
    with pytest.raises(ManifestError):
        parse_document(_doc("stochastic", data=[[[1.0, 0.5]]]))


def test_parse_basis_document():
    tall = fourier_basis(3)[:, :2]
    m = parse_document(to_document(tall))
    assert m.payload["data"].shape == (3, 2)
    with pytest.raises(ManifestError):
        parse_document(_doc("basis", data=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))


def test_load_manifest_missing_file(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(str(tmp_path / "nope.json"))
    bad = tmp_path / "broken.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ManifestError):
        load_manifest(str(bad))


# -- invariant checks ------------------------------------------------------------------


def test_validate_bundled_stochastic_fixtures():
    good = _check_map(load_manifest(fixture_path("p1.json")))
    assert good["nonnegative"].passed and good["column-stochastic"].passed
    bad = _check_map(load_manifest(fixture_path("p2_printed.json")))
    assert bad["nonnegative"].passed
    assert not bad["column-stochastic"].passed
    assert bad["column-stochastic"].detail == "column 3 sums to 1.125"


def test_validate_state_checks():
    good = _check_map(parse_document(to_document(maximally_entangled(2))))
    assert all(c.passed for c in good.values())
    off = parse_document(_doc("state", dims=[2], data=[[0.6, 0.0], [0.0, 0.6]]))
    checks = _check_map(off)
    assert not checks["unit-trace"].passed
    assert checks["hermitian"].passed and checks["positive-semidefinite"].passed
    with pytest.raises(ValueError):
        realize(off)


def test_validate_channel_checks():
    good = _check_map(load_manifest(fixture_path("vn_d2_channel.json")))
    assert all(c.passed for c in good.values())
    leaky = parse_document(
        _doc(
            "channel",
            dims=[2, 2],
            data=[
                [0.5, 0.0, 0.0, 0.0],
                [0.0, 0.5, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ],
        )
    )
    checks = _check_map(leaky)
    assert checks["unit-trace"].passed and checks["positive-semidefinite"].passed
    assert not checks["trace-preserving"].passed
    with pytest.raises(ValueError):
        realize(leaky)


def test_validate_povm_checks():
    good = _check_map(parse_document(to_document(trine_map())))
    assert all(c.passed for c in good.values())
    incomplete = parse_document(_doc("povm", data=[[[0.5, 0.0], [0.0, 0.5]]]))
    assert not _check_map(incomplete)["completeness"].passed


def test_validate_basis_checks():
    good = _check_map(parse_document(to_document(fourier_basis(3))))
    assert good["orthonormal-columns"].passed
    skew = parse_document(_doc("basis", data=[[1.0, 0.0], [0.0, 2.0]]))
    assert not _check_map(skew)["orthonormal-columns"].passed
    with pytest.raises(ValueError):
        realize(skew)


# -- realize round trips ---------------------------------------------------------------


def test_round_trip_every_kind():
    originals = [
        maximally_entangled(2),
        stochastic_channel(P1),
        trine_map(),
        StochasticMatrix(P1),
        fourier_basis(3),
    ]
    for obj in originals:
        rebuilt = realize(parse_document(to_document(obj)))
        assert type(rebuilt) is type(obj)
        if isinstance(obj, QuantumState):
            assert obj.dims == rebuilt.dims
            assert np.allclose(obj.matrix, rebuilt.matrix, atol=1e-15)
        elif isinstance(obj, ChoiChannel):
            assert np.allclose(obj.choi.matrix, rebuilt.choi.matrix, atol=1e-15)
        elif isinstance(obj, MeasurementMap):
            assert all(np.allclose(a, b, atol=1e-15) for a, b in zip(obj.povm, rebuilt.povm))
            assert np.allclose(obj.pointer_basis, rebuilt.pointer_basis, atol=1e-15)
        elif isinstance(obj, StochasticMatrix):
            assert np.allclose(obj.matrix, rebuilt.matrix, atol=1e-15)
        else:
            assert np.allclose(obj, rebuilt, atol=1e-15)


def test_realize_rejects_invalid_numerics():
    printed = load_manifest(fixture_path("p2_printed.json"))
    with pytest.raises(ValueError):
        realize(printed)


def test_to_document_rejects_unknown_objects():
    with pytest.raises(TypeError):
        to_document({"not": "a domain object"})


def test_dumps_document_is_deterministic():
    doc = to_document(StochasticMatrix(P1), label="x")
    text = dumps_document(doc)
    assert text == dumps_document(json.loads(text))
    assert text.endswith("\n")
    assert json.loads(text)["kind"] == "stochastic"
    with pytest.raises(ValueError):
        dumps_document({"x": float("nan")})


def test_fixture_corpus_is_complete():
    names = fixture_names()
    assert len(names) == 13
    assert names == sorted(names)
    for name in names:
        doc = load_fixture_document(name)
        assert doc["schema"] == SCHEMA and doc["kind"] in KINDS


# -- command line ----------------------------------------------------------------------


def _run(capsys, *argv) -> tuple[int, dict | None]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def _write_doc(tmp_path, name: str, obj, **kwargs) -> str:
    path = tmp_path / name
    path.write_text(dumps_document(to_document(obj, **kwargs)), encoding="utf-8")
    return str(path)


def test_cli_validate_exit_codes(capsys):
    code, report = _run(capsys, "validate", "fixture:p1.json")
    assert code == 0 and report["passed"]
    assert report["command"] == "validate"
    assert report["findings"]["kind"] == "stochastic"
    assert report["inputs"][0]["path"] == "fixture:p1.json"
    assert len(report["inputs"][0]["sha256"]) == 64

    code, report = _run(capsys, "validate", "fixture:p2_printed.json")
    assert code == 1 and not report["passed"]
    failed = {c["name"]: c for c in report["checks"]}["column-stochastic"]
    assert not failed["passed"] and failed["detail"] == "column 3 sums to 1.125"


def test_cli_validate_every_bundled_fixture(capsys):
    for name in fixture_names():
        code, report = _run(capsys, "validate", f"fixture:{name}")
        if name == "p2_printed.json":
            assert code == 1
        else:
            assert code == 0, f"{name} failed validation"
            assert report["passed"]


def test_cli_input_errors(capsys, tmp_path):
    assert _run(capsys, "validate", str(tmp_path / "absent.json"))[0] == 2
    assert _run(capsys, "validate", "fixture:absent.json")[0] == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{oops", encoding="utf-8")
    assert _run(capsys, "validate", str(broken))[0] == 2


def test_cli_classify_channels(capsys):
    code, report = _run(capsys, "classify", "fixture:vn_d2_channel.json")
    assert code == 0
    f = report["findings"]
    assert f["channel_type"] == "CC-type"
    assert f["transition"]["kind"] == "stochastic"
    assert np.allclose(np.array(f["joint_probs"]).sum(), 1.0)

    code, report = _run(capsys, "classify", "fixture:trine_channel.json")
    assert code == 0
    f = report["findings"]
    assert f["channel_type"] == "QC-type"
    assert "transition" not in f and f["measurement"]["kind"] == "povm"


def test_cli_classify_states(capsys):
    code, report = _run(capsys, "classify", "fixture:cq_witness_state.json")
    assert code == 0
    f = report["findings"]
    assert f["label"] == "QC-only"
    assert f["sides"]["B"]["classical"] and not f["sides"]["A"]["classical"]
    assert f["sides"]["B"]["probabilities"] == pytest.approx([0.5, 0.5])

    code, report = _run(capsys, "classify", "fixture:cq_witness_state.json", "--side", "B")
    assert code == 0
    assert list(report["findings"]["sides"]) == ["B"]
    assert "label" not in report["findings"]

    code, report = _run(capsys, "classify", "fixture:nonclosure_input.json")
    assert code == 0 and report["findings"]["label"] == "neither"

    assert _run(capsys, "classify", "fixture:p1.json")[0] == 2


def test_cli_markov_stochastic(capsys):
    code, report = _run(capsys, "markov", "fixture:p1.json")
    assert code == 0
    f = report["findings"]
    assert f["square"] and f["irreducible"] and f["primitive"]
    assert f["degeneracy"] == 1
    assert f["perron_vectors"][0] == pytest.approx(list(P1_PERRON_DERIVED))
    flags = {(x["property"], json.dumps(x["recorded"])): x["agrees"] for x in f["recorded_flags"]}
    assert flags[("irreducible", "true")] is True
    perron_flags = [x for x in f["recorded_flags"] if x["property"] == "perron"]
    assert len(perron_flags) == 1 and perron_flags[0]["agrees"] is False

    code, report = _run(capsys, "markov", "fixture:p2_repaired.json")
    assert code == 0
    perron_flags = [x for x in report["findings"]["recorded_flags"] if x["property"] == "perron"]
    assert perron_flags[0]["agrees"] is True


def test_cli_markov_power_and_limit(capsys):
    code, report = _run(capsys, "markov", "fixture:p1.json", "--power", "3", "--limit")
    assert code == 0
    f = report["findings"]
    assert np.allclose(np.array(f["power"]), np.linalg.matrix_power(P1, 3), atol=1e-12)
    lim = np.array(f["limit"]["matrix"])
    assert np.allclose(lim, np.outer(P1_PERRON_DERIVED, np.ones(3)), atol=1e-9)
    assert f["limit"]["r_converged"] >= 1

    assert _run(capsys, "markov", "fixture:block_p1p2.json", "--limit")[0] == 1
    assert _run(capsys, "markov", "fixture:p2_printed.json")[0] == 2


def test_cli_markov_channel_routes(capsys, tmp_path):
    code, report = _run(capsys, "markov", "fixture:vn_d2_channel.json")
    assert code == 0
    f = report["findings"]
    assert f["square"] and not f["irreducible"]
    assert f["degeneracy"] == 2 and len(f["blocks"]) == 2

    basis_doc = _write_doc(tmp_path, "fourier2.json", fourier_basis(2))
    code, report = _run(capsys, "markov", "fixture:vn_d2_channel.json", "--basis", basis_doc)
    assert code == 0
    assert len(report["inputs"]) == 2
    assert np.allclose(np.array(report["findings"]["transition"]["data"]), 0.5)

    assert _run(capsys, "markov", "fixture:p1.json", "--basis", basis_doc)[0] == 2

    code, report = _run(capsys, "markov", "fixture:trine_channel.json")
    assert code == 0 and not report["findings"]["square"]
    assert report["findings"]["shape"] == [3, 2]
    assert _run(capsys, "markov", "fixture:trine_channel.json", "--limit")[0] == 2

    identity_doc = _write_doc(tmp_path, "id2.json", ChoiChannel.identity(2))
    assert _run(capsys, "markov", identity_doc)[0] == 1


def test_cli_broadcast_single_channel(capsys):
    code, report = _run(capsys, "broadcast", "fixture:vn_d2_channel.json", "--copies", "3")
    assert code == 0
    assert report["findings"]["degeneracy"] == 2
    names = [c["name"] for c in report["checks"]]
    assert names == ["full-broadcast-0", "full-broadcast-1"]
    assert all(c["passed"] for c in report["checks"])

    assert _run(capsys, "broadcast", "fixture:vn_d2_channel.json", "--copies", "9")[0] == 3
    assert _run(capsys, "broadcast", "fixture:p_plus_d2.json")[0] == 2


def test_cli_broadcast_rotated_basis(capsys, tmp_path):
    channel_doc = _write_doc(tmp_path, "p1_channel.json", stochastic_channel(P1))
    basis_doc = _write_doc(tmp_path, "fourier3.json", fourier_basis(3))
    code, report = _run(
        capsys, "broadcast", channel_doc, "--basis", basis_doc, "--mode", "spectrum"
    )
    assert code == 0 and report["passed"]
    code, report = _run(capsys, "broadcast", channel_doc, "--basis", basis_doc, "--mode", "full")
    assert code == 1
    assert not report["checks"][0]["passed"]

    identity_doc = _write_doc(tmp_path, "id2.json", ChoiChannel.identity(2))
    assert _run(capsys, "broadcast", identity_doc)[0] == 1


def test_cli_broadcast_two_channels(capsys, tmp_path):
    from qcorr.fixtures import PA_REPAIRED, PB_REPAIRED

    doc_a = _write_doc(tmp_path, "pa.json", stochastic_channel(PA_REPAIRED))
    doc_b = _write_doc(tmp_path, "pb.json", stochastic_channel(PB_REPAIRED))
    pi_path = tmp_path / "pi.json"
    pi_path.write_text("[[0.3, 0.2], [0.1, 0.4]]", encoding="utf-8")
    code, report = _run(
        capsys,
        "broadcast",
        doc_a,
        "--second-channel",
        doc_b,
        "--pi",
        str(pi_path),
    )
    assert code == 0 and report["passed"]
    assert report["findings"]["degeneracy"] == [2, 2]
    names = {c["name"] for c in report["checks"]}
    assert names == {"local-broadcast", "two-channel-cc"}
    assert report["findings"]["corollary"]["all_cc"]

    pi_path.write_text("[0.5, 0.5]", encoding="utf-8")
    assert _run(capsys, "broadcast", doc_a, "--second-channel", doc_b, "--pi", str(pi_path))[0] == 2


def test_cli_paper_check(capsys):
    code, report = _run(capsys, "paper-check")
    assert code == 0 and report["passed"]
    assert len(report["checks"]) == 10
    verdicts = {c["id"]: c["verdict"] for c in report["findings"]["claims"]}
    assert verdicts["p1-perron"] == "CONTRADICTED"
    assert verdicts["p2-repaired"] == "REPAIRED"
    assert all(c["matches"] for c in report["findings"]["claims"])


def test_cli_out_file(capsys, tmp_path):
    out = tmp_path / "report.json"
    code = main(["validate", "fixture:p1.json", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["command"] == "validate" and report["passed"]
