"""Command-line interface.

Subcommands: validate, classify, markov, broadcast, paper-check. Every
command emits a deterministic JSON report (stdout or --out) and exits with
0 on pass, 1 when a check fails, 2 on invalid input, 3 when a resource cap
is exceeded. Input paths of the form ``fixture:NAME`` resolve into the
bundled corpus (see ``qcorr.fixtures.fixture_names``).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import claims as claims_engine
from .broadcast import (
    DEFAULT_MEMORY_CAP,
    broadcastable_states,
    correlation_family,
    two_channel_cc_corollary_check,
    verify_full_broadcast,
    verify_local_broadcast,
    verify_spectrum_broadcast,
)
from .errors import ChannelTypeError, ManifestError, MemoryCapError, NotPrimitiveError
from .fixtures import fixture_path
from .linalg import DEFAULT_TOL
from .manifest import (
    SCHEMA,
    CheckResult,
    Manifest,
    dumps_document,
    load_manifest,
    realize,
    to_document,
    validate_manifest,
)
from .markov import (
    StochasticMatrix,
    block_decompose,
    ergodic_limit,
    is_irreducible,
    is_primitive,
    transition_matrix,
)
from .states import QuantumState
from .structure import cc_type_extract, classical_side_basis, classify_state, qc_type_extract

__all__ = ["main"]


def _resolve_path(path: str) -> str:
    if path.startswith("fixture:"):
        return fixture_path(path[len("fixture:") :])
    return path


def _load(path: str) -> tuple[Manifest, dict]:
    resolved = _resolve_path(path)
    try:
        with open(resolved, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}")
    manifest = load_manifest(resolved)
    record = {"path": path, "sha256": digest}
    if manifest.label:
        record["label"] = manifest.label
    return manifest, record


def _check_rows(checks: list[CheckResult]) -> list[dict]:
    return [{"name": c.name, "passed": bool(c.passed), "detail": c.detail} for c in checks]


def _report(command: str, inputs: list[dict], parameters: dict, checks, findings: dict) -> dict:
    rows = _check_rows(checks)
    return {
        "schema": SCHEMA,
        "command": command,
        "inputs": inputs,
        "parameters": parameters,
        "checks": rows,
        "findings": findings,
        "passed": all(r["passed"] for r in rows) if rows else True,
    }


def _vector(v) -> list[float]:
    return [float(x) for x in np.asarray(v).reshape(-1)]


def _real_rows(m) -> list[list[float]]:
    return [[float(x) for x in row] for row in np.asarray(m, dtype=float)]


# -- validate -------------------------------------------------------------------


def _cmd_validate(args) -> dict:
    manifest, record = _load(args.path)
    checks = validate_manifest(manifest)
    findings = {"kind": manifest.kind, "label": manifest.label, "note": manifest.note}
    return _report("validate", [record], {}, checks, findings)


# -- classify -------------------------------------------------------------------


def _side_record(state: QuantumState, side: str, tol: float) -> dict:
    structure = classical_side_basis(state, side, tol)
    rec: dict = {"classical": bool(structure), "witness": float(structure.witness)}
    if structure:
        rec["basis"] = to_document(structure.basis, label=f"side-{side} pointer basis")
        rec["probabilities"] = _vector(structure.probabilities)
    return rec


def _cmd_classify(args) -> dict:
    manifest, record = _load(args.path)
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    parameters = {"tol": tol}
    if manifest.kind == "state":
        state = realize(manifest)
        if state.n_factors != 2:
            raise ValueError("classification requires a bipartite state manifest")
        findings: dict = {"subject": "state"}
        if args.side:
            parameters["side"] = args.side
            findings["sides"] = {args.side: _side_record(state, args.side, tol)}
        else:
            findings["label"] = classify_state(state, tol)
            findings["sides"] = {
                "A": _side_record(state, "A", tol),
                "B": _side_record(state, "B", tol),
            }
        return _report("classify", [record], parameters, [], findings)
    if manifest.kind == "channel":
        channel = realize(manifest)
        mm = qc_type_extract(channel, tol)
        findings = {"subject": "channel"}
        if mm is None:
            findings["channel_type"] = "neither"
        else:
            cc = cc_type_extract(channel, tol)
            findings["measurement"] = to_document(mm, label="extracted measurement map")
            if cc is None:
                findings["channel_type"] = "QC-type"
            else:
                findings["channel_type"] = "CC-type"
                findings["transition"] = to_document(cc.transition, label="conditional table")
                findings["joint_probs"] = _real_rows(cc.joint_probs)
                findings["eigenbasis"] = to_document(cc.eigenbasis, label="common eigenbasis")
        return _report("classify", [record], parameters, [], findings)
    raise ValueError(f"classify expects a state or channel manifest, got kind {manifest.kind!r}")


# -- markov ---------------------------------------------------------------------


def _markov_transition(args, manifest, inputs: list[dict]):
    if manifest.kind == "stochastic":
        if args.basis:
            raise ValueError("--basis does not apply to a stochastic manifest")
        return realize(manifest)
    if manifest.kind in ("channel", "povm"):
        if manifest.kind == "channel":
            mm = qc_type_extract(realize(manifest))
            if mm is None:
                raise ChannelTypeError("channel is not of measure-and-prepare type")
        else:
            mm = realize(manifest)
        if args.basis:
            basis_manifest, basis_record = _load(args.basis)
            if basis_manifest.kind != "basis":
                raise ValueError("--basis expects a basis manifest")
            inputs.append(basis_record)
            basis = realize(basis_manifest)
        else:
            basis = np.eye(mm.d_in, dtype=np.complex128)
        return transition_matrix(mm.povm, basis)
    raise ValueError(
        f"markov expects a stochastic, channel, or povm manifest, got kind {manifest.kind!r}"
    )


def _recorded_flags(manifest: Manifest, analysis, square: bool) -> list[dict]:
    recorded = manifest.payload.get("recorded") or {}
    flags: list[dict] = []
    if "irreducible" in recorded and square:
        derived = is_irreducible(analysis.matrix)
        flags.append(
            {
                "property": "irreducible",
                "recorded": bool(recorded["irreducible"]),
                "derived": derived,
                "agrees": derived == bool(recorded["irreducible"]),
            }
        )
    if "perron" in recorded and square:
        derived_vectors = [np.asarray(v) for v in analysis.perron_vectors]
        for rec in recorded["perron"]:
            target = np.asarray(rec, dtype=float)
            agrees = any(
                v.shape == target.shape and float(np.max(np.abs(v - target))) <= 1e-9
                for v in derived_vectors
            )
            flags.append(
                {
                    "property": "perron",
                    "recorded": _vector(target),
                    "derived": [_vector(v) for v in derived_vectors],
                    "agrees": agrees,
                }
            )
    return flags


def _cmd_markov(args) -> dict:
    manifest, record = _load(args.path)
    inputs = [record]
    table = _markov_transition(args, manifest, inputs)
    parameters = {}
    findings: dict = {
        "transition": to_document(table, label="transition table"),
        "shape": [table.n_rows, table.n_cols],
    }
    square = table.is_square
    findings["square"] = square
    if square:
        analysis = block_decompose(table)
        findings["irreducible"] = is_irreducible(table)
        findings["primitive"] = is_primitive(table)
        findings["degeneracy"] = analysis.degeneracy
        findings["blocks"] = [
            {
                "indices": list(c.indices),
                "recurrent": c.recurrent,
                "primitive": c.primitive,
            }
            for c in analysis.classes
        ]
        findings["perron_vectors"] = [_vector(v) for v in analysis.perron_vectors]
        flags = _recorded_flags(manifest, analysis, square)
        if flags:
            findings["recorded_flags"] = flags
        if args.power:
            parameters["power"] = args.power
            findings["power"] = _real_rows(
                np.linalg.matrix_power(table.matrix, args.power)
            )
        if args.limit:
            parameters["limit"] = True
            lim = ergodic_limit(table)
            findings["limit"] = {
                "matrix": _real_rows(lim.matrix),
                "perron": _vector(lim.perron),
                "r_converged": lim.r_converged,
            }
    elif args.power or args.limit:
        raise ValueError("powers and limits need a square transition table")
    return _report("markov", inputs, parameters, [], findings)


# -- broadcast ------------------------------------------------------------------


def _load_pi(path: str):
    resolved = _resolve_path(path)
    try:
        with open(resolved, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ManifestError(f"cannot read pi table: {exc}")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"pi table is not valid JSON: {exc}")
    pi = np.asarray(raw, dtype=float)
    if pi.ndim != 2:
        raise ManifestError("pi table must be a 2D array of weights")
    return pi


def _require_map(channel, label: str):
    mm = qc_type_extract(channel)
    if mm is None:
        raise ChannelTypeError(f"{label} is not of measure-and-prepare type")
    return mm


def _verification_row(report, index: int) -> dict:
    return {
        "state_index": index,
        "mode": report.mode,
        "copies": report.copies,
        "distances": [float(x) for x in report.distances],
        "fixed_point_residual": float(report.fixed_point_residual),
        "passed": bool(report.passed),
    }


def _cmd_broadcast(args) -> dict:
    manifest, record = _load(args.path)
    if manifest.kind != "channel":
        raise ValueError(f"broadcast expects a channel manifest, got kind {manifest.kind!r}")
    inputs = [record]
    channel = realize(manifest)
    mm = _require_map(channel, "channel")
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    parameters: dict = {"copies": args.copies, "mode": args.mode, "tol": tol, "seed": args.seed}
    checks: list[CheckResult] = []
    findings: dict = {}

    verify = verify_full_broadcast if args.mode == "full" else verify_spectrum_broadcast

    if args.second_channel:
        second_manifest, second_record = _load(args.second_channel)
        if second_manifest.kind != "channel":
            raise ValueError("--second-channel expects a channel manifest")
        inputs.append(second_record)
        channel_b = realize(second_manifest)
        mm_b = _require_map(channel_b, "second channel")
        bs_a = broadcastable_states(mm)
        bs_b = broadcastable_states(mm_b)
        if args.pi:
            pi = _load_pi(args.pi)
        else:
            pi = np.full((bs_a.degeneracy, bs_b.degeneracy), 1.0 / (bs_a.degeneracy * bs_b.degeneracy))
        family = correlation_family(bs_a.states, bs_b.states, pi)
        local = verify_local_broadcast(
            mm, mm_b, args.copies, family, mode=args.mode, tol=tol, cap=DEFAULT_MEMORY_CAP
        )
        corollary = two_channel_cc_corollary_check(
            channel, channel_b, samples=50, seed=args.seed, tol=max(tol, 1e-8)
        )
        findings["degeneracy"] = [bs_a.degeneracy, bs_b.degeneracy]
        findings["family"] = to_document(family, label="correlated stationary family")
        findings["pi"] = _real_rows(pi)
        findings["local_broadcast"] = {
            "mode": local.mode,
            "copies": local.copies,
            "distances": [float(x) for x in local.distances],
            "fixed_point_residual": float(local.fixed_point_residual),
            "joint_distribution": _real_rows(local.joint_distribution),
        }
        findings["corollary"] = {
            "samples": corollary.samples,
            "max_deviation": float(corollary.max_deviation),
            "all_cc": corollary.all_cc,
        }
        checks.append(
            CheckResult(
                "local-broadcast",
                local.passed,
                f"max paired-reduction distance {max(local.distances):.3e}",
            )
        )
        checks.append(
            CheckResult(
                "two-channel-cc",
                corollary.passed,
                f"max deviation {corollary.max_deviation:.3e} over {corollary.samples} samples",
            )
        )
        return _report("broadcast", inputs, parameters, checks, findings)

    basis = None
    if args.basis:
        basis_manifest, basis_record = _load(args.basis)
        if basis_manifest.kind != "basis":
            raise ValueError("--basis expects a basis manifest")
        inputs.append(basis_record)
        basis = realize(basis_manifest)
    bs = broadcastable_states(mm, basis)
    findings["degeneracy"] = bs.degeneracy
    findings["broadcastable_states"] = [
        to_document(state, label=f"stationary state {k}") for k, state in enumerate(bs.states)
    ]
    rows = []
    for k, state in enumerate(bs.states):
        rep = verify(mm, args.copies, state, tol=tol, cap=DEFAULT_MEMORY_CAP)
        rows.append(_verification_row(rep, k))
        checks.append(
            CheckResult(
                f"{rep.mode}-broadcast-{k}",
                rep.passed,
                f"max reduction distance {max(rep.distances):.3e}",
            )
        )
    findings["verifications"] = rows
    if args.pi:
        pi = _load_pi(args.pi)
        family = correlation_family(bs.states, bs.states, pi)
        local = verify_local_broadcast(
            mm, mm, args.copies, family, mode=args.mode, tol=tol, cap=DEFAULT_MEMORY_CAP
        )
        findings["pi"] = _real_rows(pi)
        findings["family"] = to_document(family, label="correlated stationary family")
        findings["local_broadcast"] = {
            "mode": local.mode,
            "copies": local.copies,
            "distances": [float(x) for x in local.distances],
            "fixed_point_residual": float(local.fixed_point_residual),
        }
        checks.append(
            CheckResult(
                "local-broadcast",
                local.passed,
                f"max paired-reduction distance {max(local.distances):.3e}",
            )
        )
    return _report("broadcast", inputs, parameters, checks, findings)


# -- paper-check ------------------------------------------------------------------


def _cmd_paper_check(args) -> dict:
    results = claims_engine.run_claims()
    checks = [
        CheckResult(
            r.claim_id,
            r.matches,
            f"{r.verdict} (expected {r.expected}); {r.detail}",
        )
        for r in results
    ]
    findings = {
        "claims": [
            {
                "id": r.claim_id,
                "statement": r.statement,
                "expected": r.expected,
                "verdict": r.verdict,
                "detail": r.detail,
                "matches": r.matches,
            }
            for r in results
        ]
    }
    return _report("paper-check", [], {}, checks, findings)


# -- dispatch -------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcorr",
        description="Analyze channels for classical structure, Markov behavior, and broadcasting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="run the invariants of a manifest")
    p_validate.add_argument("path")
    p_validate.add_argument("--out", help="write the JSON report to a file")
    p_validate.set_defaults(handler=_cmd_validate)

    p_classify = sub.add_parser("classify", help="classical structure of a state or channel")
    p_classify.add_argument("path")
    p_classify.add_argument("--side", choices=["A", "B"], help="test one side only (states)")
    p_classify.add_argument("--tol", type=float, default=None)
    p_classify.add_argument("--out")
    p_classify.set_defaults(handler=_cmd_classify)

    p_markov = sub.add_parser("markov", help="transition-table analysis")
    p_markov.add_argument("path")
    p_markov.add_argument("--basis", help="basis manifest for channel/povm inputs")
    p_markov.add_argument("--power", type=int, default=None, help="also report the r-th power")
    p_markov.add_argument("--limit", action="store_true", help="also report the ergodic limit")
    p_markov.add_argument("--out")
    p_markov.set_defaults(handler=_cmd_markov)

    p_broadcast = sub.add_parser("broadcast", help="stationary states and broadcast verification")
    p_broadcast.add_argument("path")
    p_broadcast.add_argument("--basis", help="basis manifest (defaults to the channel basis)")
    p_broadcast.add_argument("--copies", type=int, default=2)
    p_broadcast.add_argument("--mode", choices=["spectrum", "full"], default="full")
    p_broadcast.add_argument("--second-channel", dest="second_channel")
    p_broadcast.add_argument("--pi", help="JSON file holding a 2D weight table")
    p_broadcast.add_argument("--tol", type=float, default=None)
    p_broadcast.add_argument("--seed", type=int, default=0)
    p_broadcast.add_argument("--out")
    p_broadcast.set_defaults(handler=_cmd_broadcast)

    p_paper = sub.add_parser("paper-check", help="re-derive the recorded fixture claims")
    p_paper.add_argument("--out")
    p_paper.set_defaults(handler=_cmd_paper_check)

    return parser


def _emit(report: dict, out: str | None) -> None:
    text = dumps_document(report)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.handler(args)
    except ManifestError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except MemoryCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 3
    except (ChannelTypeError, NotPrimitiveError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    _emit(report, args.out)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
