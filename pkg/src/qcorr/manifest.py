"""JSON document format for states, channels, POVMs, bases, and transition tables.

Documents carry a "schema" tag ("qcorr/1"), a "kind", and the payload.
Complex entries are encoded as [re, im] pairs; stochastic tables may use
plain reals. Convention flags are stored in-band: stochastic orientation
("column" is native, "row" is transposed on load) and the trace-one Choi
normalization. ``parse_document`` checks structure only; ``validate_manifest``
runs the numeric invariants one by one without raising; ``realize`` builds
the domain object and surfaces the first violated invariant as an error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .channels import ChoiChannel
from .errors import ManifestError
from .linalg import dagger, frobenius, partial_trace
from .markov import StochasticMatrix
from .measurement import MeasurementMap
from .states import QuantumState

__all__ = [
    "SCHEMA",
    "KINDS",
    "CheckResult",
    "Manifest",
    "dumps_document",
    "load_manifest",
    "parse_document",
    "realize",
    "to_document",
    "validate_manifest",
]

SCHEMA = "qcorr/1"
KINDS = ("state", "channel", "povm", "stochastic", "basis")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Manifest:
    """A parsed document: structurally sound, numerics not yet validated."""

    kind: str
    payload: dict
    label: str | None = None
    note: str | None = None


def _fail(message: str, **details) -> ManifestError:
    return ManifestError(message, details=details or None)


def _entry_to_complex(entry: Any, where: str) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if (
        isinstance(entry, list)
        and len(entry) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
    ):
        return complex(entry[0], entry[1])
    raise _fail(f"{where}: entries must be numbers or [re, im] pairs", got=repr(entry))


def _complex_matrix(obj: Any, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise _fail(f"{where}: expected a non-empty nested array")
    width = len(obj[0])
    if width == 0 or any(len(r) != width for r in obj):
        raise _fail(f"{where}: rows must be non-empty and equal length")
    out = np.empty((len(obj), width), dtype=np.complex128)
    for i, row in enumerate(obj):
        for j, entry in enumerate(row):
            out[i, j] = _entry_to_complex(entry, f"{where}[{i}][{j}]")
    if not np.all(np.isfinite(out.view(np.float64))):
        raise _fail(f"{where}: entries must be finite")
    return out


def _real_matrix(obj: Any, where: str) -> np.ndarray:
    m = _complex_matrix(obj, where)
    if np.max(np.abs(m.imag)) > 0.0:
        raise _fail(f"{where}: entries must be real")
    return m.real.copy()


def _int_list(obj: Any, where: str, length: int | None = None) -> tuple[int, ...]:
    if (
        not isinstance(obj, list)
        or not obj
        or not all(isinstance(x, int) and not isinstance(x, bool) and x > 0 for x in obj)
    ):
        raise _fail(f"{where}: expected a non-empty list of positive integers")
    if length is not None and len(obj) != length:
        raise _fail(f"{where}: expected exactly {length} entries")
    return tuple(obj)


def parse_document(doc: Any) -> Manifest:
    """Structural validation of a raw JSON document."""
    if not isinstance(doc, dict):
        raise _fail("document must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise _fail(f"unsupported schema tag", expected=SCHEMA, got=doc.get("schema"))
    kind = doc.get("kind")
    if kind not in KINDS:
        raise _fail("unknown kind", expected=list(KINDS), got=kind)
    label = doc.get("label")
    note = doc.get("note")
    for field, value in (("label", label), ("note", note)):
        if value is not None and not isinstance(value, str):
            raise _fail(f"{field} must be a string when present")

    payload: dict[str, Any] = {}
    if kind == "state":
        dims = _int_list(doc.get("dims"), "dims")
        data = _complex_matrix(doc.get("data"), "data")
        total = int(np.prod(dims))
        if data.shape != (total, total):
            raise _fail("data shape does not match dims", dims=list(dims), shape=list(data.shape))
        payload = {"dims": dims, "data": data}
    elif kind == "channel":
        dims = _int_list(doc.get("dims"), "dims", length=2)
        convention = doc.get("convention", {})
        if not isinstance(convention, dict):
            raise _fail("convention must be an object")
        choi_convention = convention.get("choi", "trace_one")
        if choi_convention != "trace_one":
            raise _fail("unsupported Choi convention", got=choi_convention)
        data = _complex_matrix(doc.get("data"), "data")
        total = dims[0] * dims[1]
        if data.shape != (total, total):
            raise _fail("data shape does not match dims", dims=list(dims), shape=list(data.shape))
        payload = {"dims": dims, "data": data}
    elif kind == "povm":
        raw = doc.get("data")
        if not isinstance(raw, list) or not raw:
            raise _fail("data: expected a non-empty list of matrices")
        effects = [_complex_matrix(m, f"data[{k}]") for k, m in enumerate(raw)]
        d = effects[0].shape[0]
        for k, e in enumerate(effects):
            if e.shape != (d, d):
                raise _fail(f"data[{k}]: effects must be square and equal-sized")
        pointer = None
        if doc.get("pointer_basis") is not None:
            pointer = _complex_matrix(doc["pointer_basis"], "pointer_basis")
            if pointer.shape[1] != len(effects):
                raise _fail(
                    "pointer_basis must have one column per effect",
                    effects=len(effects),
                    columns=pointer.shape[1],
                )
        payload = {"effects": effects, "pointer": pointer}
    elif kind == "stochastic":
        convention = doc.get("convention", {})
        if not isinstance(convention, dict):
            raise _fail("convention must be an object")
        orientation = convention.get("orientation", "column")
        if orientation not in ("column", "row"):
            raise _fail("orientation must be 'column' or 'row'", got=orientation)
        data = _real_matrix(doc.get("data"), "data")
        if orientation == "row":
            data = data.T.copy()
        recorded = doc.get("recorded")
        if recorded is not None and not isinstance(recorded, dict):
            raise _fail("recorded must be an object when present")
        payload = {"data": data, "recorded": recorded or {}}
    elif kind == "basis":
        data = _complex_matrix(doc.get("data"), "data")
        if data.shape[1] > data.shape[0]:
            raise _fail("basis cannot have more columns than rows", shape=list(data.shape))
        payload = {"data": data}
    return Manifest(kind=kind, payload=payload, label=label, note=note)


def load_manifest(path: str) -> Manifest:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise _fail(f"cannot read manifest: {exc}")
    except json.JSONDecodeError as exc:
        raise _fail(f"manifest is not valid JSON: {exc}")
    return parse_document(doc)


def _check(name: str, passed: bool, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def _hermitian_check(m: np.ndarray, tol: float = 1e-10) -> CheckResult:
    dev = frobenius(m - dagger(m)) / max(1.0, frobenius(m))
    return _check("hermitian", dev <= tol, f"relative deviation {dev:.3e}")


def _psd_check(m: np.ndarray, tol: float = 1e-10) -> CheckResult:
    low = float(np.min(np.linalg.eigvalsh(0.5 * (m + dagger(m)))))
    return _check("positive-semidefinite", low >= -tol, f"minimum eigenvalue {low:.3e}")


def _trace_check(m: np.ndarray, tol: float = 1e-10) -> CheckResult:
    tr = complex(np.trace(m))
    return _check("unit-trace", abs(tr - 1.0) <= tol, f"trace {tr.real:.12g}")


def validate_manifest(m: Manifest) -> list[CheckResult]:
    """Run every numeric invariant for the manifest's kind, collecting results."""
    checks: list[CheckResult] = []
    if m.kind == "state":
        data = m.payload["data"]
        checks.append(_hermitian_check(data))
        checks.append(_trace_check(data))
        checks.append(_psd_check(data))
    elif m.kind == "channel":
        d_in, d_out = m.payload["dims"]
        data = m.payload["data"]
        checks.append(_hermitian_check(data))
        checks.append(_trace_check(data))
        checks.append(_psd_check(data))
        marginal = partial_trace(0.5 * (data + dagger(data)), (d_in, d_out), keep=(0,))
        dev = frobenius(marginal - np.eye(d_in) / d_in)
        checks.append(
            _check("trace-preserving", dev <= 1e-9, f"input-marginal deviation {dev:.3e}")
        )
    elif m.kind == "povm":
        effects = m.payload["effects"]
        d = effects[0].shape[0]
        worst_h = max(frobenius(e - dagger(e)) for e in effects)
        checks.append(_check("effects-hermitian", worst_h <= 1e-10, f"worst deviation {worst_h:.3e}"))
        low = min(float(np.min(np.linalg.eigvalsh(0.5 * (e + dagger(e))))) for e in effects)
        checks.append(_check("effects-positive", low >= -1e-10, f"minimum eigenvalue {low:.3e}"))
        total = sum(effects)
        dev = frobenius(total - np.eye(d))
        checks.append(_check("completeness", dev <= 1e-9 * np.sqrt(d), f"sum deviates by {dev:.3e}"))
        pointer = m.payload["pointer"]
        if pointer is not None:
            gram = dagger(pointer) @ pointer
            pdev = frobenius(gram - np.eye(pointer.shape[1]))
            checks.append(_check("pointer-orthonormal", pdev <= 1e-9, f"gram deviation {pdev:.3e}"))
    elif m.kind == "stochastic":
        data = m.payload["data"]
        low = float(np.min(data))
        checks.append(_check("nonnegative", low >= -1e-12, f"minimum entry {low:.3e}"))
        sums = data.sum(axis=0)
        bad = int(np.argmax(np.abs(sums - 1.0)))
        worst = float(sums[bad])
        checks.append(
            _check(
                "column-stochastic",
                float(np.max(np.abs(sums - 1.0))) <= 1e-10,
                f"column {bad + 1} sums to {worst:.12g}",
            )
        )
    elif m.kind == "basis":
        data = m.payload["data"]
        gram = dagger(data) @ data
        dev = frobenius(gram - np.eye(data.shape[1]))
        checks.append(_check("orthonormal-columns", dev <= 1e-9, f"gram deviation {dev:.3e}"))
    return checks


def realize(m: Manifest):
    """Build the domain object; raises ValueError on invariant violations."""
    if m.kind == "state":
        return QuantumState(m.payload["data"], m.payload["dims"])
    if m.kind == "channel":
        return ChoiChannel(QuantumState(m.payload["data"], m.payload["dims"]))
    if m.kind == "povm":
        effects = m.payload["effects"]
        pointer = m.payload["pointer"]
        if pointer is None:
            pointer = np.eye(len(effects), dtype=np.complex128)
        return MeasurementMap(effects, pointer)
    if m.kind == "stochastic":
        return StochasticMatrix(m.payload["data"])
    if m.kind == "basis":
        basis = m.payload["data"]
        gram = dagger(basis) @ basis
        if frobenius(gram - np.eye(basis.shape[1])) > 1e-9:
            raise ValueError("basis columns are not orthonormal")
        return basis
    raise _fail("unknown kind", got=m.kind)


def _encode_complex_matrix(m: np.ndarray) -> list:
    out = []
    for row in np.asarray(m, dtype=np.complex128):
        out.append([[float(x.real), float(x.imag)] for x in row])
    return out


def _encode_real_matrix(m: np.ndarray) -> list:
    return [[float(x) for x in row] for row in np.asarray(m, dtype=float)]


def to_document(obj, label: str | None = None, note: str | None = None) -> dict:
    """Serialize a domain object (or unitary basis array) to a manifest document."""
    doc: dict[str, Any] = {"schema": SCHEMA}
    if isinstance(obj, QuantumState):
        doc.update(
            kind="state",
            dims=[int(d) for d in obj.dims],
            data=_encode_complex_matrix(obj.matrix),
        )
    elif isinstance(obj, ChoiChannel):
        doc.update(
            kind="channel",
            dims=[obj.d_in, obj.d_out],
            convention={"choi": "trace_one"},
            data=_encode_complex_matrix(obj.choi.matrix),
        )
    elif isinstance(obj, MeasurementMap):
        doc.update(
            kind="povm",
            data=[_encode_complex_matrix(e) for e in obj.povm],
            pointer_basis=_encode_complex_matrix(obj.pointer_basis),
        )
    elif isinstance(obj, StochasticMatrix):
        doc.update(
            kind="stochastic",
            convention={"orientation": "column"},
            data=_encode_real_matrix(obj.matrix),
        )
    elif isinstance(obj, np.ndarray) and obj.ndim == 2:
        doc.update(kind="basis", data=_encode_complex_matrix(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} as a manifest")
    if label is not None:
        doc["label"] = label
    if note is not None:
        doc["note"] = note
    return doc


def dumps_document(doc: dict) -> str:
    """Deterministic serialization (sorted keys, two-space indent)."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
