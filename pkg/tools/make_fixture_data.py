#!/usr/bin/env python3
"""Regenerate the bundled fixture corpus under src/qcorr/data/fixtures/.

Valid objects are serialized through qcorr.manifest.to_document so the byte
format always matches the loader. The deliberately broken table is written
as a raw document because StochasticMatrix refuses to construct it.
"""
from __future__ import annotations

import pathlib
import sys

SRC = pathlib.Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC))

from qcorr.channels import ChoiChannel
from qcorr.fixtures import (
    P1,
    P2_PRINTED,
    P2_REPAIRED,
    PA_PRINTED,
    PA_REPAIRED,
    PB_PRINTED,
    PB_REPAIRED,
    cq_witness_state,
    nonclosure_input,
    p1_p2_block,
    trine_map,
    von_neumann_map,
)
from qcorr.manifest import SCHEMA, dumps_document, to_document
from qcorr.markov import StochasticMatrix
from qcorr.states import maximally_entangled

OUT = SRC / "qcorr" / "data" / "fixtures"


def stochastic_doc(matrix, label, note, recorded=None):
    doc = to_document(StochasticMatrix(matrix), label=label, note=note)
    if recorded:
        doc["recorded"] = recorded
    return doc


def raw_stochastic_doc(matrix, label, note):
    # Bypasses StochasticMatrix validation on purpose.
    return {
        "schema": SCHEMA,
        "kind": "stochastic",
        "convention": {"orientation": "column"},
        "data": [[float(x) for x in row] for row in matrix],
        "label": label,
        "note": note,
    }


def documents():
    yield "p1.json", stochastic_doc(
        P1,
        "as-printed",
        "Irreducible three-state chain; the recorded stationary vector "
        "disagrees with the derived one.",
        recorded={"irreducible": True, "perron": [[1 / 3, 1 / 6, 1 / 2]]},
    )
    yield "p2_printed.json", raw_stochastic_doc(
        P2_PRINTED,
        "as-printed",
        "Third column sums to 9/8; kept to exercise validation failures.",
    )
    yield "p2_repaired.json", stochastic_doc(
        P2_REPAIRED,
        "repaired",
        "Doubly stochastic repair of the broken three-state table.",
        recorded={"irreducible": True, "perron": [[1 / 3, 1 / 3, 1 / 3]]},
    )
    yield "pa_printed.json", stochastic_doc(
        PA_PRINTED,
        "as-printed",
        "Recorded as reducible but actually irreducible.",
        recorded={"irreducible": False},
    )
    yield "pa_repaired.json", stochastic_doc(
        PA_REPAIRED,
        "repaired",
        "Reducible chain with blocks {0} and {1,2}.",
        recorded={"irreducible": False, "perron": [[1.0, 0.0, 0.0], [0.0, 0.5, 0.5]]},
    )
    yield "pb_printed.json", stochastic_doc(
        PB_PRINTED,
        "as-printed",
        "Recorded as reducible but actually irreducible.",
        recorded={"irreducible": False},
    )
    yield "pb_repaired.json", stochastic_doc(
        PB_REPAIRED,
        "repaired",
        "Reducible chain with blocks {0,2} and {1}.",
        recorded={"irreducible": False, "perron": [[0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]},
    )
    yield "block_p1p2.json", stochastic_doc(
        p1_p2_block(),
        None,
        "Direct sum of the irreducible chain and its doubly stochastic "
        "companion; degeneracy two.",
    )
    yield "p_plus_d2.json", to_document(
        maximally_entangled(2), note="Two-qubit maximally entangled state."
    )
    yield "vn_d2_channel.json", to_document(
        ChoiChannel.from_measurement_map(von_neumann_map(2)),
        note="Computational-basis readout followed by basis-state preparation.",
    )
    yield "trine_channel.json", to_document(
        ChoiChannel.from_measurement_map(trine_map()),
        note="Qubit trine measurement with a three-dimensional pointer output.",
    )
    yield "cq_witness_state.json", to_document(
        cq_witness_state(),
        note="Two-qubit state that is classical on side B but not on side A.",
    )
    yield "nonclosure_input.json", to_document(
        nonclosure_input(),
        note="Correlated two-qutrit pure input; feeding side B through the "
        "conditional-table channel steers non-commuting residuals on A.",
    )


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in documents():
        path = OUT / name
        path.write_text(dumps_document(doc), encoding="utf-8")
        print(f"wrote {path.relative_to(SRC.parent)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
