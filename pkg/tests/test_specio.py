import json

import numpy as np
import pytest

from entdim.measures import (
    BernoulliConvolution,
    LipschitzPushforward,
    MeasureError,
    Mixture,
    dirac,
    sine_perturbed_map,
    two_point,
    uniform_grid,
)
from entdim.specio import (
    dump_measure,
    load_measure,
    measure_from_dict,
    measure_to_dict,
)


def test_roundtrip_all_variants(tmp_path):
    measures = [
        two_point(0.0, 1.0),
        uniform_grid(0.0, 1.0, step=0.01),
        BernoulliConvolution(0.25),
        Mixture(((0.25, dirac(0.0)), (0.75, BernoulliConvolution(1 / 3)))),
        LipschitzPushforward(BernoulliConvolution(0.25), sine_perturbed_map(2.0)),
    ]
    for mu in measures:
        path = tmp_path / "m.json"
        dump_measure(mu, path)
        doc1 = measure_to_dict(load_measure(path))
        doc2 = measure_to_dict(mu)
        assert doc1 == doc2


def test_lossless_document_roundtrip(tmp_path):
    doc = {"type": "mixture", "components": [
        {"weight": 0.5, "measure": {"type": "atomic", "positions": [0.0], "weights": [1.0]}},
        {"weight": 0.5, "measure": {"type": "bernoulli", "lambda": 0.25}},
    ]}
    mu = measure_from_dict(doc)
    assert measure_to_dict(mu) == doc


@pytest.mark.parametrize("doc,fragment", [
    ({"positions": [0.0], "weights": [1.0]}, "type"),
    ({"type": "atomic", "positions": [0.0]}, "weights"),
    ({"type": "grid", "origin": 0.0, "values": [1.0, 1.0]}, "step"),
    ({"type": "bernoulli"}, "lambda"),
    ({"type": "pushforward", "base": {"type": "atomic", "positions": [0.0], "weights": [1.0]},
      "map": {"kind": "squash"}}, "kind"),
    ({"type": "spline"}, "type"),
])
def test_malformed_specs_name_offending_field(doc, fragment):
    with pytest.raises(MeasureError, match=fragment):
        measure_from_dict(doc)


def test_invalid_json_reported(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(MeasureError, match="JSON"):
        load_measure(path)
