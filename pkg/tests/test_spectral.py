import json

import numpy as np
import pytest

from bsrlab.errors import InvalidArgument, SchemaError, ValidationError
from bsrlab.spectral import (BoundarySpectralData, PerturbationSpec, bsd_from_document,
                             bsd_to_document, drop_traces, dumps_json, load_bsd,
                             perturb_eigenvalues, save_bsd, scale_traces)


def small():
    return BoundarySpectralData.from_arrays(
        [1.0, 2.0, 2.0, 2.0, 5.0], [0, 1, 1, 1, 0], [0, -1, 0, 1, 0],
        [1.2, 0.8, 0.8, 0.8, 1.1], 1.0, 6.0)


def test_entries_and_groups():
    b = small()
    assert len(b) == 5
    e = b.entry(2)
    assert (e.n, e.l, e.m) == (2, 1, -1)
    sizes = sorted(idx.size for _, idx in b.groups())
    assert sizes == [1, 1, 3]
    with pytest.raises(InvalidArgument):
        b.entry(6)


def test_rejects_decreasing_eigenvalues():
    with pytest.raises(ValidationError):
        BoundarySpectralData.from_arrays([2.0, 1.0], [0, 0], [0, 0], [1, 1], 1.0, 3.0)


def test_rejects_bad_index():
    with pytest.raises(ValidationError):
        BoundarySpectralData.from_arrays([1.0], [1], [2], [1.0], 1.0, 3.0)


def test_perturb_then_negate_is_exact():
    b = small()
    spec = PerturbationSpec("constant", 0.3)
    back = perturb_eigenvalues(perturb_eigenvalues(b, spec), spec.negated())
    assert np.array_equal(back.lam, b.lam)
    assert np.array_equal(back.boundary_value, b.boundary_value)


def test_perturbation_provenance_and_delta():
    b = small()
    p = perturb_eigenvalues(b, PerturbationSpec("decaying", 0.5))
    meta = p.provenance["perturbation"]
    assert meta["delta"] == 0.0 and meta["corollary1_regime"] is True
    assert meta["Lambda_1"] == 0.5
    c = perturb_eigenvalues(b, PerturbationSpec("constant", -0.2))
    assert c.provenance["perturbation"]["delta"] == 0.2


def test_unsorted_perturbation_records_permutation():
    b = small()
    p = perturb_eigenvalues(b, PerturbationSpec.explicit([3.0, 0, 0, 0, 0]))
    assert p.provenance["sort_permutation"][0] == 1
    assert p.lam[0] == 4.0


def test_explicit_needs_enough_values():
    with pytest.raises(InvalidArgument):
        perturb_eigenvalues(small(), PerturbationSpec.explicit([1.0]))


def test_drop_traces():
    d = drop_traces(small(), 3)
    assert d.trace_known.tolist() == [False, False, True, True, True]
    assert d.provenance["n0"] == 3
    with pytest.raises(InvalidArgument):
        drop_traces(small(), 0)


def test_scale_traces():
    s = scale_traces(small(), 1.1, 2)
    assert s.boundary_value[0] == 1.2 * 1.1 and s.boundary_value[2] == 0.8


def test_roundtrip_bitwise(tmp_path):
    b = perturb_eigenvalues(drop_traces(small(), 2), PerturbationSpec("constant", 1e-3))
    path = tmp_path / "b.json"
    save_bsd(b, path)
    r = load_bsd(path)
    assert r.same_data(b)
    assert r.provenance["n0"] == 2


def test_seventeen_digits():
    text = dumps_json({"x": 0.1})
    assert "0.10000000000000001" in text


def test_schema_checks():
    doc = bsd_to_document(small())
    bad = dict(doc, schema="bsd/0")
    with pytest.raises(SchemaError):
        bsd_from_document(bad)
    doc2 = json.loads(json.dumps(doc))
    doc2["entries"][0]["l"] = "zero"
    with pytest.raises(ValidationError):
        bsd_from_document(doc2)
