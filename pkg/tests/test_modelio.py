from fractions import Fraction

import pytest

from app.core.errors import ParseError
from app.core.report.modelio import (
    digest,
    dump_document,
    is_series_document,
    load_document,
    load_model,
    load_series,
    model_spec,
    parse_document,
    replay,
    write_spec,
)
from app.core.toricmodel import cohomology_rank

P2_DOC = {
    "schema_version": 1,
    "name": "p2",
    "fan": {"rays": [[1, 0], [0, 1], [-1, -1]], "lambdas": ["0", "0", "1"]},
}


# =========================
# Parsing
# =========================
def test_toml_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_document('name = "p2"\nfan = [\n', "toml")
    assert e.value.line is not None
    assert e.value.column is not None


def test_json_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_document('{"name": "p2",\n  ,}', "json")
    assert e.value.line == 2


def test_yaml_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_document("name: [p2\nfan: 3\n", "yaml")
    assert e.value.line is not None


def test_top_level_must_be_a_table():
    with pytest.raises(ParseError):
        parse_document("[1, 2]", "json")


def test_unknown_extension(tmp_path):
    path = tmp_path / "model.ini"
    path.write_text("x")
    with pytest.raises(ParseError):
        load_document(path)


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_document(tmp_path / "nope.toml")


@pytest.mark.parametrize(
    "change",
    [
        {"fan": {"rays": [[1, 0], [0, 1], [-1, -1]], "lambdas": ["0", "x", "1"]}},
        {"fan": {"rays": [[1, 0], [0, 1], [-1, -1]], "lambdas": ["0", "0"]}},
        {"fan": {"rays": [[1, 0, 2], [0, 1], [-1, -1]], "lambdas": ["0", "0", "1"]}},
        {"blowups": [{"kind": "toric", "corner": -1, "size": "1/6"}]},
        {"colour": "red"},
    ],
)
def test_invalid_model_documents(change):
    with pytest.raises(ParseError):
        model_spec({**P2_DOC, **change})


# =========================
# Models and series
# =========================
def test_replay_p2_blowups(fixtures_dir):
    spec = model_spec(load_document(fixtures_dir / "p2_blowups.toml"))
    states = replay(spec)
    assert [m.N for m in states] == [3, 4, 5]
    assert [cohomology_rank(m) for m in states] == [3, 4, 5]


def test_load_model_with_perturbation(fixtures_dir):
    m, perturbation = load_model(fixtures_dir / "p2_blowups.toml")
    assert m.N == 5
    assert perturbation is not None
    assert perturbation[(1, 1)].valuation == 2


def test_trunc_order_override(fixtures_dir):
    m, _ = load_model(fixtures_dir / "p2.toml", trunc_order="5")
    assert m.effective_trunc_order() == 5


def test_load_series(fixtures_dir):
    doc = load_document(fixtures_dir / "series_trinomial.json")
    assert is_series_document(doc)
    name, W = load_series(fixtures_dir / "series_trinomial.json")
    assert len(W) == 3
    assert W.trunc_order == 2
    assert W[(-1, -2)].valuation == 1
    assert name


# =========================
# Writing
# =========================
def test_digest_is_canonical():
    reordered = {"fan": P2_DOC["fan"], "name": "p2", "schema_version": 1}
    assert digest(P2_DOC) == digest(reordered)
    assert digest(model_spec(P2_DOC)) == digest(model_spec(reordered))
    assert digest({**P2_DOC, "name": "other"}) != digest(P2_DOC)


@pytest.mark.parametrize("suffix", [".json", ".yaml"])
def test_write_spec_reads_back(tmp_path, fixtures_dir, suffix):
    spec = model_spec(load_document(fixtures_dir / "p2_blowups.toml"))
    out = tmp_path / f"model{suffix}"
    write_spec(spec, out)
    assert model_spec(load_document(out)) == spec
    m, _ = load_model(out)
    assert m.lambdas[1] == Fraction(-1, 6)


def test_toml_cannot_be_written(tmp_path):
    with pytest.raises(ParseError):
        write_spec(model_spec(P2_DOC), tmp_path / "model.toml")
    with pytest.raises(ParseError):
        dump_document(P2_DOC, "xml")
