import json

import jsonschema
import pytest

import config
from main import run

SCHEMA_CASES = [
    ["families"],
    ["parse-phi", "--phi", "(x(n)-1)*x(n)"],
    ["expand", "--family", "luroth", "--side", "alt", "--x", "2/5", "--depth", "4"],
    ["expand", "--family", "luroth", "--x", "1/2"],
    ["expand", "--family", "modified-engel", "--side", "pos", "--x", "2/5", "--depth", "2"],
    ["reconstruct", "--family", "pierce", "--digits", "2,3"],
    ["cylinder", "--family", "luroth", "--base", "3,2", "--child", "2", "--children", "5"],
    ["cylinder", "--phi", "x(n)", "--side", "pos", "--base", "2"],
    ["compare", "--family", "luroth", "--a", "3,2", "--b", "3,3"],
    ["transport", "--family", "luroth", "--x", "2/5", "--depth", "2"],
    ["transport", "--family", "luroth", "--base", "2,2"],
    ["measure-cover", "--family", "luroth", "--v", "2,3", "--depth", "10"],
    ["measure-cover", "--family", "luroth", "--side", "pos", "--lo", "1/5", "--hi", "1/2", "--depth", "6"],
    ["membership", "--family", "pierce", "--x", "2/3"],
    ["digit-law", "--family", "luroth", "--position", "1", "--samples", "200"],
    ["stats", "--experiment", "renyi", "--family", "pierce", "--n", "5", "--samples", "10", "--bits", "128"],
    ["stats", "--experiment", "frequency", "--family", "luroth", "--positions", "1-2",
     "--samples", "50", "--bits", "64"],
    ["stats", "--experiment", "renyi", "--family", "pierce", "--n", "2", "--samples", "1", "--bits", "64"],
    ["stats", "--experiment", "all", "--family", "luroth", "--n", "3", "--positions", "1",
     "--samples", "20", "--bits", "128"],
]


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    assert code == 0, out
    return json.loads(out)


@pytest.mark.parametrize("argv", SCHEMA_CASES, ids=lambda argv: "-".join(argv[:3]))
def test_output_matches_schema(capsys, argv):
    payload = run_json(capsys, argv)
    schema = json.loads((config.SCHEMA_DIR / f"{argv[0]}.schema.json").read_text())
    jsonschema.validate(payload, schema)
    assert payload["command"] == argv[0]
    assert payload["seed"] == 0


def test_expand_values(capsys):
    payload = run_json(capsys, ["expand", "--family", "luroth", "--x", "2/5", "--depth", "4"])
    assert payload["result"]["digits"] == [3, 2, 2, 3]
    assert payload["result"]["status"] == "ongoing"
    assert payload["program"] == {"phi0": 1, "phi": "1", "family": "luroth"}


def test_expand_boundary(capsys):
    result = run_json(capsys, ["expand", "--family", "luroth", "--x", "1/2"])["result"]
    assert result["status"] == "boundary"
    assert result["boundary"] == {"rank": 1, "base": [3], "kind": "sup"}


def test_membership_values(capsys):
    result = run_json(capsys, ["membership", "--family", "pierce", "--x", "2/3"])["result"]
    assert result["witness"] == {"rank": 2, "base": [2, 4], "kind": "inf"}


def test_cover_value(capsys):
    result = run_json(capsys, ["measure-cover", "--family", "luroth", "--v", "2,3", "--depth", "10"])["result"]
    assert result["value"] == "1024/59049"


def reject_constant(name):
    raise ValueError(f"non-standard JSON constant {name}")


def test_single_sample_stats_are_strict_json(capsys):
    argv = ["stats", "--experiment", "renyi", "--family", "pierce", "--n", "3", "--samples", "1",
            "--bits", "64"]
    assert run(argv) == 0
    payload = json.loads(capsys.readouterr().out, parse_constant=reject_constant)
    score = payload["result"]["score"]
    assert score["ks_statistic"] is None and score["ks_pvalue"] is None
    assert score["sd"] == 0.0


def test_parse_phi_keeps_explicit_phi0(capsys):
    result = run_json(capsys, ["parse-phi", "--phi", "x(n)", "--phi0", "3"])["result"]
    assert result["phi0"] == 3


def test_seed_is_echoed(capsys):
    payload = run_json(capsys, ["digit-law", "--family", "luroth", "--samples", "20", "--seed", "17"])
    assert payload["seed"] == 17
    assert payload["result"]["seed"] == 17


def test_identical_runs_are_byte_identical(capsys):
    argv = ["digit-law", "--family", "pierce", "--position", "2", "--samples", "100", "--seed", "3"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first


def test_config_file(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"family": "luroth", "x": "2/5", "depth": 4, "side": "alt"}))
    from_file = run_json(capsys, ["expand", "--config", str(path)])
    from_flags = run_json(capsys, ["expand", "--family", "luroth", "--x", "2/5", "--depth", "4"])
    assert from_file == from_flags


def test_flags_override_config_file(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"family": "luroth", "x": "2/5", "depth": 4}))
    result = run_json(capsys, ["expand", "--config", str(path), "--depth", "2"])["result"]
    assert result["digits"] == [3, 2]


def test_unknown_config_key(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"family": "luroth", "colour": "blue"}))
    assert run(["expand", "--config", str(path)]) == 2


def test_out_file(capsys, tmp_path):
    target = tmp_path / "nested" / "families.json"
    assert run(["families", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["command"] == "families"


def test_digit_law_csv(capsys):
    assert run(["digit-law", "--family", "luroth", "--samples", "50", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "digit,empirical,exact,deviation"
    assert len(lines) == 1 + config.LAW_MAX_DIGIT - 1


def test_renyi_csv(capsys):
    argv = ["stats", "--family", "pierce", "--n", "4", "--samples", "5", "--bits", "128", "--format", "csv"]
    assert run(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "sample,seed_offset,n,p_n,log_p_n,score"
    assert len(lines) == 6


@pytest.mark.parametrize("argv, code", [
    (["expand", "--family", "luroth", "--x", "0.4"], 2),
    (["expand", "--family", "luroth", "--x", "3/2"], 3),
    (["reconstruct", "--family", "pierce", "--digits", "2,2"], 2),
    (["parse-phi", "--phi", "x(n"], 2),
    (["parse-phi", "--phi", "x(n)", "--phi0", "0"], 2),
    (["expand", "--family", "engel", "--x", "1/2"], 2),
    (["measure-cover", "--family", "pierce", "--v", "2", "--depth", "2"], 2),
    (["cylinder", "--family", "pierce", "--base", "2", "--child", "2"], 2),
    ([], 64),
    (["expand", "--bogus"], 64),
    (["expand", "--family", "luroth"], 64),
    (["expand", "--x", "1/2"], 64),
    (["families", "--format", "csv"], 64),
])
def test_exit_codes(capsys, argv, code):
    assert run(argv) == code
    assert "error" in capsys.readouterr().err


def test_depth_cap_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(config, "MAX_DEPTH", 3)
    assert run(["expand", "--family", "luroth", "--x", "2/5", "--depth", "4"]) == 3


def test_precision_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(config, "MAX_SAMPLE_BITS", 64)
    monkeypatch.setattr(config, "MAX_DIGIT_BITS", 4096)
    argv = ["digit-law", "--family", "luroth", "--side", "pos", "--position", "60",
            "--samples", "1", "--bits", "64"]
    assert run(argv) == 4


def test_help(capsys):
    assert run(["--help"]) == 0
    assert "perron" in capsys.readouterr().out
