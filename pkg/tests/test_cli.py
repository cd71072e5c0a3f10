import json
from pathlib import Path

import pytest

from uncplan.cli import (
    EXIT_CONFIG,
    EXIT_INVARIANT,
    EXIT_IO,
    EXIT_OK,
    EXIT_ORACLE,
    EXIT_PARSE,
    PRESETS,
    main,
)


def run(args):
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def small_suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    code = run(["generate", "--count", 8, "--mix", "0.5", "--noise", "0.5", "--seed", 7, "--out", out])
    assert code == EXIT_OK
    return out / "manifest.json"


@pytest.fixture(scope="module")
def clean_suite(tmp_path_factory):
    """Noiseless straight-only single-candidate suite."""
    out = tmp_path_factory.mktemp("clean")
    code = run([
        "generate", "--count", 6, "--mix", "straight-only", "--noise", 0.0,
        "--candidates", 1, "--seed", 3, "--out", out,
    ])
    assert code == EXIT_OK
    return out / "manifest.json"


def read_rows(csv_path):
    rows = []
    for line in Path(csv_path).read_text().splitlines():
        if line.startswith("#") or line.startswith("stratum"):
            continue
        rows.append(line.split(","))
    return rows


def test_generate_writes_files_and_manifest(small_suite):
    manifest = json.loads(small_suite.read_text())
    assert manifest["count"] == 8
    kinds = [e["kind"] for e in manifest["scenarios"]]
    assert kinds.count("Turn") == 4
    for entry in manifest["scenarios"]:
        assert (small_suite.parent / entry["path"]).exists()


def test_generate_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["generate", "--count", 5, "--mix", "0.4", "--seed", 11, "--out", a]) == EXIT_OK
    assert run(["generate", "--count", 5, "--mix", "0.4", "--seed", 11, "--out", b]) == EXIT_OK
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_generate_zero_count_is_config_error(tmp_path):
    assert run(["generate", "--count", 0, "--out", tmp_path / "x"]) == EXIT_CONFIG


def test_generate_bad_mix_is_config_error(tmp_path):
    assert run(["generate", "--count", 2, "--mix", "sideways", "--out", tmp_path / "x"]) == EXIT_CONFIG


def test_generate_turn_only(tmp_path):
    out = tmp_path / "turns"
    assert run(["generate", "--count", 3, "--mix", "turn-only", "--seed", 5, "--out", out]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert all(e["kind"] == "Turn" for e in manifest["scenarios"])


def test_eval_clean_suite_is_all_zero(clean_suite, tmp_path):
    for convention in ("cumulative", "instantaneous"):
        out = tmp_path / f"rep_{convention}"
        code = run([
            "eval", "--suite", clean_suite, "--preset", "ucas",
            "--convention", convention, "--out", out,
        ])
        assert code == EXIT_OK
        rows = read_rows(Path(str(out) + ".csv"))
        overall = rows[0]
        assert overall[0] == "Overall"
        assert all(float(v) == 0.0 for v in overall[2:])


def test_eval_rerun_byte_identical(small_suite, tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert run(["eval", "--suite", small_suite, "--out", out1]) == EXIT_OK
    assert run(["eval", "--suite", small_suite, "--out", out2]) == EXIT_OK
    c1 = Path(str(out1) + ".csv").read_text()
    c2 = Path(str(out2) + ".csv").read_text()
    assert c1.replace(str(out1), "X") == c2.replace(str(out2), "X")
    s1 = Path(str(out1) + ".scenarios.csv").read_bytes()
    s2 = Path(str(out2) + ".scenarios.csv").read_bytes()
    assert s1 == s2


def test_eval_writes_header_with_config(small_suite, tmp_path):
    out = tmp_path / "hdr"
    assert run([
        "eval", "--suite", small_suite, "--preset", "cas",
        "--nll-threshold", 3.5, "--clearance", 0.4, "--out", out,
    ]) == EXIT_OK
    text = Path(str(out) + ".csv").read_text()
    assert "# preset: cas" in text
    assert "# nll-threshold: 3.5" in text
    assert "# clearance: 0.4" in text
    assert "# master-seed: 7" in text
    assert text.startswith("# uncplan-version:")


def test_eval_with_verify_passes(small_suite, tmp_path):
    assert run(["eval", "--suite", small_suite, "--verify", "--out", tmp_path / "v"]) == EXIT_OK


def test_eval_missing_suite_is_io_error(tmp_path):
    assert run(["eval", "--suite", tmp_path / "nope.json", "--out", tmp_path / "x"]) == EXIT_IO


def test_eval_corrupt_scenario_is_parse_error(small_suite, tmp_path):
    import shutil

    suite_dir = tmp_path / "corrupt"
    shutil.copytree(small_suite.parent, suite_dir)
    manifest = json.loads((suite_dir / "manifest.json").read_text())
    victim = suite_dir / manifest["scenarios"][0]["path"]
    victim.write_text("{ broken json")
    assert run(["eval", "--suite", suite_dir / "manifest.json", "--out", tmp_path / "x"]) == EXIT_PARSE


def test_eval_invariant_violation_exit_code(small_suite, tmp_path):
    import shutil

    suite_dir = tmp_path / "badval"
    shutil.copytree(small_suite.parent, suite_dir)
    manifest = json.loads((suite_dir / "manifest.json").read_text())
    victim = suite_dir / manifest["scenarios"][0]["path"]
    data = json.loads(victim.read_text())
    data["map"]["elements"][0]["points"][0]["bx"] = -1.0
    victim.write_text(json.dumps(data))
    assert run(["eval", "--suite", suite_dir / "manifest.json", "--out", tmp_path / "x"]) == EXIT_INVARIANT


def test_eval_bad_preset_is_argparse_exit_2(small_suite, tmp_path):
    with pytest.raises(SystemExit) as err:
        run(["eval", "--suite", small_suite, "--preset", "bogus", "--out", tmp_path / "x"])
    assert err.value.code == 2


def test_oracle_mismatch_exit_code(small_suite, tmp_path, monkeypatch):
    import uncplan.cli as cli_mod

    def wrong_oracle(candidate_set, command, cfg, risks, agent_flags, boundary_flags):
        return -1

    monkeypatch.setattr(cli_mod, "oracle_select", wrong_oracle)
    assert run(["eval", "--suite", small_suite, "--verify", "--out", tmp_path / "x"]) == EXIT_ORACLE


def test_ablate_five_rows_ordered(small_suite, tmp_path):
    out = tmp_path / "abl"
    assert run(["ablate", "--suite", small_suite, "--out", out]) == EXIT_OK
    lines = [
        l for l in Path(str(out) + ".csv").read_text().splitlines()
        if not l.startswith("#") and not l.startswith("preset")
    ]
    assert [l.split(",")[0] for l in lines] == list(PRESETS)


def test_ablate_noiseless_rows_identical(clean_suite, tmp_path):
    # with no noise, no filter ever fires: every preset must coincide exactly
    out = tmp_path / "abl0"
    assert run(["ablate", "--suite", clean_suite, "--out", out]) == EXIT_OK
    lines = [
        l for l in Path(str(out) + ".csv").read_text().splitlines()
        if not l.startswith("#") and not l.startswith("preset")
    ]
    values = {tuple(l.split(",")[1:]) for l in lines}
    assert len(values) == 1


def test_ablate_noiseless_multicandidate_rows_identical(tmp_path):
    out_dir = tmp_path / "clean5"
    assert run([
        "generate", "--count", 6, "--mix", "0.5", "--noise", 0.0,
        "--candidates", 5, "--seed", 9, "--out", out_dir,
    ]) == EXIT_OK
    out = tmp_path / "abl5"
    assert run(["ablate", "--suite", out_dir / "manifest.json", "--out", out]) == EXIT_OK
    lines = [
        l for l in Path(str(out) + ".csv").read_text().splitlines()
        if not l.startswith("#") and not l.startswith("preset")
    ]
    values = {tuple(l.split(",")[1:]) for l in lines}
    assert len(values) == 1
