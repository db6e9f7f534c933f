import csv
import json

import pytest

from modeconv.cli import EXIT_INPUT, EXIT_OK, RELAX_COLUMNS, RunConfig, main
from modeconv.io import InputError, SCHEMA_VERSION

SPIKE_DOC = {
    "name": "spike_json",
    "domain": {"right": 1},
    "formula": {"breakpoints": [0, "1/n", 1], "values": ["n", 0]},
}


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_gallery_writes_reports(tmp_path, capsys):
    assert main(["gallery", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "gallery.json").read_text())
    assert doc["schema"] == SCHEMA_VERSION and doc["mismatches"] == []
    assert set(doc["families"]) == {"spike", "spread", "typewriter", "constant"}
    with open(tmp_path / "gallery_stats.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and set(rows[0]) == {"n", "stat_name", "p", "delta", "value"}
    assert "spike" in capsys.readouterr().out


def test_diagnose_json_family(tmp_path):
    src = write(tmp_path / "fam.json", SPIKE_DOC)
    out = tmp_path / "out"
    assert main(["diagnose", "--input", src, "--out", str(out)]) == EXIT_OK
    doc = json.loads((out / "diagnose.json").read_text())
    verdicts = {r["mode"]: r["verdict"] for r in doc["reports"]}
    assert verdicts == {
        "Lp": "CERTIFIED_FAILS_AT_HORIZON",
        "almost_Lp": "CERTIFIED_HOLDS",
        "alpha_p": "CERTIFIED_HOLDS",
        "measure": "CERTIFIED_HOLDS",
    }
    assert (out / "diagnose_stats.csv").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["diagnose"],
        ["diagnose", "--input", "/nonexistent.json"],
        ["gallery", "--p", "1/2"],
        ["gallery", "--horizon", "4"],
        ["gallery", "--delta-grid", "0,1"],
        ["gallery", "--tol", "-1"],
        ["preserve", "--map", "cube"],
    ],
)
def test_bad_input_exits_with_3(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path)]) == EXIT_INPUT


def test_invalid_documents_exit_with_3(tmp_path):
    bad_fam = write(tmp_path / "bad.json", {"domain": {"right": 1}})
    assert main(["diagnose", "--input", bad_fam, "--out", str(tmp_path)]) == EXIT_INPUT
    bad_cfg = write(tmp_path / "cfg.json", {"horizon": 64, "colour": "red"})
    assert main(["gallery", "--config", bad_cfg, "--out", str(tmp_path)]) == EXIT_INPUT


def test_flags_override_config(tmp_path):
    cfg = write(tmp_path / "cfg.json", {"horizon": 16, "p": 2, "delta_grid": ["1/4", 1], "out": str(tmp_path / "a")})
    assert main(["gallery", "--config", cfg, "--out", str(tmp_path / "b"), "--horizon", "32"]) == EXIT_OK
    doc = json.loads((tmp_path / "b" / "gallery.json").read_text())
    assert doc["config"]["horizon"] == 32 and doc["config"]["p"] == "2"
    assert doc["config"]["delta_grid"] == ["1/4", "1"]
    assert not (tmp_path / "a").exists()


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig("bogus")
    with pytest.raises(InputError):
        RunConfig("gallery", delta_grid=())


def test_preserve_affine_on_spike(tmp_path):
    assert main(["preserve", "--map", "affine(2,1)", "--p", "2", "--horizon", "32", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "preserve.json").read_text())
    assert doc["scaling_holds"] is True and doc["family"] == "spike"


def test_preserve_square_builds_counterexample(tmp_path):
    argv = ["preserve", "--map", "square", "--horizon", "16", "--samples", "4", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    doc = json.loads((tmp_path / "preserve.json").read_text())
    assert doc["lower_bounds"]["all_exceed_half"] is True
    assert len(doc["counterexample"]["pairs"]) == 16
    # horizon 16 is too short to certify the source family, only its image
    assert {r["verdict"] for r in doc["after"]} == {"CERTIFIED_FAILS_AT_HORIZON"}


def test_relax_small_run(tmp_path):
    cfg = write(tmp_path / "cfg.json", {"relax": {"J": 16, "T_final": 0.02, "eps_list": [0.25, 0.0625], "samples": 3}})
    assert main(["relax", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    with open(tmp_path / "relax.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == RELAX_COLUMNS
    summary = json.loads((tmp_path / "relax.json").read_text())
    assert len(summary["runs"]) == 2


def test_relax_rejects_unknown_keys(tmp_path):
    cfg = write(tmp_path / "cfg.json", {"relax": {"J": 16, "viscosity": 1}})
    assert main(["relax", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT


def test_unwritable_output_exits_with_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["gallery", "--horizon", "16", "--out", str(blocker / "sub")]) == EXIT_INPUT
