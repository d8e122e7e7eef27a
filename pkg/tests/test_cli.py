import json

import pytest

from cavitysim.cli import EXIT_ENGINE, EXIT_INVALID, EXIT_OK, main
from test_scenario import SMALL


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def test_list_figures(capsys):
    assert main(["list-figures"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 16 and out[0].startswith("fig2a\t")


def test_validate_ok_and_invalid(small, tmp_path, capsys):
    assert main(["validate", str(small)]) == EXIT_OK
    bad = tmp_path / "bad.ini"
    bad.write_text(SMALL.replace("eta = 0.5", "eta = 1.3"))
    assert main(["validate", str(bad)]) == EXIT_INVALID
    assert "line 12" in capsys.readouterr().err


def test_missing_file_and_bad_arguments(tmp_path):
    assert main(["validate", str(tmp_path / "nope.ini")]) == EXIT_INVALID
    assert main(["run"]) == EXIT_INVALID
    assert main(["figure", "fig2a", "--out", str(tmp_path), "--engine", "magic"]) == EXIT_INVALID
    assert main(["figure", "fig1", "--out", str(tmp_path)]) == EXIT_INVALID


def test_run_and_json_input(small, tmp_path, capsys):
    assert main(["run", str(small), "--out", str(tmp_path / "a")]) == EXIT_OK
    printed = capsys.readouterr().out.split()
    assert str(tmp_path / "a" / "inversion.csv") in printed
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    doc = tmp_path / "s.json"
    doc.write_text(json.dumps(manifest["scenario"]))
    assert main(["run", str(doc), "--json", "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("inversion.csv", "concurrence.csv", "q_grid.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_engine_override(small, tmp_path):
    assert main(["run", str(small), "--out", str(tmp_path), "--engine", "dispersive"]) == EXIT_OK
    assert json.loads((tmp_path / "manifest.json").read_text())["engine"] == "dispersive"


def test_engine_error_exit_code(small, tmp_path):
    # the dispersive coefficients need a real second coupling
    complex_g2 = small.parent / "cg.ini"
    complex_g2.write_text(SMALL.replace("gamma2 = 0.2", "gamma2 = 0.2j"))
    assert main(["run", str(complex_g2), "--out", str(tmp_path / "o"), "--engine", "dispersive"]) == EXIT_ENGINE
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", str(small), "--out", str(blocker / "x")]) == EXIT_ENGINE


def test_figure_preset(tmp_path):
    assert main(["figure", "fig6b", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "concurrence.csv").exists()
