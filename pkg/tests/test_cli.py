import json

import numpy as np
import pytest

from chiralcl import arrayio
from chiralcl.cli import main
from chiralcl.scenarios import load_scenario_text


def test_missing_scenario_exits_2_with_machine_record(capsys):
    assert main(["validate", "does-not-exist"]) == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "missing-file"


def test_unknown_subcommand_exits_2(capsys):
    assert main(["frobnicate"]) == 2


def test_no_subcommand_exits_2(capsys):
    assert main([]) == 2


def test_invalid_scenario_exits_3(tmp_path, capsys):
    bad = load_scenario_text("fig1").replace("cell = 5nm", "cell = 5")
    p = tmp_path / "bad.scn"
    p.write_text(bad)
    assert main(["validate", str(p)]) == 3
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "validation"
    assert record["problems"]


def test_validate_echoes_canonical_form(capsys):
    assert main(["validate", "fig1"]) == 0
    out = capsys.readouterr().out
    assert "[domain]" in out and "[run]" in out


def test_modes_csv_row(capsys):
    assert main(["modes", "--wire", "--radius", "25nm",
                 "--wavelength", "600nm"]) == 0
    header, row = capsys.readouterr().out.strip().split("\n")
    cols = dict(zip(header.split(","), row.split(",")))
    assert float(cols["n_eff_re"]) == pytest.approx(2.08, abs=0.05)
    assert float(cols["beta_over_gamma"]) == pytest.approx(0.58, abs=0.02)
    assert float(cols["surface_ratio"]) == pytest.approx(0.30, abs=0.03)


def test_render_2d_and_3d_slice(tmp_path, capsys):
    arr2 = np.linspace(-1, 1, 12).reshape(3, 4)
    p2 = tmp_path / "a.arr"
    arrayio.write_array(p2, arr2)
    img = tmp_path / "a.ppm"
    assert main(["render", str(p2), str(img)]) == 0
    assert img.read_bytes().startswith(b"P6")

    arr3 = np.zeros((2, 3, 4))
    p3 = tmp_path / "b.arr"
    arrayio.write_array(p3, arr3)
    # 3D without a slice is a validation failure
    capsys.readouterr()
    assert main(["render", str(p3), str(tmp_path / "b.ppm")]) == 3
    assert main(["render", str(p3), str(tmp_path / "b.ppm"),
                 "--slice", "0,1", "--colormap", "magnitude",
                 "--range", "0,1"]) == 0


def test_verify_missing_dir_exits(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "nope")]) == 2
