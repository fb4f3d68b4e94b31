import pytest

from chiralcl.manifest import (
    ManifestError,
    RunManifest,
    parse_manifest,
    sha256_text,
    verify_manifest,
)


def _write_run(root):
    (root / "a.csv").write_text("t,e\n0,1\n")
    (root / "b.txt").write_text("hello\n")
    man = RunManifest(scenario_hash=sha256_text("scenario"),
                      elapsed_s=1.5,
                      results={"d_600nm": -0.26, "pcp_avg": 0.21})
    man.add_file(root, "a.csv")
    man.add_file(root, "b.txt")
    man.write(root)
    return man


def test_text_round_trip(tmp_path):
    man = _write_run(tmp_path)
    back = parse_manifest(man.text())
    assert back.scenario_hash == man.scenario_hash
    assert back.results == pytest.approx(man.results)
    assert back.files == man.files


def test_verify_passes_then_catches_tamper(tmp_path):
    _write_run(tmp_path)
    verify_manifest(tmp_path)
    (tmp_path / "a.csv").write_text("t,e\n0,2\n")
    with pytest.raises(ManifestError, match="hash mismatch: a.csv"):
        verify_manifest(tmp_path)


def test_verify_reports_missing_artifact(tmp_path):
    _write_run(tmp_path)
    (tmp_path / "b.txt").unlink()
    with pytest.raises(ManifestError, match="missing artifact: b.txt"):
        verify_manifest(tmp_path)


def test_parse_rejects_malformed_lines():
    with pytest.raises(ManifestError):
        parse_manifest("[manifest]\nnot a key value line\n")
    with pytest.raises(ManifestError, match="scenario hash"):
        parse_manifest("[manifest]\nversion = 1\n")
