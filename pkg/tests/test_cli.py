from __future__ import annotations

import json

import pytest

from multimax.cli import main
from test_report import write_fixture_inputs


def run_cli(*argv) -> int:
    return main(list(argv))


class TestAuditCommand:
    def test_happy_path(self, tmp_path, capsys):
        manifest = write_fixture_inputs(tmp_path)
        code = run_cli("audit", "--manifest", str(manifest), "--out", str(tmp_path / "out"))
        assert code == 0
        out = capsys.readouterr().out
        assert "policy: strict  runs: 7" in out
        assert "bands: 4  (partition: True)" in out
        assert "top band 5/6: 2 runs, ambiguity 2/6 (0.3333)" in out
        assert out.count("wrote ") == 7
        assert (tmp_path / "out" / "report.json").exists()

    def test_missing_manifest_is_validation_failure(self, tmp_path, capsys):
        code = run_cli("audit", "--manifest", str(tmp_path / "nope.txt"), "--out", str(tmp_path))
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_group_map_gaps_are_compute_failures(self, tmp_path, capsys):
        # A group map that skips an instance makes group ambiguity undecidable.
        (tmp_path / "groups.csv").write_text(
            "instance_id,group\n"
            + "\n".join(f"i{k:04d},solo" for k in range(5))
            + "\n",
            encoding="utf-8",
        )
        manifest = write_fixture_inputs(tmp_path, extra_entries={"group_map": "groups.csv"})
        code = run_cli("audit", "--manifest", str(manifest), "--out", str(tmp_path / "out"))
        assert code == 3
        assert "i0005" in capsys.readouterr().err

    def test_seed_env_override(self, tmp_path, capsys, monkeypatch):
        manifest = write_fixture_inputs(tmp_path)
        monkeypatch.setenv("MULTIMAX_SEED", "123")
        assert run_cli("audit", "--manifest", str(manifest), "--out", str(tmp_path / "out")) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["seed"] == 123

    def test_bad_seed_env_is_validation_failure(self, tmp_path, capsys, monkeypatch):
        manifest = write_fixture_inputs(tmp_path)
        monkeypatch.setenv("MULTIMAX_SEED", "soon")
        assert run_cli("audit", "--manifest", str(manifest), "--out", str(tmp_path / "out")) == 2
        assert "MULTIMAX_SEED" in capsys.readouterr().err


class TestZooCommand:
    def test_writes_audit_inputs(self, tmp_path, capsys):
        code = run_cli("zoo", "--scenario", "stump", "--out", str(tmp_path))
        assert code == 0
        for name in ("labels.csv", "predictions.csv", "manifest.txt"):
            assert (tmp_path / name).exists()
        # the stump family predicts on the validation grid only
        assert not (tmp_path / "fairness_predictions.csv").exists()
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "provenance.scenario=stump" in manifest
        assert "seed=0" in manifest

    def test_fairness_grid_written_when_distinct(self, tmp_path):
        assert run_cli("zoo", "--scenario", "separable-linear", "--out", str(tmp_path)) == 0
        assert (tmp_path / "fairness_predictions.csv").exists()
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "fairness_predictions=fairness_predictions.csv" in manifest

    def test_tie_break_and_banding_flow_into_manifest(self, tmp_path):
        code = run_cli(
            "zoo",
            "--scenario", "stump",
            "--out", str(tmp_path),
            "--banding", "round:2",
            "--tie-break", "specificity,recall",
        )
        assert code == 0
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "band=round:2" in manifest
        assert "tie_break=specificity,recall" in manifest

    def test_unknown_scenario_rejected_by_parser(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("zoo", "--scenario", "imaginary", "--out", str(tmp_path))
        assert excinfo.value.code == 2
        assert "imaginary" in capsys.readouterr().err

    def test_env_seed_overrides_flag(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MULTIMAX_SEED", "7")
        assert run_cli("zoo", "--scenario", "stump", "--seed", "1", "--out", str(tmp_path)) == 0
        assert "seed=7" in (tmp_path / "manifest.txt").read_text()


class TestEndToEnd:
    def test_zoo_output_audits_cleanly(self, tmp_path, capsys):
        data = tmp_path / "data"
        assert run_cli("zoo", "--scenario", "separable-linear", "--out", str(data)) == 0
        code = run_cli(
            "audit", "--manifest", str(data / "manifest.txt"), "--out", str(tmp_path / "out")
        )
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["provenance"]["scenario"] == "separable-linear"
        assert report["counts"]["fairness_instances"] != report["counts"]["validation_instances"]


class TestFairModelCommand:
    def test_writes_model_artefacts(self, tmp_path, capsys):
        manifest = write_fixture_inputs(tmp_path)
        code = run_cli(
            "fair-model",
            "--manifest", str(manifest),
            "--band", "5/6",
            "--out", str(tmp_path / "fm"),
        )
        assert code == 0
        payload = json.loads((tmp_path / "fm" / "fair_model.json").read_text())
        assert payload["band"] == "5/6"
        assert payload["run_count"] == 2
        assert payload["recall"] == {"ratio": "3/3", "decimal": "1.0000"}
        csv = (tmp_path / "fm" / "fair_model_validation.csv").read_text().splitlines()
        assert csv[0] == "run_id,instance_id,prediction"
        assert len(csv) == 7
        assert all(line.startswith("fair-ensemble,") for line in csv[1:])
        # the fixture's fairness index equals its validation index
        assert not (tmp_path / "fm" / "fair_model_fairness.csv").exists()

    def test_distinct_fairness_grid_exported(self, tmp_path):
        data = tmp_path / "data"
        run_cli("zoo", "--scenario", "separable-linear", "--out", str(data))
        report_dir = tmp_path / "out"
        run_cli("audit", "--manifest", str(data / "manifest.txt"), "--out", str(report_dir))
        report = json.loads((report_dir / "report.json").read_text())
        band = report["bands"][0]["label"]
        code = run_cli(
            "fair-model",
            "--manifest", str(data / "manifest.txt"),
            "--band", band,
            "--out", str(tmp_path / "fm"),
        )
        assert code == 0
        fairness_csv = (tmp_path / "fm" / "fair_model_fairness.csv").read_text().splitlines()
        assert len(fairness_csv) - 1 == report["counts"]["fairness_instances"]

    def test_unknown_band_lists_known_ones(self, tmp_path, capsys):
        manifest = write_fixture_inputs(tmp_path)
        code = run_cli(
            "fair-model",
            "--manifest", str(manifest),
            "--band", "9/9",
            "--out", str(tmp_path / "fm"),
        )
        assert code == 2
        err = capsys.readouterr().err
        assert "9/9" in err and "5/6" in err and "1/6" in err


class TestCompareCommand:
    def test_default_table(self, tmp_path, capsys):
        manifest = write_fixture_inputs(tmp_path)
        assert run_cli("compare", "--manifest", str(manifest)) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split() == ["policy", "bands", "top_band", "top_runs", "top_ambiguity"]
        assert lines[1].split()[:2] == ["strict", "4"]
        assert [line.split()[0] for line in lines[1:]] == ["strict", "round:3", "round:2"]

    def test_explicit_policies_and_json(self, tmp_path, capsys):
        manifest = write_fixture_inputs(tmp_path)
        out = tmp_path / "cmp.json"
        code = run_cli(
            "compare",
            "--manifest", str(manifest),
            "--policies", "strict", "tol:1/6",
            "--out", str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert [row["policy"] for row in payload["rows"]] == ["strict", "tol:1/6"]
        assert payload["rows"][0]["band_count"] == 4

    def test_malformed_policy_is_validation_failure(self, tmp_path, capsys):
        manifest = write_fixture_inputs(tmp_path)
        assert run_cli("compare", "--manifest", str(manifest), "--policies", "fuzzy:9") == 2
        assert "fuzzy:9" in capsys.readouterr().err


class TestProfileCommand:
    @pytest.mark.parametrize(
        "kind", ["stability_profile", "fairness_profile", "multiplicity_panel"]
    )
    def test_renders_each_kind(self, tmp_path, capsys, kind):
        manifest = write_fixture_inputs(tmp_path)
        out = tmp_path / "profiles" / f"{kind}.svg"
        code = run_cli(
            "profile", "--manifest", str(manifest), "--kind", kind, "--out", str(out)
        )
        assert code == 0
        assert out.read_text().startswith("<svg")
        sidecar = json.loads((out.parent / f"{kind}.sidecar.json").read_text())
        assert sidecar["kind"] == kind

    def test_matches_audit_render(self, tmp_path):
        manifest = write_fixture_inputs(tmp_path)
        out = tmp_path / "alone.svg"
        run_cli("profile", "--manifest", str(manifest), "--kind", "fairness_profile", "--out", str(out))
        run_cli("audit", "--manifest", str(manifest), "--out", str(tmp_path / "full"))
        assert out.read_bytes() == (tmp_path / "full" / "fairness_profile.svg").read_bytes()
