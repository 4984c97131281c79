import csv
import json

import numpy as np
import pytest

from fgdi.cli import main
from fgdi.gaitdata import GridSpec, save_cohort, synth_cohort


@pytest.fixture(scope="module")
def cohort_csv(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    path = tmp / "cohort.csv"
    cohort = synth_cohort(seed=13, n_healthy=15, n_patient=6, grid=GridSpec(51))
    save_cohort(cohort, path)
    return path


@pytest.fixture(scope="module")
def model_json(cohort_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-model") / "model.json"
    code = main(["fit", str(cohort_csv), "--modes", "combined,left,per_joint",
                 "--out", str(out)])
    assert code == 0
    return out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestFit:
    def test_prints_component_counts(self, cohort_csv, tmp_path, capsys):
        out = tmp_path / "model.json"
        code = main(["fit", str(cohort_csv), "--modes", "combined", "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "combined: W=" in printed
        assert out.exists()

    def test_byte_identical_reruns(self, cohort_csv, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        assert main(["fit", str(cohort_csv), "--modes", "combined", "--out", str(a)]) == 0
        assert main(["fit", str(cohort_csv), "--modes", "combined", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_omega_out_of_range_is_usage_error(self, cohort_csv, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["fit", str(cohort_csv), "--omega", "1.5",
                  "--out", str(tmp_path / "m.json")])
        assert excinfo.value.code == 2

    def test_missing_file_is_module_error(self, tmp_path, capsys):
        code = main(["fit", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.json")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_config_file_defaults(self, cohort_csv, tmp_path, capsys):
        config = tmp_path / "gaitdex.conf"
        config.write_text("omega = 0.95\nmodes = left\n")
        out = tmp_path / "m.json"
        code = main(["--config", str(config), "fit", str(cohort_csv), "--out", str(out)])
        assert code == 0
        assert "left: W=" in capsys.readouterr().out
        assert json.loads(out.read_text())["omega"] == 0.95


class TestScore:
    def test_healthy_only_standardization(self, tmp_path, capsys):
        cohort = synth_cohort(seed=21, n_healthy=10, n_patient=0, grid=GridSpec(31))
        path = tmp_path / "healthy.csv"
        save_cohort(cohort, path)
        model = tmp_path / "m.json"
        assert main(["fit", str(path), "--modes", "combined", "--out", str(model)]) == 0
        report = tmp_path / "report.csv"
        assert main(["score", str(model), str(path), "--indices", "fgdi",
                     "--out", str(report)]) == 0
        rows = read_csv(report)
        values = np.array([float(r["sfgdi"]) for r in rows])
        assert abs(values.mean()) < 1e-10
        assert abs(values.std(ddof=1) - 1.0) < 1e-10

    def test_all_indices_left_mode(self, model_json, cohort_csv, tmp_path, capsys):
        report = tmp_path / "report.csv"
        code = main(["score", str(model_json), str(cohort_csv),
                     "--mode", "left", "--indices", "fgdi,gdi,gps,oa",
                     "--out", str(report)])
        assert code == 0
        err = capsys.readouterr().err
        assert "surrogate" in err
        rows = read_csv(report)
        for name in ("fgdi", "sfgdi", "gdi", "sgdi", "gps", "oa"):
            column = np.array([float(r[name]) for r in rows])
            assert np.all(np.isfinite(column))
        assert not any(r["flags"] for r in rows)

    def test_resample_notice_on_101_point_cohort(self, tmp_path, capsys):
        cohort = synth_cohort(seed=23, n_healthy=8, n_patient=3, grid=GridSpec(101))
        path = tmp_path / "c101.csv"
        save_cohort(cohort, path)
        model = tmp_path / "m.json"
        assert main(["fit", str(path), "--modes", "left", "--out", str(model)]) == 0
        capsys.readouterr()
        report = tmp_path / "r.csv"
        assert main(["score", str(model), str(path), "--mode", "left",
                     "--indices", "fgdi,gdi", "--out", str(report)]) == 0
        assert "51-point resample" in capsys.readouterr().err

    def test_no_surrogate_exits_3(self, model_json, cohort_csv, tmp_path, capsys):
        code = main(["score", str(model_json), str(cohort_csv),
                     "--mode", "left", "--indices", "gdi", "--no-surrogate",
                     "--out", str(tmp_path / "r.csv")])
        assert code == 3
        assert "gdi_features_51x9.csv" in capsys.readouterr().err

    def test_gdi_basis_from_data_dir(self, model_json, cohort_csv, tmp_path,
                                     monkeypatch, capsys):
        from fgdi.gaitdata import load_cohort, resample
        from fgdi.indices import surrogate_gdi_basis

        cohort51 = resample(load_cohort(cohort_csv), 51)
        basis = surrogate_gdi_basis(cohort51, "L")
        np.savetxt(tmp_path / "gdi_features_51x9.csv", basis.matrix, delimiter=",")
        monkeypatch.setenv("DATA_DIR", str(tmp_path))
        report = tmp_path / "r.json"
        code = main(["score", str(model_json), str(cohort_csv), "--mode", "left",
                     "--indices", "fgdi,gdi", "--out", str(report), "--format", "json"])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["gdi_source"] == "published_supplement"

    def test_json_format(self, model_json, cohort_csv, tmp_path):
        report = tmp_path / "report.json"
        assert main(["score", str(model_json), str(cohort_csv),
                     "--out", str(report)]) == 0
        payload = json.loads(report.read_text())
        assert payload["mode"] == "combined"
        assert len(payload["sfgdi"]) == 21


class TestStability:
    def test_deltas_zero_all_zero(self, model_json, cohort_csv, tmp_path):
        out = tmp_path / "stab.csv"
        code = main(["stability", str(model_json), str(cohort_csv),
                     "--deltas", "0", "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 15
        assert all(float(r["delta_+0"]) == 0.0 for r in rows)

    def test_table_shape(self, model_json, cohort_csv, tmp_path):
        out = tmp_path / "stab.csv"
        code = main(["stability", str(model_json), str(cohort_csv),
                     "--deltas", "-2,-1,1,2", "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 15  # per-joint table over the combined15 set
        assert set(rows[0]) == {"label", "k_opt", "delta_-2", "delta_-1",
                                "delta_+1", "delta_+2"}

    def test_combined_mode_row(self, model_json, cohort_csv, tmp_path):
        out = tmp_path / "stab.csv"
        code = main(["stability", str(model_json), str(cohort_csv),
                     "--mode", "combined", "--deltas", "-1,1", "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 1
        assert rows[0]["label"] == "combined"


class TestCompare:
    def test_report_against_itself_all_tau_one(self, model_json, cohort_csv,
                                               tmp_path, capsys):
        report = tmp_path / "report.csv"
        assert main(["score", str(model_json), str(cohort_csv), "--mode", "left",
                     "--indices", "fgdi,gps,oa", "--out", str(report)]) == 0
        out = tmp_path / "cmp.json"
        code = main(["compare", str(report), str(report), "--out", str(out)])
        assert code == 0
        summary = json.loads(out.read_text())
        assert summary["n_shared_subjects"] == 21
        for name, tau in summary["between"].items():
            assert tau == 1.0, name

    def test_within_report_pairwise_taus(self, model_json, cohort_csv, tmp_path):
        report = tmp_path / "report.csv"
        assert main(["score", str(model_json), str(cohort_csv), "--mode", "left",
                     "--indices", "fgdi,gdi,gps,oa", "--out", str(report)]) == 0
        out = tmp_path / "cmp.json"
        assert main(["compare", str(report), str(report), "--out", str(out)]) == 0
        within = json.loads(out.read_text())["within_a"]
        assert "sfgdi_vs_sgdi" in within or "sgdi_vs_sfgdi" in within
        # scaled GDI decreases with pathology, so it anti-correlates with sFGDI
        key = "sfgdi_vs_sgdi" if "sfgdi_vs_sgdi" in within else "sgdi_vs_sfgdi"
        assert within[key] < 0

    def test_json_report_input(self, model_json, cohort_csv, tmp_path):
        report = tmp_path / "report.json"
        assert main(["score", str(model_json), str(cohort_csv),
                     "--out", str(report), "--format", "json"]) == 0
        out = tmp_path / "cmp.json"
        assert main(["compare", str(report), str(report), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["between"]["sfgdi"] == 1.0


class TestSynth:
    def test_deterministic_output(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["synth", "--seed", "3", "--healthy", "4", "--patients", "2",
                     "--points", "21", "--out", str(a)]) == 0
        assert main(["synth", "--seed", "3", "--healthy", "4", "--patients", "2",
                     "--points", "21", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
