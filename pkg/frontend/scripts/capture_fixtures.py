"""Capture real service payloads as fixtures for the UI consistency tests.

Runs the scoring service in-process on a synthetic cohort and records the
exact JSON the browser would receive: a subject report, the matching curve
payload, a self-comparison, and a cell-level upload error.  Rerun after
changing the service's payload shapes:

    python3 scripts/capture_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from fgdi.gaitdata import GridSpec, save_cohort, synth_cohort
from fgdi.service import ServiceConfig, create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    workdir = Path(tempfile.mkdtemp(prefix="fgdi-fixtures-"))
    cohort = synth_cohort(seed=31, n_healthy=12, n_patient=4, grid=GridSpec(41))
    cohort.subjects[12].metadata.update(hoehn_yahr=2, freezer=True)
    csv_path = workdir / "cohort.csv"
    meta_path = workdir / "meta.csv"
    save_cohort(cohort, csv_path, metadata_path=meta_path)

    client = TestClient(create_app(ServiceConfig(data_dir=workdir / "store")))
    upload = client.post("/cohorts", files={
        "cohort": ("cohort.csv", csv_path.read_bytes(), "text/csv"),
        "metadata": ("meta.csv", meta_path.read_bytes(), "text/csv"),
    }).json()
    fit = client.post(f"/cohorts/{upload['cohort_id']}/fit",
                      json={"modes": ["combined"], "omega": 0.99}).json()
    model_id = fit["model_id"]

    report = client.get(f"/models/{model_id}/subjects/p000/report",
                        params={"mode": "combined", "indices": "fgdi,gps"}).json()
    curves = client.get(f"/models/{model_id}/subjects/p000/curves",
                        params={"variable": "L_knee_flexion",
                                "with_reconstruction": True}).json()
    compare = client.get(f"/models/{model_id}/compare",
                         params={"sid_a": "p000", "sid_b": "p000"}).json()

    bad_csv = (b"subject_id,healthy,side,variable,t000,t001,t002\n"
               b"s1,1,L,pelvic_tilt,1.0,nan,3.0\n")
    error = client.post("/cohorts", files={"cohort": ("bad.csv", bad_csv, "text/csv")})
    assert error.status_code == 400

    for name, payload in (("report", report), ("curves", curves),
                          ("compare_self", compare), ("upload_error", error.json())):
        (FIXTURES / f"{name}.json").write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote tests/fixtures/{name}.json")


if __name__ == "__main__":
    main()
