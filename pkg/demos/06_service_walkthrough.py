"""Walk the HTTP API end to end without leaving the process.

The same flow works against a running server (`gaitdex serve`); the test
client here keeps the demo self-contained.  Upload a cohort CSV, fit the
pipelines, pull a subject report, fetch curve overlays, and compare two
subjects' profiles.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from fgdi import GridSpec, save_cohort, synth_cohort
from fgdi.service import ServiceConfig, create_app

workdir = Path(tempfile.mkdtemp(prefix="fgdi-demo-"))
cohort = synth_cohort(seed=8, n_healthy=15, n_patient=5, grid=GridSpec(101))
cohort.subjects[15].metadata.update(hoehn_yahr=3, freezer=True)
csv_path = workdir / "cohort.csv"
meta_path = workdir / "meta.csv"
save_cohort(cohort, csv_path, metadata_path=meta_path)

client = TestClient(create_app(ServiceConfig(data_dir=workdir / "store")))

summary = client.post("/cohorts", files={
    "cohort": ("cohort.csv", csv_path.read_bytes(), "text/csv"),
    "metadata": ("meta.csv", meta_path.read_bytes(), "text/csv"),
}).json()
print("uploaded:", summary)

fit = client.post(f"/cohorts/{summary['cohort_id']}/fit",
                  json={"modes": ["combined", "left", "right"], "omega": 0.99}).json()
print("fitted:", fit["status"], "| combined W =", fit["counts"]["combined"]["W"])
model_id = fit["model_id"]

report = client.get(f"/models/{model_id}/subjects/p000/report",
                    params={"indices": "fgdi,gps"}).json()
print(f"p000: sFGDI {report['sfgdi']:+.2f}, GPS {report['gps']:.2f} deg, "
      f"metadata {report['metadata']}")

curves = client.get(f"/models/{model_id}/subjects/p000/curves",
                    params={"variable": "L_knee_flexion",
                            "with_reconstruction": True}).json()
gap = max(abs(o - r) for o, r in zip(curves["observed"], curves["reconstruction"]))
print(f"L knee flexion: band kind {curves['healthy_band']['kind']}, "
      f"max |observed - reconstruction| = {gap:.3f} deg")

comparison = client.get(f"/models/{model_id}/compare",
                        params={"sid_a": "p000", "sid_b": "h003"}).json()
biggest = max(zip(comparison["labels"], comparison["a"]["map"]), key=lambda t: t[1])
print(f"compare p000 vs h003 over {len(comparison['variables'])} variables; "
      f"p000's most deviant: {biggest[0]} at {biggest[1]:+.2f} sd")
