"""HTTP API: cohort upload, pipeline fitting with job polling, per-subject scoring.

Uploads and fitted models persist under a data directory (payload bytes are
content-addressed by sha256; every upload still gets a fresh opaque id, so
duplicate uploads yield distinct cohorts).  All GET endpoints are pure reads
over immutable entries and return byte-identical payloads for the same
store state.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .errors import DataError, FgdiError, ParseError
from .gaitdata import Cohort, VariableId, load_cohort
from .pipeline import (
    MODES,
    PipelineModel,
    fit_pipeline,
    load_pipeline,
    save_pipeline,
    score_report,
)


@dataclass
class ServiceConfig:
    data_dir: Path = Path("fgdi_data")
    max_upload_mib: int = 50
    fit_workers: int = 2
    ui_dir: Optional[Path] = None  # built web UI to serve at /ui, if any

    @classmethod
    def from_sources(cls, config: Optional[dict] = None, data_dir=None,
                     ui_dir=None, env: Optional[dict] = None) -> "ServiceConfig":
        """Key=value config file values, overridden by environment variables."""
        config = dict(config or {})
        env = dict(os.environ if env is None else env)
        resolved = data_dir or env.get("DATA_DIR") or config.get("data_dir") or "fgdi_data"
        mib = env.get("MAX_UPLOAD_MIB") or config.get("max_upload_mib") or 50
        workers = env.get("FIT_WORKERS") or config.get("fit_workers") or 2
        ui = ui_dir or env.get("UI_DIR") or config.get("ui_dir")
        # absolute paths: the server may daemonize or run from another cwd
        return cls(data_dir=Path(resolved).resolve(), max_upload_mib=int(mib),
                   fit_workers=int(workers),
                   ui_dir=Path(ui).resolve() if ui else None)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


@dataclass
class SessionStore:
    """Disk-backed store of cohorts, models, and fit-job state."""

    config: ServiceConfig
    lock: threading.RLock = field(default_factory=threading.RLock)

    def __post_init__(self):
        self.objects_dir = self.config.data_dir / "objects"
        self.objects_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.config.data_dir / "index.json"
        self._cohort_cache: dict = {}
        self._model_cache: dict = {}
        self._report_cache: dict = {}
        if self.index_path.exists():
            self.index = json.loads(self.index_path.read_text())
            # a fit interrupted by a restart never produced its object
            for entry in self.index["models"].values():
                if entry["status"] == "pending":
                    entry["status"] = "failed"
                    entry["error"] = "fit interrupted by service restart"
        else:
            self.index = {"cohorts": {}, "models": {}}

    def _flush(self):
        self.index_path.write_text(json.dumps(self.index))

    def _put_object(self, payload: bytes, suffix: str) -> str:
        sha = hashlib.sha256(payload).hexdigest()
        path = self.objects_dir / f"{sha}{suffix}"
        if not path.exists():
            path.write_bytes(payload)
        return sha

    def _object_path(self, sha: str, suffix: str) -> Path:
        return self.objects_dir / f"{sha}{suffix}"

    # -- cohorts ------------------------------------------------------------

    def add_cohort(self, payload: bytes, metadata_payload: Optional[bytes]) -> dict:
        sha = self._put_object(payload, ".csv")
        meta_sha = (self._put_object(metadata_payload, ".meta.csv")
                    if metadata_payload else None)
        cohort = self._load_cohort_from(sha, meta_sha)
        cohort_id = uuid.uuid4().hex
        summary = {
            "cohort_id": cohort_id,
            "n_subjects": cohort.n_subjects,
            "n_healthy": cohort.n_healthy,
            "T": cohort.grid.num_points,
        }
        with self.lock:
            self.index["cohorts"][cohort_id] = {
                "sha": sha, "meta_sha": meta_sha, "summary": summary,
            }
            self._cohort_cache[cohort_id] = cohort
            self._flush()
        return summary

    def _load_cohort_from(self, sha: str, meta_sha: Optional[str]) -> Cohort:
        meta_path = self._object_path(meta_sha, ".meta.csv") if meta_sha else None
        return load_cohort(self._object_path(sha, ".csv"), metadata_path=meta_path)

    def cohort_entry(self, cohort_id: str) -> dict:
        entry = self.index["cohorts"].get(cohort_id)
        if entry is None:
            raise ApiError(404, "unknown_cohort", f"no cohort with id {cohort_id!r}")
        return entry

    def cohort(self, cohort_id: str) -> Cohort:
        entry = self.cohort_entry(cohort_id)
        with self.lock:
            if cohort_id not in self._cohort_cache:
                self._cohort_cache[cohort_id] = self._load_cohort_from(
                    entry["sha"], entry["meta_sha"])
            return self._cohort_cache[cohort_id]

    # -- models -------------------------------------------------------------

    def create_model_entry(self, cohort_id: str, request: dict) -> str:
        model_id = uuid.uuid4().hex
        with self.lock:
            self.index["models"][model_id] = {
                "status": "pending", "cohort_id": cohort_id,
                "request": request, "sha": None, "counts": None, "error": None,
            }
            self._flush()
        return model_id

    def finish_model(self, model_id: str, pipeline: PipelineModel) -> None:
        tmp = self.objects_dir / f"tmp-{model_id}.model.json"
        save_pipeline(pipeline, tmp)
        payload = tmp.read_bytes()
        tmp.unlink()
        sha = self._put_object(payload, ".model.json")
        with self.lock:
            entry = self.index["models"][model_id]
            entry.update(status="ready", sha=sha,
                         counts=pipeline.component_counts())
            self._model_cache[model_id] = pipeline
            self._flush()

    def fail_model(self, model_id: str, error: str) -> None:
        with self.lock:
            self.index["models"][model_id].update(status="failed", error=error)
            self._flush()

    def model_entry(self, model_id: str) -> dict:
        entry = self.index["models"].get(model_id)
        if entry is None:
            raise ApiError(404, "unknown_model", f"no model with id {model_id!r}")
        return entry

    def model(self, model_id: str) -> PipelineModel:
        entry = self.model_entry(model_id)
        if entry["status"] == "pending":
            raise ApiError(409, "model_pending", "model fit still running")
        if entry["status"] == "failed":
            raise ApiError(422, "model_failed", "model fit failed",
                           detail=entry.get("error"))
        with self.lock:
            if model_id not in self._model_cache:
                self._model_cache[model_id] = load_pipeline(
                    self._object_path(entry["sha"], ".model.json"))
            return self._model_cache[model_id]

    def cached_report(self, key, build):
        with self.lock:
            if key not in self._report_cache:
                self._report_cache[key] = build()
            return self._report_cache[key]


class FitRequest(BaseModel):
    omega: float = 0.99
    modes: list = ["combined"]
    pelvis_side: str = "L"
    smoothing: str = "none"
    wait: bool = True


def _subject_index(cohort: Cohort, subject_id: str) -> int:
    try:
        return cohort.subject_ids.index(subject_id)
    except ValueError:
        raise ApiError(404, "unknown_subject", f"no subject with id {subject_id!r}") from None


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="fgdi service", version="0.1.0")
    store = SessionStore(config)
    executor = ThreadPoolExecutor(max_workers=config.fit_workers)
    app.state.store = store
    app.state.executor = executor

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={
            "code": exc.code, "message": exc.message, "detail": exc.detail,
        })

    @app.exception_handler(FgdiError)
    async def handle_fgdi_error(request: Request, exc: FgdiError):
        status = 400 if isinstance(exc, (DataError, ParseError)) else 422
        return JSONResponse(status_code=status, content={
            "code": type(exc).__name__, "message": str(exc), "detail": None,
        })

    @app.get("/api/description")
    def api_description():
        payload = resources.files("fgdi").joinpath("api_description.json").read_bytes()
        return Response(content=payload, media_type="application/json")

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    @app.post("/cohorts", status_code=200)
    async def upload_cohort(cohort: UploadFile = File(...),
                            metadata: UploadFile = File(default=None)):
        limit = config.max_upload_mib * 1024 * 1024
        payload = await cohort.read()
        metadata_payload = await metadata.read() if metadata is not None else None
        total = len(payload) + len(metadata_payload or b"")
        if total > limit:
            raise ApiError(413, "upload_too_large",
                           f"upload of {total} bytes exceeds the "
                           f"{config.max_upload_mib} MiB limit")
        return store.add_cohort(payload, metadata_payload)

    @app.get("/cohorts/{cohort_id}")
    def cohort_summary(cohort_id: str):
        entry = store.cohort_entry(cohort_id)
        cohort = store.cohort(cohort_id)
        return {
            **entry["summary"],
            "subjects": [
                {"subject_id": s.subject_id, "healthy": s.healthy,
                 "metadata": dict(s.metadata)}
                for s in cohort.subjects
            ],
            "variables": [v.key for v in cohort.variables()],
        }

    @app.post("/cohorts/{cohort_id}/fit")
    def fit_cohort(cohort_id: str, request: FitRequest):
        cohort = store.cohort(cohort_id)
        if not request.modes:
            raise ApiError(422, "no_modes", "no modes requested")
        for mode in request.modes:
            if mode not in MODES:
                raise ApiError(422, "unknown_mode",
                               f"unknown mode {mode!r}", detail=list(MODES))
        if not 0.0 < request.omega <= 1.0:
            raise ApiError(422, "bad_omega", f"omega must be in (0, 1], got {request.omega}")
        model_id = store.create_model_entry(cohort_id, request.model_dump(exclude={"wait"}))

        def run_fit():
            try:
                pipeline = fit_pipeline(cohort, omega=request.omega,
                                        modes=request.modes,
                                        pelvis_side=request.pelvis_side,
                                        smoothing=request.smoothing)
                store.finish_model(model_id, pipeline)
            except Exception as exc:  # recorded for the status endpoint
                store.fail_model(model_id, str(exc))

        future = executor.submit(run_fit)
        if request.wait:
            future.result()
            entry = store.model_entry(model_id)
            if entry["status"] == "failed":
                raise ApiError(422, "fit_failed", "model fit failed",
                               detail=entry["error"])
            return {"model_id": model_id, "status": "ready", "counts": entry["counts"]}
        return {"model_id": model_id, "status": "pending"}

    @app.get("/models/{model_id}")
    def model_status(model_id: str):
        entry = store.model_entry(model_id)
        return {
            "model_id": model_id,
            "status": entry["status"],
            "cohort_id": entry["cohort_id"],
            "request": entry["request"],
            "counts": entry["counts"],
            "error": entry["error"],
        }

    def _report(model_id: str, mode: str, indices: tuple):
        pipeline = store.model(model_id)
        if mode not in pipeline.modes:
            raise ApiError(409, "mode_not_fitted",
                           f"mode {mode!r} was not fitted",
                           detail=sorted(pipeline.modes))
        cohort = store.cohort(store.model_entry(model_id)["cohort_id"])

        def build():
            report = score_report(pipeline, mode, cohort, indices=indices)
            return report.to_dict()

        return store.cached_report((model_id, mode, indices), build)

    def _default_mode(pipeline: PipelineModel) -> str:
        return next(iter(pipeline.modes))

    @app.get("/models/{model_id}/subjects/{subject_id}/report")
    def subject_report(model_id: str, subject_id: str, mode: str = None,
                       indices: str = "fgdi"):
        pipeline = store.model(model_id)
        mode = mode or _default_mode(pipeline)
        wanted = tuple(tok.strip() for tok in indices.split(",") if tok.strip())
        if "gdi" in wanted and mode not in ("left", "right"):
            raise ApiError(409, "gdi_needs_leg_mode",
                           "GDI is a per-leg index; request mode=left or mode=right")
        payload = _report(model_id, mode, wanted)
        cohort = store.cohort(store.model_entry(model_id)["cohort_id"])
        i = _subject_index(cohort, subject_id)
        slice_out = {
            "subject_id": subject_id,
            "mode": mode,
            "healthy": payload["healthy"][i],
            "map_profile": {k: v[i] for k, v in payload["map_profile"].items()},
            "flags": payload["flags"][i],
            "metadata": payload["metadata"][i],
        }
        for name in ("fgdi", "sfgdi", "gps", "gdi", "sgdi", "oa"):
            if name in payload:
                slice_out[name] = payload[name][i]
        if "gvs" in payload:
            slice_out["gvs"] = {k: v[i] for k, v in payload["gvs"].items()}
        return slice_out

    @app.get("/models/{model_id}/subjects/{subject_id}/curves")
    def subject_curves(model_id: str, subject_id: str, variable: str,
                       with_reconstruction: bool = False):
        pipeline = store.model(model_id)
        cohort = store.cohort(store.model_entry(model_id)["cohort_id"])
        i = _subject_index(cohort, subject_id)
        try:
            var = VariableId.from_key(variable)
        except FgdiError:
            raise ApiError(409, "unknown_variable",
                           f"{variable!r} is not a kinematic variable key") from None
        fitted_model = None
        for fit in pipeline.modes.values():
            for m in fit.models:
                if m.variable == var:
                    fitted_model = m
                    break
            if fitted_model is not None:
                break
        if fitted_model is None:
            raise ApiError(409, "variable_not_fitted",
                           f"{variable!r} is not part of any fitted mode")
        curves = cohort.matrix(var)
        healthy = cohort.healthy_mask
        payload = {
            "subject_id": subject_id,
            "variable": variable,
            "label": var.label,
            "grid": cohort.grid.positions.tolist(),
            "observed": curves[i].tolist(),
            "healthy_mean": curves[healthy].mean(axis=0).tolist(),
            "healthy_band": {
                "kind": "minmax",
                "lower": curves[healthy].min(axis=0).tolist(),
                "upper": curves[healthy].max(axis=0).tolist(),
            },
        }
        if with_reconstruction:
            scores = fitted_model.transform(curves[i])
            approx = fitted_model.mean + scores[0] @ fitted_model.eigenfunctions
            payload["reconstruction"] = approx.tolist()
        return payload

    @app.get("/models/{model_id}/compare")
    def compare_subjects(model_id: str, sid_a: str, sid_b: str, mode: str = None):
        pipeline = store.model(model_id)
        mode = mode or _default_mode(pipeline)
        payload = _report(model_id, mode, ("fgdi",))
        cohort = store.cohort(store.model_entry(model_id)["cohort_id"])
        ia = _subject_index(cohort, sid_a)
        ib = _subject_index(cohort, sid_b)
        variables = list(payload["map_profile"])

        def side(i, sid):
            return {
                "subject_id": sid,
                "healthy": payload["healthy"][i],
                "metadata": payload["metadata"][i],
                "map": [payload["map_profile"][k][i] for k in variables],
            }

        return {
            "mode": mode,
            "variables": variables,
            "labels": [VariableId.from_key(k).label for k in variables],
            "a": side(ia, sid_a),
            "b": side(ib, sid_b),
        }

    return app
